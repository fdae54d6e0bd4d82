// Copyright 2026 The screwest Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//
// Factor graph over {screw, theta_k, part pose A_k, base pose B} solved with
// Levenberg-Marquardt on the product manifold. Pose variables retract on the
// right (T <- T Exp(d)); the screw and joint coordinates are Euclidean.

#pragma once

#include <compare>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "screwest/affordance.hpp"
#include "screwest/articulation.hpp"

namespace screwest {

enum class VarKind { kScrew, kTheta, kPoseA, kPoseB };

struct VariableKey {
  VarKind kind = VarKind::kScrew;
  int index = 0;  // always 0 for kScrew and kPoseB

  static VariableKey screw() { return {VarKind::kScrew, 0}; }
  static VariableKey theta(int k) { return {VarKind::kTheta, k}; }
  static VariableKey pose_a(int k) { return {VarKind::kPoseA, k}; }
  static VariableKey pose_b() { return {VarKind::kPoseB, 0}; }

  auto operator<=>(const VariableKey&) const = default;
};

std::string to_string(const VariableKey& key);

enum class FactorKind { kPrior, kAffordance, kArticulation, kKinematicA, kKinematicB };

std::string_view to_string(FactorKind kind);

struct Factor {
  FactorKind kind = FactorKind::kPrior;
  std::vector<VariableKey> keys;
  // Twist for screw priors and the affordance factor, double for theta
  // priors, Pose for kinematic factors, nothing for articulation.
  std::variant<std::monostate, Twist, double, Pose> measurement;
  Eigen::VectorXd sigmas;  // one per residual component
};

struct EstimatorConfig {
  double gate_lin = 0.002;                  // m
  double gate_ang = 0.5 * 0.017453292519943295;  // rad
  int batch_size = 20;

  double sigma_prior_screw = 10.0;
  double sigma_prior_theta = 10.0;
  double sigma_kin_lin = 1e-3;
  double sigma_kin_ang = 1e-2;
  double sigma_art_lin = 1e-3;
  double sigma_art_ang = 1e-2;
  double sigma_base_lin = 1e-6;
  double sigma_base_ang = 1e-6;

  double lambda_init = 1e-4;
  int max_iterations = 100;
  double relative_tolerance = 1e-9;
};

/// The joint is oriented so that the accepted measurement farthest from the
/// base has theta >= 0: positive theta follows the observed motion.
struct Estimate {
  Joint joint;                 // classified, gauge-normalized
  Twist raw_xi;                // screw as optimized, before classification
  std::vector<double> thetas;  // in the classified gauge
  double final_cost = 0.0;
  int iterations = 0;
  bool converged = false;
  bool observable = false;     // some accepted measurement moved past the gate
  Pose base_pose;              // optimized PoseB
  std::vector<double> cost_history;  // accepted-step costs, starting with the initial cost
};

// Residuals. Jacobians are taken w.r.t. right perturbations of poses and
// plain perturbations of xi and theta.

Vec6 residual_affordance(const Twist& xi, const Twist& xi_tilde, Mat6* d_xi = nullptr);

struct ArticulationJacobians {
  Mat6 d_xi;
  Vec6 d_theta;
  Mat6 d_pose_a;
  Mat6 d_pose_b;
};

/// Exp(xi theta) boxminus (TB^-1 TA).
Vec6 residual_articulation(const Twist& xi, double theta, const Pose& pose_a,
                           const Pose& pose_b, ArticulationJacobians* jac = nullptr);

/// T boxminus T_meas.
Vec6 residual_kinematic(const Pose& t, const Pose& measured, Mat6* d_t = nullptr);

/// Joint coordinate of `relative` along `xi`: the chord projection onto the
/// angular part if |w| >= 0.01, otherwise onto the linear part.
double project_theta(const Twist& xi, const Pose& relative);

class Graph {
 public:
  explicit Graph(EstimatorConfig config = {});

  /// Seeds PoseB with its unary factor, the screw priors and, if given, the
  /// affordance factor. `prior` must be expressed in the frame of `base`.
  void initialize(const Pose& base_measurement,
                  const std::optional<ScrewPrediction>& prior = std::nullopt);

  bool initialized() const { return initialized_; }

  /// Gates and adds one kinematic measurement. Throws kGraphNotInitialized.
  bool add_measurement(const Pose& measured, bool force = false);

  /// Minimizes the whitened cost in place and returns the classified result.
  Estimate optimize();

  /// Sum of squared whitened residuals at the current values.
  double cost() const;

  /// Re-evaluates the cost from scratch, factor by factor, without the
  /// linearization machinery.
  double evaluate_cost() const;

  /// Current estimate without running the optimizer.
  Estimate current_estimate() const;

  /// Copies variable values from a snapshot for keys both graphs share.
  void merge_values(const Graph& snapshot);

  void write_dump(std::ostream& out) const;

  const EstimatorConfig& config() const { return config_; }
  const std::vector<Factor>& factors() const { return factors_; }
  int num_measurements() const { return static_cast<int>(thetas_.size()); }

  const Twist& screw() const { return screw_; }
  double theta(int k) const { return thetas_.at(k); }
  const Pose& pose_a(int k) const { return poses_a_.at(k); }
  const Pose& pose_b() const { return pose_b_; }
  const Pose& last_accepted() const { return last_accepted_; }

  void set_screw(const Twist& xi) { screw_ = xi; }
  void set_theta(int k, double theta) { thetas_.at(k) = theta; }
  void set_pose_a(int k, const Pose& t) { poses_a_.at(k) = t; }
  void set_pose_b(const Pose& t) { pose_b_ = t; }

 private:
  struct Values {
    Twist screw;
    std::vector<double> thetas;
    std::vector<Pose> poses_a;
    Pose pose_b;
  };

  Values values() const { return {screw_, thetas_, poses_a_, pose_b_}; }
  void set_values(const Values& v);
  double cost_of(const Values& v) const;
  Estimate make_estimate(double cost, int iterations, bool converged,
                         std::vector<double> history) const;

  EstimatorConfig config_;
  bool initialized_ = false;
  bool has_affordance_ = false;
  bool screw_seeded_ = false;
  bool observable_ = false;
  Pose base_measurement_;
  Pose last_accepted_;

  Twist screw_;
  std::vector<double> thetas_;
  std::vector<Pose> poses_a_;
  Pose pose_b_;
  std::vector<Factor> factors_;
};

struct BatchResult {
  int accepted_total = 0;  // accepted measurements in the graph at emission
  std::optional<Estimate> estimate;
  std::string error;       // set when this batch's optimize failed
};

/// Feeds a pose stream through the gate, optimizing after every
/// `batch_size` accepted measurements and once more for a final partial batch.
std::vector<BatchResult> run_batched(Graph& graph, const std::vector<Pose>& stream);

}  // namespace screwest
