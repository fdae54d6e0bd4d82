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

// Compliant-interaction simulator and the closed-loop runner: affordance
// prior -> controller -> IK -> compliant object -> noisy measurement ->
// estimator -> controller.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "screwest/affordance.hpp"
#include "screwest/estimator.hpp"
#include "screwest/motion.hpp"
#include "screwest/trajectory.hpp"

namespace screwest {

struct PriorConfig {
  bool enabled = true;
  CorruptMode mode;
  double step = kDefaultFlowStep;
  double sigma = 1e-3;
  int n_points = 500;
};

struct ComplianceConfig {
  double gain = 1.0;            // (0, 1]
  double rotation_weight = 0.1;  // m/rad in the projection objective
  double search_half_width = 0.2;
};

struct ControllerConfig {
  double gv = 0.05;
  double dt = 0.02;
  double theta_lo = 0.0;
  double theta_hi = 1.0;
  // End-stop surrogate: while opening, a target leading the achieved grasp by
  // more than this (m) means the joint has stopped, so the controller reverses.
  double stall_distance = 0.01;
  // Cap on the commanded grasp speed (m/s); matters when an estimate has a
  // far-away axis, where gv alone would sweep the grasp very fast.
  double max_speed = 0.1;
};

/// Estimator settings for closed-loop runs. Kinematic factors are tight so
/// that a few degrees of motion outweigh a confidently wrong prior.
EstimatorConfig closed_loop_estimator_config();

struct Scenario {
  std::string name = "scenario";
  ArticulatedObject object;
  PriorConfig prior;
  NoiseSigma noise;
  ComplianceConfig compliance;
  ControllerConfig controller;
  KinematicChain chain = default_chain();
  Pose robot_base;           // chain base in the world
  Eigen::VectorXd q_start;   // IK seed; empty selects a default bent pose
  EstimatorConfig estimator = closed_loop_estimator_config();
  std::uint64_t seed = 1;
  int max_ticks = 20000;
  double success_fraction = 0.9;     // of controller.theta_hi
  double converge_similarity = 0.99;
};

/// Throws kInvalidArgument when the scenario breaks its invariants.
void validate(const Scenario& sc);

/// Places the robot base `reach` meters behind the grasp along the grasp
/// frame's z axis, with the world orientation.
Pose default_robot_base(const ArticulatedObject& obj, double reach = 0.6);

struct ComplyResult {
  double theta_new = 0.0;
  double theta_star = 0.0;  // unconstrained projection
  Pose achieved;
};

/// Projects `commanded` onto the true articulation manifold by golden-section
/// search over theta_true +- half_width and moves `gain` of the way there.
ComplyResult comply(const ArticulatedObject& obj, double theta_true, const Pose& commanded,
                    double gain, double rotation_weight = 0.1, double half_width = 0.2);

struct TickRecord {
  int t = 0;
  double theta_true = 0.0;
  double theta_cmd = 0.0;
  Pose ee_pose_meas;
  Pose ee_pose_achieved;
  bool accepted = false;
  double slack_norm = 0.0;
  std::optional<Estimate> estimate_current;  // set on ticks that emit
  std::optional<double> tangent_similarity_current;
};

struct RunResult {
  bool success = false;
  std::vector<TickRecord> ticks;
  std::optional<Estimate> final_estimate;
  double final_similarity = 0.0;
  double theta_max_reached = 0.0;
  double theta_final = 0.0;
  std::optional<int> converged_tick;
  double theta_at_convergence = 0.0;
  int emitted = 0;
  std::string error;
};

/// Runs the closed loop until `max_ticks` or a completed open-close cycle.
/// Library errors end the run early with `error` set and success = false.
RunResult run_closed_loop(const Scenario& sc);

/// Hand-guided stand-in: noiseless and noisy sweeps over the object's range
/// at the controller rate, plus the oracle flow cloud at theta = 0.
struct GeneratedData {
  Trajectory truth;
  Trajectory measured;
  FlowCloud cloud;
};
GeneratedData generate_data(const Scenario& sc);

}  // namespace screwest
