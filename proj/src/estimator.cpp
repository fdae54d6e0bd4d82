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

#include "screwest/estimator.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>
#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "screwest/error.hpp"
#include "screwest/format.hpp"

namespace screwest {
namespace {

constexpr int kScrewOffset = 0;
constexpr int kPoseBOffset = 6;
constexpr int kFirstMeasurementOffset = 12;
constexpr int kPerMeasurement = 7;

int offset_of(const VariableKey& key) {
  switch (key.kind) {
    case VarKind::kScrew: return kScrewOffset;
    case VarKind::kPoseB: return kPoseBOffset;
    case VarKind::kTheta: return kFirstMeasurementOffset + kPerMeasurement * key.index;
    case VarKind::kPoseA: return kFirstMeasurementOffset + kPerMeasurement * key.index + 1;
  }
  return 0;
}

Vec6 pose_sigmas(double lin, double ang) {
  Vec6 s;
  s << lin, lin, lin, ang, ang, ang;
  return s;
}

struct Block {
  int offset;
  Eigen::MatrixXd jac;
};

struct Linearized {
  Eigen::VectorXd r;  // whitened
  std::vector<Block> blocks;
};

}  // namespace

std::string to_string(const VariableKey& key) {
  switch (key.kind) {
    case VarKind::kScrew: return "screw";
    case VarKind::kPoseB: return "poseB(0)";
    case VarKind::kTheta: return "theta(" + std::to_string(key.index) + ")";
    case VarKind::kPoseA: return "poseA(" + std::to_string(key.index) + ")";
  }
  return "?";
}

std::string_view to_string(FactorKind kind) {
  switch (kind) {
    case FactorKind::kPrior: return "prior";
    case FactorKind::kAffordance: return "affordance";
    case FactorKind::kArticulation: return "articulation";
    case FactorKind::kKinematicA: return "kinematicA";
    case FactorKind::kKinematicB: return "kinematicB";
  }
  return "?";
}

Vec6 residual_affordance(const Twist& xi, const Twist& xi_tilde, Mat6* d_xi) {
  if (d_xi != nullptr) *d_xi = Mat6::Identity();
  return xi.vector() - xi_tilde.vector();
}

Vec6 residual_articulation(const Twist& xi, double theta, const Pose& pose_a,
                           const Pose& pose_b, ArticulationJacobians* jac) {
  const Vec6 u = xi.vector() * theta;
  const Pose e = exp_twist(xi, theta);
  const Pose rel = inverse(pose_b) * pose_a;
  const Vec6 r = boxminus(e, rel);
  if (jac != nullptr) {
    const Mat6 jr_inv = se3_right_jacobian_inverse(r);
    const Mat6 de = jr_inv * se3_right_jacobian(u);
    jac->d_xi = de * theta;
    jac->d_theta = de * xi.vector();
    jac->d_pose_a = -se3_left_jacobian_inverse(r);
    jac->d_pose_b = jr_inv * adjoint(inverse(e));
  }
  return r;
}

Vec6 residual_kinematic(const Pose& t, const Pose& measured, Mat6* d_t) {
  const Vec6 r = boxminus(t, measured);
  if (d_t != nullptr) *d_t = se3_right_jacobian_inverse(r);
  return r;
}

double project_theta(const Twist& xi, const Pose& relative) {
  const Vec6 d = log_pose(relative);
  const double nw2 = xi.w.squaredNorm();
  if (std::sqrt(nw2) >= kPrismaticSnap) {
    return d.tail<3>().dot(xi.w) / nw2;
  }
  const double nv2 = xi.v.squaredNorm();
  if (nv2 == 0.0) return 0.0;
  return d.head<3>().dot(xi.v) / nv2;
}

namespace {

// Evaluates one factor at the given values. Jacobians are whitened; when
// `with_jacobians` is false only `r` is filled.
template <typename ValuesT>
Linearized linearize(const Factor& f, const ValuesT& v, bool with_jacobians) {
  Linearized out;
  const Eigen::VectorXd inv_sigma = f.sigmas.cwiseInverse();
  switch (f.kind) {
    case FactorKind::kPrior: {
      const VariableKey& key = f.keys.at(0);
      if (key.kind == VarKind::kScrew) {
        Mat6 j;
        out.r = residual_affordance(v.screw, std::get<Twist>(f.measurement), &j);
        if (with_jacobians) out.blocks.push_back({offset_of(key), inv_sigma.asDiagonal() * j});
      } else {
        out.r = Eigen::VectorXd::Constant(1, v.thetas.at(key.index) - std::get<double>(f.measurement));
        if (with_jacobians) out.blocks.push_back({offset_of(key), Eigen::MatrixXd::Constant(1, 1, inv_sigma(0))});
      }
      break;
    }
    case FactorKind::kAffordance: {
      Mat6 j;
      out.r = residual_affordance(v.screw, std::get<Twist>(f.measurement), &j);
      if (with_jacobians) out.blocks.push_back({kScrewOffset, inv_sigma.asDiagonal() * j});
      break;
    }
    case FactorKind::kKinematicA:
    case FactorKind::kKinematicB: {
      const VariableKey& key = f.keys.at(0);
      const Pose& t = key.kind == VarKind::kPoseB ? v.pose_b : v.poses_a.at(key.index);
      Mat6 j;
      out.r = residual_kinematic(t, std::get<Pose>(f.measurement), with_jacobians ? &j : nullptr);
      if (with_jacobians) out.blocks.push_back({offset_of(key), inv_sigma.asDiagonal() * j});
      break;
    }
    case FactorKind::kArticulation: {
      const int k = f.keys.at(1).index;
      ArticulationJacobians j;
      out.r = residual_articulation(v.screw, v.thetas.at(k), v.poses_a.at(k), v.pose_b,
                                    with_jacobians ? &j : nullptr);
      if (with_jacobians) {
        const auto w = inv_sigma.asDiagonal();
        out.blocks.push_back({kScrewOffset, w * j.d_xi});
        out.blocks.push_back({offset_of(VariableKey::theta(k)), w * j.d_theta});
        out.blocks.push_back({offset_of(VariableKey::pose_a(k)), w * j.d_pose_a});
        out.blocks.push_back({kPoseBOffset, w * j.d_pose_b});
      }
      break;
    }
  }
  out.r = out.r.cwiseProduct(inv_sigma);
  return out;
}

}  // namespace

Graph::Graph(EstimatorConfig config) : config_(config) {}

void Graph::initialize(const Pose& base_measurement,
                       const std::optional<ScrewPrediction>& prior) {
  *this = Graph(config_);
  initialized_ = true;
  base_measurement_ = base_measurement;
  last_accepted_ = base_measurement;
  pose_b_ = base_measurement;

  Factor fb;
  fb.kind = FactorKind::kKinematicB;
  fb.keys = {VariableKey::pose_b()};
  fb.measurement = base_measurement;
  fb.sigmas = pose_sigmas(config_.sigma_base_lin, config_.sigma_base_ang);
  factors_.push_back(fb);

  Factor fp;
  fp.kind = FactorKind::kPrior;
  fp.keys = {VariableKey::screw()};
  fp.measurement = Twist();
  fp.sigmas = Eigen::VectorXd::Constant(6, config_.sigma_prior_screw);
  factors_.push_back(fp);

  if (prior.has_value()) {
    has_affordance_ = true;
    screw_seeded_ = true;
    screw_ = prior->xi_tilde;
    Factor fa;
    fa.kind = FactorKind::kAffordance;
    fa.keys = {VariableKey::screw()};
    fa.measurement = prior->xi_tilde;
    fa.sigmas = Eigen::VectorXd::Constant(6, prior->sigma);
    factors_.push_back(fa);
  }
}

bool Graph::add_measurement(const Pose& measured, bool force) {
  if (!initialized_) {
    throw Error(ErrorCode::kGraphNotInitialized, "add_measurement before initialize");
  }
  const Pose delta = inverse(last_accepted_) * measured;
  const bool moved = delta.translation.norm() >= config_.gate_lin ||
                     rotation_angle(delta.rotation) >= config_.gate_ang;
  if (!force && !moved) return false;

  const Pose from_base = inverse(base_measurement_) * measured;
  if (from_base.translation.norm() >= config_.gate_lin ||
      rotation_angle(from_base.rotation) >= config_.gate_ang) {
    observable_ = true;
  }

  const Pose relative = inverse(pose_b_) * measured;
  if (!screw_seeded_) {
    // Without a prior the first displacement seeds the screw; poses that
    // coincide with the base carry no direction and keep theta = 0.
    const Vec3 t = relative.translation;
    if (t.norm() > 1e-9) {
      screw_ = Twist(t.normalized(), Vec3::Zero());
      screw_seeded_ = true;
    } else if (rotation_angle(relative.rotation) > 1e-9) {
      try {
        const Vec6 d = log_pose(relative);
        screw_ = Twist::from_vector(d / d.norm());
        screw_seeded_ = true;
      } catch (const Error&) {
      }
    }
  }

  double theta0 = thetas_.empty() ? 0.0 : thetas_.back();
  try {
    theta0 = project_theta(screw_, relative);
  } catch (const Error&) {
  }

  const int k = static_cast<int>(thetas_.size());
  thetas_.push_back(theta0);
  poses_a_.push_back(measured);
  last_accepted_ = measured;

  Factor ft;
  ft.kind = FactorKind::kPrior;
  ft.keys = {VariableKey::theta(k)};
  ft.measurement = 0.0;
  ft.sigmas = Eigen::VectorXd::Constant(1, config_.sigma_prior_theta);
  factors_.push_back(ft);

  Factor fk;
  fk.kind = FactorKind::kKinematicA;
  fk.keys = {VariableKey::pose_a(k)};
  fk.measurement = measured;
  fk.sigmas = pose_sigmas(config_.sigma_kin_lin, config_.sigma_kin_ang);
  factors_.push_back(fk);

  Factor fa;
  fa.kind = FactorKind::kArticulation;
  fa.keys = {VariableKey::screw(), VariableKey::theta(k), VariableKey::pose_a(k),
             VariableKey::pose_b()};
  fa.sigmas = pose_sigmas(config_.sigma_art_lin, config_.sigma_art_ang);
  factors_.push_back(fa);
  return true;
}

void Graph::set_values(const Values& v) {
  screw_ = v.screw;
  thetas_ = v.thetas;
  poses_a_ = v.poses_a;
  pose_b_ = v.pose_b;
}

double Graph::cost_of(const Values& v) const {
  double c = 0.0;
  for (const Factor& f : factors_) {
    c += linearize(f, v, false).r.squaredNorm();
  }
  return c;
}

double Graph::cost() const { return cost_of(values()); }

double Graph::evaluate_cost() const {
  double c = 0.0;
  for (const Factor& f : factors_) {
    Eigen::VectorXd r;
    switch (f.kind) {
      case FactorKind::kPrior:
        if (f.keys[0].kind == VarKind::kScrew) {
          r = screw_.vector() - std::get<Twist>(f.measurement).vector();
        } else {
          r = Eigen::VectorXd::Constant(1, thetas_[f.keys[0].index] - std::get<double>(f.measurement));
        }
        break;
      case FactorKind::kAffordance:
        r = screw_.vector() - std::get<Twist>(f.measurement).vector();
        break;
      case FactorKind::kKinematicA:
        r = log_pose(inverse(std::get<Pose>(f.measurement)) * poses_a_[f.keys[0].index]);
        break;
      case FactorKind::kKinematicB:
        r = log_pose(inverse(std::get<Pose>(f.measurement)) * pose_b_);
        break;
      case FactorKind::kArticulation: {
        const int k = f.keys[1].index;
        const Pose rel = inverse(pose_b_) * poses_a_[k];
        r = log_pose(inverse(rel) * exp_twist(screw_, thetas_[k]));
        break;
      }
    }
    c += r.cwiseQuotient(f.sigmas).squaredNorm();
  }
  return c;
}

Estimate Graph::make_estimate(double cost, int iterations, bool converged,
                              std::vector<double> history) const {
  Estimate e;
  double scale = 1.0;
  e.raw_xi = screw_;
  if (screw_.vector().norm() < 1e-12) {
    // Nothing (no motion, no prior) has moved the screw off its zero start.
    throw Error(ErrorCode::kSingularNormalEquations, "joint unobservable: no motion and no prior");
  }
  e.joint = classify(screw_, &scale);
  double far = 0.0;
  for (double t : thetas_) {
    if (std::abs(t * scale) > std::abs(far)) far = t * scale;
  }
  if (far < 0.0) {
    scale = -scale;
    e.joint.xi = e.joint.xi * -1.0;
  }
  e.thetas.reserve(thetas_.size());
  double lo = 0.0, hi = 0.0;
  for (double t : thetas_) {
    e.thetas.push_back(t * scale);
    lo = std::min(lo, t * scale);
    hi = std::max(hi, t * scale);
  }
  e.joint.theta_min = lo;
  e.joint.theta_max = hi > lo ? hi : lo + 1.0;
  e.final_cost = cost;
  e.iterations = iterations;
  e.converged = converged;
  e.observable = observable_;
  e.base_pose = pose_b_;
  e.cost_history = std::move(history);
  return e;
}

Estimate Graph::current_estimate() const {
  return make_estimate(cost(), 0, false, {cost()});
}

Estimate Graph::optimize() {
  if (!initialized_) {
    throw Error(ErrorCode::kGraphNotInitialized, "optimize before initialize");
  }
  if (thetas_.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "optimize needs at least one articulation factor");
  }
  const int n = kFirstMeasurementOffset + kPerMeasurement * static_cast<int>(thetas_.size());

  Values current = values();
  double cost = cost_of(current);
  std::vector<double> history{cost};
  double lambda = config_.lambda_init;
  bool converged = false;
  int iter = 0;

  Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt;
  bool pattern_ready = false;

  for (; iter < config_.max_iterations && !converged; ++iter) {
    // Assemble the whitened Jacobian.
    std::vector<Eigen::Triplet<double>> trip;
    Eigen::VectorXd r_all;
    std::vector<Linearized> lins;
    lins.reserve(factors_.size());
    int rows = 0;
    for (const Factor& f : factors_) {
      lins.push_back(linearize(f, current, true));
      rows += static_cast<int>(lins.back().r.size());
    }
    r_all.resize(rows);
    int row = 0;
    for (const Linearized& l : lins) {
      const int m = static_cast<int>(l.r.size());
      r_all.segment(row, m) = l.r;
      for (const Block& b : l.blocks) {
        for (int i = 0; i < b.jac.rows(); ++i) {
          for (int j = 0; j < b.jac.cols(); ++j) {
            // Structural zeros stay in: the factorization pattern is analyzed once.
            trip.emplace_back(row + i, b.offset + j, b.jac(i, j));
          }
        }
      }
      row += m;
    }
    Eigen::SparseMatrix<double> jac(rows, n);
    jac.setFromTriplets(trip.begin(), trip.end());
    const Eigen::SparseMatrix<double> jt = jac.transpose();
    Eigen::SparseMatrix<double> h = jt * jac;
    const Eigen::VectorXd g = jt * r_all;
    if (g.lpNorm<Eigen::Infinity>() == 0.0) {
      converged = true;
      break;
    }

    // Marquardt damping via Jacobi scaling: (S H S + lambda I) y = -S g.
    Eigen::VectorXd s(n);
    for (int i = 0; i < n; ++i) {
      const double d = h.coeff(i, i);
      s(i) = d > 1e-300 ? 1.0 / std::sqrt(d) : 1.0;
    }
    const Eigen::SparseMatrix<double> hs = s.asDiagonal() * h * s.asDiagonal();
    Eigen::SparseMatrix<double> ident(n, n);
    ident.setIdentity();
    if (!pattern_ready) {
      llt.analyzePattern(hs + ident);
      pattern_ready = true;
    }

    bool accepted = false;
    while (!accepted) {
      llt.factorize(hs + lambda * ident);
      if (llt.info() != Eigen::Success) {
        if (lambda >= 1e8) {
          throw Error(ErrorCode::kSingularNormalEquations,
                      "damped normal equations not positive definite");
        }
        lambda *= 10.0;
        continue;
      }
      const Eigen::VectorXd y = llt.solve(-s.cwiseProduct(g));
      const Eigen::VectorXd delta = s.cwiseProduct(y);

      Values cand = current;
      cand.screw = Twist::from_vector(current.screw.vector() + delta.segment<6>(kScrewOffset));
      cand.pose_b = renormalized(current.pose_b * se3_exp(delta.segment<6>(kPoseBOffset)));
      for (std::size_t k = 0; k < cand.thetas.size(); ++k) {
        const int off = kFirstMeasurementOffset + kPerMeasurement * static_cast<int>(k);
        cand.thetas[k] += delta(off);
        cand.poses_a[k] = renormalized(current.poses_a[k] * se3_exp(delta.segment<6>(off + 1)));
      }

      double cand_cost = std::numeric_limits<double>::infinity();
      try {
        cand_cost = cost_of(cand);
      } catch (const Error&) {
      }
      if (std::isfinite(cand_cost) && cand_cost < cost) {
        const double rel = (cost - cand_cost) / cost;
        current = std::move(cand);
        cost = cand_cost;
        history.push_back(cost);
        lambda = std::max(lambda * 0.1, 1e-12);
        accepted = true;
        if (rel < config_.relative_tolerance || cost == 0.0) converged = true;
      } else {
        lambda *= 10.0;
        if (lambda > 1e16) {
          // No decrease possible at any damping: at a numerical minimum.
          converged = true;
          break;
        }
      }
    }
  }

  set_values(current);
  return make_estimate(cost, iter, converged, std::move(history));
}

void Graph::merge_values(const Graph& snapshot) {
  screw_ = snapshot.screw_;
  pose_b_ = snapshot.pose_b_;
  const std::size_t shared = std::min(thetas_.size(), snapshot.thetas_.size());
  for (std::size_t k = 0; k < shared; ++k) {
    thetas_[k] = snapshot.thetas_[k];
    poses_a_[k] = snapshot.poses_a_[k];
  }
}

namespace {

void write_pose(std::ostream& out, const Pose& t) {
  const Eigen::Quaterniond q = to_quaternion(t.rotation);
  out << fmt_num(t.translation.x()) << ' ' << fmt_num(t.translation.y()) << ' '
      << fmt_num(t.translation.z()) << ' ' << fmt_num(q.w()) << ' ' << fmt_num(q.x()) << ' '
      << fmt_num(q.y()) << ' ' << fmt_num(q.z());
}

void write_twist(std::ostream& out, const Twist& xi) {
  const Vec6 x = xi.vector();
  for (int i = 0; i < 6; ++i) out << (i ? " " : "") << fmt_num(x(i));
}

}  // namespace

void Graph::write_dump(std::ostream& out) const {
  out << "# graph v1 measurements=" << thetas_.size() << " factors=" << factors_.size() << '\n';
  out << "var screw ";
  write_twist(out, screw_);
  out << "\nvar poseB(0) ";
  write_pose(out, pose_b_);
  out << '\n';
  for (std::size_t k = 0; k < thetas_.size(); ++k) {
    out << "var theta(" << k << ") " << fmt_num(thetas_[k]) << '\n';
    out << "var poseA(" << k << ") ";
    write_pose(out, poses_a_[k]);
    out << '\n';
  }
  for (const Factor& f : factors_) {
    out << "factor " << to_string(f.kind) << " keys=";
    for (std::size_t i = 0; i < f.keys.size(); ++i) {
      out << (i ? "," : "") << to_string(f.keys[i]);
    }
    out << " meas=";
    if (const auto* tw = std::get_if<Twist>(&f.measurement)) {
      write_twist(out, *tw);
    } else if (const auto* p = std::get_if<Pose>(&f.measurement)) {
      write_pose(out, *p);
    } else if (const auto* d = std::get_if<double>(&f.measurement)) {
      out << fmt_num(*d);
    } else {
      out << "none";
    }
    out << " sigmas=";
    for (Eigen::Index i = 0; i < f.sigmas.size(); ++i) {
      out << (i ? "," : "") << fmt_num(f.sigmas(i));
    }
    out << '\n';
  }
}

std::vector<BatchResult> run_batched(Graph& graph, const std::vector<Pose>& stream) {
  if (!graph.initialized()) {
    throw Error(ErrorCode::kGraphNotInitialized, "run_batched on an uninitialized graph");
  }
  std::vector<BatchResult> out;
  const int batch = std::max(1, graph.config().batch_size);
  int pending = 0;
  auto emit = [&]() {
    BatchResult br;
    br.accepted_total = graph.num_measurements();
    try {
      br.estimate = graph.optimize();
    } catch (const Error& e) {
      br.error = e.what();
    }
    out.push_back(std::move(br));
    pending = 0;
  };
  for (const Pose& p : stream) {
    if (graph.add_measurement(p)) {
      if (++pending == batch) emit();
    }
  }
  if (pending > 0) emit();
  return out;
}

}  // namespace screwest
