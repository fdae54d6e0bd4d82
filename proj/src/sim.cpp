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

#include "screwest/sim.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "screwest/error.hpp"
#include "screwest/metrics.hpp"

namespace screwest {

EstimatorConfig closed_loop_estimator_config() {
  EstimatorConfig c;
  c.sigma_kin_lin = 1e-6;
  c.sigma_kin_ang = 1e-5;
  c.sigma_art_lin = 1e-6;
  c.sigma_art_ang = 1e-5;
  return c;
}

void validate(const Scenario& sc) {
  auto bad = [](const std::string& what) { throw Error(ErrorCode::kInvalidArgument, what); };
  if (!(sc.compliance.gain > 0.0 && sc.compliance.gain <= 1.0)) bad("compliance gain must be in (0, 1]");
  if (!(sc.compliance.search_half_width > 0.0)) bad("compliance search width must be positive");
  if (!(sc.compliance.rotation_weight >= 0.0)) bad("rotation weight must be non-negative");
  if (sc.max_ticks <= 0) bad("max_ticks must be positive");
  if (!(sc.controller.dt > 0.0)) bad("controller dt must be positive");
  if (!(sc.controller.gv != 0.0) || !std::isfinite(sc.controller.gv)) bad("controller gv must be nonzero");
  if (!(sc.controller.theta_lo < sc.controller.theta_hi)) bad("controller theta range is empty");
  if (!(sc.controller.stall_distance > 0.0)) bad("controller stall distance must be positive");
  if (!(sc.controller.max_speed > 0.0)) bad("controller max speed must be positive");
  if (!(sc.object.joint.theta_min < sc.object.joint.theta_max)) bad("joint limits are empty");
  if (!(sc.noise.lin >= 0.0 && sc.noise.ang >= 0.0)) bad("noise sigmas must be non-negative");
  if (sc.prior.enabled && (!(sc.prior.step > 0.0) || !(sc.prior.sigma > 0.0) || sc.prior.n_points < 3)) {
    bad("prior needs step > 0, sigma > 0 and at least 3 points");
  }
  if (!is_valid(sc.object.base_pose) || !is_valid(sc.object.grasp_offset) || !is_valid(sc.robot_base)) {
    bad("poses must be valid rigid transforms");
  }
  if (!sc.object.joint.xi.all_finite()) bad("joint screw must be finite");
  if (sc.q_start.size() != 0 && sc.q_start.size() != sc.chain.n_joints()) bad("q_start size mismatch");
  validate(sc.chain);
}

Pose default_robot_base(const ArticulatedObject& obj, double reach) {
  const Pose g = grasp_pose(obj);
  return Pose::from_translation(g.translation - reach * g.rotation.col(2));
}

namespace {

double projection_cost(const ArticulatedObject& obj, double theta, const Pose& commanded,
                       double rotation_weight) {
  const Pose p = fk_grasp(obj, theta);
  const double dt = (p.translation - commanded.translation).squaredNorm();
  const double ang = rotation_angle(p.rotation.transpose() * commanded.rotation);
  return dt + (rotation_weight * ang) * (rotation_weight * ang);
}

}  // namespace

ComplyResult comply(const ArticulatedObject& obj, double theta_true, const Pose& commanded,
                    double gain, double rotation_weight, double half_width) {
  constexpr double kInvPhi = 0.6180339887498949;
  // Past the joint limits fk_grasp clamps and the objective goes flat, which
  // breaks the unimodality the search relies on.
  double a = std::max(theta_true - half_width, obj.joint.theta_min);
  double b = std::min(theta_true + half_width, obj.joint.theta_max);
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double fc = projection_cost(obj, c, commanded, rotation_weight);
  double fd = projection_cost(obj, d, commanded, rotation_weight);
  while (b - a > 1e-8) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = projection_cost(obj, c, commanded, rotation_weight);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = projection_cost(obj, d, commanded, rotation_weight);
    }
  }
  double star = 0.5 * (a + b);
  // The bracket is local; keep the current configuration when it is at
  // least as good (no spurious drift on a flat objective).
  if (projection_cost(obj, theta_true, commanded, rotation_weight) <=
      projection_cost(obj, star, commanded, rotation_weight)) {
    star = theta_true;
  }
  ComplyResult out;
  out.theta_star = star;
  out.theta_new = clamp_theta(obj.joint, theta_true + gain * (star - theta_true));
  out.achieved = fk_grasp(obj, out.theta_new);
  return out;
}

namespace {

Eigen::VectorXd default_seed(const KinematicChain& chain) {
  Eigen::VectorXd q = Eigen::VectorXd::Zero(chain.n_joints());
  // Elbow-bent pose away from the straight-arm singularity.
  for (int i = 1; i < chain.n_joints(); i += 2) q(i) = (i % 4 == 1) ? 0.6 : -1.1;
  return q.cwiseMax(chain.lb_q).cwiseMin(chain.ub_q);
}

struct Controller {
  Twist xi;   // grasp-frame screw currently believed
  Pose base;  // frame of xi
  ControllerState st;
};

}  // namespace

RunResult run_closed_loop(const Scenario& sc) {
  validate(sc);
  RunResult res;
  const ArticulatedObject& obj = sc.object;
  std::mt19937_64 rng(sc.seed);
  const Pose robot_inv = inverse(sc.robot_base);
  IkWeights w;
  w.dt = sc.controller.dt;

  double theta_true = clamp_theta(obj.joint, 0.0);
  const double theta_start = theta_true;
  const double success_level = sc.success_fraction * sc.controller.theta_hi;
  bool reached = false;
  res.theta_max_reached = theta_true;

  struct Emission {
    int tick;
    double similarity;
    JointKind kind;
    double theta_true;
  };
  std::vector<Emission> emissions;

  try {
    const Pose grasp0 = fk_grasp(obj, theta_true);
    Eigen::VectorXd q = sc.q_start.size() ? sc.q_start : default_seed(sc.chain);
    const IkStep start = solve_ik(sc.chain, q, robot_inv * grasp0, w, 5000, 1e-9);
    if (start.position_error > 1e-6 || start.rotation_error > 1e-6) {
      throw Error(ErrorCode::kInfeasible, "initial grasp pose is out of the arm's reach");
    }
    q = start.q;

    const Pose base_meas = measure(grasp0, sc.noise, rng);
    Graph graph(sc.estimator);
    std::optional<ScrewPrediction> prior;
    Controller ctrl;
    ctrl.base = base_meas;
    if (sc.prior.enabled) {
      const FlowCloud cloud = corrupt(oracle_flow(obj, theta_true, sc.prior.n_points, sc.seed),
                                      sc.prior.mode, sc.seed + 1);
      ScrewPrediction pw = predict_screw(cloud, sc.prior.step, sc.prior.sigma);
      pw.xi_tilde = adjoint(inverse(base_meas), pw.xi_tilde);
      prior = pw;
      ctrl.xi = classify(pw.xi_tilde).xi;
    } else {
      // No prior: pull straight back along the approach axis.
      ctrl.xi = Twist(-Vec3::UnitZ(), Vec3::Zero());
    }
    graph.initialize(base_meas, prior);
    ctrl.st.gv = sc.controller.gv;
    ctrl.st.dt = sc.controller.dt;
    ctrl.st.theta_cmd = std::clamp(0.0, sc.controller.theta_lo, sc.controller.theta_hi);

    int pending = 0;
    for (int t = 0; t < sc.max_ticks; ++t) {
      TickRecord rec;
      rec.t = t;
      const Vec3 here = exp_twist(ctrl.xi, ctrl.st.theta_cmd).translation;
      const double speed = tangent_at(ctrl.xi, here).norm();
      const double rate = std::min(std::abs(sc.controller.gv),
                                   speed > 0.0 ? sc.controller.max_speed / speed : INFINITY);
      ctrl.st.gv = std::copysign(rate, ctrl.st.gv);
      ctrl.st = schedule_theta(ctrl.st, sc.controller.theta_lo, sc.controller.theta_hi);
      const Pose target = ctrl.base * exp_twist(ctrl.xi, ctrl.st.theta_cmd);
      const IkStep step = ik_step(sc.chain, q, robot_inv * target, w);
      const Pose commanded = sc.robot_base * fk_chain(sc.chain, step.q);
      rec.slack_norm = step.slack_norm;

      const ComplyResult cr = comply(obj, theta_true, commanded, sc.compliance.gain,
                                     sc.compliance.rotation_weight,
                                     sc.compliance.search_half_width);
      theta_true = cr.theta_new;
      if (ctrl.st.gv > 0.0 &&
          (target.translation - cr.achieved.translation).norm() > sc.controller.stall_distance) {
        ctrl.st.gv = -ctrl.st.gv;
      }
      // Joint compliance keeps the arm on the handle.
      q = step.q;
      for (int k = 0; k < 3; ++k) {
        const IkStep back = ik_step(sc.chain, q, robot_inv * cr.achieved, w);
        q = back.q;
        if (back.position_error < 1e-9 && back.rotation_error < 1e-9) break;
      }

      const Pose meas = measure(cr.achieved, sc.noise, rng);
      rec.accepted = graph.add_measurement(meas);
      if (rec.accepted && ++pending >= sc.estimator.batch_size) {
        pending = 0;
        Estimate e = graph.optimize();
        const double sim = similarity_over_range(obj, e);
        ctrl.xi = e.joint.xi;
        ctrl.base = e.base_pose;
        ctrl.st.theta_cmd = std::clamp(e.thetas.back(), sc.controller.theta_lo,
                                       sc.controller.theta_hi);
        emissions.push_back({t, sim, e.joint.kind, theta_true});
        rec.tangent_similarity_current = sim;
        res.final_estimate = e;
        res.final_similarity = sim;
        rec.estimate_current = std::move(e);
        ++res.emitted;
      }

      rec.theta_true = theta_true;
      rec.theta_cmd = ctrl.st.theta_cmd;
      rec.ee_pose_meas = meas;
      rec.ee_pose_achieved = cr.achieved;
      res.ticks.push_back(std::move(rec));
      res.theta_max_reached = std::max(res.theta_max_reached, theta_true);
      if (theta_true >= success_level) reached = true;
      const double range = obj.joint.theta_max - obj.joint.theta_min;
      if (reached && std::abs(theta_true - theta_start) <= 0.02 * range) break;
    }

    if (pending > 0) {
      // Final partial batch.
      Estimate e = graph.optimize();
      const double sim = similarity_over_range(obj, e);
      emissions.push_back({res.ticks.empty() ? 0 : res.ticks.back().t, sim, e.joint.kind,
                           theta_true});
      res.final_estimate = e;
      res.final_similarity = sim;
      if (!res.ticks.empty()) {
        res.ticks.back().tangent_similarity_current = sim;
        res.ticks.back().estimate_current = std::move(e);
      }
      ++res.emitted;
    }
  } catch (const Error& e) {
    res.error = e.what();
  }

  res.theta_final = theta_true;
  res.success = res.error.empty() && reached;

  // Converged: the first emission after which every emitted estimate has
  // the true joint kind and reaches the similarity threshold.
  const JointKind truth_kind = classify(obj.joint.xi).kind;
  std::optional<std::size_t> first_good;
  for (std::size_t i = 0; i < emissions.size(); ++i) {
    const bool good =
        emissions[i].kind == truth_kind && emissions[i].similarity >= sc.converge_similarity;
    if (good && !first_good) first_good = i;
    if (!good) first_good.reset();
  }
  if (first_good) {
    res.converged_tick = emissions[*first_good].tick;
    res.theta_at_convergence = emissions[*first_good].theta_true;
  }
  return res;
}

GeneratedData generate_data(const Scenario& sc) {
  validate(sc);
  GeneratedData out;
  const Joint& j = sc.object.joint;
  out.truth = generate_sweep(sc.object, j.theta_min, j.theta_max, std::abs(sc.controller.gv),
                             sc.controller.dt);
  out.measured = add_noise(out.truth, sc.noise, sc.seed);
  out.cloud = oracle_flow(sc.object, 0.0, sc.prior.n_points, sc.seed);
  return out;
}

}  // namespace screwest
