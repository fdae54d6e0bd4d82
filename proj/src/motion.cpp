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

#include "screwest/motion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "screwest/error.hpp"

namespace screwest {

KinematicChain default_chain() {
  KinematicChain c;
  for (int i = 0; i < 7; ++i) {
    ChainJoint j;
    j.axis = (i % 2 == 0) ? Vec3::UnitZ() : Vec3::UnitY();
    j.origin = Pose::from_translation(Vec3(0.0, 0.0, i == 0 ? 0.0 : 0.2));
    c.joints.push_back(j);
  }
  c.tool = Pose::from_translation(Vec3(0.0, 0.0, 0.2));
  c.lb_q = Eigen::VectorXd::Constant(7, -2.9);
  c.ub_q = Eigen::VectorXd::Constant(7, 2.9);
  c.lb_dq = Eigen::VectorXd::Constant(7, -1.5);
  c.ub_dq = Eigen::VectorXd::Constant(7, 1.5);
  return c;
}

void validate(const KinematicChain& chain) {
  const Eigen::Index n = chain.n_joints();
  if (n == 0 || chain.lb_q.size() != n || chain.ub_q.size() != n ||
      chain.lb_dq.size() != n || chain.ub_dq.size() != n) {
    throw Error(ErrorCode::kInvalidArgument, "chain bounds do not match the joint count");
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(chain.lb_q(i) < chain.ub_q(i)) || !(chain.lb_dq(i) < chain.ub_dq(i))) {
      throw Error(ErrorCode::kInvalidArgument, "chain bounds must satisfy lb < ub");
    }
    if (std::abs(chain.joints[i].axis.norm() - 1.0) > 1e-9) {
      throw Error(ErrorCode::kInvalidArgument, "chain joint axes must be unit length");
    }
  }
}

namespace {

Twist joint_screw(const ChainJoint& j) {
  return j.prismatic ? Twist(j.axis, Vec3::Zero()) : Twist(Vec3::Zero(), j.axis);
}

}  // namespace

Pose fk_chain(const KinematicChain& chain, const Eigen::VectorXd& q) {
  Pose t;
  for (int i = 0; i < chain.n_joints(); ++i) {
    t = t * chain.joints[i].origin * exp_twist(joint_screw(chain.joints[i]), q(i));
  }
  return t * chain.tool;
}

Eigen::Matrix<double, 6, Eigen::Dynamic> jacobian_chain(const KinematicChain& chain,
                                                        const Eigen::VectorXd& q) {
  const int n = chain.n_joints();
  std::vector<Vec3> axes(n), origins(n);
  Pose t;
  for (int i = 0; i < n; ++i) {
    t = t * chain.joints[i].origin;
    axes[i] = t.rotation * chain.joints[i].axis;
    origins[i] = t.translation;
    t = t * exp_twist(joint_screw(chain.joints[i]), q(i));
  }
  const Vec3 pe = (t * chain.tool).translation;
  Eigen::Matrix<double, 6, Eigen::Dynamic> jac(6, n);
  for (int i = 0; i < n; ++i) {
    if (chain.joints[i].prismatic) {
      jac.col(i) << axes[i], Vec3::Zero();
    } else {
      jac.col(i) << axes[i].cross(pe - origins[i]), axes[i];
    }
  }
  return jac;
}

ControllerState schedule_theta(const ControllerState& st, double theta_lo, double theta_hi) {
  ControllerState next = st;
  next.theta_cmd = st.theta_cmd + st.gv * st.dt;
  if (next.theta_cmd >= theta_hi) {
    next.theta_cmd = theta_hi;
    next.gv = -std::abs(st.gv);
  } else if (next.theta_cmd <= theta_lo) {
    next.theta_cmd = theta_lo;
    next.gv = std::abs(st.gv);
  }
  return next;
}

Vec6 pose_error(const Pose& current, const Pose& target) {
  const Mat3 rel = current.rotation.transpose() * target.rotation;
  Vec3 phi;
  try {
    phi = so3_log(rel);
  } catch (const Error&) {
    // On the branch cut any axis is a valid descent direction; take the
    // dominant column of R + I.
    const Mat3 s = 0.5 * (rel + Mat3::Identity());
    Eigen::Index k = 0;
    s.diagonal().maxCoeff(&k);
    phi = s.col(k).normalized() * rotation_angle(rel);
  }
  Vec6 e;
  e << target.translation - current.translation, current.rotation * phi;
  return e;
}

IkStep ik_step(const KinematicChain& chain, const Eigen::VectorXd& q, const Pose& target,
               const IkWeights& weights) {
  const int n = chain.n_joints();
  const double dt = weights.dt;
  const Pose current = fk_chain(chain, q);
  const Vec6 err = pose_error(current, target);
  const auto jac = jacobian_chain(chain, q);

  constexpr double kInf = std::numeric_limits<double>::infinity();
  QProblem p;
  p.cost = Eigen::MatrixXd::Zero(n + 6, n + 6);
  p.cost.topLeftCorner(n, n).diagonal().setConstant(weights.joint_velocity);
  p.cost.bottomRightCorner(6, 6).diagonal().setConstant(weights.slack);
  p.a.resize(6, n + 6);
  p.a << jac, Eigen::Matrix<double, 6, 6>::Identity();
  p.lb_a = err / dt;
  p.ub_a = err / dt;
  p.lb.resize(n + 6);
  p.ub.resize(n + 6);
  for (int i = 0; i < n; ++i) {
    double lo = std::max(chain.lb_dq(i), (chain.lb_q(i) - q(i)) / dt);
    double hi = std::min(chain.ub_dq(i), (chain.ub_q(i) - q(i)) / dt);
    if (lo > hi) {
      // q already outside its limits: only allow motion back inside.
      lo = std::min(lo, 0.0);
      hi = std::max(hi, 0.0);
      lo = std::min(lo, hi);
    }
    p.lb(i) = lo;
    p.ub(i) = hi;
  }
  p.lb.tail(6).setConstant(-kInf);
  p.ub.tail(6).setConstant(kInf);

  const QpSolution sol = solve_qp(p);
  IkStep out;
  out.qdot = sol.x.head(n);
  out.q = (q + out.qdot * dt).cwiseMax(chain.lb_q).cwiseMin(chain.ub_q);
  out.slack_norm = sol.x.tail(6).norm() * dt;
  out.position_error = err.head<3>().norm();
  out.rotation_error = err.tail<3>().norm();
  return out;
}

IkStep solve_ik(const KinematicChain& chain, const Eigen::VectorXd& q, const Pose& target,
                const IkWeights& weights, int max_steps, double tol) {
  IkStep step;
  step.q = q;
  step.qdot = Eigen::VectorXd::Zero(chain.n_joints());
  for (int i = 0; i < max_steps; ++i) {
    const Vec6 e = pose_error(fk_chain(chain, step.q), target);
    if (e.head<3>().norm() < tol && e.tail<3>().norm() < tol) {
      step.position_error = e.head<3>().norm();
      step.rotation_error = e.tail<3>().norm();
      return step;
    }
    step = ik_step(chain, step.q, target, weights);
  }
  const Vec6 e = pose_error(fk_chain(chain, step.q), target);
  step.position_error = e.head<3>().norm();
  step.rotation_error = e.tail<3>().norm();
  return step;
}

}  // namespace screwest
