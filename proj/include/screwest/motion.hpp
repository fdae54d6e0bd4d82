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

#pragma once

#include <vector>

#include <Eigen/Core>

#include "screwest/lie.hpp"
#include "screwest/qp.hpp"

namespace screwest {

struct ChainJoint {
  Vec3 axis = Vec3::UnitZ();  // unit, in the joint frame
  Pose origin;                // offset from the previous joint frame
  bool prismatic = false;
};

/// Serial chain: T_WE(q) = prod_i(origin_i Exp(screw_i q_i)) * tool.
struct KinematicChain {
  std::vector<ChainJoint> joints;
  Pose tool;
  Eigen::VectorXd lb_q, ub_q;    // rad or m
  Eigen::VectorXd lb_dq, ub_dq;  // rad/s or m/s

  int n_joints() const { return static_cast<int>(joints.size()); }
};

/// 7 revolute joints alternating z/y, 0.2 m links, +-2.9 rad, +-1.5 rad/s.
KinematicChain default_chain();

/// Throws kInvalidArgument when sizes disagree, bounds cross or an axis is
/// not unit length.
void validate(const KinematicChain& chain);

Pose fk_chain(const KinematicChain& chain, const Eigen::VectorXd& q);

/// Geometric Jacobian: rows (linear velocity of the end-effector point,
/// angular velocity), both in the world frame.
Eigen::Matrix<double, 6, Eigen::Dynamic> jacobian_chain(const KinematicChain& chain,
                                                        const Eigen::VectorXd& q);

struct ControllerState {
  double theta_cmd = 0.0;
  double gv = 0.05;
  double dt = 0.02;
  Eigen::VectorXd q;
};

/// Advances theta_cmd by gv * dt, clamping at the range ends and flipping
/// the sign of gv when an end is reached.
ControllerState schedule_theta(const ControllerState& st, double theta_lo, double theta_hi);

struct IkWeights {
  double joint_velocity = 1.0;
  double slack = 1e6;
  double dt = 0.02;
};

struct IkStep {
  Eigen::VectorXd q;      // next configuration
  Eigen::VectorXd qdot;
  double slack_norm = 0.0;  // |s| * dt, in task units
  double position_error = 0.0;  // before the step
  double rotation_error = 0.0;  // before the step, rad
};

/// Task error (position, world-frame rotation vector) from `current` to `target`.
Vec6 pose_error(const Pose& current, const Pose& target);

/// One linearized QP step toward `target` over x = (qdot, slack).
IkStep ik_step(const KinematicChain& chain, const Eigen::VectorXd& q, const Pose& target,
               const IkWeights& weights = {});

/// Iterates ik_step until both errors drop below `tol` or `max_steps` runs out.
IkStep solve_ik(const KinematicChain& chain, const Eigen::VectorXd& q, const Pose& target,
                const IkWeights& weights, int max_steps, double tol);

}  // namespace screwest
