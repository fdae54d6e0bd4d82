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

#include <string_view>

#include "screwest/lie.hpp"

namespace screwest {

enum class JointKind { kRevolute, kPrismatic, kGeneral };

std::string_view to_string(JointKind kind);

/// Angular norms below this snap a screw to prismatic (strict less-than).
inline constexpr double kPrismaticSnap = 0.01;

struct Joint {
  Twist xi;
  JointKind kind = JointKind::kGeneral;
  double theta_min = 0.0;
  double theta_max = 1.0;
};

/// Rectangular patch on the moving part, used to sample affordance clouds.
/// `center` is expressed in the moving-part frame; the patch spans the local
/// x/y axes of `center`.
struct FacePatch {
  Pose center;
  double width = 0.4;
  double height = 0.4;
};

/// Two-part object: static base B and a moving part A joined by one screw.
/// `joint.xi` is expressed in the base frame.
struct ArticulatedObject {
  Pose base_pose;
  Joint joint;
  Pose grasp_offset;  // grasp frame in the moving-part frame at theta = 0
  FacePatch face;
};

struct JointState {
  Twist xi;
  double theta = 0.0;
};

/// Clamps theta to the joint limits; `clamped` reports whether it moved.
double clamp_theta(const Joint& joint, double theta, bool* clamped = nullptr);

/// World pose of the moving part: base_pose * Exp(xi theta).
Pose fk_part(const ArticulatedObject& obj, double theta, bool* clamped = nullptr);

/// Grasp pose at theta = 0 in the world frame.
Pose grasp_pose(const ArticulatedObject& obj);

/// The joint screw expressed in the grasp frame at theta = 0.
Twist grasp_frame_twist(const ArticulatedObject& obj);

/// The joint screw expressed in the world frame.
Twist world_twist(const ArticulatedObject& obj);

/// World pose of the grasp frame: T_WG * Exp(xi_G theta).
Pose fk_grasp(const ArticulatedObject& obj, double theta, bool* clamped = nullptr);

/// Instantaneous velocity of point c under unit joint rate: v + w x c.
/// Not normalized.
Vec3 tangent_at(const Twist& xi, const Vec3& c);

/// Gauge-normalizes a screw: prismatic (w = 0, |v| = 1) when |w| < 0.01,
/// revolute with |w| = 1 otherwise. The returned limits are unset.
Joint classify(const Twist& xi);

/// Same as classify, also returning the factor s with classified.xi = xi / s
/// (so joint coordinates map as theta' = theta * s).
Joint classify(const Twist& xi, double* scale);

/// Revolute screw about the line through `point` along unit `axis`.
Twist revolute_twist(const Vec3& axis, const Vec3& point);
Twist prismatic_twist(const Vec3& direction);

/// Closest point on the screw axis to the origin (revolute only).
Vec3 axis_point(const Twist& xi);

/// Distance from `p` to the screw axis of a revolute twist.
double distance_to_axis(const Twist& xi, const Vec3& p);

}  // namespace screwest
