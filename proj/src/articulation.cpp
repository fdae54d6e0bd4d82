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

#include "screwest/articulation.hpp"

#include <algorithm>

#include "screwest/error.hpp"

namespace screwest {

std::string_view to_string(JointKind kind) {
  switch (kind) {
    case JointKind::kRevolute: return "revolute";
    case JointKind::kPrismatic: return "prismatic";
    case JointKind::kGeneral: return "general";
  }
  return "general";
}

double clamp_theta(const Joint& joint, double theta, bool* clamped) {
  const double c = std::clamp(theta, joint.theta_min, joint.theta_max);
  if (clamped != nullptr) {
    *clamped = c != theta;
  }
  return c;
}

Pose fk_part(const ArticulatedObject& obj, double theta, bool* clamped) {
  const double t = clamp_theta(obj.joint, theta, clamped);
  return obj.base_pose * exp_twist(obj.joint.xi, t);
}

Pose grasp_pose(const ArticulatedObject& obj) {
  return obj.base_pose * obj.grasp_offset;
}

Twist grasp_frame_twist(const ArticulatedObject& obj) {
  return adjoint(inverse(obj.grasp_offset), obj.joint.xi);
}

Twist world_twist(const ArticulatedObject& obj) {
  return adjoint(obj.base_pose, obj.joint.xi);
}

Pose fk_grasp(const ArticulatedObject& obj, double theta, bool* clamped) {
  const double t = clamp_theta(obj.joint, theta, clamped);
  return grasp_pose(obj) * exp_twist(grasp_frame_twist(obj), t);
}

Vec3 tangent_at(const Twist& xi, const Vec3& c) { return xi.v + xi.w.cross(c); }

Joint classify(const Twist& xi) { return classify(xi, nullptr); }

Joint classify(const Twist& xi, double* scale) {
  const double nv = xi.v.norm();
  const double nw = xi.w.norm();
  if (nv < 1e-9 && nw < 1e-9) {
    throw Error(ErrorCode::kDegenerateScrew, "both screw parts vanish");
  }
  Joint j;
  if (nw < kPrismaticSnap) {
    if (nv < 1e-9) {
      throw Error(ErrorCode::kDegenerateScrew, "prismatic screw with zero translation");
    }
    j.kind = JointKind::kPrismatic;
    j.xi = Twist(xi.v / nv, Vec3::Zero());
    if (scale != nullptr) *scale = nv;
  } else {
    j.kind = JointKind::kRevolute;
    j.xi = xi * (1.0 / nw);
    if (scale != nullptr) *scale = nw;
  }
  return j;
}

Twist revolute_twist(const Vec3& axis, const Vec3& point) {
  const Vec3 w = axis.normalized();
  return Twist(-w.cross(point), w);
}

Twist prismatic_twist(const Vec3& direction) {
  return Twist(direction.normalized(), Vec3::Zero());
}

Vec3 axis_point(const Twist& xi) {
  const double n2 = xi.w.squaredNorm();
  // v = -w x q  =>  q_perp = w x v / |w|^2
  return xi.w.cross(xi.v) / n2;
}

double distance_to_axis(const Twist& xi, const Vec3& p) {
  const Vec3 u = xi.w.normalized();
  const Vec3 d = p - axis_point(xi);
  return (d - u * u.dot(d)).norm();
}

}  // namespace screwest
