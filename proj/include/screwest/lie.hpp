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
// SE(3) / so(3) machinery. Tangent vectors are always laid out as
// (v, w): linear part first, angular part second.

#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace screwest {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat6 = Eigen::Matrix<double, 6, 6>;

/// Screw parameters: linear part v and angular part w.
struct Twist {
  Vec3 v = Vec3::Zero();
  Vec3 w = Vec3::Zero();

  Twist() = default;
  Twist(const Vec3& v_in, const Vec3& w_in) : v(v_in), w(w_in) {}

  static Twist from_vector(const Vec6& x) {
    return Twist(x.head<3>(), x.tail<3>());
  }
  Vec6 vector() const {
    Vec6 x;
    x << v, w;
    return x;
  }
  Twist operator*(double s) const { return Twist(v * s, w * s); }
  bool all_finite() const { return v.allFinite() && w.allFinite(); }
};

/// Rigid transform. `rotation` is kept orthonormal with det = +1.
struct Pose {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  Pose() = default;
  Pose(const Mat3& r, const Vec3& t) : rotation(r), translation(t) {}

  static Pose identity() { return Pose(); }
  static Pose from_translation(const Vec3& t) { return Pose(Mat3::Identity(), t); }

  Pose operator*(const Pose& other) const {
    return Pose(rotation * other.rotation, rotation * other.translation + translation);
  }
  Vec3 operator*(const Vec3& p) const { return rotation * p + translation; }

  Eigen::Matrix4d matrix() const;
};

Mat3 hat(const Vec3& w);
Vec3 vee(const Mat3& m);

Mat3 so3_exp(const Vec3& phi);
/// Principal-branch rotation vector. Throws kRotationNearPi when the angle
/// is within 1e-6 of pi.
Vec3 so3_log(const Mat3& r);
/// Rotation angle in [0, pi]; never throws.
double rotation_angle(const Mat3& r);

Mat3 so3_left_jacobian(const Vec3& phi);
Mat3 so3_left_jacobian_inverse(const Vec3& phi);

/// Exp of the se(3) element with coefficients x = (v, w).
Pose se3_exp(const Vec6& x);
/// Log on the principal branch; propagates kRotationNearPi.
Vec6 se3_log(const Pose& t);

Mat6 se3_left_jacobian(const Vec6& x);
Mat6 se3_left_jacobian_inverse(const Vec6& x);
Mat6 se3_right_jacobian(const Vec6& x);
Mat6 se3_right_jacobian_inverse(const Vec6& x);

/// Adjoint acting on (v, w) coefficients: Ad_T xi expresses a twist given in
/// the frame of T in the parent frame.
Mat6 adjoint(const Pose& t);
Twist adjoint(const Pose& t, const Twist& xi);

/// Exp(hat(xi) * theta).
Pose exp_twist(const Twist& xi, double theta);
/// Log(T) as a tangent six-vector (xi * theta).
Vec6 log_pose(const Pose& t);
/// Log(B^-1 A).
Vec6 boxminus(const Pose& a, const Pose& b);

Pose compose(const Pose& a, const Pose& b);
Pose inverse(const Pose& a);

/// Frobenius norm of R^T R - I.
double orthogonality_defect(const Mat3& r);
/// Nearest rotation in the Frobenius sense (polar decomposition).
Mat3 orthonormalize(const Mat3& r);
/// Re-orthonormalizes the rotation only if its defect exceeds 1e-9.
Pose renormalized(const Pose& t);

bool is_valid(const Pose& t, double tol = 1e-9);

Eigen::Quaterniond to_quaternion(const Mat3& r);
Mat3 from_quaternion(const Eigen::Quaterniond& q);
/// Fixed-axis roll/pitch/yaw: R = Rz(yaw) Ry(pitch) Rx(roll).
Mat3 from_rpy(double roll, double pitch, double yaw);

}  // namespace screwest
