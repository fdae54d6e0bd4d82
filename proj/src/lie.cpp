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

#include "screwest/lie.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <numbers>

#include "screwest/error.hpp"

namespace screwest {
namespace {

// Below this angle the trigonometric coefficients switch to Taylor series.
constexpr double kSmallAngle = 1e-2;
constexpr double kNearPi = 1e-6;

// (1 - cos t) / t^2
double coeff_a(double t) {
  if (t < kSmallAngle) {
    const double t2 = t * t;
    return 0.5 - t2 / 24.0 + t2 * t2 / 720.0;
  }
  return (1.0 - std::cos(t)) / (t * t);
}

// (t - sin t) / t^3
double coeff_b(double t) {
  if (t < kSmallAngle) {
    const double t2 = t * t;
    return 1.0 / 6.0 - t2 / 120.0 + t2 * t2 / 5040.0;
  }
  return (t - std::sin(t)) / (t * t * t);
}

// (1 - t^2/2 - cos t) / t^4
double coeff_c(double t) {
  if (t < 0.1) {
    const double t2 = t * t;
    return -1.0 / 24.0 + t2 / 720.0 - t2 * t2 / 40320.0;
  }
  const double t2 = t * t;
  return (1.0 - 0.5 * t2 - std::cos(t)) / (t2 * t2);
}

// (t - sin t - t^3/6) / t^5
double coeff_d(double t) {
  if (t < 0.1) {
    const double t2 = t * t;
    return -1.0 / 120.0 + t2 / 5040.0 - t2 * t2 / 362880.0;
  }
  const double t2 = t * t;
  return (t - std::sin(t) - t2 * t / 6.0) / (t2 * t2 * t);
}

// Off-diagonal block of the SE(3) left Jacobian for x = (rho, phi).
Mat3 q_block(const Vec3& rho, const Vec3& phi) {
  const double t = phi.norm();
  const Mat3 p = hat(phi);
  const Mat3 r = hat(rho);
  const Mat3 pr = p * r;
  const Mat3 rp = r * p;
  const Mat3 prp = pr * p;
  const double b = coeff_b(t);
  const double c = coeff_c(t);
  const double d = coeff_d(t);
  return 0.5 * r + b * (pr + rp + prp) - c * (p * pr + rp * p - 3.0 * prp) -
         0.5 * (c - 3.0 * d) * (prp * p + p * prp);
}

}  // namespace

Eigen::Matrix4d Pose::matrix() const {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.topLeftCorner<3, 3>() = rotation;
  m.topRightCorner<3, 1>() = translation;
  return m;
}

Mat3 hat(const Vec3& w) {
  Mat3 m;
  // clang-format off
  m <<     0.0, -w.z(),  w.y(),
         w.z(),    0.0, -w.x(),
        -w.y(),  w.x(),    0.0;
  // clang-format on
  return m;
}

Vec3 vee(const Mat3& m) { return Vec3(m(2, 1), m(0, 2), m(1, 0)); }

Mat3 so3_exp(const Vec3& phi) {
  const double t = phi.norm();
  const Mat3 p = hat(phi);
  if (t < kSmallAngle) {
    const double t2 = t * t;
    const double s = 1.0 - t2 / 6.0 + t2 * t2 / 120.0;  // sin t / t
    return Mat3::Identity() + s * p + coeff_a(t) * p * p;
  }
  return Mat3::Identity() + (std::sin(t) / t) * p + coeff_a(t) * p * p;
}

double rotation_angle(const Mat3& r) {
  const double s = 0.5 * vee(r - r.transpose()).norm();
  const double c = 0.5 * (r.trace() - 1.0);
  return std::atan2(s, c);
}

Vec3 so3_log(const Mat3& r) {
  const Vec3 axis2s = vee(r - r.transpose());  // 2 sin(t) * axis
  const double s = 0.5 * axis2s.norm();
  const double c = 0.5 * (r.trace() - 1.0);
  const double t = std::atan2(s, c);
  if (std::numbers::pi - t < kNearPi) {
    throw Error(ErrorCode::kRotationNearPi,
                "rotation angle " + std::to_string(t) + " is on the log branch cut");
  }
  if (t < kSmallAngle) {
    const double t2 = t * t;
    return (0.5 + t2 / 12.0 + 7.0 * t2 * t2 / 720.0) * axis2s;
  }
  return (t / (2.0 * std::sin(t))) * axis2s;
}

Mat3 so3_left_jacobian(const Vec3& phi) {
  const double t = phi.norm();
  const Mat3 p = hat(phi);
  return Mat3::Identity() + coeff_a(t) * p + coeff_b(t) * p * p;
}

Mat3 so3_left_jacobian_inverse(const Vec3& phi) {
  const double t = phi.norm();
  const Mat3 p = hat(phi);
  double k;
  if (t < kSmallAngle) {
    const double t2 = t * t;
    k = 1.0 / 12.0 + t2 / 720.0 + t2 * t2 / 30240.0;
  } else {
    k = 1.0 / (t * t) - (1.0 + std::cos(t)) / (2.0 * t * std::sin(t));
  }
  return Mat3::Identity() - 0.5 * p + k * p * p;
}

Pose se3_exp(const Vec6& x) {
  const Vec3 rho = x.head<3>();
  const Vec3 phi = x.tail<3>();
  return Pose(so3_exp(phi), so3_left_jacobian(phi) * rho);
}

Vec6 se3_log(const Pose& t) {
  const Vec3 phi = so3_log(t.rotation);
  Vec6 x;
  x << so3_left_jacobian_inverse(phi) * t.translation, phi;
  return x;
}

Mat6 se3_left_jacobian(const Vec6& x) {
  const Vec3 rho = x.head<3>();
  const Vec3 phi = x.tail<3>();
  const Mat3 jl = so3_left_jacobian(phi);
  Mat6 j = Mat6::Zero();
  j.topLeftCorner<3, 3>() = jl;
  j.bottomRightCorner<3, 3>() = jl;
  j.topRightCorner<3, 3>() = q_block(rho, phi);
  return j;
}

Mat6 se3_left_jacobian_inverse(const Vec6& x) {
  const Vec3 rho = x.head<3>();
  const Vec3 phi = x.tail<3>();
  const Mat3 jli = so3_left_jacobian_inverse(phi);
  Mat6 j = Mat6::Zero();
  j.topLeftCorner<3, 3>() = jli;
  j.bottomRightCorner<3, 3>() = jli;
  j.topRightCorner<3, 3>() = -jli * q_block(rho, phi) * jli;
  return j;
}

Mat6 se3_right_jacobian(const Vec6& x) { return se3_left_jacobian(-x); }

Mat6 se3_right_jacobian_inverse(const Vec6& x) {
  return se3_left_jacobian_inverse(-x);
}

Mat6 adjoint(const Pose& t) {
  Mat6 ad = Mat6::Zero();
  ad.topLeftCorner<3, 3>() = t.rotation;
  ad.bottomRightCorner<3, 3>() = t.rotation;
  ad.topRightCorner<3, 3>() = hat(t.translation) * t.rotation;
  return ad;
}

Twist adjoint(const Pose& t, const Twist& xi) {
  return Twist::from_vector(adjoint(t) * xi.vector());
}

Pose exp_twist(const Twist& xi, double theta) {
  if (xi.w.squaredNorm() == 0.0) {
    return Pose::from_translation(xi.v * theta);
  }
  return se3_exp(xi.vector() * theta);
}

Vec6 log_pose(const Pose& t) { return se3_log(t); }

Vec6 boxminus(const Pose& a, const Pose& b) { return se3_log(inverse(b) * a); }

Pose compose(const Pose& a, const Pose& b) { return a * b; }

Pose inverse(const Pose& a) {
  const Mat3 rt = a.rotation.transpose();
  return Pose(rt, -(rt * a.translation));
}

double orthogonality_defect(const Mat3& r) {
  return (r.transpose() * r - Mat3::Identity()).norm();
}

Mat3 orthonormalize(const Mat3& r) {
  Eigen::JacobiSVD<Mat3> svd(r, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 u = svd.matrixU();
  const Mat3 v = svd.matrixV();
  if ((u * v.transpose()).determinant() < 0.0) {
    u.col(2) = -u.col(2);
  }
  return u * v.transpose();
}

Pose renormalized(const Pose& t) {
  if (orthogonality_defect(t.rotation) <= 1e-9) {
    return t;
  }
  return Pose(orthonormalize(t.rotation), t.translation);
}

bool is_valid(const Pose& t, double tol) {
  return t.rotation.allFinite() && t.translation.allFinite() &&
         orthogonality_defect(t.rotation) <= tol &&
         std::abs(t.rotation.determinant() - 1.0) <= tol;
}

Eigen::Quaterniond to_quaternion(const Mat3& r) {
  Eigen::Quaterniond q(r);
  q.normalize();
  if (q.w() < 0.0) {
    q.coeffs() = -q.coeffs();
  }
  return q;
}

Mat3 from_quaternion(const Eigen::Quaterniond& q) {
  return q.normalized().toRotationMatrix();
}

Mat3 from_rpy(double roll, double pitch, double yaw) {
  return (Eigen::AngleAxisd(yaw, Vec3::UnitZ()) *
          Eigen::AngleAxisd(pitch, Vec3::UnitY()) *
          Eigen::AngleAxisd(roll, Vec3::UnitX()))
      .toRotationMatrix();
}

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kRotationNearPi: return "RotationNearPi";
    case ErrorCode::kDegenerateScrew: return "DegenerateScrew";
    case ErrorCode::kDegenerateCloud: return "DegenerateCloud";
    case ErrorCode::kInconsistentFlows: return "InconsistentFlows";
    case ErrorCode::kGraphNotInitialized: return "GraphNotInitialized";
    case ErrorCode::kSingularNormalEquations: return "SingularNormalEquations";
    case ErrorCode::kInfeasible: return "Infeasible";
    case ErrorCode::kMaxIterations: return "MaxIterations";
    case ErrorCode::kZeroTangent: return "ZeroTangent";
    case ErrorCode::kInsufficientData: return "InsufficientData";
    case ErrorCode::kParse: return "Parse";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

}  // namespace screwest
