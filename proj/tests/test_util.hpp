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

// Shared helpers for the unit tests: seeded random draws and tolerant
// comparisons. Nothing here calls into the library under test except the
// plain Pose/Twist containers.

#pragma once

#include <gtest/gtest.h>

#include <Eigen/Geometry>
#include <random>

#include "screwest/lie.hpp"

namespace screwest::testing {

inline Vec3 random_vec(std::mt19937_64& rng, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  return Vec3(u(rng), u(rng), u(rng));
}

inline Vec3 random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  Vec3 v(n(rng), n(rng), n(rng));
  return v.normalized();
}

/// Rotation of angle in [0, max_angle] about a random axis, built with
/// Eigen's AngleAxis rather than the library's exponential.
inline Mat3 random_rotation(std::mt19937_64& rng, double max_angle = 3.0) {
  std::uniform_real_distribution<double> a(0.0, max_angle);
  return Eigen::AngleAxisd(a(rng), random_unit(rng)).toRotationMatrix();
}

inline Pose random_pose(std::mt19937_64& rng, double max_angle = 3.0, double scale = 1.0) {
  return Pose(random_rotation(rng, max_angle), random_vec(rng, scale));
}

inline Eigen::Matrix4d to_matrix(const Pose& p) {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.topLeftCorner<3, 3>() = p.rotation;
  m.topRightCorner<3, 1>() = p.translation;
  return m;
}

inline double pose_distance(const Pose& a, const Pose& b) {
  return (to_matrix(a) - to_matrix(b)).cwiseAbs().maxCoeff();
}

}  // namespace screwest::testing
