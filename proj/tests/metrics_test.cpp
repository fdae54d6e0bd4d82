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

#include <gtest/gtest.h>

#include <numbers>
#include <sstream>

#include "screwest/error.hpp"
#include "screwest/metrics.hpp"
#include "screwest/scenario.hpp"
#include "screwest/sim.hpp"
#include "test_util.hpp"

namespace screwest {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kDeg = kPi / 180.0;

Pose facing_robot(const Vec3& t) { return Pose(from_rpy(-kPi / 2, 0, 0), t); }

Joint joint_of(const Twist& xi) {
  Joint j;
  j.xi = xi;
  return j;
}

// Points on a circle of radius r about the z axis and their tangents,
// written out directly rather than through the screw algebra.
void circle(double r, int n, std::vector<Vec3>* pts, std::vector<Vec3>* tangents) {
  for (int i = 0; i < n; ++i) {
    const double a = 0.02 * i;
    pts->emplace_back(r * std::cos(a), r * std::sin(a), 0.3);
    tangents->emplace_back(-std::sin(a), std::cos(a), 0.0);
  }
}

TEST(Similarity, IdenticalScrewScoresOne) {
  std::vector<Vec3> p, t;
  circle(0.7, 20, &p, &t);
  EXPECT_NEAR(tangent_similarity(t, joint_of(revolute_twist(Vec3::UnitZ(), Vec3::Zero())), p), 1.0, 1e-12);
}

TEST(Similarity, PerpendicularMotionScoresZero) {
  std::vector<Vec3> p, t;
  circle(0.7, 20, &p, &t);
  EXPECT_NEAR(tangent_similarity(t, joint_of(prismatic_twist(Vec3::UnitZ())), p), 0.0, 1e-12);
}

TEST(Similarity, TranslationAgainstRotationMatchesChordGeometry) {
  // A straight slide along y scored against the circle: cos of the arc angle.
  std::vector<Vec3> p, t;
  circle(1.0, 30, &p, &t);
  double expected = 0.0;
  for (int i = 0; i < 30; ++i) expected += std::cos(0.02 * i);
  expected /= 30;
  EXPECT_NEAR(tangent_similarity(t, joint_of(prismatic_twist(Vec3::UnitY())), p), expected, 1e-12);
}

TEST(Similarity, InvariantToScrewScale) {
  std::mt19937_64 rng(7);
  std::vector<Vec3> p, t;
  circle(0.5, 25, &p, &t);
  for (int i = 0; i < 20; ++i) {
    const Twist xi = revolute_twist(testing::random_unit(rng), testing::random_vec(rng, 1.0));
    const double base = tangent_similarity(t, joint_of(xi), p);
    for (double c : {1e-3, 0.5, 7.0, 1e4}) {
      Twist scaled = xi;
      scaled.v *= c;
      scaled.w *= c;
      EXPECT_NEAR(tangent_similarity(t, joint_of(scaled), p), base, 1e-12);
    }
  }
}

TEST(Similarity, ReversingTheScrewNegatesTheScore) {
  std::mt19937_64 rng(8);
  std::vector<Vec3> p, t;
  circle(0.5, 25, &p, &t);
  for (int i = 0; i < 20; ++i) {
    const Twist xi = revolute_twist(testing::random_unit(rng), testing::random_vec(rng, 1.0));
    Twist rev = xi;
    rev.v = -rev.v;
    rev.w = -rev.w;
    const double s = tangent_similarity(t, joint_of(xi), p);
    EXPECT_GE(s, -1.0);
    EXPECT_LE(s, 1.0);
    EXPECT_NEAR(tangent_similarity(t, joint_of(rev), p), -s, 1e-12);
  }
}

TEST(Similarity, RejectsDegenerateInput) {
  std::vector<Vec3> p, t;
  circle(0.5, 5, &p, &t);
  const Joint j = joint_of(revolute_twist(Vec3::UnitZ(), Vec3::Zero()));
  try {
    tangent_similarity(t, j, {Vec3::Zero(), p[1], p[2], p[3], p[4]});  // on the axis
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kZeroTangent);
  }
  try {
    tangent_similarity(t, j, {p[0]});
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidArgument);
  }
}

TEST(Tangents, AnalyticAgreesWithFiniteDifferences) {
  const ArticulatedObject obj = make_door(-Vec3::UnitZ(), Vec3::Zero(), facing_robot(Vec3(0.6, 0, 1)), 1.0);
  std::vector<Vec3> pos;
  for (int i = 0; i <= 200; ++i) pos.push_back(fk_grasp(obj, 0.005 * i).translation);
  const std::vector<Vec3> a = analytic_tangents(world_twist(obj), pos);
  const std::vector<Vec3> f = finite_difference_tangents(pos);
  for (std::size_t i = 1; i + 1 < pos.size(); ++i) {
    EXPECT_GT(a[i].normalized().dot(f[i].normalized()), 1.0 - 1e-5);
  }
}

Scenario door_scenario(double radius, NoiseSigma noise) {
  Scenario sc;
  sc.object = make_door(-Vec3::UnitZ(), Vec3::Zero(), facing_robot(Vec3(radius, 0, 1.0)), 1.0);
  sc.noise = noise;
  sc.seed = 11;
  return sc;
}

StudyInput study_input(const Scenario& sc) {
  const GeneratedData d = generate_data(sc);
  StudyInput in;
  in.measured = d.measured;
  in.truth = d.truth;
  in.gt_twist = world_twist(sc.object);
  return in;
}

TEST(FixedIncrement, NoiselessDoorIsNearlyExact) {
  const StudyInput in = study_input(door_scenario(1.0, {}));
  const SimilarityCurve c = study_fixed_increment(in, {1.0, 5.0}, IncrementUnit::kDegrees);
  ASSERT_EQ(c.mean.size(), 2u);
  EXPECT_GE(c.mean[0], 0.97);
  EXPECT_GE(c.mean[1], 0.97);
}

TEST(FixedIncrement, MeanDoesNotDropWithLargerWindowsWithoutNoise) {
  const StudyInput in = study_input(door_scenario(0.5, {}));
  const SimilarityCurve c = study_fixed_increment(in, {1.0, 2.0, 5.0, 10.0}, IncrementUnit::kDegrees);
  for (std::size_t i = 1; i < c.mean.size(); ++i) EXPECT_GE(c.mean[i], c.mean[i - 1] - 1e-6);
}

TEST(FixedIncrement, WindowInsideTheGateIsInsufficient) {
  Scenario sc;
  sc.object = make_drawer(Vec3::UnitY(), facing_robot(Vec3(0, 0, 1)), 0.3);
  StudyInput in = study_input(sc);
  try {
    study_fixed_increment(in, {0.05}, IncrementUnit::kCentimeters);  // 0.5 mm per window
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInsufficientData);
  }
  EXPECT_THROW(study_fixed_increment(in, {100.0}, IncrementUnit::kCentimeters), Error);
  EXPECT_THROW(study_fixed_increment(in, {-1.0}, IncrementUnit::kCentimeters), Error);
}

TEST(Spaced, ThreeMeasurementsRecoverTheDoor) {
  const StudyInput in = study_input(door_scenario(1.0, {}));
  const SimilarityCurve c = study_spaced_counts(in, {3, static_cast<int>(in.truth.size())});
  EXPECT_GT(c.mean[0], 0.95);
  EXPECT_GE(c.mean[1], c.mean[0] - 1e-9);
}

TEST(Spaced, TwoMeasurementsRecoverADrawer) {
  Scenario sc;
  sc.object = make_drawer(Vec3::UnitY(), facing_robot(Vec3(0, 0, 1)), 0.3);
  const SimilarityCurve c = study_spaced_counts(study_input(sc), {2});
  EXPECT_NEAR(c.mean[0], 1.0, 1e-9);
  EXPECT_NEAR(c.std[0], 0.0, 1e-6);
}

TEST(Spaced, CountsOutsideTheTrajectoryAreRejected) {
  const StudyInput in = study_input(door_scenario(1.0, {}));
  for (int n : {1, static_cast<int>(in.truth.size()) + 1}) {
    try {
      study_spaced_counts(in, {n});
      ADD_FAILURE() << n;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kInsufficientData);
    }
  }
}

TEST(Curve, CsvLayout) {
  SimilarityCurve c;
  c.abscissa = {0.5, 2};
  c.mean = {0.25, 1};
  c.std = {0.125, 0};
  std::ostringstream out;
  write_curve_csv(out, c);
  EXPECT_EQ(out.str(), "abscissa,mean,std\n0.5,0.25,0.125\n2,1,0\n");
}

}  // namespace
}  // namespace screwest
