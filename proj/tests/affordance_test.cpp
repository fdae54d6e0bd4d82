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

#include "screwest/affordance.hpp"
#include "screwest/error.hpp"
#include "screwest/scenario.hpp"
#include "test_util.hpp"

namespace screwest {
namespace {

using testing::random_unit;
using testing::random_vec;

constexpr double kPi = std::numbers::pi;

Pose facing_robot(const Vec3& t) { return Pose(from_rpy(-kPi / 2, 0, 0), t); }

ArticulatedObject door(double radius = 0.8) {
  return make_door(-Vec3::UnitZ(), Vec3::Zero(), facing_robot(Vec3(radius, 0, 1.0)), 1.0);
}

ArticulatedObject drawer(const Vec3& dir = -Vec3::UnitY()) {
  return make_drawer(dir, facing_robot(Vec3(0, 0, 0.8)), 0.35);
}

double angle_between(const Vec3& a, const Vec3& b) {
  return std::acos(std::clamp(std::abs(a.normalized().dot(b.normalized())), 0.0, 1.0));
}

TEST(OracleFlow, PrismaticFlowsAreTheUnitDirection) {
  const FlowCloud c = oracle_flow(drawer(), 0.0, 200, 1);
  ASSERT_EQ(c.points.size(), 200u);
  for (const Vec3& f : c.flows) EXPECT_LT((f - (-Vec3::UnitY())).norm(), 1e-12);
}

TEST(OracleFlow, RevoluteMagnitudeGrowsWithHingeDistance) {
  const ArticulatedObject obj = door();
  const FlowCloud c = oracle_flow(obj, 0.0, 300, 2);
  double largest = 0.0;
  for (std::size_t i = 0; i < c.points.size(); ++i) {
    const Vec3 oracle = (-Vec3::UnitZ()).cross(c.points[i]);  // w x p, hinge through the origin
    // Parallel to the true velocity, with the common per-cloud scale.
    EXPECT_LT(c.flows[i].cross(oracle).norm(), 1e-12);
    EXPECT_GT(c.flows[i].dot(oracle), 0.0);
    const double radial = std::hypot(c.points[i].x(), c.points[i].y());
    EXPECT_NEAR(c.flows[i].norm() / radial,
                c.flows[0].norm() / std::hypot(c.points[0].x(), c.points[0].y()), 1e-9);
    largest = std::max(largest, c.flows[i].norm());
  }
  EXPECT_NEAR(largest, 1.0, 1e-12);
}

TEST(OracleFlow, DeterministicForASeed) {
  const FlowCloud a = oracle_flow(door(), 0.2, 100, 7);
  const FlowCloud b = oracle_flow(door(), 0.2, 100, 7);
  EXPECT_EQ(a.points, b.points);
  EXPECT_EQ(a.flows, b.flows);
}

TEST(Corrupt, NoneAndZeroNoiseLeaveTheCloud) {
  const FlowCloud c = oracle_flow(door(), 0.0, 100, 3);
  const FlowCloud n = corrupt(c, CorruptMode::none(), 4);
  EXPECT_EQ(n.points, c.points);
  EXPECT_EQ(n.flows, c.flows);
  const FlowCloud z = corrupt(c, CorruptMode::noise_on_flows(0.0), 4);
  for (std::size_t i = 0; i < c.flows.size(); ++i) EXPECT_LT((z.flows[i] - c.flows[i]).norm(), 1e-12);
}

TEST(Corrupt, SwapToPrismaticYieldsPrismaticPrediction) {
  const FlowCloud c = corrupt(oracle_flow(door(), 0.0, 500, 5), CorruptMode::swap_to_prismatic(), 6);
  EXPECT_LT(predict_screw(c).xi_tilde.w.norm(), kPrismaticSnap);
}

TEST(Corrupt, SwapToRevoluteYieldsRevolutePrediction) {
  const FlowCloud c = corrupt(oracle_flow(drawer(), 0.0, 500, 5), CorruptMode::swap_to_revolute(), 6);
  EXPECT_GE(predict_screw(c).xi_tilde.w.norm(), kPrismaticSnap);
}

TEST(FitPlane, ExactPlane) {
  std::mt19937_64 rng(8);
  std::vector<Vec3> pts;
  for (int i = 0; i < 20; ++i) pts.emplace_back(random_vec(rng).x(), random_vec(rng).y(), 0.3);
  const Plane p = fit_plane(pts);
  EXPECT_LT((p.normal - Vec3::UnitZ()).norm(), 1e-12);
  EXPECT_NEAR(p.offset, 0.3, 1e-12);
}

TEST(FitPlane, CollinearPointsAreDegenerate) {
  try {
    fit_plane({Vec3(0, 0, 0), Vec3(1, 1, 1), Vec3(2, 2, 2)});
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDegenerateCloud);
  }
}

TEST(FitPlane, NoisySamplesOfAKnownPlane) {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> noise(0.0, 1e-3);
  for (int trial = 0; trial < 20; ++trial) {
    const Vec3 n = random_unit(rng);
    const Vec3 u = n.unitOrthogonal();
    const Vec3 v = n.cross(u);
    std::vector<Vec3> pts;
    for (int i = 0; i < 100; ++i) {
      const Vec3 r = random_vec(rng, 0.5);
      pts.push_back(u * r.x() + v * r.y() + n * (0.2 + noise(rng)));
    }
    EXPECT_LT(angle_between(fit_plane(pts).normal, n), 0.5 * kPi / 180);
  }
}

TEST(PredictScrew, PrismaticCloudGivesTheDirection) {
  const ScrewPrediction p = predict_screw(oracle_flow(drawer(), 0.0, 500, 10));
  EXPECT_EQ(p.xi_tilde.w, Vec3::Zero());
  EXPECT_LT((p.xi_tilde.v.normalized() - (-Vec3::UnitY())).norm(), 1e-6);
}

TEST(PredictScrew, RevoluteCloudRecoversTheHinge) {
  for (double radius : {0.5, 0.8, 1.1}) {
    const ScrewPrediction p = predict_screw(oracle_flow(door(radius), 0.0, 500, 11), 0.02);
    const Joint j = classify(p.xi_tilde);
    ASSERT_EQ(j.kind, JointKind::kRevolute);
    EXPECT_LT(angle_between(j.xi.w, Vec3::UnitZ()), 2.0 * kPi / 180);
    EXPECT_LT(distance_to_axis(j.xi, Vec3(0, 0, 1.0)), 0.01);
    EXPECT_GT(tangent_at(j.xi, Vec3(radius, 0, 1)).dot(-Vec3::UnitY()), 0.0);
  }
}

TEST(PredictScrew, RotatedFlowsDisplaceTheAxis) {
  const ArticulatedObject obj = door();
  const FlowCloud c =
      corrupt(oracle_flow(obj, 0.0, 500, 12), CorruptMode::rotate_flows(kPi / 2, Vec3::UnitZ()), 13);
  const Joint j = classify(predict_screw(c).xi_tilde);
  const Vec3 grasp = grasp_pose(obj).translation;
  // The predicted motion at the handle no longer follows the true tangent.
  const Vec3 truth = tangent_at(world_twist(obj), grasp).normalized();
  EXPECT_LT(std::abs(tangent_at(j.xi, grasp).normalized().dot(truth)), 0.5);
}

TEST(PredictScrew, PrismaticStaysPrismaticUnderFlowNoise) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    std::mt19937_64 rng(seed);
    const ArticulatedObject obj = drawer(random_unit(rng));
    for (double sigma : {0.001, 0.005, 0.01}) {
      const FlowCloud c =
          corrupt(oracle_flow(obj, 0.0, 500, seed), CorruptMode::noise_on_flows(sigma), seed + 100);
      EXPECT_LT(predict_screw(c).xi_tilde.w.norm(), kPrismaticSnap) << "seed " << seed;
    }
  }
}

TEST(PredictScrew, TranslatingTheCloud) {
  std::mt19937_64 rng(14);
  const Vec3 shift = random_vec(rng);
  auto shifted = [&](FlowCloud c) {
    for (Vec3& p : c.points) p += shift;
    return c;
  };
  const FlowCloud pc = oracle_flow(drawer(), 0.0, 300, 15);
  EXPECT_LT((predict_screw(shifted(pc)).xi_tilde.v.normalized() -
             predict_screw(pc).xi_tilde.v.normalized()).norm(), 1e-6);

  const ArticulatedObject obj = door();
  const Joint moved = classify(predict_screw(shifted(oracle_flow(obj, 0.0, 300, 16))).xi_tilde);
  // The true hinge moved with the cloud.
  EXPECT_LT(distance_to_axis(moved.xi, shift), 1e-6);
  EXPECT_LT(distance_to_axis(moved.xi, shift + Vec3::UnitZ()), 1e-6);
}

TEST(PredictScrew, DoublingPointsKeepsTheKind) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    for (const ArticulatedObject& obj : {door(), drawer()}) {
      const JointKind a = classify(predict_screw(oracle_flow(obj, 0.0, 200, seed)).xi_tilde).kind;
      const JointKind b = classify(predict_screw(oracle_flow(obj, 0.0, 400, seed)).xi_tilde).kind;
      EXPECT_EQ(a, b);
    }
  }
}

TEST(FlowCloudIo, RoundTrip) {
  FlowCloud c = oracle_flow(door(), 0.1, 50, 17);
  c.frame_tag = "camera";
  std::stringstream ss;
  write_flowcloud(ss, c);
  const FlowCloud r = read_flowcloud(ss);
  EXPECT_EQ(r.points, c.points);
  EXPECT_EQ(r.flows, c.flows);
  EXPECT_EQ(r.frame_tag, "camera");
}

TEST(FlowCloudIo, RejectsMalformedInput) {
  std::stringstream missing("0 0 0 1 0 0\n");
  EXPECT_THROW(read_flowcloud(missing), Error);
  std::stringstream short_row("# flowcloud v1 frame=world\n0 0 0 1 0\n");
  EXPECT_THROW(read_flowcloud(short_row), Error);
}

}  // namespace
}  // namespace screwest
