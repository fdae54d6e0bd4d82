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
// Affordance prior: a synthetic stand-in for the flow network and the
// two-plane construction that turns a flow cloud into a screw prediction.

#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "screwest/articulation.hpp"

namespace screwest {

/// Points with per-point motion directions. Flows are normalized per cloud:
/// the largest flow has unit norm and relative magnitudes are kept.
struct FlowCloud {
  std::vector<Vec3> points;
  std::vector<Vec3> flows;
  std::string frame_tag = "world";
};

/// Throws kInvalidArgument if the cloud breaks its invariants.
void validate(const FlowCloud& cloud);

struct ScrewPrediction {
  Twist xi_tilde;
  double sigma = 1e-3;
};

struct Plane {
  Vec3 normal = Vec3::UnitZ();
  double offset = 0.0;  // {x : normal . x = offset}
};

enum class CorruptKind {
  kNone,
  kSwapToPrismatic,
  kSwapToRevolute,
  kRotateFlows,
  kNoiseOnFlows,
};

struct CorruptMode {
  CorruptKind kind = CorruptKind::kNone;
  double angle = 0.0;           // kRotateFlows
  Vec3 axis = Vec3::UnitZ();    // kRotateFlows
  double sigma = 0.0;           // kNoiseOnFlows

  static CorruptMode none() { return {}; }
  static CorruptMode swap_to_prismatic() { return {CorruptKind::kSwapToPrismatic}; }
  static CorruptMode swap_to_revolute() { return {CorruptKind::kSwapToRevolute}; }
  static CorruptMode rotate_flows(double angle, const Vec3& axis) {
    return {CorruptKind::kRotateFlows, angle, axis.normalized(), 0.0};
  }
  static CorruptMode noise_on_flows(double sigma) {
    return {CorruptKind::kNoiseOnFlows, 0.0, Vec3::UnitZ(), sigma};
  }
};

inline constexpr double kDefaultFlowStep = 0.02;
inline constexpr double kCrossThreshold = 0.01;

/// Samples the object's face patch at configuration theta and assigns each
/// point the true motion direction. Deterministic for a given seed.
FlowCloud oracle_flow(const ArticulatedObject& obj, double theta, int n_points,
                      std::uint64_t seed);

FlowCloud corrupt(const FlowCloud& cloud, const CorruptMode& mode, std::uint64_t seed);

/// Total-least-squares plane. The normal's largest-magnitude component is
/// positive. Throws kDegenerateCloud on collinear or coincident points.
Plane fit_plane(const std::vector<Vec3>& points);

ScrewPrediction predict_screw(const FlowCloud& cloud, double step = kDefaultFlowStep,
                              double sigma = 1e-3);

/// `# flowcloud v1 frame=<tag>` followed by `px py pz fx fy fz` rows.
void write_flowcloud(std::ostream& out, const FlowCloud& cloud);
FlowCloud read_flowcloud(std::istream& in);
void save_flowcloud(const std::string& path, const FlowCloud& cloud);
FlowCloud load_flowcloud(const std::string& path);

}  // namespace screwest
