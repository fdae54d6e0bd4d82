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

// Tangent-similarity metric and the two measurement-selection studies.

#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "screwest/estimator.hpp"
#include "screwest/trajectory.hpp"

namespace screwest {

struct SimilarityCurve {
  std::vector<double> abscissa;
  std::vector<double> mean;
  std::vector<double> std;
};

/// `abscissa,mean,std` with a header row.
void write_curve_csv(std::ostream& out, const SimilarityCurve& curve);

/// Mean cosine between the ground-truth tangents and the tangents of
/// `est.xi` at the matching contact points. Throws kZeroTangent if any
/// vector is shorter than 1e-12 and kInvalidArgument on a size mismatch.
double tangent_similarity(const std::vector<Vec3>& gt_tangents, const Joint& est,
                          const std::vector<Vec3>& contact_points);

/// Per-point cosines behind tangent_similarity.
std::vector<double> tangent_cosines(const std::vector<Vec3>& gt_tangents, const Joint& est,
                                    const std::vector<Vec3>& contact_points);

/// The estimated joint re-expressed in the world frame via its base pose.
Joint world_joint(const Estimate& est);

/// Central differences over +-1 sample (one-sided at the ends).
std::vector<Vec3> finite_difference_tangents(const std::vector<Vec3>& positions);

/// tangent_at(world_xi, p) for every position, each flipped to agree with
/// the direction of travel along `positions`.
std::vector<Vec3> analytic_tangents(const Twist& world_xi, const std::vector<Vec3>& positions);

/// Similarity of an estimate over the object's full joint range, sampled
/// at `samples` evenly spaced configurations.
double similarity_over_range(const ArticulatedObject& obj, const Estimate& est, int samples = 50);

enum class IncrementUnit { kDegrees, kCentimeters };

struct StudyInput {
  Trajectory measured;
  Trajectory truth;              // same timestamps; defaults to `measured` when empty
  std::optional<Twist> gt_twist;  // analytic world-frame ground truth, if known
  EstimatorConfig config;
};

/// Splits the trajectory into consecutive windows whose ground-truth
/// extent reaches each increment, estimates once per window and scores the
/// estimate on that window's samples. Throws kInsufficientData when no
/// window fits or a window has fewer than two accepted measurements.
SimilarityCurve study_fixed_increment(const StudyInput& in, const std::vector<double>& increments,
                                      IncrementUnit unit);

/// For each count n, estimates from n equally spaced measurements over the
/// whole trajectory and scores on every sample. `std` is the spread of the
/// per-sample cosines. Throws kInsufficientData for n < 2 or n > samples.
SimilarityCurve study_spaced_counts(const StudyInput& in, const std::vector<int>& counts);

}  // namespace screwest
