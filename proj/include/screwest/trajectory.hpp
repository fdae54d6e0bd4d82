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

#include <cstdint>
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

#include "screwest/articulation.hpp"

namespace screwest {

/// Time-stamped pose sequence, e.g. a recorded grasp trajectory.
struct Trajectory {
  std::vector<double> t;  // s, strictly increasing
  std::vector<Pose> poses;

  std::size_t size() const { return poses.size(); }
};

/// Throws kParse on non-increasing timestamps or a size mismatch.
void validate(const Trajectory& traj);

/// `# traj v1` followed by `t tx ty tz qw qx qy qz` rows.
void write_trajectory(std::ostream& out, const Trajectory& traj);
Trajectory read_trajectory(std::istream& in);
void save_trajectory(const std::string& path, const Trajectory& traj);
Trajectory load_trajectory(const std::string& path);

struct NoiseSigma {
  double lin = 0.0;  // m
  double ang = 0.0;  // rad
};

/// Right-perturbs `pose` by Exp of a Gaussian tangent with per-component
/// standard deviations (lin, lin, lin, ang, ang, ang).
Pose measure(const Pose& pose, const NoiseSigma& sigma, std::mt19937_64& rng);

/// Noiseless grasp trajectory sweeping theta from `theta_from` to
/// `theta_to` at `rate` units per second, sampled every `dt` seconds.
/// `thetas` (optional) receives the joint coordinate of every sample.
Trajectory generate_sweep(const ArticulatedObject& obj, double theta_from, double theta_to,
                          double rate, double dt, std::vector<double>* thetas = nullptr);

/// Applies `measure` to every pose of `truth` with a fresh seeded generator.
Trajectory add_noise(const Trajectory& truth, const NoiseSigma& sigma, std::uint64_t seed);

}  // namespace screwest
