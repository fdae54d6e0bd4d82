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

#include "screwest/trajectory.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "screwest/error.hpp"
#include "screwest/format.hpp"

namespace screwest {

void validate(const Trajectory& traj) {
  if (traj.t.size() != traj.poses.size()) {
    throw Error(ErrorCode::kParse, "trajectory times and poses differ in length");
  }
  for (std::size_t i = 1; i < traj.t.size(); ++i) {
    if (!(traj.t[i] > traj.t[i - 1])) {
      throw Error(ErrorCode::kParse, "trajectory timestamps must increase strictly");
    }
  }
}

void write_trajectory(std::ostream& out, const Trajectory& traj) {
  out << "# traj v1\n";
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const Pose& p = traj.poses[i];
    const Eigen::Quaterniond q = to_quaternion(p.rotation);
    out << fmt_num(traj.t[i]) << ' ' << fmt_num(p.translation.x()) << ' '
        << fmt_num(p.translation.y()) << ' ' << fmt_num(p.translation.z()) << ' '
        << fmt_num(q.w()) << ' ' << fmt_num(q.x()) << ' ' << fmt_num(q.y()) << ' '
        << fmt_num(q.z()) << '\n';
  }
}

Trajectory read_trajectory(std::istream& in) {
  Trajectory traj;
  std::string line;
  bool header = false;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (!header && line.rfind("# traj v1", 0) == 0) header = true;
      continue;
    }
    if (!header) throw Error(ErrorCode::kParse, "missing '# traj v1' header");
    std::istringstream row(line);
    double v[8];
    for (double& x : v) {
      if (!(row >> x)) {
        throw Error(ErrorCode::kParse, "line " + std::to_string(lineno) + ": expected 8 numbers");
      }
    }
    std::string extra;
    if (row >> extra) {
      throw Error(ErrorCode::kParse, "line " + std::to_string(lineno) + ": trailing data");
    }
    Eigen::Quaterniond q(v[4], v[5], v[6], v[7]);
    if (std::abs(q.norm() - 1.0) > 1e-6) {
      throw Error(ErrorCode::kParse, "line " + std::to_string(lineno) + ": quaternion not unit");
    }
    traj.t.push_back(v[0]);
    traj.poses.emplace_back(from_quaternion(q.normalized()), Vec3(v[1], v[2], v[3]));
  }
  if (!header) throw Error(ErrorCode::kParse, "missing '# traj v1' header");
  validate(traj);
  return traj;
}

void save_trajectory(const std::string& path, const Trajectory& traj) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kParse, "cannot write " + path);
  write_trajectory(out, traj);
}

Trajectory load_trajectory(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kParse, "cannot open " + path);
  return read_trajectory(in);
}

Pose measure(const Pose& pose, const NoiseSigma& sigma, std::mt19937_64& rng) {
  if (sigma.lin == 0.0 && sigma.ang == 0.0) return pose;
  std::normal_distribution<double> n01(0.0, 1.0);
  Vec6 d;
  for (int i = 0; i < 6; ++i) d(i) = n01(rng) * (i < 3 ? sigma.lin : sigma.ang);
  return pose * se3_exp(d);
}

Trajectory generate_sweep(const ArticulatedObject& obj, double theta_from, double theta_to,
                          double rate, double dt, std::vector<double>* thetas) {
  if (!(rate > 0.0) || !(dt > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "sweep rate and dt must be positive");
  }
  const double step = rate * dt * (theta_to >= theta_from ? 1.0 : -1.0);
  const int n = static_cast<int>(std::floor(std::abs(theta_to - theta_from) / (rate * dt) + 1e-9));
  Trajectory traj;
  if (thetas != nullptr) thetas->clear();
  for (int i = 0; i <= n; ++i) {
    const double th = theta_from + step * i;
    traj.t.push_back(dt * i);
    traj.poses.push_back(fk_grasp(obj, th));
    if (thetas != nullptr) thetas->push_back(th);
  }
  return traj;
}

Trajectory add_noise(const Trajectory& truth, const NoiseSigma& sigma, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Trajectory out = truth;
  for (Pose& p : out.poses) p = measure(p, sigma, rng);
  return out;
}

}  // namespace screwest
