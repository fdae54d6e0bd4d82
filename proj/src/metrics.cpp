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

#include "screwest/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

#include "screwest/error.hpp"
#include "screwest/format.hpp"

namespace screwest {

void write_curve_csv(std::ostream& out, const SimilarityCurve& curve) {
  out << "abscissa,mean,std\n";
  for (std::size_t i = 0; i < curve.abscissa.size(); ++i) {
    out << fmt_num(curve.abscissa[i]) << ',' << fmt_num(curve.mean[i]) << ','
        << fmt_num(curve.std[i]) << '\n';
  }
}

std::vector<double> tangent_cosines(const std::vector<Vec3>& gt_tangents, const Joint& est,
                                    const std::vector<Vec3>& contact_points) {
  if (gt_tangents.size() != contact_points.size() || gt_tangents.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "tangent and contact lists must match and be non-empty");
  }
  std::vector<double> out;
  out.reserve(gt_tangents.size());
  for (std::size_t i = 0; i < gt_tangents.size(); ++i) {
    const Vec3 e = tangent_at(est.xi, contact_points[i]);
    const double ng = gt_tangents[i].norm();
    const double ne = e.norm();
    if (ng < 1e-12 || ne < 1e-12) {
      throw Error(ErrorCode::kZeroTangent, "tangent vanishes at sample " + std::to_string(i));
    }
    out.push_back(std::clamp(gt_tangents[i].dot(e) / (ng * ne), -1.0, 1.0));
  }
  return out;
}

double tangent_similarity(const std::vector<Vec3>& gt_tangents, const Joint& est,
                          const std::vector<Vec3>& contact_points) {
  const std::vector<double> c = tangent_cosines(gt_tangents, est, contact_points);
  double sum = 0.0;
  for (double x : c) sum += x;
  return sum / static_cast<double>(c.size());
}

Joint world_joint(const Estimate& est) {
  Joint j = est.joint;
  j.xi = adjoint(est.base_pose, est.joint.xi);
  return j;
}

std::vector<Vec3> finite_difference_tangents(const std::vector<Vec3>& positions) {
  const std::size_t n = positions.size();
  if (n < 2) throw Error(ErrorCode::kInsufficientData, "need two positions for differences");
  std::vector<Vec3> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = i == 0 ? 0 : i - 1;
    const std::size_t hi = i + 1 == n ? n - 1 : i + 1;
    out[i] = positions[hi] - positions[lo];
  }
  return out;
}

std::vector<Vec3> analytic_tangents(const Twist& world_xi, const std::vector<Vec3>& positions) {
  std::vector<Vec3> out;
  out.reserve(positions.size());
  const std::vector<Vec3> fd =
      positions.size() >= 2 ? finite_difference_tangents(positions) : std::vector<Vec3>{};
  for (std::size_t i = 0; i < positions.size(); ++i) {
    Vec3 t = tangent_at(world_xi, positions[i]);
    if (!fd.empty() && t.dot(fd[i]) < 0.0) t = -t;
    out.push_back(t);
  }
  return out;
}

double similarity_over_range(const ArticulatedObject& obj, const Estimate& est, int samples) {
  const Joint& j = obj.joint;
  const Twist xw = world_twist(obj);
  const Joint ew = world_joint(est);
  std::vector<Vec3> gt, pts;
  for (int i = 0; i < samples; ++i) {
    const double th = j.theta_min + (j.theta_max - j.theta_min) * i / std::max(1, samples - 1);
    const Vec3 c = fk_grasp(obj, th).translation;
    pts.push_back(c);
    gt.push_back(tangent_at(xw, c));
  }
  return tangent_similarity(gt, ew, pts);
}

namespace {

std::vector<Vec3> positions_of(const Trajectory& traj) {
  std::vector<Vec3> out;
  out.reserve(traj.size());
  for (const Pose& p : traj.poses) out.push_back(p.translation);
  return out;
}

const Trajectory& truth_of(const StudyInput& in) {
  if (in.truth.size() == 0) return in.measured;
  if (in.truth.size() != in.measured.size()) {
    throw Error(ErrorCode::kInvalidArgument, "truth and measured trajectories differ in length");
  }
  return in.truth;
}

std::vector<Vec3> gt_tangents_of(const StudyInput& in, const std::vector<Vec3>& truth_pos) {
  return in.gt_twist ? analytic_tangents(*in.gt_twist, truth_pos)
                     : finite_difference_tangents(truth_pos);
}

double extent(const Pose& a, const Pose& b, IncrementUnit unit) {
  if (unit == IncrementUnit::kDegrees) {
    return rotation_angle(a.rotation.transpose() * b.rotation) * 180.0 / std::numbers::pi;
  }
  return (b.translation - a.translation).norm() * 100.0;
}

void mean_std(const std::vector<double>& x, double* mean, double* sd) {
  double m = 0.0;
  for (double v : x) m += v;
  m /= static_cast<double>(x.size());
  double s = 0.0;
  for (double v : x) s += (v - m) * (v - m);
  *mean = m;
  *sd = std::sqrt(s / static_cast<double>(x.size()));
}

}  // namespace

SimilarityCurve study_fixed_increment(const StudyInput& in, const std::vector<double>& increments,
                                      IncrementUnit unit) {
  const Trajectory& truth = truth_of(in);
  const std::vector<Vec3> tpos = positions_of(truth);
  if (tpos.size() < 2) throw Error(ErrorCode::kInsufficientData, "trajectory too short");
  const std::vector<Vec3> gt = gt_tangents_of(in, tpos);

  SimilarityCurve curve;
  for (double w : increments) {
    if (!(w > 0.0)) throw Error(ErrorCode::kInvalidArgument, "increments must be positive");
    std::vector<double> scores;
    std::size_t start = 0;
    while (start + 1 < truth.size()) {
      std::size_t end = start + 1;
      while (end < truth.size() && extent(truth.poses[start], truth.poses[end], unit) < w) ++end;
      if (end == truth.size()) break;

      Graph g(in.config);
      g.initialize(in.measured.poses[start]);
      g.add_measurement(in.measured.poses[start], true);
      int accepted = 0;
      for (std::size_t k = start + 1; k <= end; ++k) {
        if (g.add_measurement(in.measured.poses[k])) ++accepted;
      }
      if (accepted < 1) {
        throw Error(ErrorCode::kInsufficientData,
                    "window of " + fmt_num(w) + " holds fewer than two accepted measurements");
      }
      double score = 0.0;
      try {
        const Estimate e = g.optimize();
        const std::vector<Vec3> p(tpos.begin() + start, tpos.begin() + end + 1);
        const std::vector<Vec3> t(gt.begin() + start, gt.begin() + end + 1);
        score = tangent_similarity(t, world_joint(e), p);
      } catch (const Error&) {
        // No usable estimate for this window: it contributes no information.
        score = 0.0;
      }
      scores.push_back(score);
      start = end;
    }
    if (scores.empty()) {
      throw Error(ErrorCode::kInsufficientData,
                  "trajectory does not span an increment of " + fmt_num(w));
    }
    double m = 0.0, s = 0.0;
    mean_std(scores, &m, &s);
    curve.abscissa.push_back(w);
    curve.mean.push_back(m);
    curve.std.push_back(s);
  }
  return curve;
}

SimilarityCurve study_spaced_counts(const StudyInput& in, const std::vector<int>& counts) {
  const Trajectory& truth = truth_of(in);
  const std::vector<Vec3> tpos = positions_of(truth);
  const std::size_t n_samples = truth.size();
  if (n_samples < 2) throw Error(ErrorCode::kInsufficientData, "trajectory too short");
  const std::vector<Vec3> gt = gt_tangents_of(in, tpos);

  SimilarityCurve curve;
  for (int n : counts) {
    if (n < 2 || static_cast<std::size_t>(n) > n_samples) {
      throw Error(ErrorCode::kInsufficientData,
                  "count " + std::to_string(n) + " outside [2, " + std::to_string(n_samples) + "]");
    }
    Graph g(in.config);
    g.initialize(in.measured.poses[0]);
    for (int m = 0; m < n; ++m) {
      const auto idx = static_cast<std::size_t>(
          std::llround(static_cast<double>(m) * static_cast<double>(n_samples - 1) / (n - 1)));
      g.add_measurement(in.measured.poses[idx], true);
    }
    std::vector<double> cos;
    try {
      const Estimate e = g.optimize();
      cos = tangent_cosines(gt, world_joint(e), tpos);
    } catch (const Error&) {
      cos.assign(n_samples, 0.0);
    }
    double m = 0.0, s = 0.0;
    mean_std(cos, &m, &s);
    curve.abscissa.push_back(n);
    curve.mean.push_back(m);
    curve.std.push_back(s);
  }
  return curve;
}

}  // namespace screwest
