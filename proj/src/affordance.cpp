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

#include "screwest/affordance.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "screwest/error.hpp"
#include "screwest/format.hpp"

namespace screwest {
namespace {

Vec3 centroid(const std::vector<Vec3>& pts) {
  Vec3 c = Vec3::Zero();
  for (const auto& p : pts) c += p;
  return c / static_cast<double>(pts.size());
}

void normalize_by_max(std::vector<Vec3>& flows) {
  double m = 0.0;
  for (const auto& f : flows) m = std::max(m, f.norm());
  if (m > 0.0) {
    for (auto& f : flows) f /= m;
  }
}

Vec3 mean_direction(const std::vector<Vec3>& flows) {
  Vec3 s = Vec3::Zero();
  for (const auto& f : flows) {
    const double n = f.norm();
    if (n > 0.0) s += f / n;
  }
  return s;
}

}  // namespace

void validate(const FlowCloud& cloud) {
  if (cloud.points.size() != cloud.flows.size()) {
    throw Error(ErrorCode::kInvalidArgument, "points and flows differ in length");
  }
  if (cloud.points.size() < 3) {
    throw Error(ErrorCode::kInvalidArgument, "flow cloud needs at least 3 points");
  }
  double max_norm = 0.0;
  for (std::size_t i = 0; i < cloud.points.size(); ++i) {
    if (!cloud.points[i].allFinite() || !cloud.flows[i].allFinite()) {
      throw Error(ErrorCode::kInvalidArgument, "non-finite flow cloud entry");
    }
    max_norm = std::max(max_norm, cloud.flows[i].norm());
  }
  if (max_norm > 0.0 && std::abs(max_norm - 1.0) > 1e-6) {
    throw Error(ErrorCode::kInvalidArgument, "largest flow is not unit norm");
  }
}

FlowCloud oracle_flow(const ArticulatedObject& obj, double theta, int n_points,
                      std::uint64_t seed) {
  if (n_points < 3) {
    throw Error(ErrorCode::kInvalidArgument, "oracle_flow needs n_points >= 3");
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(-0.5 * obj.face.width, 0.5 * obj.face.width);
  std::uniform_real_distribution<double> uy(-0.5 * obj.face.height, 0.5 * obj.face.height);

  const Pose part = fk_part(obj, theta);
  const Twist xi_world = world_twist(obj);
  FlowCloud cloud;
  cloud.points.reserve(n_points);
  cloud.flows.reserve(n_points);
  for (int i = 0; i < n_points; ++i) {
    const double a = ux(rng);
    const double b = uy(rng);
    const Vec3 p = part * (obj.face.center * Vec3(a, b, 0.0));
    cloud.points.push_back(p);
    cloud.flows.push_back(tangent_at(xi_world, p));
  }
  normalize_by_max(cloud.flows);
  return cloud;
}

FlowCloud corrupt(const FlowCloud& cloud, const CorruptMode& mode, std::uint64_t seed) {
  FlowCloud out = cloud;
  switch (mode.kind) {
    case CorruptKind::kNone:
      break;
    case CorruptKind::kSwapToPrismatic: {
      const Vec3 m = mean_direction(cloud.flows);
      if (m.norm() < 1e-12) {
        throw Error(ErrorCode::kInconsistentFlows, "flows have no mean direction");
      }
      for (auto& f : out.flows) f = m.normalized();
      break;
    }
    case CorruptKind::kSwapToRevolute: {
      // Fabricated hinge along the dominant in-plane direction, placed on the
      // cloud edge at the minimum of the secondary in-plane direction.
      const Vec3 c = centroid(cloud.points);
      Eigen::MatrixXd centered(cloud.points.size(), 3);
      for (std::size_t i = 0; i < cloud.points.size(); ++i) {
        centered.row(i) = (cloud.points[i] - c).transpose();
      }
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeThinV);
      const Vec3 e1 = svd.matrixV().col(0);
      const Vec3 e2 = svd.matrixV().col(1);
      double lo = 0.0;
      for (const auto& p : cloud.points) lo = std::min(lo, e2.dot(p - c));
      const Vec3 q = c + lo * e2;
      Vec3 w = e1;
      const Vec3 old_mean = mean_direction(cloud.flows);
      Vec3 new_mean = Vec3::Zero();
      for (const auto& p : cloud.points) new_mean += w.cross(p - q);
      if (new_mean.dot(old_mean) < 0.0) w = -w;
      for (std::size_t i = 0; i < out.points.size(); ++i) {
        out.flows[i] = w.cross(out.points[i] - q);
      }
      normalize_by_max(out.flows);
      break;
    }
    case CorruptKind::kRotateFlows: {
      const Mat3 r = Eigen::AngleAxisd(mode.angle, mode.axis.normalized()).toRotationMatrix();
      for (auto& f : out.flows) f = r * f;
      break;
    }
    case CorruptKind::kNoiseOnFlows: {
      if (mode.sigma <= 0.0) break;
      std::mt19937_64 rng(seed);
      std::normal_distribution<double> n(0.0, mode.sigma);
      for (auto& f : out.flows) {
        const double mag = f.norm();
        if (mag == 0.0) continue;
        Vec3 d = f / mag + Vec3(n(rng), n(rng), n(rng));
        if (d.norm() < 1e-12) d = f / mag;
        f = d.normalized() * mag;
      }
      break;
    }
  }
  return out;
}

Plane fit_plane(const std::vector<Vec3>& points) {
  if (points.size() < 3) {
    throw Error(ErrorCode::kDegenerateCloud, "need at least 3 points");
  }
  const Vec3 c = centroid(points);
  Eigen::MatrixXd centered(points.size(), 3);
  for (std::size_t i = 0; i < points.size(); ++i) {
    centered.row(i) = (points[i] - c).transpose();
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeThinV);
  const Vec3 s = svd.singularValues();
  if (s(0) <= 0.0 || (s(1) < 1e-9 * s(0) && s(2) < 1e-9 * s(0))) {
    throw Error(ErrorCode::kDegenerateCloud, "points are collinear or coincident");
  }
  Vec3 n = svd.matrixV().col(2).normalized();
  Eigen::Index k = 0;
  n.cwiseAbs().maxCoeff(&k);
  if (n(k) < 0.0) n = -n;
  return Plane{n, n.dot(c)};
}

ScrewPrediction predict_screw(const FlowCloud& cloud, double step, double sigma) {
  validate(cloud);
  if (!(step > 0.0) || !(sigma > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "step and sigma must be positive");
  }

  // Mean pairwise cosine over nonzero flows, from |sum of unit flows|^2.
  const Vec3 sum_unit = mean_direction(cloud.flows);
  std::size_t n_nonzero = 0;
  for (const auto& f : cloud.flows) n_nonzero += f.norm() > 0.0 ? 1 : 0;
  if (n_nonzero < 2) {
    throw Error(ErrorCode::kInconsistentFlows, "fewer than two nonzero flows");
  }
  const double nn = static_cast<double>(n_nonzero);
  const double mean_cos = (sum_unit.squaredNorm() - nn) / (nn * (nn - 1.0));
  if (mean_cos < 0.0) {
    throw Error(ErrorCode::kInconsistentFlows, "flows show no coherent motion");
  }

  const Plane p0 = fit_plane(cloud.points);
  std::vector<Vec3> shifted(cloud.points.size());
  for (std::size_t i = 0; i < shifted.size(); ++i) {
    shifted[i] = cloud.points[i] + step * cloud.flows[i];
  }
  Plane p1 = fit_plane(shifted);
  if (p0.normal.dot(p1.normal) < 0.0) {
    p1.normal = -p1.normal;
    p1.offset = -p1.offset;
  }

  ScrewPrediction out;
  out.sigma = sigma;
  const Vec3 d = p0.normal.cross(p1.normal);
  if (d.norm() < kCrossThreshold) {
    out.xi_tilde = Twist(sum_unit.normalized(), Vec3::Zero());
    return out;
  }

  const Vec3 w = d.normalized();
  // Closest point to the centroid on {n0 . x = o0, n1 . x = o1}.
  const Vec3 c = centroid(cloud.points);
  Eigen::Matrix2d g;
  g << 1.0, p0.normal.dot(p1.normal), p0.normal.dot(p1.normal), 1.0;
  const Eigen::Vector2d rhs(p0.offset - p0.normal.dot(c), p1.offset - p1.normal.dot(c));
  const Eigen::Vector2d ab = g.ldlt().solve(rhs);
  const Vec3 q = c + ab(0) * p0.normal + ab(1) * p1.normal;

  Twist xi = revolute_twist(w, q);
  double agreement = 0.0;
  for (std::size_t i = 0; i < cloud.points.size(); ++i) {
    agreement += cloud.flows[i].dot(tangent_at(xi, cloud.points[i]));
  }
  if (agreement < 0.0) xi = xi * -1.0;
  out.xi_tilde = classify(xi).xi;
  return out;
}

void write_flowcloud(std::ostream& out, const FlowCloud& cloud) {
  out << "# flowcloud v1 frame=" << cloud.frame_tag << '\n';
  for (std::size_t i = 0; i < cloud.points.size(); ++i) {
    const Vec3& p = cloud.points[i];
    const Vec3& f = cloud.flows[i];
    out << fmt_num(p.x()) << ' ' << fmt_num(p.y()) << ' ' << fmt_num(p.z()) << ' '
        << fmt_num(f.x()) << ' ' << fmt_num(f.y()) << ' ' << fmt_num(f.z()) << '\n';
  }
}

FlowCloud read_flowcloud(std::istream& in) {
  FlowCloud cloud;
  std::string line;
  bool header = false;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (line[0] == '#') {
      const std::string tag = "# flowcloud v1";
      if (!header && line.rfind(tag, 0) == 0) {
        header = true;
        const auto pos = line.find("frame=");
        if (pos != std::string::npos) {
          cloud.frame_tag = line.substr(pos + 6);
        }
      }
      continue;
    }
    if (!header) {
      throw Error(ErrorCode::kParse, "missing '# flowcloud v1' header");
    }
    std::istringstream row(line);
    double v[6];
    for (double& x : v) {
      if (!(row >> x)) {
        throw Error(ErrorCode::kParse, "line " + std::to_string(lineno) + ": expected 6 numbers");
      }
    }
    std::string extra;
    if (row >> extra) {
      throw Error(ErrorCode::kParse, "line " + std::to_string(lineno) + ": trailing data");
    }
    cloud.points.emplace_back(v[0], v[1], v[2]);
    cloud.flows.emplace_back(v[3], v[4], v[5]);
  }
  if (!header) {
    throw Error(ErrorCode::kParse, "missing '# flowcloud v1' header");
  }
  return cloud;
}

void save_flowcloud(const std::string& path, const FlowCloud& cloud) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kParse, "cannot write " + path);
  write_flowcloud(out, cloud);
}

FlowCloud load_flowcloud(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kParse, "cannot open " + path);
  return read_flowcloud(in);
}

}  // namespace screwest
