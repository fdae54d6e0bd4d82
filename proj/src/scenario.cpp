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

#include "screwest/scenario.hpp"

#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>

#include "json.hpp"
#include "screwest/error.hpp"

namespace screwest {
namespace {

using json = nlohmann::json;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw Error(ErrorCode::kParse, where + ": " + what);
}

// Object section with a closed key set.
class Section {
 public:
  Section(const json& j, std::string where, std::initializer_list<const char*> keys)
      : j_(j), where_(std::move(where)) {
    if (!j.is_object()) fail(where_, "expected an object");
    std::set<std::string> allowed(keys.begin(), keys.end());
    for (auto it = j.begin(); it != j.end(); ++it) {
      if (!allowed.count(it.key())) fail(where_, "unknown key '" + it.key() + "'");
    }
  }

  bool has(const char* key) const { return j_.contains(key); }
  const json& at(const char* key) const { return j_.at(key); }
  std::string path(const char* key) const { return where_ + "." + key; }

  void get(const char* key, double* out) const {
    if (!has(key)) return;
    if (!at(key).is_number()) fail(path(key), "expected a number");
    *out = at(key).get<double>();
  }
  void get(const char* key, int* out) const {
    if (!has(key)) return;
    if (!at(key).is_number_integer()) fail(path(key), "expected an integer");
    *out = at(key).get<int>();
  }
  void get(const char* key, std::uint64_t* out) const {
    if (!has(key)) return;
    if (!at(key).is_number_unsigned()) fail(path(key), "expected a non-negative integer");
    *out = at(key).get<std::uint64_t>();
  }
  void get(const char* key, bool* out) const {
    if (!has(key)) return;
    if (!at(key).is_boolean()) fail(path(key), "expected true or false");
    *out = at(key).get<bool>();
  }
  void get(const char* key, std::string* out) const {
    if (!has(key)) return;
    if (!at(key).is_string()) fail(path(key), "expected a string");
    *out = at(key).get<std::string>();
  }

 private:
  const json& j_;
  std::string where_;
};

Eigen::VectorXd vec(const json& j, const std::string& where, int size = -1) {
  if (!j.is_array()) fail(where, "expected an array of numbers");
  if (size >= 0 && static_cast<int>(j.size()) != size) {
    fail(where, "expected " + std::to_string(size) + " numbers");
  }
  Eigen::VectorXd v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) fail(where, "expected numbers");
    v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  }
  return v;
}

Vec3 vec3(const json& j, const std::string& where) { return vec(j, where, 3); }

Pose pose(const json& j, const std::string& where) {
  Section s(j, where, {"translation", "rpy", "quaternion"});
  Pose p;
  if (s.has("translation")) p.translation = vec3(s.at("translation"), s.path("translation"));
  if (s.has("rpy") && s.has("quaternion")) fail(where, "give either rpy or quaternion");
  if (s.has("rpy")) {
    const Vec3 r = vec3(s.at("rpy"), s.path("rpy"));
    p.rotation = from_rpy(r.x(), r.y(), r.z());
  }
  if (s.has("quaternion")) {
    const Eigen::VectorXd q = vec(s.at("quaternion"), s.path("quaternion"), 4);
    Eigen::Quaterniond qq(q(0), q(1), q(2), q(3));
    if (std::abs(qq.norm() - 1.0) > 1e-6) fail(s.path("quaternion"), "quaternion must be unit");
    p.rotation = from_quaternion(qq.normalized());
  }
  return p;
}

Vec3 unit(const json& j, const std::string& where) {
  const Vec3 v = vec3(j, where);
  if (v.norm() < 1e-12) fail(where, "direction must be nonzero");
  return v.normalized();
}

void parse_object(const json& j, Scenario* sc) {
  Section s(j, "object", {"joint", "base_pose", "grasp_offset", "face"});
  ArticulatedObject& obj = sc->object;
  if (s.has("base_pose")) obj.base_pose = pose(s.at("base_pose"), "object.base_pose");
  if (s.has("grasp_offset")) obj.grasp_offset = pose(s.at("grasp_offset"), "object.grasp_offset");
  if (s.has("joint")) {
    Section js(s.at("joint"), "object.joint", {"kind", "axis", "point", "v", "w", "limits"});
    std::string kind = "revolute";
    js.get("kind", &kind);
    if (kind == "revolute") {
      const Vec3 axis = js.has("axis") ? unit(js.at("axis"), js.path("axis")) : Vec3::UnitZ();
      const Vec3 point = js.has("point") ? vec3(js.at("point"), js.path("point")) : Vec3::Zero();
      obj.joint.xi = revolute_twist(axis, point);
      obj.joint.kind = JointKind::kRevolute;
    } else if (kind == "prismatic") {
      const Vec3 axis = js.has("axis") ? unit(js.at("axis"), js.path("axis")) : Vec3::UnitX();
      obj.joint.xi = prismatic_twist(axis);
      obj.joint.kind = JointKind::kPrismatic;
    } else if (kind == "general") {
      if (!js.has("v") || !js.has("w")) fail("object.joint", "general joints need v and w");
      obj.joint.xi = Twist(vec3(js.at("v"), js.path("v")), vec3(js.at("w"), js.path("w")));
      obj.joint.kind = JointKind::kGeneral;
    } else {
      fail(js.path("kind"), "expected revolute, prismatic or general");
    }
    if (js.has("limits")) {
      const Eigen::VectorXd l = vec(js.at("limits"), js.path("limits"), 2);
      obj.joint.theta_min = l(0);
      obj.joint.theta_max = l(1);
    }
  }
  if (s.has("face")) {
    Section fs(s.at("face"), "object.face", {"center", "width", "height"});
    if (fs.has("center")) obj.face.center = pose(fs.at("center"), "object.face.center");
    fs.get("width", &obj.face.width);
    fs.get("height", &obj.face.height);
  }
}

void parse_prior(const json& j, PriorConfig* p) {
  Section s(j, "prior", {"enabled", "mode", "angle", "axis", "flow_sigma", "step", "sigma", "n_points"});
  s.get("enabled", &p->enabled);
  std::string mode = "none";
  s.get("mode", &mode);
  double angle = 0.0, flow_sigma = 0.0;
  s.get("angle", &angle);
  s.get("flow_sigma", &flow_sigma);
  const Vec3 axis = s.has("axis") ? unit(s.at("axis"), s.path("axis")) : Vec3::UnitZ();
  if (mode == "none") {
    p->mode = CorruptMode::none();
  } else if (mode == "swap_to_prismatic") {
    p->mode = CorruptMode::swap_to_prismatic();
  } else if (mode == "swap_to_revolute") {
    p->mode = CorruptMode::swap_to_revolute();
  } else if (mode == "rotate_flows") {
    p->mode = CorruptMode::rotate_flows(angle, axis);
  } else if (mode == "noise_on_flows") {
    p->mode = CorruptMode::noise_on_flows(flow_sigma);
  } else {
    fail(s.path("mode"), "unknown corruption mode '" + mode + "'");
  }
  s.get("step", &p->step);
  s.get("sigma", &p->sigma);
  s.get("n_points", &p->n_points);
}

void parse_chain(const json& j, Scenario* sc, bool* explicit_base) {
  Section s(j, "chain", {"joints", "tool", "lb_q", "ub_q", "lb_dq", "ub_dq", "base", "q_start"});
  KinematicChain& c = sc->chain;
  if (s.has("joints")) {
    const json& arr = s.at("joints");
    if (!arr.is_array() || arr.empty()) fail("chain.joints", "expected a non-empty array");
    c.joints.clear();
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const std::string where = "chain.joints[" + std::to_string(i) + "]";
      Section js(arr[i], where, {"axis", "origin", "kind"});
      ChainJoint cj;
      if (js.has("axis")) cj.axis = unit(js.at("axis"), js.path("axis"));
      if (js.has("origin")) cj.origin = pose(js.at("origin"), js.path("origin"));
      std::string kind = "revolute";
      js.get("kind", &kind);
      if (kind != "revolute" && kind != "prismatic") fail(js.path("kind"), "expected revolute or prismatic");
      cj.prismatic = kind == "prismatic";
      c.joints.push_back(cj);
    }
    const Eigen::Index n = static_cast<Eigen::Index>(c.joints.size());
    if (c.lb_q.size() != n) {
      c.lb_q = Eigen::VectorXd::Constant(n, -2.9);
      c.ub_q = Eigen::VectorXd::Constant(n, 2.9);
      c.lb_dq = Eigen::VectorXd::Constant(n, -1.5);
      c.ub_dq = Eigen::VectorXd::Constant(n, 1.5);
    }
  }
  if (s.has("tool")) c.tool = pose(s.at("tool"), "chain.tool");
  if (s.has("lb_q")) c.lb_q = vec(s.at("lb_q"), "chain.lb_q");
  if (s.has("ub_q")) c.ub_q = vec(s.at("ub_q"), "chain.ub_q");
  if (s.has("lb_dq")) c.lb_dq = vec(s.at("lb_dq"), "chain.lb_dq");
  if (s.has("ub_dq")) c.ub_dq = vec(s.at("ub_dq"), "chain.ub_dq");
  if (s.has("q_start")) sc->q_start = vec(s.at("q_start"), "chain.q_start");
  if (s.has("base")) {
    sc->robot_base = pose(s.at("base"), "chain.base");
    *explicit_base = true;
  }
}

void parse_estimator(const json& j, EstimatorConfig* e) {
  Section s(j, "estimator", {"gate_lin", "gate_ang", "batch_size", "sigma_prior_screw",
                             "sigma_prior_theta", "sigma_kin", "sigma_art", "sigma_base",
                             "lambda_init", "max_iterations", "relative_tolerance"});
  s.get("gate_lin", &e->gate_lin);
  s.get("gate_ang", &e->gate_ang);
  s.get("batch_size", &e->batch_size);
  s.get("sigma_prior_screw", &e->sigma_prior_screw);
  s.get("sigma_prior_theta", &e->sigma_prior_theta);
  auto pair = [&](const char* key, double* lin, double* ang) {
    if (!s.has(key)) return;
    const Eigen::VectorXd v = vec(s.at(key), s.path(key), 2);
    *lin = v(0);
    *ang = v(1);
  };
  pair("sigma_kin", &e->sigma_kin_lin, &e->sigma_kin_ang);
  pair("sigma_art", &e->sigma_art_lin, &e->sigma_art_ang);
  pair("sigma_base", &e->sigma_base_lin, &e->sigma_base_ang);
  s.get("lambda_init", &e->lambda_init);
  s.get("max_iterations", &e->max_iterations);
  s.get("relative_tolerance", &e->relative_tolerance);
  if (e->batch_size <= 0) throw Error(ErrorCode::kInvalidArgument, "estimator.batch_size must be positive");
  const double sig[] = {e->sigma_prior_screw, e->sigma_prior_theta, e->sigma_kin_lin,
                        e->sigma_kin_ang,     e->sigma_art_lin,     e->sigma_art_ang,
                        e->sigma_base_lin,    e->sigma_base_ang};
  for (double x : sig) {
    if (!(x > 0.0)) throw Error(ErrorCode::kInvalidArgument, "estimator sigmas must be positive");
  }
}

}  // namespace

Scenario parse_scenario(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kParse, std::string("invalid JSON: ") + e.what());
  }
  Section s(root, "scenario", {"name", "object", "prior", "noise", "compliance", "controller",
                               "chain", "estimator", "run"});
  Scenario sc;
  s.get("name", &sc.name);
  bool explicit_base = false;
  if (s.has("object")) parse_object(s.at("object"), &sc);
  if (s.has("prior")) parse_prior(s.at("prior"), &sc.prior);
  if (s.has("noise")) {
    Section ns(s.at("noise"), "noise", {"lin", "ang"});
    ns.get("lin", &sc.noise.lin);
    ns.get("ang", &sc.noise.ang);
  }
  if (s.has("compliance")) {
    Section cs(s.at("compliance"), "compliance", {"gain", "rotation_weight", "search_half_width"});
    cs.get("gain", &sc.compliance.gain);
    cs.get("rotation_weight", &sc.compliance.rotation_weight);
    cs.get("search_half_width", &sc.compliance.search_half_width);
  }
  sc.controller.theta_lo = sc.object.joint.theta_min;
  sc.controller.theta_hi = sc.object.joint.theta_max;
  if (s.has("controller")) {
    Section cs(s.at("controller"), "controller", {"gv", "dt", "theta_range", "stall_distance", "max_speed"});
    cs.get("gv", &sc.controller.gv);
    cs.get("stall_distance", &sc.controller.stall_distance);
    cs.get("max_speed", &sc.controller.max_speed);
    cs.get("dt", &sc.controller.dt);
    if (cs.has("theta_range")) {
      const Eigen::VectorXd r = vec(cs.at("theta_range"), "controller.theta_range", 2);
      sc.controller.theta_lo = r(0);
      sc.controller.theta_hi = r(1);
    }
  }
  if (s.has("chain")) parse_chain(s.at("chain"), &sc, &explicit_base);
  if (!explicit_base) sc.robot_base = default_robot_base(sc.object);
  if (s.has("estimator")) parse_estimator(s.at("estimator"), &sc.estimator);
  if (s.has("run")) {
    Section rs(s.at("run"), "run", {"seed", "max_ticks", "success_fraction", "converge_similarity"});
    rs.get("seed", &sc.seed);
    rs.get("max_ticks", &sc.max_ticks);
    rs.get("success_fraction", &sc.success_fraction);
    rs.get("converge_similarity", &sc.converge_similarity);
  }
  validate(sc);
  return sc;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kParse, "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

ArticulatedObject make_door(const Vec3& axis, const Vec3& hinge_point, const Pose& grasp_offset,
                            double theta_max) {
  ArticulatedObject obj;
  obj.joint.xi = revolute_twist(axis.normalized(), hinge_point);
  obj.joint.kind = JointKind::kRevolute;
  obj.joint.theta_min = 0.0;
  obj.joint.theta_max = theta_max;
  obj.grasp_offset = grasp_offset;
  // Face: the panel strip between the hinge and the handle.
  const Vec3 a = axis.normalized();
  const Vec3 h = grasp_offset.translation;
  const Vec3 foot = hinge_point + a * a.dot(h - hinge_point);
  obj.face.center = Pose(grasp_offset.rotation, 0.5 * (h + foot));
  obj.face.width = 0.9 * (h - foot).norm();
  obj.face.height = 0.6;
  return obj;
}

ArticulatedObject make_drawer(const Vec3& direction, const Pose& grasp_offset, double theta_max) {
  ArticulatedObject obj;
  obj.joint.xi = prismatic_twist(direction.normalized());
  obj.joint.kind = JointKind::kPrismatic;
  obj.joint.theta_min = 0.0;
  obj.joint.theta_max = theta_max;
  obj.grasp_offset = grasp_offset;
  obj.face.center = grasp_offset;
  obj.face.width = 0.4;
  obj.face.height = 0.2;
  return obj;
}

}  // namespace screwest
