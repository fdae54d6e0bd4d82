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

#include "screwest/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "screwest/error.hpp"
#include "screwest/format.hpp"
#include "screwest/metrics.hpp"
#include "screwest/scenario.hpp"
#include "screwest/sim.hpp"

namespace screwest {
namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

int exit_code_for(const Error& e) {
  switch (e.code()) {
    case ErrorCode::kParse:
    case ErrorCode::kInvalidArgument:
      return kExitConfig;
    default:
      return kExitRuntime;
  }
}

ordered_json vec_json(const Vec3& v) { return ordered_json::array({v.x(), v.y(), v.z()}); }

ordered_json pose_json(const Pose& p) {
  const Eigen::Quaterniond q = to_quaternion(p.rotation);
  return {{"translation", vec_json(p.translation)},
          {"quaternion", ordered_json::array({q.w(), q.x(), q.y(), q.z()})}};
}

ordered_json joint_json(const Joint& j) {
  return {{"kind", std::string(to_string(j.kind))}, {"v", vec_json(j.xi.v)}, {"w", vec_json(j.xi.w)}};
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kParse, "cannot create directory " + dir);
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kParse, "cannot write " + path.string());
  return out;
}

template <typename T>
std::vector<T> parse_grid(const std::string& text) {
  std::vector<T> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      if constexpr (std::is_same_v<T, int>) {
        out.push_back(std::stoi(item, &used));
      } else {
        out.push_back(std::stod(item, &used));
      }
      if (item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw Error(ErrorCode::kParse, "bad grid entry '" + item + "'");
    }
  }
  if (out.empty()) throw Error(ErrorCode::kParse, "empty grid");
  return out;
}

// Writes one simulation's outputs; returns the exit code and a log line.
int simulate_one(const std::string& path, std::optional<std::uint64_t> seed, const std::string& dir,
                 std::string* log) {
  Scenario sc;
  try {
    sc = load_scenario(path);
    if (seed) sc.seed = *seed;
    validate(sc);
  } catch (const Error& e) {
    *log = path + ": " + e.what();
    return exit_code_for(e);
  }
  const RunResult r = run_closed_loop(sc);

  ordered_json j;
  j["name"] = sc.name;
  j["seed"] = sc.seed;
  j["success"] = r.success;
  j["converged_tick"] = r.converged_tick ? ordered_json(*r.converged_tick) : ordered_json(nullptr);
  j["theta_at_convergence"] = r.theta_at_convergence;
  j["ticks"] = r.ticks.size();
  j["emitted"] = r.emitted;
  j["theta_max_reached"] = r.theta_max_reached;
  j["theta_final"] = r.theta_final;
  if (r.final_estimate) {
    j["final_joint"] = joint_json(world_joint(*r.final_estimate));
    j["final_similarity"] = r.final_similarity;
  } else {
    j["final_joint"] = nullptr;
    j["final_similarity"] = nullptr;
  }
  j["error"] = r.error;
  try {
    ensure_dir(dir);
    open_out(fs::path(dir) / "run.json") << j.dump(2) << '\n';
    std::ofstream csv = open_out(fs::path(dir) / "ticks.csv");
    csv << "t,theta_true,theta_cmd,accepted,slack_norm,similarity,tx,ty,tz,qw,qx,qy,qz\n";
    for (const TickRecord& t : r.ticks) {
      const Eigen::Quaterniond q = to_quaternion(t.ee_pose_meas.rotation);
      const Vec3& p = t.ee_pose_meas.translation;
      csv << t.t << ',' << fmt_num(t.theta_true) << ',' << fmt_num(t.theta_cmd) << ','
          << (t.accepted ? 1 : 0) << ',' << fmt_num(t.slack_norm) << ','
          << (t.tangent_similarity_current ? fmt_num(*t.tangent_similarity_current) : "") << ','
          << fmt_num(p.x()) << ',' << fmt_num(p.y()) << ',' << fmt_num(p.z()) << ','
          << fmt_num(q.w()) << ',' << fmt_num(q.x()) << ',' << fmt_num(q.y()) << ','
          << fmt_num(q.z()) << '\n';
    }
  } catch (const Error& e) {
    *log = path + ": " + e.what();
    return kExitConfig;
  }
  if (!r.error.empty()) {
    *log = sc.name + ": " + r.error;
    return kExitRuntime;
  }
  *log = sc.name + ": success=" + (r.success ? "true" : "false") +
         " theta_max=" + fmt_num(r.theta_max_reached) +
         " converged_tick=" + (r.converged_tick ? std::to_string(*r.converged_tick) : "none");
  return kExitOk;
}

int cmd_simulate(const std::vector<std::string>& scenarios, std::optional<std::uint64_t> seed,
                 const std::string& out_dir, int jobs, std::ostream& out, std::ostream& err) {
  const std::size_t n = scenarios.size();
  std::vector<int> codes(n, kExitOk);
  std::vector<std::string> logs(n);
  std::vector<std::string> dirs(n, out_dir);
  if (n > 1) {
    for (std::size_t i = 0; i < n; ++i) {
      dirs[i] = (fs::path(out_dir) / fs::path(scenarios[i]).stem()).string();
    }
  }
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      codes[i] = simulate_one(scenarios[i], seed, dirs[i], &logs[i]);
    }
  };
  const int workers = std::clamp(jobs, 1, static_cast<int>(n));
  std::vector<std::thread> pool;
  for (int w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (std::thread& t : pool) t.join();

  int code = kExitOk;
  for (std::size_t i = 0; i < n; ++i) {
    (codes[i] == kExitOk ? out : err) << logs[i] << '\n';
    code = std::max(code, codes[i]);
  }
  return code;
}

int cmd_estimate(const std::string& traj_path, const std::string& cloud_path,
                 const std::string& scenario_path, const std::string& out_dir, std::ostream& out,
                 std::ostream& err) {
  const Trajectory traj = load_trajectory(traj_path);
  if (traj.size() == 0) throw Error(ErrorCode::kParse, "trajectory is empty");
  EstimatorConfig config;
  if (!scenario_path.empty()) config = load_scenario(scenario_path).estimator;

  const Pose& base = traj.poses.front();
  std::optional<ScrewPrediction> prior;
  if (!cloud_path.empty()) {
    ScrewPrediction p = predict_screw(load_flowcloud(cloud_path));
    p.xi_tilde = adjoint(inverse(base), p.xi_tilde);
    prior = p;
  }
  Graph graph(config);
  graph.initialize(base, prior);
  const std::vector<Pose> stream(traj.poses.begin() + 1, traj.poses.end());
  const std::vector<BatchResult> batches = run_batched(graph, stream);
  if (graph.num_measurements() < 2) {
    err << "unobservable: " << graph.num_measurements()
        << " accepted measurement(s), at least 2 are needed\n";
    return kExitRuntime;
  }

  ordered_json j;
  ordered_json list = ordered_json::array();
  const Estimate* last = nullptr;
  for (const BatchResult& b : batches) {
    ordered_json e;
    e["accepted"] = b.accepted_total;
    if (b.estimate) {
      e["joint"] = joint_json(world_joint(*b.estimate));
      e["final_cost"] = b.estimate->final_cost;
      e["iterations"] = b.estimate->iterations;
      e["converged"] = b.estimate->converged;
      last = &*b.estimate;
    } else {
      e["error"] = b.error;
    }
    list.push_back(e);
  }
  if (!last) {
    err << "no batch produced an estimate\n";
    return kExitRuntime;
  }
  j["accepted"] = graph.num_measurements();
  j["joint"] = joint_json(world_joint(*last));
  j["base_pose"] = pose_json(last->base_pose);
  j["final_cost"] = last->final_cost;
  j["cost_history"] = last->cost_history;
  j["batches"] = list;
  ensure_dir(out_dir);
  open_out(fs::path(out_dir) / "estimate.json") << j.dump(2) << '\n';
  out << "estimate: " << to_string(last->joint.kind) << " from " << graph.num_measurements()
      << " measurements\n";
  return kExitOk;
}

int cmd_study(const std::string& traj_path, const std::string& truth_path,
              const std::string& scenario_path, const std::string& kind, const std::string& unit,
              const std::string& grid, const std::string& out_dir, std::ostream& out) {
  StudyInput in;
  in.measured = load_trajectory(traj_path);
  if (!truth_path.empty()) in.truth = load_trajectory(truth_path);
  if (!scenario_path.empty()) {
    const Scenario sc = load_scenario(scenario_path);
    in.gt_twist = world_twist(sc.object);
    in.config = sc.estimator;
  }
  SimilarityCurve curve;
  if (kind == "fixed-increment") {
    const auto g = grid.empty() ? std::vector<double>{0.25, 0.5, 1.0, 2.0, 5.0}
                                : parse_grid<double>(grid);
    curve = study_fixed_increment(in, g, unit == "cm" ? IncrementUnit::kCentimeters
                                                      : IncrementUnit::kDegrees);
  } else {
    const auto g = grid.empty() ? std::vector<int>{2, 3, 5, 10, 20} : parse_grid<int>(grid);
    curve = study_spaced_counts(in, g);
  }
  ensure_dir(out_dir);
  std::ofstream csv = open_out(fs::path(out_dir) / "study.csv");
  write_curve_csv(csv, curve);
  write_curve_csv(out, curve);
  return kExitOk;
}

int cmd_gen(const std::string& scenario_path, std::optional<std::uint64_t> seed,
            const std::string& out_dir, std::ostream& out) {
  Scenario sc = load_scenario(scenario_path);
  if (seed) sc.seed = *seed;
  const GeneratedData d = generate_data(sc);
  ensure_dir(out_dir);
  const fs::path dir(out_dir);
  save_trajectory((dir / "truth.traj").string(), d.truth);
  save_trajectory((dir / "measured.traj").string(), d.measured);
  save_flowcloud((dir / "flowcloud.txt").string(), d.cloud);
  out << "gen: " << d.truth.size() << " samples\n";
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Screw-parameter estimation benchmarks"};
  app.require_subcommand(1);

  std::vector<std::string> scenarios;
  std::string scenario, out_dir = ".", traj, truth, cloud, kind = "fixed-increment", unit = "deg",
                        grid;
  std::optional<std::uint64_t> seed;
  int jobs = 1;

  CLI::App* sim = app.add_subcommand("simulate", "Run closed-loop scenarios");
  sim->add_option("--scenario", scenarios, "Scenario file (repeatable)")->required();
  sim->add_option("--out", out_dir, "Output directory");
  sim->add_option("--seed", seed, "Override the scenario seed");
  sim->add_option("--jobs", jobs, "Scenarios run in parallel")->check(CLI::PositiveNumber);

  CLI::App* est = app.add_subcommand("estimate", "Estimate a joint from a recorded trajectory");
  est->add_option("--traj", traj, "Trajectory file")->required();
  est->add_option("--flowcloud", cloud, "Flow cloud for the affordance prior (world frame)");
  est->add_option("--scenario", scenario, "Scenario whose estimator section is used");
  est->add_option("--out", out_dir, "Output directory");

  CLI::App* study = app.add_subcommand("study", "Tangent-similarity studies");
  study->add_option("--traj", traj, "Measured trajectory")->required();
  study->add_option("--truth", truth, "Ground-truth trajectory with the same timestamps");
  study->add_option("--scenario", scenario, "Scenario providing the true joint and estimator");
  study->add_option("--kind", kind, "fixed-increment or spaced")
      ->check(CLI::IsMember({"fixed-increment", "spaced"}));
  study->add_option("--unit", unit, "Increment unit, deg or cm")->check(CLI::IsMember({"deg", "cm"}));
  study->add_option("--grid", grid, "Comma-separated increments or counts");
  study->add_option("--out", out_dir, "Output directory");

  CLI::App* gen = app.add_subcommand("gen", "Generate trajectories and a flow cloud");
  gen->add_option("--scenario", scenario, "Scenario file")->required();
  gen->add_option("--seed", seed, "Override the scenario seed");
  gen->add_option("--out", out_dir, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*sim) return cmd_simulate(scenarios, seed, out_dir, jobs, out, err);
    if (*est) return cmd_estimate(traj, cloud, scenario, out_dir, out, err);
    if (*study) return cmd_study(traj, truth, scenario, kind, unit, grid, out_dir, out);
    if (*gen) return cmd_gen(scenario, seed, out_dir, out);
  } catch (const Error& e) {
    err << e.what() << '\n';
    return exit_code_for(e);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitConfig;
}

}  // namespace screwest
