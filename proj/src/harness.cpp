// Copyright 2026 The sparseloc Authors
// SPDX-License-Identifier: Apache-2.0

#include "sparseloc/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <thread>

#include "sparseloc/network_io.hpp"
#include "sparseloc/random.hpp"
#include "sparseloc/rigidity.hpp"

namespace sparseloc {

namespace {

std::string_view to_string(NetworkSourceKind kind) {
  switch (kind) {
    case NetworkSourceKind::generated:
      return "generated";
    case NetworkSourceKind::file:
      return "file";
    case NetworkSourceKind::paperlike13:
      return "paperlike13";
  }
  return "unknown";
}

NetworkSourceKind parse_source(const std::string& text) {
  if (text == "generated") return NetworkSourceKind::generated;
  if (text == "file") return NetworkSourceKind::file;
  if (text == "paperlike13") return NetworkSourceKind::paperlike13;
  throw Error("unknown network source '" + text + "' (expected generated|file|paperlike13)");
}

}  // namespace

void ScenarioConfig::validate(int num_agents) const {
  if (trials < 1) throw Error("scenario: trials must be at least 1");
  if (epsilon < 0.0) throw Error("scenario: epsilon must be non-negative");
  if (kappa < 0.0) throw Error("scenario: kappa must be non-negative");
  if (faults.count < 0) throw Error("scenario: fault count must be non-negative");
  if (num_agents >= 0 && faults.count >= num_agents) {
    throw Error("scenario: fault count " + std::to_string(faults.count) + " must be below |V| = " +
                std::to_string(num_agents));
  }
  if (!(faults.cube.side > 0.0)) throw Error("scenario: cube side must be positive");
  normalize_shrink(solver.shrink);
  for (const auto& [eps, ratio] : shrink_schedule) normalize_shrink(ratio);
}

std::map<double, double> default_shrink_schedule() {
  return {{0.0, 3.0}, {1.0, 2.0}, {2.0, 1.5}, {3.0, 1.5}, {4.0, 1.3}, {5.0, 1.2}};
}

ScenarioConfig scenario_from_json(const nlohmann::json& doc) {
  ScenarioConfig sc;
  try {
    if (doc.contains("network")) {
      const auto& n = doc.at("network");
      auto& src = sc.network;
      src.kind = parse_source(n.value("source", std::string("paperlike13")));
      src.n = n.value("n", src.n);
      src.dim = n.value("dim", src.dim);
      src.radius = n.value("radius", src.radius);
      src.box = n.value("box", src.box);
      src.seed = n.value("seed", src.seed);
      if (n.contains("path")) src.path = n.at("path").get<std::string>();
      if (src.kind == NetworkSourceKind::file && src.path.empty()) throw Error("scenario: file network needs a path");
    }
    if (doc.contains("kind")) sc.kind = parse_measurement_kind(doc.at("kind").get<std::string>());
    if (doc.contains("faults")) {
      const auto& f = doc.at("faults");
      sc.faults.count = f.value("count", sc.faults.count);
      if (f.contains("mode")) sc.faults.mode = parse_fault_mode(f.at("mode").get<std::string>());
      sc.faults.cube.side = f.value("cube_side", sc.faults.cube.side);
      sc.faults.cube.centered = f.value("cube_centered", sc.faults.cube.centered);
    }
    sc.epsilon = doc.value("epsilon", sc.epsilon);
    sc.kappa = doc.value("kappa", sc.kappa);
    if (doc.contains("solver")) {
      const auto& s = doc.at("solver");
      auto& p = sc.solver;
      p.initial_slack = s.value("initial_slack", p.initial_slack);
      p.shrink = s.value("shrink", p.shrink);
      p.step_tolerance = s.value("step_tolerance", p.step_tolerance);
      p.max_iterations = s.value("max_iterations", p.max_iterations);
      if (s.contains("support_threshold") && !s.at("support_threshold").is_null())
        p.support_threshold = s.at("support_threshold").get<double>();
      p.inner_tolerance = s.value("inner_tolerance", p.inner_tolerance);
      p.inner_max_iterations = s.value("inner_max_iterations", p.inner_max_iterations);
      p.slack_includes_noise = s.value("slack_includes_noise", p.slack_includes_noise);
    }
    if (doc.contains("shrink_schedule")) {
      const auto& sched = doc.at("shrink_schedule");
      if (sched.is_string() && sched.get<std::string>() == "default") {
        sc.shrink_schedule = default_shrink_schedule();
      } else {
        for (const auto& entry : sched) sc.shrink_schedule[entry.at(0).get<double>()] = entry.at(1).get<double>();
      }
    }
    sc.trials = doc.value("trials", sc.trials);
    sc.base_seed = doc.value("base_seed", sc.base_seed);
    sc.regenerate_network = doc.value("regenerate_network", sc.regenerate_network);
  } catch (const nlohmann::json::exception& ex) {
    throw Error(std::string("scenario: malformed document: ") + ex.what());
  }
  sc.validate(-1);
  return sc;
}

nlohmann::json to_json(const ScenarioConfig& sc) {
  nlohmann::json net = {{"source", to_string(sc.network.kind)}, {"seed", sc.network.seed}};
  if (sc.network.kind == NetworkSourceKind::generated) {
    net["n"] = sc.network.n;
    net["dim"] = sc.network.dim;
    net["radius"] = sc.network.radius;
    net["box"] = sc.network.box;
  }
  if (sc.network.kind == NetworkSourceKind::file) net["path"] = sc.network.path.string();
  nlohmann::json solver = {{"initial_slack", sc.solver.initial_slack},
                           {"shrink", sc.solver.shrink},
                           {"step_tolerance", sc.solver.step_tolerance},
                           {"max_iterations", sc.solver.max_iterations},
                           {"support_threshold", sc.solver.support_threshold ? nlohmann::json(*sc.solver.support_threshold)
                                                                             : nlohmann::json(nullptr)},
                           {"inner_tolerance", sc.solver.inner_tolerance},
                           {"inner_max_iterations", sc.solver.inner_max_iterations},
                           {"slack_includes_noise", sc.solver.slack_includes_noise}};
  auto sched = nlohmann::json::array();
  for (const auto& [eps, ratio] : sc.shrink_schedule) sched.push_back({eps, ratio});
  return {{"network", net},
          {"kind", to_string(sc.kind)},
          {"faults",
           {{"count", sc.faults.count},
            {"mode", to_string(sc.faults.mode)},
            {"cube_side", sc.faults.cube.side},
            {"cube_centered", sc.faults.cube.centered}}},
          {"epsilon", sc.epsilon},
          {"kappa", sc.kappa},
          {"solver", solver},
          {"shrink_schedule", sched},
          {"trials", sc.trials},
          {"base_seed", sc.base_seed},
          {"regenerate_network", sc.regenerate_network}};
}

ScenarioConfig read_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open scenario file " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& ex) {
    throw Error("scenario " + path.string() + ": " + ex.what());
  }
  return scenario_from_json(doc);
}

namespace {

bool is_rigid(const NetworkInstance& net, MeasurementKind kind) {
  return rigidity_report(rigidity_matrix(kind, net.config, net.graph)).is_infinitesimally_rigid;
}

constexpr int kMaxAttempts = 10000;

}  // namespace

NetworkInstance paperlike13(std::uint64_t seed) {
  constexpr int n = 13;
  constexpr double box = 10.0;
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    Rng rng(mix_seed(seed, static_cast<std::uint64_t>(attempt)));
    Eigen::VectorXd values(3 * n);
    for (Eigen::Index k = 0; k < values.size(); ++k) values[k] = rng.uniform(0.0, box);
    Configuration cfg(BlockVector(3, values));

    std::vector<double> dists;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) dists.push_back((cfg.position(i) - cfg.position(j)).norm());
    std::sort(dists.begin(), dists.end());
    const double radius = 0.5 * (dists[35] + dists[36]);

    SensorGraph graph{n, {}};
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        if ((cfg.position(i) - cfg.position(j)).norm() <= radius) graph.edges.push_back({i, j});

    NetworkInstance net{std::move(cfg), std::move(graph)};
    if (!validate_configuration(net.config, net.graph).ok) continue;
    if (rigidity_report(distance_rigidity_matrix(net.config, net.graph)).rank == 33) return net;
  }
  throw Error("paperlike13: no rigid draw found");
}

NetworkInstance build_network(const NetworkSource& source, MeasurementKind kind) {
  switch (source.kind) {
    case NetworkSourceKind::paperlike13:
      return paperlike13(source.seed);
    case NetworkSourceKind::file: {
      NetworkInstance net = read_network(source.path);
      if (!is_rigid(net, kind)) throw Error("network " + source.path.string() + " is not infinitesimally rigid");
      return net;
    }
    case NetworkSourceKind::generated:
      for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
        NetworkInstance net = random_geometric_network(source.n, source.dim, source.radius, source.box,
                                                       mix_seed(source.seed, static_cast<std::uint64_t>(attempt)));
        if (validate_configuration(net.config, net.graph).ok && is_rigid(net, kind)) return net;
      }
      throw Error("generated network: no rigid draw found; increase the radius");
  }
  throw Error("unknown network source");
}

ScpParams scp_params_for(const ScenarioConfig& sc) {
  ScpParams p;
  p.max_iterations = sc.solver.max_iterations;
  p.initial_slack = sc.solver.initial_slack + (sc.solver.slack_includes_noise ? sc.epsilon : 0.0);
  const auto it = sc.shrink_schedule.find(sc.epsilon);
  p.shrink = normalize_shrink(it != sc.shrink_schedule.end() ? it->second : sc.solver.shrink);
  p.step_tolerance = sc.solver.step_tolerance;
  p.support_threshold = sc.solver.support_threshold;
  p.inner.tolerance = sc.solver.inner_tolerance;
  p.inner.max_iterations = sc.solver.inner_max_iterations;
  return p;
}

double relative_error(const BlockVector& truth, const BlockVector& estimate, double support_threshold) {
  const double denom = truth.values().norm();
  const double diff = (truth.values() - estimate.values()).norm();
  if (denom > 0.0) return diff / denom;
  return estimate.values().norm() <= support_threshold ? 0.0 : std::numeric_limits<double>::quiet_NaN();
}

TrialSetup prepare_trial(const ScenarioConfig& sc, const NetworkInstance& net, int trial_index) {
  const Configuration& truth = net.config;
  const int n = truth.num_agents();
  sc.validate(n);

  TrialSetup setup;
  setup.seed = mix_seed(sc.base_seed, static_cast<std::uint64_t>(trial_index));
  Rng fault_rng(mix_seed(setup.seed, 1));
  const IndexSet faulty = fault_rng.sample_without_replacement(n, sc.faults.count);
  setup.state = inject_faults(truth, faulty, sc.faults.mode, fault_rng, sc.faults.cube);
  Rng kappa_rng(mix_seed(setup.seed, 2));
  perturb_healthy_estimates(setup.state, truth, sc.kappa, kappa_rng);
  Rng noise_rng(mix_seed(setup.seed, 3));
  setup.measurements = add_measurement_noise(measure(sc.kind, truth, net.graph), sc.epsilon, noise_rng);
  return setup;
}

TrialRecord run_trial(const ScenarioConfig& sc, const NetworkInstance& net, int trial_index) {
  const TrialSetup setup = prepare_trial(sc, net, trial_index);
  const ErrorState& state = setup.state;
  const MeasurementSet& y = setup.measurements;

  TrialRecord rec;
  rec.trial = trial_index;
  rec.seed = setup.seed;
  rec.fault_set = state.fault_set;

  const auto start = std::chrono::steady_clock::now();
  try {
    const RecoveryResult result = scp_recover(Configuration(state.estimates), y, net.graph, scp_params_for(sc));
    rec.identified = result.support;
    rec.relative_error = relative_error(state.true_error, result.x_star, result.support_threshold);
    rec.iterations = result.iterations_used;
    rec.status = std::string(to_string(result.status));
    rec.inner_status = result.trace.empty() ? "none" : std::string(to_string(result.trace.back().inner_status));
    rec.message = result.message;
  } catch (const Error& ex) {
    rec.status = "error";
    rec.inner_status = "none";
    rec.relative_error = std::numeric_limits<double>::quiet_NaN();
    rec.message = ex.what();
  }
  rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rec;
}

TrialRecord run_trial(const ScenarioConfig& sc, int trial_index) {
  NetworkSource source = sc.network;
  if (sc.regenerate_network) source.seed = mix_seed(source.seed, static_cast<std::uint64_t>(trial_index));
  return run_trial(sc, build_network(source, sc.kind), trial_index);
}

namespace {

// Runs task(k) for k in [0, count) on `jobs` threads.
template <typename Task>
void parallel_for(int count, int jobs, Task&& task) {
  jobs = std::max(1, std::min(jobs, count));
  if (jobs == 1) {
    for (int k = 0; k < count; ++k) task(k);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  for (int t = 0; t < jobs; ++t) {
    pool.emplace_back([&] {
      for (int k = next++; k < count; k = next++) task(k);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace

std::vector<TrialRecord> run_trials(const ScenarioConfig& sc, const NetworkInstance& net, int jobs) {
  std::vector<TrialRecord> out(static_cast<std::size_t>(sc.trials));
  parallel_for(sc.trials, jobs, [&](int t) {
    out[t] = sc.regenerate_network ? run_trial(sc, t) : run_trial(sc, net, t);
  });
  return out;
}

std::string_view to_string(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::fault_count:
      return "fault_count";
    case SweepAxis::noise_grid:
      return "noise_grid";
    case SweepAxis::iterations:
      return "iterations";
    case SweepAxis::correlation:
      return "correlation";
  }
  return "unknown";
}

SweepAxis parse_sweep_axis(std::string_view text) {
  if (text == "fault_count") return SweepAxis::fault_count;
  if (text == "noise_grid" || text == "noise") return SweepAxis::noise_grid;
  if (text == "iterations") return SweepAxis::iterations;
  if (text == "correlation") return SweepAxis::correlation;
  throw Error("unknown sweep axis '" + std::string(text) + "' (expected fault_count|noise_grid|iterations|correlation)");
}

SweepSpec sweep_from_json(const nlohmann::json& doc, SweepAxis axis) {
  SweepSpec spec;
  spec.axis = axis;
  if (!doc.contains("sweep")) return spec;
  try {
    const auto& s = doc.at("sweep");
    if (s.contains("fault_counts")) spec.fault_counts = s.at("fault_counts").get<std::vector<int>>();
    if (s.contains("modes")) {
      spec.modes.clear();
      for (const auto& m : s.at("modes")) spec.modes.push_back(parse_fault_mode(m.get<std::string>()));
    }
    if (s.contains("epsilons")) spec.epsilons = s.at("epsilons").get<std::vector<double>>();
    if (s.contains("kappas")) spec.kappas = s.at("kappas").get<std::vector<double>>();
    if (s.contains("iterations")) spec.iterations = s.at("iterations").get<std::vector<int>>();
  } catch (const nlohmann::json::exception& ex) {
    throw Error(std::string("sweep: malformed document: ") + ex.what());
  }
  return spec;
}

std::vector<SweepPoint> sweep_points(const ScenarioConfig& base, const SweepSpec& spec) {
  std::vector<SweepPoint> out;
  auto add = [&](ScenarioConfig sc) { out.push_back({static_cast<int>(out.size()), std::move(sc)}); };
  switch (spec.axis) {
    case SweepAxis::fault_count: {
      const auto modes = spec.modes.empty() ? std::vector<FaultMode>{base.faults.mode} : spec.modes;
      for (FaultMode mode : modes) {
        for (int count : spec.fault_counts) {
          ScenarioConfig sc = base;
          sc.faults.mode = mode;
          sc.faults.count = count;
          add(sc);
        }
      }
      break;
    }
    case SweepAxis::noise_grid:
      for (double eps : spec.epsilons) {
        for (double kappa : spec.kappas) {
          ScenarioConfig sc = base;
          sc.epsilon = eps;
          sc.kappa = kappa;
          add(sc);
        }
      }
      break;
    case SweepAxis::iterations:
      for (int cap : spec.iterations) {
        ScenarioConfig sc = base;
        sc.solver.max_iterations = cap;
        add(sc);
      }
      break;
    case SweepAxis::correlation: {
      const auto modes = spec.modes.empty()
                             ? std::vector<FaultMode>{FaultMode::uncorrelated, FaultMode::fully_correlated}
                             : spec.modes;
      for (FaultMode mode : modes) {
        ScenarioConfig sc = base;
        sc.faults.mode = mode;
        add(sc);
      }
      break;
    }
  }
  return out;
}

PointSummary summarize(int point, const std::vector<TrialRecord>& records) {
  PointSummary s;
  s.point = point;
  s.trials = static_cast<int>(records.size());
  std::vector<double> errors;
  int correct = 0;
  for (const auto& r : records) {
    if (r.identified_correctly()) ++correct;
    if (std::isfinite(r.relative_error)) errors.push_back(r.relative_error);
  }
  s.defined_trials = static_cast<int>(errors.size());
  if (s.trials > 0) s.identification_rate = static_cast<double>(correct) / s.trials;
  if (errors.empty()) {
    s.mean_relative_error = s.std_relative_error = s.median_relative_error = std::numeric_limits<double>::quiet_NaN();
    return s;
  }
  double sum = 0.0;
  for (double e : errors) sum += e;
  s.mean_relative_error = sum / static_cast<double>(errors.size());
  double sq = 0.0;
  for (double e : errors) sq += (e - s.mean_relative_error) * (e - s.mean_relative_error);
  s.std_relative_error = std::sqrt(sq / static_cast<double>(errors.size()));
  std::sort(errors.begin(), errors.end());
  const std::size_t m = errors.size();
  s.median_relative_error = m % 2 == 1 ? errors[m / 2] : 0.5 * (errors[m / 2 - 1] + errors[m / 2]);
  return s;
}

SweepResult monte_carlo_sweep(const ScenarioConfig& sc, const SweepSpec& spec, int jobs) {
  SweepResult result;
  result.points = sweep_points(sc, spec);
  std::optional<NetworkInstance> fixed;
  if (!sc.regenerate_network) fixed = build_network(sc.network, sc.kind);
  for (const auto& p : result.points) p.scenario.validate(fixed ? fixed->config.num_agents() : -1);

  std::vector<std::pair<int, int>> tasks;
  result.records.resize(result.points.size());
  for (const auto& p : result.points) {
    result.records[p.index].resize(static_cast<std::size_t>(p.scenario.trials));
    for (int t = 0; t < p.scenario.trials; ++t) tasks.emplace_back(p.index, t);
  }
  parallel_for(static_cast<int>(tasks.size()), jobs, [&](int k) {
    const auto [point, trial] = tasks[k];
    const ScenarioConfig& psc = result.points[point].scenario;
    result.records[point][trial] = fixed ? run_trial(psc, *fixed, trial) : run_trial(psc, trial);
  });
  for (const auto& p : result.points) result.summaries.push_back(summarize(p.index, result.records[p.index]));
  return result;
}

namespace {

std::string num(double v) {
  if (std::isnan(v)) return "undefined";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string join(const IndexSet& set) {
  std::string out;
  for (std::size_t k = 0; k < set.size(); ++k) {
    if (k > 0) out += ';';
    out += std::to_string(set[k]);
  }
  return out;
}

void point_columns(std::ostream& out, const SweepPoint& p) {
  const auto& sc = p.scenario;
  out << p.index << ',' << sc.faults.count << ',' << to_string(sc.faults.mode) << ',' << num(sc.epsilon) << ','
      << num(sc.kappa) << ',' << sc.solver.max_iterations;
}

constexpr const char* kPointHeader = "point,fault_count,mode,epsilon,kappa,max_iterations";

}  // namespace

void write_trials_csv(std::ostream& out, const SweepResult& result) {
  out << kTrialsCsvVersion << '\n';
  out << kPointHeader << ",trial,seed,fault_set,identified,correct,relative_error,iterations,status,inner_status\n";
  for (const auto& p : result.points) {
    for (const auto& r : result.records[p.index]) {
      point_columns(out, p);
      out << ',' << r.trial << ',' << r.seed << ',' << join(r.fault_set) << ',' << join(r.identified) << ','
          << (r.identified_correctly() ? 1 : 0) << ',' << num(r.relative_error) << ',' << r.iterations << ','
          << r.status << ',' << r.inner_status << '\n';
    }
  }
}

void write_aggregate_csv(std::ostream& out, const SweepResult& result) {
  out << kAggregateCsvVersion << '\n';
  out << kPointHeader
      << ",trials,defined_trials,identification_rate,mean_relative_error,std_relative_error,median_relative_error\n";
  for (const auto& p : result.points) {
    const auto& s = result.summaries[p.index];
    point_columns(out, p);
    out << ',' << s.trials << ',' << s.defined_trials << ',' << num(s.identification_rate) << ','
        << num(s.mean_relative_error) << ',' << num(s.std_relative_error) << ',' << num(s.median_relative_error)
        << '\n';
  }
}

void write_timing_csv(std::ostream& out, const SweepResult& result) {
  out << "point,trial,wall_seconds\n";
  for (const auto& p : result.points)
    for (const auto& r : result.records[p.index]) out << p.index << ',' << r.trial << ',' << num(r.wall_seconds) << '\n';
}

void write_sweep(const std::filesystem::path& dir, const SweepResult& result) {
  std::filesystem::create_directories(dir);
  auto open = [&](const char* name) {
    std::ofstream f(dir / name);
    if (!f) throw Error("cannot write " + (dir / name).string());
    return f;
  };
  {
    auto f = open("trials.csv");
    write_trials_csv(f, result);
  }
  {
    auto f = open("aggregate.csv");
    write_aggregate_csv(f, result);
  }
  {
    auto f = open("timing.csv");
    write_timing_csv(f, result);
  }
}

}  // namespace sparseloc
