// Copyright 2026 The sparseloc Authors
// SPDX-License-Identifier: Apache-2.0

// Command line front end: generate, analyze, recover, montecarlo, oracle.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "sparseloc/core_model.hpp"
#include "sparseloc/harness.hpp"
#include "sparseloc/measurement.hpp"
#include "sparseloc/network_io.hpp"
#include "sparseloc/oracle.hpp"
#include "sparseloc/random.hpp"
#include "sparseloc/recoverability.hpp"
#include "sparseloc/rigidity.hpp"
#include "sparseloc/solver.hpp"

using namespace sparseloc;
using nlohmann::json;

namespace {

json rigidity_json(const RigidityReport& r) {
  return {{"rank", r.rank},
          {"nullity", r.nullity},
          {"maximal_rank", r.maximal_rank},
          {"infinitesimally_rigid", r.is_infinitesimally_rigid},
          {"worst_case_index", r.worst_case_index}};
}

json recovery_json(const RecoveryResult& r) {
  return {{"x_star", block_vector_to_json(r.x_star)},
          {"support", r.support},
          {"support_threshold", r.support_threshold},
          {"iterations_used", r.iterations_used},
          {"status", to_string(r.status)},
          {"converged", r.converged},
          {"objective_increased", r.objective_increased},
          {"message", r.message}};
}

IndexSet parse_indices(const std::string& text) {
  IndexSet out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      out.push_back(std::stoi(item));
    } catch (const std::exception&) {
      throw Error("bad agent index '" + item + "'");
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& ex) {
    throw Error(path + ": " + ex.what());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Localization error recovery from inter-agent measurements"};
  app.require_subcommand(1);

  // generate
  auto* gen = app.add_subcommand("generate", "Random geometric network");
  int g_n = 13, g_dim = 3;
  double g_radius = 5.0, g_box = 10.0;
  std::uint64_t g_seed = 1;
  std::string g_out, g_preset, g_rigid;
  gen->add_option("--n", g_n, "Number of agents");
  gen->add_option("--dim", g_dim, "Dimension (2 or 3)");
  gen->add_option("--radius", g_radius, "Connection radius");
  gen->add_option("--box", g_box, "Side of the sampling box");
  gen->add_option("--seed", g_seed, "Seed");
  gen->add_option("--preset", g_preset, "Named preset (paperlike13)");
  gen->add_option("--rigid", g_rigid, "Redraw until rigid for this kind (distance|bearing)");
  gen->add_option("--out", g_out, "Output file")->required();

  // analyze
  auto* ana = app.add_subcommand("analyze", "Rigidity and recoverability report (JSON)");
  std::string a_net, a_kind = "distance";
  double a_q = 1.0;
  bool a_max_s = false;
  int a_robust_s = 0;
  double a_tau = 0.0;
  ana->add_option("network", a_net, "Network JSON")->required();
  ana->add_option("--kind", a_kind, "distance|bearing");
  ana->add_option("--q", a_q, "Exponent in (0, 1]");
  ana->add_flag("--max-s", a_max_s, "Certify NSP levels and report the largest");
  ana->add_option("--robust-s", a_robust_s, "Also report robust constants at this order");
  ana->add_option("--tau", a_tau, "Requested tau for robust constants");

  // recover
  auto* rec = app.add_subcommand("recover", "Single recovery on a network");
  std::string r_net, r_scenario, r_trace = "trace.csv";
  int r_trial = 0;
  rec->add_option("network", r_net, "Network JSON")->required();
  rec->add_option("scenario", r_scenario, "Scenario JSON")->required();
  rec->add_option("--trial", r_trial, "Trial index used to draw faults and noise");
  rec->add_option("--trace", r_trace, "Trace CSV path ('-' for stdout)");

  // montecarlo
  auto* mc = app.add_subcommand("montecarlo", "Monte Carlo sweep");
  std::string m_scenario, m_sweep = "fault_count", m_out;
  int m_trials = 0, m_jobs = 1;
  mc->add_option("scenario", m_scenario, "Scenario JSON")->required();
  mc->add_option("--sweep", m_sweep, "fault_count|noise_grid|iterations|correlation");
  mc->add_option("--trials", m_trials, "Trials per sweep point (overrides the scenario)");
  mc->add_option("--jobs", m_jobs, "Worker threads");
  mc->add_option("--out", m_out, "Output directory (else $SPARSELOC_OUT_DIR, else ./results)");

  // oracle
  auto* ora = app.add_subcommand("oracle", "Brute-force cross-checks");
  ora->require_subcommand(1);
  std::string o_net, o_kind = "distance";
  auto* o_spark = ora->add_subcommand("spark", "Block spark of the rigidity matrix");
  int o_cap = 8;
  o_spark->add_option("network", o_net, "Network JSON")->required();
  o_spark->add_option("--kind", o_kind, "distance|bearing");
  o_spark->add_option("--cap", o_cap, "Largest subset size examined");
  auto* o_l0 = ora->add_subcommand("l0", "Plant faults and recover them exhaustively");
  std::string o_faults;
  int o_smax = 2;
  std::uint64_t o_seed = 1;
  o_l0->add_option("network", o_net, "Network JSON")->required();
  o_l0->add_option("--kind", o_kind, "distance|bearing");
  o_l0->add_option("--faults", o_faults, "Comma-separated faulty agents");
  o_l0->add_option("--s-max", o_smax, "Largest support size");
  o_l0->add_option("--seed", o_seed, "Seed for the planted errors");
  auto* o_nsp = ora->add_subcommand("nsp", "Sampled worst NSP ratio");
  int o_s = 1;
  long o_samples = 100000;
  double o_q = 1.0;
  o_nsp->add_option("network", o_net, "Network JSON")->required();
  o_nsp->add_option("--kind", o_kind, "distance|bearing");
  o_nsp->add_option("--s", o_s, "Order");
  o_nsp->add_option("--q", o_q, "Exponent in (0, 1]");
  o_nsp->add_option("--samples", o_samples, "Number of sampled kernel vectors");
  o_nsp->add_option("--seed", o_seed, "Seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      NetworkInstance net;
      if (g_preset == "paperlike13") {
        net = paperlike13(g_seed);
      } else if (!g_preset.empty()) {
        throw Error("unknown preset '" + g_preset + "'");
      } else if (!g_rigid.empty()) {
        NetworkSource src{NetworkSourceKind::generated, g_n, g_dim, g_radius, g_box, g_seed, {}};
        net = build_network(src, parse_measurement_kind(g_rigid));
      } else {
        net = random_geometric_network(g_n, g_dim, g_radius, g_box, g_seed);
      }
      write_network(g_out, net);
      std::cout << "wrote " << g_out << " (" << net.config.num_agents() << " agents, " << net.graph.num_edges()
                << " edges)\n";
    } else if (*ana) {
      const NetworkInstance net = read_network(a_net);
      const MeasurementKind kind = parse_measurement_kind(a_kind);
      const RigidityReport report = rigidity_report(rigidity_matrix(kind, net.config, net.graph));
      const int d = net.config.dim();
      const int s_tilde = kind == MeasurementKind::distance && d == 3 ? max_colinear_count(net.config) : 1;
      json out = {{"agents", net.config.num_agents()},
                  {"edges", net.graph.num_edges()},
                  {"dim", d},
                  {"kind", a_kind},
                  {"rigidity", rigidity_json(report)},
                  {"s_tilde", s_tilde},
                  {"l0_recovery_limit", l0_recovery_limit(net.config.num_agents(), kind, d, s_tilde)}};
      if (a_max_s) {
        const auto levels = certify_levels(net.config, net.graph, kind, a_q);
        auto certs = json::array();
        int best = 0;
        for (const auto& c : levels) {
          certs.push_back(to_json(c));
          if (c.verdict == NspVerdict::holds) best = c.s;
        }
        out["nsp_levels"] = certs;
        out["max_certified_errors"] = best;
      }
      if (a_robust_s > 0) out["robust_constants"] = to_json(robust_constants(net.config, net.graph, kind, a_robust_s, a_tau, a_q));
      std::cout << out.dump(2) << '\n';
    } else if (*rec) {
      const NetworkInstance net = read_network(r_net);
      const ScenarioConfig sc = read_scenario(r_scenario);
      const TrialSetup setup = prepare_trial(sc, net, r_trial);
      const RecoveryResult result =
          scp_recover(Configuration(setup.state.estimates), setup.measurements, net.graph, scp_params_for(sc));
      json out = recovery_json(result);
      out["fault_set"] = setup.state.fault_set;
      out["relative_error"] = relative_error(setup.state.true_error, result.x_star, result.support_threshold);
      std::cout << out.dump(2) << '\n';
      if (r_trace == "-") {
        write_trace_csv(std::cout, result);
      } else {
        std::ofstream f(r_trace);
        if (!f) throw Error("cannot write " + r_trace);
        write_trace_csv(f, result);
      }
    } else if (*mc) {
      const json doc = read_json(m_scenario);
      ScenarioConfig sc = scenario_from_json(doc);
      if (m_trials > 0) sc.trials = m_trials;
      const SweepSpec spec = sweep_from_json(doc, parse_sweep_axis(m_sweep));
      std::string dir = m_out;
      if (dir.empty()) {
        const char* env = std::getenv("SPARSELOC_OUT_DIR");
        dir = env && *env ? env : "results";
      }
      const SweepResult result = monte_carlo_sweep(sc, spec, m_jobs);
      write_sweep(dir, result);
      for (const auto& s : result.summaries) {
        std::cout << "point " << s.point << ": identification " << s.identification_rate << ", mean error "
                  << s.mean_relative_error << " (" << s.defined_trials << "/" << s.trials << " defined)\n";
      }
    } else if (*ora) {
      const NetworkInstance net = read_network(o_net);
      const MeasurementKind kind = parse_measurement_kind(o_kind);
      const RigidityMatrix r = rigidity_matrix(kind, net.config, net.graph);
      if (*o_spark) {
        const auto res = brute_force_block_spark(r.matrix, r.dim, o_cap);
        json out = {{"instances_examined", res.instances_examined}};
        out["spark"] = res.spark ? json(*res.spark) : json(nullptr);
        std::cout << out.dump(2) << '\n';
      } else if (*o_l0) {
        ErrorState state = inject_faults(net.config, parse_indices(o_faults), FaultMode::uncorrelated, o_seed);
        const Eigen::VectorXd z = r.matrix * state.true_error.values();
        const auto res = brute_force_l0_recover(r.matrix, r.dim, z, o_smax);
        std::cout << json{{"planted", state.fault_set},
                          {"support", res.support},
                          {"unique", res.unique},
                          {"instances_examined", res.instances_examined},
                          {"x", block_vector_to_json(BlockVector(r.dim, res.x))}}
                         .dump(2)
                  << '\n';
      } else if (*o_nsp) {
        const auto res = brute_force_nsp(analytic_null_basis(net.config, kind), o_s, o_q, o_samples, o_seed);
        std::cout << json{{"ratio", res.ratio},
                          {"consistent", res.ratio < 1.0},
                          {"worst_subset", res.worst_subset},
                          {"instances_examined", res.instances_examined}}
                         .dump(2)
                  << '\n';
      }
    }
  } catch (const Error& ex) {
    std::cerr << "error: " << ex.what() << '\n';
    return 1;
  }
  return 0;
}
