#include <cstdint>
#include <exception>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "netres/experiment.hpp"
#include "netres/rng.hpp"
#include "netres/scenarios.hpp"

namespace {

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
  std::vector<std::uint64_t> out;
  std::istringstream ss(text);
  for (std::string tok; std::getline(ss, tok, ',');)
    if (!tok.empty()) out.push_back(std::stoull(tok));
  if (out.empty()) throw CLI::ValidationError("--seeds", "expected a,b,c");
  return out;
}

std::vector<std::vector<int>> parse_levels(const std::string& text) {
  std::vector<std::vector<int>> out;
  std::istringstream groups(text);
  for (std::string group; std::getline(groups, group, ';');) {
    std::vector<int> level;
    std::istringstream ss(group);
    for (std::string tok; std::getline(ss, tok, ',');)
      if (!tok.empty()) level.push_back(std::stoi(tok));
    if (!level.empty()) out.push_back(std::move(level));
  }
  if (out.empty()) throw CLI::ValidationError("--levels", "expected n1,n2;n1,n2;...");
  return out;
}

template <typename T>
std::vector<T> parse_int_list(const std::string& text) {
  std::vector<T> out;
  std::istringstream ss(text);
  for (std::string tok; std::getline(ss, tok, ',');)
    if (!tok.empty()) out.push_back(static_cast<T>(std::stoll(tok)));
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Online reservation experiments on a small job-transfer network"};
  app.require_subcommand(1);

  // run
  auto* run = app.add_subcommand("run", "Run configured experiments and write CSV/SVG outputs");
  std::string run_config, run_seeds, run_out, run_algo;
  int run_workers = 0;
  run->add_option("--config", run_config, "experiment config JSON")->required();
  run->add_option("--seeds", run_seeds, "override seed list, e.g. 1,2,3");
  run->add_option("--out", run_out, "override output directory");
  run->add_option("--algo", run_algo, "override algorithm: ew|rl|both");
  run->add_option("--workers", run_workers, "worker threads (default: NETRES_WORKERS or cores)");

  // gen-trace
  auto* gen = app.add_subcommand("gen-trace", "Generate a request trace CSV");
  std::string gen_scenario = "fixed", gen_network, gen_out = "trace.csv";
  std::string gen_levels = "3,5,2;6,2,4;7,6,6", gen_changes = "500,1000";
  std::string gen_choices = "2,3,4,5,6";
  std::uint64_t gen_seed = 0;
  long long gen_horizon = 5000;
  double gen_region_mean = 250;
  int gen_clip = 0;
  bool gen_exp_lengths = false;
  gen->add_option("--scenario", gen_scenario, "fixed|poisson")->check(CLI::IsMember({"fixed", "poisson"}));
  gen->add_option("--network", gen_network, "network config JSON")->required();
  gen->add_option("--seed", gen_seed, "generator seed (poisson)");
  gen->add_option("--horizon", gen_horizon, "number of slots");
  gen->add_option("--out", gen_out, "output CSV path");
  gen->add_option("--levels", gen_levels, "fixed: per-regime levels, e.g. 3,5,2;6,2,4");
  gen->add_option("--change-points", gen_changes, "fixed: last slot of each regime but the final");
  gen->add_option("--region-mean", gen_region_mean, "poisson: expected regime length");
  gen->add_option("--mean-choices", gen_choices, "poisson: integer mean pool");
  gen->add_option("--clip", gen_clip, "poisson: request cap (0 = server capacity)");
  gen->add_flag("--exp-lengths", gen_exp_lengths, "poisson: exponential regime lengths");

  // verify
  auto* verify = app.add_subcommand("verify", "Recompute a run directory and compare outputs");
  std::string verify_dir;
  int verify_workers = 0;
  verify->add_option("--run", verify_dir, "run output directory")->required();
  verify->add_option("--workers", verify_workers, "worker threads");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      netres::ExperimentConfig cfg = netres::ExperimentConfig::from_json_file(run_config);
      if (!run_seeds.empty()) cfg.seeds = parse_seed_list(run_seeds);
      if (!run_out.empty()) cfg.out_dir = run_out;
      if (!run_algo.empty()) {
        if (run_algo != "ew" && run_algo != "rl" && run_algo != "both")
          throw CLI::ValidationError("--algo", "must be ew|rl|both");
        cfg.algo = run_algo;
      }
      netres::ExperimentResult result = netres::run_experiment(cfg, run_workers);
      netres::emit_outputs(result, cfg.out_dir);
      for (const netres::SeedResult& s : result.seeds) {
        std::cout << "seed " << s.seed << ": hindsight a*=" << s.hindsight.action_index
                  << " C(a*)=" << s.hindsight.action_cost
                  << (s.hindsight.feasible ? "" : " INFEASIBLE");
        for (const netres::AlgoRun& r : s.runs)
          std::cout << "  " << r.algo << " avg_regret=" << r.rows.back().avg_regret;
        if (s.regret_cert.applicable && !s.regret_cert.ok)
          std::cout << "  [regret bound flagged]";
        if (s.constraint_cert.applicable && !s.constraint_cert.ok)
          std::cout << "  [constraint bound FAILED]";
        std::cout << '\n';
      }
      std::cout << "outputs written to " << cfg.out_dir << '\n';
      return result.exit_code;
    }
    if (*gen) {
      netres::NetworkConfig network = netres::NetworkConfig::from_json_file(gen_network);
      netres::RequestTrace trace;
      if (gen_scenario == "fixed") {
        trace = netres::gen_piecewise_fixed(network, parse_levels(gen_levels),
                                            parse_int_list<long long>(gen_changes), gen_horizon);
      } else {
        netres::PoissonSceneParams p;
        p.seed = gen_seed;
        p.horizon = gen_horizon;
        p.region_mean = gen_region_mean;
        p.mean_choices = parse_int_list<int>(gen_choices);
        p.clip = gen_clip;
        p.exp_lengths = gen_exp_lengths;
        trace = netres::gen_poisson_regimes(network, p);
      }
      netres::save_trace(trace, gen_out);
      std::cout << "wrote " << trace.horizon << " slots to " << gen_out << '\n';
      return 0;
    }
    return netres::verify_run_dir(verify_dir, verify_workers);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
