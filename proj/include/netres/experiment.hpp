#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "netres/fuzzy_rl.hpp"
#include "netres/metrics.hpp"
#include "netres/network.hpp"
#include "netres/scenarios.hpp"
#include "netres/transfer.hpp"

namespace netres {

struct ScenarioSpec {
  std::string kind = "piecewise";  // piecewise | poisson | trace
  // piecewise
  // Final regime exceeds the pointwise max of the first two on every server
  // so the t=1000 switch forces genuine re-adaptation.
  std::vector<std::vector<int>> levels = {{3, 5, 2}, {6, 2, 4}, {7, 6, 6}};
  std::vector<long long> change_points = {500, 1000};
  // poisson
  double region_mean = 250;
  std::vector<int> mean_choices = {2, 3, 4, 5, 6};
  bool exp_lengths = false;
  // set: every master seed replays the same trace (paired runs); unset: the
  // trace seed is derived per master seed
  std::optional<std::uint64_t> seed;
  // trace
  std::string trace_path;
};

struct ExperimentConfig {
  NetworkConfig network;
  ScenarioSpec scenario;
  long long horizon = 5000;
  std::string algo = "ew";  // ew | rl | both
  std::vector<std::uint64_t> seeds = {1};
  double lambda = 32;
  double eta = 0;      // 0 resolves to 1/sqrt(horizon)
  double delta = 0.05;  // regret bound confidence parameter
  RlParams rl;          // rl.lambda follows `lambda` unless set explicitly
  bool aggregate_caps = true;
  bool dump_distributions = false;
  std::string out_dir = "out";

  double resolved_eta() const;
  static ExperimentConfig from_json_file(const std::string& path);
  static ExperimentConfig from_json_text(const std::string& text);
  std::string to_json_text() const;
};

// One emitted CSV row ("t,action_index,reservation_cost,...").
struct SlotRecord {
  long long t = 0;
  int action_index = 0;
  double reservation_cost = 0;
  double blocking_cost = 0;
  double expected_reservation_cost = 0;  // realized values again for rl
  double expected_blocking_cost = 0;
  double realized_regret = 0;  // cumulative, against the hindsight optimum
  double expected_regret = 0;
  double avg_regret = 0;  // realized_regret / t
  // ew: running average of E_{P^s}[F(s, .)]; rl: running positive part of
  // the realized budget excess
  double avg_expected_digamma = 0;
  double dist_l2 = 0;  // ||P^t - P^{t-1}||_2 between consecutive action distributions
};

struct AlgoRun {
  std::string algo;
  std::vector<SlotRecord> rows;
  double total_reservation = 0;
  double total_blocking = 0;
  long long clamp_events = 0;                       // rl only
  std::vector<std::vector<double>> distributions;  // ew, dump_distributions only
};

// lhs <= rhs check of an analytic bound; only applicable with an exact theta
// and a feasible hindsight problem
struct BoundCertificate {
  bool applicable = false;
  double lhs = 0;
  double rhs = 0;
  bool ok = false;
};

struct SeedResult {
  std::uint64_t seed = 0;
  RequestTrace trace;
  HindsightSolution hindsight;
  std::vector<AlgoRun> runs;
  BoundCertificate regret_cert;      // realized ew regret vs its bound
  BoundCertificate constraint_cert;  // final avg expected digamma vs its bound
};

struct ExperimentResult {
  ExperimentConfig config;  // resolved
  ThetaBound theta;
  double kappa = 0;
  std::vector<SeedResult> seeds;
  // 0 ok; 2 = hindsight infeasible on some seed; 3 = a bound certificate
  // failed (2 wins when both apply)
  int exit_code = 0;
};

// Runs every seed (fanned out over worker threads; `n_workers` 0 = env
// NETRES_WORKERS, else hardware concurrency). A caller-owned cache/theta for
// the same network can be shared across calls.
ExperimentResult run_experiment(const ExperimentConfig& config, int n_workers = 0,
                                C0Cache* shared_cache = nullptr,
                                const ThetaBound* shared_theta = nullptr);

// Writes <out_dir>/seed_<s>/{config.json,trace.csv,<algo>.csv,summary.csv,*.svg}.
void emit_outputs(const ExperimentResult& result, const std::string& out_dir);

// Re-runs every seed_* subdirectory from its config.json and byte-compares
// the regenerated CSVs against disk. 0 = reproduced, 1 = mismatch or error.
int verify_run_dir(const std::string& dir, int n_workers = 0);

int worker_count(int requested);

std::string slot_csv_text(const std::vector<SlotRecord>& rows);
std::string summary_csv_text(const ExperimentResult& result, const SeedResult& seed);

}  // namespace netres
