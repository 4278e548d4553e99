#pragma once

#include <atomic>
#include <mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "netres/network.hpp"

namespace netres {

// Result of the per-slot job-transfer minimization for one (a, b) pair.
// delta[n][m] is the number of jobs moved from server n to server m.
struct TransferPlan {
  std::vector<int> delta;  // row-major NxN, zero diagonal
  double transfer_cost = 0;
  double violation_cost = 0;
  double blocking_cost = 0;  // = transfer_cost + violation_cost

  int at(int n, int m, int n_servers) const { return delta[static_cast<std::size_t>(n) * n_servers + m]; }
};

struct TransferOptions {
  // Cap total inflow per surplus server at its surplus and total outflow per
  // deficit server at its deficit. Off = only the pairwise caps, which lets
  // several senders overfill one receiver.
  bool aggregate_caps = true;
};

// Exact integer optimum via unit augmentations along cheapest
// marginal-improvement paths in the residual graph. delta = 0 is always
// feasible, so this never fails.
TransferPlan solve_transfer(const NetworkConfig& config, const Reservation& a,
                            const JobRequest& b, TransferOptions opts = {});

inline constexpr int kOracleDeficitCap = 12;

// Independent test oracle: exhaustively enumerates every feasible integer
// delta matrix. Throws if the total deficit exceeds `deficit_cap`.
TransferPlan brute_force_transfer_oracle(const NetworkConfig& config,
                                         const Reservation& a, const JobRequest& b,
                                         TransferOptions opts = {},
                                         int deficit_cap = kOracleDeficitCap);

// Recomputes the objective value of a plan from its delta matrix (debug /
// verification path, independent of the cost fields stored in the plan).
double plan_objective(const NetworkConfig& config, const Reservation& a,
                      const JobRequest& b, const TransferPlan& plan);

// Debug dump: "n,m,delta" triples of the nonzero entries plus the cost split.
std::string plan_csv_rows(const TransferPlan& plan, int n_servers);

// Blocking-cost rows C_0(., b) over the whole action space, keyed by request.
// Requests repeat heavily in the simulated scenarios, so one row solve
// usually serves thousands of slots. Thread-safe; once prefilled, reads are
// lock-free.
class C0Cache {
 public:
  C0Cache(const NetworkConfig& config, const ActionSpace& space,
          TransferOptions opts = {});

  const std::vector<double>& row(const JobRequest& b);
  double value(int action_index, const JobRequest& b);

  // Solves every possible request (b_n in [0, m_n]); afterwards complete()
  // is true and row() never locks.
  void prefill_all(int n_workers = 1);
  bool complete() const { return complete_; }
  long long encode(const JobRequest& b) const;
  std::size_t distinct_requests() const;

  const NetworkConfig& config() const { return config_; }
  const ActionSpace& space() const { return space_; }
  const TransferOptions& options() const { return opts_; }

  // Used by the exhaustive theta sweep to store rows it computed anyway.
  void insert_row(long long key, std::vector<double> row_values);
  void mark_complete() { complete_ = true; }

 private:
  std::vector<double> compute_row(const JobRequest& b) const;

  const NetworkConfig& config_;
  const ActionSpace& space_;
  TransferOptions opts_;
  std::vector<long long> strides_;
  mutable std::mutex mu_;
  std::unordered_map<long long, std::vector<double>> rows_;
  std::atomic<bool> complete_{false};
};

}  // namespace netres
