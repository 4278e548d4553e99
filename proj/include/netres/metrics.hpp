#pragma once

#include <span>
#include <vector>

#include "netres/network.hpp"
#include "netres/transfer.hpp"

namespace netres {

// Best fixed reservation in hindsight: cheapest action whose cumulative
// blocking cost stays within v*t on every prefix of the trace. If no action
// satisfies that, `feasible` is false and the result is the action with the
// smallest worst prefix excess (ties in both cases go to the lowest index).
struct HindsightSolution {
  int action_index = -1;
  double action_cost = 0;   // C(a*), per slot
  bool feasible = false;
  double worst_excess = 0;  // max_t (sum_{s<=t} C_0 - v t) for the chosen action
  std::vector<double> per_prefix_slack;  // v t - sum_{s<=t} C_0, one per slot
};

HindsightSolution hindsight_optimum(const NetworkConfig& config, const ActionSpace& space,
                                    const std::vector<JobRequest>& trace, C0Cache& cache);

// r_t = sum_{s<=t} cost_s - t * benchmark
std::vector<double> regret_series(std::span<const double> per_slot_cost, double benchmark_per_slot);

// kappa = (eta / 8) * (1 + 2 lambda)^2 * theta^2
double penalty_kappa(double eta, double lambda, double theta);

// High-probability bound on the realized reservation-cost regret after T
// slots: kappa T + log(n_actions)/eta + theta sqrt(T/2 * log(1/delta)).
double regret_bound_rhs(double theta, double eta, double lambda, long long n_actions,
                        double delta, long long T);

// Bound on the average expected budget excess after T slots:
// min_feasible_cost/lambda + log(n_actions)/(T lambda eta) + kappa/lambda.
// Throws if lambda == 0.
double constraint_bound_rhs(double theta, double eta, double lambda, long long n_actions,
                            long long T, double min_feasible_cost);

// Euclidean distance between two distributions over the same support.
double distribution_distance(std::span<const double> p, std::span<const double> q);

}  // namespace netres
