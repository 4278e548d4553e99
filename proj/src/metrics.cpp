#include "netres/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace netres {

namespace {
// slack for float accumulation noise on the feasibility boundary
constexpr double kFeasTol = 1e-9;
}  // namespace

HindsightSolution hindsight_optimum(const NetworkConfig& config, const ActionSpace& space,
                                    const std::vector<JobRequest>& trace, C0Cache& cache) {
  if (trace.empty()) throw std::invalid_argument("hindsight: empty trace");
  const int n_actions = space.size();
  std::vector<double> cum(n_actions, 0.0), worst(n_actions, -std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const std::vector<double>& row = cache.row(trace[i]);
    const double vt = config.budget * static_cast<double>(i + 1);
    for (int a = 0; a < n_actions; ++a) {
      cum[a] += row[a];
      worst[a] = std::max(worst[a], cum[a] - vt);
    }
  }

  HindsightSolution sol;
  double best_cost = std::numeric_limits<double>::infinity();
  for (int a = 0; a < n_actions; ++a) {
    if (worst[a] <= kFeasTol && space.reservation_costs[a] < best_cost) {
      best_cost = space.reservation_costs[a];
      sol.action_index = a;
      sol.feasible = true;
    }
  }
  if (!sol.feasible) {
    double least_excess = std::numeric_limits<double>::infinity();
    for (int a = 0; a < n_actions; ++a) {
      if (worst[a] < least_excess) {
        least_excess = worst[a];
        sol.action_index = a;
      }
    }
  }
  sol.action_cost = space.reservation_costs[sol.action_index];
  sol.worst_excess = worst[sol.action_index];

  sol.per_prefix_slack.reserve(trace.size());
  double c = 0;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    c += cache.value(sol.action_index, trace[i]);
    sol.per_prefix_slack.push_back(config.budget * static_cast<double>(i + 1) - c);
  }
  return sol;
}

std::vector<double> regret_series(std::span<const double> per_slot_cost, double benchmark_per_slot) {
  std::vector<double> out;
  out.reserve(per_slot_cost.size());
  double cum = 0;
  for (std::size_t t = 0; t < per_slot_cost.size(); ++t) {
    cum += per_slot_cost[t];
    out.push_back(cum - benchmark_per_slot * static_cast<double>(t + 1));
  }
  return out;
}

double penalty_kappa(double eta, double lambda, double theta) {
  if (eta <= 0 || lambda < 0 || theta < 0)
    throw std::invalid_argument("kappa: need eta > 0, lambda >= 0, theta >= 0");
  const double w = 1.0 + 2.0 * lambda;
  return eta / 8.0 * w * w * theta * theta;
}

double regret_bound_rhs(double theta, double eta, double lambda, long long n_actions,
                        double delta, long long T) {
  if (n_actions < 1 || T < 1) throw std::invalid_argument("regret bound: need actions and T >= 1");
  if (delta <= 0 || delta >= 1) throw std::invalid_argument("regret bound: delta in (0,1)");
  const double kappa = penalty_kappa(eta, lambda, theta);
  return kappa * static_cast<double>(T) + std::log(static_cast<double>(n_actions)) / eta +
         theta * std::sqrt(static_cast<double>(T) / 2.0 * std::log(1.0 / delta));
}

double constraint_bound_rhs(double theta, double eta, double lambda, long long n_actions,
                            long long T, double min_feasible_cost) {
  if (lambda == 0) throw std::invalid_argument("constraint bound: lambda must be nonzero");
  if (n_actions < 1 || T < 1)
    throw std::invalid_argument("constraint bound: need actions and T >= 1");
  const double kappa = penalty_kappa(eta, lambda, theta);
  return min_feasible_cost / lambda +
         std::log(static_cast<double>(n_actions)) / (static_cast<double>(T) * lambda * eta) +
         kappa / lambda;
}

double distribution_distance(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw std::invalid_argument("distance: size mismatch");
  double s = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double d = p[i] - q[i];
    s += d * d;
  }
  return std::sqrt(s);
}

}  // namespace netres
