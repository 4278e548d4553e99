#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include "netres/network.hpp"
#include "netres/rng.hpp"
#include "netres/transfer.hpp"

namespace netres {

struct EwParams {
  double eta = 0.1;     // learning rate
  double lambda = 1.0;  // constraint pressure weight
};

// Exponentially weighted reservation policy with a long-term budget
// constraint. After t observed slots the weight of action a is
//   exp(-eta * sum_{s<=t} (C(a) + lambda * F(s, a)))
// where F(s, a) = [avg_{r<=s} C_0(a, B^r) - v]+ is the running budget excess.
// All exponent arithmetic is log-domain with max subtraction.
class EwPolicy {
 public:
  EwPolicy(const ActionSpace& space, EwParams params, double budget);

  long long t() const { return t_; }
  const EwParams& params() const { return params_; }
  double budget() const { return budget_; }

  // P^{t+1}, the distribution the next action is drawn from (uniform at t=0)
  const std::vector<double>& distribution() const { return dist_; }
  double sum_sq() const;  // sum_a P(a)^2, for L2 distance to a point mass

  // F(t, a); throws std::logic_error before the first observe
  double digamma(int action) const;

  // Feeds the slot-t request via its blocking-cost row C_0(., B^t) over the
  // whole action space and advances the weights.
  void observe_row(std::span<const double> c0_row);
  void observe(const NetworkConfig& config, const JobRequest& b, C0Cache* cache = nullptr);

  int sample_action(Rng& rng) const { return rng.sample_discrete(dist_); }

  struct Expected {
    double reservation = 0;
    double blocking = 0;
  };
  // expectations of C and C_0(., b) under the current distribution; call
  // before observe_row(c0_row) to pair P^t with slot t costs
  Expected expected_costs(std::span<const double> c0_row) const;

  // dot of a caller-saved distribution with the current digamma values;
  // pairing P^t (saved before observe) with F(t, .) (available after)
  double expected_digamma(std::span<const double> dist) const;

  // cumulative per-action state, exposed for recursion-vs-batch checks
  double cum_penalty(int action) const { return cum_penalty_[action]; }
  double cum_constraint(int action) const { return cum_c0_[action]; }

  // versioned text snapshot (hexfloat, bit-exact resume)
  void save_snapshot(std::ostream& out) const;
  static EwPolicy load_snapshot(std::istream& in, const ActionSpace& space);

 private:
  void refresh_distribution();

  const ActionSpace& space_;
  EwParams params_;
  double budget_;
  long long t_ = 0;
  std::vector<double> cum_c0_;       // sum_r C_0(a, B^r)
  std::vector<double> cum_penalty_;  // sum_s (C(a) + lambda F(s, a))
  std::vector<double> digamma_;      // F(t, .)
  std::vector<double> dist_;
};

}  // namespace netres
