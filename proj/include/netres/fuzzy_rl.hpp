#pragma once

#include <cstdint>
#include <deque>
#include <span>
#include <vector>

#include "netres/network.hpp"
#include "netres/rng.hpp"
#include "netres/transfer.hpp"

namespace netres {

struct RlParams {
  double alpha = 0.995;    // critic step size
  double epsilon = 0.5;    // per-rule exploration probability
  int history = 100;       // request averaging window
  int back_iters = 50;     // training iterations per slot
  int levels = 0;          // actor output levels; 0 = one per action
  int mfs_per_input = 11;  // triangular membership functions per input
  double lambda = 32;      // blocking-cost weight in the reward
  bool hard_penalty = false;     // replace the reward with a flat penalty on
  double hard_penalty_value = -100;  // budget excess
};

// R = -C(a_prev) - lambda * C_0(a_curr, b_prev)
double rl_reward(const NetworkConfig& config, const Reservation& a_prev,
                 const Reservation& a_curr, const JobRequest& b_prev, double lambda);

// Fuzzy actor-critic baseline. A Takagi-Sugeno system reads the per-server
// request average over the recent window; each fired rule votes for an action
// level, the critic scores (rule, level) pairs, and each slot runs
// `back_iters` perturbed evaluations against the previous slot's request
// before acting greedily.
class FuzzyActorCritic {
 public:
  FuzzyActorCritic(const NetworkConfig& config, const ActionSpace& space, RlParams params,
                   std::uint64_t seed);

  // Trains on the most recent request and returns the action index to play
  // this slot.
  int step(C0Cache* cache = nullptr);
  // Call with the observed request once the slot resolves.
  void push_request(const JobRequest& b);

  std::vector<double> fis_inputs() const;  // current window averages

  struct Fired {
    long long rule = 0;
    double strength = 0;
  };
  // nonzero-strength rules for the given inputs; strengths sum to 1
  std::vector<Fired> fire_rules(std::span<const double> inputs) const;
  // defuzzified actor output: strength-weighted mean of the fired levels
  double flc_output(std::span<const Fired> fired, std::span<const int> omegas) const;
  // nearest-level rounding; out-of-range scalars clamp and are counted
  int map_level_to_action(double scalar);

  double critic(long long rule, int level) const;
  long long n_rules() const { return n_rules_; }
  int n_levels() const { return n_levels_; }
  long long clamp_events() const { return clamp_events_; }
  int prev_action() const { return prev_action_; }

 private:
  double blocking_cost(int action_index, const JobRequest& b, C0Cache* cache) const;
  void critic_update(long long rule, int level, double strength, double reward);

  const NetworkConfig& config_;
  const ActionSpace& space_;
  RlParams params_;
  Rng rng_;
  long long n_rules_ = 0;
  int n_levels_ = 0;
  std::vector<double> critic_;       // n_rules x n_levels, row-major
  std::vector<double> row_max_;      // per-rule critic maximum
  std::vector<int> row_argmax_;      // lowest index attaining it
  std::deque<JobRequest> window_;    // seeded with the all-zero request
  int prev_action_ = 0;              // starts at the floor reservation
  long long clamp_events_ = 0;
};

}  // namespace netres
