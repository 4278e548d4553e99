#include "netres/fuzzy_rl.hpp"

#include <algorithm>
#include <array>
#include <cassert>
#include <cmath>
#include <stdexcept>

namespace netres {

double rl_reward(const NetworkConfig& config, const Reservation& a_prev,
                 const Reservation& a_curr, const JobRequest& b_prev, double lambda) {
  const double c0 = solve_transfer(config, a_curr, b_prev).blocking_cost;
  return -reservation_cost(config, a_prev) - lambda * c0;
}

FuzzyActorCritic::FuzzyActorCritic(const NetworkConfig& config, const ActionSpace& space,
                                   RlParams params, std::uint64_t seed)
    : config_(config), space_(space), params_(params), rng_(seed) {
  if (space.size() == 0) throw std::invalid_argument("rl: empty action space");
  if (params.mfs_per_input < 2) throw std::invalid_argument("rl: need at least 2 MFs per input");
  if (params.history < 1) throw std::invalid_argument("rl: history must be >= 1");
  if (params.back_iters < 0) throw std::invalid_argument("rl: negative back iterations");
  if (params.epsilon < 0 || params.epsilon > 1) throw std::invalid_argument("rl: epsilon in [0,1]");
  if (params.alpha <= 0 || params.alpha > 1) throw std::invalid_argument("rl: alpha in (0,1]");

  n_levels_ = params.levels > 0 ? params.levels : space.size();
  n_rules_ = 1;
  for (int g = 0; g < config.n_servers(); ++g) {
    n_rules_ *= params.mfs_per_input;
    if (n_rules_ * n_levels_ > 100'000'000)
      throw std::invalid_argument("rl: critic table too large (rules x levels > 1e8)");
  }

  // critic ~ N(0,1), row-major draw order; actor caches follow from it
  critic_.resize(static_cast<std::size_t>(n_rules_) * n_levels_);
  for (double& z : critic_) z = rng_.normal();
  row_max_.resize(n_rules_);
  row_argmax_.resize(n_rules_);
  for (long long r = 0; r < n_rules_; ++r) {
    const double* row = critic_.data() + r * n_levels_;
    int best = 0;
    for (int k = 1; k < n_levels_; ++k)
      if (row[k] > row[best]) best = k;
    row_max_[r] = row[best];
    row_argmax_[r] = best;
  }

  JobRequest zero;
  zero.amounts.assign(config.n_servers(), 0);
  window_.push_back(std::move(zero));
}

std::vector<double> FuzzyActorCritic::fis_inputs() const {
  if (window_.empty()) throw std::logic_error("rl: empty request window");
  const int N = config_.n_servers();
  std::vector<double> means(N, 0.0);
  for (const JobRequest& b : window_)
    for (int n = 0; n < N; ++n) means[n] += b.amounts[n];
  for (double& m : means) m /= static_cast<double>(window_.size());
  return means;
}

std::vector<FuzzyActorCritic::Fired> FuzzyActorCritic::fire_rules(
    std::span<const double> inputs) const {
  const int N = config_.n_servers();
  if (static_cast<int>(inputs.size()) != N)
    throw std::invalid_argument("rl: input length does not match server count");
  const int mfs = params_.mfs_per_input;

  // per input: the one or two adjacent MFs a value activates
  struct Hit {
    int mf;
    double w;
  };
  std::vector<std::array<Hit, 2>> hits(N);
  std::vector<int> n_hits(N);
  for (int g = 0; g < N; ++g) {
    const double cap = static_cast<double>(config_.capacities[g]);
    const double x = inputs[g];
    if (x < 0 || x > cap) throw std::invalid_argument("rl: input outside [0, capacity]");
    if (cap == 0) {
      hits[g][0] = {0, 1.0};
      n_hits[g] = 1;
      continue;
    }
    const double pos = x / cap * (mfs - 1);
    int j = static_cast<int>(pos);
    if (j >= mfs - 1) {
      hits[g][0] = {mfs - 1, 1.0};
      n_hits[g] = 1;
    } else {
      const double frac = pos - j;
      if (frac == 0) {
        hits[g][0] = {j, 1.0};
        n_hits[g] = 1;
      } else {
        hits[g][0] = {j, 1.0 - frac};
        hits[g][1] = {j + 1, frac};
        n_hits[g] = 2;
      }
    }
  }

  std::vector<Fired> fired;
  fired.reserve(1u << N);
  std::vector<int> pick(N, 0);
  while (true) {
    long long rule = 0;
    double strength = 1.0;
    for (int g = 0; g < N; ++g) {
      const Hit& h = hits[g][pick[g]];
      rule = rule * mfs + h.mf;
      strength *= h.w;
    }
    fired.push_back({rule, strength});
    int g = N - 1;
    while (g >= 0 && pick[g] == n_hits[g] - 1) pick[g--] = 0;
    if (g < 0) break;
    ++pick[g];
  }
  return fired;
}

double FuzzyActorCritic::flc_output(std::span<const Fired> fired,
                                    std::span<const int> omegas) const {
  if (fired.empty() || fired.size() != omegas.size())
    throw std::invalid_argument("rl: fired rules and consequents must align");
  double total = 0, acc = 0;
  for (std::size_t i = 0; i < fired.size(); ++i) {
    assert(fired[i].strength >= 0);
    total += fired[i].strength;
    acc += fired[i].strength * omegas[i];
  }
  assert(total > 0 && "triangular partition always fires some rule");
  return acc / total;
}

int FuzzyActorCritic::map_level_to_action(double scalar) {
  long long level = std::llround(scalar);
  if (level < 0) {
    level = 0;
    ++clamp_events_;
  } else if (level >= n_levels_) {
    level = n_levels_ - 1;
    ++clamp_events_;
  }
  if (n_levels_ == space_.size()) return static_cast<int>(level);
  // quantized output set smaller than the action list: spread levels evenly
  return static_cast<int>(std::llround(static_cast<double>(level) * (space_.size() - 1) /
                                       static_cast<double>(n_levels_ - 1)));
}

double FuzzyActorCritic::critic(long long rule, int level) const {
  return critic_[static_cast<std::size_t>(rule) * n_levels_ + level];
}

double FuzzyActorCritic::blocking_cost(int action_index, const JobRequest& b,
                                       C0Cache* cache) const {
  if (cache) return cache->value(action_index, b);
  return solve_transfer(config_, space_.actions[action_index], b).blocking_cost;
}

void FuzzyActorCritic::critic_update(long long rule, int level, double strength, double reward) {
  double& z = critic_[static_cast<std::size_t>(rule) * n_levels_ + level];
  z += params_.alpha * strength * (reward - z);
  if (z > row_max_[rule]) {
    row_max_[rule] = z;
    row_argmax_[rule] = level;
  } else if (z == row_max_[rule]) {
    row_argmax_[rule] = std::min(row_argmax_[rule], level);
  } else if (level == row_argmax_[rule]) {
    // the cached maximum just dropped; rescan the row
    const double* row = critic_.data() + rule * n_levels_;
    int best = 0;
    for (int k = 1; k < n_levels_; ++k)
      if (row[k] > row[best]) best = k;
    row_max_[rule] = row[best];
    row_argmax_[rule] = best;
  }
}

int FuzzyActorCritic::step(C0Cache* cache) {
  const std::vector<double> inputs = fis_inputs();
  const std::vector<Fired> fired = fire_rules(inputs);
  const JobRequest& b_prev = window_.back();
  const double c_prev = space_.reservation_costs[prev_action_];

  std::vector<int> omegas(fired.size());
  for (int iter = 0; iter < params_.back_iters; ++iter) {
    // greedy consequents, each replaced with probability epsilon
    for (std::size_t i = 0; i < fired.size(); ++i) {
      omegas[i] = row_argmax_[fired[i].rule];
      if (rng_.uniform() < params_.epsilon) omegas[i] = rng_.uniform_int(0, n_levels_ - 1);
    }
    const int cand = map_level_to_action(flc_output(fired, omegas));
    const double c0 = blocking_cost(cand, b_prev, cache);
    const double reward = (params_.hard_penalty && c0 >= config_.budget)
                              ? params_.hard_penalty_value
                              : -c_prev - params_.lambda * c0;
    for (std::size_t i = 0; i < fired.size(); ++i)
      critic_update(fired[i].rule, omegas[i], fired[i].strength, reward);
  }

  for (std::size_t i = 0; i < fired.size(); ++i) omegas[i] = row_argmax_[fired[i].rule];
  prev_action_ = map_level_to_action(flc_output(fired, omegas));
  return prev_action_;
}

void FuzzyActorCritic::push_request(const JobRequest& b) {
  if (static_cast<int>(b.amounts.size()) != config_.n_servers())
    throw std::invalid_argument("rl: request length does not match server count");
  window_.push_back(b);
  while (static_cast<int>(window_.size()) > params_.history) window_.pop_front();
}

}  // namespace netres
