#include "netres/ew_policy.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

namespace netres {

EwPolicy::EwPolicy(const ActionSpace& space, EwParams params, double budget)
    : space_(space), params_(params), budget_(budget) {
  if (space.size() == 0) throw std::invalid_argument("ew: empty action space");
  if (params.eta <= 0) throw std::invalid_argument("ew: eta must be > 0");
  if (params.lambda < 0) throw std::invalid_argument("ew: lambda must be >= 0");
  const std::size_t n = static_cast<std::size_t>(space.size());
  cum_c0_.assign(n, 0.0);
  cum_penalty_.assign(n, 0.0);
  digamma_.assign(n, 0.0);
  dist_.assign(n, 1.0 / static_cast<double>(n));
}

double EwPolicy::digamma(int action) const {
  if (t_ == 0) throw std::logic_error("ew: digamma undefined before the first observe");
  return digamma_[action];
}

void EwPolicy::observe_row(std::span<const double> c0_row) {
  if (static_cast<int>(c0_row.size()) != space_.size())
    throw std::invalid_argument("ew: row length does not match action space");
  ++t_;
  const double inv_t = 1.0 / static_cast<double>(t_);
  for (int a = 0; a < space_.size(); ++a) {
    cum_c0_[a] += c0_row[a];
    const double dig = std::max(0.0, cum_c0_[a] * inv_t - budget_);
    digamma_[a] = dig;
    cum_penalty_[a] += space_.reservation_costs[a] + params_.lambda * dig;
  }
  refresh_distribution();
}

void EwPolicy::observe(const NetworkConfig& config, const JobRequest& b, C0Cache* cache) {
  if (cache) {
    observe_row(cache->row(b));
    return;
  }
  std::vector<double> row(space_.size());
  for (int a = 0; a < space_.size(); ++a)
    row[a] = solve_transfer(config, space_.actions[a], b).blocking_cost;
  observe_row(row);
}

void EwPolicy::refresh_distribution() {
  // softmax of -eta * cum_penalty, max-subtracted so the largest weight is 1
  double best = cum_penalty_[0];
  for (double p : cum_penalty_) best = std::min(best, p);
  double total = 0;
  for (int a = 0; a < space_.size(); ++a) {
    dist_[a] = std::exp(-params_.eta * (cum_penalty_[a] - best));
    total += dist_[a];
  }
  for (double& p : dist_) p /= total;
}

double EwPolicy::sum_sq() const {
  double s = 0;
  for (double p : dist_) s += p * p;
  return s;
}

EwPolicy::Expected EwPolicy::expected_costs(std::span<const double> c0_row) const {
  if (static_cast<int>(c0_row.size()) != space_.size())
    throw std::invalid_argument("ew: row length does not match action space");
  Expected e;
  for (int a = 0; a < space_.size(); ++a) {
    e.reservation += dist_[a] * space_.reservation_costs[a];
    e.blocking += dist_[a] * c0_row[a];
  }
  return e;
}

double EwPolicy::expected_digamma(std::span<const double> dist) const {
  if (t_ == 0) throw std::logic_error("ew: digamma undefined before the first observe");
  if (static_cast<int>(dist.size()) != space_.size())
    throw std::invalid_argument("ew: distribution length does not match action space");
  double e = 0;
  for (int a = 0; a < space_.size(); ++a) e += dist[a] * digamma_[a];
  return e;
}

void EwPolicy::save_snapshot(std::ostream& out) const {
  out << "netres-ew v1\n";
  out << std::hexfloat;
  out << params_.eta << ' ' << params_.lambda << ' ' << budget_ << ' ' << t_ << ' '
      << space_.size() << '\n';
  for (int a = 0; a < space_.size(); ++a) out << cum_c0_[a] << ' ' << cum_penalty_[a] << '\n';
  out << std::defaultfloat;
}

EwPolicy EwPolicy::load_snapshot(std::istream& in, const ActionSpace& space) {
  std::string tag, version;
  in >> tag >> version;
  if (tag != "netres-ew" || version != "v1")
    throw std::runtime_error("ew snapshot: unrecognized header");
  // hexfloat tokens go through strtod; istream>> cannot parse them portably
  auto next_double = [&in]() {
    std::string tok;
    if (!(in >> tok)) throw std::runtime_error("ew snapshot: truncated state");
    char* end = nullptr;
    double v = std::strtod(tok.c_str(), &end);
    if (end == tok.c_str() || *end != '\0')
      throw std::runtime_error("ew snapshot: bad number '" + tok + "'");
    return v;
  };
  EwParams params;
  params.eta = next_double();
  params.lambda = next_double();
  const double budget = next_double();
  long long t, n;
  in >> t >> n;
  if (!in || n != space.size())
    throw std::runtime_error("ew snapshot: action space mismatch");
  EwPolicy policy(space, params, budget);
  policy.t_ = t;
  for (long long a = 0; a < n; ++a) {
    policy.cum_c0_[a] = next_double();
    policy.cum_penalty_[a] = next_double();
  }
  if (t > 0) {
    const double inv_t = 1.0 / static_cast<double>(t);
    for (long long a = 0; a < n; ++a)
      policy.digamma_[a] = std::max(0.0, policy.cum_c0_[a] * inv_t - budget);
  }
  policy.refresh_distribution();
  return policy;
}

}  // namespace netres
