#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace netres {

// Problem instance: N servers with capacities m_n, a discrete reservation
// range [floor, m_n] per server, quadratic cost coefficients, and the
// long-term blocking-cost budget v. Immutable once validated.
struct NetworkConfig {
  std::vector<int> capacities;          // m_n, one per server
  int reservation_floor = 1;            // lowest reservable amount per server
  std::vector<double> reserve_coeff;    // reservation cost = coeff * x^2
  std::vector<double> violation_coeff;  // violation cost   = coeff * x^2
  std::vector<double> transfer_coeff;   // k[n][m], row-major NxN, zero diagonal
  double budget = 0.0;                  // v

  int n_servers() const { return static_cast<int>(capacities.size()); }
  double transfer_k(int n, int m) const {
    return transfer_coeff[static_cast<std::size_t>(n) * capacities.size() + m];
  }

  // throws std::invalid_argument on any violated invariant
  void validate() const;

  static NetworkConfig from_json_file(const std::string& path);
  static NetworkConfig from_json_text(const std::string& text);
  std::string to_json_text() const;
};

struct Reservation {
  std::vector<int> amounts;  // length N, each in [floor, m_n]
  bool operator==(const Reservation&) const = default;
};

struct JobRequest {
  std::vector<int> amounts;  // length N, each in [0, m_n]
  bool operator==(const JobRequest&) const = default;
};

// All reservations in lexicographic order with precomputed costs.
struct ActionSpace {
  std::vector<Reservation> actions;
  std::vector<double> reservation_costs;

  int size() const { return static_cast<int>(actions.size()); }
  // inverse of the enumeration order; O(N) mixed-radix decode
  int index_of(const Reservation& a, const NetworkConfig& config) const;
};

inline constexpr long long kDefaultActionCap = 1'000'000;

// Enumerates prod_n (m_n - floor + 1) reservations in lexicographic order.
// Throws if the count would exceed `cap` (instance too large for a tabular
// policy).
ActionSpace enumerate_actions(const NetworkConfig& config,
                              long long cap = kDefaultActionCap);

// C(a) = sum_n reserve_coeff[n] * a_n^2
double reservation_cost(const NetworkConfig& config, const Reservation& a);

enum class ThetaMode { kAuto, kExhaustive, kCorner };

// Uniform bound on |C|, |C_T|, |C_V|. Exhaustive mode scans every (a, b)
// pair through the transfer solver and is exact; corner mode only probes
// b = capacities and b = floor and is a flagged heuristic that bound
// certificates must refuse.
struct ThetaBound {
  double value = 0;
  bool heuristic = false;
};

class C0Cache;  // transfer.hpp

inline constexpr long long kThetaExhaustivePairCap = 10'000'000;

// If `fill` is non-null and the sweep is exhaustive, the cache is populated
// with the blocking-cost row of every possible request as a side effect.
ThetaBound cost_bound_theta(const NetworkConfig& config, const ActionSpace& space,
                            ThetaMode mode = ThetaMode::kAuto, int n_workers = 1,
                            C0Cache* fill = nullptr);

}  // namespace netres
