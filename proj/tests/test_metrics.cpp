#include <doctest.h>

#include <netres/metrics.hpp>
#include <netres/network.hpp>
#include <netres/transfer.hpp>

#include <cmath>
#include <stdexcept>
#include <vector>

namespace {

netres::NetworkConfig bench3() {
  netres::NetworkConfig cfg;
  cfg.capacities = {10, 10, 10};
  cfg.reservation_floor = 1;
  cfg.reserve_coeff = {0.05, 0.05, 0.05};
  cfg.violation_coeff = {0.05, 0.05, 0.05};
  cfg.transfer_coeff = {0.0,  0.02, 0.03,
                        0.02, 0.0,  0.02,
                        0.03, 0.02, 0.0};
  cfg.budget = 0.1;
  return cfg;
}

netres::NetworkConfig one_server(int cap, double budget) {
  netres::NetworkConfig cfg;
  cfg.capacities = {cap};
  cfg.reservation_floor = 1;
  cfg.reserve_coeff = {0.05};
  cfg.violation_coeff = {0.05};
  cfg.transfer_coeff = {0.0};
  cfg.budget = budget;
  return cfg;
}

}  // namespace

TEST_SUITE("metrics") {

TEST_CASE("hindsight picks cheapest feasible action") {
  // Single server, capacity 3: actions (1),(2),(3) with C = 0.05,0.2,0.45.
  // A constant request of 2 gives C_0 = 0.05,0,0 per slot. With v = 0.1
  // the average for action (1) is 0.05 <= v on every prefix, so the
  // cheapest action is feasible and must win despite nonzero blocking.
  auto cfg = one_server(3, 0.1);
  auto space = netres::enumerate_actions(cfg);
  netres::C0Cache cache(cfg, space, {});
  std::vector<netres::JobRequest> trace(20, netres::JobRequest{{2}});
  auto sol = netres::hindsight_optimum(cfg, space, trace, cache);
  CHECK(sol.feasible);
  CHECK(sol.action_index == 0);
  CHECK(sol.action_cost == doctest::Approx(0.05));
  REQUIRE(sol.per_prefix_slack.size() == 20);
  // Slack at t is v t - t * 0.05 = 0.05 t.
  CHECK(sol.per_prefix_slack[0] == doctest::Approx(0.05));
  CHECK(sol.per_prefix_slack[19] == doctest::Approx(1.0));
  CHECK(sol.worst_excess <= 0.0);
}

TEST_CASE("hindsight moves up when the cheap action violates") {
  // Same single server but v = 0.04: action (1) now averages 0.05 > v and
  // is infeasible on every prefix; action (2) blocks nothing and wins.
  auto cfg = one_server(3, 0.04);
  auto space = netres::enumerate_actions(cfg);
  netres::C0Cache cache(cfg, space, {});
  std::vector<netres::JobRequest> trace(20, netres::JobRequest{{2}});
  auto sol = netres::hindsight_optimum(cfg, space, trace, cache);
  CHECK(sol.feasible);
  CHECK(sol.action_index == 1);
  CHECK(sol.action_cost == doctest::Approx(0.2));
}

TEST_CASE("hindsight respects prefixes not just the total") {
  // Front-loaded blocking: early slots demand 3, later slots demand 0.
  // For action (1): C_0 = 0.2 on the first 10 slots, 0 after; the overall
  // average at T=40 is 0.05 <= v=0.1 but the prefix at t=10 averages 0.2,
  // so action (1) must be rejected under the anytime constraint.
  auto cfg = one_server(3, 0.1);
  auto space = netres::enumerate_actions(cfg);
  netres::C0Cache cache(cfg, space, {});
  std::vector<netres::JobRequest> trace;
  for (int t = 0; t < 10; ++t) trace.push_back(netres::JobRequest{{3}});
  for (int t = 0; t < 30; ++t) trace.push_back(netres::JobRequest{{0}});
  auto sol = netres::hindsight_optimum(cfg, space, trace, cache);
  CHECK(sol.feasible);
  CHECK(sol.action_index > 0);
}

TEST_CASE("saturated trace admits the boundary action") {
  auto cfg = bench3();
  auto space = netres::enumerate_actions(cfg);
  netres::C0Cache cache(cfg, space, {});
  // Every server saturated every slot. No transfers are possible, so an
  // action with two one-job deficits costs exactly 2 * 0.05 = v per slot
  // and sits right on the budget boundary. That beats full reservation.
  std::vector<netres::JobRequest> trace(5, netres::JobRequest{{10, 10, 10}});
  auto sol = netres::hindsight_optimum(cfg, space, trace, cache);
  CHECK(sol.feasible);
  CHECK(sol.action_index == space.index_of(netres::Reservation{{9, 9, 10}}, cfg));
  CHECK(sol.action_cost == doctest::Approx(0.05 * (81 + 81 + 100)));
  CHECK(sol.worst_excess <= 1e-12);
}

TEST_CASE("zero budget is still feasible via full reservation") {
  // Full reservation never blocks, so a feasible action exists for every
  // valid budget, even v = 0.
  auto cfg = one_server(2, 0.0);
  auto space = netres::enumerate_actions(cfg);
  netres::C0Cache cache(cfg, space, {});
  std::vector<netres::JobRequest> trace = {netres::JobRequest{{2}},
                                           netres::JobRequest{{1}},
                                           netres::JobRequest{{2}}};
  auto sol = netres::hindsight_optimum(cfg, space, trace, cache);
  CHECK(sol.feasible);
  CHECK(sol.action_index == 1);
  CHECK(sol.action_cost == doctest::Approx(0.2));
}

TEST_CASE("cost ties break to the lowest index") {
  auto cfg = one_server(2, 0.1);
  cfg.reserve_coeff = {0.0};  // both actions now cost 0 to reserve
  auto space = netres::enumerate_actions(cfg);
  netres::C0Cache cache(cfg, space, {});
  std::vector<netres::JobRequest> trace(5, netres::JobRequest{{0}});
  auto sol = netres::hindsight_optimum(cfg, space, trace, cache);
  CHECK(sol.feasible);
  CHECK(sol.action_index == 0);
  CHECK(sol.action_cost == 0.0);
}

TEST_CASE("regret series") {
  std::vector<double> costs = {1.0, 2.0, 3.0};
  auto r = netres::regret_series(costs, 1.5);
  REQUIRE(r.size() == 3);
  CHECK(r[0] == doctest::Approx(-0.5));
  CHECK(r[1] == doctest::Approx(0.0));
  CHECK(r[2] == doctest::Approx(1.5));
}

TEST_CASE("penalty curvature constant") {
  // (eta/8)(1+2 lambda)^2 theta^2 at eta=0.1, lambda=1, theta=1.
  CHECK(netres::penalty_kappa(0.1, 1.0, 1.0) == doctest::Approx(0.1125));
  CHECK(netres::penalty_kappa(0.4, 0.0, 2.0) == doctest::Approx(0.2));
  CHECK_THROWS_AS(netres::penalty_kappa(0.0, 5.0, 3.0), std::invalid_argument);
}

TEST_CASE("regret bound arithmetic") {
  // theta=1, eta=1, lambda=0, |A|=3, T=4, delta=e^-2:
  // kappa T = (1/8)*4 = 0.5; log|A|/eta = log 3; sqrt(4/2 * 2) = 2.
  double rhs = netres::regret_bound_rhs(1.0, 1.0, 0.0, 3, std::exp(-2.0), 4);
  CHECK(rhs == doctest::Approx(0.5 + std::log(3.0) + 2.0));

  CHECK_THROWS_AS(netres::regret_bound_rhs(1.0, 1.0, 0.0, 3, 1.0, 4),
                  std::invalid_argument);

  // Benchmark-scale plug-in: theta=15, eta=1/sqrt(5000), lambda=32,
  // |A|=1000, delta=0.05, T=5000.
  double eta = 1.0 / std::sqrt(5000.0);
  double kappa = netres::penalty_kappa(eta, 32.0, 15.0);
  double big = netres::regret_bound_rhs(15.0, eta, 32.0, 1000, 0.05, 5000);
  double expect = kappa * 5000.0 + std::log(1000.0) / eta +
                  15.0 * std::sqrt(0.5 * std::log(20.0) * 5000.0);
  CHECK(big == doctest::Approx(expect));
  CHECK(big > 8.0e6);  // the finite-T guarantee is loose at this scale
  CHECK(big < 9.0e6);
}

TEST_CASE("constraint bound arithmetic and vanishing limit") {
  CHECK_THROWS_AS(netres::constraint_bound_rhs(1.0, 0.1, 0.0, 10, 100, 1.0),
                  std::invalid_argument);

  // theta=15, T=5000, eta=1/sqrt(T), lambda=32, |A|=1000, C(a*)=0.6.
  double eta = 1.0 / std::sqrt(5000.0);
  double kappa = netres::penalty_kappa(eta, 32.0, 15.0);
  double rhs = netres::constraint_bound_rhs(15.0, eta, 32.0, 1000, 5000, 0.6);
  double expect = 0.6 / 32.0 + std::log(1000.0) / (5000.0 * 32.0 * eta) +
                  kappa / 32.0;
  CHECK(rhs == doctest::Approx(expect));
  CHECK(rhs < 53.0);

  // With lambda = T^(1/5) and eta = 1/sqrt(T) the bound vanishes as T
  // grows; check monotone decay over three decades.
  auto bound_at = [](double T) {
    double lam = std::pow(T, 0.2);
    double e = 1.0 / std::sqrt(T);
    return netres::constraint_bound_rhs(15.0, e, lam, 1000,
                                        static_cast<long long>(T), 0.6);
  };
  double b3 = bound_at(1e3), b5 = bound_at(1e5), b7 = bound_at(1e7);
  CHECK(b5 < b3);
  CHECK(b7 < b5);
  CHECK(b7 < 0.25 * b3);
}

TEST_CASE("distribution distance") {
  std::vector<double> p = {0.5, 0.5};
  std::vector<double> q = {0.5, 0.5};
  CHECK(netres::distribution_distance(p, q) == 0.0);

  std::vector<double> e1 = {1.0, 0.0};
  std::vector<double> e2 = {0.0, 1.0};
  CHECK(netres::distribution_distance(e1, e2) == doctest::Approx(std::sqrt(2.0)));

  std::vector<double> u4 = {0.25, 0.25, 0.25, 0.25};
  std::vector<double> m4 = {1.0, 0.0, 0.0, 0.0};
  CHECK(netres::distribution_distance(u4, m4) ==
        doctest::Approx(std::sqrt(12.0 / 16.0)));
}

}  // TEST_SUITE
