#include <doctest.h>

#include <netres/ew_policy.hpp>
#include <netres/network.hpp>
#include <netres/rng.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace {

netres::NetworkConfig one_server(int cap) {
  netres::NetworkConfig cfg;
  cfg.capacities = {cap};
  cfg.reservation_floor = 1;
  cfg.reserve_coeff = {0.05};
  cfg.violation_coeff = {0.05};
  cfg.transfer_coeff = {0.0};
  cfg.budget = 0.1;
  return cfg;
}

netres::NetworkConfig two_server_grid() {
  netres::NetworkConfig cfg;
  cfg.capacities = {3, 4};
  cfg.reservation_floor = 1;
  cfg.reserve_coeff = {0.05, 0.05};
  cfg.violation_coeff = {0.05, 0.05};
  cfg.transfer_coeff = {0.0, 0.02, 0.02, 0.0};
  cfg.budget = 0.1;
  return cfg;
}

// From-scratch recompute of the weight vector after the given rows.
std::vector<double> batch_distribution(const netres::ActionSpace& space,
                                       const netres::EwParams& p, double v,
                                       const std::vector<std::vector<double>>& rows) {
  const std::size_t n = space.actions.size();
  std::vector<double> pen(n, 0.0);
  for (std::size_t a = 0; a < n; ++a) {
    double cum = 0.0;
    for (std::size_t s = 0; s < rows.size(); ++s) {
      cum += rows[s][a];
      double dig = std::max(0.0, cum / static_cast<double>(s + 1) - v);
      pen[a] += space.reservation_costs[a] + p.lambda * dig;
    }
  }
  double lo = *std::min_element(pen.begin(), pen.end());
  std::vector<double> w(n);
  double z = 0.0;
  for (std::size_t a = 0; a < n; ++a) {
    w[a] = std::exp(-p.eta * (pen[a] - lo));
    z += w[a];
  }
  for (double& x : w) x /= z;
  return w;
}

}  // namespace

TEST_SUITE("ew_policy") {

TEST_CASE("starts uniform") {
  auto cfg = one_server(2);
  auto space = netres::enumerate_actions(cfg);
  netres::EwPolicy pol(space, {1.0, 1.0}, cfg.budget);
  CHECK(pol.t() == 0);
  REQUIRE(pol.distribution().size() == 2);
  CHECK(pol.distribution()[0] == doctest::Approx(0.5));
  CHECK(pol.distribution()[1] == doctest::Approx(0.5));
  CHECK(pol.sum_sq() == doctest::Approx(0.5));
  CHECK_THROWS_AS(pol.digamma(0), std::logic_error);
}

TEST_CASE("one step by hand") {
  auto cfg = one_server(2);
  auto space = netres::enumerate_actions(cfg);
  // C = (0.05, 0.2) for actions (1) and (2).
  netres::EwPolicy pol(space, {1.0, 1.0}, cfg.budget);

  std::vector<double> row = {0.3, 0.0};
  auto exp_costs = pol.expected_costs(row);
  CHECK(exp_costs.reservation == doctest::Approx(0.125));
  CHECK(exp_costs.blocking == doctest::Approx(0.15));

  std::vector<double> before = pol.distribution();
  pol.observe_row(row);
  CHECK(pol.t() == 1);

  // Running excess after one slot: (0.3 - 0.1)+ and (0.0 - 0.1)+.
  CHECK(pol.digamma(0) == doctest::Approx(0.2));
  CHECK(pol.digamma(1) == doctest::Approx(0.0));
  CHECK(pol.expected_digamma(before) == doctest::Approx(0.1));

  // Penalties 0.05+0.2 and 0.2+0.0; weights e^-0.25, e^-0.2.
  CHECK(pol.cum_penalty(0) == doctest::Approx(0.25));
  CHECK(pol.cum_penalty(1) == doctest::Approx(0.2));
  double p0 = 1.0 / (1.0 + std::exp(0.05));
  CHECK(pol.distribution()[0] == doctest::Approx(p0));
  CHECK(pol.distribution()[1] == doctest::Approx(1.0 - p0));
}

TEST_CASE("incremental matches from-scratch recompute") {
  auto cfg = two_server_grid();
  auto space = netres::enumerate_actions(cfg);
  REQUIRE(space.size() == 12);
  netres::EwParams params{0.3, 2.0};
  netres::EwPolicy pol(space, params, cfg.budget);

  netres::Rng rng(4242u);
  std::vector<std::vector<double>> rows;
  for (int t = 0; t < 40; ++t) {
    std::vector<double> row(space.actions.size());
    for (double& x : row) x = rng.uniform() * 0.5;
    rows.push_back(row);
    pol.observe_row(row);

    auto want = batch_distribution(space, params, cfg.budget, rows);
    const auto& got = pol.distribution();
    for (std::size_t a = 0; a < want.size(); ++a) {
      CHECK(std::abs(got[a] - want[a]) <= 1e-9);
    }
  }
  CHECK(pol.t() == 40);

  // Cumulative accessors agree with direct sums.
  for (int a = 0; a < space.size(); ++a) {
    double cum = 0.0;
    for (const auto& r : rows) cum += r[static_cast<std::size_t>(a)];
    CHECK(pol.cum_constraint(a) == doctest::Approx(cum));
  }
}

TEST_CASE("distribution invariant under uniform penalty shifts") {
  auto cfg = one_server(3);
  auto space = netres::enumerate_actions(cfg);
  netres::EwPolicy base(space, {0.7, 1.5}, cfg.budget);
  netres::EwPolicy shifted(space, {0.7, 1.5}, cfg.budget);

  netres::Rng rng(11u);
  for (int t = 0; t < 25; ++t) {
    std::vector<double> row(3), row2(3);
    for (std::size_t a = 0; a < 3; ++a) {
      // Keep every running average above budget so the clamp never bites
      // and a constant row offset shifts all penalties equally.
      row[a] = 0.5 + rng.uniform();
      row2[a] = row[a] + 2.0;
    }
    base.observe_row(row);
    shifted.observe_row(row2);
    for (std::size_t a = 0; a < 3; ++a) {
      CHECK(base.distribution()[a] ==
            doctest::Approx(shifted.distribution()[a]).epsilon(1e-10));
    }
  }
}

TEST_CASE("stays on the simplex under extreme rates") {
  auto cfg = two_server_grid();
  auto space = netres::enumerate_actions(cfg);
  netres::EwPolicy pol(space, {50.0, 10.0}, cfg.budget);
  netres::Rng rng(5u);
  for (int t = 0; t < 200; ++t) {
    std::vector<double> row(space.actions.size());
    for (double& x : row) x = rng.uniform() * 30.0;
    pol.observe_row(row);
    double sum = 0.0;
    for (double p : pol.distribution()) {
      CHECK(std::isfinite(p));
      CHECK(p >= 0.0);
      sum += p;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("cheaper dominating action takes over") {
  auto cfg = one_server(2);
  auto space = netres::enumerate_actions(cfg);
  netres::EwPolicy pol(space, {1.0, 1.0}, cfg.budget);
  // Zero blocking rows: only the reservation price differentiates, so the
  // cheap action's share must grow monotonically toward 1.
  double prev = 0.5;
  for (int t = 0; t < 60; ++t) {
    std::vector<double> row = {0.0, 0.0};
    pol.observe_row(row);
    double p0 = pol.distribution()[0];
    CHECK(p0 > prev);
    prev = p0;
  }
  CHECK(prev > 0.99);
}

TEST_CASE("snapshot resume is bit exact") {
  auto cfg = two_server_grid();
  auto space = netres::enumerate_actions(cfg);
  netres::EwPolicy pol(space, {0.25, 3.0}, cfg.budget);
  netres::Rng rng(88u);
  auto random_row = [&] {
    std::vector<double> row(space.actions.size());
    for (double& x : row) x = rng.uniform();
    return row;
  };
  std::vector<std::vector<double>> later;
  for (int t = 0; t < 10; ++t) pol.observe_row(random_row());
  for (int t = 0; t < 5; ++t) later.push_back(random_row());

  std::stringstream snap;
  pol.save_snapshot(snap);
  auto copy = netres::EwPolicy::load_snapshot(snap, space);

  CHECK(copy.t() == pol.t());
  for (std::size_t a = 0; a < pol.distribution().size(); ++a) {
    CHECK(copy.distribution()[a] == pol.distribution()[a]);
  }
  for (const auto& row : later) {
    pol.observe_row(row);
    copy.observe_row(row);
  }
  for (std::size_t a = 0; a < pol.distribution().size(); ++a) {
    CHECK(copy.distribution()[a] == pol.distribution()[a]);
    CHECK(copy.cum_penalty(static_cast<int>(a)) ==
          pol.cum_penalty(static_cast<int>(a)));
  }

  std::stringstream bad("not a snapshot");
  CHECK_THROWS_AS(netres::EwPolicy::load_snapshot(bad, space),
                  std::runtime_error);
}

TEST_CASE("sampling follows the distribution") {
  auto cfg = one_server(2);
  auto space = netres::enumerate_actions(cfg);
  netres::EwPolicy pol(space, {1.0, 1.0}, cfg.budget);
  // Push nearly all mass onto action 0.
  for (int t = 0; t < 200; ++t) {
    std::vector<double> row = {0.0, 5.0};
    pol.observe_row(row);
  }
  CHECK(pol.distribution()[0] > 0.999);
  netres::Rng rng(1u);
  int hits = 0;
  for (int i = 0; i < 1000; ++i) {
    if (pol.sample_action(rng) == 0) ++hits;
  }
  CHECK(hits >= 995);

  netres::Rng r1(12u), r2(12u);
  for (int i = 0; i < 50; ++i) {
    CHECK(pol.sample_action(r1) == pol.sample_action(r2));
  }
}

}  // TEST_SUITE
