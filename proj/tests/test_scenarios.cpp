#include <doctest.h>

#include <netres/network.hpp>
#include <netres/scenarios.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <stdexcept>
#include <string>
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

std::filesystem::path tmp_file(const char* name) {
  return std::filesystem::temp_directory_path() / name;
}

}  // namespace

TEST_SUITE("scenarios") {

TEST_CASE("piecewise single regime") {
  auto cfg = bench3();
  auto trace = netres::gen_piecewise_fixed(cfg, {{2, 3, 4}}, {}, 10);
  CHECK(trace.horizon == 10);
  REQUIRE(trace.requests.size() == 10);
  for (const auto& b : trace.requests) {
    CHECK(b.amounts == std::vector<int>{2, 3, 4});
  }
  REQUIRE(trace.schedule.has_value());
  CHECK(trace.schedule->change_points.empty());
  CHECK(trace.provenance.find("piecewise-fixed") != std::string::npos);
  netres::validate_trace(trace, cfg);
}

TEST_CASE("piecewise regime boundaries are inclusive on the left regime") {
  auto cfg = bench3();
  cfg.capacities = {4};
  cfg.reserve_coeff = {0.05};
  cfg.violation_coeff = {0.05};
  cfg.transfer_coeff = {0.0};
  auto trace = netres::gen_piecewise_fixed(cfg, {{1}, {2}}, {2}, 4);
  REQUIRE(trace.requests.size() == 4);
  CHECK(trace.requests[0].amounts[0] == 1);
  CHECK(trace.requests[1].amounts[0] == 1);
  CHECK(trace.requests[2].amounts[0] == 2);
  CHECK(trace.requests[3].amounts[0] == 2);
}

TEST_CASE("piecewise three regime default shape") {
  auto cfg = bench3();
  auto trace = netres::gen_piecewise_fixed(
      cfg, {{3, 5, 2}, {6, 2, 4}, {7, 6, 6}}, {500, 1000}, 5000);
  CHECK(trace.horizon == 5000);
  CHECK(trace.requests[499].amounts == std::vector<int>{3, 5, 2});
  CHECK(trace.requests[500].amounts == std::vector<int>{6, 2, 4});
  CHECK(trace.requests[999].amounts == std::vector<int>{6, 2, 4});
  CHECK(trace.requests[1000].amounts == std::vector<int>{7, 6, 6});
  CHECK(trace.requests[4999].amounts == std::vector<int>{7, 6, 6});
  netres::validate_trace(trace, cfg);
}

TEST_CASE("piecewise rejects malformed inputs") {
  auto cfg = bench3();
  CHECK_THROWS_AS(netres::gen_piecewise_fixed(cfg, {{1, 1, 1}}, {}, 0),
                  std::invalid_argument);
  CHECK_THROWS_AS(
      netres::gen_piecewise_fixed(cfg, {{1, 1, 1}, {2, 2, 2}}, {}, 10),
      std::invalid_argument);
  CHECK_THROWS_AS(
      netres::gen_piecewise_fixed(cfg, {{1, 1, 1}, {2, 2, 2}}, {5, 5}, 10),
      std::invalid_argument);
  CHECK_THROWS_AS(
      netres::gen_piecewise_fixed(cfg, {{1, 1, 1}, {2, 2, 2}}, {12}, 10),
      std::invalid_argument);
  CHECK_THROWS_AS(netres::gen_piecewise_fixed(cfg, {{11, 1, 1}}, {}, 10),
                  std::invalid_argument);
  CHECK_THROWS_AS(netres::gen_piecewise_fixed(cfg, {{1, 1}}, {}, 10),
                  std::invalid_argument);
}

TEST_CASE("poisson trace is seed deterministic") {
  auto cfg = bench3();
  netres::PoissonSceneParams p;
  p.seed = 314159;
  p.horizon = 600;
  auto a = netres::gen_poisson_regimes(cfg, p);
  auto b = netres::gen_poisson_regimes(cfg, p);
  CHECK(a.requests == b.requests);
  REQUIRE(a.schedule.has_value());
  REQUIRE(b.schedule.has_value());
  CHECK(a.schedule->change_points == b.schedule->change_points);

  p.seed = 314160;
  auto c = netres::gen_poisson_regimes(cfg, p);
  CHECK(a.requests != c.requests);
}

TEST_CASE("poisson trace structure") {
  auto cfg = bench3();
  netres::PoissonSceneParams p;
  p.seed = 7;
  p.horizon = 5000;
  p.region_mean = 250;
  auto trace = netres::gen_poisson_regimes(cfg, p);
  CHECK(trace.horizon == 5000);
  CHECK(trace.requests.size() == 5000);
  netres::validate_trace(trace, cfg);

  REQUIRE(trace.schedule.has_value());
  const auto& sched = *trace.schedule;
  // Mean regime length 250 over 5000 slots: around 20 regimes.
  CHECK(sched.levels.size() >= 5);
  CHECK(sched.levels.size() <= 60);
  CHECK(sched.change_points.size() + 1 == sched.levels.size());
  long long prev = 0;
  for (long long cp : sched.change_points) {
    CHECK(cp > prev);
    CHECK(cp < trace.horizon);
    prev = cp;
  }
  // Per-regime means are sampled without replacement from the choice set.
  for (const auto& level : sched.levels) {
    REQUIRE(level.size() == 3);
    std::set<double> uniq(level.begin(), level.end());
    CHECK(uniq.size() == 3);
    for (double mean : level) {
      CHECK(std::count(p.mean_choices.begin(), p.mean_choices.end(),
                       static_cast<int>(mean)) == 1);
    }
  }
}

TEST_CASE("poisson clip caps every component") {
  auto cfg = bench3();
  netres::PoissonSceneParams p;
  p.seed = 99;
  p.horizon = 400;
  p.mean_choices = {4, 5, 6};
  p.clip = 3;
  auto trace = netres::gen_poisson_regimes(cfg, p);
  for (const auto& b : trace.requests) {
    for (int x : b.amounts) {
      CHECK(x >= 0);
      CHECK(x <= 3);
    }
  }
}

TEST_CASE("poisson sample mean tracks the regime mean") {
  auto cfg = bench3();
  netres::PoissonSceneParams p;
  p.seed = 123;
  p.horizon = 5000;
  // A single admissible mean per server forces every regime to level 2;
  // clipping at capacity 10 shaves under 1e-4 off the expectation.
  p.mean_choices = {2, 2, 2};
  auto trace = netres::gen_poisson_regimes(cfg, p);
  double sum = 0;
  for (const auto& b : trace.requests)
    for (int x : b.amounts) sum += x;
  double mean = sum / (5000.0 * 3.0);
  CHECK(mean == doctest::Approx(2.0).epsilon(0.03));
}

TEST_CASE("poisson rejects bad parameters") {
  auto cfg = bench3();
  netres::PoissonSceneParams p;
  p.horizon = 0;
  CHECK_THROWS_AS(netres::gen_poisson_regimes(cfg, p), std::invalid_argument);
  p.horizon = 100;
  p.region_mean = 0.5;
  CHECK_THROWS_AS(netres::gen_poisson_regimes(cfg, p), std::invalid_argument);
  p.region_mean = 50;
  p.mean_choices = {2, 3};  // fewer choices than servers
  CHECK_THROWS_AS(netres::gen_poisson_regimes(cfg, p), std::invalid_argument);
}

TEST_CASE("csv round trip") {
  auto cfg = bench3();
  netres::PoissonSceneParams p;
  p.seed = 2024;
  p.horizon = 120;
  p.region_mean = 30;
  auto trace = netres::gen_poisson_regimes(cfg, p);

  auto path = tmp_file("netres_trace_roundtrip.csv");
  netres::save_trace(trace, path.string());
  auto loaded = netres::load_trace(path.string());
  std::filesystem::remove(path);

  CHECK(loaded.horizon == trace.horizon);
  CHECK(loaded.requests == trace.requests);
  CHECK(loaded.provenance == trace.provenance);
  REQUIRE(loaded.schedule.has_value());
  CHECK(loaded.schedule->change_points == trace.schedule->change_points);
  CHECK(loaded.schedule->levels.empty());  // levels are not serialized
  netres::validate_trace(loaded, cfg);
}

TEST_CASE("csv text shape") {
  auto cfg = bench3();
  auto trace = netres::gen_piecewise_fixed(cfg, {{1, 2, 3}, {4, 5, 6}}, {1}, 2);
  auto text = netres::trace_csv_text(trace);
  CHECK(text.starts_with("# piecewise-fixed"));
  CHECK(text.find("# change_points,1\n") != std::string::npos);
  CHECK(text.find("t,b1,b2,b3\n") != std::string::npos);
  CHECK(text.find("1,1,2,3\n") != std::string::npos);
  CHECK(text.find("2,4,5,6\n") != std::string::npos);
}

TEST_CASE("loader rejects corrupt files") {
  auto write_and_load = [](const char* name, const std::string& body) {
    auto path = tmp_file(name);
    std::ofstream(path) << body;
    auto cleanup = path;
    try {
      auto t = netres::load_trace(path.string());
      std::filesystem::remove(cleanup);
      return t;
    } catch (...) {
      std::filesystem::remove(cleanup);
      throw;
    }
  };

  CHECK_THROWS_AS(write_and_load("netres_bad1.csv", "no header here\n"),
                  std::invalid_argument);
  CHECK_THROWS_AS(
      write_and_load("netres_bad2.csv", "t,b1\n1,2\n3,4\n"),
      std::invalid_argument);  // slot 2 missing
  CHECK_THROWS_AS(
      write_and_load("netres_bad3.csv", "t,b1,b2\n1,2\n"),
      std::invalid_argument);  // row narrower than header
  CHECK_THROWS_AS(write_and_load("netres_bad4.csv", ""), std::invalid_argument);

  auto ok = write_and_load("netres_ok.csv", "# handmade\nt,b1\n1,3\n2,0\n");
  CHECK(ok.horizon == 2);
  CHECK(ok.requests[0].amounts == std::vector<int>{3});
  CHECK(ok.provenance == "handmade");
  CHECK_FALSE(ok.schedule.has_value());
}

TEST_CASE("trace validation") {
  auto cfg = bench3();
  netres::RequestTrace t;
  t.horizon = 2;
  t.requests = {netres::JobRequest{{1, 2, 3}}, netres::JobRequest{{0, 0, 11}}};
  CHECK_THROWS_AS(netres::validate_trace(t, cfg), std::invalid_argument);
  t.requests[1].amounts = {0, 0, 10};
  CHECK_NOTHROW(netres::validate_trace(t, cfg));
  t.horizon = 3;
  CHECK_THROWS_AS(netres::validate_trace(t, cfg), std::invalid_argument);
  t.horizon = 2;
  t.requests[0].amounts = {1, 2};
  CHECK_THROWS_AS(netres::validate_trace(t, cfg), std::invalid_argument);
}

}  // TEST_SUITE
