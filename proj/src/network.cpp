#include "netres/network.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "netres/transfer.hpp"

namespace netres {

using nlohmann::json;

void NetworkConfig::validate() const {
  const int n = n_servers();
  if (n < 1) throw std::invalid_argument("config: at least one server required");
  if (reservation_floor < 0) throw std::invalid_argument("config: reservation floor must be >= 0");
  for (int i = 0; i < n; ++i) {
    if (capacities[i] < reservation_floor)
      throw std::invalid_argument("config: capacity below reservation floor at server " + std::to_string(i));
  }
  if (static_cast<int>(reserve_coeff.size()) != n || static_cast<int>(violation_coeff.size()) != n)
    throw std::invalid_argument("config: coefficient vector length mismatch");
  if (static_cast<int>(transfer_coeff.size()) != n * n)
    throw std::invalid_argument("config: transfer matrix must be NxN");
  for (int i = 0; i < n; ++i) {
    if (reserve_coeff[i] < 0 || violation_coeff[i] < 0)
      throw std::invalid_argument("config: negative cost coefficient");
    if (transfer_k(i, i) != 0.0)
      throw std::invalid_argument("config: transfer matrix diagonal must be zero");
    for (int j = 0; j < n; ++j)
      if (transfer_k(i, j) < 0) throw std::invalid_argument("config: negative transfer coefficient");
  }
  if (budget < 0) throw std::invalid_argument("config: budget must be >= 0");
}

namespace {

std::vector<double> coeff_from_json(const json& j, std::size_t n, const char* name) {
  if (j.is_number()) return std::vector<double>(n, j.get<double>());
  auto v = j.get<std::vector<double>>();
  if (v.size() != n)
    throw std::invalid_argument(std::string("config: ") + name + " length mismatch");
  return v;
}

}  // namespace

NetworkConfig NetworkConfig::from_json_text(const std::string& text) {
  json j = json::parse(text);
  NetworkConfig cfg;
  cfg.capacities = j.at("capacities").get<std::vector<int>>();
  const std::size_t n = cfg.capacities.size();
  cfg.reservation_floor = j.value("reservation_floor", 1);
  cfg.reserve_coeff = coeff_from_json(j.at("reserve_coeff"), n, "reserve_coeff");
  cfg.violation_coeff = coeff_from_json(j.at("violation_coeff"), n, "violation_coeff");
  const json& k = j.at("transfer_coeff");
  if (k.is_array() && !k.empty() && k[0].is_array()) {
    if (k.size() != n) throw std::invalid_argument("config: transfer_coeff row count mismatch");
    for (const auto& row : k) {
      auto r = row.get<std::vector<double>>();
      if (r.size() != n) throw std::invalid_argument("config: transfer_coeff row length mismatch");
      cfg.transfer_coeff.insert(cfg.transfer_coeff.end(), r.begin(), r.end());
    }
  } else {
    cfg.transfer_coeff = k.get<std::vector<double>>();  // flat row-major
  }
  cfg.budget = j.at("budget").get<double>();
  cfg.validate();
  return cfg;
}

NetworkConfig NetworkConfig::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open network config: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str());
}

std::string NetworkConfig::to_json_text() const {
  json j;
  j["capacities"] = capacities;
  j["reservation_floor"] = reservation_floor;
  j["reserve_coeff"] = reserve_coeff;
  j["violation_coeff"] = violation_coeff;
  json rows = json::array();
  const int n = n_servers();
  for (int i = 0; i < n; ++i) {
    json row = json::array();
    for (int m = 0; m < n; ++m) row.push_back(transfer_k(i, m));
    rows.push_back(row);
  }
  j["transfer_coeff"] = rows;
  j["budget"] = budget;
  return j.dump(2);
}

double reservation_cost(const NetworkConfig& config, const Reservation& a) {
  double c = 0;
  for (int n = 0; n < config.n_servers(); ++n)
    c += config.reserve_coeff[n] * static_cast<double>(a.amounts[n]) * a.amounts[n];
  return c;
}

ActionSpace enumerate_actions(const NetworkConfig& config, long long cap) {
  config.validate();
  const int n = config.n_servers();
  const int floor = config.reservation_floor;
  long long count = 1;
  for (int i = 0; i < n; ++i) {
    count *= config.capacities[i] - floor + 1;
    if (count > cap)
      throw std::runtime_error("action space size exceeds cap (" + std::to_string(cap) +
                               "): instance too large for a tabular policy");
  }
  ActionSpace space;
  space.actions.reserve(count);
  space.reservation_costs.reserve(count);
  Reservation a;
  a.amounts.assign(n, floor);
  while (true) {
    space.actions.push_back(a);
    space.reservation_costs.push_back(reservation_cost(config, a));
    // lexicographic successor: bump the last component, carry left
    int i = n - 1;
    while (i >= 0 && a.amounts[i] == config.capacities[i]) {
      a.amounts[i] = floor;
      --i;
    }
    if (i < 0) break;
    ++a.amounts[i];
  }
  return space;
}

int ActionSpace::index_of(const Reservation& a, const NetworkConfig& config) const {
  const int n = config.n_servers();
  long long idx = 0;
  for (int i = 0; i < n; ++i) {
    idx = idx * (config.capacities[i] - config.reservation_floor + 1) +
          (a.amounts[i] - config.reservation_floor);
  }
  return static_cast<int>(idx);
}

namespace {

// enumerate all requests b with 0 <= b_n <= m_n in row-major order
bool next_request(JobRequest& b, const NetworkConfig& config) {
  int i = config.n_servers() - 1;
  while (i >= 0 && b.amounts[i] == config.capacities[i]) {
    b.amounts[i] = 0;
    --i;
  }
  if (i < 0) return false;
  ++b.amounts[i];
  return true;
}

struct ThetaSweep {
  double max_cv = 0;
  double max_ct = 0;
};

}  // namespace

ThetaBound cost_bound_theta(const NetworkConfig& config, const ActionSpace& space,
                            ThetaMode mode, int n_workers, C0Cache* fill) {
  if (space.size() == 0) throw std::invalid_argument("theta: empty action space");
  const int n = config.n_servers();

  double max_c = *std::max_element(space.reservation_costs.begin(), space.reservation_costs.end());

  long long n_requests = 1;
  for (int i = 0; i < n; ++i) n_requests *= config.capacities[i] + 1;
  const long long pairs = n_requests * space.size();

  bool exhaustive;
  switch (mode) {
    case ThetaMode::kExhaustive: exhaustive = true; break;
    case ThetaMode::kCorner: exhaustive = false; break;
    default: exhaustive = pairs <= kThetaExhaustivePairCap; break;
  }

  ThetaSweep total;
  if (exhaustive) {
    // enumerate requests up front so they can be sharded across workers
    std::vector<JobRequest> requests;
    requests.reserve(n_requests);
    JobRequest b;
    b.amounts.assign(n, 0);
    do {
      requests.push_back(b);
    } while (next_request(b, config));

    n_workers = std::max(1, n_workers);
    std::vector<ThetaSweep> partial(n_workers);
    std::atomic<std::size_t> cursor{0};
    auto worker = [&](int w) {
      TransferOptions opts = fill ? fill->options() : TransferOptions{};
      std::size_t i;
      while ((i = cursor.fetch_add(1)) < requests.size()) {
        const JobRequest& req = requests[i];
        std::vector<double> row_values;
        if (fill) row_values.resize(space.size());
        for (int ai = 0; ai < space.size(); ++ai) {
          TransferPlan plan = solve_transfer(config, space.actions[ai], req, opts);
          partial[w].max_cv = std::max(partial[w].max_cv, plan.violation_cost);
          partial[w].max_ct = std::max(partial[w].max_ct, plan.transfer_cost);
          if (fill) row_values[ai] = plan.blocking_cost;
        }
        if (fill) fill->insert_row(fill->encode(req), std::move(row_values));
      }
    };
    if (n_workers == 1) {
      worker(0);
    } else {
      std::vector<std::thread> threads;
      for (int w = 0; w < n_workers; ++w) threads.emplace_back(worker, w);
      for (auto& t : threads) t.join();
    }
    for (const auto& p : partial) {
      total.max_cv = std::max(total.max_cv, p.max_cv);
      total.max_ct = std::max(total.max_ct, p.max_ct);
    }
    if (fill) fill->mark_complete();
  } else {
    // corner probe: full-load and floor-load requests only
    JobRequest full, low;
    full.amounts = config.capacities;
    low.amounts.assign(n, config.reservation_floor);
    for (const JobRequest& req : {full, low}) {
      for (int ai = 0; ai < space.size(); ++ai) {
        TransferPlan plan = solve_transfer(config, space.actions[ai], req);
        total.max_cv = std::max(total.max_cv, plan.violation_cost);
        total.max_ct = std::max(total.max_ct, plan.transfer_cost);
      }
    }
    std::cerr << "warning: theta computed in corner mode (" << pairs
              << " pairs exceeds exhaustive cap); value is a heuristic estimate\n";
  }

  ThetaBound out;
  out.value = std::max({max_c, total.max_cv, total.max_ct});
  out.heuristic = !exhaustive;
  if (out.value <= 0) {
    std::cerr << "warning: all costs are zero; theta floored at 1e-12\n";
    out.value = 1e-12;
  }
  return out;
}

}  // namespace netres
