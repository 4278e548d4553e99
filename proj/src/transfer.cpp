#include "netres/transfer.hpp"

#include <algorithm>
#include <atomic>
#include <cassert>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace netres {

namespace {

// Residual-graph edge for the unit-augmentation solver. kind 0 is free
// capacity (source / absorption arcs), kind 1 carries a quadratic cost
// coeff * flow^2, so the marginal of the (x+1)-th unit is coeff * (2x + 1).
struct FlowEdge {
  int from = 0;
  int to = 0;
  int cap = 0;
  int flow = 0;
  double coeff = 0;
  int kind = 0;
};

double forward_marginal(const FlowEdge& e) {
  return e.kind == 0 ? 0.0 : e.coeff * (2.0 * e.flow + 1.0);
}

double backward_marginal(const FlowEdge& e) {
  return e.kind == 0 ? 0.0 : -e.coeff * (2.0 * e.flow - 1.0);
}

// Relaxation slack below which an "improvement" is treated as float noise.
// Real marginal-cost differences are O(coeff), far above this.
constexpr double kPathEps = 1e-9;

}  // namespace

TransferPlan solve_transfer(const NetworkConfig& config, const Reservation& a,
                            const JobRequest& b, TransferOptions opts) {
  const int N = config.n_servers();
  std::vector<int> deficit(N), surplus(N);
  int total_deficit = 0;
  for (int n = 0; n < N; ++n) {
    deficit[n] = std::max(0, b.amounts[n] - a.amounts[n]);
    surplus[n] = std::max(0, a.amounts[n] - b.amounts[n]);
    total_deficit += deficit[n];
  }

  TransferPlan plan;
  plan.delta.assign(static_cast<std::size_t>(N) * N, 0);
  if (total_deficit == 0) return plan;

  // Node ids: 0 source, 1+n deficit side, 1+N+m surplus side, 2N+1 sink.
  const int source = 0;
  const int sink = 2 * N + 1;
  const int n_nodes = 2 * N + 2;

  std::vector<FlowEdge> edges;
  std::vector<int> transfer_edge(static_cast<std::size_t>(N) * N, -1);
  std::vector<int> violation_edge(N, -1);
  for (int n = 0; n < N; ++n) {
    if (deficit[n] == 0) continue;
    edges.push_back({source, 1 + n, deficit[n], 0, 0, 0});
    violation_edge[n] = static_cast<int>(edges.size());
    edges.push_back({1 + n, sink, deficit[n], 0, config.violation_coeff[n], 1});
  }
  for (int m = 0; m < N; ++m) {
    if (surplus[m] == 0) continue;
    int absorb_cap = 0;
    for (int n = 0; n < N; ++n) {
      if (n == m || deficit[n] == 0) continue;
      const int edge_cap = std::min(deficit[n], surplus[m]);
      transfer_edge[static_cast<std::size_t>(n) * N + m] = static_cast<int>(edges.size());
      edges.push_back({1 + n, 1 + N + m, edge_cap, 0, config.transfer_k(n, m), 1});
      absorb_cap += edge_cap;
    }
    if (opts.aggregate_caps) absorb_cap = std::min(absorb_cap, surplus[m]);
    if (absorb_cap > 0) edges.push_back({1 + N + m, sink, absorb_cap, 0, 0, 0});
  }

  // Push each deficit unit along the cheapest residual path. Violation arcs
  // cover the whole deficit, so a path always exists and the final flow is
  // the integer optimum of the separable convex objective.
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> dist(n_nodes);
  std::vector<int> pred_edge(n_nodes), pred_dir(n_nodes);
  for (int unit = 0; unit < total_deficit; ++unit) {
    std::fill(dist.begin(), dist.end(), inf);
    std::fill(pred_edge.begin(), pred_edge.end(), -1);
    dist[source] = 0;
    for (int pass = 0; pass < n_nodes - 1; ++pass) {
      bool changed = false;
      for (int e = 0; e < static_cast<int>(edges.size()); ++e) {
        const FlowEdge& ed = edges[e];
        if (ed.flow < ed.cap && dist[ed.from] < inf) {
          const double c = dist[ed.from] + forward_marginal(ed);
          if (c + kPathEps < dist[ed.to]) {
            dist[ed.to] = c;
            pred_edge[ed.to] = e;
            pred_dir[ed.to] = +1;
            changed = true;
          }
        }
        if (ed.flow > 0 && dist[ed.to] < inf) {
          const double c = dist[ed.to] + backward_marginal(ed);
          if (c + kPathEps < dist[ed.from]) {
            dist[ed.from] = c;
            pred_edge[ed.from] = e;
            pred_dir[ed.from] = -1;
            changed = true;
          }
        }
      }
      if (!changed) break;
    }
    assert(dist[sink] < inf);
    int v = sink;
    [[maybe_unused]] int guard = 0;
    while (v != source) {
      assert(++guard <= n_nodes && "augmenting path revisited a node");
      FlowEdge& ed = edges[pred_edge[v]];
      if (pred_dir[v] > 0) {
        ++ed.flow;
        v = ed.from;
      } else {
        --ed.flow;
        v = ed.to;
      }
    }
  }

  for (int n = 0; n < N; ++n) {
    for (int m = 0; m < N; ++m) {
      const int e = transfer_edge[static_cast<std::size_t>(n) * N + m];
      if (e < 0) continue;
      const int d = edges[e].flow;
      plan.delta[static_cast<std::size_t>(n) * N + m] = d;
      plan.transfer_cost += config.transfer_k(n, m) * static_cast<double>(d) * d;
    }
    const int ve = violation_edge[n];
    if (ve >= 0) {
      const int u = edges[ve].flow;
      plan.violation_cost += config.violation_coeff[n] * static_cast<double>(u) * u;
    }
  }
  plan.blocking_cost = plan.transfer_cost + plan.violation_cost;
  return plan;
}

double plan_objective(const NetworkConfig& config, const Reservation& a,
                      const JobRequest& b, const TransferPlan& plan) {
  const int N = config.n_servers();
  double obj = 0;
  for (int n = 0; n < N; ++n) {
    const int d = std::max(0, b.amounts[n] - a.amounts[n]);
    int inflow = 0;
    for (int m = 0; m < N; ++m) {
      const int x = plan.at(n, m, N);
      obj += config.transfer_k(n, m) * static_cast<double>(x) * x;
      inflow += x;
    }
    const int unserved = std::max(0, d - inflow);
    obj += config.violation_coeff[n] * static_cast<double>(unserved) * unserved;
  }
  return obj;
}

TransferPlan brute_force_transfer_oracle(const NetworkConfig& config,
                                         const Reservation& a, const JobRequest& b,
                                         TransferOptions opts, int deficit_cap) {
  const int N = config.n_servers();
  std::vector<int> deficit(N), surplus(N);
  int total_deficit = 0;
  for (int n = 0; n < N; ++n) {
    deficit[n] = std::max(0, b.amounts[n] - a.amounts[n]);
    surplus[n] = std::max(0, a.amounts[n] - b.amounts[n]);
    total_deficit += deficit[n];
  }
  if (total_deficit > deficit_cap)
    throw std::invalid_argument("oracle: total deficit exceeds cap");

  struct Var {
    int n, m, cap;
  };
  std::vector<Var> vars;
  double combos = 1;
  for (int n = 0; n < N; ++n) {
    if (deficit[n] == 0) continue;
    for (int m = 0; m < N; ++m) {
      if (m == n || surplus[m] == 0) continue;
      const int cap = std::min(deficit[n], surplus[m]);
      vars.push_back({n, m, cap});
      combos *= cap + 1;
    }
  }
  if (combos > 2e7) throw std::invalid_argument("oracle: search space too large");

  std::vector<int> assign(vars.size(), 0);
  std::vector<int> inflow(N, 0), outflow(N, 0);
  std::vector<int> best_assign;
  double best_obj = std::numeric_limits<double>::infinity();

  // depth-first over all integer delta matrices within the pairwise caps,
  // pruning aggregate-cap violations when that mode is on
  auto dfs = [&](auto&& self, std::size_t i, double transfer_cost) -> void {
    if (i == vars.size()) {
      double obj = transfer_cost;
      for (int n = 0; n < N; ++n) {
        const int unserved = std::max(0, deficit[n] - inflow[n]);
        obj += config.violation_coeff[n] * static_cast<double>(unserved) * unserved;
      }
      if (obj < best_obj) {
        best_obj = obj;
        best_assign = assign;
      }
      return;
    }
    const Var& v = vars[i];
    for (int x = 0; x <= v.cap; ++x) {
      if (opts.aggregate_caps &&
          (inflow[v.n] + x > deficit[v.n] || outflow[v.m] + x > surplus[v.m]))
        break;
      assign[i] = x;
      inflow[v.n] += x;
      outflow[v.m] += x;
      self(self, i + 1, transfer_cost + config.transfer_k(v.n, v.m) * static_cast<double>(x) * x);
      inflow[v.n] -= x;
      outflow[v.m] -= x;
    }
    assign[i] = 0;
  };
  dfs(dfs, 0, 0.0);
  assert(best_obj < std::numeric_limits<double>::infinity());

  TransferPlan plan;
  plan.delta.assign(static_cast<std::size_t>(N) * N, 0);
  for (std::size_t i = 0; i < vars.size(); ++i)
    plan.delta[static_cast<std::size_t>(vars[i].n) * N + vars[i].m] = best_assign[i];
  for (int n = 0; n < N; ++n) {
    int in = 0;
    for (int m = 0; m < N; ++m) {
      const int x = plan.at(n, m, N);
      plan.transfer_cost += config.transfer_k(n, m) * static_cast<double>(x) * x;
      in += x;
    }
    const int unserved = std::max(0, deficit[n] - in);
    plan.violation_cost += config.violation_coeff[n] * static_cast<double>(unserved) * unserved;
  }
  plan.blocking_cost = plan.transfer_cost + plan.violation_cost;
  return plan;
}

std::string plan_csv_rows(const TransferPlan& plan, int n_servers) {
  std::ostringstream out;
  out << "from,to,amount\n";
  for (int n = 0; n < n_servers; ++n)
    for (int m = 0; m < n_servers; ++m)
      if (plan.at(n, m, n_servers) > 0)
        out << n << ',' << m << ',' << plan.at(n, m, n_servers) << '\n';
  out << "# transfer_cost=" << plan.transfer_cost << " violation_cost=" << plan.violation_cost
      << " blocking_cost=" << plan.blocking_cost << '\n';
  return out.str();
}

C0Cache::C0Cache(const NetworkConfig& config, const ActionSpace& space, TransferOptions opts)
    : config_(config), space_(space), opts_(opts) {
  const int n = config.n_servers();
  strides_.assign(n, 1);
  for (int i = n - 2; i >= 0; --i) strides_[i] = strides_[i + 1] * (config.capacities[i + 1] + 1);
}

long long C0Cache::encode(const JobRequest& b) const {
  long long key = 0;
  for (int i = 0; i < config_.n_servers(); ++i) {
    if (b.amounts[i] < 0 || b.amounts[i] > config_.capacities[i])
      throw std::out_of_range("cache: request component outside [0, capacity]");
    key += strides_[i] * b.amounts[i];
  }
  return key;
}

std::vector<double> C0Cache::compute_row(const JobRequest& b) const {
  std::vector<double> row_values(space_.size());
  for (int ai = 0; ai < space_.size(); ++ai)
    row_values[ai] = solve_transfer(config_, space_.actions[ai], b, opts_).blocking_cost;
  return row_values;
}

const std::vector<double>& C0Cache::row(const JobRequest& b) {
  const long long key = encode(b);
  if (!complete_) {
    std::unique_lock lock(mu_);
    auto it = rows_.find(key);
    if (it != rows_.end()) return it->second;
    lock.unlock();
    std::vector<double> fresh = compute_row(b);  // heavy part runs unlocked
    lock.lock();
    return rows_.try_emplace(key, std::move(fresh)).first->second;
  }
  return rows_.at(key);
}

double C0Cache::value(int action_index, const JobRequest& b) { return row(b)[action_index]; }

std::size_t C0Cache::distinct_requests() const {
  std::scoped_lock lock(mu_);
  return rows_.size();
}

void C0Cache::insert_row(long long key, std::vector<double> row_values) {
  std::scoped_lock lock(mu_);
  rows_.try_emplace(key, std::move(row_values));
}

void C0Cache::prefill_all(int n_workers) {
  const int N = config_.n_servers();
  long long total = 1;
  for (int i = 0; i < N; ++i) total *= config_.capacities[i] + 1;

  std::atomic<long long> cursor{0};
  auto worker = [&] {
    long long key;
    while ((key = cursor.fetch_add(1)) < total) {
      {
        std::scoped_lock lock(mu_);
        if (rows_.count(key)) continue;
      }
      JobRequest b;
      b.amounts.resize(N);
      long long rem = key;
      for (int i = 0; i < N; ++i) {
        b.amounts[i] = static_cast<int>(rem / strides_[i]);
        rem %= strides_[i];
      }
      insert_row(key, compute_row(b));
    }
  };
  n_workers = std::max(1, n_workers);
  if (n_workers == 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    for (int w = 0; w < n_workers; ++w) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
  }
  mark_complete();
}

}  // namespace netres
