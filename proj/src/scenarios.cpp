#include "netres/scenarios.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "netres/rng.hpp"

namespace netres {

RequestTrace gen_piecewise_fixed(const NetworkConfig& config,
                                 const std::vector<std::vector<int>>& levels,
                                 const std::vector<long long>& change_points, long long horizon) {
  const int N = config.n_servers();
  if (horizon < 1) throw std::invalid_argument("piecewise: horizon must be >= 1");
  if (levels.size() != change_points.size() + 1)
    throw std::invalid_argument("piecewise: need one more level vector than change points");
  for (std::size_t r = 0; r < change_points.size(); ++r) {
    const long long prev = r == 0 ? 0 : change_points[r - 1];
    if (change_points[r] <= prev || change_points[r] >= horizon)
      throw std::invalid_argument("piecewise: change points must be strictly increasing within (0, horizon)");
  }
  for (const auto& level : levels) {
    if (static_cast<int>(level.size()) != N)
      throw std::invalid_argument("piecewise: level vector length mismatch");
    for (int n = 0; n < N; ++n)
      if (level[n] < 0 || level[n] > config.capacities[n])
        throw std::invalid_argument("piecewise: level exceeds capacity");
  }

  RequestTrace trace;
  trace.horizon = horizon;
  trace.requests.reserve(horizon);
  std::size_t regime = 0;
  for (long long t = 1; t <= horizon; ++t) {
    if (regime < change_points.size() && t > change_points[regime]) ++regime;
    JobRequest b;
    b.amounts.assign(levels[regime].begin(), levels[regime].end());
    trace.requests.push_back(std::move(b));
  }

  RegimeSchedule sched;
  sched.change_points = change_points;
  for (const auto& level : levels)
    sched.levels.emplace_back(level.begin(), level.end());
  trace.schedule = std::move(sched);

  std::ostringstream prov;
  prov << "piecewise-fixed horizon=" << horizon << " regimes=" << levels.size();
  trace.provenance = prov.str();
  return trace;
}

RequestTrace gen_poisson_regimes(const NetworkConfig& config, const PoissonSceneParams& params) {
  const int N = config.n_servers();
  if (params.horizon < 1) throw std::invalid_argument("poisson: horizon must be >= 1");
  if (params.region_mean < 1) throw std::invalid_argument("poisson: region mean must be >= 1");
  if (static_cast<int>(params.mean_choices.size()) < N)
    throw std::invalid_argument("poisson: need at least N distinct mean choices");

  Rng rng(params.seed);
  RequestTrace trace;
  trace.horizon = params.horizon;
  trace.requests.reserve(params.horizon);
  RegimeSchedule sched;

  long long t = 0;
  while (t < params.horizon) {
    const long long len = params.exp_lengths ? rng.exponential1(params.region_mean)
                                             : rng.geometric1(params.region_mean);
    // node means drawn without replacement ("unique integer" per node)
    std::vector<int> pool = params.mean_choices;
    std::vector<double> means(N);
    for (int n = 0; n < N; ++n) {
      const int pick = rng.uniform_int(0, static_cast<int>(pool.size()) - 1);
      means[n] = pool[pick];
      pool.erase(pool.begin() + pick);
    }
    const long long last = std::min(params.horizon, t + len);
    for (; t < last; ++t) {
      JobRequest b;
      b.amounts.resize(N);
      for (int n = 0; n < N; ++n) {
        int x = rng.poisson(means[n]);
        int lim = config.capacities[n];
        if (params.clip > 0) lim = std::min(lim, params.clip);
        b.amounts[n] = std::min(x, lim);
      }
      trace.requests.push_back(std::move(b));
    }
    sched.levels.push_back(std::move(means));
    if (t < params.horizon) sched.change_points.push_back(t);
  }
  trace.schedule = std::move(sched);

  std::ostringstream prov;
  prov << "poisson-regimes seed=" << params.seed << " horizon=" << params.horizon
       << " region_mean=" << params.region_mean
       << " lengths=" << (params.exp_lengths ? "exponential" : "geometric")
       << " regions=" << trace.schedule->levels.size();
  trace.provenance = prov.str();
  return trace;
}

void validate_trace(const RequestTrace& trace, const NetworkConfig& config) {
  const int N = config.n_servers();
  if (trace.horizon < 1 || trace.horizon != static_cast<long long>(trace.requests.size()))
    throw std::invalid_argument("trace: horizon does not match request count");
  for (const JobRequest& b : trace.requests) {
    if (static_cast<int>(b.amounts.size()) != N)
      throw std::invalid_argument("trace: request length does not match server count");
    for (int n = 0; n < N; ++n)
      if (b.amounts[n] < 0 || b.amounts[n] > config.capacities[n])
        throw std::invalid_argument("trace: request outside [0, capacity]");
  }
  if (trace.schedule) {
    long long prev = 0;
    for (long long cp : trace.schedule->change_points) {
      if (cp <= prev || cp >= trace.horizon)
        throw std::invalid_argument("trace: change points must be strictly increasing within (0, horizon)");
      prev = cp;
    }
  }
}

std::string trace_csv_text(const RequestTrace& trace) {
  std::ostringstream out;
  std::istringstream prov(trace.provenance);
  for (std::string line; std::getline(prov, line);) out << "# " << line << '\n';
  if (trace.schedule && !trace.schedule->change_points.empty()) {
    out << "# change_points";
    for (long long cp : trace.schedule->change_points) out << ',' << cp;
    out << '\n';
  }
  const int N = trace.requests.empty() ? 0 : static_cast<int>(trace.requests[0].amounts.size());
  out << 't';
  for (int n = 1; n <= N; ++n) out << ",b" << n;
  out << '\n';
  for (long long t = 1; t <= trace.horizon; ++t) {
    out << t;
    for (int v : trace.requests[t - 1].amounts) out << ',' << v;
    out << '\n';
  }
  return out.str();
}

void save_trace(const RequestTrace& trace, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write trace: " + path);
  out << trace_csv_text(trace);
  if (!out) throw std::runtime_error("short write on trace: " + path);
}

RequestTrace load_trace(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open trace: " + path);
  RequestTrace trace;
  std::string line;
  bool saw_header = false;
  int n_cols = -1;
  std::string prov;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::string body = line.substr(line.starts_with("# ") ? 2 : 1);
      if (body.starts_with("change_points")) {
        RegimeSchedule sched;
        std::istringstream ss(body.substr(std::string("change_points").size()));
        for (std::string tok; std::getline(ss, tok, ',');)
          if (!tok.empty()) sched.change_points.push_back(std::stoll(tok));
        trace.schedule = std::move(sched);
      } else {
        if (!prov.empty()) prov += '\n';
        prov += body;
      }
      continue;
    }
    if (!saw_header) {
      if (!line.starts_with("t,"))
        throw std::invalid_argument("trace: missing t,b1,... header");
      n_cols = static_cast<int>(std::count(line.begin(), line.end(), ','));
      saw_header = true;
      continue;
    }
    std::istringstream ss(line);
    std::string tok;
    std::getline(ss, tok, ',');
    const long long t = std::stoll(tok);
    if (t != static_cast<long long>(trace.requests.size()) + 1)
      throw std::invalid_argument("trace: slots must run 1..T without gaps or repeats");
    JobRequest b;
    while (std::getline(ss, tok, ',')) b.amounts.push_back(std::stoi(tok));
    if (static_cast<int>(b.amounts.size()) != n_cols)
      throw std::invalid_argument("trace: row width does not match header");
    trace.requests.push_back(std::move(b));
  }
  if (!saw_header) throw std::invalid_argument("trace: empty file");
  trace.horizon = static_cast<long long>(trace.requests.size());
  trace.provenance = std::move(prov);
  return trace;
}

}  // namespace netres
