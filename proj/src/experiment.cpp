#include "netres/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "netres/ew_policy.hpp"
#include "netres/rng.hpp"
#include "netres/svg_plot.hpp"

namespace netres {

namespace fs = std::filesystem;
using nlohmann::json;

double ExperimentConfig::resolved_eta() const {
  if (eta > 0) return eta;
  return 1.0 / std::sqrt(static_cast<double>(horizon));
}

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write: " + path.string());
  out << text;
  if (!out) throw std::runtime_error("short write: " + path.string());
}

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

ScenarioSpec scenario_from_json(const json& j) {
  ScenarioSpec s;
  s.kind = j.value("kind", s.kind);
  if (s.kind != "piecewise" && s.kind != "poisson" && s.kind != "trace")
    throw std::invalid_argument("config: scenario kind must be piecewise|poisson|trace");
  if (j.contains("levels")) s.levels = j.at("levels").get<std::vector<std::vector<int>>>();
  if (j.contains("change_points"))
    s.change_points = j.at("change_points").get<std::vector<long long>>();
  s.region_mean = j.value("region_mean", s.region_mean);
  if (j.contains("mean_choices")) s.mean_choices = j.at("mean_choices").get<std::vector<int>>();
  s.exp_lengths = j.value("exp_lengths", s.exp_lengths);
  if (j.contains("seed")) s.seed = j.at("seed").get<std::uint64_t>();
  s.trace_path = j.value("trace_path", s.trace_path);
  return s;
}

json scenario_to_json(const ScenarioSpec& s) {
  json j;
  j["kind"] = s.kind;
  if (s.kind == "piecewise") {
    j["levels"] = s.levels;
    j["change_points"] = s.change_points;
  } else if (s.kind == "poisson") {
    j["region_mean"] = s.region_mean;
    j["mean_choices"] = s.mean_choices;
    j["exp_lengths"] = s.exp_lengths;
  } else {
    j["trace_path"] = s.trace_path;
  }
  if (s.seed) j["seed"] = *s.seed;
  return j;
}

RlParams rl_from_json(const json& j, double top_lambda) {
  RlParams p;
  p.lambda = top_lambda;
  if (j.is_null()) return p;
  p.alpha = j.value("alpha", p.alpha);
  p.epsilon = j.value("epsilon", p.epsilon);
  p.history = j.value("history", p.history);
  p.back_iters = j.value("back_iters", p.back_iters);
  p.levels = j.value("levels", p.levels);
  p.mfs_per_input = j.value("mfs_per_input", p.mfs_per_input);
  p.lambda = j.value("lambda", p.lambda);
  p.hard_penalty = j.value("hard_penalty", p.hard_penalty);
  p.hard_penalty_value = j.value("hard_penalty_value", p.hard_penalty_value);
  return p;
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text) {
  json j = json::parse(text);
  ExperimentConfig cfg;
  const json& net = j.at("network");
  if (net.is_string())
    cfg.network = NetworkConfig::from_json_file(net.get<std::string>());
  else
    cfg.network = NetworkConfig::from_json_text(net.dump());
  if (j.contains("scenario")) cfg.scenario = scenario_from_json(j.at("scenario"));
  cfg.horizon = j.value("horizon", cfg.horizon);
  cfg.algo = j.value("algo", cfg.algo);
  if (cfg.algo != "ew" && cfg.algo != "rl" && cfg.algo != "both")
    throw std::invalid_argument("config: algo must be ew|rl|both");
  if (j.contains("seeds")) {
    cfg.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    if (cfg.seeds.empty()) throw std::invalid_argument("config: seeds must be nonempty");
  }
  cfg.lambda = j.value("lambda", cfg.lambda);
  cfg.eta = j.value("eta", cfg.eta);
  cfg.delta = j.value("delta", cfg.delta);
  cfg.rl = rl_from_json(j.contains("rl") ? j.at("rl") : json(nullptr), cfg.lambda);
  cfg.aggregate_caps = j.value("aggregate_caps", cfg.aggregate_caps);
  cfg.dump_distributions = j.value("dump_distributions", cfg.dump_distributions);
  cfg.out_dir = j.value("out_dir", cfg.out_dir);
  if (cfg.horizon < 1) throw std::invalid_argument("config: horizon must be >= 1");
  if (cfg.lambda < 0) throw std::invalid_argument("config: lambda must be >= 0");
  if (cfg.delta <= 0 || cfg.delta >= 1) throw std::invalid_argument("config: delta in (0,1)");
  return cfg;
}

ExperimentConfig ExperimentConfig::from_json_file(const std::string& path) {
  return from_json_text(read_file(path));
}

std::string ExperimentConfig::to_json_text() const {
  json j;
  j["network"] = json::parse(network.to_json_text());
  j["scenario"] = scenario_to_json(scenario);
  j["horizon"] = horizon;
  j["algo"] = algo;
  j["seeds"] = seeds;
  j["lambda"] = lambda;
  j["eta"] = resolved_eta();
  j["delta"] = delta;
  j["rl"] = {{"alpha", rl.alpha},
             {"epsilon", rl.epsilon},
             {"history", rl.history},
             {"back_iters", rl.back_iters},
             {"levels", rl.levels},
             {"mfs_per_input", rl.mfs_per_input},
             {"lambda", rl.lambda},
             {"hard_penalty", rl.hard_penalty},
             {"hard_penalty_value", rl.hard_penalty_value}};
  j["aggregate_caps"] = aggregate_caps;
  j["dump_distributions"] = dump_distributions;
  j["out_dir"] = out_dir;
  return j.dump(2) + "\n";
}

int worker_count(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("NETRES_WORKERS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc > 0 ? static_cast<int>(hc) : 1;
}

namespace {

RequestTrace make_trace(const ExperimentConfig& cfg, std::uint64_t master_seed) {
  const ScenarioSpec& s = cfg.scenario;
  RequestTrace trace;
  if (s.kind == "piecewise") {
    trace = gen_piecewise_fixed(cfg.network, s.levels, s.change_points, cfg.horizon);
  } else if (s.kind == "poisson") {
    PoissonSceneParams p;
    p.seed = s.seed ? *s.seed : derive_seed(master_seed, "trace");
    p.horizon = cfg.horizon;
    p.region_mean = s.region_mean;
    p.mean_choices = s.mean_choices;
    p.exp_lengths = s.exp_lengths;
    trace = gen_poisson_regimes(cfg.network, p);
  } else {
    trace = load_trace(s.trace_path);
    if (trace.horizon != cfg.horizon)
      throw std::invalid_argument("config: trace horizon does not match configured horizon");
  }
  validate_trace(trace, cfg.network);
  return trace;
}

AlgoRun run_ew(const ExperimentConfig& cfg, const ActionSpace& space, C0Cache& cache,
               const RequestTrace& trace, const HindsightSolution& hindsight,
               const ThetaBound& theta, std::uint64_t seed) {
  AlgoRun run;
  run.algo = "ew";
  const long long T = trace.horizon;
  run.rows.reserve(T);
  EwPolicy policy(space, {cfg.resolved_eta(), cfg.lambda}, cfg.network.budget);
  Rng rng(derive_seed(seed, "ew-action"));

  std::vector<double> prev_dist;
  std::vector<double> p_t;
  double cum_c = 0, cum_exp_c = 0, cum_exp_digamma = 0;
  for (long long t = 1; t <= T; ++t) {
    p_t = policy.distribution();  // P^t, before this slot's observation
    const int a = policy.sample_action(rng);
    const JobRequest& b = trace.requests[t - 1];
    const std::vector<double>& row = cache.row(b);
    const EwPolicy::Expected exp = policy.expected_costs(row);
    const double c = space.reservation_costs[a];
    const double c0 = row[a];
    if (!theta.heuristic && c > theta.value + 1e-9)
      throw std::logic_error("ew: realized reservation cost exceeds the exact cost bound");

    policy.observe_row(row);
    cum_exp_digamma += policy.expected_digamma(p_t);

    SlotRecord rec;
    rec.t = t;
    rec.action_index = a;
    rec.reservation_cost = c;
    rec.blocking_cost = c0;
    rec.expected_reservation_cost = exp.reservation;
    rec.expected_blocking_cost = exp.blocking;
    cum_c += c;
    cum_exp_c += exp.reservation;
    rec.realized_regret = cum_c - hindsight.action_cost * static_cast<double>(t);
    rec.expected_regret = cum_exp_c - hindsight.action_cost * static_cast<double>(t);
    rec.avg_regret = rec.realized_regret / static_cast<double>(t);
    rec.avg_expected_digamma = cum_exp_digamma / static_cast<double>(t);
    rec.dist_l2 = prev_dist.empty() ? 0.0 : distribution_distance(p_t, prev_dist);
    run.rows.push_back(rec);

    run.total_reservation += c;
    run.total_blocking += c0;
    if (cfg.dump_distributions) run.distributions.push_back(p_t);
    prev_dist.swap(p_t);
  }
  return run;
}

AlgoRun run_rl(const ExperimentConfig& cfg, const ActionSpace& space, C0Cache& cache,
               const RequestTrace& trace, const HindsightSolution& hindsight,
               std::uint64_t seed) {
  AlgoRun run;
  run.algo = "rl";
  const long long T = trace.horizon;
  run.rows.reserve(T);
  FuzzyActorCritic agent(cfg.network, space, cfg.rl, derive_seed(seed, "rl"));

  double cum_c = 0, cum_c0 = 0;
  int prev_action = -1;
  for (long long t = 1; t <= T; ++t) {
    const int a = agent.step(&cache);
    const JobRequest& b = trace.requests[t - 1];
    const double c = space.reservation_costs[a];
    const double c0 = cache.value(a, b);
    agent.push_request(b);

    SlotRecord rec;
    rec.t = t;
    rec.action_index = a;
    rec.reservation_cost = c;
    rec.blocking_cost = c0;
    rec.expected_reservation_cost = c;  // deterministic given the seed
    rec.expected_blocking_cost = c0;
    cum_c += c;
    cum_c0 += c0;
    rec.realized_regret = cum_c - hindsight.action_cost * static_cast<double>(t);
    rec.expected_regret = rec.realized_regret;
    rec.avg_regret = rec.realized_regret / static_cast<double>(t);
    // a deterministic policy has no digamma expectation; report the run's own
    // positive-part average budget excess
    rec.avg_expected_digamma =
        std::max(0.0, cum_c0 / static_cast<double>(t) - cfg.network.budget);
    rec.dist_l2 = (t == 1 || a == prev_action) ? 0.0 : std::sqrt(2.0);
    run.rows.push_back(rec);

    run.total_reservation += c;
    run.total_blocking += c0;
    prev_action = a;
  }
  run.clamp_events = agent.clamp_events();
  return run;
}

SeedResult run_one_seed(const ExperimentConfig& cfg, const ActionSpace& space, C0Cache& cache,
                        const ThetaBound& theta, std::uint64_t seed) {
  SeedResult res;
  res.seed = seed;
  res.trace = make_trace(cfg, seed);
  res.hindsight = hindsight_optimum(cfg.network, space, res.trace.requests, cache);

  const bool want_ew = cfg.algo == "ew" || cfg.algo == "both";
  const bool want_rl = cfg.algo == "rl" || cfg.algo == "both";
  if (want_ew)
    res.runs.push_back(run_ew(cfg, space, cache, res.trace, res.hindsight, theta, seed));
  if (want_rl) res.runs.push_back(run_rl(cfg, space, cache, res.trace, res.hindsight, seed));

  if (want_ew) {
    const AlgoRun& ew = res.runs.front();
    const double eta = cfg.resolved_eta();
    const long long T = res.trace.horizon;
    res.regret_cert.applicable = !theta.heuristic && res.hindsight.feasible;
    res.constraint_cert.applicable = res.regret_cert.applicable;
    if (res.regret_cert.applicable) {
      res.regret_cert.lhs = ew.rows.back().realized_regret;
      res.regret_cert.rhs =
          regret_bound_rhs(theta.value, eta, cfg.lambda, space.size(), cfg.delta, T);
      res.regret_cert.ok = res.regret_cert.lhs <= res.regret_cert.rhs;
      res.constraint_cert.lhs = ew.rows.back().avg_expected_digamma;
      res.constraint_cert.rhs = constraint_bound_rhs(theta.value, eta, cfg.lambda, space.size(),
                                                     T, res.hindsight.action_cost);
      res.constraint_cert.ok = res.constraint_cert.lhs <= res.constraint_cert.rhs;
    }
  }
  return res;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config, int n_workers,
                                C0Cache* shared_cache, const ThetaBound* shared_theta) {
  ExperimentResult result;
  result.config = config;
  result.config.eta = config.resolved_eta();
  const int workers = worker_count(n_workers);

  // Space/cache either shared by the caller (same network across calls) or
  // local to this run.
  ActionSpace local_space;
  std::optional<C0Cache> local_cache;
  C0Cache* cache = shared_cache;
  if (!cache) {
    local_space = enumerate_actions(config.network);
    local_cache.emplace(config.network, local_space,
                        TransferOptions{.aggregate_caps = config.aggregate_caps});
    cache = &*local_cache;
  } else if (cache->options().aggregate_caps != config.aggregate_caps ||
             cache->config().to_json_text() != config.network.to_json_text()) {
    throw std::invalid_argument("run: shared cache built for a different instance");
  }
  const ActionSpace& space = cache->space();

  if (shared_theta) {
    result.theta = *shared_theta;
  } else {
    result.theta = cost_bound_theta(config.network, space, ThetaMode::kAuto, workers, cache);
  }
  result.kappa = penalty_kappa(result.config.eta, config.lambda, result.theta.value);

  result.seeds.resize(config.seeds.size());
  std::atomic<std::size_t> cursor{0};
  std::vector<std::string> errors(config.seeds.size());
  auto worker = [&] {
    std::size_t i;
    while ((i = cursor.fetch_add(1)) < config.seeds.size()) {
      try {
        result.seeds[i] = run_one_seed(result.config, space, *cache, result.theta,
                                       config.seeds[i]);
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    }
  };
  const int n_threads = std::min<int>(workers, static_cast<int>(config.seeds.size()));
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    for (int w = 0; w < n_threads; ++w) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
  }
  for (std::size_t i = 0; i < errors.size(); ++i)
    if (!errors[i].empty())
      throw std::runtime_error("seed " + std::to_string(config.seeds[i]) + ": " + errors[i]);

  // Exit policy: infeasible hindsight dominates; the constraint bound is a
  // hard certificate; the regret bound is probabilistic, so single seeds only
  // flag it and batches of >= 100 seeds fail on a > 5% violation rate.
  bool infeasible = false, constraint_fail = false;
  std::size_t regret_checked = 0, regret_violations = 0;
  for (const SeedResult& s : result.seeds) {
    if (!s.hindsight.feasible) infeasible = true;
    if (s.constraint_cert.applicable && !s.constraint_cert.ok) constraint_fail = true;
    if (s.regret_cert.applicable) {
      ++regret_checked;
      if (!s.regret_cert.ok) ++regret_violations;
    }
  }
  if (infeasible) {
    result.exit_code = 2;
  } else if (constraint_fail ||
             (regret_checked >= 100 &&
              static_cast<double>(regret_violations) > 0.05 * static_cast<double>(regret_checked))) {
    result.exit_code = 3;
  }
  return result;
}

std::string slot_csv_text(const std::vector<SlotRecord>& rows) {
  std::ostringstream out;
  out << "t,action_index,reservation_cost,blocking_cost,expected_reservation_cost,"
         "expected_blocking_cost,realized_regret,expected_regret,avg_regret,"
         "avg_expected_digamma,dist_l2\n";
  for (const SlotRecord& r : rows) {
    out << r.t << ',' << r.action_index << ',' << num(r.reservation_cost) << ','
        << num(r.blocking_cost) << ',' << num(r.expected_reservation_cost) << ','
        << num(r.expected_blocking_cost) << ',' << num(r.realized_regret) << ','
        << num(r.expected_regret) << ',' << num(r.avg_regret) << ','
        << num(r.avg_expected_digamma) << ',' << num(r.dist_l2) << '\n';
  }
  return out.str();
}

std::string summary_csv_text(const ExperimentResult& result, const SeedResult& seed) {
  std::ostringstream out;
  out << "key,value\n";
  out << "seed," << seed.seed << '\n';
  out << "algo," << result.config.algo << '\n';
  out << "horizon," << result.config.horizon << '\n';
  long long n_actions = 1;
  for (int cap : result.config.network.capacities)
    n_actions *= cap - result.config.network.reservation_floor + 1;
  out << "n_actions," << n_actions << '\n';
  out << "eta," << num(result.config.eta) << '\n';
  out << "lambda," << num(result.config.lambda) << '\n';
  out << "budget," << num(result.config.network.budget) << '\n';
  out << "delta," << num(result.config.delta) << '\n';
  out << "theta," << num(result.theta.value) << '\n';
  out << "theta_heuristic," << (result.theta.heuristic ? 1 : 0) << '\n';
  out << "kappa," << num(result.kappa) << '\n';
  out << "hindsight_action_index," << seed.hindsight.action_index << '\n';
  out << "hindsight_action_cost," << num(seed.hindsight.action_cost) << '\n';
  out << "hindsight_feasible," << (seed.hindsight.feasible ? 1 : 0) << '\n';
  out << "hindsight_worst_excess," << num(seed.hindsight.worst_excess) << '\n';
  for (const AlgoRun& run : seed.runs) {
    const SlotRecord& last = run.rows.back();
    out << run.algo << "_total_reservation," << num(run.total_reservation) << '\n';
    out << run.algo << "_total_blocking," << num(run.total_blocking) << '\n';
    out << run.algo << "_final_realized_regret," << num(last.realized_regret) << '\n';
    out << run.algo << "_final_expected_regret," << num(last.expected_regret) << '\n';
    out << run.algo << "_final_avg_regret," << num(last.avg_regret) << '\n';
    out << run.algo << "_final_avg_expected_digamma," << num(last.avg_expected_digamma) << '\n';
    if (run.algo == "rl") out << "rl_clamp_events," << run.clamp_events << '\n';
  }
  auto cert = [&out](const char* name, const BoundCertificate& c) {
    out << name << "_applicable," << (c.applicable ? 1 : 0) << '\n';
    if (c.applicable) {
      out << name << "_lhs," << num(c.lhs) << '\n';
      out << name << "_rhs," << num(c.rhs) << '\n';
      out << name << "_ok," << (c.ok ? 1 : 0) << '\n';
    }
  };
  cert("regret_bound", seed.regret_cert);
  cert("constraint_bound", seed.constraint_cert);
  return out.str();
}

namespace {

std::vector<double> column(const std::vector<SlotRecord>& rows, double SlotRecord::*field) {
  std::vector<double> out;
  out.reserve(rows.size());
  for (const SlotRecord& r : rows) out.push_back(r.*field);
  return out;
}

void emit_seed_dir(const ExperimentResult& result, const SeedResult& seed, const fs::path& dir) {
  fs::create_directories(dir);

  ExperimentConfig cfg_one = result.config;
  cfg_one.seeds = {seed.seed};
  write_file(dir / "config.json", cfg_one.to_json_text());
  write_file(dir / "trace.csv", trace_csv_text(seed.trace));
  for (const AlgoRun& run : seed.runs)
    write_file(dir / (run.algo + ".csv"), slot_csv_text(run.rows));
  write_file(dir / "summary.csv", summary_csv_text(result, seed));

  for (const AlgoRun& run : seed.runs) {
    if (run.distributions.empty()) continue;
    std::ostringstream out;
    for (const auto& dist : run.distributions) {
      for (std::size_t a = 0; a < dist.size(); ++a) out << (a ? "," : "") << num(dist[a]);
      out << '\n';
    }
    write_file(dir / (run.algo + "_distributions.csv"), out.str());
  }

  std::vector<double> vlines;
  if (seed.trace.schedule)
    for (long long cp : seed.trace.schedule->change_points)
      vlines.push_back(static_cast<double>(cp));

  const int N = result.config.network.n_servers();
  std::vector<PlotSeries> req_series(N);
  for (int n = 0; n < N; ++n) {
    req_series[n].label = "node " + std::to_string(n + 1);
    req_series[n].color = "";
    req_series[n].y.reserve(seed.trace.requests.size());
    for (const JobRequest& b : seed.trace.requests)
      req_series[n].y.push_back(static_cast<double>(b.amounts[n]));
  }
  write_svg_chart((dir / "requests.svg").string(), "Per-node job requests", "slot", "requests",
                  req_series, vlines);

  auto algo_chart = [&](const std::string& file, const std::string& title,
                        const std::string& ylab, double SlotRecord::*field) {
    std::vector<PlotSeries> series;
    for (const AlgoRun& run : seed.runs)
      series.push_back({run.algo, column(run.rows, field), ""});
    write_svg_chart((dir / file).string(), title, "slot", ylab, series, vlines);
  };
  algo_chart("avg_regret.svg", "Average regret", "avg regret", &SlotRecord::avg_regret);
  algo_chart("dist_l2.svg", "Distance between consecutive action distributions", "L2 distance",
             &SlotRecord::dist_l2);
  algo_chart("reservation_cost.svg", "Reservation cost per slot", "cost",
             &SlotRecord::reservation_cost);
  algo_chart("blocking_cost.svg", "Blocking cost per slot", "cost", &SlotRecord::blocking_cost);
}

}  // namespace

void emit_outputs(const ExperimentResult& result, const std::string& out_dir) {
  const fs::path root(out_dir);
  fs::create_directories(root);
  for (const SeedResult& seed : result.seeds)
    emit_seed_dir(result, seed, root / ("seed_" + std::to_string(seed.seed)));
}

int verify_run_dir(const std::string& dir, int n_workers) {
  const fs::path root(dir);
  if (!fs::is_directory(root)) {
    std::cerr << "verify: not a directory: " << dir << '\n';
    return 1;
  }
  std::vector<fs::path> seed_dirs;
  for (const auto& entry : fs::directory_iterator(root))
    if (entry.is_directory() && entry.path().filename().string().starts_with("seed_"))
      seed_dirs.push_back(entry.path());
  std::sort(seed_dirs.begin(), seed_dirs.end());
  if (seed_dirs.empty()) {
    std::cerr << "verify: no seed_* directories under " << dir << '\n';
    return 1;
  }

  int worst_rerun_code = 0;
  bool mismatch = false;
  for (const fs::path& sd : seed_dirs) {
    ExperimentConfig cfg;
    try {
      cfg = ExperimentConfig::from_json_file((sd / "config.json").string());
    } catch (const std::exception& e) {
      std::cerr << "verify: " << sd << ": " << e.what() << '\n';
      return 1;
    }
    ExperimentResult rerun = run_experiment(cfg, n_workers);
    worst_rerun_code = std::max(worst_rerun_code, rerun.exit_code);
    const SeedResult& seed = rerun.seeds.at(0);

    auto check = [&](const std::string& name, const std::string& regenerated) {
      const fs::path p = sd / name;
      if (!fs::exists(p)) {
        std::cerr << "verify: missing " << p << '\n';
        mismatch = true;
        return;
      }
      if (read_file(p.string()) != regenerated) {
        std::cerr << "verify: " << p << " differs from recomputation\n";
        mismatch = true;
      }
    };
    check("trace.csv", trace_csv_text(seed.trace));
    for (const AlgoRun& run : seed.runs) check(run.algo + ".csv", slot_csv_text(run.rows));
    check("summary.csv", summary_csv_text(rerun, seed));
  }
  if (mismatch) return 1;
  return worst_rerun_code;
}

}  // namespace netres
