#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "netres/network.hpp"

namespace netres {

// Regime r covers slots (change_points[r-1], change_points[r]] with
// change_points[-1] = 0; the final regime runs to the horizon. levels[r] is
// the per-server request level (fixed scenario) or Poisson mean (random
// scenario) of regime r.
struct RegimeSchedule {
  std::vector<long long> change_points;  // last slot of every regime but the final one
  std::vector<std::vector<double>> levels;
};

struct RequestTrace {
  long long horizon = 0;
  std::vector<JobRequest> requests;  // slot t at index t-1
  std::string provenance;            // human-readable generation note
  std::optional<RegimeSchedule> schedule;
};

// Deterministic piecewise-constant trace: every slot of regime r requests
// exactly levels[r].
RequestTrace gen_piecewise_fixed(const NetworkConfig& config,
                                 const std::vector<std::vector<int>>& levels,
                                 const std::vector<long long>& change_points, long long horizon);

struct PoissonSceneParams {
  std::uint64_t seed = 0;
  long long horizon = 5000;
  double region_mean = 250;                  // expected regime length in slots
  std::vector<int> mean_choices = {2, 3, 4, 5, 6};
  // 0 = clip requests at each server's capacity; otherwise at
  // min(clip, capacity)
  int clip = 0;
  bool exp_lengths = false;  // rounded-up exponential lengths instead of geometric
};

// Random-regime trace. Draw order per regime, all from one stream: length,
// then one Poisson mean per server sampled without replacement from
// mean_choices, then horizon * N clipped Poisson variates.
RequestTrace gen_poisson_regimes(const NetworkConfig& config, const PoissonSceneParams& params);

// CSV with `# `-prefixed provenance comments, then header t,b1,...,bN.
// Change points survive the round trip; levels do not.
std::string trace_csv_text(const RequestTrace& trace);
void save_trace(const RequestTrace& trace, const std::string& path);
RequestTrace load_trace(const std::string& path);

// throws std::invalid_argument when a slot is missing, duplicated, or a
// request component falls outside [0, capacity]
void validate_trace(const RequestTrace& trace, const NetworkConfig& config);

}  // namespace netres
