#pragma once

#include <cstdint>
#include <functional>
#include <stop_token>
#include <vector>

#include "sqa/pimc.hpp"
#include "sqa/run_report.hpp"
#include "sqa/spike_model.hpp"

namespace sqa {

/// c n^{1/2 + alpha + eta}.
double default_beta(const SpikeParams& p, double c = 1.0);

struct Schedule {
  std::vector<double> s_values;  // uniform from 0 to 1 - delta_s
  double delta_s = 0.0;
  std::int64_t steps_per_s = 0;  // ceil(sweeps_multiplier * n L) single-site proposals
  double beta = 0.0;
  int slices = 0;
};

/// delta_s = c_s / (n beta (1 + ln n)). The grid has max(2, floor(1/delta_s))
/// uniformly spaced points from 0 to 1 - delta_s, so the realized spacing is
/// within one grid cell of delta_s.
Schedule build_schedule(int n, double beta, int slices, double c_s = 1.0, double sweeps_multiplier = 10.0);

struct SqaKnobs {
  Schedule schedule;
  std::uint64_t seed = 0;
  double burn_in_sweeps = 5.0;  // at s = 0, in units of nL proposals
  CostMode mode = CostMode::Spike;
};

/// Knobs from the default formulas: beta = c_beta n^{1/2+alpha+eta},
/// L = max(2, ceil(c_L n^2 beta^{3/2})), delta_s from c_s.
SqaKnobs default_sqa_knobs(const SpikeParams& p, CostMode mode, std::uint64_t seed, double c_beta = 1.0,
                           double c_L = 1.0, double c_s = 1.0, double sweeps_multiplier = 10.0);

/// Called after each stage with the stage index and the state that is about to
/// be carried into the next stage.
using StageObserver = std::function<void(std::size_t stage, double s, const WorldlineState& state)>;

/// Anneals from uniform random bits at s = 0 through the schedule, carrying
/// the state from each s to the next. The final sample is the cheapest slice
/// at the last s; the best slice seen anywhere in the run is also reported.
/// A stop request ends the run early with `complete = false`.
RunReport run_sqa(const SpikeParams& p, const SqaKnobs& knobs, std::stop_token stop = {},
                  const StageObserver& observer = {});

/// Total single-site proposals run_sqa spends, including burn-in.
std::int64_t sqa_step_budget(const SpikeParams& p, const SqaKnobs& knobs);

}  // namespace sqa
