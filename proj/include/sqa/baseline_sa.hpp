#pragma once

#include <cstdint>
#include <stop_token>
#include <vector>

#include "sqa/run_report.hpp"
#include "sqa/spike_model.hpp"

namespace sqa {

struct SaConfig {
  SpikeParams params;
  CostMode mode = CostMode::Spike;
  std::vector<double> beta_schedule;  // ascending
  std::int64_t steps_per_beta = 0;
  std::uint64_t seed = 0;
};

/// `stages` inverse temperatures from beta0 to beta_max, evenly spaced in log.
std::vector<double> geometric_beta_schedule(double beta0, double beta_max, int stages);

/// Default: 0.1 to 2n over 100 stages.
SaConfig default_sa_config(const SpikeParams& p, CostMode mode, std::uint64_t seed, std::int64_t steps_per_beta);

/// Lazy single-bit Metropolis on {0,1}^n with stationary weight
/// exp(-beta f(|x|)) at each beta, started from uniform random bits.
RunReport run_sa(const SaConfig& config, std::stop_token stop = {});

/// Dense row-major kernel of the SA chain at one beta (n <= 12).
std::vector<double> sa_transition_matrix(const SpikeParams& p, CostMode mode, double beta);

}  // namespace sqa
