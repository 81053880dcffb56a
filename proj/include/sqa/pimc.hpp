#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "sqa/rng.hpp"
#include "sqa/spike_model.hpp"

namespace sqa {

/// Parameters of the Trotterized chain at one value of the adiabatic knob.
///
/// The stationary weight is
///   log pi(x) = -(beta s / L) sum_i f(|x_i|) + J(x) ln tanh(omega) + const,
/// with omega = beta (1-s) / L and J(x) the number of (spin, slice) positions
/// whose bit differs from the next slice, slices taken periodically.
class PimcConfig {
 public:
  PimcConfig(const SpikeParams& params, double beta, int slices, double s, CostMode mode = CostMode::Spike);

  const SpikeParams& params() const { return params_; }
  CostMode mode() const { return cost_.mode(); }
  const CostTable& cost() const { return cost_; }
  double beta() const { return beta_; }
  int slices() const { return slices_; }
  double s() const { return s_; }
  double omega() const { return omega_; }
  /// ln tanh(omega); -infinity at s = 1.
  double log_tanh_omega() const { return log_tanh_omega_; }
  /// beta s / L, the weight of one unit of slice cost.
  double cost_scale() const { return cost_scale_; }
  std::int64_t sites() const { return static_cast<std::int64_t>(params_.n) * slices_; }

  /// Change of log pi when one bit flips, from the slice-weight direction
  /// (+1 or -1), the band indicator change and the jump change.
  double log_ratio(int weight_step, int spike_step, int jump_step) const;

  /// min(1, exp(log_ratio)) tabulated over the 2 x 3 x 3 possible moves.
  double acceptance(int weight_step, int spike_step, int jump_step) const {
    return accept_[static_cast<std::size_t>(((weight_step + 1) / 2 * 3 + spike_step + 1) * 3 + jump_step / 2 + 1)];
  }

 private:
  SpikeParams params_;
  CostTable cost_;
  double beta_;
  int slices_;
  double s_;
  double omega_;
  double log_tanh_omega_;
  double cost_scale_;
  std::array<double, 18> accept_{};
};

/// Change in slice weight, band membership and jump count caused by one flip.
struct FlipDelta {
  int weight_step;  // +1 or -1
  int spike_step;   // -1, 0, +1
  int jump_step;    // -2, 0, +2
};

/// L x n bit configuration stored slice-major in 64-bit words, with the
/// per-slice weights, band flags, total jump count, weight sum and spike time
/// kept in sync on every flip.
class WorldlineState {
 public:
  WorldlineState(const SpikeParams& params, int slices);

  static WorldlineState random(const SpikeParams& params, int slices, Rng& rng);

  int n() const { return n_; }
  int slices() const { return slices_; }
  int words_per_slice() const { return words_per_slice_; }

  bool bit(int slice, int spin) const {
    return (bits_[word_index(slice, spin)] >> (spin & 63)) & 1ULL;
  }

  std::span<const std::uint64_t> slice_words(int slice) const {
    return {bits_.data() + static_cast<std::size_t>(slice) * words_per_slice_,
            static_cast<std::size_t>(words_per_slice_)};
  }
  std::span<const std::uint64_t> words() const { return bits_; }

  int slice_weight(int slice) const { return weights_[static_cast<std::size_t>(slice)]; }
  bool slice_in_spike(int slice) const { return in_spike_[static_cast<std::size_t>(slice)] != 0; }
  std::int64_t jump_count() const { return jumps_; }
  std::int64_t weight_sum() const { return weight_sum_; }
  /// Number of slices whose weight lies in the spike band.
  std::int64_t spike_time() const { return spike_time_; }
  /// Sum over slices of f(weight), formed from the integer caches.
  double cost_sum(const CostTable& cost) const {
    return static_cast<double>(weight_sum_) + cost.effective_height() * static_cast<double>(spike_time_);
  }
  int min_slice_weight() const;

  FlipDelta flip_delta(int slice, int spin) const;
  /// Flips one bit and updates every cache in O(1).
  void flip(int slice, int spin, const FlipDelta& delta);
  void flip(int slice, int spin) { flip(slice, spin, flip_delta(slice, spin)); }

  /// Overwrites the bits of a slice (used by checkpoint loading and tests) and
  /// recomputes all caches.
  void assign_words(std::span<const std::uint64_t> words);
  void set_bit(int slice, int spin, bool value);

  /// Recomputes caches from the bits and compares them with the stored ones.
  bool caches_consistent() const;

  /// Bits of one slice as 0/1 bytes.
  std::vector<std::uint8_t> slice_bits(int slice) const;

 private:
  std::size_t word_index(int slice, int spin) const {
    return static_cast<std::size_t>(slice) * words_per_slice_ + static_cast<std::size_t>(spin >> 6);
  }
  void recompute_caches();

  int n_;
  int slices_;
  int words_per_slice_;
  std::vector<std::uint8_t> band_;  // band indicator per weight 0..n
  std::vector<std::uint64_t> bits_;
  std::vector<int> weights_;
  std::vector<std::uint8_t> in_spike_;
  std::int64_t jumps_ = 0;
  std::int64_t weight_sum_ = 0;
  std::int64_t spike_time_ = 0;
};

/// log pi(x) up to -ln Z, from the caches. Returns -infinity at s = 1 when any
/// jump is present.
double log_weight(const WorldlineState& state, const PimcConfig& config);

/// Same quantity evaluated directly from the bits, without any cache.
double log_weight_from_bits(const WorldlineState& state, const PimcConfig& config);

/// Incremental log pi change for flipping (slice, spin).
double log_weight_delta(const WorldlineState& state, const PimcConfig& config, int slice, int spin);

struct StepResult {
  bool proposed = false;  // false when the lazy coin said stay
  bool accepted = false;
  int slice = -1;
  int spin = -1;
};

/// One step of the lazy single-site Metropolis kernel: with probability 1/2
/// stay, otherwise pick one of the nL bits uniformly and flip it with
/// probability min(1, pi(x') / pi(x)).
StepResult metropolis_step(WorldlineState& state, const PimcConfig& config, Rng& rng);

struct SweepStats {
  std::int64_t steps = 0;
  std::int64_t proposals = 0;
  std::int64_t accepted = 0;
  double acceptance_rate() const { return proposals ? static_cast<double>(accepted) / proposals : 0.0; }
};

SweepStats sweep(WorldlineState& state, const PimcConfig& config, std::int64_t steps, Rng& rng);

/// The bits of slice 0.
std::vector<std::uint8_t> slice_marginal_sample(const WorldlineState& state);

/// max(2, ceil(c n^2 beta^{3/2})).
int default_slice_count(int n, double beta, double c = 1.0);

inline constexpr int kEnumerateMaxSites = 20;
inline constexpr int kTransitionMaxSites = 14;

/// Index of a configuration in the enumeration tables: bit (i n + j) holds
/// spin j of slice i.
std::uint64_t config_index(const WorldlineState& state);
WorldlineState state_from_index(const SpikeParams& params, int slices, std::uint64_t index);

/// Exact normalized pi over all 2^{nL} configurations. Refuses nL > 20.
std::vector<double> enumerate_pi(const PimcConfig& config);

/// Explicit lazy Metropolis kernel on {0,1}^{nL} in sparse form: row x has
/// the diagonal entry and one entry per site for the neighbour x ^ (1 << site).
struct TransitionMatrix {
  int sites = 0;
  std::uint64_t dim = 0;
  std::vector<double> diagonal;
  std::vector<double> flip;  // flip[x * sites + site]

  double operator()(std::uint64_t x, int site) const { return flip[x * static_cast<std::uint64_t>(sites) + site]; }
  double row_sum(std::uint64_t x) const;
};

/// Refuses nL > 14.
TransitionMatrix transition_matrix(const PimcConfig& config);

}  // namespace sqa
