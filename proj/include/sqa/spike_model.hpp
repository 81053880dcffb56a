#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace sqa {

/// Selects between the spiked cost and the plain Hamming-weight cost.
enum class CostMode { Spike, Spikeless };

/// Parameters of the spike landscape f(w) = |w| + n^alpha on the band
/// n/4 - n^eta/2 <= |w| <= n/4 + n^eta/2, and f(w) = |w| elsewhere.
///
/// The band edges are kept as reals and compared against the integer weight
/// with inclusive inequalities; n/4 is never rounded, even when 4 does not
/// divide n.
struct SpikeParams {
  int n = 2;
  double alpha = 0.0;
  double eta = 0.0;

  double spike_height() const;
  double region_lo() const;
  double region_hi() const;
  bool in_spike(int k) const;
};

/// Builds validated parameters. Throws DomainError naming the violated condition.
SpikeParams make_spike_params(int n, double alpha, double eta, CostMode mode = CostMode::Spike);

/// Throws DomainError if `p` violates 0 <= alpha < 1 or 0 <= eta < 1. With the
/// spike active it also requires n >= 2 and the band to fit inside [0, n];
/// spikeless use only needs n >= 1.
void validate(const SpikeParams& p, CostMode mode = CostMode::Spike);

/// f evaluated at Hamming weight k. Throws DomainError for k outside [0, n].
double cost(const SpikeParams& p, int k, CostMode mode = CostMode::Spike);

/// f(k) and the band indicator tabulated for k = 0..n.
class CostTable {
 public:
  CostTable() = default;
  CostTable(const SpikeParams& p, CostMode mode);

  double operator()(int k) const { return values_[static_cast<std::size_t>(k)]; }
  bool in_spike(int k) const { return in_spike_[static_cast<std::size_t>(k)] != 0; }
  int n() const { return static_cast<int>(values_.size()) - 1; }
  CostMode mode() const { return mode_; }
  /// Height added inside the band; zero in spikeless mode.
  double effective_height() const { return effective_height_; }

 private:
  std::vector<double> values_;
  std::vector<std::uint8_t> in_spike_;
  CostMode mode_ = CostMode::Spike;
  double effective_height_ = 0.0;
};

enum class Regime { Constant, Polynomial, Exponential };

std::string to_string(Regime r);

/// Constant if alpha+eta <= 1/2, Polynomial if alpha+2eta <= 1 (and not
/// Constant), Exponential otherwise.
Regime classify_regime(const SpikeParams& p);

/// Asymptotic form of the minimum gap.
///
/// For Constant and Polynomial regimes `exponent` is the power-law exponent of
/// n (0 and 1/2 - alpha - eta). For the Exponential regime the gap behaves as
/// poly(n) exp(-c n^exponent) and `exponent` is the stretch alpha + 2eta - 1.
struct GapLaw {
  Regime regime;
  double exponent;
  bool stretched() const { return regime == Regime::Exponential; }
};

GapLaw predicted_gap_law(const SpikeParams& p);

}  // namespace sqa
