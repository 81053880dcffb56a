#pragma once

#include <span>
#include <vector>

#include "sqa/spike_model.hpp"

namespace sqa {

/// H(s) = (1-s) H0 + s Hf with H0 = -sum_i sigma^x_i, restricted to the
/// (n+1)-dimensional span of the Dicke states |k> (uniform superpositions of
/// weight-k bitstrings). diag[k] = s f(k); offdiag[k] couples |k> and |k+1>.
struct SymmetricHamiltonian {
  int n = 0;
  double s = 0.0;
  std::vector<double> diag;
  std::vector<double> offdiag;
};

SymmetricHamiltonian symmetric_hamiltonian(const SpikeParams& p, double s, CostMode mode = CostMode::Spike);

struct SymmetricSpectrum {
  std::vector<double> energies;       // ascending
  std::vector<double> ground_vector;  // amplitudes over k, unit norm, nonnegative for 0 < s < 1
  double gap = 0.0;                   // energies[1] - energies[0]
};

SymmetricSpectrum symmetric_ground_and_gap(const SpikeParams& p, double s, CostMode mode = CostMode::Spike);

/// Symmetric-sector gap only (two lowest eigenvalues by bisection).
double symmetric_gap(const SpikeParams& p, double s, CostMode mode = CostMode::Spike);

struct GapPoint {
  double s;
  double gap;
};

struct GapScan {
  double delta_min = 0.0;
  double s_star = 0.0;
  std::vector<GapPoint> curve;  // the input grid
};

/// `points` uniform values 0, 1/points, ..., 1 - 1/points.
std::vector<double> default_s_grid(int points = 512);

/// Minimum symmetric-sector gap. Every local minimum of the sampled curve is
/// refined by golden-section search on its two neighbouring grid cells down to
/// a bracket of 1e-10 in s. Throws DomainError for grids with fewer than 100
/// points or values outside [0, 1].
GapScan min_gap_scan(const SpikeParams& p, std::span<const double> s_grid, CostMode mode = CostMode::Spike);

/// Probability distribution over Hamming weight k = 0..n.
struct WeightDistribution {
  std::vector<double> probs;
};

/// One total-spin block J = n/2 - q of the permutation-symmetric Hamiltonian.
/// It covers weights q..n-q and occurs with multiplicity C(n,q) - C(n,q-1).
struct SpinSector {
  int q = 0;
  int dim = 0;
  double log_multiplicity = 0.0;
};

/// All sectors q = 0..floor(n/2). Checks that sum of multiplicity * dim equals 2^n.
std::vector<SpinSector> spin_sectors(int n);

/// Sector matrix: diag over k = q..n-q is s f(k), off-diagonal between k and
/// k+1 is -(1-s) sqrt((k+1-q)(n-q-k)).
SymmetricHamiltonian sector_hamiltonian(const SpikeParams& p, int q, double s, CostMode mode = CostMode::Spike);

/// Exact Hamming-weight marginal of the full 2^n Gibbs state exp(-beta H(s)) / Z,
/// assembled from the spin sectors.
WeightDistribution sector_gibbs_marginal(const SpikeParams& p, double s, double beta,
                                         CostMode mode = CostMode::Spike);

enum class ThermalSpace { Full, SymmetricSector };

/// Trace distance || sigma - |psi0><psi0| ||_1 = 2 (Z - 1) / Z with energies
/// measured from the ground energy. Full uses dense diagonalization (n <= 12);
/// SymmetricSector uses only the Dicke block and is labelled as such.
double tv_to_ground(const SpikeParams& p, double s, double beta, CostMode mode = CostMode::Spike,
                    ThermalSpace space = ThermalSpace::Full);

struct ThermalErrorBounds {
  double lower = 0.0;         // 2 / (1 + e^{beta gap})
  double upper = 0.0;         // min(2, 2^{n+1} e^{-beta gap})
  double log_upper = 0.0;     // (n+1) ln 2 - beta gap, unclamped
  double sector_upper = 0.0;  // min(2, 2 n e^{-beta gap}): n excited Dicke states instead of 2^n
};

ThermalErrorBounds thermal_error_bounds(int n, double gap, double beta);

}  // namespace sqa
