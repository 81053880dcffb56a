#include "sqa/exact_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "sqa/dense_oracle.hpp"
#include "sqa/errors.hpp"
#include "sqa/tridiagonal.hpp"

namespace sqa {
namespace {

void check_s(double s) {
  if (!(s >= 0.0 && s <= 1.0)) throw DomainError("adiabatic parameter s must lie in [0, 1] (got " + std::to_string(s) + ")");
}

void check_beta(double beta) {
  if (!(beta >= 0.0) || !std::isfinite(beta)) {
    throw DomainError("inverse temperature beta must be finite and >= 0 (got " + std::to_string(beta) + ")");
  }
}

double log_binomial(int n, int k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

double golden_section_min(const SpikeParams& p, CostMode mode, double a, double b, double& best_s) {
  constexpr double invphi = 0.6180339887498949;
  double c = b - invphi * (b - a);
  double d = a + invphi * (b - a);
  double fc = symmetric_gap(p, c, mode);
  double fd = symmetric_gap(p, d, mode);
  while (b - a > 1e-10) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - invphi * (b - a);
      fc = symmetric_gap(p, c, mode);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + invphi * (b - a);
      fd = symmetric_gap(p, d, mode);
    }
  }
  if (fc < fd) {
    best_s = c;
    return fc;
  }
  best_s = d;
  return fd;
}

}  // namespace

SymmetricHamiltonian symmetric_hamiltonian(const SpikeParams& p, double s, CostMode mode) {
  return sector_hamiltonian(p, 0, s, mode);
}

SymmetricHamiltonian sector_hamiltonian(const SpikeParams& p, int q, double s, CostMode mode) {
  validate(p, mode);
  check_s(s);
  if (q < 0 || 2 * q > p.n) throw DomainError("spin sector index q out of range");
  SymmetricHamiltonian h;
  h.n = p.n;
  h.s = s;
  const int dim = p.n - 2 * q + 1;
  h.diag.resize(static_cast<std::size_t>(dim));
  h.offdiag.resize(static_cast<std::size_t>(dim - 1));
  for (int i = 0; i < dim; ++i) {
    const int k = q + i;
    h.diag[static_cast<std::size_t>(i)] = s * cost(p, k, mode);
    if (i + 1 < dim) {
      const double amp = std::sqrt(static_cast<double>(k + 1 - q) * static_cast<double>(p.n - q - k));
      h.offdiag[static_cast<std::size_t>(i)] = -(1.0 - s) * amp;
    }
  }
  return h;
}

SymmetricSpectrum symmetric_ground_and_gap(const SpikeParams& p, double s, CostMode mode) {
  const SymmetricHamiltonian h = symmetric_hamiltonian(p, s, mode);
  SymmetricSpectrum out;
  out.energies = tridiagonal_eigensystem(h.diag, h.offdiag, false).values;
  out.ground_vector = tridiagonal_eigenvector(h.diag, h.offdiag, out.energies[0]);
  out.gap = out.energies.size() > 1 ? out.energies[1] - out.energies[0] : 0.0;
  return out;
}

double symmetric_gap(const SpikeParams& p, double s, CostMode mode) {
  const SymmetricHamiltonian h = symmetric_hamiltonian(p, s, mode);
  const auto low = tridiagonal_lowest(h.diag, h.offdiag, 2);
  return low[1] - low[0];
}

std::vector<double> default_s_grid(int points) {
  std::vector<double> grid(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) grid[static_cast<std::size_t>(i)] = static_cast<double>(i) / points;
  return grid;
}

GapScan min_gap_scan(const SpikeParams& p, std::span<const double> s_grid, CostMode mode) {
  if (s_grid.empty()) throw DomainError("s grid is empty");
  if (s_grid.size() < 100) throw DomainError("s grid needs at least 100 points");
  for (std::size_t i = 0; i < s_grid.size(); ++i) {
    check_s(s_grid[i]);
    if (i > 0 && !(s_grid[i] > s_grid[i - 1])) throw DomainError("s grid must be strictly increasing");
  }
  validate(p, mode);

  GapScan scan;
  scan.curve.reserve(s_grid.size());
  for (double s : s_grid) scan.curve.push_back({s, symmetric_gap(p, s, mode)});

  const std::size_t m = scan.curve.size();
  std::vector<std::size_t> minima;
  for (std::size_t i = 0; i < m; ++i) {
    const double g = scan.curve[i].gap;
    const bool left_ok = i == 0 || g <= scan.curve[i - 1].gap;
    const bool right_ok = i + 1 == m || g <= scan.curve[i + 1].gap;
    if (left_ok && right_ok) minima.push_back(i);
  }
  std::sort(minima.begin(), minima.end(),
            [&](std::size_t a, std::size_t b) { return scan.curve[a].gap < scan.curve[b].gap; });
  if (minima.size() > 8) minima.resize(8);

  scan.delta_min = scan.curve[minima.front()].gap;
  scan.s_star = scan.curve[minima.front()].s;
  for (std::size_t i : minima) {
    const double a = scan.curve[i == 0 ? 0 : i - 1].s;
    const double b = scan.curve[i + 1 == m ? m - 1 : i + 1].s;
    if (!(b > a)) continue;
    double s_ref = 0.0;
    const double g = golden_section_min(p, mode, a, b, s_ref);
    if (g < scan.delta_min) {
      scan.delta_min = g;
      scan.s_star = s_ref;
    }
  }
  return scan;
}

std::vector<SpinSector> spin_sectors(int n) {
  if (n < 1) throw DomainError("spin_sectors needs n >= 1");
  std::vector<SpinSector> sectors;
  for (int q = 0; 2 * q <= n; ++q) {
    SpinSector sec;
    sec.q = q;
    sec.dim = n - 2 * q + 1;
    // C(n,q) - C(n,q-1) = C(n,q) (n-2q+1)/(n-q+1)
    sec.log_multiplicity = log_binomial(n, q) + std::log(static_cast<double>(n - 2 * q + 1)) -
                           std::log(static_cast<double>(n - q + 1));
    sectors.push_back(sec);
  }

  if (n <= 60) {
    // Exact integer bookkeeping.
    unsigned long long total = 0;
    unsigned long long prev = 0;
    unsigned long long binom = 1;  // C(n, q)
    for (int q = 0; 2 * q <= n; ++q) {
      if (q > 0) {
        prev = binom;
        binom = binom * static_cast<unsigned long long>(n - q + 1) / static_cast<unsigned long long>(q);
      }
      total += (binom - (q > 0 ? prev : 0ULL)) * static_cast<unsigned long long>(n - 2 * q + 1);
    }
    if (total != (1ULL << n)) throw InternalError("spin sector dimensions do not partition 2^n");
  } else {
    double rel = 0.0;
    for (const auto& sec : sectors) rel += std::exp(sec.log_multiplicity + std::log(sec.dim) - n * std::log(2.0));
    if (std::abs(rel - 1.0) > 1e-9) throw InternalError("spin sector dimensions do not partition 2^n");
  }
  return sectors;
}

WeightDistribution sector_gibbs_marginal(const SpikeParams& p, double s, double beta, CostMode mode) {
  validate(p, mode);
  check_s(s);
  check_beta(beta);
  const int n = p.n;

  struct Block {
    double log_mult;
    int q;
    TridiagonalEigen eig;
  };
  std::vector<Block> blocks;
  double e_min = std::numeric_limits<double>::infinity();
  for (const auto& sec : spin_sectors(n)) {
    const SymmetricHamiltonian h = sector_hamiltonian(p, sec.q, s, mode);
    Block b{sec.log_multiplicity, sec.q, tridiagonal_eigensystem(h.diag, h.offdiag, true)};
    e_min = std::min(e_min, b.eig.values.front());
    blocks.push_back(std::move(b));
  }

  // log of (multiplicity * Boltzmann factor), shifted by the largest one.
  double log_max = -std::numeric_limits<double>::infinity();
  for (const auto& b : blocks) {
    for (double e : b.eig.values) log_max = std::max(log_max, b.log_mult - beta * (e - e_min));
  }

  WeightDistribution out;
  out.probs.assign(static_cast<std::size_t>(n) + 1, 0.0);
  double z = 0.0;
  for (const auto& b : blocks) {
    for (std::size_t i = 0; i < b.eig.values.size(); ++i) {
      const double w = std::exp(b.log_mult - beta * (b.eig.values[i] - e_min) - log_max);
      z += w;
      const auto& v = b.eig.vectors[i];
      for (std::size_t j = 0; j < v.size(); ++j) out.probs[static_cast<std::size_t>(b.q) + j] += w * v[j] * v[j];
    }
  }
  if (!(z > 0.0) || !std::isfinite(z)) throw InternalError("Gibbs partition function overflowed");
  for (double& pk : out.probs) pk /= z;
  return out;
}

double tv_to_ground(const SpikeParams& p, double s, double beta, CostMode mode, ThermalSpace space) {
  check_beta(beta);
  std::vector<double> energies;
  if (space == ThermalSpace::Full) {
    if (p.n > kDenseMaxQubits) {
      throw DomainError("full-space trace distance needs dense diagonalization; n <= 12 required");
    }
    const DenseSpectrum spec = dense_spectrum(p, s, mode, false);
    energies.assign(spec.energies.data(), spec.energies.data() + spec.energies.size());
  } else {
    const SymmetricHamiltonian h = symmetric_hamiltonian(p, s, mode);
    energies = tridiagonal_eigensystem(h.diag, h.offdiag, false).values;
  }
  // Sum the excited weights apart from the ground term so tiny distances survive.
  const double e0 = energies.front();
  double excited = 0.0;
  for (std::size_t i = 1; i < energies.size(); ++i) excited += std::exp(-beta * (energies[i] - e0));
  return 2.0 * excited / (1.0 + excited);
}

ThermalErrorBounds thermal_error_bounds(int n, double gap, double beta) {
  if (!(gap >= 0.0)) throw DomainError("gap must be >= 0");
  check_beta(beta);
  ThermalErrorBounds b;
  const double x = beta * gap;
  b.lower = 2.0 / (1.0 + std::exp(x));
  b.log_upper = (n + 1) * std::log(2.0) - x;
  b.upper = std::min(2.0, std::exp(b.log_upper));
  b.sector_upper = std::min(2.0, std::exp(std::log(2.0 * n) - x));
  return b;
}

}  // namespace sqa
