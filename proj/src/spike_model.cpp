#include "sqa/spike_model.hpp"

#include <cmath>
#include <sstream>

#include "sqa/errors.hpp"

namespace sqa {

double SpikeParams::spike_height() const { return std::pow(static_cast<double>(n), alpha); }

double SpikeParams::region_lo() const {
  return n / 4.0 - std::pow(static_cast<double>(n), eta) / 2.0;
}

double SpikeParams::region_hi() const {
  return n / 4.0 + std::pow(static_cast<double>(n), eta) / 2.0;
}

bool SpikeParams::in_spike(int k) const {
  const double kk = static_cast<double>(k);
  return region_lo() <= kk && kk <= region_hi();
}

void validate(const SpikeParams& p, CostMode mode) {
  std::ostringstream msg;
  const bool spike = mode == CostMode::Spike;
  if (p.n < (spike ? 2 : 1)) {
    msg << "n must be >= " << (spike ? 2 : 1) << " (got " << p.n << ")";
  } else if (!(p.alpha >= 0.0 && p.alpha < 1.0)) {
    msg << "alpha must satisfy 0 <= alpha < 1 (got " << p.alpha << ")";
  } else if (!(p.eta >= 0.0 && p.eta < 1.0)) {
    msg << "eta must satisfy 0 <= eta < 1 (got " << p.eta << ")";
  } else if (spike && p.region_lo() < 0.0) {
    msg << "spike region lower edge n/4 - n^eta/2 = " << p.region_lo() << " is negative for n=" << p.n
        << ", eta=" << p.eta;
  } else if (spike && p.region_hi() > p.n) {
    msg << "spike region upper edge n/4 + n^eta/2 = " << p.region_hi() << " exceeds n=" << p.n;
  } else {
    return;
  }
  throw DomainError(msg.str());
}

SpikeParams make_spike_params(int n, double alpha, double eta, CostMode mode) {
  SpikeParams p{n, alpha, eta};
  validate(p, mode);
  return p;
}

double cost(const SpikeParams& p, int k, CostMode mode) {
  if (k < 0 || k > p.n) {
    throw DomainError("Hamming weight " + std::to_string(k) + " outside [0, " + std::to_string(p.n) + "]");
  }
  if (mode == CostMode::Spike && p.in_spike(k)) return k + p.spike_height();
  return static_cast<double>(k);
}

CostTable::CostTable(const SpikeParams& p, CostMode mode)
    : values_(static_cast<std::size_t>(p.n) + 1),
      in_spike_(static_cast<std::size_t>(p.n) + 1),
      mode_(mode),
      effective_height_(mode == CostMode::Spike ? p.spike_height() : 0.0) {
  for (int k = 0; k <= p.n; ++k) {
    values_[static_cast<std::size_t>(k)] = cost(p, k, mode);
    in_spike_[static_cast<std::size_t>(k)] = p.in_spike(k) ? 1 : 0;
  }
}

std::string to_string(Regime r) {
  switch (r) {
    case Regime::Constant:
      return "constant";
    case Regime::Polynomial:
      return "polynomial";
    case Regime::Exponential:
      return "exponential";
  }
  return "unknown";
}

Regime classify_regime(const SpikeParams& p) {
  if (p.alpha + p.eta <= 0.5) return Regime::Constant;
  if (p.alpha + 2.0 * p.eta <= 1.0) return Regime::Polynomial;
  return Regime::Exponential;
}

GapLaw predicted_gap_law(const SpikeParams& p) {
  switch (classify_regime(p)) {
    case Regime::Constant:
      return {Regime::Constant, 0.0};
    case Regime::Polynomial:
      return {Regime::Polynomial, 0.5 - p.alpha - p.eta};
    case Regime::Exponential:
      break;
  }
  return {Regime::Exponential, p.alpha + 2.0 * p.eta - 1.0};
}

}  // namespace sqa
