#include "sqa/pimc.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <string>

#include "sqa/errors.hpp"

namespace sqa {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// ln tanh(w) = ln(1 - e^{-2w}) - ln(1 + e^{-2w}), accurate for tiny and large w.
double log_tanh(double w) {
  if (w <= 0.0) return kNegInf;
  const double t = std::exp(-2.0 * w);
  return std::log(-std::expm1(-2.0 * w)) - std::log1p(t);
}

double log_sum_exp(const std::vector<double>& v) {
  double m = kNegInf;
  for (double x : v) m = std::max(m, x);
  if (m == kNegInf) return m;
  double acc = 0.0;
  for (double x : v) acc += std::exp(x - m);
  return m + std::log(acc);
}

// log pi evaluated straight from an enumeration index.
double log_weight_of_index(const PimcConfig& config, std::uint64_t index) {
  const int n = config.params().n;
  const int L = config.slices();
  const std::uint64_t mask = n == 64 ? ~0ULL : ((1ULL << n) - 1);
  double cost_sum = 0.0;
  std::int64_t jumps = 0;
  for (int i = 0; i < L; ++i) {
    const std::uint64_t cur = (index >> (i * n)) & mask;
    const std::uint64_t nxt = (index >> (((i + 1) % L) * n)) & mask;
    cost_sum += config.cost()(std::popcount(cur));
    jumps += std::popcount(cur ^ nxt);
  }
  double lw = -config.cost_scale() * cost_sum;
  if (jumps > 0) lw += static_cast<double>(jumps) * config.log_tanh_omega();
  return lw;
}

}  // namespace

PimcConfig::PimcConfig(const SpikeParams& params, double beta, int slices, double s, CostMode mode)
    : params_(params), beta_(beta), slices_(slices), s_(s) {
  validate(params, mode);
  if (!(beta > 0.0) || !std::isfinite(beta)) throw DomainError("beta must be finite and > 0");
  if (slices < 2) throw DomainError("slice count L must be >= 2");
  if (!(s >= 0.0 && s <= 1.0)) throw DomainError("adiabatic parameter s must lie in [0, 1]");
  cost_ = CostTable(params, mode);
  omega_ = beta * (1.0 - s) / slices;
  log_tanh_omega_ = log_tanh(omega_);
  cost_scale_ = beta * s / slices;
  for (int w : {-1, 1}) {
    for (int sp = -1; sp <= 1; ++sp) {
      for (int j = -2; j <= 2; j += 2) {
        const double r = log_ratio(w, sp, j);
        accept_[static_cast<std::size_t>(((w + 1) / 2 * 3 + sp + 1) * 3 + j / 2 + 1)] = r >= 0.0 ? 1.0 : std::exp(r);
      }
    }
  }
}

double PimcConfig::log_ratio(int weight_step, int spike_step, int jump_step) const {
  const double df = weight_step + cost_.effective_height() * spike_step;
  double r = -cost_scale_ * df;
  if (jump_step != 0) r += jump_step * log_tanh_omega_;
  return r;
}

WorldlineState::WorldlineState(const SpikeParams& params, int slices)
    : n_(params.n), slices_(slices), words_per_slice_((params.n + 63) / 64) {
  if (params.n < 1) throw DomainError("n must be >= 1");
  if (slices < 2) throw DomainError("slice count L must be >= 2");
  band_.resize(static_cast<std::size_t>(n_) + 1);
  for (int k = 0; k <= n_; ++k) band_[static_cast<std::size_t>(k)] = params.in_spike(k) ? 1 : 0;
  bits_.assign(static_cast<std::size_t>(slices_) * words_per_slice_, 0ULL);
  weights_.assign(static_cast<std::size_t>(slices_), 0);
  in_spike_.assign(static_cast<std::size_t>(slices_), 0);
  recompute_caches();
}

WorldlineState WorldlineState::random(const SpikeParams& params, int slices, Rng& rng) {
  WorldlineState st(params, slices);
  const int tail = st.n_ % 64;
  const std::uint64_t tail_mask = tail == 0 ? ~0ULL : ((1ULL << tail) - 1);
  for (int i = 0; i < slices; ++i) {
    for (int w = 0; w < st.words_per_slice_; ++w) {
      std::uint64_t word = rng();
      if (w == st.words_per_slice_ - 1) word &= tail_mask;
      st.bits_[static_cast<std::size_t>(i) * st.words_per_slice_ + w] = word;
    }
  }
  st.recompute_caches();
  return st;
}

void WorldlineState::recompute_caches() {
  jumps_ = 0;
  weight_sum_ = 0;
  spike_time_ = 0;
  for (int i = 0; i < slices_; ++i) {
    int k = 0;
    const auto cur = slice_words(i);
    const auto nxt = slice_words((i + 1) % slices_);
    for (int w = 0; w < words_per_slice_; ++w) {
      k += std::popcount(cur[w]);
      jumps_ += std::popcount(cur[w] ^ nxt[w]);
    }
    weights_[static_cast<std::size_t>(i)] = k;
    in_spike_[static_cast<std::size_t>(i)] = band_[static_cast<std::size_t>(k)];
    weight_sum_ += k;
    spike_time_ += band_[static_cast<std::size_t>(k)];
  }
}

bool WorldlineState::caches_consistent() const {
  WorldlineState copy = *this;
  copy.recompute_caches();
  return copy.weights_ == weights_ && copy.in_spike_ == in_spike_ && copy.jumps_ == jumps_ &&
         copy.weight_sum_ == weight_sum_ && copy.spike_time_ == spike_time_;
}

int WorldlineState::min_slice_weight() const { return *std::min_element(weights_.begin(), weights_.end()); }

FlipDelta WorldlineState::flip_delta(int slice, int spin) const {
  const bool b = bit(slice, spin);
  const int prev = slice == 0 ? slices_ - 1 : slice - 1;
  const int next = slice + 1 == slices_ ? 0 : slice + 1;
  const int before = static_cast<int>(bit(prev, spin) != b) + static_cast<int>(bit(next, spin) != b);
  const int k = weights_[static_cast<std::size_t>(slice)];
  const int ws = b ? -1 : 1;
  const int sp = static_cast<int>(band_[static_cast<std::size_t>(k + ws)]) - static_cast<int>(band_[static_cast<std::size_t>(k)]);
  return {ws, sp, 2 - 2 * before};
}

void WorldlineState::flip(int slice, int spin, const FlipDelta& d) {
  bits_[word_index(slice, spin)] ^= 1ULL << (spin & 63);
  auto& k = weights_[static_cast<std::size_t>(slice)];
  k += d.weight_step;
  in_spike_[static_cast<std::size_t>(slice)] = band_[static_cast<std::size_t>(k)];
  weight_sum_ += d.weight_step;
  spike_time_ += d.spike_step;
  jumps_ += d.jump_step;
}

void WorldlineState::assign_words(std::span<const std::uint64_t> words) {
  if (words.size() != bits_.size()) throw DomainError("payload size does not match the worldline shape");
  const int tail = n_ % 64;
  if (tail != 0) {
    const std::uint64_t tail_mask = (1ULL << tail) - 1;
    for (int i = 0; i < slices_; ++i) {
      if (words[static_cast<std::size_t>(i) * words_per_slice_ + words_per_slice_ - 1] & ~tail_mask) {
        throw DomainError("payload has bits set beyond n");
      }
    }
  }
  std::copy(words.begin(), words.end(), bits_.begin());
  recompute_caches();
}

void WorldlineState::set_bit(int slice, int spin, bool value) {
  if (bit(slice, spin) != value) flip(slice, spin);
}

std::vector<std::uint8_t> WorldlineState::slice_bits(int slice) const {
  std::vector<std::uint8_t> out(static_cast<std::size_t>(n_));
  for (int j = 0; j < n_; ++j) out[static_cast<std::size_t>(j)] = bit(slice, j) ? 1 : 0;
  return out;
}

double log_weight(const WorldlineState& state, const PimcConfig& config) {
  double lw = -config.cost_scale() * state.cost_sum(config.cost());
  if (state.jump_count() > 0) lw += static_cast<double>(state.jump_count()) * config.log_tanh_omega();
  return lw;
}

double log_weight_from_bits(const WorldlineState& state, const PimcConfig& config) {
  const int L = state.slices();
  double cost_sum = 0.0;
  std::int64_t jumps = 0;
  for (int i = 0; i < L; ++i) {
    int k = 0;
    for (int j = 0; j < state.n(); ++j) {
      const bool b = state.bit(i, j);
      k += b ? 1 : 0;
      jumps += b != state.bit((i + 1) % L, j) ? 1 : 0;
    }
    cost_sum += config.cost()(k);
  }
  double lw = -config.cost_scale() * cost_sum;
  if (jumps > 0) lw += static_cast<double>(jumps) * config.log_tanh_omega();
  return lw;
}

double log_weight_delta(const WorldlineState& state, const PimcConfig& config, int slice, int spin) {
  const FlipDelta d = state.flip_delta(slice, spin);
  return config.log_ratio(d.weight_step, d.spike_step, d.jump_step);
}

StepResult metropolis_step(WorldlineState& state, const PimcConfig& config, Rng& rng) {
  const auto sites = static_cast<std::uint64_t>(config.sites());
  const std::uint64_t r = uniform_below(rng, 2 * sites);
  if (r >= sites) return {};
  const int n = state.n();
  StepResult res;
  res.proposed = true;
  res.slice = static_cast<int>(r / static_cast<std::uint64_t>(n));
  res.spin = static_cast<int>(r % static_cast<std::uint64_t>(n));
  const FlipDelta d = state.flip_delta(res.slice, res.spin);
  const double a = config.acceptance(d.weight_step, d.spike_step, d.jump_step);
  if (a >= 1.0 || uniform01(rng) < a) {
    state.flip(res.slice, res.spin, d);
    res.accepted = true;
  }
  return res;
}

SweepStats sweep(WorldlineState& state, const PimcConfig& config, std::int64_t steps, Rng& rng) {
  SweepStats st;
  st.steps = steps;
  for (std::int64_t t = 0; t < steps; ++t) {
    const StepResult r = metropolis_step(state, config, rng);
    st.proposals += r.proposed ? 1 : 0;
    st.accepted += r.accepted ? 1 : 0;
  }
  return st;
}

std::vector<std::uint8_t> slice_marginal_sample(const WorldlineState& state) { return state.slice_bits(0); }

int default_slice_count(int n, double beta, double c) {
  if (!(c > 0.0)) throw DomainError("slice multiplier c must be > 0");
  if (!(beta >= 0.0)) throw DomainError("beta must be >= 0");
  const double raw = std::ceil(c * static_cast<double>(n) * n * std::pow(beta, 1.5));
  if (raw > std::numeric_limits<int>::max()) throw DomainError("slice count overflows int");
  return std::max(2, static_cast<int>(raw));
}

std::uint64_t config_index(const WorldlineState& state) {
  if (static_cast<std::int64_t>(state.n()) * state.slices() > 64) throw DomainError("configuration index needs nL <= 64");
  std::uint64_t idx = 0;
  for (int i = 0; i < state.slices(); ++i) {
    for (int j = 0; j < state.n(); ++j) {
      if (state.bit(i, j)) idx |= 1ULL << (i * state.n() + j);
    }
  }
  return idx;
}

WorldlineState state_from_index(const SpikeParams& params, int slices, std::uint64_t index) {
  WorldlineState st(params, slices);
  std::vector<std::uint64_t> words(static_cast<std::size_t>(slices) * st.words_per_slice(), 0ULL);
  for (int i = 0; i < slices; ++i) {
    for (int j = 0; j < params.n; ++j) {
      if ((index >> (i * params.n + j)) & 1ULL) {
        words[static_cast<std::size_t>(i) * st.words_per_slice() + static_cast<std::size_t>(j >> 6)] |= 1ULL << (j & 63);
      }
    }
  }
  st.assign_words(words);
  return st;
}

std::vector<double> enumerate_pi(const PimcConfig& config) {
  if (config.sites() > kEnumerateMaxSites) {
    throw DomainError("enumerate_pi refuses nL = " + std::to_string(config.sites()) + " (limit 20)");
  }
  const std::uint64_t dim = 1ULL << config.sites();
  std::vector<double> lw(dim);
  for (std::uint64_t x = 0; x < dim; ++x) lw[x] = log_weight_of_index(config, x);
  const double lz = log_sum_exp(lw);
  for (double& v : lw) v = std::exp(v - lz);
  return lw;
}

double TransitionMatrix::row_sum(std::uint64_t x) const {
  double acc = diagonal[x];
  for (int k = 0; k < sites; ++k) acc += (*this)(x, k);
  return acc;
}

TransitionMatrix transition_matrix(const PimcConfig& config) {
  if (config.sites() > kTransitionMaxSites) {
    throw DomainError("transition_matrix refuses nL = " + std::to_string(config.sites()) + " (limit 14)");
  }
  TransitionMatrix P;
  P.sites = static_cast<int>(config.sites());
  P.dim = 1ULL << P.sites;
  std::vector<double> lw(P.dim);
  for (std::uint64_t x = 0; x < P.dim; ++x) lw[x] = log_weight_of_index(config, x);
  P.diagonal.assign(P.dim, 0.0);
  P.flip.assign(P.dim * static_cast<std::uint64_t>(P.sites), 0.0);
  const double propose = 1.0 / (2.0 * P.sites);
  for (std::uint64_t x = 0; x < P.dim; ++x) {
    double off = 0.0;
    for (int k = 0; k < P.sites; ++k) {
      const std::uint64_t y = x ^ (1ULL << k);
      double a;
      if (lw[y] == kNegInf) {
        a = 0.0;
      } else if (lw[x] == kNegInf) {
        a = 1.0;
      } else {
        a = std::min(1.0, std::exp(lw[y] - lw[x]));
      }
      const double pxy = propose * a;
      P.flip[x * static_cast<std::uint64_t>(P.sites) + k] = pxy;
      off += pxy;
    }
    P.diagonal[x] = 1.0 - off;
  }
  return P;
}

}  // namespace sqa
