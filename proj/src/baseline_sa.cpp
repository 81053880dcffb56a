#include "sqa/baseline_sa.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>

#include "sqa/errors.hpp"
#include "sqa/rng.hpp"

namespace sqa {
namespace {

constexpr std::int64_t kStopPollInterval = 4096;

// Acceptance probabilities for weight k -> k+1 (up) and k -> k-1 (down).
void acceptance_tables(const CostTable& f, double beta, std::vector<double>& up, std::vector<double>& down) {
  const int n = f.n();
  up.assign(static_cast<std::size_t>(n) + 1, 0.0);
  down.assign(static_cast<std::size_t>(n) + 1, 0.0);
  for (int k = 0; k <= n; ++k) {
    if (k < n) up[static_cast<std::size_t>(k)] = std::min(1.0, std::exp(-beta * (f(k + 1) - f(k))));
    if (k > 0) down[static_cast<std::size_t>(k)] = std::min(1.0, std::exp(-beta * (f(k - 1) - f(k))));
  }
}

}  // namespace

std::vector<double> geometric_beta_schedule(double beta0, double beta_max, int stages) {
  if (!(beta0 > 0.0) || !(beta_max >= beta0)) throw DomainError("beta schedule needs 0 < beta0 <= beta_max");
  if (stages < 1) throw DomainError("beta schedule needs at least one stage");
  std::vector<double> out(static_cast<std::size_t>(stages));
  if (stages == 1) {
    out[0] = beta_max;
    return out;
  }
  const double ratio = std::log(beta_max / beta0);
  for (int i = 0; i < stages; ++i) out[static_cast<std::size_t>(i)] = beta0 * std::exp(ratio * i / (stages - 1));
  out.back() = beta_max;
  return out;
}

SaConfig default_sa_config(const SpikeParams& p, CostMode mode, std::uint64_t seed, std::int64_t steps_per_beta) {
  validate(p, mode);
  SaConfig c;
  c.params = p;
  c.mode = mode;
  c.beta_schedule = geometric_beta_schedule(0.1, 2.0 * p.n, 100);
  c.steps_per_beta = steps_per_beta;
  c.seed = seed;
  return c;
}

RunReport run_sa(const SaConfig& c, std::stop_token stop) {
  validate(c.params, c.mode);
  if (c.beta_schedule.empty()) throw DomainError("SA beta schedule is empty");
  if (!std::is_sorted(c.beta_schedule.begin(), c.beta_schedule.end())) throw DomainError("SA beta schedule must be ascending");
  if (c.beta_schedule.front() < 0.0) throw DomainError("SA inverse temperatures must be >= 0");
  if (c.steps_per_beta < 1) throw DomainError("SA steps per beta must be >= 1");

  const int n = c.params.n;
  const CostTable f(c.params, c.mode);
  Rng rng(c.seed);
  const int words = (n + 63) / 64;
  std::vector<std::uint64_t> bits(static_cast<std::size_t>(words));
  int weight = 0;
  for (int w = 0; w < words; ++w) {
    std::uint64_t x = rng();
    if (w == words - 1 && n % 64 != 0) x &= (1ULL << (n % 64)) - 1;
    bits[static_cast<std::size_t>(w)] = x;
    weight += std::popcount(x);
  }
  auto snapshot = [&] {
    std::vector<std::uint8_t> out(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) out[static_cast<std::size_t>(j)] = (bits[static_cast<std::size_t>(j >> 6)] >> (j & 63)) & 1ULL;
    return out;
  };

  RunReport rep;
  rep.algorithm = "sa";
  rep.n = n;
  rep.seed = c.seed;
  rep.best_weight_seen = weight;
  rep.best_cost_seen = f(weight);
  rep.best_bitstring = snapshot();

  std::vector<double> up, down;
  bool ok = true;
  const auto range = 2 * static_cast<std::uint64_t>(n);
  for (double beta : c.beta_schedule) {
    acceptance_tables(f, beta, up, down);
    StageRecord rec;
    rec.knob = beta;
    std::int64_t proposals = 0, accepted = 0, samples = 0;
    double weight_acc = 0.0;
    std::int64_t t = 0;
    for (; t < c.steps_per_beta; ++t) {
      if (t % kStopPollInterval == 0 && stop.stop_requested()) {
        ok = false;
        break;
      }
      const std::uint64_t r = uniform_below(rng, range);
      if (r < static_cast<std::uint64_t>(n)) {
        ++proposals;
        const auto j = static_cast<int>(r);
        auto& word = bits[static_cast<std::size_t>(j >> 6)];
        const bool set = (word >> (j & 63)) & 1ULL;
        const double a = set ? down[static_cast<std::size_t>(weight)] : up[static_cast<std::size_t>(weight)];
        if (a >= 1.0 || uniform01(rng) < a) {
          word ^= 1ULL << (j & 63);
          weight += set ? -1 : 1;
          ++accepted;
          rep.best_weight_seen = std::min(rep.best_weight_seen, weight);
          if (f(weight) < rep.best_cost_seen) {
            rep.best_cost_seen = f(weight);
            rep.best_bitstring = snapshot();
          }
        }
      }
      if ((t + 1) % n == 0) {
        weight_acc += weight;
        ++samples;
      }
    }
    rec.steps = t;
    rec.acceptance_rate = proposals ? static_cast<double>(accepted) / proposals : 0.0;
    rec.mean_weight = samples ? weight_acc / samples : weight;
    rec.min_slice_weight = weight;
    rep.total_steps += t;
    rep.stages.push_back(rec);
    if (!ok) break;
  }

  rep.complete = ok;
  rep.final_bitstring = snapshot();
  rep.final_weight = weight;
  rep.final_cost = f(weight);
  return rep;
}

std::vector<double> sa_transition_matrix(const SpikeParams& p, CostMode mode, double beta) {
  validate(p, mode);
  if (p.n > 12) throw DomainError("sa_transition_matrix refuses n > 12");
  if (!(beta >= 0.0)) throw DomainError("beta must be >= 0");
  const CostTable f(p, mode);
  const std::size_t dim = std::size_t{1} << p.n;
  std::vector<double> P(dim * dim, 0.0);
  for (std::size_t x = 0; x < dim; ++x) {
    const int kx = std::popcount(x);
    double off = 0.0;
    for (int j = 0; j < p.n; ++j) {
      const std::size_t y = x ^ (std::size_t{1} << j);
      const double a = std::min(1.0, std::exp(-beta * (f(std::popcount(y)) - f(kx))));
      const double pxy = a / (2.0 * p.n);
      P[x * dim + y] = pxy;
      off += pxy;
    }
    P[x * dim + x] = 1.0 - off;
  }
  return P;
}

}  // namespace sqa
