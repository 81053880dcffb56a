#include <doctest.h>

#include <bit>
#include <cmath>
#include <limits>

#include "sqa/analysis.hpp"
#include "sqa/errors.hpp"
#include "sqa/exact_oracle.hpp"
#include "sqa/pimc.hpp"

using namespace sqa;

namespace {

// Slice-0 (or slice-i) Hamming-weight marginal summed from enumerate_pi.
std::vector<double> enumerated_weight_marginal(const PimcConfig& c, int slice) {
  const auto pi = enumerate_pi(c);
  const int n = c.params().n;
  std::vector<double> w(static_cast<std::size_t>(n) + 1, 0.0);
  for (std::uint64_t x = 0; x < pi.size(); ++x) w[static_cast<std::size_t>(std::popcount((x >> (slice * n)) & ((1ULL << n) - 1)))] += pi[x];
  return w;
}

}  // namespace

TEST_SUITE("pimc") {
  TEST_CASE("config caches follow their formulas") {
    const SpikeParams p = make_spike_params(8, 0.6, 0.2);
    const PimcConfig c(p, 3.0, 12, 0.4);
    CHECK(c.omega() == doctest::Approx(3.0 * 0.6 / 12));
    CHECK(c.omega() > 0.0);
    CHECK(c.log_tanh_omega() == doctest::Approx(std::log(std::tanh(c.omega()))).epsilon(1e-14));
    CHECK(c.log_tanh_omega() < 0.0);
    CHECK(c.cost_scale() == doctest::Approx(3.0 * 0.4 / 12));
    CHECK(c.sites() == 96);
    const PimcConfig tiny(p, 1e-6, 1000, 0.5);
    CHECK(tiny.log_tanh_omega() == doctest::Approx(std::log(5e-10)).epsilon(1e-9));
    const PimcConfig top(p, 3.0, 12, 1.0);
    CHECK(top.log_tanh_omega() == -std::numeric_limits<double>::infinity());
    CHECK_THROWS_AS(PimcConfig(p, 3.0, 1, 0.4), DomainError);
    CHECK_THROWS_AS(PimcConfig(p, 0.0, 4, 0.4), DomainError);
    CHECK_THROWS_AS(PimcConfig(p, 3.0, 4, 1.2), DomainError);
  }

  TEST_CASE("log weight of simple states") {
    const SpikeParams p = make_spike_params(4, 0.0, 0.0, CostMode::Spikeless);
    const PimcConfig c(p, 2.0, 5, 0.3, CostMode::Spikeless);
    WorldlineState zero(p, 5);
    CHECK(log_weight(zero, c) == 0.0);

    const SpikeParams p1 = make_spike_params(1, 0.0, 0.0, CostMode::Spikeless);
    const double beta = 1.7, s = 0.35;
    const PimcConfig c1(p1, beta, 4, s, CostMode::Spikeless);
    WorldlineState w(p1, 4);
    w.set_bit(1, 0, true);
    w.set_bit(2, 0, true);
    const double expect = -(beta * s / 4) * 2.0 + 2.0 * std::log(std::tanh(beta * (1 - s) / 4));
    CHECK(log_weight(w, c1) == doctest::Approx(expect).epsilon(1e-14));
    CHECK(log_weight_from_bits(w, c1) == doctest::Approx(expect).epsilon(1e-14));
  }

  TEST_CASE("s = 1 with jumps gives minus infinity") {
    const SpikeParams p = make_spike_params(2, 0.0, 0.0);
    const PimcConfig c(p, 1.0, 3, 1.0);
    WorldlineState w(p, 3);
    CHECK(std::isfinite(log_weight(w, c)));
    w.set_bit(0, 0, true);
    CHECK(log_weight(w, c) == -std::numeric_limits<double>::infinity());
  }

  TEST_CASE("normalized weights equal the enumeration") {
    const SpikeParams p = make_spike_params(2, 0.5, 0.0);
    const PimcConfig c(p, 1.3, 3, 0.45);
    const auto pi = enumerate_pi(c);
    REQUIRE(pi.size() == 64);
    std::vector<double> lw(64);
    double m = -1e300;
    for (std::uint64_t x = 0; x < 64; ++x) {
      lw[x] = log_weight(state_from_index(p, 3, x), c);
      m = std::max(m, lw[x]);
    }
    double z = 0.0;
    for (double v : lw) z += std::exp(v - m);
    double total = 0.0;
    for (std::uint64_t x = 0; x < 64; ++x) {
      CHECK(std::abs(std::exp(lw[x] - m) / z - pi[x]) < 1e-12);
      CHECK(config_index(state_from_index(p, 3, x)) == x);
      total += pi[x];
    }
    CHECK(std::abs(total - 1.0) < 1e-12);
  }

  TEST_CASE("acceptance of the documented moves") {
    const SpikeParams p = make_spike_params(2, 0.0, 0.0, CostMode::Spikeless);
    const double beta = 1.0, s = 0.5;
    const int L = 3;
    const PimcConfig c(p, beta, L, s, CostMode::Spikeless);
    WorldlineState w(p, L);
    const FlipDelta up = w.flip_delta(0, 0);
    CHECK(up.weight_step == 1);
    CHECK(up.jump_step == 2);
    const double omega = beta * (1 - s) / L;
    CHECK(c.acceptance(up.weight_step, up.spike_step, up.jump_step) ==
          doctest::Approx(std::tanh(omega) * std::tanh(omega) * std::exp(-beta * s / L)).epsilon(1e-14));
    w.flip(0, 0, up);
    const FlipDelta down = w.flip_delta(0, 0);
    CHECK(down.weight_step == -1);
    CHECK(down.jump_step == -2);
    CHECK(c.acceptance(down.weight_step, down.spike_step, down.jump_step) == 1.0);
  }

  TEST_CASE("spike crossing enters the move ratio") {
    const SpikeParams p = make_spike_params(8, 0.6, 0.2);  // band is k = 2
    const PimcConfig c(p, 2.0, 4, 0.5);
    WorldlineState w(p, 4);
    for (int i = 0; i < 4; ++i) w.set_bit(i, 0, true);
    const FlipDelta d = w.flip_delta(0, 1);
    CHECK(d.spike_step == 1);
    CHECK(d.jump_step == 2);
    const double expect = -(2.0 * 0.5 / 4) * (1.0 + std::pow(8.0, 0.6)) + 2 * c.log_tanh_omega();
    CHECK(log_weight_delta(w, c, 0, 1) == doctest::Approx(expect).epsilon(1e-13));
  }

  TEST_CASE("incremental log-weight change matches recomputation") {
    const SpikeParams p = make_spike_params(70, 0.6, 0.2);
    const PimcConfig c(p, 5.0, 7, 0.55);
    Rng rng(42);
    WorldlineState w = WorldlineState::random(p, 7, rng);
    double before = log_weight_from_bits(w, c);
    for (int t = 0; t < 100000; ++t) {
      const int slice = static_cast<int>(uniform_below(rng, 7));
      const int spin = static_cast<int>(uniform_below(rng, 70));
      const double d = log_weight_delta(w, c, slice, spin);
      w.flip(slice, spin);
      const double after = t % 997 == 0 ? log_weight_from_bits(w, c) : log_weight(w, c);
      REQUIRE(std::abs((after - before) - d) < 1e-10);
      before = after;
    }
    CHECK(w.caches_consistent());
    CHECK(std::abs(log_weight(w, c) - log_weight_from_bits(w, c)) < 1e-9);
  }

  TEST_CASE("caches and jump parity survive sweeps") {
    const SpikeParams p = make_spike_params(65, 0.5, 0.3);
    for (double s : {0.0, 0.3, 0.9}) {
      const PimcConfig c(p, 4.0, 6, s);
      Rng rng(9);
      WorldlineState w = WorldlineState::random(p, 6, rng);
      for (int r = 0; r < 20; ++r) {
        sweep(w, c, 5000, rng);
        REQUIRE(w.caches_consistent());
        CHECK(w.jump_count() % 2 == 0);
        for (int j = 0; j < 65; ++j) {
          int jumps = 0;
          for (int i = 0; i < 6; ++i) jumps += w.bit(i, j) != w.bit((i + 1) % 6, j);
          CHECK(jumps % 2 == 0);
        }
        for (int i = 0; i < 6; ++i) {
          CHECK(w.slice_weight(i) >= 0);
          CHECK(w.slice_weight(i) <= 65);
        }
      }
    }
  }

  TEST_CASE("zero steps leave the state unchanged") {
    const SpikeParams p = make_spike_params(8, 0.6, 0.2);
    const PimcConfig c(p, 2.0, 4, 0.5);
    Rng rng(1);
    WorldlineState w = WorldlineState::random(p, 4, rng);
    const std::vector<std::uint64_t> before(w.words().begin(), w.words().end());
    const SweepStats st = sweep(w, c, 0, rng);
    CHECK(st.steps == 0);
    CHECK(std::equal(before.begin(), before.end(), w.words().begin()));
  }

  TEST_CASE("default slice count") {
    CHECK(default_slice_count(4, 4.0, 1.0) == 128);
    CHECK(default_slice_count(2, 0.1, 0.001) == 2);
    CHECK(default_slice_count(10, 10.0, 1.0) == 3163);
  }

  TEST_CASE("enumeration basics") {
    const SpikeParams p = make_spike_params(1, 0.0, 0.0, CostMode::Spikeless);
    const PimcConfig c(p, 1.0, 2, 0.0, CostMode::Spikeless);
    const auto pi = enumerate_pi(c);
    // States 00 and 11 have no jumps, 01 and 10 have two.
    CHECK(pi[0] == doctest::Approx(pi[3]).epsilon(1e-15));
    CHECK(pi[1] == doctest::Approx(pi[2]).epsilon(1e-15));
    CHECK(pi[1] / pi[0] == doctest::Approx(std::pow(std::tanh(0.5), 2)).epsilon(1e-13));
    CHECK_THROWS_AS(enumerate_pi(PimcConfig(make_spike_params(3, 0.0, 0.0), 1.0, 7, 0.5)), DomainError);
    CHECK_THROWS_AS(transition_matrix(PimcConfig(make_spike_params(3, 0.0, 0.0), 1.0, 5, 0.5)), DomainError);
  }

  TEST_CASE("transition matrix is stochastic, lazy and reversible") {
    const SpikeParams p = make_spike_params(2, 0.5, 0.0);
    for (int L : {2, 3, 5}) {
      const PimcConfig c(p, 1.0, L, 0.5);
      const auto pi = enumerate_pi(c);
      const TransitionMatrix P = transition_matrix(c);
      for (std::uint64_t x = 0; x < P.dim; ++x) {
        CHECK(std::abs(P.row_sum(x) - 1.0) < 1e-12);
        CHECK(P.diagonal[x] >= 0.5);
        for (int k = 0; k < P.sites; ++k) {
          const std::uint64_t y = x ^ (1ULL << k);
          CHECK(std::abs(pi[x] * P(x, k) - pi[y] * P(y, k)) < 1e-12);
        }
      }
      const Eigen::VectorXd ev = chain_eigenvalues(to_dense(P));
      CHECK(ev(ev.size() - 1) == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(ev(ev.size() - 2) < 1.0 - 1e-9);
    }
  }

  TEST_CASE("empirical transition frequencies match the kernel") {
    const SpikeParams p = make_spike_params(2, 0.0, 0.0, CostMode::Spikeless);
    const PimcConfig c(p, 1.0, 3, 0.5, CostMode::Spikeless);
    const TransitionMatrix P = transition_matrix(c);
    std::vector<double> visits(P.dim, 0.0), stay(P.dim, 0.0), moves(P.dim * 6, 0.0);
    Rng rng(2024);
    WorldlineState w = WorldlineState::random(p, 3, rng);
    std::uint64_t x = config_index(w);
    for (int t = 0; t < 10'000'000; ++t) {
      const StepResult r = metropolis_step(w, c, rng);
      visits[x] += 1.0;
      if (r.accepted) {
        const int site = r.slice * 2 + r.spin;
        moves[x * 6 + static_cast<std::uint64_t>(site)] += 1.0;
        x ^= 1ULL << site;
      } else {
        stay[x] += 1.0;
      }
    }
    int outside = 0, total = 0;
    double worst = 0.0;
    for (std::uint64_t s = 0; s < P.dim; ++s) {
      for (int k = 0; k <= 6; ++k) {
        const double pr = k < 6 ? P(s, k) : P.diagonal[s];
        const double f = (k < 6 ? moves[s * 6 + static_cast<std::uint64_t>(k)] : stay[s]) / visits[s];
        const double se = std::sqrt(pr * (1 - pr) / visits[s]);
        const double z = std::abs(f - pr) / se;
        worst = std::max(worst, z);
        outside += z > 3.0 ? 1 : 0;
        ++total;
      }
    }
    MESSAGE("largest |z| over ", total, " entries: ", worst);
    CHECK(outside == 0);
  }

  TEST_CASE("long chain reaches the enumerated distribution") {
    const SpikeParams p = make_spike_params(2, 0.5, 0.0);
    const PimcConfig c(p, 1.0, 3, 0.5);
    const auto pi = enumerate_pi(c);
    Rng rng(77);
    WorldlineState w = WorldlineState::random(p, 3, rng);
    std::vector<double> counts(pi.size(), 0.0);
    const int steps = 10'000'000;
    for (int t = 0; t < steps; ++t) {
      metropolis_step(w, c, rng);
      counts[config_index(w)] += 1.0;
    }
    for (double& v : counts) v /= steps;
    CHECK(tv_distance(counts, pi) < 0.01);
  }

  TEST_CASE("slice marginals") {
    const SpikeParams p = make_spike_params(2, 0.5, 0.0);
    const PimcConfig c(p, 1.5, 4, 0.6);
    const auto m0 = enumerated_weight_marginal(c, 0);
    const auto m1 = enumerated_weight_marginal(c, 1);
    for (std::size_t k = 0; k < m0.size(); ++k) CHECK(std::abs(m0[k] - m1[k]) < 1e-12);

    const WeightDistribution quantum = sector_gibbs_marginal(p, 0.6, 1.5);
    double prev = 1.0;
    for (int L : {2, 4, 6, 8}) {
      const double tv = tv_distance(enumerated_weight_marginal(PimcConfig(p, 1.5, L, 0.6), 0), quantum.probs);
      CHECK(tv < prev);
      prev = tv;
    }

    const PimcConfig hot(p, 1e-3, 2, 0.0);
    const auto flat = enumerated_weight_marginal(hot, 0);
    CHECK(flat[0] == doctest::Approx(0.25).epsilon(1e-2));
    CHECK(flat[1] == doctest::Approx(0.5).epsilon(1e-2));

    Rng rng(3);
    WorldlineState w = WorldlineState::random(p, 4, rng);
    const auto bits = slice_marginal_sample(w);
    REQUIRE(bits.size() == 2);
    CHECK(bits[0] == w.bit(0, 0));
    CHECK(bits[1] == w.bit(0, 1));
  }
}
