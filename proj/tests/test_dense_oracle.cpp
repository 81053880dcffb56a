#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "sqa/analysis.hpp"
#include "sqa/dense_oracle.hpp"
#include "sqa/errors.hpp"
#include "sqa/exact_oracle.hpp"
#include "sqa/tridiagonal.hpp"

using namespace sqa;

TEST_SUITE("dense_oracle") {
  TEST_CASE("infinite temperature marginal for n = 4") {
    const SpikeParams p = make_spike_params(4, 0.5, 0.0);
    const WeightDistribution w = dense_gibbs_marginal(p, 0.7, 0.0);
    const double expect[] = {1, 4, 6, 4, 1};
    for (int k = 0; k <= 4; ++k) CHECK(w.probs[static_cast<std::size_t>(k)] == doctest::Approx(expect[k] / 16.0).epsilon(1e-12));
  }

  TEST_CASE("two-level closed form") {
    // n = 1, s = 1/2: H = 0.25 I + M with M = [[-0.25, -0.5], [-0.5, 0.25]].
    const SpikeParams p = make_spike_params(1, 0.0, 0.0, CostMode::Spikeless);
    const double beta = 1.0;
    const double r = std::sqrt(0.25 * 0.25 + 0.5 * 0.5);
    const double p0 = (std::cosh(beta * r) + 0.25 * std::sinh(beta * r) / r) / (2.0 * std::cosh(beta * r));
    const WeightDistribution w = dense_gibbs_marginal(p, 0.5, beta, CostMode::Spikeless);
    CHECK(w.probs[0] == doctest::Approx(p0).epsilon(1e-13));
    CHECK(w.probs[1] == doctest::Approx(1.0 - p0).epsilon(1e-13));
  }

  TEST_CASE("dense and sector marginals agree for n = 6") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int tested = 0;
    while (tested < 12) {
      const SpikeParams p{6, 0.99 * u(rng), 0.99 * u(rng)};
      if (p.region_lo() < 0.0 || p.region_hi() > 6) continue;
      const double s = u(rng), beta = 10.0 * u(rng);
      const auto a = dense_gibbs_marginal(p, s, beta);
      const auto b = sector_gibbs_marginal(p, s, beta);
      CHECK(tv_distance(a.probs, b.probs) < 1e-10);
      ++tested;
    }
  }

  TEST_CASE("Dicke block reproduces the sector matrix") {
    const SpikeParams p = make_spike_params(7, 0.4, 0.3);
    const Eigen::MatrixXd B = dense_symmetric_block(p, 0.35);
    const SymmetricHamiltonian h = symmetric_hamiltonian(p, 0.35);
    for (int i = 0; i <= 7; ++i) {
      for (int j = 0; j <= 7; ++j) {
        double expect = 0.0;
        if (i == j) expect = h.diag[static_cast<std::size_t>(i)];
        if (j == i + 1) expect = h.offdiag[static_cast<std::size_t>(i)];
        if (i == j + 1) expect = h.offdiag[static_cast<std::size_t>(j)];
        CHECK(B(i, j) == doctest::Approx(expect).epsilon(1e-12).scale(1.0));
      }
    }
  }

  TEST_CASE("full spectrum is the union of the spin-sector spectra") {
    const SpikeParams p = make_spike_params(6, 0.6, 0.2);
    const double s = 0.45;
    const Eigen::VectorXd full = dense_spectrum(p, s, CostMode::Spike, false).energies;
    std::vector<double> pooled;
    for (const SpinSector& sec : spin_sectors(6)) {
      const SymmetricHamiltonian h = sector_hamiltonian(p, sec.q, s);
      const auto vals = tridiagonal_eigensystem(h.diag, h.offdiag, false).values;
      const int mult = static_cast<int>(std::lround(std::exp(sec.log_multiplicity)));
      for (int c = 0; c < mult; ++c) pooled.insert(pooled.end(), vals.begin(), vals.end());
    }
    std::sort(pooled.begin(), pooled.end());
    REQUIRE(pooled.size() == static_cast<std::size_t>(full.size()));
    for (std::size_t i = 0; i < pooled.size(); ++i) CHECK(pooled[i] == doctest::Approx(full(static_cast<Eigen::Index>(i))).epsilon(1e-10).scale(1.0));
  }

  TEST_CASE("dense Hamiltonian basics") {
    const SpikeParams p = make_spike_params(5, 0.3, 0.1);
    const Eigen::MatrixXd H = dense_hamiltonian(p, 0.0);
    CHECK((H - H.transpose()).norm() == 0.0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H, Eigen::EigenvaluesOnly);
    CHECK(es.eigenvalues()(0) == doctest::Approx(-5.0).epsilon(1e-12));
    CHECK_THROWS_AS(dense_gibbs_marginal(make_spike_params(13, 0.2, 0.2), 0.5, 1.0), DomainError);
  }
}
