#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "sqa/tridiagonal.hpp"

using namespace sqa;

namespace {

Eigen::MatrixXd dense(const std::vector<double>& d, const std::vector<double>& e) {
  const auto n = static_cast<Eigen::Index>(d.size());
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) M(i, i) = d[static_cast<std::size_t>(i)];
  for (Eigen::Index i = 0; i + 1 < n; ++i) M(i, i + 1) = M(i + 1, i) = e[static_cast<std::size_t>(i)];
  return M;
}

}  // namespace

TEST_SUITE("tridiagonal") {
  TEST_CASE("QL eigenpairs match a dense solver") {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> g;
    for (int n : {1, 2, 3, 7, 20, 65}) {
      std::vector<double> d(static_cast<std::size_t>(n)), e(static_cast<std::size_t>(n - 1));
      for (auto& x : d) x = g(rng);
      for (auto& x : e) x = g(rng);
      const TridiagonalEigen te = tridiagonal_eigensystem(d, e);
      const Eigen::MatrixXd M = dense(d, e);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
      for (int i = 0; i < n; ++i) {
        CHECK(te.values[static_cast<std::size_t>(i)] == doctest::Approx(es.eigenvalues()(i)).epsilon(1e-12).scale(1.0));
        const Eigen::Map<const Eigen::VectorXd> v(te.vectors[static_cast<std::size_t>(i)].data(), n);
        CHECK(v.norm() == doctest::Approx(1.0).epsilon(1e-12));
        CHECK((M * v - te.values[static_cast<std::size_t>(i)] * v).norm() < 1e-10);
      }
    }
  }

  TEST_CASE("Sturm count brackets every eigenvalue") {
    const std::vector<double> d{2, -1, 0.5, 3, 1};
    const std::vector<double> e{1, 0.3, -0.7, 0.2};
    const auto vals = tridiagonal_eigensystem(d, e, false).values;
    for (std::size_t i = 0; i < vals.size(); ++i) {
      CHECK(sturm_count(d, e, vals[i] - 1e-8) == static_cast<int>(i));
      CHECK(sturm_count(d, e, vals[i] + 1e-8) == static_cast<int>(i) + 1);
    }
  }

  TEST_CASE("bisection lowest values and inverse iteration") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1, 1);
    std::vector<double> d(200), e(199);
    for (auto& x : d) x = 5 * u(rng);
    for (auto& x : e) x = -std::abs(u(rng)) - 0.01;
    const auto all = tridiagonal_eigensystem(d, e, false).values;
    const auto low = tridiagonal_lowest(d, e, 3);
    for (int i = 0; i < 3; ++i) CHECK(low[static_cast<std::size_t>(i)] == doctest::Approx(all[static_cast<std::size_t>(i)]).epsilon(1e-12).scale(1.0));
    const auto v = tridiagonal_eigenvector(d, e, low[0]);
    const Eigen::MatrixXd M = dense(d, e);
    const Eigen::Map<const Eigen::VectorXd> vv(v.data(), 200);
    CHECK((M * vv - low[0] * vv).norm() < 1e-9);
    // Negative off-diagonal: the ground vector has one sign.
    for (double x : v) CHECK(x > 0.0);
  }
}
