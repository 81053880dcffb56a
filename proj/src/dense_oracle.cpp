#include "sqa/dense_oracle.hpp"

#include <bit>
#include <cmath>
#include <string>

#include "sqa/errors.hpp"

namespace sqa {
namespace {

void check_dense_size(int n) {
  if (n > kDenseMaxQubits) {
    throw DomainError("dense oracle refuses n = " + std::to_string(n) + " (limit 12)");
  }
}

}  // namespace

Eigen::MatrixXd dense_hamiltonian(const SpikeParams& p, double s, CostMode mode) {
  validate(p, mode);
  check_dense_size(p.n);
  if (!(s >= 0.0 && s <= 1.0)) throw DomainError("adiabatic parameter s must lie in [0, 1]");
  const Eigen::Index dim = Eigen::Index{1} << p.n;
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dim, dim);
  for (Eigen::Index x = 0; x < dim; ++x) {
    h(x, x) = s * cost(p, std::popcount(static_cast<unsigned>(x)), mode);
    for (int j = 0; j < p.n; ++j) h(x, x ^ (Eigen::Index{1} << j)) -= (1.0 - s);
  }
  return h;
}

DenseSpectrum dense_spectrum(const SpikeParams& p, double s, CostMode mode, bool want_vectors) {
  const Eigen::MatrixXd h = dense_hamiltonian(p, s, mode);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(h, want_vectors ? Eigen::ComputeEigenvectors
                                                                        : Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw InternalError("dense eigensolver failed");
  DenseSpectrum out;
  out.energies = solver.eigenvalues();
  if (want_vectors) out.vectors = solver.eigenvectors();
  return out;
}

WeightDistribution dense_gibbs_marginal(const SpikeParams& p, double s, double beta, CostMode mode) {
  if (!(beta >= 0.0)) throw DomainError("beta must be >= 0");
  const DenseSpectrum spec = dense_spectrum(p, s, mode, true);
  const double e0 = spec.energies(0);
  const Eigen::VectorXd w = (-beta * (spec.energies.array() - e0)).exp();
  // diag(V diag(w) V^T)
  const Eigen::VectorXd diag = spec.vectors.array().square().matrix() * w;
  WeightDistribution out;
  out.probs.assign(static_cast<std::size_t>(p.n) + 1, 0.0);
  for (Eigen::Index x = 0; x < diag.size(); ++x) {
    out.probs[static_cast<std::size_t>(std::popcount(static_cast<unsigned>(x)))] += diag(x);
  }
  const double z = w.sum();
  for (double& v : out.probs) v /= z;
  return out;
}

Eigen::MatrixXd dicke_basis(int n) {
  check_dense_size(n);
  const Eigen::Index dim = Eigen::Index{1} << n;
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(dim, n + 1);
  for (Eigen::Index x = 0; x < dim; ++x) b(x, std::popcount(static_cast<unsigned>(x))) = 1.0;
  for (int k = 0; k <= n; ++k) b.col(k).normalize();
  return b;
}

Eigen::MatrixXd dense_symmetric_block(const SpikeParams& p, double s, CostMode mode) {
  const Eigen::MatrixXd b = dicke_basis(p.n);
  return b.transpose() * dense_hamiltonian(p, s, mode) * b;
}

}  // namespace sqa
