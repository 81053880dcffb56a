#pragma once

#include <Eigen/Dense>

#include "sqa/exact_oracle.hpp"

namespace sqa {

inline constexpr int kDenseMaxQubits = 12;

/// Full 2^n x 2^n H(s) in the computational basis (bit j of the index is qubit j).
Eigen::MatrixXd dense_hamiltonian(const SpikeParams& p, double s, CostMode mode = CostMode::Spike);

struct DenseSpectrum {
  Eigen::VectorXd energies;  // ascending
  Eigen::MatrixXd vectors;   // columns
};

DenseSpectrum dense_spectrum(const SpikeParams& p, double s, CostMode mode = CostMode::Spike,
                             bool want_vectors = true);

/// Brute-force Gibbs marginal over Hamming weight. Refuses n > 12.
WeightDistribution dense_gibbs_marginal(const SpikeParams& p, double s, double beta,
                                        CostMode mode = CostMode::Spike);

/// Orthonormal Dicke states as columns of a 2^n x (n+1) matrix.
Eigen::MatrixXd dicke_basis(int n);

/// H restricted to the Dicke span, computed as B^T H B from the dense matrix.
Eigen::MatrixXd dense_symmetric_block(const SpikeParams& p, double s, CostMode mode = CostMode::Spike);

}  // namespace sqa
