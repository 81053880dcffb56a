#pragma once

#include <span>
#include <vector>

namespace sqa {

/// Eigenpairs of a real symmetric tridiagonal matrix, eigenvalues ascending.
/// `vectors[i]` is the unit eigenvector belonging to `values[i]` (empty when
/// vectors were not requested).
struct TridiagonalEigen {
  std::vector<double> values;
  std::vector<std::vector<double>> vectors;
};

/// Implicit QL with Wilkinson shifts. `off[i]` couples rows i and i+1, so
/// off.size() must be diag.size() - 1. Throws InternalError (with a dump of
/// the matrix) if an eigenvalue fails to converge in 60 sweeps.
TridiagonalEigen tridiagonal_eigensystem(std::span<const double> diag, std::span<const double> off,
                                         bool want_vectors = true);

/// Number of eigenvalues strictly below x (Sturm sequence count).
int sturm_count(std::span<const double> diag, std::span<const double> off, double x);

/// The `count` smallest eigenvalues by bisection on the Sturm count, each to
/// within a few ulps of the matrix norm.
std::vector<double> tridiagonal_lowest(std::span<const double> diag, std::span<const double> off, int count);

/// Unit eigenvector for a (converged) eigenvalue by inverse iteration, sign
/// fixed so that the largest-magnitude component is positive.
std::vector<double> tridiagonal_eigenvector(std::span<const double> diag, std::span<const double> off,
                                            double eigenvalue);

}  // namespace sqa
