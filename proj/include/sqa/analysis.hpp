#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <vector>

#include "sqa/exact_oracle.hpp"
#include "sqa/pimc.hpp"
#include "sqa/rng.hpp"

namespace sqa {

/// Number of slices whose Hamming weight lies in the spike band.
std::int64_t spike_time(const WorldlineState& state);

/// b_theta = L / (beta n^alpha) * ln(1/theta). Throws DomainError unless 0 < theta < 1.
double st_threshold(double theta, const PimcConfig& config);

/// Log of the three-case large-moment bound on E[ST^m]:
///   m < L:          m log(2 L n^{eta-1/2})
///   L <= m < 2L:    L log(2 e L) + L (eta-1/2) log n
///   m >= 2L:        L log m + L log L + L (eta-1/2) log n
double moment_bound(int m, int L, int n, double eta);

struct BoundReport {
  double theta = 0.0;
  double b_theta = 0.0;
  double lambda = 0.0;
  double mgf_bound = 0.0;       // log of the three-term MGF bound
  double chernoff_bound = 0.0;  // mgf_bound - lambda b_theta
  double terms[3] = {0.0, 0.0, 0.0};  // log of each term
  bool lambda_below_range = false;    // lambda < n^{1/2-eta} / L
};

/// Three-term bound on log E[exp(lambda ST)]:
///   term 1: sum_{m<=L} (2 lambda L n^{eta-1/2})^m / m!
///   term 2: L lambda^{2L} (2eL)^L n^{L(eta-1/2)} / L!
///   term 3: e^{-1} L^L n^{L(eta-1/2)} (e lambda)^{2L} e^{e lambda}
/// combined with log-sum-exp, and the Chernoff tail bound on P[ST >= b_theta].
BoundReport mgf_chernoff_bound(double lambda, double theta, const PimcConfig& config);

struct SpikeTimeStats {
  std::vector<std::int64_t> samples;
  double mean = 0.0;
  double variance = 0.0;
  std::vector<double> moments;         // moments[m] = sample E[ST^m], m = 0..m_max
  std::vector<double> moment_stderr;   // batch-means standard errors
  double n_effective = 0.0;            // samples corrected for autocorrelation of ST
  std::int64_t batch_size = 1;         // samples per batch
};

/// Runs the chain from `state` for `burn_in` proposals, then records ST every
/// `thinning` proposals. Batches span `batch_sweeps` sweep units (nL proposals).
SpikeTimeStats collect_spike_times(WorldlineState& state, const PimcConfig& config, std::int64_t burn_in,
                                   std::int64_t num_samples, std::int64_t thinning, Rng& rng, int m_max = 5,
                                   double batch_sweeps = 10.0);

/// Sample moments E[ST^m] for m = 0..m_max.
std::vector<double> empirical_moments(std::span<const std::int64_t> samples, int m_max);

/// Batch-means standard error of the sample mean of g(samples).
double batch_means_stderr(std::span<const double> values, std::int64_t batch_size);

struct LeakageEstimate {
  double probability = 0.0;
  double stderr_ = 0.0;
  double upper_bound = 0.0;  // 95% one-sided bound (rule of three) when no hits
  std::int64_t hits = 0;
  std::int64_t samples = 0;
  double b_theta = 0.0;
};

/// Empirical P[ST >= b_theta] under the spike-less chain. Throws DomainError
/// for a spiked config.
LeakageEstimate estimate_leakage(const PimcConfig& config, double theta, std::int64_t num_samples,
                                 std::int64_t thinning, std::int64_t burn_in, Rng& rng,
                                 double batch_sweeps = 10.0);

/// Half the l1 distance. Throws DomainError on size mismatch or inputs not
/// normalized within 1e-8.
double tv_distance(std::span<const double> p, std::span<const double> q);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

LinearFit linear_fit(std::span<const double> x, std::span<const double> y);

/// Least-squares fit of log gap against log n. Needs >= 4 positive points.
LinearFit fit_gap_exponent(std::span<const double> ns, std::span<const double> gaps);

/// 1 - lambda_2 of a reversible row-stochastic matrix, computed from the
/// symmetric matrix S_ij = sqrt(P_ij P_ji), which is similar to P when
/// detailed balance holds. Throws DomainError for rows not summing to 1.
double chain_spectral_gap(const Eigen::MatrixXd& P);
double chain_spectral_gap(const TransitionMatrix& P);
Eigen::VectorXd chain_eigenvalues(const Eigen::MatrixXd& P);
Eigen::MatrixXd to_dense(const TransitionMatrix& P);

/// Exact Hamming-weight marginal of one slice under pi, from the spin sectors
/// of the slice transfer operator (valid for any n, L).
WeightDistribution trotter_slice_marginal(const PimcConfig& config);

/// Exact E[ST] under pi, L times the band mass of one slice.
double exact_mean_spike_time(const PimcConfig& config);

/// Exact law of ST under pi: probs[m] = P[ST = m], m = 0..L.
std::vector<double> exact_spike_time_distribution(const PimcConfig& config);

/// Same law by summing enumerate_pi (nL <= 20).
std::vector<double> enumerated_spike_time_distribution(const PimcConfig& config);

struct WorstCaseS {
  double s = 0.0;
  double mean_spike_time = 0.0;
  std::vector<double> s_grid;
  std::vector<double> means;
};

/// Scans s and returns the point where the exact E[ST] is largest.
WorstCaseS worst_case_s(const SpikeParams& p, double beta, int slices, CostMode mode, std::span<const double> s_grid);

}  // namespace sqa
