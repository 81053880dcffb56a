#include "sqa/analysis.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "sqa/errors.hpp"

namespace sqa {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr std::uint64_t kDenseChainMaxDim = 4096;

double log_add(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(-std::abs(a - b)));
}

double log_sum_exp(std::span<const double> v) {
  double m = kNegInf;
  for (double x : v) m = std::max(m, x);
  if (m == kNegInf) return m;
  double acc = 0.0;
  for (double x : v) acc += std::exp(x - m);
  return m + std::log(acc);
}

using Mat = Eigen::MatrixXd;

// exp(w M) for an entrywise nonnegative M by Taylor series on M w / 2^k and k
// squarings; every intermediate stays nonnegative, so entries keep full
// relative precision. The result is returned as stored * e^{log_scale}.
Mat nonnegative_expm(const Mat& M, double w, double& log_scale) {
  const auto D = M.rows();
  log_scale = 0.0;
  double norm = 0.0;
  for (Eigen::Index i = 0; i < D; ++i) norm = std::max(norm, M.row(i).sum());
  const double x = w * norm;
  int k = 0;
  if (x > 0.5) k = static_cast<int>(std::ceil(std::log2(x / 0.5)));
  const Mat A = M * (w / std::ldexp(1.0, k));
  Mat E = Mat::Identity(D, D);
  Mat term = Mat::Identity(D, D);
  for (int j = 1; j <= 30; ++j) {
    term = term * A / j;
    E += term;
    if (term.maxCoeff() <= 1e-18 * E.maxCoeff()) break;
  }
  for (int i = 0; i < k; ++i) {
    E = E * E;
    log_scale *= 2.0;
    const double m = E.maxCoeff();
    E /= m;
    log_scale += std::log(m);
  }
  return E;
}

// Slice transfer data of one spin sector: exp(omega * 2 S_x) and the
// per-weight cost factors exp(-beta s f(k) / L).
struct SectorTransfer {
  int q = 0;
  int dim = 0;
  double log_multiplicity = 0.0;
  Mat E;
  double log_scale_E = 0.0;
  std::vector<double> g;       // indexed by k - q
  std::vector<std::uint8_t> band;
};

std::vector<SectorTransfer> sector_transfers(const PimcConfig& config) {
  const SpikeParams& p = config.params();
  const int n = p.n;
  std::vector<SectorTransfer> out;
  for (const SpinSector& sec : spin_sectors(n)) {
    SectorTransfer t;
    t.q = sec.q;
    t.dim = sec.dim;
    t.log_multiplicity = sec.log_multiplicity;
    const SymmetricHamiltonian h = sector_hamiltonian(p, sec.q, 0.0, config.mode());
    Mat M = Mat::Zero(t.dim, t.dim);
    for (int i = 0; i + 1 < t.dim; ++i) M(i, i + 1) = M(i + 1, i) = -h.offdiag[static_cast<std::size_t>(i)];
    t.E = nonnegative_expm(M, config.omega(), t.log_scale_E);
    t.g.resize(static_cast<std::size_t>(t.dim));
    t.band.resize(static_cast<std::size_t>(t.dim));
    for (int i = 0; i < t.dim; ++i) {
      const int k = sec.q + i;
      t.g[static_cast<std::size_t>(i)] = std::exp(-config.cost_scale() * config.cost()(k));
      t.band[static_cast<std::size_t>(i)] = p.in_spike(k) ? 1 : 0;
    }
    out.push_back(std::move(t));
  }
  return out;
}

}  // namespace

std::int64_t spike_time(const WorldlineState& state) { return state.spike_time(); }

double st_threshold(double theta, const PimcConfig& config) {
  if (!(theta > 0.0 && theta < 1.0)) throw DomainError("theta must lie in (0, 1)");
  const SpikeParams& p = config.params();
  return config.slices() / (config.beta() * std::pow(static_cast<double>(p.n), p.alpha)) * std::log(1.0 / theta);
}

double moment_bound(int m, int L, int n, double eta) {
  if (m < 1) throw DomainError("moment order m must be >= 1");
  if (L < 1 || n < 1) throw DomainError("moment_bound needs L >= 1 and n >= 1");
  const double dl = L;
  const double tail = dl * (eta - 0.5) * std::log(static_cast<double>(n));
  if (m < L) return m * std::log(2.0 * dl * std::pow(static_cast<double>(n), eta - 0.5));
  if (m >= 2 * L) return dl * std::log(static_cast<double>(m)) + dl * std::log(dl) + tail;
  return dl * std::log(2.0 * std::exp(1.0) * dl) + tail;
}

BoundReport mgf_chernoff_bound(double lambda, double theta, const PimcConfig& config) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw DomainError("lambda must be finite and > 0");
  const SpikeParams& p = config.params();
  const double L = config.slices();
  const double logn = std::log(static_cast<double>(p.n));
  const double c = (p.eta - 0.5) * logn;  // log n^{eta-1/2}

  BoundReport r;
  r.theta = theta;
  r.lambda = lambda;
  r.b_theta = st_threshold(theta, config);
  r.lambda_below_range = lambda < std::exp(-c) / L;

  std::vector<double> t1(static_cast<std::size_t>(config.slices()) + 1);
  const double base = std::log(2.0 * lambda * L) + c;
  for (int m = 0; m <= config.slices(); ++m) t1[static_cast<std::size_t>(m)] = m * base - std::lgamma(m + 1.0);
  r.terms[0] = log_sum_exp(t1);
  r.terms[1] = std::log(L) + 2.0 * L * std::log(lambda) - std::lgamma(L + 1.0) + L * std::log(2.0 * std::exp(1.0) * L) + L * c;
  r.terms[2] = -1.0 + L * std::log(L) + L * c + 2.0 * L * (1.0 + std::log(lambda)) + std::exp(1.0) * lambda;
  r.mgf_bound = log_sum_exp(std::span<const double>(r.terms, 3));
  r.chernoff_bound = r.mgf_bound - lambda * r.b_theta;
  return r;
}

std::vector<double> empirical_moments(std::span<const std::int64_t> samples, int m_max) {
  if (samples.empty()) throw DomainError("no spike-time samples");
  if (m_max < 0) throw DomainError("m_max must be >= 0");
  std::vector<double> mom(static_cast<std::size_t>(m_max) + 1, 0.0);
  for (std::int64_t v : samples) {
    double pw = 1.0;
    for (int m = 0; m <= m_max; ++m) {
      mom[static_cast<std::size_t>(m)] += pw;
      pw *= static_cast<double>(v);
    }
  }
  for (double& x : mom) x /= static_cast<double>(samples.size());
  return mom;
}

double batch_means_stderr(std::span<const double> values, std::int64_t batch_size) {
  if (values.empty()) throw DomainError("no values for a standard error");
  if (batch_size < 1) batch_size = 1;
  const auto N = static_cast<std::int64_t>(values.size());
  std::int64_t nb = N / batch_size;
  if (nb < 2) {
    batch_size = 1;
    nb = N;
  }
  if (nb < 2) return 0.0;
  std::vector<double> means(static_cast<std::size_t>(nb), 0.0);
  for (std::int64_t b = 0; b < nb; ++b) {
    double acc = 0.0;
    for (std::int64_t i = 0; i < batch_size; ++i) acc += values[static_cast<std::size_t>(b * batch_size + i)];
    means[static_cast<std::size_t>(b)] = acc / batch_size;
  }
  const double mu = std::accumulate(means.begin(), means.end(), 0.0) / nb;
  double var = 0.0;
  for (double x : means) var += (x - mu) * (x - mu);
  var /= (nb - 1);
  return std::sqrt(var / nb);
}

SpikeTimeStats collect_spike_times(WorldlineState& state, const PimcConfig& config, std::int64_t burn_in,
                                   std::int64_t num_samples, std::int64_t thinning, Rng& rng, int m_max,
                                   double batch_sweeps) {
  if (num_samples < 1) throw DomainError("num_samples must be >= 1");
  if (thinning < 1) throw DomainError("thinning must be >= 1");
  if (burn_in < 0) throw DomainError("burn-in must be >= 0");
  sweep(state, config, burn_in, rng);
  SpikeTimeStats st;
  st.samples.reserve(static_cast<std::size_t>(num_samples));
  for (std::int64_t i = 0; i < num_samples; ++i) {
    sweep(state, config, thinning, rng);
    st.samples.push_back(state.spike_time());
  }
  st.batch_size = std::max<std::int64_t>(
      1, static_cast<std::int64_t>(std::ceil(batch_sweeps * static_cast<double>(config.sites()) / thinning)));
  st.moments = empirical_moments(st.samples, m_max);
  st.mean = st.moments.size() > 1 ? st.moments[1] : 0.0;
  double var = 0.0;
  for (auto v : st.samples) var += (v - st.mean) * (v - st.mean);
  st.variance = num_samples > 1 ? var / (num_samples - 1) : 0.0;

  st.moment_stderr.assign(st.moments.size(), 0.0);
  std::vector<double> vals(st.samples.size());
  for (int m = 1; m <= m_max; ++m) {
    for (std::size_t i = 0; i < vals.size(); ++i) vals[i] = std::pow(static_cast<double>(st.samples[i]), m);
    st.moment_stderr[static_cast<std::size_t>(m)] = batch_means_stderr(vals, st.batch_size);
  }
  const double se = m_max >= 1 ? st.moment_stderr[1] : 0.0;
  st.n_effective = se > 0.0 ? st.variance / (se * se) : static_cast<double>(num_samples);
  return st;
}

LeakageEstimate estimate_leakage(const PimcConfig& config, double theta, std::int64_t num_samples,
                                 std::int64_t thinning, std::int64_t burn_in, Rng& rng, double batch_sweeps) {
  if (config.mode() != CostMode::Spikeless) throw DomainError("leakage is defined under the spike-less chain");
  if (num_samples < 1 || thinning < 1 || burn_in < 0) throw DomainError("invalid leakage sampling sizes");
  LeakageEstimate est;
  est.b_theta = st_threshold(theta, config);
  WorldlineState state = WorldlineState::random(config.params(), config.slices(), rng);
  sweep(state, config, burn_in, rng);
  std::vector<double> hits(static_cast<std::size_t>(num_samples));
  for (std::int64_t i = 0; i < num_samples; ++i) {
    sweep(state, config, thinning, rng);
    const bool hit = static_cast<double>(state.spike_time()) >= est.b_theta;
    hits[static_cast<std::size_t>(i)] = hit ? 1.0 : 0.0;
    est.hits += hit ? 1 : 0;
  }
  est.samples = num_samples;
  est.probability = static_cast<double>(est.hits) / num_samples;
  const auto batch = std::max<std::int64_t>(
      1, static_cast<std::int64_t>(std::ceil(batch_sweeps * static_cast<double>(config.sites()) / thinning)));
  est.stderr_ = batch_means_stderr(hits, batch);
  const double batches = std::max<double>(1.0, std::floor(static_cast<double>(num_samples) / batch));
  est.upper_bound = est.hits == 0 ? std::min(1.0, 3.0 / batches) : est.probability + 2.0 * est.stderr_;
  return est;
}

double tv_distance(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw DomainError("tv_distance: supports differ in size");
  const double sp = std::accumulate(p.begin(), p.end(), 0.0);
  const double sq = std::accumulate(q.begin(), q.end(), 0.0);
  if (std::abs(sp - 1.0) > 1e-8 || std::abs(sq - 1.0) > 1e-8) throw DomainError("tv_distance: inputs are not normalized");
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) acc += std::abs(p[i] - q[i]);
  return 0.5 * acc;
}

LinearFit linear_fit(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw DomainError("linear_fit needs two equal-length series of >= 2 points");
  const double N = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / N;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / N;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) throw DomainError("linear_fit: x values are all equal");
  LinearFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ssr = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (f.intercept + f.slope * x[i]);
    ssr += r * r;
  }
  f.r_squared = syy > 0.0 ? 1.0 - ssr / syy : 1.0;
  return f;
}

LinearFit fit_gap_exponent(std::span<const double> ns, std::span<const double> gaps) {
  if (ns.size() != gaps.size()) throw DomainError("fit_gap_exponent: size mismatch");
  if (ns.size() < 4) throw DomainError("fit_gap_exponent needs at least 4 points");
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < ns.size(); ++i) {
    if (!(ns[i] > 0.0) || !(gaps[i] > 0.0)) throw DomainError("fit_gap_exponent: inputs must be positive");
    lx.push_back(std::log(ns[i]));
    ly.push_back(std::log(gaps[i]));
  }
  return linear_fit(lx, ly);
}

Eigen::VectorXd chain_eigenvalues(const Eigen::MatrixXd& P) {
  if (P.rows() != P.cols() || P.rows() < 2) throw DomainError("chain matrix must be square with dim >= 2");
  const auto D = P.rows();
  for (Eigen::Index i = 0; i < D; ++i) {
    if (std::abs(P.row(i).sum() - 1.0) > 1e-10) throw DomainError("row " + std::to_string(i) + " does not sum to 1");
    if (P.row(i).minCoeff() < -1e-15) throw DomainError("row " + std::to_string(i) + " has a negative entry");
  }
  Mat S(D, D);
  for (Eigen::Index i = 0; i < D; ++i) {
    for (Eigen::Index j = 0; j < D; ++j) S(i, j) = std::sqrt(std::max(0.0, P(i, j)) * std::max(0.0, P(j, i)));
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(S, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw InternalError("chain eigensolver failed");
  return es.eigenvalues();
}

double chain_spectral_gap(const Eigen::MatrixXd& P) {
  const Eigen::VectorXd ev = chain_eigenvalues(P);
  return 1.0 - ev(ev.size() - 2);
}

Eigen::MatrixXd to_dense(const TransitionMatrix& P) {
  if (P.dim > kDenseChainMaxDim) throw DomainError("dense chain matrix refused above dimension 4096");
  const auto D = static_cast<Eigen::Index>(P.dim);
  Mat M = Mat::Zero(D, D);
  for (std::uint64_t x = 0; x < P.dim; ++x) {
    M(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(x)) = P.diagonal[x];
    for (int k = 0; k < P.sites; ++k) {
      M(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(x ^ (1ULL << k))) = P(x, k);
    }
  }
  return M;
}

double chain_spectral_gap(const TransitionMatrix& P) { return chain_spectral_gap(to_dense(P)); }

WeightDistribution trotter_slice_marginal(const PimcConfig& config) {
  const int n = config.params().n;
  const int L = config.slices();
  std::vector<double> logw(static_cast<std::size_t>(n) + 1, kNegInf);
  for (const SectorTransfer& t : sector_transfers(config)) {
    // T = diag(g) E; T^L by repeated squaring with rescaling.
    Mat T = Eigen::Map<const Eigen::VectorXd>(t.g.data(), t.dim).asDiagonal() * t.E;
    double log_T = t.log_scale_E;
    Mat R = Mat::Identity(t.dim, t.dim);
    double log_R = 0.0;
    for (int e = L; e > 0; e >>= 1) {
      if (e & 1) {
        R = R * T;
        log_R += log_T;
        const double m = R.maxCoeff();
        R /= m;
        log_R += std::log(m);
      }
      if (e > 1) {
        T = T * T;
        log_T *= 2.0;
        const double m = T.maxCoeff();
        T /= m;
        log_T += std::log(m);
      }
    }
    for (int i = 0; i < t.dim; ++i) {
      const double d = R(i, i);
      if (d <= 0.0) continue;
      auto& slot = logw[static_cast<std::size_t>(t.q + i)];
      slot = log_add(slot, std::log(d) + log_R + t.log_multiplicity);
    }
  }
  const double lz = log_sum_exp(logw);
  if (!std::isfinite(lz)) throw InternalError("slice marginal normalization is not finite");
  WeightDistribution out;
  out.probs.resize(logw.size());
  for (std::size_t k = 0; k < logw.size(); ++k) out.probs[k] = std::exp(logw[k] - lz);
  return out;
}

double exact_mean_spike_time(const PimcConfig& config) {
  const WeightDistribution w = trotter_slice_marginal(config);
  double band = 0.0;
  for (int k = 0; k <= config.params().n; ++k) {
    if (config.params().in_spike(k)) band += w.probs[static_cast<std::size_t>(k)];
  }
  return config.slices() * band;
}

std::vector<double> exact_spike_time_distribution(const PimcConfig& config) {
  const int L = config.slices();
  std::vector<double> logp(static_cast<std::size_t>(L) + 1, kNegInf);
  for (const SectorTransfer& t : sector_transfers(config)) {
    const int D = t.dim;
    // poly[m] holds the coefficient of z^m of the propagated vector.
    std::vector<Eigen::VectorXd> poly, next;
    for (int b = 0; b < D; ++b) {
      poly.assign(static_cast<std::size_t>(L) + 1, Eigen::VectorXd::Zero(D));
      poly[0](b) = 1.0;
      double log_scale = 0.0;
      int deg = 0;
      for (int step = 0; step < L; ++step) {
        next.assign(static_cast<std::size_t>(L) + 1, Eigen::VectorXd::Zero(D));
        for (int m = 0; m <= deg; ++m) {
          const Eigen::VectorXd v = t.E * poly[static_cast<std::size_t>(m)];
          for (int i = 0; i < D; ++i) {
            const double val = t.g[static_cast<std::size_t>(i)] * v(i);
            next[static_cast<std::size_t>(m + t.band[static_cast<std::size_t>(i)])](i) += val;
          }
        }
        ++deg;
        double mx = 0.0;
        for (int m = 0; m <= deg; ++m) mx = std::max(mx, next[static_cast<std::size_t>(m)].maxCoeff());
        if (!(mx > 0.0)) throw InternalError("spike-time transfer underflowed");
        for (int m = 0; m <= deg; ++m) next[static_cast<std::size_t>(m)] /= mx;
        log_scale += std::log(mx) + t.log_scale_E;
        poly.swap(next);
      }
      for (int m = 0; m <= L; ++m) {
        const double c = poly[static_cast<std::size_t>(m)](b);
        if (c <= 0.0) continue;
        auto& slot = logp[static_cast<std::size_t>(m)];
        slot = log_add(slot, std::log(c) + log_scale + t.log_multiplicity);
      }
    }
  }
  const double lz = log_sum_exp(logp);
  if (!std::isfinite(lz)) throw InternalError("spike-time distribution normalization is not finite");
  std::vector<double> out(logp.size());
  for (std::size_t m = 0; m < out.size(); ++m) out[m] = std::exp(logp[m] - lz);
  return out;
}

std::vector<double> enumerated_spike_time_distribution(const PimcConfig& config) {
  const std::vector<double> pi = enumerate_pi(config);
  const SpikeParams& p = config.params();
  const int n = p.n;
  const int L = config.slices();
  const std::uint64_t mask = (1ULL << n) - 1;
  std::vector<double> out(static_cast<std::size_t>(L) + 1, 0.0);
  for (std::uint64_t x = 0; x < pi.size(); ++x) {
    int st = 0;
    for (int i = 0; i < L; ++i) st += p.in_spike(std::popcount((x >> (i * n)) & mask)) ? 1 : 0;
    out[static_cast<std::size_t>(st)] += pi[x];
  }
  return out;
}

WorstCaseS worst_case_s(const SpikeParams& p, double beta, int slices, CostMode mode, std::span<const double> s_grid) {
  if (s_grid.empty()) throw DomainError("worst_case_s needs a nonempty s grid");
  WorstCaseS w;
  w.s_grid.assign(s_grid.begin(), s_grid.end());
  w.mean_spike_time = -1.0;
  for (double s : s_grid) {
    const double m = exact_mean_spike_time(PimcConfig(p, beta, slices, s, mode));
    w.means.push_back(m);
    if (m > w.mean_spike_time) {
      w.mean_spike_time = m;
      w.s = s;
    }
  }
  return w;
}

}  // namespace sqa
