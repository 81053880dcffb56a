#include "sqa/tridiagonal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "sqa/errors.hpp"

namespace sqa {
namespace {

void check_shape(std::span<const double> diag, std::span<const double> off) {
  if (diag.empty()) throw DomainError("tridiagonal matrix must have dimension >= 1");
  if (off.size() + 1 != diag.size()) {
    throw DomainError("off-diagonal length must be one less than the diagonal length");
  }
}

std::string dump(std::span<const double> diag, std::span<const double> off) {
  std::ostringstream os;
  os.precision(17);
  os << "diag=[";
  for (std::size_t i = 0; i < diag.size(); ++i) os << (i ? "," : "") << diag[i];
  os << "] off=[";
  for (std::size_t i = 0; i < off.size(); ++i) os << (i ? "," : "") << off[i];
  os << "]";
  return os.str();
}

double gershgorin_norm(std::span<const double> diag, std::span<const double> off) {
  double norm = 0.0;
  const std::size_t n = diag.size();
  for (std::size_t i = 0; i < n; ++i) {
    double r = std::abs(diag[i]);
    if (i > 0) r += std::abs(off[i - 1]);
    if (i + 1 < n) r += std::abs(off[i]);
    norm = std::max(norm, r);
  }
  return norm;
}

}  // namespace

TridiagonalEigen tridiagonal_eigensystem(std::span<const double> diag, std::span<const double> off,
                                         bool want_vectors) {
  check_shape(diag, off);
  const int n = static_cast<int>(diag.size());
  std::vector<double> d(diag.begin(), diag.end());
  std::vector<double> e(static_cast<std::size_t>(n), 0.0);
  std::copy(off.begin(), off.end(), e.begin());

  // z is column-major: column k holds eigenvector k.
  std::vector<double> z;
  if (want_vectors) {
    z.assign(static_cast<std::size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i) z[static_cast<std::size_t>(i) * n + i] = 1.0;
  }

  constexpr double eps = std::numeric_limits<double>::epsilon();
  for (int l = 0; l < n; ++l) {
    int iter = 0;
    int m;
    do {
      for (m = l; m < n - 1; ++m) {
        const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
        if (std::abs(e[m]) <= eps * dd) break;
      }
      if (m != l) {
        if (++iter > 60) {
          throw InternalError("tridiagonal QL failed to converge: " + dump(diag, off));
        }
        double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
        double r = std::hypot(g, 1.0);
        g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
        double s = 1.0, c = 1.0, p = 0.0;
        int i;
        for (i = m - 1; i >= l; --i) {
          double f = s * e[i];
          const double b = c * e[i];
          r = std::hypot(f, g);
          e[i + 1] = r;
          if (r == 0.0) {
            d[i + 1] -= p;
            e[m] = 0.0;
            break;
          }
          s = f / r;
          c = g / r;
          g = d[i + 1] - p;
          r = (d[i] - g) * s + 2.0 * c * b;
          p = s * r;
          d[i + 1] = g + p;
          g = c * r - b;
          if (want_vectors) {
            double* zi = &z[static_cast<std::size_t>(i) * n];
            double* zi1 = &z[static_cast<std::size_t>(i + 1) * n];
            for (int k = 0; k < n; ++k) {
              f = zi1[k];
              zi1[k] = s * zi[k] + c * f;
              zi[k] = c * zi[k] - s * f;
            }
          }
        }
        if (r == 0.0 && i >= l) continue;
        d[l] -= p;
        e[l] = g;
        e[m] = 0.0;
      }
    } while (m != l);
  }

  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) { return d[a] < d[b]; });

  TridiagonalEigen out;
  out.values.reserve(static_cast<std::size_t>(n));
  for (int idx : order) out.values.push_back(d[idx]);
  if (want_vectors) {
    out.vectors.reserve(static_cast<std::size_t>(n));
    for (int idx : order) {
      const double* col = &z[static_cast<std::size_t>(idx) * n];
      out.vectors.emplace_back(col, col + n);
    }
  }
  return out;
}

int sturm_count(std::span<const double> diag, std::span<const double> off, double x) {
  constexpr double tiny = std::numeric_limits<double>::min();
  int count = 0;
  double q = diag[0] - x;
  if (q < 0.0) ++count;
  for (std::size_t i = 1; i < diag.size(); ++i) {
    if (q == 0.0) q = tiny;
    q = diag[i] - x - off[i - 1] * off[i - 1] / q;
    if (q < 0.0) ++count;
  }
  return count;
}

std::vector<double> tridiagonal_lowest(std::span<const double> diag, std::span<const double> off, int count) {
  check_shape(diag, off);
  count = std::min<int>(count, static_cast<int>(diag.size()));
  const double norm = gershgorin_norm(diag, off);
  const double lo0 = -norm - 1.0;
  const double hi0 = norm + 1.0;
  const double tol = 4.0 * std::numeric_limits<double>::epsilon() * std::max(norm, 1.0);

  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) {
    double lo = out.empty() ? lo0 : out.back() - tol;
    double hi = hi0;
    // Invariant: sturm_count(lo) <= k < sturm_count(hi).
    while (hi - lo > tol) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      if (sturm_count(diag, off, mid) > k) {
        hi = mid;
      } else {
        lo = mid;
      }
    }
    out.push_back(0.5 * (lo + hi));
  }
  return out;
}

std::vector<double> tridiagonal_eigenvector(std::span<const double> diag, std::span<const double> off,
                                            double eigenvalue) {
  check_shape(diag, off);
  const std::size_t n = diag.size();
  const double norm = std::max(gershgorin_norm(diag, off), 1.0);
  const double shift = eigenvalue + 1e-13 * norm;

  // Thomas algorithm on (T - shift); tiny pivots are clamped.
  std::vector<double> x(n, 1.0);
  std::vector<double> cp(n), dp(n);
  for (int sweep = 0; sweep < 4; ++sweep) {
    double b0 = diag[0] - shift;
    if (std::abs(b0) < 1e-300) b0 = 1e-300;
    cp[0] = n > 1 ? off[0] / b0 : 0.0;
    dp[0] = x[0] / b0;
    for (std::size_t i = 1; i < n; ++i) {
      double m = (diag[i] - shift) - off[i - 1] * cp[i - 1];
      if (std::abs(m) < 1e-300) m = 1e-300;
      cp[i] = i + 1 < n ? off[i] / m : 0.0;
      dp[i] = (x[i] - off[i - 1] * dp[i - 1]) / m;
    }
    x[n - 1] = dp[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) x[i] = dp[i] - cp[i] * x[i + 1];
    double nrm = 0.0;
    for (double v : x) nrm += v * v;
    nrm = std::sqrt(nrm);
    if (!(nrm > 0.0) || !std::isfinite(nrm)) throw InternalError("inverse iteration broke down: " + dump(diag, off));
    for (double& v : x) v /= nrm;
  }
  const auto big = std::max_element(x.begin(), x.end(), [](double a, double b) { return std::abs(a) < std::abs(b); });
  if (*big < 0.0) {
    for (double& v : x) v = -v;
  }
  return x;
}

}  // namespace sqa
