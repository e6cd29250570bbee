#pragma once
// Distribution fitting with AIC ranking, density-normalized histograms, and a
// two-sample Kolmogorov–Smirnov statistic for vortex ensembles.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/trigamma.hpp>

#include "tfda/core.hpp"

namespace tfda {

enum class FitFamily { normal, lognormal, gamma, beta, exponential };

inline const char* family_name(FitFamily f) {
  switch (f) {
    case FitFamily::normal: return "normal";
    case FitFamily::lognormal: return "lognormal";
    case FitFamily::gamma: return "gamma";
    case FitFamily::beta: return "beta";
    case FitFamily::exponential: return "exponential";
  }
  return "?";
}

/* param1/param2 by family: normal (mu, sigma), lognormal (mu, sigma of log),
   gamma (shape, scale), beta (alpha, beta), exponential (rate, unused=NaN). */
struct FitResult {
  FitFamily family = FitFamily::normal;
  double param1 = std::numeric_limits<double>::quiet_NaN();
  double param2 = std::numeric_limits<double>::quiet_NaN();
  int n_params = 2;
  double loglik = std::numeric_limits<double>::quiet_NaN();
  double aic = std::numeric_limits<double>::quiet_NaN();
  int n = 0;
  bool converged = false;
  int rank = -1;  // 1-based among converged fits, -1 otherwise
};

namespace detail {

struct SampleMoments {
  int n = 0;
  double mean = 0, var = 0;          // var is the MLE (1/n) variance
  double log_mean = 0, log_var = 0;  // moments of log x
  double log1m_mean = 0;             // mean of log(1-x), NaN unless all x in (0,1)
  bool in_unit = true;
};

inline SampleMoments moments_of(const std::vector<double>& x) {
  SampleMoments m;
  m.n = int(x.size());
  auto [lo, hi] = std::minmax_element(x.begin(), x.end());
  if (*lo == *hi) {
    // summation rounding must not fake a nonzero spread here, or a degenerate
    // point mass would hand the location families an unbounded likelihood
    m.mean = *lo;
    m.log_mean = std::log(*lo);
    m.in_unit = *lo < 1.0;
    m.log1m_mean = m.in_unit ? std::log1p(-*lo) : std::numeric_limits<double>::quiet_NaN();
    return m;
  }
  double s = 0, sl = 0, sl1 = 0;
  for (double v : x) {
    s += v;
    sl += std::log(v);
    if (v >= 1.0) m.in_unit = false;
    else sl1 += std::log1p(-v);
  }
  m.mean = s / m.n;
  m.log_mean = sl / m.n;
  m.log1m_mean = m.in_unit ? sl1 / m.n : std::numeric_limits<double>::quiet_NaN();
  double sv = 0, slv = 0;
  for (double v : x) {
    sv += (v - m.mean) * (v - m.mean);
    slv += (std::log(v) - m.log_mean) * (std::log(v) - m.log_mean);
  }
  m.var = sv / m.n;
  m.log_var = slv / m.n;
  return m;
}

constexpr double kFitTol = 1e-10;
constexpr int kFitMaxIter = 100;

inline FitResult fit_normal(const std::vector<double>& x, const SampleMoments& m) {
  FitResult r;
  r.family = FitFamily::normal;
  r.n = m.n;
  if (m.var <= 0) return r;
  r.param1 = m.mean;
  r.param2 = std::sqrt(m.var);
  r.loglik = -0.5 * m.n * (std::log(kTwoPi * m.var) + 1.0);
  r.converged = true;
  (void)x;
  return r;
}

inline FitResult fit_lognormal(const std::vector<double>& x, const SampleMoments& m) {
  FitResult r;
  r.family = FitFamily::lognormal;
  r.n = m.n;
  if (m.log_var <= 0) return r;
  r.param1 = m.log_mean;
  r.param2 = std::sqrt(m.log_var);
  r.loglik = -0.5 * m.n * (std::log(kTwoPi * m.log_var) + 1.0) - m.n * m.log_mean;
  r.converged = true;
  (void)x;
  return r;
}

inline FitResult fit_exponential(const std::vector<double>& x, const SampleMoments& m) {
  FitResult r;
  r.family = FitFamily::exponential;
  r.n = m.n;
  r.n_params = 1;
  r.param1 = 1.0 / m.mean;
  r.loglik = m.n * (std::log(r.param1) - 1.0);
  r.converged = true;
  (void)x;
  return r;
}

/* Newton iteration on log k − ψ(k) = s, started from Minka's rational
   approximation; the profile scale is mean/k. */
inline FitResult fit_gamma(const std::vector<double>& x, const SampleMoments& m) {
  FitResult r;
  r.family = FitFamily::gamma;
  r.n = m.n;
  double s = std::log(m.mean) - m.log_mean;
  if (!(s > 0) || !std::isfinite(s)) return r;
  double k = (3.0 - s + std::sqrt((s - 3.0) * (s - 3.0) + 24.0 * s)) / (12.0 * s);
  bool ok = false;
  for (int it = 0; it < kFitMaxIter; ++it) {
    double f = std::log(k) - boost::math::digamma(k) - s;
    double fp = 1.0 / k - boost::math::trigamma(k);
    double step = f / fp;
    double next = k - step;
    while (next <= 0) {
      step *= 0.5;
      next = k - step;
    }
    k = next;
    if (std::fabs(step) < kFitTol * std::max(1.0, k)) {
      ok = true;
      break;
    }
  }
  if (!ok || !(k > 0)) return r;
  double theta = m.mean / k;
  r.param1 = k;
  r.param2 = theta;
  r.loglik = (k - 1.0) * m.n * m.log_mean - m.n * m.mean / theta -
             m.n * k * std::log(theta) - m.n * std::lgamma(k);
  r.converged = true;
  (void)x;
  return r;
}

/* Bivariate Newton on the beta log-likelihood gradient, method-of-moments
   start; requires every sample inside (0,1). */
inline FitResult fit_beta(const std::vector<double>& x, const SampleMoments& m) {
  FitResult r;
  r.family = FitFamily::beta;
  r.n = m.n;
  if (!m.in_unit || m.var <= 0) return r;
  double common = m.mean * (1.0 - m.mean) / m.var - 1.0;
  double a = m.mean * common, b = (1.0 - m.mean) * common;
  if (!(a > 0) || !(b > 0)) a = b = 1.0;
  bool ok = false;
  for (int it = 0; it < kFitMaxIter; ++it) {
    double psi_ab = boost::math::digamma(a + b);
    double g1 = psi_ab - boost::math::digamma(a) + m.log_mean;
    double g2 = psi_ab - boost::math::digamma(b) + m.log1m_mean;
    double tps = boost::math::trigamma(a + b);
    double h11 = tps - boost::math::trigamma(a);
    double h22 = tps - boost::math::trigamma(b);
    double det = h11 * h22 - tps * tps;
    if (det == 0) break;
    double da = (g1 * h22 - g2 * tps) / det;
    double db = (g2 * h11 - g1 * tps) / det;
    double scale = 1.0;
    while (a - scale * da <= 0 || b - scale * db <= 0) scale *= 0.5;
    a -= scale * da;
    b -= scale * db;
    if (std::fabs(scale * da) < kFitTol * std::max(1.0, a) &&
        std::fabs(scale * db) < kFitTol * std::max(1.0, b)) {
      ok = true;
      break;
    }
  }
  if (!ok) return r;
  r.param1 = a;
  r.param2 = b;
  r.loglik = m.n * (std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b)) +
             (a - 1.0) * m.n * m.log_mean + (b - 1.0) * m.n * m.log1m_mean;
  r.converged = true;
  (void)x;
  return r;
}

}  // namespace detail

/* All five families fitted by maximum likelihood to positive samples, ranked
   by AIC ascending; non-converged or inapplicable fits sink to the end with
   rank -1.  Samples are sorted internally, so ordering cannot matter. */
inline std::vector<FitResult> fit_all(std::vector<double> samples) {
  if (samples.size() < 30)
    throw insufficient_data_error("need at least 30 samples, got " +
                                  std::to_string(samples.size()));
  for (double v : samples)
    if (!(v > 0) || !std::isfinite(v))
      throw argument_error("samples must be positive finite reals");
  std::sort(samples.begin(), samples.end());
  detail::SampleMoments m = detail::moments_of(samples);

  std::vector<FitResult> fits = {
      detail::fit_normal(samples, m), detail::fit_lognormal(samples, m),
      detail::fit_gamma(samples, m), detail::fit_beta(samples, m),
      detail::fit_exponential(samples, m)};
  for (FitResult& f : fits)
    if (f.converged) f.aic = 2.0 * f.n_params - 2.0 * f.loglik;
  std::stable_sort(fits.begin(), fits.end(), [](const FitResult& a, const FitResult& b) {
    if (a.converged != b.converged) return a.converged;
    if (!a.converged) return false;
    return a.aic < b.aic;
  });
  int rank = 0;
  for (FitResult& f : fits) f.rank = f.converged ? ++rank : -1;
  return fits;
}

struct Hist1D {
  std::vector<double> edges;    // n_bins + 1, strictly increasing
  std::vector<double> density;  // n_bins, integrates to 1
  bool log_spaced = false;
};

struct Hist2D {
  std::vector<double> x_edges, y_edges;
  std::vector<std::vector<double>> density;  // [x bin][y bin], integrates to 1
};

namespace detail {

inline std::vector<double> make_edges(double lo, double hi, int n_bins, bool log_spaced) {
  if (lo == hi) {  // single repeated value: widen around it
    if (log_spaced && lo > 0) {
      lo *= 0.5;
      hi *= 2.0;
    } else {
      lo -= 0.5;
      hi += 0.5;
    }
  }
  if (log_spaced && lo <= 0) throw argument_error("log-spaced bins need positive samples");
  std::vector<double> e(std::size_t(n_bins) + 1);
  for (int i = 0; i <= n_bins; ++i) {
    double t = double(i) / n_bins;
    e[std::size_t(i)] = log_spaced ? lo * std::pow(hi / lo, t) : lo + t * (hi - lo);
  }
  e.front() = lo;
  e.back() = hi;
  return e;
}

inline int bin_of(double v, const std::vector<double>& edges) {
  int nb = int(edges.size()) - 1;
  int b = int(std::upper_bound(edges.begin(), edges.end(), v) - edges.begin()) - 1;
  return std::clamp(b, 0, nb - 1);  // top edge inclusive
}

}  // namespace detail

inline Hist1D hist1d(const std::vector<double>& samples, int n_bins, bool log_spaced = false) {
  if (samples.empty()) throw insufficient_data_error("histogram of an empty sample");
  if (n_bins < 2) throw argument_error("need at least 2 bins");
  auto [lo_it, hi_it] = std::minmax_element(samples.begin(), samples.end());
  Hist1D h;
  h.log_spaced = log_spaced;
  h.edges = detail::make_edges(*lo_it, *hi_it, n_bins, log_spaced);
  h.density.assign(std::size_t(n_bins), 0.0);
  for (double v : samples) h.density[std::size_t(detail::bin_of(v, h.edges))] += 1.0;
  for (int b = 0; b < n_bins; ++b)
    h.density[std::size_t(b)] /=
        double(samples.size()) * (h.edges[std::size_t(b) + 1] - h.edges[std::size_t(b)]);
  return h;
}

inline Hist2D hist2d(const std::vector<double>& x, const std::vector<double>& y, int n_bins) {
  if (x.size() != y.size()) throw argument_error("hist2d needs equal-length sample arrays");
  if (x.empty()) throw insufficient_data_error("histogram of an empty sample");
  if (n_bins < 2) throw argument_error("need at least 2 bins");
  auto [xlo, xhi] = std::minmax_element(x.begin(), x.end());
  auto [ylo, yhi] = std::minmax_element(y.begin(), y.end());
  Hist2D h;
  h.x_edges = detail::make_edges(*xlo, *xhi, n_bins, false);
  h.y_edges = detail::make_edges(*ylo, *yhi, n_bins, false);
  h.density.assign(std::size_t(n_bins), std::vector<double>(std::size_t(n_bins), 0.0));
  for (std::size_t k = 0; k < x.size(); ++k)
    h.density[std::size_t(detail::bin_of(x[k], h.x_edges))]
             [std::size_t(detail::bin_of(y[k], h.y_edges))] += 1.0;
  for (int i = 0; i < n_bins; ++i)
    for (int j = 0; j < n_bins; ++j) {
      double cell = (h.x_edges[std::size_t(i) + 1] - h.x_edges[std::size_t(i)]) *
                    (h.y_edges[std::size_t(j) + 1] - h.y_edges[std::size_t(j)]);
      h.density[std::size_t(i)][std::size_t(j)] /= double(x.size()) * cell;
    }
  return h;
}

/* Sup-distance between the two empirical CDFs. */
inline double ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw argument_error("KS statistic needs two nonempty samples");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double d = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    // step past every copy of the smaller value on both sides before
    // comparing, so ties contribute a single CDF evaluation point
    double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == v) ++i;
    while (j < b.size() && b[j] == v) ++j;
    d = std::max(d, std::fabs(double(i) / a.size() - double(j) / b.size()));
  }
  return std::min(d, 1.0);
}

inline void write_fits_csv(const std::vector<FitResult>& fits, std::ostream& out) {
  out << "family,param1,param2,loglik,aic,rank\n";
  char buf[160];
  for (const FitResult& f : fits) {
    std::snprintf(buf, sizeof buf, "%s,%.17g,%.17g,%.17g,%.17g,%d\n", family_name(f.family),
                  f.param1, f.param2, f.loglik, f.aic, f.rank);
    out << buf;
  }
}

inline void save_fits_csv(const std::vector<FitResult>& fits, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw io_error("cannot open '" + path + "' for writing");
  write_fits_csv(fits, out);
  if (!out) throw io_error("write failed for '" + path + "'");
}

inline void write_hist1d_csv(const Hist1D& h, std::ostream& out) {
  out << "lo,hi,density\n";
  char buf[120];
  for (std::size_t b = 0; b + 1 < h.edges.size(); ++b) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", h.edges[b], h.edges[b + 1],
                  h.density[b]);
    out << buf;
  }
}

inline void write_hist2d_csv(const Hist2D& h, std::ostream& out) {
  out << "x_lo,x_hi,y_lo,y_hi,density\n";
  char buf[200];
  for (std::size_t i = 0; i + 1 < h.x_edges.size(); ++i)
    for (std::size_t j = 0; j + 1 < h.y_edges.size(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g\n", h.x_edges[i],
                    h.x_edges[i + 1], h.y_edges[j], h.y_edges[j + 1], h.density[i][j]);
      out << buf;
    }
}

}  // namespace tfda
