#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>

#include "ptlab/common.hpp"
#include "ptlab/rng.hpp"

namespace ptlab {

// Index-1 stable laws with characteristic function
//   exp(-|k| (1 + i beta (2/pi) sign(k) log|k|))
// for the standard member; C and shift act as scale and location,
// pdf(x) = L((x - shift) / C) / C.

struct LevyStableParams {
  double alpha = 1.0;
  double beta = 1.0;
  double C = 1.0;
  double shift = 0.0;

  void validate() const {
    require(alpha > 0.0 && alpha <= 2.0, "LevyStableParams: alpha must lie in (0, 2]");
    require(std::abs(beta) <= 1.0, "LevyStableParams: |beta| must be <= 1");
    require(C > 0.0, "LevyStableParams: C must be positive");
    require(alpha == 1.0, "LevyStableParams: only alpha = 1 is supported");
  }
};

namespace detail {

inline double gk_integrate(auto&& f, double a, double b) {
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 10, 1e-11);
}

// Integral over [mode, end] (either orientation) on a grid graded
// geometrically toward the mode, where the integrand varies fastest.
inline double gk_integrate_graded(auto&& f, double mode, double end) {
  const double span = end - mode;
  if (span == 0.0) return 0.0;
  double acc = 0.0, prev = mode;
  for (int j = 40; j >= 0; --j) {
    const double next = mode + span * std::ldexp(1.0, -j);
    acc += boost::math::quadrature::gauss<double, 30>::integrate(f, std::min(prev, next), std::max(prev, next));
    prev = next;
  }
  return acc;
}

// log V of the Zolotarev integral representation (beta > 0), written in
// u = theta + pi/2 in (0, pi) so the left end is free of cancellation.
inline double stable_log_v(double u, double beta) {
  const double c = 0.5 * kPi * (1.0 - beta) + beta * u;
  const double s = std::sin(u);
  return std::log(2.0 / kPi) + std::log(c / s) - c * std::cos(u) / (beta * s);
}

// Integral of exp(h(u)) over (0, pi) for a unimodal h with known mode,
// returned as its logarithm to survive underflow.
inline double log_integral_unimodal(auto&& h, double mode) {
  const double top = h(mode);
  if (top == -std::numeric_limits<double>::infinity()) return top;  // beyond double range
  require(std::isfinite(top), "stable density: integrand not finite at its mode");
  auto g = [&](double u) {
    const double v = std::exp(h(u) - top);
    return std::isfinite(v) ? v : 0.0;
  };
  return top + std::log(gk_integrate_graded(g, mode, 0.0) + gk_integrate_graded(g, mode, kPi));
}

// u at which log V(u) = target; V increases monotonically for beta > 0. For
// beta = 1, V stays finite as u -> 0 and the target may lie below its range,
// in which case the left end is returned.
inline double stable_u_at(double target, double beta) {
  double lo = 1e-300, hi = kPi * (1.0 - 1e-16);
  if (stable_log_v(lo, beta) >= target) return lo;
  for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
    const double mid = 0.5 * (lo + hi);
    (stable_log_v(mid, beta) < target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace detail

/// log density of the standard index-1 law with skewness beta.
inline double stable_log_density(double x, double beta) {
  require(std::abs(beta) <= 1.0, "stable_log_density: |beta| must be <= 1");
  if (beta == 0.0) return -std::log(kPi * (1.0 + x * x));
  if (beta < 0.0) return stable_log_density(-x, -beta);
  const double a = -kPi * x / (2.0 * beta);
  // integrand V exp(-e^a V); maximal where e^a V = 1
  auto h = [&](double t) {
    const double lv = detail::stable_log_v(t, beta);
    return lv - std::exp(a + lv);
  };
  const double mode = detail::stable_u_at(-a, beta);
  return a - std::log(2.0 * beta) + detail::log_integral_unimodal(h, mode);
}

inline double stable_cdf_standard(double x, double beta) {
  require(std::abs(beta) <= 1.0, "stable_cdf: |beta| must be <= 1");
  if (beta == 0.0) return 0.5 + std::atan(x) / kPi;
  if (beta < 0.0) return 1.0 - stable_cdf_standard(-x, -beta);
  const double a = -kPi * x / (2.0 * beta);
  auto g = [&](double t) {
    const double v = std::exp(-std::exp(a + detail::stable_log_v(t, beta)));
    return std::isfinite(v) ? v : 0.0;
  };
  const double mid = detail::stable_u_at(-a, beta);
  return std::clamp((detail::gk_integrate_graded(g, mid, 0.0) + detail::gk_integrate_graded(g, mid, kPi)) / kPi, 0.0, 1.0);
}

inline double stable_pdf(double x, const LevyStableParams& p) {
  p.validate();
  return std::exp(stable_log_density((x - p.shift) / p.C, p.beta)) / p.C;
}

inline double stable_log_pdf(double x, const LevyStableParams& p) {
  p.validate();
  return stable_log_density((x - p.shift) / p.C, p.beta) - std::log(p.C);
}

inline double stable_cdf(double x, const LevyStableParams& p) {
  p.validate();
  return stable_cdf_standard((x - p.shift) / p.C, p.beta);
}

/// Density by direct inversion of the characteristic function; slower, used
/// as an independent cross-check of stable_pdf.
inline double stable_pdf_charfn(double x, const LevyStableParams& p) {
  p.validate();
  const double y = (x - p.shift) / p.C;
  auto f = [&](double k) {
    if (k <= 0.0) return 1.0;
    return std::exp(-k) * std::cos(k * y + (2.0 / kPi) * p.beta * k * std::log(k));
  };
  double acc = 0.0;
  for (double a = 0.0; a < 60.0; a += 0.5) acc += detail::gk_integrate(f, a, a + 0.5);
  return acc / (kPi * p.C);
}

inline double stable_quantile(double q, const LevyStableParams& p) {
  p.validate();
  require(q > 0.0 && q < 1.0, "stable_quantile: q must lie in (0, 1)");
  auto f = [&](double y) { return stable_cdf_standard(y, p.beta) - q; };
  double lo = -1.0, hi = 1.0;
  while (f(lo) > 0.0) lo *= 2.0;
  while (f(hi) < 0.0) hi *= 2.0;
  std::uintmax_t iters = 200;
  const auto r = boost::math::tools::toms748_solve(f, lo, hi, boost::math::tools::eps_tolerance<double>(50), iters);
  return p.shift + p.C * 0.5 * (r.first + r.second);
}

/// Chambers-Mallows-Stuck draws.
inline std::vector<double> stable_sample(const LevyStableParams& p, std::size_t count, std::uint64_t seed) {
  p.validate();
  Rng rng(seed);
  std::vector<double> out(count);
  for (auto& x : out) {
    const double u = kPi * (rng.uniform() - 0.5);
    const double w = rng.exponential();
    const double c = kPi / 2.0 + p.beta * u;
    const double s = (2.0 / kPi) * (c * std::tan(u) - p.beta * std::log((kPi / 2.0) * w * std::cos(u) / c));
    x = p.shift + p.C * s;
  }
  return out;
}

inline double cauchy_pdf(double x, double scale) {
  require(scale > 0.0, "cauchy_pdf: scale must be positive");
  return scale / (kPi * (x * x + scale * scale));
}

// ---------------------------------------------------------------------------
// Fitting.

inline double sample_quantile(std::span<const double> sorted, double q) {
  require(!sorted.empty(), "sample_quantile: empty sample");
  const double pos = q * (sorted.size() - 1);
  const auto i = static_cast<std::size_t>(pos);
  if (i + 1 >= sorted.size()) return sorted.back();
  return sorted[i] + (pos - i) * (sorted[i + 1] - sorted[i]);
}

struct StableFit {
  LevyStableParams params;
  double q25 = 0.0, q50 = 0.0, q75 = 0.0;
  std::size_t count = 0;
};

/// Quantile matching for a fixed skewness: scale from the interquartile
/// range, location from the median.
inline StableFit fit_stable_quantiles(std::vector<double> samples, double beta = 1.0) {
  require(samples.size() >= 8, "fit_stable_quantiles: need at least 8 samples");
  std::sort(samples.begin(), samples.end());
  const LevyStableParams standard{1.0, beta, 1.0, 0.0};
  const double s25 = stable_quantile(0.25, standard), s50 = stable_quantile(0.5, standard),
               s75 = stable_quantile(0.75, standard);
  StableFit fit;
  fit.count = samples.size();
  fit.q25 = sample_quantile(samples, 0.25);
  fit.q50 = sample_quantile(samples, 0.5);
  fit.q75 = sample_quantile(samples, 0.75);
  fit.params = standard;
  fit.params.C = (fit.q75 - fit.q25) / (s75 - s25);
  fit.params.shift = fit.q50 - s50 * fit.params.C;
  require(fit.params.C > 0.0, "fit_stable_quantiles: degenerate sample");
  return fit;
}

struct TailSlope {
  double slope = std::numeric_limits<double>::quiet_NaN();
  std::size_t points = 0;
};

/// Least-squares slope of log CCDF against log(x - origin) over the sample
/// points whose empirical CCDF lies in [ccdf_lo, ccdf_hi].
inline TailSlope ccdf_tail_slope(std::vector<double> samples, double origin, double ccdf_lo = 1e-3,
                                 double ccdf_hi = 1e-2) {
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  TailSlope out;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double ccdf = (n - i) / n;
    if (ccdf < ccdf_lo || ccdf > ccdf_hi || samples[i] <= origin) continue;
    const double x = std::log(samples[i] - origin), y = std::log(ccdf);
    sx += x, sy += y, sxx += x * x, sxy += x * y;
    ++out.points;
  }
  if (out.points >= 3) {
    const double m = static_cast<double>(out.points);
    out.slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  }
  return out;
}

/// Kolmogorov-Smirnov distance between a sample and a continuous CDF.
inline double ks_distance(std::vector<double> samples, auto&& cdf) {
  require(!samples.empty(), "ks_distance: empty sample");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    d = std::max({d, f - i / n, (i + 1) / n - f});
  }
  return d;
}

}  // namespace ptlab
