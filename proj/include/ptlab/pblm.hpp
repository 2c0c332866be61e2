#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <exception>
#include <limits>
#include <optional>
#include <span>
#include <thread>
#include <vector>

#include <Eigen/Dense>

#include "ptlab/common.hpp"
#include "ptlab/downfold.hpp"
#include "ptlab/linalg.hpp"
#include "ptlab/rng.hpp"
#include "ptlab/stable.hpp"

namespace ptlab {

// ---------------------------------------------------------------------------
// Preferred-basis Levy matrices.

enum class DiagonalLaw { uniform, gaussian };

struct PBLMConfig {
  std::size_t M = 1024;
  double gamma = 1.5;
  double lambda = 1.0;
  double V_typ = 1.0;
  DiagonalLaw diagonal = DiagonalLaw::uniform;

  /// Width of the diagonal disorder, lambda M^(gamma/2) V_typ.
  double W() const { return lambda * std::pow(static_cast<double>(M), 0.5 * gamma) * V_typ; }

  void validate() const {
    require(M >= 2, "PBLMConfig: M must be >= 2");
    require(gamma >= 0.0, "PBLMConfig: gamma must be >= 0");
    require(lambda > 0.0, "PBLMConfig: lambda must be positive");
    require(V_typ > 0.0, "PBLMConfig: V_typ must be positive");
  }
};

/// Diagonal i.i.d. of width W (uniform on [-W/2, W/2], or a Gaussian of
/// standard deviation W/4 truncated there); off-diagonals V_typ sqrt(w) times
/// an independent sign, with w from the continuum tunneling law.
inline DownfoldedMatrix sample_pblm(const PBLMConfig& config, std::uint64_t seed) {
  config.validate();
  const auto M = static_cast<Eigen::Index>(config.M);
  const double W = config.W();
  Rng rng(seed);
  DownfoldedMatrix out;
  out.H.resize(M, M);
  out.V_typ = config.V_typ;
  out.W = W;
  out.amplitude_mode = "pblm";
  out.phase_mode = to_string(PhaseMode::random_sign);
  out.seed = seed;
  for (Eigen::Index i = 0; i < M; ++i) {
    double e;
    if (config.diagonal == DiagonalLaw::uniform) {
      e = rng.uniform(-0.5 * W, 0.5 * W);
    } else {
      do {
        e = 0.25 * W * rng.normal();
      } while (std::abs(e) > 0.5 * W);
    }
    out.H(i, i) = e;
  }
  for (Eigen::Index j = 1; j < M; ++j) {
    for (Eigen::Index i = 0; i < j; ++i) {
      const double v = config.V_typ * std::sqrt(draw_w(rng)) * rng.sign();
      out.H(i, j) = v;
      out.H(j, i) = v;
    }
  }
  return out;
}

enum class Phase { ergodic, non_ergodic_delocalized, localized };

inline const char* to_string(Phase p) {
  switch (p) {
    case Phase::ergodic: return "ergodic";
    case Phase::non_ergodic_delocalized: return "non_ergodic_delocalized";
    case Phase::localized: return "localized";
  }
  return "?";
}

struct PhaseClass {
  Phase phase = Phase::ergodic;
  bool boundary = false;  // gamma sits on 1 or 2, where the crossover is marginal
};

/// V_typ M^(1/2) << W << V_typ M, i.e. 1 < gamma < 2, is the non-ergodic window.
inline PhaseClass classify_phase(const PBLMConfig& config) {
  config.validate();
  constexpr double tol = 1e-12;
  PhaseClass out;
  out.boundary = std::abs(config.gamma - 1.0) < tol || std::abs(config.gamma - 2.0) < tol;
  if (config.gamma < 1.0 + tol)
    out.phase = config.gamma < 1.0 - tol ? Phase::ergodic : Phase::non_ergodic_delocalized;
  else if (config.gamma < 2.0 + tol)
    out.phase = Phase::non_ergodic_delocalized;
  else
    out.phase = Phase::localized;
  return out;
}

/// Phase read from participation ratios: median Omega / M > 0.1 is ergodic,
/// median Omega < 3 is localized.
inline Phase empirical_phase(double median_participation, std::size_t M) {
  if (median_participation / static_cast<double>(M) > 0.1) return Phase::ergodic;
  if (median_participation < 3.0) return Phase::localized;
  return Phase::non_ergodic_delocalized;
}

// ---------------------------------------------------------------------------
// Predicted laws.

inline double omega_predicted(const PBLMConfig& config) {
  config.validate();
  const double r = kPi / config.lambda;
  return r * r * std::pow(static_cast<double>(config.M), 2.0 - config.gamma);
}

inline double sigma_omega(double omega) {
  require(omega > 1.0, "sigma_omega: Omega must exceed 1");
  return std::sqrt(kPi / (4.0 * std::log(omega)));
}

inline double mu_omega(double omega) {
  const double s = sigma_omega(omega);
  return 1.0 / s + 2.0 * s * (1.0 - kEulerGamma) / kPi;
}

struct GammaLaw {
  double sigma_star = 0.0;      // pi V_typ^2 M / W
  double omega = 0.0;
  double sigma_omega = 0.0;
  double mu_omega = 0.0;
  double location = 0.0;        // mu_Omega sigma_star
  double scale = 0.0;           // sigma_Omega sigma_star
  double location_asymptotic = 0.0;
  double scale_asymptotic = 0.0;
  double gamma_typ = 0.0;       // most probable miniband width
  double gamma_dispersion = 0.0;
};

/// Location and scale of the index-1, beta = 1 stable law of Sigma''.
inline GammaLaw predicted_gamma_law(const PBLMConfig& config) {
  config.validate();
  GammaLaw g;
  const double M = static_cast<double>(config.M), V = config.V_typ, lam = config.lambda;
  g.sigma_star = kPi * V * V * M / config.W();
  g.omega = omega_predicted(config);
  g.sigma_omega = sigma_omega(g.omega);
  g.mu_omega = mu_omega(g.omega);
  g.location = g.mu_omega * g.sigma_star;
  g.scale = g.sigma_omega * g.sigma_star;
  const double L = std::log(g.omega), core = V * std::pow(M, 1.0 - 0.5 * config.gamma);
  g.location_asymptotic = 2.0 * std::sqrt(kPi) / lam * core * std::sqrt(L);
  g.scale_asymptotic = std::pow(kPi, 1.5) / (2.0 * lam) * core / std::sqrt(L);
  g.gamma_typ = V * std::sqrt(kPi * g.omega * L / 4.0);
  g.gamma_dispersion = kPi * g.gamma_typ / (4.0 * L);
  return g;
}

/// Half-width of the Cauchy law of the level shifts.
inline double sigma_prime_typ(std::size_t M, double sigma_star) {
  require(M >= 2, "sigma_prime_typ: M must be >= 2");
  return sigma_star * std::sqrt(4.0 * std::log(static_cast<double>(M)) / kPi);
}

inline double cauchy_shift_pdf(double sigma_prime, std::size_t M, double sigma_star) {
  return cauchy_pdf(sigma_prime, sigma_prime_typ(M, sigma_star));
}

// ---------------------------------------------------------------------------
// Diagnostics of a single matrix.

inline std::vector<double> participation_ratios(const Eigensystem& eigs) {
  std::vector<double> out(eigs.size());
  for (Eigen::Index b = 0; b < eigs.size(); ++b) out[b] = 1.0 / eigs.vectors.col(b).array().pow(4).sum();
  return out;
}

inline std::vector<double> participation_ratios(const DownfoldedMatrix& m) {
  return participation_ratios(symmetric_eigensystem(m.H));
}

struct SurvivalFitOptions {
  double upper = 0.9;
  double lower = 0.37;
  int fit_points = 16;
  double revival_span = 10.0;  // revival search up to t_b + span (t_b - t_a)
};

struct GammaEstimate {
  double gamma = std::numeric_limits<double>::quiet_NaN();
  bool censored = true;
  double t_upper = 0.0, t_lower = 0.0;
};

namespace detail {

struct SurvivalKernel {
  const Eigensystem& eigs;
  Eigen::VectorXd weights;  // |<j|psi_b>|^2

  double operator()(double t) const {
    std::complex<double> acc = 0.0;
    for (Eigen::Index b = 0; b < weights.size(); ++b) acc += weights[b] * std::polar(1.0, -eigs.values[b] * t);
    return std::norm(acc);
  }
};

inline double spectral_span(const Eigensystem& eigs) {
  return std::max(eigs.values[eigs.size() - 1] - eigs.values[0], 1e-300);
}

inline std::vector<double> survival_time_grid(const Eigensystem& eigs, int points = 300) {
  const double span = spectral_span(eigs);
  const double t0 = 0.01 / span, t1 = 100.0 * static_cast<double>(eigs.size()) / span;
  std::vector<double> t(points);
  for (int k = 0; k < points; ++k) t[k] = t0 * std::pow(t1 / t0, k / (points - 1.0));
  return t;
}

// First crossing of `level` from above after index `from`, refined by bisection.
inline std::optional<double> first_crossing(const SurvivalKernel& s, const std::vector<double>& grid,
                                            const std::vector<double>& values, double level) {
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (values[k] >= level) continue;
    double lo = k == 0 ? 0.0 : grid[k - 1], hi = grid[k];
    for (int it = 0; it < 60 && hi - lo > 1e-14 * hi; ++it) {
      const double mid = 0.5 * (lo + hi);
      (s(mid) >= level ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  }
  return std::nullopt;
}

inline GammaEstimate fit_survival(const SurvivalKernel& s, const std::vector<double>& grid,
                                  const std::vector<double>& values, const SurvivalFitOptions& opts) {
  GammaEstimate out;
  const auto ta = first_crossing(s, grid, values, opts.upper);
  const auto tb = first_crossing(s, grid, values, opts.lower);
  if (!ta || !tb || *tb <= *ta) return out;
  out.t_upper = *ta;
  out.t_lower = *tb;
  // a revival above the upper level means coherent oscillation, not decay
  const double horizon = *tb + opts.revival_span * (*tb - *ta);
  for (int k = 1; k <= 200; ++k) {
    if (s(*tb + (horizon - *tb) * k / 200.0) > opts.upper) return out;
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const int m = opts.fit_points;
  for (int k = 0; k < m; ++k) {
    const double t = *ta + (*tb - *ta) * k / (m - 1.0);
    const double y = std::log(std::max(s(t), 1e-300));
    sx += t, sy += y, sxx += t * t, sxy += t * y;
  }
  out.gamma = -(m * sxy - sx * sy) / (m * sxx - sx * sx);
  out.censored = !(out.gamma > 0.0);
  return out;
}

}  // namespace detail

/// Decay rate of basis state `site` from a log-linear fit of its survival
/// probability over the window where it falls from `upper` to `lower`.
inline GammaEstimate extract_gamma(const Eigensystem& eigs, Eigen::Index site, const SurvivalFitOptions& opts = {}) {
  require(site >= 0 && site < eigs.size(), "extract_gamma: site out of range");
  detail::SurvivalKernel s{eigs, eigs.vectors.row(site).transpose().array().square().matrix()};
  const auto grid = detail::survival_time_grid(eigs);
  std::vector<double> values(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) values[k] = s(grid[k]);
  return detail::fit_survival(s, grid, values, opts);
}

inline GammaEstimate extract_gamma(const DownfoldedMatrix& m, Eigen::Index site, const SurvivalFitOptions& opts = {}) {
  return extract_gamma(symmetric_eigensystem(m.H), site, opts);
}

/// All sites at once; the coarse survival grid is one complex matrix product.
inline std::vector<GammaEstimate> extract_gammas(const Eigensystem& eigs, const SurvivalFitOptions& opts = {}) {
  const auto grid = detail::survival_time_grid(eigs);
  const Eigen::Index M = eigs.size(), T = static_cast<Eigen::Index>(grid.size());
  Eigen::MatrixXcd phases(M, T);
  for (Eigen::Index k = 0; k < T; ++k)
    for (Eigen::Index b = 0; b < M; ++b) phases(b, k) = std::polar(1.0, -eigs.values[b] * grid[k]);
  const Eigen::MatrixXd P = eigs.vectors.array().square().matrix();
  const Eigen::MatrixXcd amp = P.cast<std::complex<double>>() * phases;
  std::vector<GammaEstimate> out(M);
  std::vector<double> values(T);
  for (Eigen::Index j = 0; j < M; ++j) {
    for (Eigen::Index k = 0; k < T; ++k) values[k] = std::norm(amp(j, k));
    detail::SurvivalKernel s{eigs, P.row(j).transpose()};
    out[j] = detail::fit_survival(s, grid, values, opts);
  }
  return out;
}

struct SelfEnergies {
  std::vector<double> shift;  // Sigma'
  std::vector<double> width;  // Sigma''
  double eta = 0.0;
};

/// Self-energies of every site from the diagonal resolvent element at
/// z = H_jj + i eta: 1/G_jj(z) = i eta - Sigma' + i Sigma''. eta is kappa
/// times the mean spacing of the diagonal.
inline SelfEnergies self_energies(const Eigen::MatrixXd& H, const Eigensystem& eigs, double kappa = 10.0) {
  require(kappa > 0.0, "self_energies: kappa must be positive");
  const Eigen::Index M = eigs.size();
  require(M >= 2 && H.rows() == M, "self_energies: matrix and eigensystem disagree");
  const Eigen::VectorXd d = H.diagonal();
  SelfEnergies out;
  out.eta = kappa * (d.maxCoeff() - d.minCoeff()) / static_cast<double>(M - 1);
  require(out.eta > 0.0, "self_energies: degenerate diagonal");
  out.shift.resize(M);
  out.width.resize(M);
  for (Eigen::Index j = 0; j < M; ++j) {
    std::complex<double> g = 0.0;
    const std::complex<double> z(d[j], out.eta);
    for (Eigen::Index b = 0; b < M; ++b) {
      const double p = eigs.vectors(j, b) * eigs.vectors(j, b);
      g += p / (z - eigs.values[b]);
    }
    const auto inv = 1.0 / g;
    out.shift[j] = -inv.real();
    out.width[j] = inv.imag() - out.eta;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Population-transfer time.

/// Probability that a decayed state lands in a window of width `window`
/// centred on its original energy, for a level shift `shift` and Cauchy
/// half-width `shift_typ`.
inline double window_probability(double window, double shift, double shift_typ) {
  require(window > 0.0 && shift_typ > 0.0, "window_probability: window and width must be positive");
  return (std::atan((0.5 * window - shift) / shift_typ) + std::atan((0.5 * window + shift) / shift_typ)) / kPi;
}

/// (2^n / (n Omega log Omega))^(1/2) e^(2 theta n), unit prefactor.
inline double pt_time_scaling(int n, double B_perp, double omega) {
  require(n >= 1 && omega > 1.0, "pt_time_scaling: need n >= 1 and Omega > 1");
  const double th = theta(B_perp).value;
  return std::exp(0.5 * (n * std::log(2.0) - std::log(n * omega * std::log(omega))) + 2.0 * th * n);
}

/// Grover time for Omega targets among 2^n, unit prefactor.
inline double grover_reference_time(int n, double omega) {
  require(omega > 0.0, "grover_reference_time: Omega must be positive");
  return std::exp(0.5 * (n * std::log(2.0) - std::log(omega)));
}

struct PTTimeEstimate {
  double sigma_im = 0.0;       // Sigma''_j used
  double sigma_shift = 0.0;    // Sigma'_j used
  double shift_typ = 0.0;
  double window = 0.0;
  double p_window = 0.0;
  double microscopic = 0.0;    // 1 / (2 Sigma''_j p)
  double omega = 0.0;
  double theta = 0.0;
  double scaling = std::numeric_limits<double>::quiet_NaN();
  double grover = std::numeric_limits<double>::quiet_NaN();
  bool theta_out_of_regime = false;
};

/// Microscopic estimate in the PBLM energy units, plus the n-dependent
/// scaling estimate when n and B_perp are given. Sigma''_j defaults to the
/// predicted typical value, Sigma'_j to zero.
inline PTTimeEstimate pt_time(const PBLMConfig& config, double window, std::optional<double> sigma_im = std::nullopt,
                              double sigma_shift = 0.0, int n = 0, double B_perp = 0.0) {
  const auto law = predicted_gamma_law(config);
  PTTimeEstimate out;
  out.sigma_im = sigma_im.value_or(law.location);
  require(out.sigma_im > 0.0, "pt_time: Sigma'' must be positive");
  out.sigma_shift = sigma_shift;
  out.shift_typ = sigma_prime_typ(config.M, law.sigma_star);
  out.window = window;
  out.p_window = window_probability(window, sigma_shift, out.shift_typ);
  out.microscopic = 1.0 / (2.0 * out.sigma_im * out.p_window);
  out.omega = law.omega;
  if (n > 0) {
    const auto th = theta(B_perp);
    out.theta = th.value;
    out.theta_out_of_regime = th.out_of_regime;
    out.scaling = pt_time_scaling(n, B_perp, law.omega);
    out.grover = grover_reference_time(n, law.omega);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Ensembles.

struct MinibandDiagnostics {
  std::vector<double> sigma_im;       // resolvent Sigma'' per site
  std::vector<double> sigma_shift;    // resolvent Sigma' per site
  std::vector<double> participation;  // Omega_b per eigenstate
  std::vector<GammaEstimate> gammas;  // survival fits (empty unless requested)
  double eta = 0.0;
};

struct DiagnosticsOptions {
  double kappa = 10.0;
  bool survival_fit = false;
  SurvivalFitOptions survival;
};

inline MinibandDiagnostics miniband_diagnostics(const DownfoldedMatrix& m, const DiagnosticsOptions& opts = {}) {
  const auto eigs = symmetric_eigensystem(m.H);
  MinibandDiagnostics out;
  auto se = self_energies(m.H, eigs, opts.kappa);
  out.sigma_im = std::move(se.width);
  out.sigma_shift = std::move(se.shift);
  out.eta = se.eta;
  out.participation = participation_ratios(eigs);
  if (opts.survival_fit) out.gammas = extract_gammas(eigs, opts.survival);
  return out;
}

struct EnsembleResult {
  PBLMConfig config;
  std::uint64_t seed = 0;
  std::vector<std::uint64_t> realization_seeds;
  std::vector<MinibandDiagnostics> realizations;  // in realization order

  std::vector<double> pooled_sigma_im() const {
    std::vector<double> out;
    for (const auto& r : realizations) out.insert(out.end(), r.sigma_im.begin(), r.sigma_im.end());
    return out;
  }

  /// Survival-fit Sigma'' = Gamma / 2 over non-censored sites.
  std::vector<double> pooled_fit_sigma_im() const {
    std::vector<double> out;
    for (const auto& r : realizations)
      for (const auto& g : r.gammas)
        if (!g.censored) out.push_back(0.5 * g.gamma);
    return out;
  }

  std::size_t censored_count() const {
    std::size_t c = 0;
    for (const auto& r : realizations)
      for (const auto& g : r.gammas) c += g.censored;
    return c;
  }

  std::vector<double> pooled_participation() const {
    std::vector<double> out;
    for (const auto& r : realizations) out.insert(out.end(), r.participation.begin(), r.participation.end());
    return out;
  }
};

/// Realization r uses derive_seed(seed, r), so results do not depend on the
/// thread count.
inline EnsembleResult run_pblm_ensemble(const PBLMConfig& config, std::size_t realizations, std::uint64_t seed,
                                        unsigned threads = 1, const DiagnosticsOptions& opts = {}) {
  config.validate();
  require(realizations >= 1, "run_pblm_ensemble: need at least one realization");
  EnsembleResult out;
  out.config = config;
  out.seed = seed;
  out.realizations.resize(realizations);
  for (std::size_t r = 0; r < realizations; ++r) out.realization_seeds.push_back(derive_seed(seed, r));
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(realizations)));
  auto work = [&](unsigned id) {
    for (std::size_t r = id; r < realizations; r += threads)
      out.realizations[r] = miniband_diagnostics(sample_pblm(config, out.realization_seeds[r]), opts);
  };
  if (threads == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(threads);
    for (unsigned id = 0; id < threads; ++id)
      pool.emplace_back([&, id] {
        try {
          work(id);
        } catch (...) {
          errors[id] = std::current_exception();
        }
      });
    for (auto& t : pool) t.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }
  return out;
}

inline double median(std::vector<double> v) {
  require(!v.empty(), "median: empty input");
  std::sort(v.begin(), v.end());
  return sample_quantile(v, 0.5);
}

/// Least-squares slope of log y against log x.
inline double loglog_slope(std::span<const double> x, std::span<const double> y) {
  require(x.size() == y.size() && x.size() >= 2, "loglog_slope: need matching inputs of size >= 2");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double m = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double a = std::log(x[i]), b = std::log(y[i]);
    sx += a, sy += b, sxx += a * a, sxy += a * b;
  }
  return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

}  // namespace ptlab
