#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ptlab/common.hpp"
#include "ptlab/linalg.hpp"
#include "ptlab/rng.hpp"

namespace ptlab {

// Analog multi-target Grover search in the reduced basis {|0>, |z_1>, ...,
// |z_M>}, where |0> is the normalized sum of all unmarked strings.

/// Half-period of the resonant oscillation, (pi / (2 n B)) sqrt(2^n / M).
inline double grover_time(int n, double M, double B_perp = 1.0) {
  require(n >= 1 && M >= 1.0 && B_perp > 0.0, "grover_time: need n >= 1, M >= 1, B > 0");
  return kPi / (2.0 * n * B_perp) * std::exp(0.5 * (n * std::log(2.0) - std::log(M)));
}

struct GroverSetup {
  int n = 10;
  std::vector<double> eps;  // marked energies relative to -n
  double W = 0.0;           // nominal width of the marked band
  double eps0 = 0.0;        // driver error, B = 1 - eps0 / n

  std::size_t M() const { return eps.size(); }
  double V() const { return n * std::exp2(-0.5 * n); }
  double N() const { return std::exp2(n); }
  double B_perp() const { return 1.0 - eps0 / n; }

  void validate() const {
    require(n >= 1 && n <= 60, "GroverSetup: n must lie in [1, 60]");
    require(!eps.empty(), "GroverSetup: need at least one marked state");
    require(static_cast<double>(eps.size()) < N(), "GroverSetup: M must be below 2^n");
    require(W >= 0.0, "GroverSetup: W must be non-negative");
  }
};

enum class MarkedLayout { degenerate, equally_spaced, random_uniform };

/// Marked energies of width W: all zero, midpoints of M equal cells of
/// [-W/2, W/2], or i.i.d. uniform there.
inline GroverSetup make_grover_setup(int n, std::size_t M, double W, double eps0,
                                     MarkedLayout layout = MarkedLayout::equally_spaced, std::uint64_t seed = 0) {
  GroverSetup s{n, std::vector<double>(M, 0.0), W, eps0};
  Rng rng(seed);
  for (std::size_t j = 0; j < M; ++j) {
    if (layout == MarkedLayout::equally_spaced)
      s.eps[j] = -0.5 * W + W * (j + 0.5) / static_cast<double>(M);
    else if (layout == MarkedLayout::random_uniform)
      s.eps[j] = rng.uniform(-0.5 * W, 0.5 * W);
  }
  if (layout == MarkedLayout::degenerate) s.W = 0.0;
  s.validate();
  return s;
}

/// (M+1) x (M+1): H_00 = eps0, H_jj = eps_j, H_j0 = H_0j = -V.
inline Eigen::MatrixXd build_reduced_hamiltonian(const GroverSetup& s) {
  s.validate();
  const auto M = static_cast<Eigen::Index>(s.M());
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(M + 1, M + 1);
  h(0, 0) = s.eps0;
  for (Eigen::Index j = 1; j <= M; ++j) {
    h(j, j) = s.eps[j - 1];
    h(0, j) = h(j, 0) = -s.V();
  }
  return h;
}

/// Exact reduced dynamics from |0>.
class ReducedGrover {
public:
  explicit ReducedGrover(const GroverSetup& s) : eigs_(symmetric_eigensystem(build_reduced_hamiltonian(s))) {}

  /// Total population on the marked states at time t.
  double marked_population(double t) const {
    return 1.0 - std::norm(amplitude(t)[0]);
  }

  Eigen::VectorXcd amplitude(double t) const {
    const Eigen::VectorXd c0 = eigs_.vectors.row(0).transpose();
    Eigen::VectorXcd phase(c0.size());
    for (Eigen::Index b = 0; b < c0.size(); ++b) phase[b] = std::polar(c0[b], -eigs_.values[b] * t);
    return eigs_.vectors.cast<std::complex<double>>() * phase;
  }

  const Eigensystem& eigensystem() const { return eigs_; }

private:
  Eigensystem eigs_;
};

struct TransferPeak {
  double time = 0.0;
  double population = 0.0;
};

/// First local maximum of the marked population in (0, t_max], located on a
/// grid of `points` and refined by golden-section search.
inline TransferPeak first_transfer_peak(const ReducedGrover& g, double t_max, int points = 4000) {
  require(t_max > 0.0 && points >= 3, "first_transfer_peak: need t_max > 0 and points >= 3");
  const double dt = t_max / points;
  double prev = g.marked_population(0.0), cur = g.marked_population(dt);
  int k = 1;
  for (; k < points; ++k) {
    const double next = g.marked_population((k + 1) * dt);
    if (cur >= prev && cur > next) break;
    prev = cur;
    cur = next;
  }
  double a = (k - 1) * dt, b = (k + 1) * dt;
  const double r = 0.5 * (std::sqrt(5.0) - 1.0);
  for (int it = 0; it < 200 && b - a > 1e-14 * b; ++it) {
    const double x1 = b - r * (b - a), x2 = a + r * (b - a);
    if (g.marked_population(x1) < g.marked_population(x2))
      a = x1;
    else
      b = x2;
  }
  const double t = 0.5 * (a + b);
  return {t, g.marked_population(t)};
}

/// Maximum marked population over a uniform grid of [0, t_max].
inline double max_transfer(const ReducedGrover& g, double t_max, int points = 4000) {
  double best = 0.0;
  for (int k = 0; k <= points; ++k) best = std::max(best, g.marked_population(t_max * k / points));
  return best;
}

/// Lowest-order result (2 M V^2 / eps0^2)(1 - cos(eps0 t) sinc(W t / 2)).
/// Flagged when eps0 is not well above W, when t exceeds the inverse level
/// spacing M / W, or when the value had to be clamped to 1.
inline Flagged perturbative_transfer(double t, const GroverSetup& s) {
  s.validate();
  require(s.eps0 != 0.0, "perturbative_transfer: needs a nonzero driver error");
  const double M = static_cast<double>(s.M()), V = s.V(), x = 0.5 * s.W * t;
  const double sinc = x == 0.0 ? 1.0 : std::sin(x) / x;
  Flagged out;
  out.value = 2.0 * M * V * V / (s.eps0 * s.eps0) * (1.0 - std::cos(s.eps0 * t) * sinc);
  if (std::abs(s.eps0) < 5.0 * s.W) {
    out.out_of_regime = true;
    out.note = "eps0 not >> W";
  }
  if (s.W > 0.0 && t > M / s.W) {
    out.out_of_regime = true;
    out.note += out.note.empty() ? "t beyond inverse level spacing M/W" : "; t beyond inverse level spacing M/W";
  }
  if (out.value > 1.0) {
    out.value = 1.0;
    out.out_of_regime = true;
    out.note += out.note.empty() ? "clamped to 1" : "; clamped to 1";
  }
  return out;
}

struct PTWithError {
  double gamma0 = 0.0;    // 2 pi V^2 M / W
  double t0 = 0.0;        // pi / eps0
  double p0 = 0.0;        // 4 M V^2 / eps0^2
  double t_pt = 0.0;      // pi^2 eps0 / (W Gamma0)
  double t_grover = 0.0;  // pi / (2 V sqrt(M))
  double t_degraded = 0.0;  // t_G (t_G eps0), the W ~ V sqrt(M) form
  bool out_of_regime = false;
  std::string note;
};

inline PTWithError pt_time_with_error(const GroverSetup& s) {
  s.validate();
  require(s.W > 0.0 && s.eps0 != 0.0, "pt_time_with_error: needs W > 0 and eps0 != 0");
  const double M = static_cast<double>(s.M()), V = s.V(), e = std::abs(s.eps0);
  PTWithError out;
  out.gamma0 = 2.0 * kPi * V * V * M / s.W;
  out.t0 = kPi / e;
  out.p0 = 4.0 * M * V * V / (e * e);
  out.t_pt = kPi * kPi * e / (s.W * out.gamma0);
  out.t_grover = grover_time(s.n, M, 1.0);
  out.t_degraded = out.t_grover * out.t_grover * e;
  if (e < 5.0 * s.W) {
    out.out_of_regime = true;
    out.note = "eps0 not >> W";
  }
  if (out.p0 > 0.5) {
    out.out_of_regime = true;
    out.note += out.note.empty() ? "p0 not small" : "; p0 not small";
  }
  return out;
}

/// Full 2^n projector Hamiltonian -n B |S><S| + sum_j (-n + eps_j) |z_j><z_j|
/// as a dense matrix (cross-check only).
inline Eigen::MatrixXd full_projector_hamiltonian(const GroverSetup& s, std::span<const std::uint64_t> marked) {
  s.validate();
  require(s.n <= 12, "full_projector_hamiltonian: n must be <= 12");
  require(marked.size() == s.M(), "full_projector_hamiltonian: one string per marked energy");
  const auto N = static_cast<Eigen::Index>(1) << s.n;
  Eigen::MatrixXd h = Eigen::MatrixXd::Constant(N, N, -s.n * s.B_perp() / static_cast<double>(N));
  for (std::size_t j = 0; j < marked.size(); ++j) {
    require(marked[j] < static_cast<std::uint64_t>(N), "full_projector_hamiltonian: string out of range");
    h(marked[j], marked[j]) += -s.n + s.eps[j];
  }
  return h;
}

}  // namespace ptlab
