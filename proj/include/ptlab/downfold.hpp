#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/special_functions/erf.hpp>

#include "ptlab/common.hpp"
#include "ptlab/instance.hpp"
#include "ptlab/linalg.hpp"
#include "ptlab/rng.hpp"
#include "ptlab/statevector.hpp"

namespace ptlab {

/// Exponent of the tunneling suppression e^{-n theta}, truncated large-B
/// series. Flagged below B = 1 where the series is not trustworthy.
inline Flagged theta(double B_perp) {
  require(B_perp > 0.0, "theta: B_perp must be positive");
  const double b2 = B_perp * B_perp;
  Flagged r{1.0 / (4.0 * b2) + 1.0 / (24.0 * b2 * b2) + 1.0 / (60.0 * b2 * b2 * b2), false, {}};
  if (B_perp <= 1.0) {
    r.out_of_regime = true;
    r.note = "theta: large-B series used at B_perp <= 1";
  }
  return r;
}

inline double v_typ(int n, double B_perp) {
  require(n >= 1, "v_typ: n must be >= 1");
  require(B_perp > 0.0, "v_typ: B_perp must be positive");
  const double x = n;
  return x * x * std::exp2(-0.5 * x) * std::exp(-x / (4.0 * B_perp * B_perp));
}

enum class AmplitudeMode { unit, calibrated };
enum class PhaseMode { random_sign, random_phase, numeric_extraction };

inline const char* to_string(AmplitudeMode m) { return m == AmplitudeMode::unit ? "unit_A" : "calibrated_A"; }

inline const char* to_string(PhaseMode m) {
  switch (m) {
    case PhaseMode::random_sign: return "random_sign";
    case PhaseMode::random_phase: return "random_phase";
    case PhaseMode::numeric_extraction: return "numeric_extraction";
  }
  return "?";
}

struct TunnelingParams {
  int n = 0;
  double B_perp = 2.0;
  AmplitudeMode amplitude = AmplitudeMode::unit;
  PhaseMode phase = PhaseMode::random_sign;
  double A = 1.0;                       // used in calibrated mode
  std::optional<double> diagonal_shift;  // default -B_perp^2

  void validate() const {
    require(n >= 1 && n <= kMaxBits, "TunnelingParams: n out of range");
    require(B_perp > 0.0, "TunnelingParams: B_perp must be positive");
    require(A > 0.0, "TunnelingParams: A must be positive");
  }

  double shift() const { return diagonal_shift.value_or(-B_perp * B_perp); }
};

/// V(d) = sqrt(A) n^{5/4} e^{-n theta} / sqrt(C(n, d)).
inline double tunneling_amplitude(int d, const TunnelingParams& p) {
  p.validate();
  require(d >= 1 && d <= p.n, "tunneling_amplitude: d out of range");
  const double A = p.amplitude == AmplitudeMode::unit ? 1.0 : p.A;
  const double log_v = 1.25 * std::log(static_cast<double>(p.n)) - p.n * theta(p.B_perp).value - 0.5 * log_binomial(p.n, d);
  return std::sqrt(A) * std::exp(log_v);
}

// ---------------------------------------------------------------------------
// Numerical extraction.
//
// With a uniform driver and only two marked strings at Hamming distance d,
// the Hamiltonian commutes with permutations of the d differing spins and of
// the n-d agreeing spins. Both marked states live in the symmetric sector
// spanned by |a, b> (a flips among the differing spins, b among the agreeing
// ones), which has dimension (d+1)(n-d+1).

namespace detail {

inline Eigen::MatrixXd pair_sector(int n, int d, double B, double marked_energy) {
  const int nb = n - d + 1;
  const int dim = (d + 1) * nb;
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dim, dim);
  auto at = [nb](int a, int b) { return a * nb + b; };
  for (int a = 0; a <= d; ++a)
    for (int b = 0; b < nb; ++b) {
      const int k = at(a, b);
      if (a < d) {
        const double v = -B * std::sqrt((a + 1.0) * (d - a));
        h(k, at(a + 1, b)) = h(at(a + 1, b), k) = v;
      }
      if (b < n - d) {
        const double v = -B * std::sqrt((b + 1.0) * (n - d - b));
        h(k, at(a, b + 1)) = h(at(a, b + 1), k) = v;
      }
    }
  h(at(0, 0), at(0, 0)) = marked_energy;
  if (d > 0) h(at(d, 0), at(d, 0)) = marked_energy;
  return h;
}

inline Eigen::Index nearest_level(const Eigen::VectorXd& values, double target, Eigen::Index skip = -1) {
  Eigen::Index best = -1;
  for (Eigen::Index k = 0; k < values.size(); ++k) {
    if (k == skip) continue;
    if (best < 0 || std::abs(values[k] - target) < std::abs(values[best] - target)) best = k;
  }
  return best;
}

}  // namespace detail

/// Dressed level of a single marked string: the level of the single-marked
/// problem nearest base_energy - B^2, and its marked weight.
inline std::pair<double, double> dressed_marked_level(int n, double B_perp, double base_energy) {
  const auto single = symmetric_eigensystem(detail::pair_sector(n, 0, B_perp, base_energy));
  const auto ref = detail::nearest_level(single.values, base_energy - B_perp * B_perp);
  return {single.values[ref], single.vectors(0, ref) * single.vectors(0, ref)};
}

/// Dressed marked level, its residue and the signed effective coupling V(d)
/// between two degenerate marked strings, from exact diagonalization of the
/// permutation-symmetric sector.
struct SectorCouplings {
  int n = 0;
  double B_perp = 0.0;
  double base_energy = 0.0;
  double reference_energy = 0.0;  // dressed single marked level
  double residue = 0.0;           // marked weight of that level, dE/d(eps)
  std::vector<double> coupling;   // index d = 1..n; entry 0 unused
  std::vector<double> pair_shift;  // mean pair level minus reference, per d

  double at(int d) const {
    require(d >= 1 && d <= n, "SectorCouplings: d out of range");
    return coupling[d];
  }
};

inline SectorCouplings sector_couplings(int n, double B_perp, std::optional<double> base_energy = std::nullopt) {
  require(n >= 1 && n <= kMaxBits, "sector_couplings: n out of range");
  require(B_perp > 0.0, "sector_couplings: B_perp must be positive");
  SectorCouplings out;
  out.n = n;
  out.B_perp = B_perp;
  out.base_energy = base_energy.value_or(-static_cast<double>(n));
  std::tie(out.reference_energy, out.residue) = dressed_marked_level(n, B_perp, out.base_energy);
  out.coupling.assign(n + 1, 0.0);
  out.pair_shift.assign(n + 1, 0.0);
  for (int d = 1; d <= n; ++d) {
    const auto es = symmetric_eigensystem(detail::pair_sector(n, d, B_perp, out.base_energy));
    const Eigen::Index r1 = static_cast<Eigen::Index>(d) * (n - d + 1);
    const auto k0 = detail::nearest_level(es.values, out.reference_energy);
    const auto k1 = detail::nearest_level(es.values, out.reference_energy, k0);
    const bool k0_symmetric = es.vectors(0, k0) * es.vectors(r1, k0) > 0.0;
    const double e_sym = k0_symmetric ? es.values[k0] : es.values[k1];
    const double e_anti = k0_symmetric ? es.values[k1] : es.values[k0];
    out.coupling[d] = 0.5 * (e_sym - e_anti);
    out.pair_shift[d] = 0.5 * (e_sym + e_anti) - out.reference_energy;
  }
  return out;
}

/// Signed coupling of a degenerate two-marked-state instance from full-space
/// exact diagonalization (half the resonant splitting, sign from the parity
/// of the lower level).
inline double extract_numeric_elements(const ImpurityBandInstance& inst, double B_perp) {
  require(inst.M() == 2, "extract_numeric_elements: need exactly two marked states");
  require(inst.n <= kMaxDenseBits, "extract_numeric_elements: n too large for dense diagonalization");
  require(std::abs(inst.eps[0] - inst.eps[1]) <= 1e-9, "extract_numeric_elements: marked energies are not degenerate");
  const ProblemInstance pi = inst;
  const auto es = exact_eigs(pi, {DriverMode::uniform, B_perp});
  const auto z1 = inst.marked[0].bits(), z2 = inst.marked[1].bits();
  // The resonant pair sits within half a driver spacing of the bare level
  // shifted by -B^2; other levels there carry little marked weight.
  const double centre = inst.base_energy + inst.eps[0] - B_perp * B_perp;
  Eigen::Index k0 = -1, k1 = -1;
  double w0 = -1.0, w1 = -1.0;
  for (Eigen::Index g = 0; g < es.size(); ++g) {
    if (std::abs(es.values[g] - centre) > B_perp) continue;
    const double w = es.vectors(z1, g) * es.vectors(z1, g) + es.vectors(z2, g) * es.vectors(z2, g);
    if (w > w0) {
      k1 = k0, w1 = w0;
      k0 = g, w0 = w;
    } else if (w > w1) {
      k1 = g, w1 = w;
    }
  }
  require(k1 >= 0, "extract_numeric_elements: no resonant pair found near the marked level");
  const bool k0_symmetric = es.vectors(z1, k0) * es.vectors(z2, k0) > 0.0;
  const double e_sym = k0_symmetric ? es.values[k0] : es.values[k1];
  const double e_anti = k0_symmetric ? es.values[k1] : es.values[k0];
  return 0.5 * (e_sym - e_anti);
}

/// Least-squares constant A such that V_numeric(d)^2 ~ A V_unit(d)^2, using
/// that the oscillating phase factor 2 sin^2(phi) averages to one.
inline double calibrate_amplitude(int n, double B_perp, std::optional<double> base_energy = std::nullopt) {
  const auto sc = sector_couplings(n, B_perp, base_energy);
  TunnelingParams unit{n, B_perp};
  double acc = 0.0;
  for (int d = 1; d <= n; ++d) {
    const double r = sc.coupling[d] / tunneling_amplitude(d, unit);
    acc += r * r;
  }
  return acc / n;
}

// ---------------------------------------------------------------------------

struct DownfoldedMatrix {
  Eigen::MatrixXd H;
  int n = 0;
  double B_perp = 0.0;
  double V_typ = 0.0;
  double W = 0.0;
  double reference_energy = 0.0;  // absolute energy corresponding to H = 0
  std::string amplitude_mode;
  std::string phase_mode;
  std::uint64_t seed = 0;

  Eigen::Index size() const { return H.rows(); }
};

/// Effective Hamiltonian on the marked subspace. Phases are drawn once per
/// Hamming distance from the seed. In numeric_extraction mode the diagonal is
/// the dressed level E_ref + Z eps_j plus the pairwise level shifts, and the
/// couplings come from the sector diagonalization; the amplitude mode is then
/// ignored.
inline DownfoldedMatrix build_downfolded(const ImpurityBandInstance& inst, const TunnelingParams& params,
                                         std::uint64_t seed = 0) {
  params.validate();
  inst.validate();
  require(params.n == inst.n, "build_downfolded: params.n does not match the instance");
  const int n = inst.n;
  const auto M = static_cast<Eigen::Index>(inst.M());
  DownfoldedMatrix out;
  out.H = Eigen::MatrixXd::Zero(M, M);
  out.n = n;
  out.B_perp = params.B_perp;
  out.V_typ = v_typ(n, params.B_perp);
  out.W = inst.W;
  out.reference_energy = inst.base_energy;
  out.amplitude_mode = to_string(params.amplitude);
  out.phase_mode = to_string(params.phase);
  out.seed = seed;

  std::vector<double> offdiag(n + 1, 0.0);
  if (params.phase == PhaseMode::numeric_extraction) {
    const auto sc = sector_couplings(n, params.B_perp, inst.base_energy);
    for (int d = 1; d <= n; ++d) offdiag[d] = sc.coupling[d];
    for (Eigen::Index j = 0; j < M; ++j) {
      double h = (sc.reference_energy - inst.base_energy) + sc.residue * inst.eps[j];
      for (Eigen::Index k = 0; k < M; ++k)
        if (k != j) h += sc.pair_shift[hamming(inst.marked[j], inst.marked[k])];
      out.H(j, j) = h;
    }
  } else {
    Rng rng(seed);
    for (int d = 1; d <= n; ++d) {
      const double factor = params.phase == PhaseMode::random_sign ? rng.sign()
                                                                   : std::sqrt(2.0) * std::sin(2.0 * kPi * rng.uniform());
      offdiag[d] = tunneling_amplitude(d, params) * factor;
    }
    for (Eigen::Index j = 0; j < M; ++j) out.H(j, j) = inst.eps[j] + params.shift();
  }
  for (Eigen::Index i = 0; i < M; ++i)
    for (Eigen::Index j = i + 1; j < M; ++j) {
      const double v = offdiag[hamming(inst.marked[i], inst.marked[j])];
      out.H(i, j) = v;
      out.H(j, i) = v;
    }
  return out;
}

/// The M levels of the full Hamiltonian carrying the largest marked weight
/// within B/2 + W of the dressed marked level, ascending (absolute energies;
/// n <= 14).
inline std::vector<double> impurity_band_levels(const ImpurityBandInstance& inst) {
  require(inst.n <= kMaxDenseBits, "impurity_band_levels: n too large for dense diagonalization");
  const ProblemInstance pi = inst;
  const auto es = exact_eigs(pi, default_driver(pi));
  const double centre = dressed_marked_level(inst.n, inst.B_perp, inst.base_energy).first;
  const double half_window = 0.5 * inst.B_perp + inst.W;
  std::vector<std::pair<double, Eigen::Index>> weighted;
  for (Eigen::Index g = 0; g < es.size(); ++g) {
    if (std::abs(es.values[g] - centre) > half_window) continue;
    double w = 0.0;
    for (const auto& z : inst.marked) w += es.vectors(z.bits(), g) * es.vectors(z.bits(), g);
    weighted.emplace_back(w, g);
  }
  require(weighted.size() >= inst.M(), "impurity_band_levels: fewer levels near the band than marked states");
  std::partial_sort(weighted.begin(), weighted.begin() + inst.M(), weighted.end(), std::greater<>());
  std::vector<double> levels;
  for (std::size_t k = 0; k < inst.M(); ++k) levels.push_back(es.values[weighted[k].second]);
  std::sort(levels.begin(), levels.end());
  return levels;
}

inline std::vector<double> downfolded_levels(const DownfoldedMatrix& m) {
  const auto values = symmetric_eigenvalues(m.H);
  std::vector<double> out(values.size());
  for (Eigen::Index k = 0; k < values.size(); ++k) out[k] = m.reference_energy + values[k];
  return out;
}

// ---------------------------------------------------------------------------
// Law of the rescaled squared amplitude w = V^2 / V_typ^2.

inline double pdf_w(double w) {
  require(w > 1.0, "pdf_w: density defined for w > 1");
  return 1.0 / (w * w * std::sqrt(kPi * std::log(w)));
}

inline double cdf_w(double w) { return w <= 1.0 ? 0.0 : std::erf(std::sqrt(std::log(w))); }

inline double ccdf_w(double w) { return w <= 1.0 ? 1.0 : std::erfc(std::sqrt(std::log(w))); }

/// Large-w asymptote of the complementary CDF.
inline double ccdf_w_tail(double w) {
  require(w > 1.0, "ccdf_w_tail: defined for w > 1");
  return 1.0 / (w * std::sqrt(kPi * std::log(w)));
}

/// Inverse-CDF draw from the continuum law.
inline double draw_w(Rng& rng) {
  double u;
  do {
    u = rng.uniform();
  } while (u <= 0.0);
  const double x = boost::math::erf_inv(u);
  return std::exp(x * x);
}

/// Microscopic sampler: d ~ Binomial(n, 1/2) conditioned on d >= 1 and
/// w = V(d)^2 / V(n/2)^2 = C(n, n/2) / C(n, d) in unit-A mode.
inline std::vector<double> sample_w(int n, std::size_t count, std::uint64_t seed) {
  require(n >= 2, "sample_w: n must be >= 2");
  Rng rng(seed);
  const double log_mid = log_binomial(n, n / 2);
  std::vector<double> log_ratio(n + 1);
  for (int d = 0; d <= n; ++d) log_ratio[d] = log_mid - log_binomial(n, d);
  std::vector<double> out(count);
  const int full_words = n / 64, rest = n % 64;
  for (auto& w : out) {
    int d = 0;
    do {
      d = 0;
      for (int k = 0; k < full_words; ++k) d += std::popcount(rng.bits());
      if (rest) d += std::popcount(rng.bits() >> (64 - rest));
    } while (d == 0);
    w = std::exp(log_ratio[d]);
  }
  return out;
}

}  // namespace ptlab
