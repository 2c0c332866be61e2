#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <set>
#include <unordered_set>
#include <utility>
#include <variant>
#include <vector>

#include "ptlab/bitstring.hpp"
#include "ptlab/common.hpp"
#include "ptlab/ising.hpp"
#include "ptlab/rng.hpp"

namespace ptlab {

// ---------------------------------------------------------------------------
// 6-bit coupling grid: 64 uniformly spaced levels spanning [-1, 1].

inline constexpr int kGridLevels = 64;
inline constexpr double kDimerCoupling = -4.0;

inline double grid_value(int level) {
  return -1.0 + 2.0 * static_cast<double>(level) / (kGridLevels - 1);
}

inline int grid_level(double x) {
  const long k = std::lround((x + 1.0) * 0.5 * (kGridLevels - 1));
  return static_cast<int>(std::clamp(k, 0L, static_cast<long>(kGridLevels - 1)));
}

inline bool on_grid(double x) { return std::abs(grid_value(grid_level(x)) - x) < 1e-12; }

// ---------------------------------------------------------------------------

enum class EpsLaw { uniform, gaussian };

/// M marked bit-strings at energy base_energy + eps_j; every other state sits
/// at zero.
struct ImpurityBandInstance {
  int n = 0;
  std::vector<BitString> marked;
  std::vector<double> eps;
  double W = 0.0;
  double B_perp = 0.0;
  double base_energy = 0.0;
  std::uint64_t seed = 0;

  ImpurityBandInstance() = default;

  ImpurityBandInstance(int n_, std::vector<BitString> marked_, std::vector<double> eps_, double W_,
                       double B_perp_, std::optional<double> base = std::nullopt, std::uint64_t seed_ = 0)
      : n(n_), marked(std::move(marked_)), eps(std::move(eps_)), W(W_), B_perp(B_perp_),
        base_energy(base.value_or(-static_cast<double>(n_))), seed(seed_) {
    validate();
  }

  std::size_t M() const { return marked.size(); }

  void validate() const {
    require(n >= 1 && n <= kMaxBits, "ImpurityBandInstance: n out of range");
    require(!marked.empty(), "ImpurityBandInstance: need at least one marked state");
    require(eps.size() == marked.size(), "ImpurityBandInstance: eps length must equal M");
    require(W > 0.0, "ImpurityBandInstance: W must be positive");
    require(B_perp >= 0.0, "ImpurityBandInstance: B_perp must be non-negative");
    std::set<std::uint32_t> seen;
    for (const auto& z : marked) {
      require(z.size() == n, "ImpurityBandInstance: marked string length mismatch");
      require(seen.insert(z.bits()).second, "ImpurityBandInstance: marked strings must be distinct");
    }
  }

  std::optional<std::size_t> marked_index(BitString z) const {
    for (std::size_t j = 0; j < marked.size(); ++j)
      if (marked[j] == z) return j;
    return std::nullopt;
  }

  double energy(BitString z) const {
    require(z.size() == n, "ib_energy: length mismatch");
    if (auto j = marked_index(z)) return base_energy + eps[*j];
    return 0.0;
  }

  std::vector<double> all_energies() const {
    require(n <= kMaxEnumerationBits, "ImpurityBandInstance: n too large for enumeration");
    std::vector<double> out(std::size_t{1} << n, 0.0);
    for (std::size_t j = 0; j < marked.size(); ++j) out[marked[j].bits()] = base_energy + eps[j];
    return out;
  }
};

inline double ib_energy(const ImpurityBandInstance& inst, BitString z) { return inst.energy(z); }

inline double draw_eps(Rng& rng, EpsLaw law, double W) {
  if (law == EpsLaw::uniform) return rng.uniform(-0.5 * W, 0.5 * W);
  // Gaussian with standard deviation W/4, truncated to [-W/2, W/2].
  for (;;) {
    const double x = 0.25 * W * rng.normal();
    if (std::abs(x) <= 0.5 * W) return x;
  }
}

inline ImpurityBandInstance gen_impurity_band(int n, std::size_t M, double W, EpsLaw law, std::uint64_t seed,
                                              double B_perp = 2.0) {
  require(n >= 1 && n <= kMaxBits, "gen_impurity_band: n out of range");
  require(M >= 1, "gen_impurity_band: M must be at least 1");
  const double states = std::ldexp(1.0, n);
  require(static_cast<double>(M) <= states, "gen_impurity_band: M exceeds 2^n");
  Rng rng(seed);
  std::vector<BitString> marked;
  marked.reserve(M);
  if (n <= 20 && static_cast<double>(M) > states / 4) {
    std::vector<std::uint32_t> all(static_cast<std::size_t>(states));
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<std::uint32_t>(i);
    rng.shuffle(all);
    for (std::size_t j = 0; j < M; ++j) marked.emplace_back(all[j], n);
  } else {
    std::unordered_set<std::uint32_t> seen;
    const std::uint64_t bound = std::uint64_t{1} << n;
    while (marked.size() < M) {
      const auto z = static_cast<std::uint32_t>(rng.below(bound));
      if (seen.insert(z).second) marked.emplace_back(z, n);
    }
  }
  std::vector<double> eps(M);
  for (auto& e : eps) e = draw_eps(rng, law, W);
  return ImpurityBandInstance(n, std::move(marked), std::move(eps), W, B_perp, std::nullopt, seed);
}

// ---------------------------------------------------------------------------

/// Fully connected two-local spin glass with optional ferromagnetic dimers.
struct SpinGlassInstance {
  int n = 0;
  IsingCoefficients classical;
  std::vector<std::pair<int, int>> dimers;
  double driver_scale = 0.2;
  std::uint64_t seed = 0;

  SpinGlassInstance() = default;

  SpinGlassInstance(IsingCoefficients coefficients, std::vector<std::pair<int, int>> dimers_,
                    double driver_scale_ = 0.2, std::uint64_t seed_ = 0)
      : n(coefficients.n), classical(std::move(coefficients)), dimers(std::move(dimers_)),
        driver_scale(driver_scale_), seed(seed_) {
    validate();
  }

  bool is_dimer(int i, int j) const {
    for (auto [a, b] : dimers)
      if ((a == i && b == j) || (a == j && b == i)) return true;
    return false;
  }

  void validate() const {
    require(n >= 1 && n <= kMaxBits, "SpinGlassInstance: n out of range");
    require(driver_scale >= 0.0, "SpinGlassInstance: driver scale must be non-negative");
    std::vector<bool> used(n, false);
    for (auto [a, b] : dimers) {
      require(a >= 0 && b >= 0 && a < n && b < n && a != b, "SpinGlassInstance: bad dimer pair");
      require(!used[a] && !used[b], "SpinGlassInstance: dimer pairs must be disjoint");
      used[a] = used[b] = true;
      require(classical.coupling(a, b) == kDimerCoupling, "SpinGlassInstance: dimer coupling must be -4");
    }
    for (int i = 0; i < n; ++i) {
      require(std::abs(classical.h[i]) <= 1.0, "SpinGlassInstance: |h_i| must be <= 1");
      require(classical.coupling(i, i) == 0.0, "SpinGlassInstance: J must have zero diagonal");
      for (int j = i + 1; j < n; ++j) {
        require(classical.coupling(i, j) == classical.coupling(j, i), "SpinGlassInstance: J must be symmetric");
        if (!is_dimer(i, j))
          require(std::abs(classical.coupling(i, j)) <= 1.0, "SpinGlassInstance: non-dimer |J_ij| must be <= 1");
      }
    }
  }

  /// True when every field and non-dimer coupling lies on the 6-bit grid.
  bool quantized() const {
    for (int i = 0; i < n; ++i) {
      if (!on_grid(classical.h[i])) return false;
      for (int j = i + 1; j < n; ++j)
        if (!is_dimer(i, j) && !on_grid(classical.coupling(i, j))) return false;
    }
    return true;
  }

  double energy(BitString z) const {
    require(z.size() == n, "classical_energy: length mismatch");
    return classical.energy(z.bits());
  }

  std::vector<double> all_energies() const { return classical.all_energies(); }

  /// Matched driver: field Gamma(|h_i|+1) on sigma^x_i and Gamma(|J_ij|+1) on
  /// sigma^x_i sigma^x_j for every pair.
  IsingCoefficients matched_driver(double gamma) const {
    IsingCoefficients d(n);
    for (int i = 0; i < n; ++i) {
      d.h[i] = gamma * (std::abs(classical.h[i]) + 1.0);
      for (int j = i + 1; j < n; ++j) d.set_coupling(i, j, gamma * (std::abs(classical.coupling(i, j)) + 1.0));
    }
    return d;
  }
};

inline double classical_energy(const SpinGlassInstance& inst, BitString z) { return inst.energy(z); }

inline SpinGlassInstance gen_spin_glass(int n, int dimer_count, std::uint64_t seed, double driver_scale = 0.2) {
  require(n >= 2 && n <= kMaxBits, "gen_spin_glass: n out of range");
  require(dimer_count >= 0 && 2 * dimer_count <= n, "gen_spin_glass: infeasible dimer count");
  Rng rng(seed);
  IsingCoefficients c(n);
  for (int i = 0; i < n; ++i) c.h[i] = grid_value(grid_level(rng.uniform(-1.0, 1.0)));
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) c.set_coupling(i, j, grid_value(grid_level(rng.uniform(-1.0, 1.0))));
  std::vector<int> spins(n);
  for (int i = 0; i < n; ++i) spins[i] = i;
  rng.shuffle(spins);
  std::vector<std::pair<int, int>> dimers;
  for (int k = 0; k < dimer_count; ++k) {
    int a = spins[2 * k], b = spins[2 * k + 1];
    if (a > b) std::swap(a, b);
    dimers.emplace_back(a, b);
    c.set_coupling(a, b, kDimerCoupling);
  }
  std::sort(dimers.begin(), dimers.end());
  return SpinGlassInstance(std::move(c), std::move(dimers), driver_scale, seed);
}

// ---------------------------------------------------------------------------

using ProblemInstance = std::variant<ImpurityBandInstance, SpinGlassInstance>;

inline int qubit_count(const ProblemInstance& inst) {
  return std::visit([](const auto& x) { return x.n; }, inst);
}

inline std::vector<double> classical_energies(const ProblemInstance& inst) {
  return std::visit([](const auto& x) { return x.all_energies(); }, inst);
}

struct SpectrumSummary {
  std::vector<double> edges;  // bins + 1
  std::vector<std::uint64_t> counts;
  double min = 0.0, max = 0.0, mean = 0.0, stddev = 0.0;
};

inline SpectrumSummary summarize_energies(const std::vector<double>& energies, int bins) {
  require(bins >= 1, "spectrum_summary: need at least one bin");
  require(!energies.empty(), "spectrum_summary: empty spectrum");
  SpectrumSummary s;
  auto [lo, hi] = std::minmax_element(energies.begin(), energies.end());
  s.min = *lo;
  s.max = *hi;
  double sum = 0.0, sum2 = 0.0;
  for (double e : energies) sum += e;
  s.mean = sum / energies.size();
  for (double e : energies) sum2 += (e - s.mean) * (e - s.mean);
  s.stddev = std::sqrt(sum2 / energies.size());
  const double width = (s.max > s.min) ? (s.max - s.min) / bins : 1.0;
  s.edges.resize(bins + 1);
  for (int b = 0; b <= bins; ++b) s.edges[b] = s.min + b * width;
  s.counts.assign(bins, 0);
  for (double e : energies) {
    int b = static_cast<int>((e - s.min) / width);
    s.counts[std::clamp(b, 0, bins - 1)]++;
  }
  return s;
}

inline SpectrumSummary spectrum_summary(const ProblemInstance& inst, int bins) {
  require(qubit_count(inst) <= kMaxEnumerationBits, "spectrum_summary: n too large for full enumeration");
  return summarize_energies(classical_energies(inst), bins);
}

// ---------------------------------------------------------------------------

enum class DriverMode { uniform, matched };

struct DriverSpec {
  DriverMode mode = DriverMode::uniform;
  double strength = 0.0;  // B_perp for uniform, Gamma for matched
};

/// H = diag(classical energies) + driver, the driver stored in x-basis form.
struct Hamiltonian {
  int n = 0;
  std::vector<double> diagonal;
  IsingCoefficients driver;
};

inline Hamiltonian make_hamiltonian(std::vector<double> diagonal, int n, const IsingCoefficients& driver) {
  require(diagonal.size() == (std::size_t{1} << n), "make_hamiltonian: diagonal length must be 2^n");
  require(driver.n == n, "make_hamiltonian: driver size mismatch");
  return {n, std::move(diagonal), driver};
}

inline IsingCoefficients uniform_driver(int n, double B_perp) {
  IsingCoefficients d(n);
  for (auto& h : d.h) h = -B_perp;
  return d;
}

inline Hamiltonian make_hamiltonian(const ProblemInstance& inst, const DriverSpec& driver) {
  const int n = qubit_count(inst);
  require(n <= kMaxEnumerationBits, "make_hamiltonian: n too large");
  if (driver.mode == DriverMode::uniform) return make_hamiltonian(classical_energies(inst), n, uniform_driver(n, driver.strength));
  const auto* sg = std::get_if<SpinGlassInstance>(&inst);
  require(sg != nullptr, "make_hamiltonian: matched driver requires a spin-glass instance");
  return make_hamiltonian(sg->all_energies(), n, sg->matched_driver(driver.strength));
}

/// Default driver of an instance: uniform B_perp for the impurity band,
/// matched Gamma for the spin glass.
inline DriverSpec default_driver(const ProblemInstance& inst) {
  if (const auto* ib = std::get_if<ImpurityBandInstance>(&inst)) return {DriverMode::uniform, ib->B_perp};
  return {DriverMode::matched, std::get<SpinGlassInstance>(inst).driver_scale};
}

}  // namespace ptlab
