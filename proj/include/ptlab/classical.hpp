#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <thread>
#include <unordered_map>
#include <vector>

#include "ptlab/common.hpp"
#include "ptlab/ising.hpp"
#include "ptlab/rng.hpp"

namespace ptlab {

inline constexpr int kMaxMinimaBits = 22;
inline constexpr double kTieTolerance = 1e-12;

// ---------------------------------------------------------------------------
// Steepest descent.

struct DescentResult {
  std::uint64_t z = 0;
  double energy = 0.0;
  int steps = 0;
  bool ties = false;  // some step had several equally steep flips
};

/// Repeats the single most energy-lowering flip until none lowers the
/// energy; equally steep flips resolve to the lowest bit index.
inline DescentResult steepest_descent(const IsingCoefficients& c, std::uint64_t z) {
  require(c.n >= 1 && c.n <= 64 && (c.n == 64 || z >> c.n == 0), "steepest_descent: start string out of range");
  DescentResult r{z, c.energy(z), 0, false};
  for (;;) {
    int best = -1;
    double best_delta = 0.0;
    for (int i = 0; i < c.n; ++i) {
      const double d = c.flip_delta(r.z, i);
      if (d < best_delta - kTieTolerance) {
        best = i;
        best_delta = d;
      } else if (best >= 0 && std::abs(d - best_delta) <= kTieTolerance) {
        r.ties = true;
      }
    }
    if (best < 0 || best_delta >= -kTieTolerance) break;
    r.z ^= std::uint64_t{1} << best;
    r.energy += best_delta;
    ++r.steps;
  }
  return r;
}

/// One steepest-descent move from every string of an enumerated energy
/// table; next[z] == z marks a local minimum.
struct DescentMap {
  int n = 0;
  std::vector<std::uint32_t> next;
  std::vector<std::uint32_t> endpoint;
  std::size_t tie_starts = 0;  // strings at which an equally steep alternative existed
};

inline DescentMap descent_map(std::span<const double> energies, int n, unsigned threads = 1) {
  require(n >= 1 && n <= kMaxMinimaBits, "descent_map: n out of range");
  const std::uint64_t N = std::uint64_t{1} << n;
  require(energies.size() == N, "descent_map: energy table has wrong size");
  DescentMap m;
  m.n = n;
  m.next.resize(N);
  std::vector<std::uint8_t> tie(N, 0);
  threads = std::max(1u, threads);
  auto work = [&](std::uint64_t lo, std::uint64_t hi) {
    for (std::uint64_t z = lo; z < hi; ++z) {
      std::uint64_t best = z;
      double best_delta = 0.0;
      for (int i = 0; i < n; ++i) {
        const std::uint64_t y = z ^ (std::uint64_t{1} << i);
        const double d = energies[y] - energies[z];
        if (d < best_delta - kTieTolerance) {
          best = y;
          best_delta = d;
        } else if (best != z && std::abs(d - best_delta) <= kTieTolerance) {
          tie[z] = 1;
        }
      }
      if (best_delta >= -kTieTolerance) best = z;
      m.next[z] = static_cast<std::uint32_t>(best);
    }
  };
  if (threads == 1) {
    work(0, N);
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work, N * t / threads, N * (t + 1) / threads);
    for (auto& t : pool) t.join();
  }
  for (auto t : tie) m.tie_starts += t;
  // endpoints by path compression; energies strictly decrease along a path
  m.endpoint.assign(N, std::numeric_limits<std::uint32_t>::max());
  std::vector<std::uint32_t> path;
  for (std::uint64_t z = 0; z < N; ++z) {
    std::uint32_t y = static_cast<std::uint32_t>(z);
    path.clear();
    while (m.endpoint[y] == std::numeric_limits<std::uint32_t>::max() && m.next[y] != y) {
      path.push_back(y);
      y = m.next[y];
    }
    const std::uint32_t end = m.next[y] == y ? y : m.endpoint[y];
    m.endpoint[y] = end;
    for (auto p : path) m.endpoint[p] = end;
  }
  return m;
}

// ---------------------------------------------------------------------------
// Local minima and basins.

struct LocalMinimumRecord {
  std::uint64_t z = 0;
  double energy = 0.0;
  double basin_uniform = 0.0;
  double basin_pt = std::numeric_limits<double>::quiet_NaN();
  double ratio = std::numeric_limits<double>::quiet_NaN();  // NaN when undefined (0/0)
};

struct MinimaTable {
  DescentMap map;
  std::vector<LocalMinimumRecord> minima;  // ascending energy
  std::unordered_map<std::uint64_t, std::size_t> index;

  std::size_t index_of(std::uint64_t z) const {
    const auto it = index.find(z);
    require(it != index.end(), "MinimaTable: string is not a local minimum");
    return it->second;
  }
};

/// Every string that no single flip lowers, with its basin mass under
/// uniformly random starts.
inline MinimaTable enumerate_local_minima(std::span<const double> energies, int n, unsigned threads = 1) {
  MinimaTable t;
  t.map = descent_map(energies, n, threads);
  const std::uint64_t N = std::uint64_t{1} << n;
  for (std::uint64_t z = 0; z < N; ++z)
    if (t.map.next[z] == z) t.minima.push_back({z, energies[z], 0.0});
  std::stable_sort(t.minima.begin(), t.minima.end(),
                   [](const auto& a, const auto& b) { return a.energy < b.energy || (a.energy == b.energy && a.z < b.z); });
  for (std::size_t k = 0; k < t.minima.size(); ++k) t.index.emplace(t.minima[k].z, k);
  const double w = 1.0 / static_cast<double>(N);
  for (std::uint64_t z = 0; z < N; ++z) t.minima[t.index.at(t.map.endpoint[z])].basin_uniform += w;
  return t;
}

inline MinimaTable enumerate_local_minima(const IsingCoefficients& c, unsigned threads = 1) {
  require(c.n <= kMaxMinimaBits, "enumerate_local_minima: n too large for enumeration");
  const auto e = c.all_energies();
  return enumerate_local_minima(e, c.n, threads);
}

/// Probability of ending in each minimum (table order) when descent starts
/// from the distribution `start` over all 2^n strings.
inline std::vector<double> basin_distribution(const MinimaTable& t, std::span<const double> start) {
  require(start.size() == t.map.endpoint.size(), "basin_distribution: start distribution has wrong size");
  std::vector<double> out(t.minima.size(), 0.0);
  for (std::size_t z = 0; z < start.size(); ++z)
    if (start[z] != 0.0) out[t.index_of(t.map.endpoint[z])] += start[z];
  return out;
}

/// Same, from measured shots.
inline std::vector<double> basin_distribution_shots(const MinimaTable& t, std::span<const std::uint64_t> shots) {
  require(!shots.empty(), "basin_distribution_shots: no shots");
  std::vector<double> out(t.minima.size(), 0.0);
  const double w = 1.0 / static_cast<double>(shots.size());
  for (auto z : shots) {
    require(z < t.map.endpoint.size(), "basin_distribution_shots: shot out of range");
    out[t.index_of(t.map.endpoint[z])] += w;
  }
  return out;
}

/// Fills basin_pt and ratio = basin_pt / basin_uniform for every minimum.
inline void enrichment_ratio(MinimaTable& t, std::span<const double> pt_output) {
  const auto pt = basin_distribution(t, pt_output);
  for (std::size_t k = 0; k < t.minima.size(); ++k) {
    auto& m = t.minima[k];
    m.basin_pt = pt[k];
    m.ratio = m.basin_uniform > 0.0 ? pt[k] / m.basin_uniform
                                    : (pt[k] > 0.0 ? std::numeric_limits<double>::infinity()
                                                   : std::numeric_limits<double>::quiet_NaN());
  }
}

/// Histogram of descent endpoints over classical energy bins.
inline std::vector<double> basin_energy_histogram(const MinimaTable& t, std::span<const double> basin, double lo, double hi,
                                                  int bins) {
  require(basin.size() == t.minima.size() && bins >= 1 && hi > lo, "basin_energy_histogram: bad input");
  std::vector<double> out(bins, 0.0);
  for (std::size_t k = 0; k < basin.size(); ++k) {
    const int b = std::clamp(static_cast<int>((t.minima[k].energy - lo) / (hi - lo) * bins), 0, bins - 1);
    out[b] += basin[k];
  }
  return out;
}

// ---------------------------------------------------------------------------
// Simulated annealing.

enum class ScheduleKind { geometric, linear };

struct AnnealingSchedule {
  double T_start = 2.0;
  double T_end = 0.02;
  int sweeps = 200;
  ScheduleKind kind = ScheduleKind::geometric;

  double temperature(int sweep) const {
    if (sweeps <= 1) return T_end;
    const double f = static_cast<double>(sweep) / (sweeps - 1);
    if (kind == ScheduleKind::linear) return T_start + (T_end - T_start) * f;
    return T_start * std::pow(T_end / T_start, f);
  }

  void validate() const {
    require(sweeps >= 1, "AnnealingSchedule: need at least one sweep");
    require(T_start >= 0.0 && T_end >= 0.0, "AnnealingSchedule: temperatures must be non-negative");
    require(kind == ScheduleKind::linear || (T_start > 0.0 && T_end > 0.0),
            "AnnealingSchedule: geometric schedule needs positive temperatures");
  }
};

struct AnnealingResult {
  std::uint64_t z = 0;
  double energy = 0.0;
  std::vector<double> trace;  // energy after each sweep
};

/// Metropolis single-flip sweeps in spin order. A zero temperature accepts
/// only strictly lowering flips. The start is uniformly random unless given.
inline AnnealingResult simulated_annealing(const IsingCoefficients& c, const AnnealingSchedule& schedule, std::uint64_t seed,
                                           std::optional<std::uint64_t> start = std::nullopt) {
  schedule.validate();
  require(c.n >= 1 && c.n <= 63, "simulated_annealing: n out of range");
  Rng rng(seed);
  AnnealingResult r;
  r.z = start ? *start : rng.bits() & ((std::uint64_t{1} << c.n) - 1);
  r.energy = c.energy(r.z);
  r.trace.reserve(schedule.sweeps);
  for (int s = 0; s < schedule.sweeps; ++s) {
    const double T = schedule.temperature(s);
    for (int i = 0; i < c.n; ++i) {
      const double d = c.flip_delta(r.z, i);
      const bool accept = d < 0.0 || (T > 0.0 && rng.uniform() < std::exp(-d / T));
      if (accept) {
        r.z ^= std::uint64_t{1} << i;
        r.energy += d;
      }
    }
    r.trace.push_back(r.energy);
  }
  r.energy = c.energy(r.z);
  return r;
}

// ---------------------------------------------------------------------------
// Output analytics.

struct EnergyWindow {
  double mean = 0.0;
  double std = 0.0;
  double lo = 0.0, hi = 0.0;

  bool contains(double e) const { return e >= lo && e <= hi; }
};

/// Weighted mean +- weighted standard deviation of the energy under
/// `probabilities`.
inline EnergyWindow energy_window(std::span<const double> probabilities, std::span<const double> energies) {
  require(probabilities.size() == energies.size() && !energies.empty(), "energy_window: size mismatch");
  double w = 0, m1 = 0;
  for (std::size_t z = 0; z < energies.size(); ++z) w += probabilities[z], m1 += probabilities[z] * energies[z];
  require(w > 0.0, "energy_window: zero total weight");
  EnergyWindow out;
  out.mean = m1 / w;
  double var = 0.0;
  for (std::size_t z = 0; z < energies.size(); ++z) var += probabilities[z] * (energies[z] - out.mean) * (energies[z] - out.mean);
  out.std = std::sqrt(var / w);
  out.lo = out.mean - out.std;
  out.hi = out.mean + out.std;
  return out;
}

inline std::vector<bool> window_mask(std::span<const double> energies, const EnergyWindow& w) {
  std::vector<bool> mask(energies.size());
  for (std::size_t z = 0; z < energies.size(); ++z) mask[z] = w.contains(energies[z]);
  return mask;
}

/// Pairwise Hamming histogram sum_{x != y} q_x q_y [d(x, y) = d] with
/// q = probabilities restricted to `mask`, via the XOR autocorrelation
/// computed with two Walsh-Hadamard transforms. Index 0 (self pairs) is zero.
inline std::vector<double> pairwise_hamming_histogram(std::span<const double> probabilities, int n,
                                                      const std::vector<bool>* mask = nullptr) {
  const std::uint64_t N = std::uint64_t{1} << n;
  require(probabilities.size() == N, "pairwise_hamming_histogram: size mismatch");
  std::vector<double> q(N), self(1, 0.0);
  for (std::uint64_t z = 0; z < N; ++z) {
    q[z] = (!mask || (*mask)[z]) ? probabilities[z] : 0.0;
    self[0] += q[z] * q[z];
  }
  walsh_hadamard(std::span<double>(q));
  // normalized transform: autocorrelation = sqrt(N) WHT(WHT(q)^2)
  for (auto& x : q) x *= x;
  walsh_hadamard(std::span<double>(q));
  const double scale = std::sqrt(static_cast<double>(N));
  std::vector<double> out(n + 1, 0.0);
  for (std::uint64_t s = 1; s < N; ++s) out[std::popcount(s)] += scale * q[s];
  for (auto& x : out) x = std::max(x, 0.0);  // remove round-off negatives
  return out;
}

/// Alternation statistic sum_{d=1}^{n-1} (-1)^d (h_d - (h_{d-1} + h_{d+1}) / 2)
/// over the total mass: positive when even distances stand above their odd
/// neighbours. Bins before the first nonzero one are ignored so the empty
/// self bin of a pairwise histogram does not count.
inline double even_odd_contrast(std::span<const double> hist) {
  require(hist.size() >= 3, "even_odd_contrast: need at least three bins");
  double total = 0.0;
  for (double h : hist) total += h;
  require(total > 0.0, "even_odd_contrast: empty histogram");
  std::size_t first = 0;
  while (first < hist.size() && hist[first] == 0.0) ++first;
  double acc = 0.0;
  for (std::size_t d = std::max<std::size_t>(first + 1, 1); d + 1 < hist.size(); ++d) {
    const double sign = d % 2 == 0 ? 1.0 : -1.0;
    acc += sign * (hist[d] - 0.5 * (hist[d - 1] + hist[d + 1]));
  }
  return acc / total;
}

/// Weighted median of a histogram over 0..n.
inline int histogram_median(std::span<const double> hist) {
  double total = 0.0;
  for (double h : hist) total += h;
  require(total > 0.0, "histogram_median: empty histogram");
  double acc = 0.0;
  for (std::size_t d = 0; d < hist.size(); ++d) {
    acc += hist[d];
    if (acc >= 0.5 * total) return static_cast<int>(d);
  }
  return static_cast<int>(hist.size()) - 1;
}

}  // namespace ptlab
