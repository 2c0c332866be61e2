#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "ptlab/classical.hpp"
#include "ptlab/instance.hpp"
#include "ptlab/statevector.hpp"

using namespace ptlab;

namespace {

// Plain greedy descent on the energy table, written independently of the
// library: scan flips in index order, keep the first strictly best one.
std::uint64_t greedy_oracle(const std::vector<double>& e, int n, std::uint64_t z) {
  for (;;) {
    std::uint64_t best = z;
    for (int i = 0; i < n; ++i) {
      const std::uint64_t y = z ^ (std::uint64_t{1} << i);
      if (e[y] < e[best] - 1e-12) best = y;
    }
    if (best == z) return z;
    z = best;
  }
}

}  // namespace

TEST(Classical, DescentFixedPoint) {
  const auto inst = gen_spin_glass(10, 2, 3);
  const auto t = enumerate_local_minima(inst.classical);
  const auto r = steepest_descent(inst.classical, t.minima.front().z);
  EXPECT_EQ(r.z, t.minima.front().z);
  EXPECT_EQ(r.steps, 0);
}

TEST(Classical, DimerAligns) {
  IsingCoefficients c(2);
  c.set_coupling(0, 1, -4.0);
  const auto r = steepest_descent(c, 0b10);  // (+1, -1)
  EXPECT_DOUBLE_EQ(r.energy, -4.0);
  EXPECT_EQ(r.z, 0b11u);  // lowest index flipped first among the tie
  EXPECT_TRUE(r.ties);
  EXPECT_EQ(r.steps, 1);
}

TEST(Classical, DescentMatchesExhaustiveOracle) {
  const auto inst = gen_spin_glass(10, 0, 17);
  const auto e = inst.all_energies();
  const auto map = descent_map(e, 10);
  for (std::uint64_t z = 0; z < 1024; ++z) {
    const auto r = steepest_descent(inst.classical, z);
    EXPECT_LE(r.energy, e[z] + 1e-12);
    EXPECT_EQ(r.z, greedy_oracle(e, 10, z));
    EXPECT_EQ(map.endpoint[z], r.z);
    EXPECT_NEAR(r.energy, e[r.z], 1e-12);
  }
  const auto threaded = descent_map(e, 10, 3);
  EXPECT_EQ(threaded.endpoint, map.endpoint);
}

TEST(Classical, FerromagnetHasTwoMinima) {
  // all couplings negative, no fields
  IsingCoefficients c(8);
  Rng rng(1);
  for (int i = 0; i < 8; ++i)
    for (int j = i + 1; j < 8; ++j) c.set_coupling(i, j, -rng.uniform(0.1, 1.0));
  const auto t = enumerate_local_minima(c);
  ASSERT_EQ(t.minima.size(), 2u);
  EXPECT_EQ(t.minima[0].z + t.minima[1].z, 255u);
}

TEST(Classical, OpenChainPlateausCountAsMinima) {
  // moving a domain wall along an open chain costs nothing, so walled states
  // are not lowered by any single flip
  IsingCoefficients c(8);
  for (int i = 0; i + 1 < 8; ++i) c.set_coupling(i, i + 1, -0.5);
  const auto t = enumerate_local_minima(c);
  EXPECT_GT(t.minima.size(), 2u);
  EXPECT_DOUBLE_EQ(t.minima[0].energy, -3.5);
  EXPECT_DOUBLE_EQ(t.minima[1].energy, -3.5);
  EXPECT_GT(t.minima[2].energy, -3.5);
}

TEST(Classical, MinimaAuditAndBasins) {
  const auto inst = gen_spin_glass(12, 3, 5);
  const auto t = enumerate_local_minima(inst.classical);
  double total = 0.0;
  for (const auto& m : t.minima) {
    for (int i = 0; i < 12; ++i) EXPECT_GE(inst.classical.flip_delta(m.z, i), -1e-12);
    total += m.basin_uniform;
  }
  EXPECT_NEAR(total, 1.0, 1e-12);
  for (std::size_t k = 1; k < t.minima.size(); ++k) EXPECT_LE(t.minima[k - 1].energy, t.minima[k].energy);
  EXPECT_THROW(enumerate_local_minima(IsingCoefficients(23)), Error);
}

TEST(Classical, DoubleWellSymmetry) {
  IsingCoefficients c(6);
  for (int i = 0; i < 6; ++i)
    for (int j = i + 1; j < 6; ++j) c.set_coupling(i, j, -0.3);
  const auto t = enumerate_local_minima(c);
  ASSERT_EQ(t.minima.size(), 2u);
  EXPECT_NEAR(t.minima[0].basin_uniform, 0.5, 1e-12);
  EXPECT_NEAR(t.minima[1].basin_uniform, 0.5, 1e-12);
}

TEST(Classical, EnrichmentLimits) {
  const auto inst = gen_spin_glass(10, 2, 9);
  auto t = enumerate_local_minima(inst.classical);
  const std::vector<double> uniform(1024, 1.0 / 1024);
  enrichment_ratio(t, uniform);
  for (const auto& m : t.minima) EXPECT_NEAR(m.ratio, 1.0, 1e-12);
  // delta start: single basin with probability 1
  std::vector<double> delta(1024, 0.0);
  delta[123] = 1.0;
  enrichment_ratio(t, delta);
  const auto target = t.index_of(t.map.endpoint[123]);
  for (std::size_t k = 0; k < t.minima.size(); ++k) {
    if (k == target) {
      EXPECT_DOUBLE_EQ(t.minima[k].basin_pt, 1.0);
      EXPECT_NEAR(t.minima[k].ratio, 1.0 / t.minima[k].basin_uniform, 1e-12);
    } else {
      EXPECT_EQ(t.minima[k].ratio, 0.0);
    }
  }
}

TEST(Classical, ShotBasinsMatchExact) {
  const auto inst = gen_spin_glass(12, 3, 21);
  const auto t = enumerate_local_minima(inst.classical);
  std::vector<double> p(4096);
  Rng rng(2);
  for (auto& x : p) x = rng.exponential();
  const double s = std::accumulate(p.begin(), p.end(), 0.0);
  for (auto& x : p) x /= s;
  const auto exact = basin_distribution(t, p);
  const std::size_t shots = 20000;
  const auto sampled = basin_distribution_shots(t, sample_shots(p, shots, 5));
  for (std::size_t k = 0; k < exact.size(); ++k) {
    const double sd = std::sqrt(exact[k] * (1 - exact[k]) / shots);
    EXPECT_NEAR(sampled[k], exact[k], 5 * sd + 1e-12) << k;
  }
}

TEST(Classical, AnnealingDeterministicAndZeroTemperature) {
  const auto inst = gen_spin_glass(10, 2, 4);
  const AnnealingSchedule sched{1.0, 0.01, 50};
  const auto a = simulated_annealing(inst.classical, sched, 77), b = simulated_annealing(inst.classical, sched, 77);
  EXPECT_EQ(a.z, b.z);
  EXPECT_EQ(a.trace, b.trace);
  EXPECT_EQ(a.trace.size(), 50u);
  // at T = 0 every endpoint is a local minimum
  const AnnealingSchedule cold{0.0, 0.0, 30, ScheduleKind::linear};
  for (std::uint64_t z = 0; z < 1024; z += 37) {
    const auto r = simulated_annealing(inst.classical, cold, 1, z);
    for (int i = 0; i < 10; ++i) EXPECT_GE(inst.classical.flip_delta(r.z, i), -1e-12);
    EXPECT_LE(r.energy, inst.classical.energy(z) + 1e-12);
  }
}

TEST(Classical, ZeroTemperatureAnnealingResemblesDescent) {
  // endpoint energy distributions over all starts: compare means
  const auto inst = gen_spin_glass(10, 2, 8);
  const AnnealingSchedule cold{0.0, 0.0, 30, ScheduleKind::linear};
  double sd = 0.0, sa = 0.0;
  for (std::uint64_t z = 0; z < 1024; ++z) {
    sd += steepest_descent(inst.classical, z).energy;
    sa += simulated_annealing(inst.classical, cold, z, z).energy;
  }
  sd /= 1024;
  sa /= 1024;
  EXPECT_NEAR(sa, sd, 0.1 * std::abs(sd));
}

TEST(Classical, MoreSweepsDoNotRaiseMeanEnergy) {
  const auto inst = gen_spin_glass(12, 3, 6);
  double prev = std::numeric_limits<double>::infinity();
  for (int sweeps : {5, 50, 500}) {
    double mean = 0.0;
    for (std::uint64_t s = 0; s < 100; ++s) mean += simulated_annealing(inst.classical, {2.0, 0.02, sweeps}, s).energy;
    mean /= 100;
    EXPECT_LE(mean, prev + 1e-9) << sweeps;
    prev = mean;
  }
}

TEST(Classical, EnergyWindow) {
  const std::vector<double> p{0.25, 0.5, 0.25}, e{-1.0, 0.0, 1.0};
  const auto w = energy_window(p, e);
  EXPECT_DOUBLE_EQ(w.mean, 0.0);
  EXPECT_NEAR(w.std, std::sqrt(0.5), 1e-15);
  EXPECT_TRUE(w.contains(0.5));
  EXPECT_FALSE(w.contains(0.8));
}

TEST(Classical, PairwiseHammingMatchesDirectSum) {
  const int n = 8;
  std::vector<double> p(256);
  Rng rng(3);
  for (auto& x : p) x = rng.uniform();
  std::vector<bool> mask(256);
  for (std::size_t z = 0; z < 256; ++z) mask[z] = z % 3 != 0;
  const auto fast = pairwise_hamming_histogram(p, n, &mask);
  std::vector<double> slow(n + 1, 0.0);
  for (int x = 0; x < 256; ++x)
    for (int y = 0; y < 256; ++y)
      if (x != y && mask[x] && mask[y]) slow[std::popcount(unsigned(x ^ y))] += p[x] * p[y];
  for (int d = 0; d <= n; ++d) EXPECT_NEAR(fast[d], slow[d], 1e-10);
  EXPECT_EQ(fast[0], 0.0);
}

TEST(Classical, EvenOddContrast) {
  EXPECT_GT(even_odd_contrast(std::vector<double>{0, 1, 5, 1, 5, 1, 5, 1}), 0.0);
  EXPECT_LT(even_odd_contrast(std::vector<double>{0, 5, 1, 5, 1, 5, 1, 5}), 0.0);
  EXPECT_NEAR(even_odd_contrast(std::vector<double>{0, 1, 1, 1, 1, 1, 1}), 0.0, 1e-15);
  EXPECT_EQ(histogram_median(std::vector<double>{0, 1, 1, 1, 1}), 2);
}
