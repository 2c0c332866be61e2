#include <gtest/gtest.h>

#include "ptlab/statevector.hpp"

using namespace ptlab;

namespace {

Hamiltonian small_glass(int n, std::uint64_t seed, double gamma) {
  const ProblemInstance inst = gen_spin_glass(n, n / 4, seed);
  return make_hamiltonian(inst, {DriverMode::matched, gamma});
}

double state_error(const StateVector& a, const StateVector& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.dimension(); ++i) acc += std::norm(a.amplitudes[i] - b.amplitudes[i]);
  return std::sqrt(acc);
}

}  // namespace

TEST(StateVector, SingleQubitRabiOscillation) {
  const double B = 0.7, t = 1.3;
  const auto h = make_hamiltonian({0.0, 0.0}, 1, uniform_driver(1, B));
  const auto out = evolve_trotter(StateVector::basis(1, 0), h, {t, 10});
  EXPECT_NEAR(out.probabilities()[1], std::pow(std::sin(B * t), 2), 1e-13);
}

TEST(StateVector, NormPreserved) {
  const auto h = small_glass(10, 1, 0.3);
  const auto out = evolve_trotter(StateVector::basis(10, 77), h, {25.0, 200});
  EXPECT_NEAR(out.norm_squared(), 1.0, 1e-10);
}

TEST(StateVector, RejectsUnnormalizedInput) {
  const auto h = small_glass(4, 1, 0.3);
  auto s = StateVector::basis(4, 0);
  s.amplitudes[1] = 0.5;
  EXPECT_THROW(evolve_trotter(s, h, {1.0, 10}), Error);
}

TEST(StateVector, DenseMatrixMatchesTrotterGenerator) {
  const auto h = small_glass(6, 2, 0.25);
  const auto eigs = exact_eigs(h);
  const auto psi0 = StateVector::basis(6, 13);
  const auto exact = evolve_exact(eigs, psi0, 3.0);
  const auto trotter = evolve_trotter(psi0, h, {3.0, 4000});
  EXPECT_LT(state_error(exact, trotter), 1e-5);
}

TEST(StateVector, SymmetricSplittingIsSecondOrder) {
  const auto h = small_glass(8, 3, 0.2);
  const auto eigs = exact_eigs(h);
  const auto psi0 = StateVector::basis(8, 5);
  const auto exact = evolve_exact(eigs, psi0, 5.0);
  const double e1 = state_error(exact, evolve_trotter(psi0, h, {5.0, 100}));
  const double e2 = state_error(exact, evolve_trotter(psi0, h, {5.0, 200}));
  EXPECT_NEAR(std::log2(e1 / e2), 2.0, 0.1);
  const double f1 = state_error(exact, evolve_trotter(psi0, h, {5.0, 400, Splitting::first_order}));
  const double f2 = state_error(exact, evolve_trotter(psi0, h, {5.0, 800, Splitting::first_order}));
  EXPECT_NEAR(std::log2(f1 / f2), 1.0, 0.1);
}

TEST(StateVector, EnergyShiftOnlyChangesGlobalPhase) {
  auto h = small_glass(8, 4, 0.3);
  const auto p = evolve_trotter(StateVector::basis(8, 9), h, {7.0, 300}).probabilities();
  for (auto& d : h.diagonal) d += 12.5;
  const auto q = evolve_trotter(StateVector::basis(8, 9), h, {7.0, 300}).probabilities();
  for (std::size_t i = 0; i < p.size(); ++i) EXPECT_NEAR(p[i], q[i], 1e-10);
}

TEST(StateVector, ImpurityBandLowLevelsSitNearBaseEnergy) {
  const ProblemInstance inst = gen_impurity_band(10, 2, 0.1, EpsLaw::uniform, 8, 0.5);
  const auto eigs = exact_eigs(inst, default_driver(inst));
  // Two states detached below the driver band (-nB = -5), shifted by -B^2.
  EXPECT_NEAR(eigs.values[0], -10.25, 0.1);
  EXPECT_NEAR(eigs.values[1], -10.25, 0.1);
  EXPECT_GT(eigs.values[2], -6.0);
}

TEST(StateVector, SurvivalAndTransitionAgreeWithEvolution) {
  const auto h = small_glass(6, 6, 0.4);
  const auto eigs = exact_eigs(h);
  const std::vector<double> times{0.0, 0.5, 2.0};
  const auto surv = survival_probability(eigs, 3, times);
  for (std::size_t k = 0; k < times.size(); ++k) {
    const auto p = evolve_exact(eigs, StateVector::basis(6, 3), times[k]).probabilities();
    EXPECT_NEAR(surv[k], p[3], 1e-12);
    EXPECT_NEAR(transition_probability(eigs, 3, 40, times[k]), p[40], 1e-12);
  }
  EXPECT_NEAR(surv[0], 1.0, 1e-12);
}

TEST(StateVector, ProtocolTraceAndHistograms) {
  const auto h = small_glass(8, 7, 0.3);
  PTOptions opt;
  opt.record_every = 10;
  opt.target = std::vector<bool>(256, false);
  (*opt.target)[1] = true;
  const auto r = run_pt_protocol(h, 0, {5.0, 100}, opt);
  EXPECT_EQ(r.trace.size(), 11u);
  EXPECT_NEAR(r.trace.back().survival, r.probabilities[0], 1e-14);
  EXPECT_NEAR(r.trace.back().target_weight, r.probabilities[1], 1e-14);
  const auto hd = hamming_histogram(r.probabilities, 0, 8);
  double sum = 0.0;
  for (double x : hd) sum += x;
  EXPECT_NEAR(sum, 1.0, 1e-10);
  const auto eh = energy_histogram(r.probabilities, h.diagonal, -30, 30, 12);
  sum = 0.0;
  for (double x : eh.weights) sum += x;
  EXPECT_NEAR(sum, 1.0, 1e-10);
}

TEST(StateVector, SaturatingRunDoublesEpochs) {
  const auto h = small_glass(6, 8, 0.5);
  std::vector<bool> target(64, true);
  target[0] = false;
  const auto r = run_pt_saturating(h, 0, {2.0, 50}, target, {0.05, 6, 5});
  EXPECT_GE(r.epoch_weights.size(), 2u);
  const long expected = 50L << (r.epoch_weights.size() - 1);
  EXPECT_EQ(r.total_steps, expected);
}

TEST(StateVector, ShotsFollowDistribution) {
  const std::vector<double> p{0.1, 0.0, 0.6, 0.3};
  const auto shots = sample_shots(p, 20000, 1);
  std::vector<int> counts(4, 0);
  for (auto s : shots) counts[s]++;
  EXPECT_EQ(counts[1], 0);
  EXPECT_NEAR(counts[2] / 20000.0, 0.6, 0.015);
}
