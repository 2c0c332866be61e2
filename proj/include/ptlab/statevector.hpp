#pragma once

#include <algorithm>
#include <complex>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "ptlab/bitstring.hpp"
#include "ptlab/common.hpp"
#include "ptlab/instance.hpp"
#include "ptlab/ising.hpp"
#include "ptlab/linalg.hpp"
#include "ptlab/rng.hpp"

namespace ptlab {

using cplx = std::complex<double>;

inline constexpr int kMaxTrotterBits = 24;
inline constexpr int kMaxDenseBits = 14;
inline constexpr double kNormTolerance = 1e-10;

struct StateVector {
  int n = 0;
  std::vector<cplx> amplitudes;

  static StateVector basis(int n, std::uint64_t z) {
    require(n >= 1 && n <= kMaxTrotterBits, "StateVector: n out of range");
    require(z < (std::uint64_t{1} << n), "StateVector: basis index out of range");
    StateVector s{n, std::vector<cplx>(std::size_t{1} << n, cplx{0.0, 0.0})};
    s.amplitudes[z] = 1.0;
    return s;
  }

  std::size_t dimension() const { return amplitudes.size(); }

  double norm_squared() const {
    double acc = 0.0;
    for (const auto& a : amplitudes) acc += std::norm(a);
    return acc;
  }

  std::vector<double> probabilities() const {
    std::vector<double> p(amplitudes.size());
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = std::norm(amplitudes[i]);
    return p;
  }
};

inline double fidelity(const StateVector& a, const StateVector& b) {
  require(a.dimension() == b.dimension(), "fidelity: dimension mismatch");
  cplx overlap{0.0, 0.0};
  for (std::size_t i = 0; i < a.dimension(); ++i) overlap += std::conj(a.amplitudes[i]) * b.amplitudes[i];
  return std::norm(overlap);
}

enum class Splitting { first_order, symmetric };

struct EvolutionConfig {
  double total_time = 0.0;
  int trotter_steps = 300;
  Splitting splitting = Splitting::symmetric;
  DriverSpec driver{};

  void validate() const {
    require(std::isfinite(total_time) && total_time >= 0.0, "EvolutionConfig: total_time must be finite and >= 0");
    require(trotter_steps >= 1, "EvolutionConfig: trotter_steps must be >= 1");
  }
};

/// Fixed-step split-operator propagator. The driver is diagonal in the
/// Hadamard basis, so each step is two phase multiplications and two
/// Walsh-Hadamard transforms.
class TrotterPropagator {
public:
  TrotterPropagator(const Hamiltonian& h, double dt, Splitting splitting) : n_(h.n), splitting_(splitting), dt_(dt) {
    require(h.n >= 1 && h.n <= kMaxTrotterBits, "evolve_trotter: n too large");
    const double classical_step = splitting == Splitting::symmetric ? 0.5 * dt : dt;
    classical_phase_.resize(h.diagonal.size());
    for (std::size_t z = 0; z < h.diagonal.size(); ++z)
      classical_phase_[z] = std::polar(1.0, -h.diagonal[z] * classical_step);
    const auto driver = h.driver.all_energies();
    driver_phase_.resize(driver.size());
    for (std::size_t x = 0; x < driver.size(); ++x) driver_phase_[x] = std::polar(1.0, -driver[x] * dt);
  }

  double dt() const { return dt_; }

  void step(std::vector<cplx>& psi) const {
    apply(psi, classical_phase_);
    walsh_hadamard(std::span<cplx>(psi));
    apply(psi, driver_phase_);
    walsh_hadamard(std::span<cplx>(psi));
    if (splitting_ == Splitting::symmetric) apply(psi, classical_phase_);
  }

private:
  static void apply(std::vector<cplx>& psi, const std::vector<cplx>& phase) {
    for (std::size_t i = 0; i < psi.size(); ++i) psi[i] *= phase[i];
  }

  int n_;
  Splitting splitting_;
  double dt_;
  std::vector<cplx> classical_phase_;
  std::vector<cplx> driver_phase_;
};

inline void check_normalized(const StateVector& state) {
  require(std::abs(state.norm_squared() - 1.0) <= kNormTolerance, "state vector is not normalized");
}

inline StateVector evolve_trotter(const StateVector& state, const Hamiltonian& h, const EvolutionConfig& config) {
  config.validate();
  require(state.n == h.n, "evolve_trotter: qubit count mismatch");
  require(h.n <= kMaxTrotterBits, "evolve_trotter: n too large");
  check_normalized(state);
  StateVector out = state;
  if (config.total_time == 0.0) return out;
  TrotterPropagator prop(h, config.total_time / config.trotter_steps, config.splitting);
  for (int k = 0; k < config.trotter_steps; ++k) prop.step(out.amplitudes);
  return out;
}

inline StateVector evolve_trotter(const StateVector& state, const ProblemInstance& inst, const EvolutionConfig& config) {
  return evolve_trotter(state, make_hamiltonian(inst, config.driver), config);
}

// ---------------------------------------------------------------------------
// Dense backend

inline Eigen::MatrixXd dense_matrix(const Hamiltonian& h) {
  require(h.n >= 1 && h.n <= kMaxDenseBits, "exact_eigs: n too large for dense diagonalization");
  const Eigen::Index dim = Eigen::Index{1} << h.n;
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(dim, dim);
  for (Eigen::Index z = 0; z < dim; ++z) {
    m(z, z) = h.diagonal[z];
    for (int i = 0; i < h.n; ++i) {
      m(z ^ (Eigen::Index{1} << i), z) += h.driver.h[i];
      for (int j = i + 1; j < h.n; ++j) {
        const double c = h.driver.coupling(i, j);
        if (c != 0.0) m(z ^ (Eigen::Index{1} << i) ^ (Eigen::Index{1} << j), z) += c;
      }
    }
  }
  return m;
}

inline Eigensystem exact_eigs(const Hamiltonian& h) { return symmetric_eigensystem(dense_matrix(h)); }

inline Eigensystem exact_eigs(const ProblemInstance& inst, const DriverSpec& driver) {
  return exact_eigs(make_hamiltonian(inst, driver));
}

inline StateVector evolve_exact(const Eigensystem& eigs, const StateVector& state, double t) {
  check_normalized(state);
  const Eigen::Index dim = eigs.size();
  require(static_cast<Eigen::Index>(state.dimension()) == dim, "evolve_exact: dimension mismatch");
  Eigen::VectorXcd psi(dim);
  for (Eigen::Index i = 0; i < dim; ++i) psi[i] = state.amplitudes[i];
  Eigen::VectorXcd coeff = eigs.vectors.transpose().cast<cplx>() * psi;
  for (Eigen::Index g = 0; g < dim; ++g) coeff[g] *= std::polar(1.0, -eigs.values[g] * t);
  Eigen::VectorXcd out = eigs.vectors.cast<cplx>() * coeff;
  StateVector result{state.n, std::vector<cplx>(out.data(), out.data() + dim)};
  return result;
}

inline cplx transition_amplitude(const Eigensystem& eigs, std::uint64_t z0, std::uint64_t z, double t) {
  cplx acc{0.0, 0.0};
  for (Eigen::Index g = 0; g < eigs.size(); ++g)
    acc += eigs.vectors(z, g) * eigs.vectors(z0, g) * std::polar(1.0, -eigs.values[g] * t);
  return acc;
}

/// P(t, z | z0) from the spectral decomposition.
inline double transition_probability(const Eigensystem& eigs, std::uint64_t z0, std::uint64_t z, double t) {
  return std::min(1.0, std::norm(transition_amplitude(eigs, z0, z, t)));
}

/// Infinite-time average of P(t, z | z0) for a non-degenerate spectrum.
inline double dephased_transition(const Eigensystem& eigs, std::uint64_t z0, std::uint64_t z) {
  double acc = 0.0;
  for (Eigen::Index g = 0; g < eigs.size(); ++g) {
    const double a = eigs.vectors(z, g), b = eigs.vectors(z0, g);
    acc += a * a * b * b;
  }
  return acc;
}

inline std::vector<double> survival_probability(const Eigensystem& eigs, std::uint64_t z0, std::span<const double> times) {
  std::vector<double> out;
  out.reserve(times.size());
  for (double t : times) {
    cplx acc{0.0, 0.0};
    for (Eigen::Index g = 0; g < eigs.size(); ++g) {
      const double w = eigs.vectors(z0, g) * eigs.vectors(z0, g);
      acc += w * std::polar(1.0, -eigs.values[g] * t);
    }
    out.push_back(std::min(1.0, std::norm(acc)));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Population-transfer protocol

struct TracePoint {
  double time = 0.0;
  double survival = 0.0;
  double target_weight = 0.0;  // NaN when no target set was given
};

struct PTResult {
  int n = 0;
  std::uint64_t z0 = 0;
  double final_time = 0.0;
  long total_steps = 0;
  double dt = 0.0;
  std::vector<double> probabilities;
  std::vector<TracePoint> trace;
  bool saturated = false;
  std::vector<double> epoch_weights;  // mean target weight per doubling epoch
};

struct PTOptions {
  int record_every = 1;
  /// Indicator over basis states defining the target set whose weight is
  /// traced (marked states, or an energy window around z0).
  std::optional<std::vector<bool>> target;
};

namespace detail {

inline double target_weight(const std::vector<cplx>& psi, const std::optional<std::vector<bool>>& target) {
  if (!target) return std::numeric_limits<double>::quiet_NaN();
  double acc = 0.0;
  for (std::size_t z = 0; z < psi.size(); ++z)
    if ((*target)[z]) acc += std::norm(psi[z]);
  return acc;
}

}  // namespace detail

/// Prepares |z0>, switches the driver on suddenly and evolves for
/// config.total_time, recording the survival trace.
inline PTResult run_pt_protocol(const Hamiltonian& h, std::uint64_t z0, const EvolutionConfig& config,
                                const PTOptions& options = {}) {
  config.validate();
  require(options.record_every >= 1, "run_pt_protocol: record_every must be >= 1");
  if (options.target) require(options.target->size() == h.diagonal.size(), "run_pt_protocol: target mask size mismatch");
  StateVector state = StateVector::basis(h.n, z0);
  PTResult r;
  r.n = h.n;
  r.z0 = z0;
  r.trace.push_back({0.0, 1.0, detail::target_weight(state.amplitudes, options.target)});
  if (config.total_time > 0.0) {
    TrotterPropagator prop(h, config.total_time / config.trotter_steps, config.splitting);
    r.dt = prop.dt();
    for (int k = 1; k <= config.trotter_steps; ++k) {
      prop.step(state.amplitudes);
      if (k % options.record_every == 0 || k == config.trotter_steps)
        r.trace.push_back({k * prop.dt(), std::norm(state.amplitudes[z0]), detail::target_weight(state.amplitudes, options.target)});
    }
    r.total_steps = config.trotter_steps;
  }
  r.final_time = config.total_time;
  r.probabilities = state.probabilities();
  return r;
}

struct SaturationOptions {
  double relative_tolerance = 0.01;
  int max_doublings = 8;
  int record_every = 1;
};

/// Runs the protocol over epochs of length T0, 2T0, 4T0, ... at a fixed time
/// step dt = T0 / steps, stopping once the epoch-averaged target weight
/// changes by less than the relative tolerance between consecutive epochs.
inline PTResult run_pt_saturating(const Hamiltonian& h, std::uint64_t z0, const EvolutionConfig& base,
                                  const std::vector<bool>& target, const SaturationOptions& options = {}) {
  base.validate();
  require(base.total_time > 0.0, "run_pt_saturating: base epoch time must be positive");
  require(target.size() == h.diagonal.size(), "run_pt_saturating: target mask size mismatch");
  StateVector state = StateVector::basis(h.n, z0);
  const std::optional<std::vector<bool>> mask(target);
  TrotterPropagator prop(h, base.total_time / base.trotter_steps, base.splitting);
  PTResult r;
  r.n = h.n;
  r.z0 = z0;
  r.dt = prop.dt();
  r.trace.push_back({0.0, 1.0, detail::target_weight(state.amplitudes, mask)});
  long step = 0;
  long epoch_end = base.trotter_steps;
  for (int epoch = 0; epoch <= options.max_doublings; ++epoch) {
    double acc = 0.0;
    int count = 0;
    for (; step < epoch_end;) {
      prop.step(state.amplitudes);
      ++step;
      if (step % options.record_every == 0 || step == epoch_end) {
        const TracePoint p{step * prop.dt(), std::norm(state.amplitudes[z0]), detail::target_weight(state.amplitudes, mask)};
        r.trace.push_back(p);
        acc += p.target_weight;
        ++count;
      }
    }
    r.epoch_weights.push_back(acc / count);
    const auto k = r.epoch_weights.size();
    if (k >= 2) {
      const double now = r.epoch_weights[k - 1], before = r.epoch_weights[k - 2];
      if (std::abs(now - before) <= options.relative_tolerance * std::abs(now)) {
        r.saturated = true;
        break;
      }
    }
    epoch_end *= 2;
  }
  r.total_steps = step;
  r.final_time = step * prop.dt();
  r.probabilities = state.probabilities();
  return r;
}

/// Weighted histogram of classical energies under the output distribution.
struct WeightedHistogram {
  std::vector<double> edges;
  std::vector<double> weights;
};

inline WeightedHistogram energy_histogram(std::span<const double> probabilities, std::span<const double> energies,
                                          double lo, double hi, int bins) {
  require(probabilities.size() == energies.size(), "energy_histogram: size mismatch");
  require(bins >= 1 && hi > lo, "energy_histogram: bad binning");
  WeightedHistogram out;
  const double width = (hi - lo) / bins;
  out.edges.resize(bins + 1);
  for (int b = 0; b <= bins; ++b) out.edges[b] = lo + b * width;
  out.weights.assign(bins, 0.0);
  for (std::size_t z = 0; z < energies.size(); ++z) {
    const int b = std::clamp(static_cast<int>((energies[z] - lo) / width), 0, bins - 1);
    out.weights[b] += probabilities[z];
  }
  return out;
}

/// Probability mass at each Hamming distance d = 0..n from z0.
inline std::vector<double> hamming_histogram(std::span<const double> probabilities, std::uint64_t z0, int n,
                                             const std::vector<bool>* mask = nullptr) {
  std::vector<double> out(n + 1, 0.0);
  for (std::size_t z = 0; z < probabilities.size(); ++z)
    if (!mask || (*mask)[z]) out[hamming(z, z0)] += probabilities[z];
  return out;
}

/// Measurement shots drawn from an exact output distribution.
inline std::vector<std::uint64_t> sample_shots(std::span<const double> probabilities, std::size_t shots, std::uint64_t seed) {
  std::vector<double> cdf(probabilities.size());
  std::partial_sum(probabilities.begin(), probabilities.end(), cdf.begin());
  require(!cdf.empty() && cdf.back() > 0.0, "sample_shots: empty distribution");
  Rng rng(seed);
  std::vector<std::uint64_t> out(shots);
  for (auto& s : out) {
    const double u = rng.uniform() * cdf.back();
    s = static_cast<std::uint64_t>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
    s = std::min<std::uint64_t>(s, cdf.size() - 1);
  }
  return out;
}

}  // namespace ptlab
