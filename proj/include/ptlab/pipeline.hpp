#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "ptlab/classical.hpp"
#include "ptlab/instance.hpp"
#include "ptlab/io.hpp"
#include "ptlab/statevector.hpp"

namespace ptlab {

// Hybrid run on a spin-glass instance: PT from a low local minimum with the
// matched driver, then steepest descent from the PT output, compared with
// descent from uniform starts.

struct PipelineConfig {
  double gamma = 0.2;
  double base_time = 10.0;  // first saturation epoch
  int trotter_steps = 300;  // per base epoch; dt stays fixed across doublings
  double start_fraction = 0.1;  // rank of z0 among minima, as a fraction from the lowest
  int energy_bins = 48;
  SaturationOptions saturation{};
  unsigned threads = 1;

  void validate() const {
    require(gamma > 0.0, "PipelineConfig: gamma must be positive");
    require(base_time > 0.0 && trotter_steps >= 1, "PipelineConfig: need positive base time and steps");
    require(start_fraction >= 0.0 && start_fraction <= 1.0, "PipelineConfig: start_fraction must lie in [0, 1]");
    require(energy_bins >= 2, "PipelineConfig: need at least two energy bins");
  }
};

struct PipelineResult {
  int n = 0;
  std::uint64_t z0 = 0;
  double e0 = 0.0;
  std::size_t z0_rank = 0;
  double target_delta = 0.0;  // half-width of the saturation target band
  std::vector<double> energies;
  MinimaTable minima;
  PTResult pt;
  EnergyWindow window;
  std::vector<bool> in_window;

  // over all 2^n strings
  std::vector<double> sd_uniform;  // endpoint distribution from uniform starts
  std::vector<double> sd_pt;       // endpoint distribution from the PT output

  double window_weight_pt = 0.0;
  double window_weight_pt_excl_z0 = 0.0;
  double window_weight_dos = 0.0;
  std::vector<double> hamming_pt, hamming_pt_window, hamming_sd_window, hamming_sd_pt_window;
  std::vector<double> pairwise_window;
  int median_hamming = 0;
  int median_hamming_window = 0;
  double contrast = 0.0;
  std::size_t enriched = 0;
  double global_ratio = 0.0;
  double z0_basin_ratio = 0.0;
  double max_ratio_excl_z0 = 0.0;

  double enrichment_vs_dos() const { return window_weight_pt / window_weight_dos; }
  double enrichment_vs_dos_excl_z0() const { return window_weight_pt_excl_z0 / window_weight_dos; }
};

/// Smallest single-flip excitation out of z (its barrier to the first step).
inline double min_flip_gap(const IsingCoefficients& c, std::uint64_t z) {
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < c.n; ++i) best = std::min(best, c.flip_delta(z, i));
  return best;
}

inline PipelineResult run_pipeline(const SpinGlassInstance& inst, const PipelineConfig& cfg) {
  cfg.validate();
  require(inst.n <= 20, "run_pipeline: n must be <= 20");
  PipelineResult r;
  r.n = inst.n;
  r.energies = inst.all_energies();
  r.minima = enumerate_local_minima(r.energies, inst.n, cfg.threads);
  const auto& mins = r.minima.minima;
  r.z0_rank = std::min(mins.size() - 1, static_cast<std::size_t>(cfg.start_fraction * (mins.size() - 1)));
  r.z0 = mins[r.z0_rank].z;
  r.e0 = mins[r.z0_rank].energy;

  // Saturation target: other strings within one flip gap of E(z0).
  r.target_delta = std::max(min_flip_gap(inst.classical, r.z0), 1.0 / 32.0);
  std::vector<bool> target(r.energies.size());
  for (std::size_t z = 0; z < target.size(); ++z)
    target[z] = z != r.z0 && std::abs(r.energies[z] - r.e0) <= r.target_delta;

  const auto h = make_hamiltonian(r.energies, inst.n, inst.matched_driver(cfg.gamma));
  EvolutionConfig base;
  base.total_time = cfg.base_time;
  base.trotter_steps = cfg.trotter_steps;
  base.splitting = Splitting::symmetric;
  r.pt = run_pt_saturating(h, r.z0, base, target, cfg.saturation);
  const auto& p = r.pt.probabilities;

  r.window = energy_window(p, r.energies);
  r.in_window = window_mask(r.energies, r.window);
  const double N = static_cast<double>(p.size());
  for (std::size_t z = 0; z < p.size(); ++z) {
    if (!r.in_window[z]) continue;
    r.window_weight_pt += p[z];
    if (z != r.z0) r.window_weight_pt_excl_z0 += p[z];
    r.window_weight_dos += 1.0 / N;
  }

  const std::vector<double> uniform(p.size(), 1.0 / N);
  r.sd_uniform.assign(p.size(), 0.0);
  r.sd_pt.assign(p.size(), 0.0);
  const auto bu = basin_distribution(r.minima, uniform), bp = basin_distribution(r.minima, p);
  for (std::size_t k = 0; k < mins.size(); ++k) {
    r.sd_uniform[mins[k].z] = bu[k];
    r.sd_pt[mins[k].z] = bp[k];
  }
  enrichment_ratio(r.minima, p);

  r.hamming_pt = hamming_histogram(p, r.z0, inst.n);
  r.hamming_pt_window = hamming_histogram(p, r.z0, inst.n, &r.in_window);
  r.hamming_sd_window = hamming_histogram(r.sd_uniform, r.z0, inst.n, &r.in_window);
  r.hamming_sd_pt_window = hamming_histogram(r.sd_pt, r.z0, inst.n, &r.in_window);
  r.median_hamming = histogram_median(r.hamming_pt);
  r.median_hamming_window = histogram_median(r.hamming_pt_window);
  r.pairwise_window = pairwise_hamming_histogram(p, inst.n, &r.in_window);
  r.contrast = even_odd_contrast(r.pairwise_window);

  const std::size_t z0_basin = r.minima.index_of(r.z0);
  for (std::size_t k = 0; k < mins.size(); ++k) {
    if (mins[k].ratio > 1.0) ++r.enriched;
    if (k != z0_basin && std::isfinite(mins[k].ratio)) r.max_ratio_excl_z0 = std::max(r.max_ratio_excl_z0, mins[k].ratio);
  }
  r.global_ratio = mins.front().ratio;
  r.z0_basin_ratio = mins[z0_basin].ratio;
  return r;
}

inline json pipeline_summary(const PipelineResult& r) {
  return {{"n", r.n},
          {"z0", r.z0},
          {"z0_bits", BitString(static_cast<std::uint32_t>(r.z0), r.n).to_string()},
          {"z0_energy", r.e0},
          {"z0_rank", r.z0_rank},
          {"minima", r.minima.minima.size()},
          {"target_delta", r.target_delta},
          {"saturated", r.pt.saturated},
          {"final_time", r.pt.final_time},
          {"total_steps", r.pt.total_steps},
          {"epoch_weights", r.pt.epoch_weights},
          {"survival", r.pt.probabilities[r.z0]},
          {"window", {{"mean", r.window.mean}, {"std", r.window.std}, {"lo", r.window.lo}, {"hi", r.window.hi}}},
          {"window_weight_pt", r.window_weight_pt},
          {"window_weight_pt_excl_z0", r.window_weight_pt_excl_z0},
          {"window_weight_dos", r.window_weight_dos},
          {"window_enrichment", r.enrichment_vs_dos()},
          {"window_enrichment_excl_z0", r.enrichment_vs_dos_excl_z0()},
          {"median_hamming", r.median_hamming},
          {"median_hamming_window", r.median_hamming_window},
          {"even_odd_contrast", r.contrast},
          {"enriched_minima", r.enriched},
          {"global_minimum_ratio", r.global_ratio},
          {"z0_basin_ratio", r.z0_basin_ratio},
          {"max_ratio_excl_z0_basin", r.max_ratio_excl_z0}};
}

/// Writes the four figure panels plus trace and summary:
///   energy_histograms.csv   DOS, SD, PT and SD-PT weights per energy bin
///   hamming_from_z0.csv     distance from z0 inside the window, per method
///   pairwise_hamming.csv    PT-weighted pair distances inside the window
///   minima.csv              every local minimum with basin masses and ratio
inline void write_pipeline(OutputSink& sink, const PipelineResult& r, int bins, const std::string& prefix = "") {
  const auto [lo_it, hi_it] = std::minmax_element(r.energies.begin(), r.energies.end());
  const double lo = *lo_it, hi = *hi_it + 1e-9 * (1.0 + std::abs(*hi_it));
  const std::vector<double> uniform(r.energies.size(), 1.0 / static_cast<double>(r.energies.size()));
  const auto dos = energy_histogram(uniform, r.energies, lo, hi, bins);
  const auto sd = energy_histogram(r.sd_uniform, r.energies, lo, hi, bins);
  const auto pt = energy_histogram(r.pt.probabilities, r.energies, lo, hi, bins);
  const auto sdpt = energy_histogram(r.sd_pt, r.energies, lo, hi, bins);
  {
    CsvWriter csv(sink, prefix + "energy_histograms.csv", {"bin_lo_energy", "bin_hi_energy", "dos", "sd", "pt", "sd_pt"});
    for (int b = 0; b < bins; ++b)
      csv.row(dos.edges[b], dos.edges[b + 1], dos.weights[b], sd.weights[b], pt.weights[b], sdpt.weights[b]);
  }
  auto normalized = [](std::vector<double> v) {
    double s = 0.0;
    for (double x : v) s += x;
    if (s > 0.0)
      for (auto& x : v) x /= s;
    return v;
  };
  {
    const auto a = normalized(r.hamming_pt_window), b = normalized(r.hamming_sd_window),
               c = normalized(r.hamming_sd_pt_window), d = normalized(r.hamming_pt);
    CsvWriter csv(sink, prefix + "hamming_from_z0.csv", {"distance", "pt_window", "sd_window", "sd_pt_window", "pt_all"});
    for (int k = 0; k <= r.n; ++k) csv.row(k, a[k], b[k], c[k], d[k]);
  }
  write_index_histogram_csv(sink, prefix + "pairwise_hamming.csv", "distance", r.pairwise_window);
  {
    CsvWriter csv(sink, prefix + "minima.csv", {"z", "bits", "energy", "basin_uniform", "basin_pt", "ratio"});
    for (const auto& m : r.minima.minima)
      csv.row(static_cast<unsigned long long>(m.z), BitString(static_cast<std::uint32_t>(m.z), r.n).to_string(), m.energy,
              m.basin_uniform, m.basin_pt, std::isnan(m.ratio) ? std::string("nan") : fmt_double(m.ratio));
  }
  {
    CsvWriter csv(sink, prefix + "pt_trace.csv", {"time", "survival", "target_weight"});
    for (const auto& tp : r.pt.trace) csv.row(tp.time, tp.survival, tp.target_weight);
  }
  sink.write_json(prefix + "summary.json", pipeline_summary(r));
}

}  // namespace ptlab
