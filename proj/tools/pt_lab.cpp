// pt_lab: command-line front end.
//
// Every subcommand turns its options into a JSON parameter object, runs from
// that object alone, and writes manifest.json next to its outputs, so
// `pt_lab --replay out/manifest.json` repeats a run exactly.

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "ptlab/ptlab.hpp"

using namespace ptlab;

namespace {

struct Context {
  RunManifest manifest;
  fs::path out_dir;
};

// ---------------------------------------------------------------------------
// Option registry: each option writes its parsed value into params[key].

using Collector = std::function<void(json&)>;
std::map<const CLI::App*, std::vector<Collector>> g_collectors;

template <class T>
void add(CLI::App* app, const std::string& flag, const std::string& key, T def, const std::string& help) {
  auto value = std::make_shared<T>(std::move(def));
  app->add_option(flag, *value, help)->capture_default_str();
  g_collectors[app].push_back([value, key](json& p) { p[key] = *value; });
}

void add_flag(CLI::App* app, const std::string& flag, const std::string& key, const std::string& help) {
  auto value = std::make_shared<bool>(false);
  app->add_flag(flag, *value, help);
  g_collectors[app].push_back([value, key](json& p) { p[key] = *value; });
}

template <class T>
T param(const json& p, const std::string& key) {
  try {
    return p.at(key).get<T>();
  } catch (const json::exception& e) {
    throw InputError("parameter '" + key + "': " + e.what());
  }
}

std::vector<double> number_list(const std::string& text, const std::string& key) {
  std::vector<double> out;
  std::stringstream s(text);
  for (std::string item; std::getline(s, item, ',');) {
    char* end = nullptr;
    const double x = std::strtod(item.c_str(), &end);
    if (item.empty() || *end != '\0') throw InputError("parameter '" + key + "': bad number '" + item + "'");
    out.push_back(x);
  }
  if (out.empty()) throw InputError("parameter '" + key + "': empty list");
  return out;
}

ProblemInstance instance_param(const json& p, Context& ctx) {
  const auto path = param<std::string>(p, "instance");
  if (path.empty()) throw InputError("--instance is required");
  ctx.manifest.add_input(path);
  return load_instance(path);
}

DriverSpec driver_param(const json& p, const ProblemInstance& inst) {
  auto d = default_driver(inst);
  const auto mode = param<std::string>(p, "driver");
  if (mode == "uniform")
    d.mode = DriverMode::uniform;
  else if (mode == "matched")
    d.mode = DriverMode::matched;
  else if (mode != "default")
    throw InputError("--driver must be default, uniform or matched");
  const double strength = param<double>(p, "strength");
  if (strength >= 0.0) d.strength = strength;
  return d;
}

std::uint64_t start_param(const json& p, const std::vector<double>& energies, int n) {
  const auto text = param<std::string>(p, "z0");
  if (text.empty()) return static_cast<std::uint64_t>(std::min_element(energies.begin(), energies.end()) - energies.begin());
  const auto z = BitString::parse(text);
  if (z.size() != n) throw InputError("--z0 must have n characters");
  return z.bits();
}

std::string bits(std::uint64_t z, int n) { return BitString(static_cast<std::uint32_t>(z), n).to_string(); }

const SpinGlassInstance& spin_glass(const ProblemInstance& inst, const char* who) {
  const auto* sg = std::get_if<SpinGlassInstance>(&inst);
  if (!sg) throw InputError(std::string(who) + " needs a spin-glass instance");
  return *sg;
}

// ---------------------------------------------------------------------------
// Subcommands.

void run_gen_instance(const json& p, Context& ctx, OutputSink& sink) {
  const auto kind = param<std::string>(p, "kind");
  const int n = param<int>(p, "n");
  ProblemInstance inst;
  if (kind == "spin-glass") {
    int dimers = param<int>(p, "dimers");
    if (dimers < 0) dimers = n / 2;
    inst = gen_spin_glass(n, dimers, ctx.manifest.seed, param<double>(p, "driver_scale"));
  } else if (kind == "impurity-band") {
    const auto law = param<std::string>(p, "eps_law");
    if (law != "uniform" && law != "gaussian") throw InputError("--eps-law must be uniform or gaussian");
    inst = gen_impurity_band(n, param<std::size_t>(p, "M"), param<double>(p, "W"),
                             law == "uniform" ? EpsLaw::uniform : EpsLaw::gaussian, ctx.manifest.seed, param<double>(p, "B"));
  } else {
    throw InputError("--kind must be spin-glass or impurity-band");
  }
  sink.write_json("instance.json", to_json(inst));
}

void run_spectrum(const json& p, Context& ctx, OutputSink& sink) {
  const auto inst = instance_param(p, ctx);
  const int n = qubit_count(inst);
  const int bins = param<int>(p, "bins");
  const auto e = classical_energies(inst);
  const auto s = summarize_energies(e, bins);
  write_histogram_csv(sink, "classical_dos.csv", s.edges, std::vector<double>(s.counts.begin(), s.counts.end()), "energy");
  json out{{"n", n}, {"min", s.min}, {"max", s.max}, {"mean", s.mean}, {"std", s.stddev}};
  const int levels = param<int>(p, "levels");
  if (levels > 0) {
    if (n > kMaxDenseBits) throw InputError("--levels needs n <= " + std::to_string(kMaxDenseBits));
    const auto driver = driver_param(p, inst);
    const auto eigs = exact_eigs(inst, driver);
    CsvWriter csv(sink, "levels.csv", {"index", "energy"});
    for (int k = 0; k < std::min<int>(levels, eigs.size()); ++k) csv.row(k, eigs.values[k]);
    out["driver_strength"] = driver.strength;
  }
  sink.write_json("spectrum.json", out);
}

void write_state(OutputSink& sink, const std::string& name, const std::vector<double>& probs,
                 const std::vector<double>& energies, int n, double threshold) {
  CsvWriter csv(sink, name, {"z", "bits", "energy", "probability"});
  for (std::size_t z = 0; z < probs.size(); ++z)
    if (probs[z] > threshold) csv.row(static_cast<unsigned long long>(z), bits(z, n), energies[z], probs[z]);
}

void run_evolve(const json& p, Context& ctx, OutputSink& sink) {
  const auto inst = instance_param(p, ctx);
  const int n = qubit_count(inst);
  const auto e = classical_energies(inst);
  const auto z0 = start_param(p, e, n);
  EvolutionConfig cfg;
  cfg.total_time = param<double>(p, "time");
  cfg.trotter_steps = param<int>(p, "steps");
  const auto split = param<std::string>(p, "splitting");
  if (split != "symmetric" && split != "first-order") throw InputError("--splitting must be symmetric or first-order");
  cfg.splitting = split == "symmetric" ? Splitting::symmetric : Splitting::first_order;
  cfg.driver = driver_param(p, inst);
  const auto h = make_hamiltonian(inst, cfg.driver);
  const auto start = StateVector::basis(n, z0);
  StateVector out;
  if (param<bool>(p, "exact")) {
    if (n > kMaxDenseBits) throw InputError("--exact needs n <= " + std::to_string(kMaxDenseBits));
    out = evolve_exact(exact_eigs(h), start, cfg.total_time);
  } else {
    out = evolve_trotter(start, h, cfg);
  }
  const auto probs = out.probabilities();
  write_state(sink, "final_state.csv", probs, e, n, param<double>(p, "threshold"));
  sink.write_json("evolve.json", {{"n", n}, {"z0", bits(z0, n)}, {"time", cfg.total_time}, {"survival", probs[z0]},
                                  {"norm", out.norm_squared()}, {"driver_strength", cfg.driver.strength}});
}

void run_pt(const json& p, Context& ctx, OutputSink& sink) {
  const auto inst = instance_param(p, ctx);
  const int n = qubit_count(inst);
  const auto e = classical_energies(inst);
  const auto z0 = start_param(p, e, n);
  EvolutionConfig cfg;
  cfg.total_time = param<double>(p, "time");
  cfg.trotter_steps = param<int>(p, "steps");
  cfg.driver = driver_param(p, inst);
  const auto h = make_hamiltonian(inst, cfg.driver);
  const int every = param<int>(p, "record_every");
  // target: other strings within the window half-width of E(z0)
  const double half = param<double>(p, "window");
  std::vector<bool> target(e.size());
  for (std::size_t z = 0; z < e.size(); ++z) target[z] = z != z0 && std::abs(e[z] - e[z0]) <= half;
  PTResult r;
  if (param<bool>(p, "saturate")) {
    SaturationOptions so;
    so.record_every = every;
    so.max_doublings = param<int>(p, "max_doublings");
    r = run_pt_saturating(h, z0, cfg, target, so);
  } else {
    PTOptions po;
    po.record_every = every;
    po.target = target;
    r = run_pt_protocol(h, z0, cfg, po);
  }
  write_state(sink, "pt_output.csv", r.probabilities, e, n, param<double>(p, "threshold"));
  {
    CsvWriter csv(sink, "pt_trace.csv", {"time", "survival", "target_weight"});
    for (const auto& t : r.trace) csv.row(t.time, t.survival, t.target_weight);
  }
  write_index_histogram_csv(sink, "hamming_from_z0.csv", "distance", hamming_histogram(r.probabilities, z0, n));
  sink.write_json("pt_result.json", {{"n", n},
                                     {"z0", bits(z0, n)},
                                     {"z0_energy", e[z0]},
                                     {"driver_strength", cfg.driver.strength},
                                     {"final_time", r.final_time},
                                     {"total_steps", r.total_steps},
                                     {"saturated", r.saturated},
                                     {"epoch_weights", r.epoch_weights},
                                     {"survival", r.probabilities[z0]},
                                     {"target_weight", r.trace.back().target_weight}});
}

void run_downfold(const json& p, Context& ctx, OutputSink& sink) {
  const auto inst = instance_param(p, ctx);
  const auto* ib = std::get_if<ImpurityBandInstance>(&inst);
  if (!ib) throw InputError("downfold needs an impurity-band instance");
  TunnelingParams tp;
  tp.n = ib->n;
  tp.B_perp = param<double>(p, "B") > 0.0 ? param<double>(p, "B") : ib->B_perp;
  const auto amp = param<std::string>(p, "amplitude"), phase = param<std::string>(p, "phase");
  if (amp == "unit")
    tp.amplitude = AmplitudeMode::unit;
  else if (amp == "calibrated")
    tp.amplitude = AmplitudeMode::calibrated, tp.A = calibrate_amplitude(ib->n, tp.B_perp, ib->base_energy);
  else
    throw InputError("--amplitude must be unit or calibrated");
  if (phase == "random-sign")
    tp.phase = PhaseMode::random_sign;
  else if (phase == "random-phase")
    tp.phase = PhaseMode::random_phase;
  else if (phase == "numeric")
    tp.phase = PhaseMode::numeric_extraction;
  else
    throw InputError("--phase must be random-sign, random-phase or numeric");
  const auto m = build_downfolded(*ib, tp, ctx.manifest.seed);
  write_downfolded(sink, "downfolded", m);
  json out{{"M", m.size()}, {"A", tp.A}, {"B_perp", tp.B_perp}};
  if (param<bool>(p, "compare")) {
    if (ib->n > kMaxDenseBits || tp.B_perp != ib->B_perp)
      throw InputError("--compare needs n <= 14 and the instance's own B_perp");
    const auto full = impurity_band_levels(*ib);
    const auto reduced = downfolded_levels(m);
    double worst = 0.0;
    CsvWriter csv(sink, "levels_compare.csv", {"index", "full_energy", "downfolded_energy", "difference"});
    for (std::size_t k = 0; k < full.size(); ++k) {
      csv.row(k, full[k], reduced[k], reduced[k] - full[k]);
      worst = std::max(worst, std::abs(reduced[k] - full[k]));
    }
    out["max_abs_error"] = worst;
    out["max_abs_error_over_W"] = worst / ib->W;
  }
  sink.write_json("downfold.json", out);
}

json stable_report(const std::vector<double>& samples, double tail_origin) {
  const auto fit = fit_stable_quantiles(samples);
  const auto tail = ccdf_tail_slope(samples, tail_origin);
  return {{"count", fit.count},   {"location", fit.params.shift}, {"scale", fit.params.C}, {"q25", fit.q25},
          {"q50", fit.q50},       {"q75", fit.q75},               {"tail_slope", tail.slope},
          {"tail_points", tail.points}};
}

void run_pblm_ensemble(const json& p, Context& ctx, OutputSink& sink) {
  PBLMConfig cfg;
  cfg.M = param<std::size_t>(p, "M");
  cfg.gamma = param<double>(p, "gamma");
  cfg.lambda = param<double>(p, "lambda");
  const auto law = param<std::string>(p, "diagonal");
  if (law != "uniform" && law != "gaussian") throw InputError("--diagonal must be uniform or gaussian");
  cfg.diagonal = law == "uniform" ? DiagonalLaw::uniform : DiagonalLaw::gaussian;
  DiagnosticsOptions opts;
  opts.kappa = param<double>(p, "kappa");
  opts.survival_fit = param<bool>(p, "survival_fit");
  const auto ens = run_pblm_ensemble(cfg, param<std::size_t>(p, "realizations"), ctx.manifest.seed, ctx.manifest.threads, opts);
  {
    CsvWriter csv(sink, "self_energies.csv", {"realization", "site", "sigma_im", "sigma_shift", "gamma_fit", "censored"});
    for (std::size_t r = 0; r < ens.realizations.size(); ++r) {
      const auto& d = ens.realizations[r];
      for (std::size_t j = 0; j < d.sigma_im.size(); ++j) {
        const bool fitted = !d.gammas.empty();
        csv.row(r, j, d.sigma_im[j], d.sigma_shift[j], fitted ? fmt_double(d.gammas[j].gamma) : std::string("nan"),
                fitted ? static_cast<int>(d.gammas[j].censored) : -1);
      }
    }
  }
  {
    CsvWriter csv(sink, "participation.csv", {"realization", "state", "participation"});
    for (std::size_t r = 0; r < ens.realizations.size(); ++r)
      for (std::size_t b = 0; b < ens.realizations[r].participation.size(); ++b)
        csv.row(r, b, ens.realizations[r].participation[b]);
  }
  const auto cls = classify_phase(cfg);
  const double med = median(ens.pooled_participation());
  json out{{"M", cfg.M},
           {"gamma", cfg.gamma},
           {"lambda", cfg.lambda},
           {"W", cfg.W()},
           {"realizations", ens.realizations.size()},
           {"phase_predicted", to_string(cls.phase)},
           {"phase_boundary", cls.boundary},
           {"median_participation", med},
           {"phase_empirical", to_string(empirical_phase(med, cfg.M))},
           {"resolvent_fit", stable_report(ens.pooled_sigma_im(), 0.0)}};
  if (cfg.gamma > 0.0 && omega_predicted(cfg) > 1.0) {
    const auto g = predicted_gamma_law(cfg);
    out["predicted"] = {{"sigma_star", g.sigma_star}, {"omega", g.omega},       {"location", g.location},
                        {"scale", g.scale},           {"gamma_typ", g.gamma_typ}, {"location_asymptotic", g.location_asymptotic},
                        {"scale_asymptotic", g.scale_asymptotic}};
  }
  if (opts.survival_fit) {
    const auto fits = ens.pooled_fit_sigma_im();
    out["survival_censored"] = ens.censored_count();
    if (fits.size() >= 8) out["survival_fit"] = stable_report(fits, 0.0);
  }
  sink.write_json("ensemble.json", out);
}

void run_grover_sweep(const json& p, Context&, OutputSink& sink) {
  const int n = param<int>(p, "n");
  const auto Ms = number_list(param<std::string>(p, "M"), "M");
  const auto Ws = number_list(param<std::string>(p, "W"), "W");
  const auto ratios = number_list(param<std::string>(p, "ratio"), "ratio");
  const double V = n * std::exp2(-0.5 * n);
  CsvWriter csv(sink, "grover_sweep.csv",
                {"n", "M", "W", "eps0", "t_grover", "t0_pert", "p0_pert", "t_peak_exact", "p_peak_exact", "t_pt_pred",
                 "t_pt_exact", "out_of_regime"});
  for (double Md : Ms)
    for (double Wv : Ws)
      for (double ratio : ratios) {
        const auto M = static_cast<std::size_t>(Md);
        // W is given in units of V sqrt(M); eps0 = ratio * W
        const double W = Wv * V * std::sqrt(Md), eps0 = ratio * W;
        const auto s = make_grover_setup(n, M, W, eps0);
        const ReducedGrover g(s);
        const double tg = grover_time(n, Md);
        if (eps0 == 0.0 || W == 0.0) {
          const auto peak = first_transfer_peak(g, 3.0 * tg);
          csv.row(n, M, W, eps0, tg, "nan", "nan", peak.time, peak.population, "nan", "nan", 0);
          continue;
        }
        const auto est = pt_time_with_error(s);
        const auto peak = first_transfer_peak(g, 3.0 * est.t0);
        csv.row(n, M, W, eps0, tg, est.t0, est.p0, peak.time, peak.population, est.t_pt, peak.time / peak.population,
                static_cast<int>(est.out_of_regime));
      }
}

void run_sd(const json& p, Context& ctx, OutputSink& sink) {
  const auto inst = instance_param(p, ctx);
  const auto& sg = spin_glass(inst, "sd");
  const int n = sg.n, runs = param<int>(p, "runs");
  const auto start = param<std::string>(p, "start");
  const bool anneal = param<bool>(p, "anneal");
  AnnealingSchedule sched;
  sched.sweeps = param<int>(p, "sweeps");
  sched.T_start = param<double>(p, "T_start");
  sched.T_end = param<double>(p, "T_end");
  Rng rng(ctx.manifest.seed);
  CsvWriter csv(sink, "descent.csv", {"start", "end", "start_energy", "end_energy", "steps", "ties"});
  std::vector<double> ends;
  for (int k = 0; k < (start.empty() ? runs : 1); ++k) {
    std::uint64_t z;
    if (!start.empty()) {
      const auto b = BitString::parse(start);
      if (b.size() != n) throw InputError("--start must have n characters");
      z = b.bits();
    } else {
      z = rng.bits() & ((std::uint64_t{1} << n) - 1);
    }
    if (anneal) {
      const auto a = simulated_annealing(sg.classical, sched, derive_seed(ctx.manifest.seed, k), z);
      csv.row(bits(z, n), bits(a.z, n), sg.classical.energy(z), a.energy, sched.sweeps, 0);
      ends.push_back(a.energy);
    } else {
      const auto d = steepest_descent(sg.classical, z);
      csv.row(bits(z, n), bits(d.z, n), sg.classical.energy(z), d.energy, d.steps, static_cast<int>(d.ties));
      ends.push_back(d.energy);
    }
  }
  sink.write_json("sd.json", {{"runs", ends.size()},
                              {"method", anneal ? "annealing" : "steepest_descent"},
                              {"best_energy", *std::min_element(ends.begin(), ends.end())},
                              {"median_energy", median(ends)}});
}

void run_minima(const json& p, Context& ctx, OutputSink& sink) {
  const auto inst = instance_param(p, ctx);
  const int n = qubit_count(inst);
  if (n > kMaxMinimaBits) throw InputError("minima needs n <= " + std::to_string(kMaxMinimaBits));
  const auto t = enumerate_local_minima(classical_energies(inst), n, ctx.manifest.threads);
  const std::size_t ties = t.map.tie_starts;
  CsvWriter csv(sink, "minima.csv", {"z", "bits", "energy", "basin_uniform"});
  for (const auto& m : t.minima) csv.row(static_cast<unsigned long long>(m.z), bits(m.z, n), m.energy, m.basin_uniform);
  sink.write_json("minima.json", {{"n", n},
                                  {"count", t.minima.size()},
                                  {"global_minimum", bits(t.minima.front().z, n)},
                                  {"global_energy", t.minima.front().energy},
                                  {"starts_with_ties", ties}});
}

void run_pipeline_cmd(const json& p, Context& ctx, OutputSink& sink) {
  SpinGlassInstance inst;
  const auto path = param<std::string>(p, "instance");
  const int n = param<int>(p, "n");
  int dimers = param<int>(p, "dimers");
  if (dimers < 0) dimers = n / 2;
  if (!path.empty()) {
    ctx.manifest.add_input(path);
    inst = spin_glass(load_instance(path), "pipeline");
  } else {
    inst = gen_spin_glass(n, dimers, ctx.manifest.seed);
  }
  PipelineConfig cfg;
  cfg.gamma = param<double>(p, "gamma");
  cfg.base_time = param<double>(p, "base_time");
  cfg.trotter_steps = param<int>(p, "steps");
  cfg.start_fraction = param<double>(p, "start_fraction");
  cfg.energy_bins = param<int>(p, "bins");
  cfg.saturation.record_every = param<int>(p, "record_every");
  cfg.threads = ctx.manifest.threads;
  const auto main_run = run_pipeline(inst, cfg);
  sink.write_json("instance.json", to_json(ProblemInstance(inst)));
  write_pipeline(sink, main_run, cfg.energy_bins);
  if (param<bool>(p, "control") && !inst.dimers.empty()) {
    // same random draws; the dimer bonds keep their ordinary grid couplings
    const auto ctrl_inst = gen_spin_glass(inst.n, 0, inst.seed, inst.driver_scale);
    const auto ctrl = run_pipeline(ctrl_inst, cfg);
    write_pipeline(sink, ctrl, cfg.energy_bins, "control_");
    CsvWriter csv(sink, "comparison.csv", {"quantity", "dimers", "no_dimers"});
    const auto a = pipeline_summary(main_run), b = pipeline_summary(ctrl);
    for (const char* k : {"window_enrichment", "window_enrichment_excl_z0", "median_hamming", "median_hamming_window",
                          "even_odd_contrast", "enriched_minima", "global_minimum_ratio", "survival", "final_time"})
      csv.row(k, a.at(k).get<double>(), b.at(k).get<double>());
  }
}

void run_stats_fit(const json& p, Context& ctx, OutputSink& sink) {
  const auto path = param<std::string>(p, "input");
  if (path.empty()) throw InputError("--input is required");
  ctx.manifest.add_input(path);
  const auto column = param<std::string>(p, "column");
  std::istringstream in(read_file_bytes(path));
  std::vector<double> samples;
  int col = column.empty() ? 0 : -1;
  for (std::string line; std::getline(in, line);) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::stringstream ls(line);
    for (std::string c; std::getline(ls, c, ',');) cells.push_back(c);
    if (col < 0) {
      const auto it = std::find(cells.begin(), cells.end(), column);
      if (it == cells.end()) throw InputError(path + ": no column '" + column + "' in header");
      col = static_cast<int>(it - cells.begin());
      continue;
    }
    if (col >= static_cast<int>(cells.size())) throw InputError(path + ": short row");
    char* end = nullptr;
    const double x = std::strtod(cells[col].c_str(), &end);
    if (end == cells[col].c_str()) {
      if (samples.empty() && column.empty()) continue;  // header line
      throw InputError(path + ": bad number '" + cells[col] + "'");
    }
    if (std::isfinite(x)) samples.push_back(x);
  }
  if (samples.size() < 8) throw InputError(path + ": need at least 8 samples");
  auto out = stable_report(samples, param<double>(p, "tail_origin"));
  out["input"] = path;
  sink.write_json("stats_fit.json", out);
}

using Runner = void (*)(const json&, Context&, OutputSink&);

const std::map<std::string, Runner>& runners() {
  static const std::map<std::string, Runner> r{
      {"gen-instance", run_gen_instance}, {"spectrum", run_spectrum},   {"evolve", run_evolve},
      {"pt-run", run_pt},                 {"downfold", run_downfold},   {"pblm-ensemble", run_pblm_ensemble},
      {"grover-sweep", run_grover_sweep}, {"sd", run_sd},               {"minima", run_minima},
      {"pipeline", run_pipeline_cmd},     {"stats-fit", run_stats_fit}};
  return r;
}

void execute(Context& ctx) {
  const auto it = runners().find(ctx.manifest.subcommand);
  if (it == runners().end()) throw InputError("unknown subcommand '" + ctx.manifest.subcommand + "'");
  // inputs are hashed while running, so the stamped hash is computed from a
  // dry pass over the parameters first
  RunManifest probe = ctx.manifest;
  for (const char* key : {"instance", "input"})
    if (probe.params.contains(key) && !probe.params[key].get<std::string>().empty())
      probe.add_input(probe.params[key].get<std::string>());
  ctx.manifest.inputs = probe.inputs;
  OutputSink sink(ctx.out_dir, probe.hash());
  it->second(ctx.manifest.params, ctx, sink);
  ctx.manifest.outputs = sink.written();
  std::ofstream(ctx.out_dir / "manifest.json") << ctx.manifest.to_json().dump(2) << '\n';
}

void build_cli(CLI::App& app) {
  auto* g = app.add_subcommand("gen-instance", "generate a spin-glass or impurity-band instance");
  add<std::string>(g, "--kind", "kind", "spin-glass", "spin-glass or impurity-band");
  add<int>(g, "--n", "n", 16, "qubits");
  add<int>(g, "--dimers", "dimers", -1, "dimer count (spin glass; -1 = n/2)");
  add<double>(g, "--driver-scale", "driver_scale", 0.2, "matched driver Gamma (spin glass)");
  add<std::size_t>(g, "--M", "M", 8, "marked states (impurity band)");
  add<double>(g, "--W", "W", 0.1, "marked band width (impurity band)");
  add<double>(g, "--B", "B", 2.0, "transverse field (impurity band)");
  add<std::string>(g, "--eps-law", "eps_law", "uniform", "uniform or gaussian");

  auto driver_opts = [](CLI::App* a) {
    add<std::string>(a, "--driver", "driver", "default", "default, uniform or matched");
    add<double>(a, "--strength", "strength", -1.0, "driver strength (B_perp or Gamma; < 0 = instance default)");
  };

  auto* s = app.add_subcommand("spectrum", "classical density of states and low quantum levels");
  add<std::string>(s, "--instance", "instance", "", "instance JSON");
  add<int>(s, "--bins", "bins", 48, "histogram bins");
  add<int>(s, "--levels", "levels", 0, "lowest quantum levels to report (n <= 14)");
  driver_opts(s);

  auto* e = app.add_subcommand("evolve", "evolve a basis state");
  add<std::string>(e, "--instance", "instance", "", "instance JSON");
  add<std::string>(e, "--z0", "z0", "", "start string (default: lowest energy)");
  add<double>(e, "--time", "time", 10.0, "total time");
  add<int>(e, "--steps", "steps", 300, "Trotter steps");
  add<std::string>(e, "--splitting", "splitting", "symmetric", "symmetric or first-order");
  add<double>(e, "--threshold", "threshold", 0.0, "omit probabilities at or below this");
  add_flag(e, "--exact", "exact", "use exact diagonalization (n <= 14)");
  driver_opts(e);

  auto* pt = app.add_subcommand("pt-run", "population-transfer run from a basis state");
  add<std::string>(pt, "--instance", "instance", "", "instance JSON");
  add<std::string>(pt, "--z0", "z0", "", "start string (default: lowest energy)");
  add<double>(pt, "--time", "time", 10.0, "total time (first epoch when saturating)");
  add<int>(pt, "--steps", "steps", 300, "Trotter steps");
  add<double>(pt, "--window", "window", 1.0, "half-width of the traced target band around E(z0)");
  add<int>(pt, "--record-every", "record_every", 1, "trace stride in steps");
  add<int>(pt, "--max-doublings", "max_doublings", 8, "saturation epochs");
  add<double>(pt, "--threshold", "threshold", 0.0, "omit probabilities at or below this");
  add_flag(pt, "--saturate", "saturate", "double the run time until the target weight settles");
  driver_opts(pt);

  auto* d = app.add_subcommand("downfold", "down-folded impurity-band Hamiltonian");
  add<std::string>(d, "--instance", "instance", "", "impurity-band instance JSON");
  add<double>(d, "--B", "B", 0.0, "transverse field (0 = instance value)");
  add<std::string>(d, "--amplitude", "amplitude", "unit", "unit or calibrated");
  add<std::string>(d, "--phase", "phase", "numeric", "random-sign, random-phase or numeric");
  add_flag(d, "--compare", "compare", "compare with full diagonalization (n <= 14)");

  auto* pb = app.add_subcommand("pblm-ensemble", "self-energy statistics of a PBLM ensemble");
  add<std::size_t>(pb, "--M", "M", 1024, "matrix size");
  add<double>(pb, "--gamma", "gamma", 1.5, "disorder exponent");
  add<double>(pb, "--lambda", "lambda", 1.0, "disorder prefactor");
  add<std::size_t>(pb, "--realizations", "realizations", 20, "matrices");
  add<std::string>(pb, "--diagonal", "diagonal", "uniform", "uniform or gaussian");
  add<double>(pb, "--kappa", "kappa", 10.0, "resolvent broadening in mean level spacings");
  add_flag(pb, "--survival-fit", "survival_fit", "also fit survival decay per site");

  auto* gs = app.add_subcommand("grover-sweep", "reduced Grover model with driver error");
  add<int>(gs, "--n", "n", 20, "qubits");
  add<std::string>(gs, "--M", "M", "16,64", "marked counts (comma list)");
  add<std::string>(gs, "--W", "W", "1", "band widths in units of V sqrt(M) (comma list)");
  add<std::string>(gs, "--ratio", "ratio", "0,5,10,20", "eps0 / W values (comma list)");

  auto* sd = app.add_subcommand("sd", "steepest descent or annealing runs");
  add<std::string>(sd, "--instance", "instance", "", "spin-glass instance JSON");
  add<std::string>(sd, "--start", "start", "", "single start string (default: random starts)");
  add<int>(sd, "--runs", "runs", 100, "random starts");
  add_flag(sd, "--anneal", "anneal", "simulated annealing instead of descent");
  add<int>(sd, "--sweeps", "sweeps", 200, "annealing sweeps");
  add<double>(sd, "--T-start", "T_start", 2.0, "initial temperature");
  add<double>(sd, "--T-end", "T_end", 0.02, "final temperature");

  auto* mn = app.add_subcommand("minima", "enumerate single-flip local minima");
  add<std::string>(mn, "--instance", "instance", "", "instance JSON");

  auto* pl = app.add_subcommand("pipeline", "PT, descent from its output, and enrichment");
  add<std::string>(pl, "--instance", "instance", "", "spin-glass instance JSON (default: generate)");
  add<int>(pl, "--n", "n", 16, "qubits when generating");
  add<int>(pl, "--dimers", "dimers", -1, "dimers when generating (-1 = n/2)");
  add<double>(pl, "--gamma", "gamma", 0.2, "matched driver Gamma");
  add<double>(pl, "--base-time", "base_time", 10.0, "first saturation epoch");
  add<int>(pl, "--steps", "steps", 300, "Trotter steps per first epoch");
  add<double>(pl, "--start-fraction", "start_fraction", PipelineConfig{}.start_fraction,
              "rank of the start among minima, as a fraction from the lowest");
  add<int>(pl, "--bins", "bins", 48, "energy bins");
  add<int>(pl, "--record-every", "record_every", 10, "trace stride in steps");
  add_flag(pl, "--control", "control", "also run the no-dimer control");

  auto* sf = app.add_subcommand("stats-fit", "stable-law fit of a sample");
  add<std::string>(sf, "--input", "input", "", "CSV or one number per line");
  add<std::string>(sf, "--column", "column", "", "CSV column name");
  add<double>(sf, "--tail-origin", "tail_origin", 0.0, "origin of the log-log tail fit");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"population-transfer lab"};
  app.set_version_flag("--version", kVersion);
  std::uint64_t seed = 1;
  unsigned threads = 1;
  std::string out_dir = "out", replay;
  app.add_option("--seed", seed, "random seed")->capture_default_str();
  app.add_option("--threads", threads, "worker threads")->capture_default_str();
  app.add_option("--out-dir", out_dir, "output directory (PT_LAB_OUT overrides)")->capture_default_str();
  app.add_option("--replay", replay, "re-run from a manifest.json");
  app.fallthrough();  // global flags may follow the subcommand
  build_cli(app);
  app.require_subcommand(0, 1);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  try {
    Context ctx;
    if (const char* env = std::getenv("PT_LAB_OUT"); env && *env) out_dir = env;
    ctx.out_dir = out_dir;
    if (!replay.empty()) {
      if (!app.get_subcommands().empty()) throw InputError("--replay takes no subcommand");
      ctx.manifest = RunManifest::from_json(read_json_file(replay));
      ctx.manifest.verify_inputs();
    } else {
      if (app.get_subcommands().empty()) throw InputError("a subcommand or --replay is required (see --help)");
      const auto* sub = app.get_subcommands().front();
      ctx.manifest.subcommand = sub->get_name();
      for (const auto& c : g_collectors[sub]) c(ctx.manifest.params);
      ctx.manifest.seed = seed;
      ctx.manifest.threads = std::max(1u, threads);
    }
    execute(ctx);
    std::cout << "wrote " << ctx.manifest.outputs.size() << " files to " << ctx.out_dir.string() << " (manifest "
              << ctx.manifest.hash() << ")\n";
    return 0;
  } catch (const InputError& e) {
    std::cerr << "pt_lab: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "pt_lab: " << e.what() << '\n';
    return 1;
  }
}
