// Command-line front end: rate reports, coupled-pair simulation, contraction
// experiments, dimension sweeps and sampled verification of declared bounds.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "couplab/experiment.hpp"

namespace fs = std::filesystem;
using namespace couplab;

namespace {

struct Overrides {
  std::optional<uint64_t> seed;
  std::optional<int> ensemble;
  std::optional<double> dt, T;
  std::optional<std::string> out;
};

void add_overrides(CLI::App* cmd, Overrides& ov) {
  cmd->add_option("--seed", ov.seed, "override ensemble.seed");
  cmd->add_option("--ensemble", ov.ensemble, "override ensemble.trajectories");
  cmd->add_option("--dt", ov.dt, "override coupling.dt");
  cmd->add_option("--T", ov.T, "override coupling.T");
  cmd->add_option("--out", ov.out, "override output.dir");
}

ExperimentConfig load_with_overrides(const std::string& path, const Overrides& ov) {
  ExperimentConfig cfg = load_experiment_config(path);
  if (ov.seed) cfg.seed = *ov.seed;
  if (ov.ensemble) cfg.trajectories = *ov.ensemble;
  if (ov.dt) cfg.dt = *ov.dt;
  if (ov.T) cfg.T = *ov.T;
  if (ov.out) cfg.out_dir = *ov.out;
  return cfg;
}

std::ofstream open_out(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream os(p);
  if (!os) throw std::runtime_error("cannot open output file: " + p.string());
  return os;
}

void write_trajectory_csv(const TrajectoryRecord& rec, std::ostream& os) {
  os << "t,r,f,Q,rc\n";
  char buf[192];
  for (size_t j = 0; j < rec.t.size(); ++j) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g\n", rec.t[j],
                  rec.r[j], rec.f_r[j], rec.Q[j], rec.rc[j]);
    os << buf;
  }
}

int cmd_rates(const std::string& config, const Overrides& ov,
              const std::string& profile_csv) {
  ExperimentConfig cfg = load_with_overrides(config, ov);
  ExperimentSetup setup = assemble(cfg);
  std::string report = rate_report_json(cfg, setup);
  if (!cfg.out_dir.empty()) {
    auto os = open_out(fs::path(cfg.out_dir) / "rates.json");
    os << report << '\n';
    std::cout << "wrote " << (fs::path(cfg.out_dir) / "rates.json").string() << '\n';
  } else {
    std::cout << report << '\n';
  }
  if (!profile_csv.empty()) {
    if (!setup.profile) throw ConfigError("no profile in this mode (norm mode has none)");
    auto os = open_out(profile_csv);
    write_profile_csv(*setup.profile, os);
    std::cout << "wrote " << profile_csv << '\n';
  }
  return 0;
}

int cmd_simulate(const std::string& config, const Overrides& ov,
                 uint64_t trajectory, const std::string& out_file) {
  ExperimentConfig cfg = load_with_overrides(config, ov);
  ExperimentSetup setup = assemble(cfg);
  PairDynamics dyn;
  dyn.drift = &setup.drift;
  dyn.space = &setup.space;
  dyn.geom = setup.geom;
  dyn.profile = setup.profile ? &*setup.profile : nullptr;
  dyn.epsilon = setup.epsilon;
  TrajectoryRecord rec =
      simulate_pair(setup.x0, setup.y0, dyn, setup.coupling, trajectory);
  if (!out_file.empty()) {
    auto os = open_out(out_file);
    write_trajectory_csv(rec, os);
    std::cout << "wrote " << out_file << '\n';
  } else {
    write_trajectory_csv(rec, std::cout);
  }
  return 0;
}

int cmd_contract(const std::string& config, const Overrides& ov) {
  ExperimentConfig cfg = load_with_overrides(config, ov);
  ExperimentSetup setup = assemble(cfg);
  ContractionOutcome oc = run_contraction_experiment(cfg, setup);
  std::printf("mode=%s statistic=%s c_theory=%.6g c_hat=%.6g se=%.3g",
              cfg.mode.c_str(), oc.statistic.c_str(), oc.c_theory,
              oc.decay.c_hat, oc.decay.se);
  if (oc.pathwise_fraction >= 0)
    std::printf(" pathwise=%.4g", oc.pathwise_fraction);
  std::printf(" -> %s\n", oc.pass ? "PASS" : "FAIL");
  if (!cfg.out_dir.empty()) {
    fs::path dir(cfg.out_dir);
    {
      auto os = open_out(dir / "series.csv");
      write_series_csv(oc, os);
    }
    {
      auto os = open_out(dir / "report.json");
      os << outcome_json(cfg, setup, oc) << '\n';
    }
    if (setup.profile) {
      auto os = open_out(dir / "profile.csv");
      write_profile_csv(*setup.profile, os);
    }
    std::cout << "wrote " << (dir / "series.csv").string() << ", "
              << (dir / "report.json").string()
              << (setup.profile ? ", " + (dir / "profile.csv").string() : "")
              << '\n';
  }
  return oc.pass ? 0 : 1;
}

int cmd_sweep(const std::string& config, const Overrides& ov,
              std::vector<int> dims) {
  ExperimentConfig cfg = load_with_overrides(config, ov);
  SweepOutcome sw = run_dimension_sweep(cfg, dims);
  for (size_t i = 0; i < sw.dims.size(); ++i)
    std::printf("d=%-4d c_theory=%.9g c_hat=%.6g se=%.3g\n", sw.dims[i],
                sw.c_theory[i], sw.c_hat[i], sw.se[i]);
  std::printf("c_theory identical: %s; rates consistent: %s -> %s\n",
              sw.c_theory_identical ? "yes" : "no",
              sw.rates_consistent ? "yes" : "no",
              (sw.c_theory_identical && sw.rates_consistent) ? "PASS" : "FAIL");
  if (!cfg.out_dir.empty()) {
    fs::path dir(cfg.out_dir);
    {
      auto os = open_out(dir / "sweep.csv");
      write_sweep_csv(sw, os);
    }
    {
      auto os = open_out(dir / "sweep.json");
      os << sweep_json(sw) << '\n';
    }
    std::cout << "wrote " << (dir / "sweep.csv").string() << ", "
              << (dir / "sweep.json").string() << '\n';
  }
  return (sw.c_theory_identical && sw.rates_consistent) ? 0 : 1;
}

int cmd_verify(const std::string& config, const Overrides& ov, int samples) {
  ExperimentConfig cfg = load_with_overrides(config, ov);
  ExperimentSetup setup = assemble(cfg);
  const uint64_t seed = cfg.seed;
  bool ok = true;

  auto bb = check_block_bounds(setup.drift, setup.space, *setup.drift.declared,
                               samples, seed);
  std::printf("block bounds:    %d samples, %d violations, max ratios "
              "low=%.6f high=%.6f weighted=%.6f\n",
              bb.samples, bb.violations, bb.max_ratio_low, bb.max_ratio_high,
              bb.max_ratio_weighted);
  ok = ok && bb.violations == 0;

  if (setup.space.split_index < setup.space.dim()) {
    auto sec = check_sector_contraction(setup.drift, setup.space, setup.geom,
                                        samples, seed);
    std::printf("sector bound:    %d samples, %d violations, max ratio %.6f "
                "(factor %.6f)\n",
                sec.samples, sec.violations, sec.max_ratio, sec.factor);
    ok = ok && sec.violations == 0;
  }

  if (cfg.mode == "profile" && setup.drift.large_distance) {
    auto ld = check_large_distance(setup.drift, setup.space, setup.geom,
                                   *setup.drift.large_distance, samples, seed);
    std::printf("large distance:  %d samples, %d violations, max ratio %.6f\n",
                ld.samples, ld.violations, ld.max_ratio);
    ok = ok && ld.violations == 0;
  }

  Vec x = Vec::Constant(setup.space.dim(), 0.3);
  auto gc = mc_generator_check(setup.drift, setup.space, x, 1e-4,
                               std::max(2000, samples), seed);
  const double dev = std::abs(gc.estimate - gc.closed_form);
  const bool gc_ok = dev <= 3.0 * gc.std_error + 1e-6;
  std::printf("generator:       estimate %.6f vs closed form %.6f (se %.3g) %s\n",
              gc.estimate, gc.closed_form, gc.std_error, gc_ok ? "ok" : "OFF");
  ok = ok && gc_ok;

  std::printf("verify -> %s\n", ok ? "PASS" : "FAIL");
  return ok ? 0 : 1;
}

int cmd_tps(double a, double c1, double sigma, int d, int quad,
            const std::string& which) {
  SpectralSpace sp = SpectralSpace::brownian_bridge(d, 1);
  PathPotential pp = (which == "doublewell")
                         ? tps_doublewell_potential(a, c1, sigma)
                         : tps_quadratic_potential(a);
  DriftModel m = tps_drift(sp, pp, quad);
  std::printf("preset=%s a=%g L_m=%g growth=(%g, %g)\n", which.c_str(), a,
              pp.L_m, pp.growth.b, pp.growth.c);
  if (which == "quadratic") {
    // closed form: b_k(x) = -lambda_k a^2 x_k; report the worst deviation on
    // a few states
    NoiseStream ns(7, 0, 0);
    double worst = 0;
    std::vector<double> z(static_cast<size_t>(d));
    for (int s = 0; s < 20; ++s) {
      ns.normals(uint64_t(s), z);
      Vec x(d);
      for (int k = 0; k < d; ++k) x[k] = z[size_t(k)];
      Vec b = m.b(x);
      for (int k = 0; k < d; ++k)
        worst = std::max(worst,
                         std::abs(b[k] + sp.eigenvalues[k] * a * a * x[k]));
    }
    std::printf("max |b_k + lambda_k a^2 x_k| over 20 Gaussian states: %.3e\n",
                worst);
    return worst <= 1e-8 ? 0 : 1;
  }
  if (m.declared) {
    std::printf("declared split: H=(%g, %g), L=(%g, %g)\n", m.declared->H_l,
                m.declared->H_h, m.declared->L_l, m.declared->L_h);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"coupling laboratory for spectral Galerkin diffusions"};
  app.require_subcommand(1);

  std::string config, profile_csv, out_file, which = "quadratic";
  Overrides ov;
  uint64_t trajectory = 0;
  std::vector<int> dims;
  int samples = 4000, tps_d = 16, tps_quad = 0;
  double tps_a = 1.0, tps_c1 = 0.25, tps_sigma = 0.5;

  auto* rates = app.add_subcommand("rates", "assemble and print the rate report");
  rates->add_option("--config", config, "TOML experiment file")->required();
  rates->add_option("--profile-csv", profile_csv, "also tabulate f to CSV");
  add_overrides(rates, ov);

  auto* simulate = app.add_subcommand("simulate", "one coupled pair trajectory");
  simulate->add_option("--config", config)->required();
  simulate->add_option("--trajectory", trajectory, "trajectory index");
  simulate->add_option("--out-file", out_file, "CSV path (default stdout)");
  add_overrides(simulate, ov);

  auto* contract = app.add_subcommand(
      "contract", "ensemble contraction run against the theoretical rate");
  contract->add_option("--config", config)->required();
  add_overrides(contract, ov);

  auto* sweep = app.add_subcommand(
      "sweep-dim", "repeat the run across truncation dimensions");
  sweep->add_option("--config", config)->required();
  sweep->add_option("--dims", dims, "dimensions, e.g. --dims 8 16 32")
      ->required()
      ->expected(-1);
  add_overrides(sweep, ov);

  auto* verify = app.add_subcommand(
      "verify", "sampled checks of declared drift bounds and the generator");
  verify->add_option("--config", config)->required();
  verify->add_option("--samples", samples, "samples per check");
  add_overrides(verify, ov);

  auto* tps = app.add_subcommand(
      "tps", "transition-path drift diagnostics on the sine basis");
  tps->add_option("--which", which, "quadratic | doublewell");
  tps->add_option("--a", tps_a, "quadratic well coefficient");
  tps->add_option("--c1", tps_c1, "doublewell bump height");
  tps->add_option("--sigma", tps_sigma, "doublewell bump width");
  tps->add_option("--d", tps_d, "truncation dimension");
  tps->add_option("--quad", tps_quad, "quadrature nodes (0 = auto)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (rates->parsed()) return cmd_rates(config, ov, profile_csv);
    if (simulate->parsed()) return cmd_simulate(config, ov, trajectory, out_file);
    if (contract->parsed()) return cmd_contract(config, ov);
    if (sweep->parsed()) return cmd_sweep(config, ov, dims);
    if (verify->parsed()) return cmd_verify(config, ov, samples);
    if (tps->parsed()) return cmd_tps(tps_a, tps_c1, tps_sigma, tps_d, tps_quad, which);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
