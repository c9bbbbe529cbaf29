#include "couplab/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

#include <json.hpp>

namespace couplab {

namespace {

using ojson = nlohmann::ordered_json;

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Vec to_vec(const std::vector<double>& v) {
  Vec out(long(v.size()));
  for (size_t i = 0; i < v.size(); ++i) out[long(i)] = v[i];
  return out;
}

[[noreturn]] void bad(const std::string& msg) { throw ConfigError(msg); }

// Smallest low-block size whose complementary eigenvalues all satisfy
// stiffness * lambda < 1 (tight constants for a linear drift -a G x).
int auto_split_linear(const Vec& lam, double stiffness) {
  const int d = int(lam.size());
  for (int n = 1; n <= d; ++n) {
    double hi = 0;
    for (int k = n; k < d; ++k) hi = std::max(hi, lam[k]);
    if (stiffness * hi < 1.0) return n;
  }
  bad("no split index keeps the high-block bound below 1; set space.n");
}

}  // namespace

ExperimentConfig experiment_config_from(const ConfigMap& m) {
  static const std::set<std::string> known = {
      "space.family",         "space.d",
      "space.n",              "space.rho",
      "space.eigenvalues",    "drift.preset",
      "drift.a",              "drift.c1",
      "drift.sigma",          "drift.center",
      "drift.M",              "drift.R",
      "drift.quad_nodes",     "analysis.mode",
      "analysis.eta",         "analysis.grid_size",
      "analysis.trace_override", "coupling.kind",
      "coupling.dt",          "coupling.T",
      "coupling.delta",       "coupling.merge_tol",
      "coupling.record_stride", "ensemble.trajectories",
      "ensemble.seed",        "ensemble.window_lo",
      "ensemble.window_hi",   "ensemble.y0_low",
      "ensemble.y0_high",     "ensemble.x0",
      "ensemble.y0",          "output.dir",
  };
  for (const auto& k : m.keys())
    if (!known.count(k)) bad("unknown config key: " + k);

  ExperimentConfig c;
  c.family = m.text_or("space.family", c.family);
  c.d = int(m.integer_or("space.d", c.d));
  c.n = int(m.integer_or("space.n", 0));
  c.rho = m.number_or("space.rho", c.rho);
  c.eigenvalues = m.number_list_or("space.eigenvalues");

  c.preset = m.text_or("drift.preset", c.preset);
  c.a = m.number_or("drift.a", c.a);
  c.c1 = m.number_or("drift.c1", c.c1);
  c.sigma = m.number_or("drift.sigma", c.sigma);
  c.center = m.number_list_or("drift.center");
  c.M = m.number_or("drift.M", c.M);
  c.R = m.number_or("drift.R", c.R);
  c.quad_nodes = int(m.integer_or("drift.quad_nodes", 0));

  c.mode = m.text_or("analysis.mode", c.mode);
  c.eta = m.number_or("analysis.eta", c.eta);
  c.grid_size = int(m.integer_or("analysis.grid_size", c.grid_size));
  if (m.has("analysis.trace_override"))
    c.trace_override = m.number("analysis.trace_override");

  c.kind = m.text_or("coupling.kind", "");
  c.dt = m.number_or("coupling.dt", c.dt);
  c.T = m.number_or("coupling.T", c.T);
  c.delta = m.number_or("coupling.delta", c.delta);
  c.merge_tol = m.number_or("coupling.merge_tol", c.merge_tol);
  c.record_stride = int(m.integer_or("coupling.record_stride", c.record_stride));

  c.trajectories = int(m.integer_or("ensemble.trajectories", c.trajectories));
  c.seed = uint64_t(m.integer_or("ensemble.seed", 1));
  c.window_lo = m.number_or("ensemble.window_lo", c.window_lo);
  c.window_hi = m.number_or("ensemble.window_hi", c.window_hi);
  c.y0_low = m.number_or("ensemble.y0_low", c.y0_low);
  c.y0_high = m.number_or("ensemble.y0_high", c.y0_high);
  c.x0 = m.number_list_or("ensemble.x0");
  c.y0 = m.number_list_or("ensemble.y0");

  c.out_dir = m.text_or("output.dir", "");
  return c;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  return experiment_config_from(ConfigMap::parse_file(path));
}

ExperimentSetup assemble(const ExperimentConfig& cfg) {
  if (cfg.d < 1) bad("space.d must be >= 1");

  Vec lam;
  if (cfg.family == "brownian_bridge") {
    lam = SpectralSpace::brownian_bridge(cfg.d, 1).eigenvalues;
  } else if (cfg.family == "geometric") {
    lam = SpectralSpace::geometric(cfg.rho, cfg.d, 1).eigenvalues;
  } else if (cfg.family == "explicit") {
    if (cfg.eigenvalues.empty()) bad("explicit family needs space.eigenvalues");
    lam = to_vec(cfg.eigenvalues);
  } else {
    bad("unknown space.family: " + cfg.family);
  }
  const int d = int(lam.size());

  std::optional<PathPotential> pp;
  if (cfg.preset == "tps_quadratic") {
    pp = tps_quadratic_potential(cfg.a);
  } else if (cfg.preset == "tps_doublewell") {
    pp = tps_doublewell_potential(cfg.a, cfg.c1, cfg.sigma);
  } else if (cfg.preset != "ou" && cfg.preset != "gaussian_bump") {
    bad("unknown drift.preset: " + cfg.preset);
  }

  int n = cfg.n;
  if (n == 0) {
    if (cfg.preset == "ou") {
      n = auto_split_linear(lam, cfg.a);
    } else if (cfg.preset == "gaussian_bump") {
      if (!(cfg.sigma > 0)) bad("drift.sigma must be > 0");
      n = split_index_for(cfg.c1 / (cfg.sigma * cfg.sigma), lam);
    } else if (cfg.preset == "tps_quadratic") {
      n = auto_split_linear(lam, cfg.a * cfg.a);
    } else {
      n = split_index_for(std::max(1.0, pp->L_m), lam);
    }
  }

  ExperimentSetup s;
  s.space = SpectralSpace::from_eigenvalues(lam, n);

  if (cfg.preset == "ou") {
    s.drift = preconditioned_gradient_drift(s.space, ou_potential(cfg.a));
  } else if (cfg.preset == "gaussian_bump") {
    Vec center;
    if (!cfg.center.empty()) {
      if (int(cfg.center.size()) != d) bad("drift.center length must match space.d");
      center = to_vec(cfg.center);
    }
    s.drift = preconditioned_gradient_drift(
        s.space, gaussian_bump_potential(cfg.a, cfg.c1, cfg.sigma, center));
  } else {
    s.drift = tps_drift(s.space, *pp, cfg.quad_nodes);
  }
  s.drift.large_distance = LargeDistanceContract{cfg.M, cfg.R};

  if (!s.drift.declared)
    bad("no valid block Lipschitz split for this drift at this truncation; "
        "adjust space.n, space.d or the drift parameters");
  s.geom = compute_geometry(*s.drift.declared);

  std::string kind = cfg.kind;
  if (kind.empty()) kind = (cfg.mode == "norm") ? "synchronous" : "switching";
  if (kind != "synchronous" && kind != "switching")
    bad("unknown coupling.kind: " + kind);

  ProfileOptions popt;
  popt.grid_size = cfg.grid_size;

  if (cfg.mode == "norm") {
    if (!(s.geom.beta < 0))
      bad("norm mode needs beta < 0 (got beta = " + std::to_string(s.geom.beta) +
          "); use profile mode");
    if (kind != "synchronous") bad("norm mode uses the synchronous coupling");
    s.c_theory = std::min(1.0 / s.geom.alpha, -s.geom.beta);
    s.statistic = "r";
  } else if (cfg.mode == "profile") {
    if (s.geom.beta < 0)
      bad("profile mode needs beta >= 0; with beta < 0 the plain weighted norm "
          "already contracts (norm mode)");
    if (!(cfg.M >= 0 && cfg.M < 1)) bad("drift.M must lie in [0, 1)");
    s.profile = build_profile_linear_tail(s.geom.beta, s.space.lambda_star(),
                                          cfg.R, popt);
    s.rate = rate_linear_tail(*s.profile, cfg.M, s.geom.alpha);
    s.c_theory = s.rate->c;
    s.statistic = "f";
  } else if (cfg.mode == "lyapunov") {
    if (s.geom.beta < 0) bad("lyapunov mode needs beta >= 0; use norm mode");
    FitOptions fo;
    fo.seed = cfg.seed;
    fo.trace_override = cfg.trace_override;
    DriftConditionFit fit = fit_drift_constants(s.drift, s.space, cfg.eta, fo);
    s.fit = fit;
    s.lyap = derived_quantities(fit.C, fit.eta, s.geom);
    s.profile = build_profile_constant_tail(s.geom.beta, s.space.lambda_star(),
                                            s.space.lambda_sup(), s.lyap->theta,
                                            s.lyap->R_S, popt);
    s.rate = rate_constant_tail(*s.profile, s.geom.alpha, fit.C, fit.eta);
    s.c_theory = s.rate->c;
    s.epsilon = s.rate->epsilon;
    s.statistic = "Q";
  } else {
    bad("unknown analysis.mode: " + cfg.mode);
  }

  if (!cfg.x0.empty()) {
    if (int(cfg.x0.size()) != d) bad("ensemble.x0 length must match space.d");
    s.x0 = to_vec(cfg.x0);
  } else {
    s.x0 = Vec::Zero(d);
  }
  if (!cfg.y0.empty()) {
    if (int(cfg.y0.size()) != d) bad("ensemble.y0 length must match space.d");
    s.y0 = to_vec(cfg.y0);
  } else {
    s.y0 = s.x0;
    s.y0[0] += cfg.y0_low;
    s.y0[std::min(n, d - 1)] += cfg.y0_high;
  }

  CouplingConfig cc;
  cc.kind = (kind == "synchronous") ? CouplingKind::Synchronous
                                    : CouplingKind::Switching;
  cc.dt = cfg.dt;
  cc.T = cfg.T;
  cc.delta = cfg.delta;
  cc.merge_tol = cfg.merge_tol;
  cc.record_stride = cfg.record_stride;
  cc.seed = cfg.seed;
  s.coupling = cc;
  return s;
}

ContractionOutcome run_contraction_experiment(const ExperimentConfig& cfg) {
  return run_contraction_experiment(cfg, assemble(cfg));
}

ContractionOutcome run_contraction_experiment(const ExperimentConfig& cfg,
                                              const ExperimentSetup& setup) {
  if (cfg.trajectories < 2) bad("ensemble.trajectories must be >= 2");
  if (!(cfg.window_lo >= 0 && cfg.window_lo < cfg.window_hi && cfg.window_hi <= 1))
    bad("need 0 <= ensemble.window_lo < ensemble.window_hi <= 1");

  PairDynamics dyn;
  dyn.drift = &setup.drift;
  dyn.space = &setup.space;
  dyn.geom = setup.geom;
  dyn.profile = setup.profile ? &*setup.profile : nullptr;
  dyn.epsilon = setup.epsilon;

  ContractionOutcome oc;
  oc.statistic = setup.statistic;
  oc.c_theory = setup.c_theory;

  std::vector<std::vector<double>> stat_rows, sep_rows;
  std::vector<double> merged_count;
  int pathwise_ok = 0;
  const double slack = 1.0 + 10.0 * cfg.dt;

  for (int i = 0; i < cfg.trajectories; ++i) {
    TrajectoryRecord rec =
        simulate_pair(setup.x0, setup.y0, dyn, setup.coupling, uint64_t(i));
    if (oc.t.empty()) {
      oc.t = rec.t;
      merged_count.assign(rec.t.size(), 0.0);
    }
    const std::vector<double>* col = &rec.r;
    if (setup.statistic == "f")
      col = &rec.f_r;
    else if (setup.statistic == "Q")
      col = &rec.Q;
    stat_rows.push_back(*col);
    sep_rows.push_back(rec.r);
    for (size_t j = 0; j < rec.r.size(); ++j)
      if (rec.r[j] <= setup.coupling.merge_tol) merged_count[j] += 1.0;

    if (setup.statistic == "r") {
      const double r0 = rec.r.front();
      bool ok = true;
      for (size_t j = 0; j < rec.t.size(); ++j) {
        const double envelope =
            r0 * std::exp(-setup.c_theory * rec.t[j]) * slack + 1e-14;
        if (rec.r[j] > envelope) {
          ok = false;
          break;
        }
      }
      if (ok) ++pathwise_ok;
    }
  }

  oc.stat = column_stats(stat_rows);
  oc.sep = column_stats(sep_rows);
  oc.coalesced_fraction.resize(merged_count.size());
  for (size_t j = 0; j < merged_count.size(); ++j)
    oc.coalesced_fraction[j] = merged_count[j] / double(cfg.trajectories);

  oc.decay = estimate_decay_rows(oc.t, stat_rows, cfg.window_lo * cfg.T,
                                 cfg.window_hi * cfg.T);
  oc.dt_bias = cfg.dt * std::max(1.0, setup.c_theory);
  const bool rate_ok =
      oc.decay.c_hat >= setup.c_theory - 2.0 * oc.decay.se - oc.dt_bias;
  if (setup.statistic == "r") {
    oc.pathwise_fraction = double(pathwise_ok) / double(cfg.trajectories);
    oc.pass = rate_ok && oc.pathwise_fraction == 1.0;
  } else {
    oc.pass = rate_ok;
  }
  return oc;
}

MarginalMoments final_state_moments(const ExperimentConfig& cfg) {
  ExperimentSetup setup = assemble(cfg);
  if (cfg.trajectories < 2) bad("ensemble.trajectories must be >= 2");

  PairDynamics dyn;
  dyn.drift = &setup.drift;
  dyn.space = &setup.space;
  dyn.geom = setup.geom;
  dyn.profile = setup.profile ? &*setup.profile : nullptr;
  dyn.epsilon = setup.epsilon;

  const int d = setup.space.dim();
  std::vector<std::vector<double>> coords(d);
  MarginalMoments mm;
  for (int i = 0; i < cfg.trajectories; ++i) {
    TrajectoryRecord rec =
        simulate_pair(setup.x0, setup.y0, dyn, setup.coupling, uint64_t(i));
    for (int k = 0; k < d; ++k) coords[k].push_back(rec.final_X[k]);
    mm.first_coord.push_back(rec.final_X[0]);
  }
  mm.coord.reserve(d);
  for (int k = 0; k < d; ++k) mm.coord.push_back(moments(coords[k]));
  return mm;
}

SweepOutcome run_dimension_sweep(const ExperimentConfig& base,
                                 const std::vector<int>& dims) {
  if (dims.empty()) bad("dimension sweep needs at least one dimension");
  if (base.family == "explicit")
    bad("dimension sweep needs a parametric family (brownian_bridge or "
        "geometric)");

  SweepOutcome sw;
  for (int dd : dims) {
    ExperimentConfig cfg = base;
    cfg.d = dd;
    if (base.mode == "lyapunov" && !cfg.trace_override) {
      if (base.family == "brownian_bridge")
        cfg.trace_override = 1.0 / 6.0;
      else
        cfg.trace_override = base.rho / (1.0 - base.rho);
    }
    ContractionOutcome oc = run_contraction_experiment(cfg);
    sw.dims.push_back(dd);
    sw.c_theory.push_back(oc.c_theory);
    sw.c_hat.push_back(oc.decay.c_hat);
    sw.se.push_back(oc.decay.se);
    sw.runs.push_back(std::move(oc));
  }
  for (size_t i = 1; i < sw.c_theory.size(); ++i)
    if (sw.c_theory[i] != sw.c_theory[0]) sw.c_theory_identical = false;
  for (size_t i = 0; i < sw.c_hat.size(); ++i)
    for (size_t j = i + 1; j < sw.c_hat.size(); ++j) {
      const double tol = 3.0 * std::hypot(sw.se[i], sw.se[j]);
      if (std::abs(sw.c_hat[i] - sw.c_hat[j]) > tol) sw.rates_consistent = false;
    }
  return sw;
}

void write_series_csv(const ContractionOutcome& oc, std::ostream& os) {
  // the fitted statistic (r, f or Q; named in the JSON report) plus the raw
  // weighted separation
  os << "t,stat_mean,stat_se,r_mean,r_se,coalesced_frac\n";
  for (size_t j = 0; j < oc.t.size(); ++j) {
    os << fmt17(oc.t[j]) << ',' << fmt17(oc.stat.mean[j]) << ','
       << fmt17(oc.stat.se[j]) << ',' << fmt17(oc.sep.mean[j]) << ','
       << fmt17(oc.sep.se[j]) << ',' << fmt17(oc.coalesced_fraction[j]) << '\n';
  }
}

void write_sweep_csv(const SweepOutcome& sw, std::ostream& os) {
  os << "d,c_theory,c_hat,se\n";
  for (size_t i = 0; i < sw.dims.size(); ++i) {
    os << sw.dims[i] << ',' << fmt17(sw.c_theory[i]) << ','
       << fmt17(sw.c_hat[i]) << ',' << fmt17(sw.se[i]) << '\n';
  }
}

namespace {

ojson setup_json(const ExperimentConfig& cfg, const ExperimentSetup& s) {
  ojson j;
  j["space"] = {{"family", cfg.family},
                {"d", s.space.dim()},
                {"n", s.space.split_index},
                {"lambda_star", s.space.lambda_star()},
                {"lambda_sup", s.space.lambda_sup()},
                {"trace", s.space.trace()}};
  j["drift"] = {{"preset", cfg.preset}, {"name", s.drift.name}};
  if (s.drift.declared) {
    const auto& lip = *s.drift.declared;
    j["drift"]["lipschitz"] = {
        {"H_l", lip.H_l}, {"H_h", lip.H_h}, {"L_l", lip.L_l}, {"L_h", lip.L_h}};
  }
  j["geometry"] = {{"alpha", s.geom.alpha}, {"beta", s.geom.beta}};
  j["mode"] = cfg.mode;
  ojson rate;
  rate["c_theory"] = s.c_theory;
  rate["statistic"] = s.statistic;
  if (s.rate) {
    rate["comp_large"] = s.rate->comp_large;
    rate["comp_sector"] = s.rate->comp_sector;
    rate["comp_gamma"] = s.rate->comp_gamma;
    if (s.rate->variant == ProfileVariant::ConstantTail) {
      rate["comp_eta"] = s.rate->comp_eta;
      rate["epsilon"] = s.rate->epsilon;
    }
    if (s.rate->lower_bound) rate["lower_bound"] = *s.rate->lower_bound;
    rate["log_phi_R"] = s.rate->log_phi_R;
    rate["log_gamma"] = s.rate->log_gamma;
  }
  j["rate"] = rate;
  if (s.profile) {
    j["profile"] = {{"variant", s.profile->variant == ProfileVariant::LinearTail
                                    ? "linear_tail"
                                    : "constant_tail"},
                    {"R", s.profile->R},
                    {"beta", s.profile->beta},
                    {"lambda_star", s.profile->lambda_star},
                    {"theta", s.profile->theta},
                    {"f_R", s.profile->f_R()},
                    {"gamma", s.profile->gamma},
                    {"log_gamma", s.profile->log_gamma}};
  }
  if (s.lyap) {
    j["lyapunov"] = {{"C", s.lyap->C},
                     {"eta", s.lyap->eta},
                     {"theta", s.lyap->theta},
                     {"R_S", s.lyap->R_S}};
    if (s.fit) {
      j["lyapunov"]["C_sampled"] = s.fit->C_sampled;
      if (s.fit->C_closed_form)
        j["lyapunov"]["C_closed_form"] = *s.fit->C_closed_form;
    }
  }
  if (s.profile && s.rate) {
    DecayEnvelopes env = envelopes(*s.profile, *s.rate);
    j["envelopes"] = {{"w1_prefactor", env.w1_prefactor},
                      {"gradient_prefactor", env.gradient_prefactor}};
  }
  return j;
}

}  // namespace

std::string rate_report_json(const ExperimentConfig& cfg,
                             const ExperimentSetup& setup) {
  return setup_json(cfg, setup).dump(2);
}

std::string outcome_json(const ExperimentConfig& cfg,
                         const ExperimentSetup& setup,
                         const ContractionOutcome& oc) {
  ojson j = setup_json(cfg, setup);
  j["ensemble"] = {{"trajectories", cfg.trajectories},
                   {"dt", cfg.dt},
                   {"T", cfg.T},
                   {"seed", cfg.seed},
                   {"coupling", cfg.kind.empty()
                                    ? (cfg.mode == "norm" ? "synchronous"
                                                          : "switching")
                                    : cfg.kind}};
  j["decay"] = {{"c_hat", oc.decay.c_hat},
                {"se", oc.decay.se},
                {"n_used", oc.decay.n_used},
                {"t_lo", oc.decay.t_lo},
                {"t_hi", oc.decay.t_hi},
                {"dt_bias", oc.dt_bias}};
  if (oc.pathwise_fraction >= 0)
    j["decay"]["pathwise_fraction"] = oc.pathwise_fraction;
  j["pass"] = oc.pass;
  return j.dump(2);
}

std::string sweep_json(const SweepOutcome& sw) {
  ojson j;
  j["dims"] = sw.dims;
  j["c_theory"] = sw.c_theory;
  j["c_hat"] = sw.c_hat;
  j["se"] = sw.se;
  j["c_theory_identical"] = sw.c_theory_identical;
  j["rates_consistent"] = sw.rates_consistent;
  j["pass"] = sw.c_theory_identical && sw.rates_consistent;
  return j.dump(2);
}

}  // namespace couplab
