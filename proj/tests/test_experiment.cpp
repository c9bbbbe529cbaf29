#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>
#include <string>

#include "couplab/experiment.hpp"

using namespace couplab;
using doctest::Contains;

namespace {

ExperimentConfig ou_norm_config() {
  ExperimentConfig cfg;
  cfg.d = 8;
  cfg.preset = "ou";
  cfg.a = 1.0;
  cfg.mode = "norm";
  cfg.dt = 0.01;
  cfg.T = 1.0;
  cfg.record_stride = 5;
  cfg.trajectories = 6;
  cfg.window_lo = 0.1;
  cfg.window_hi = 0.9;
  return cfg;
}

ExperimentConfig bump_profile_config() {
  ExperimentConfig cfg;  // defaults: gaussian_bump + profile mode
  cfg.d = 8;
  cfg.dt = 0.01;
  cfg.T = 3.0;
  cfg.record_stride = 10;
  cfg.trajectories = 40;
  return cfg;
}

}  // namespace

TEST_CASE("assembly routes each mode to its statistic and rate") {
  SUBCASE("norm mode: synchronous coupling and the weighted-norm rate") {
    auto s = assemble(ou_norm_config());
    CHECK(s.statistic == "r");
    CHECK(s.geom.beta < 0.0);
    CHECK(s.c_theory ==
          doctest::Approx(std::min(1.0 / s.geom.alpha, -s.geom.beta))
              .epsilon(1e-15));
    CHECK(s.coupling.kind == CouplingKind::Synchronous);
    CHECK(!s.profile.has_value());
    CHECK(s.epsilon == 0.0);
    // default initial pair: x0 = 0, y0 adds the block offsets
    CHECK(s.x0.norm() == 0.0);
    CHECK(s.y0[0] == 1.0);
  }

  SUBCASE("profile mode: linear-tail profile at the contract radius") {
    auto cfg = bump_profile_config();
    auto s = assemble(cfg);
    CHECK(s.statistic == "f");
    CHECK(s.geom.beta >= 0.0);
    REQUIRE(s.profile.has_value());
    CHECK(s.profile->R == cfg.R);
    REQUIRE(s.rate.has_value());
    CHECK(s.rate->variant == ProfileVariant::LinearTail);
    CHECK(s.c_theory == s.rate->c);
    CHECK(s.c_theory > 0.0);
    CHECK(s.coupling.kind == CouplingKind::Switching);
    REQUIRE(s.drift.large_distance.has_value());
    CHECK(s.drift.large_distance->M == cfg.M);
    CHECK(s.drift.large_distance->R == cfg.R);
  }

  SUBCASE("lyapunov mode: fitted constants drive the constant-tail profile") {
    auto cfg = bump_profile_config();
    cfg.mode = "lyapunov";
    auto s = assemble(cfg);
    CHECK(s.statistic == "Q");
    REQUIRE(s.fit.has_value());
    REQUIRE(s.lyap.has_value());
    REQUIRE(s.rate.has_value());
    CHECK(s.rate->variant == ProfileVariant::ConstantTail);
    CHECK(s.epsilon > 0.0);
    CHECK(s.epsilon == s.rate->epsilon);
    // R_S is reproduced from the fitted (C, eta)
    const double budget = 8.0 * s.fit->C / s.fit->eta - 2.0;
    CHECK(s.lyap->R_S ==
          doctest::Approx(std::sqrt(2.0 * (1.0 + s.geom.alpha * s.geom.alpha) *
                                    budget))
              .epsilon(1e-14));
    CHECK(s.profile->R == s.lyap->R_S);
  }

  SUBCASE("explicit eigenvalues are honored") {
    auto cfg = bump_profile_config();
    cfg.family = "explicit";
    cfg.eigenvalues = {0.5, 0.25, 0.12, 0.06, 0.03};
    auto s = assemble(cfg);
    CHECK(s.space.dim() == 5);
    CHECK(s.space.eigenvalues[2] == 0.12);
  }

  SUBCASE("explicit coupling kind overrides the default") {
    auto cfg = bump_profile_config();
    cfg.kind = "synchronous";
    auto s = assemble(cfg);
    CHECK(s.coupling.kind == CouplingKind::Synchronous);
  }
}

TEST_CASE("assembly rejects inconsistent requests") {
  CHECK_THROWS_WITH_AS(
      [] {
        auto cfg = ou_norm_config();
        cfg.d = 0;
        return assemble(cfg);
      }(),
      Contains("space.d"), ConfigError);
  CHECK_THROWS_WITH_AS(
      [] {
        auto cfg = ou_norm_config();
        cfg.family = "weird";
        return assemble(cfg);
      }(),
      Contains("unknown space.family"), ConfigError);
  CHECK_THROWS_WITH_AS(
      [] {
        auto cfg = ou_norm_config();
        cfg.preset = "weird";
        return assemble(cfg);
      }(),
      Contains("unknown drift.preset"), ConfigError);
  CHECK_THROWS_WITH_AS(
      [] {
        auto cfg = ou_norm_config();
        cfg.mode = "weird";
        return assemble(cfg);
      }(),
      Contains("unknown analysis.mode"), ConfigError);
  CHECK_THROWS_WITH_AS(
      [] {
        auto cfg = bump_profile_config();
        cfg.mode = "norm";  // bump geometry has beta >= 0
        return assemble(cfg);
      }(),
      Contains("norm mode needs beta < 0"), ConfigError);
  CHECK_THROWS_WITH_AS(
      [] {
        auto cfg = ou_norm_config();
        cfg.kind = "switching";
        return assemble(cfg);
      }(),
      Contains("synchronous"), ConfigError);
  CHECK_THROWS_WITH_AS(
      [] {
        auto cfg = ou_norm_config();
        cfg.mode = "profile";  // OU geometry has beta < 0
        return assemble(cfg);
      }(),
      Contains("profile mode needs beta >= 0"), ConfigError);
  CHECK_THROWS_WITH_AS(
      [] {
        auto cfg = bump_profile_config();
        cfg.M = 1.0;
        return assemble(cfg);
      }(),
      Contains("drift.M"), ConfigError);
  CHECK_THROWS_WITH_AS(
      [] {
        auto cfg = bump_profile_config();
        cfg.family = "explicit";  // no eigenvalues supplied
        return assemble(cfg);
      }(),
      Contains("space.eigenvalues"), ConfigError);
  CHECK_THROWS_WITH_AS(
      [] {
        auto cfg = bump_profile_config();
        cfg.x0.assign(2, 1.0);  // wrong length
        return assemble(cfg);
      }(),
      Contains("ensemble.x0"), ConfigError);
  CHECK_THROWS_WITH_AS(
      [] {
        auto cfg = ou_norm_config();
        cfg.trajectories = 1;
        return run_contraction_experiment(cfg);
      }(),
      Contains("trajectories"), ConfigError);
  CHECK_THROWS_WITH_AS(
      [] {
        auto cfg = ou_norm_config();
        cfg.window_lo = 0.9;
        cfg.window_hi = 0.2;
        return run_contraction_experiment(cfg);
      }(),
      Contains("window"), ConfigError);
}

TEST_CASE("norm-mode contraction run satisfies its own pass rule") {
  auto cfg = ou_norm_config();
  auto oc = run_contraction_experiment(cfg);
  CHECK(oc.statistic == "r");
  CHECK(oc.pathwise_fraction == 1.0);
  CHECK(oc.pass);
  CHECK(oc.decay.c_hat >= oc.c_theory - 2.0 * oc.decay.se - oc.dt_bias);
  CHECK(oc.t.front() == 0.0);
  CHECK(oc.t.back() == doctest::Approx(cfg.T).epsilon(1e-9));
  // separation actually shrank over the run
  CHECK(oc.sep.mean.back() < oc.sep.mean.front());
}

TEST_CASE("contraction outcomes replay bit-for-bit") {
  auto cfg = bump_profile_config();
  cfg.trajectories = 8;
  cfg.T = 1.0;
  auto a = run_contraction_experiment(cfg);
  auto b = run_contraction_experiment(cfg);
  REQUIRE(a.t.size() == b.t.size());
  CHECK(a.decay.c_hat == b.decay.c_hat);
  CHECK(a.decay.se == b.decay.se);
  for (size_t j = 0; j < a.t.size(); ++j) {
    CHECK(a.stat.mean[j] == b.stat.mean[j]);
    CHECK(a.sep.mean[j] == b.sep.mean[j]);
  }
  std::ostringstream csv_a, csv_b;
  write_series_csv(a, csv_a);
  write_series_csv(b, csv_b);
  CHECK(csv_a.str() == csv_b.str());
  CHECK(csv_a.str().rfind("t,stat_mean,stat_se,r_mean,r_se,coalesced_frac\n",
                          0) == 0);

  // a different seed genuinely changes the ensemble
  auto cfg2 = cfg;
  cfg2.seed = 2;
  auto c = run_contraction_experiment(cfg2);
  CHECK(a.decay.c_hat != c.decay.c_hat);
}

TEST_CASE("final-state moments expose per-coordinate statistics") {
  auto cfg = bump_profile_config();
  cfg.trajectories = 12;
  cfg.T = 1.0;
  auto mm = final_state_moments(cfg);
  REQUIRE(int(mm.coord.size()) == cfg.d);
  REQUIRE(int(mm.first_coord.size()) == cfg.trajectories);
  double mean0 = 0;
  for (double v : mm.first_coord) mean0 += v;
  mean0 /= double(mm.first_coord.size());
  CHECK(mm.coord[0].mean == doctest::Approx(mean0).epsilon(1e-14));
  for (const auto& m : mm.coord) CHECK(m.se_mean >= 0.0);
}

TEST_CASE("dimension sweep pins the rate and compares ensembles") {
  SUBCASE("profile mode: identical c_theory across truncations") {
    auto cfg = bump_profile_config();
    auto sw = run_dimension_sweep(cfg, {6, 10});
    REQUIRE(sw.dims.size() == 2);
    CHECK(sw.c_theory[0] == sw.c_theory[1]);  // exact double equality
    CHECK(sw.c_theory_identical);
    CHECK(sw.rates_consistent);
    CHECK(sw.runs[0].t.size() == sw.runs[1].t.size());
  }

  SUBCASE("lyapunov mode: family-limit trace keeps the fit dimension-free") {
    auto cfg = bump_profile_config();
    cfg.mode = "lyapunov";
    cfg.trajectories = 10;
    cfg.T = 2.0;
    auto sw = run_dimension_sweep(cfg, {6, 8});
    CHECK(sw.c_theory[0] == sw.c_theory[1]);
    CHECK(sw.c_theory_identical);
  }

  SUBCASE("explicit family and empty dimension lists are rejected") {
    auto cfg = bump_profile_config();
    CHECK_THROWS_WITH_AS(run_dimension_sweep(cfg, {}), Contains("at least one"),
                         ConfigError);
    cfg.family = "explicit";
    cfg.eigenvalues = {0.5, 0.25};
    CHECK_THROWS_WITH_AS(run_dimension_sweep(cfg, {2, 4}),
                         Contains("parametric family"), ConfigError);
  }
}

TEST_CASE("json reports serialize the run and parse back") {
  auto cfg = bump_profile_config();
  cfg.trajectories = 6;
  cfg.T = 1.0;
  auto setup = assemble(cfg);
  auto oc = run_contraction_experiment(cfg, setup);

  const std::string rates = rate_report_json(cfg, setup);
  CHECK(rates.find("\"c_theory\"") != std::string::npos);
  CHECK(rates.find("\"alpha\"") != std::string::npos);
  CHECK(rates.find("\"statistic\"") != std::string::npos);

  const std::string report = outcome_json(cfg, setup, oc);
  CHECK(report.find("\"c_hat\"") != std::string::npos);
  CHECK(report.find("\"pass\"") != std::string::npos);
  CHECK(report.find("\"trajectories\"") != std::string::npos);

  auto sw = run_dimension_sweep(cfg, {6, 8});
  const std::string sweep = sweep_json(sw);
  CHECK(sweep.find("\"c_theory_identical\"") != std::string::npos);
  CHECK(sweep.find("\"dims\"") != std::string::npos);
}
