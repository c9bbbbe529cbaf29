#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "couplab/config.hpp"
#include "couplab/coupling.hpp"
#include "couplab/distance.hpp"
#include "couplab/drift.hpp"
#include "couplab/estimate.hpp"
#include "couplab/lyapunov.hpp"
#include "couplab/spectral.hpp"

namespace couplab {

// Everything one contraction run needs, read from TOML sections
// [space], [drift], [analysis], [coupling], [ensemble], [output].
struct ExperimentConfig {
  // [space]
  std::string family = "brownian_bridge";  // brownian_bridge | geometric | explicit
  int d = 16;
  int n = 0;                        // 0: derive from the drift's Lipschitz bound
  double rho = 0.5;                 // geometric family ratio
  std::vector<double> eigenvalues;  // explicit family

  // [drift]
  std::string preset = "gaussian_bump";  // ou | gaussian_bump | tps_quadratic | tps_doublewell
  double a = 1.0;
  double c1 = 0.01;
  double sigma = 0.1;
  std::vector<double> center;  // bump center, defaults to the origin
  double M = 0.75, R = 1.0;    // declared large-distance contract
  int quad_nodes = 0;          // tps quadrature override

  // [analysis]
  std::string mode = "profile";  // norm | profile | lyapunov
  double eta = 0.95;
  int grid_size = 1024;
  std::optional<double> trace_override;  // family-limit trace for sweeps

  // [coupling]
  std::string kind;  // synchronous | switching; default depends on mode
  double dt = 1e-3, T = 10.0, delta = 0, merge_tol = 1e-9;
  int record_stride = 20;

  // [ensemble]
  int trajectories = 1000;
  uint64_t seed = 1;
  double window_lo = 0.2, window_hi = 0.8;  // decay-fit window, fractions of T
  double y0_low = 1.0, y0_high = 1.0;       // initial separation per block
  std::vector<double> x0, y0;               // explicit initial states

  // [output]
  std::string out_dir;
};

ExperimentConfig experiment_config_from(const ConfigMap& m);
ExperimentConfig load_experiment_config(const std::string& path);

// Assembled objects for one run. The three modes differ in which pieces are
// filled and which statistic decays at the theoretical rate:
//   norm:     beta < 0, synchronous coupling, statistic r = ||X-Y||_alpha,
//             c = min{1/alpha, -beta} with a pathwise (not just mean) bound.
//   profile:  beta >= 0, linear-tail profile at the declared contract radius,
//             statistic f(r), c from the profile rate report.
//   lyapunov: beta >= 0, drift condition fit -> R_S -> constant-tail profile,
//             statistic Q = f(r)(1 + eps V(X) + eps V(Y)).
struct ExperimentSetup {
  SpectralSpace space;
  WeightedGeometry geom;
  DriftModel drift;
  std::optional<DistanceProfile> profile;
  std::optional<RateReport> rate;
  std::optional<DriftConditionFit> fit;
  std::optional<LyapunovSpec> lyap;
  double c_theory = 0;
  double epsilon = 0;     // Lyapunov weight inside Q
  std::string statistic;  // "r" | "f" | "Q"
  Vec x0, y0;
  CouplingConfig coupling;
};

ExperimentSetup assemble(const ExperimentConfig& cfg);

struct ContractionOutcome {
  std::vector<double> t;
  SeriesStats stat;  // fitted statistic, per record time
  SeriesStats sep;   // plain weighted separation
  std::vector<double> coalesced_fraction;
  DecayEstimate decay;
  double c_theory = 0;
  double dt_bias = 0;             // discretization allowance in the pass rule
  double pathwise_fraction = -1;  // norm mode only: share of trajectories
                                  // obeying the pathwise envelope at every
                                  // record time (with a 10*dt slack factor)
  std::string statistic;
  bool pass = false;
};

// Pass rule: c_hat >= c_theory - 2 se - dt_bias; norm mode additionally
// requires pathwise_fraction == 1.
ContractionOutcome run_contraction_experiment(const ExperimentConfig& cfg);
ContractionOutcome run_contraction_experiment(const ExperimentConfig& cfg,
                                              const ExperimentSetup& setup);

// Per-coordinate moments of the time-T marginal X_T, plus raw samples of the
// first coordinate (for empirical W1 comparisons between couplings).
struct MarginalMoments {
  std::vector<MomentStats> coord;
  std::vector<double> first_coord;
};

MarginalMoments final_state_moments(const ExperimentConfig& cfg);

struct SweepOutcome {
  std::vector<int> dims;
  std::vector<double> c_theory, c_hat, se;
  bool c_theory_identical = true;  // exact equality across dimensions
  bool rates_consistent = true;    // pairwise |c_i - c_j| <= 3 combined se
  std::vector<ContractionOutcome> runs;
};

// Re-runs the base configuration at each truncation dimension. In lyapunov
// mode the drift-condition trace is pinned to the family limit so the target
// rate is dimension-free (brownian_bridge: 1/6; geometric: rho/(1-rho)).
SweepOutcome run_dimension_sweep(const ExperimentConfig& base,
                                 const std::vector<int>& dims);

void write_series_csv(const ContractionOutcome& oc, std::ostream& os);
void write_sweep_csv(const SweepOutcome& sw, std::ostream& os);

// JSON reports (serialized, deterministic key order).
std::string rate_report_json(const ExperimentConfig& cfg,
                             const ExperimentSetup& setup);
std::string outcome_json(const ExperimentConfig& cfg,
                         const ExperimentSetup& setup,
                         const ContractionOutcome& oc);
std::string sweep_json(const SweepOutcome& sw);

}  // namespace couplab
