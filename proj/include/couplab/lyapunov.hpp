#pragma once

#include <cstdint>
#include <optional>

#include "couplab/drift.hpp"
#include "couplab/spectral.hpp"

namespace couplab {

// Drift condition L V <= C - eta V for the quadratic function V = 1+||x||^2,
// together with the derived quantities used by the Lyapunov-weighted rate:
// theta bounds ||DV||/V (exactly 1 for quadratic V) and R_S is the diameter
// in the weighted norm of the sublevel set {V(x)+V(y) < 8C/eta}.
struct LyapunovSpec {
  double C = 1;
  double eta = 1;
  double theta = 1;
  double R_S = 1;
};

inline double quadratic_V(const Vec& x) { return 1.0 + x.squaredNorm(); }

// L V(x) = 2 <x, -x + b(x)> + sum_k lambda_k for the simulated truncation.
double generator_quadratic_V(const Vec& x, const DriftModel& drift,
                             const SpectralSpace& sp);

struct DriftConditionFit {
  double C = 0;
  double eta = 0;
  std::optional<double> C_closed_form;  // present when growth bounds declared
  double C_sampled = 0;
  double worst_value = 0;  // max of LV + eta V over the sample set
};

struct FitOptions {
  uint64_t seed = 1;
  int gaussians = 512;
  int shells = 21;
  int directions = 8;
  double r_max = 10.0;
  std::optional<double> trace_override;  // family limit instead of truncation
};

// C for a target eta: closed form eta + trace + b^2/(2(1-c)-eta) when the
// drift carries growth bounds (requires eta < 1-c), otherwise the sampled
// maximum of LV + eta V (floored at 1e-8).
DriftConditionFit fit_drift_constants(const DriftModel& drift,
                                      const SpectralSpace& sp, double eta,
                                      const FitOptions& opts = {});

// theta = 1 and R_S = sqrt(2 (1+alpha^2) (8C/eta - 2)); needs 8C/eta > 2.
LyapunovSpec derived_quantities(double C, double eta,
                                const WeightedGeometry& geom);

struct GeneratorCheck {
  double estimate = 0;
  double closed_form = 0;
  double std_error = 0;
};

// Monte Carlo difference quotient E[V(X_h) - V(x)]/h after one Euler step
// from x, against the closed-form generator.
GeneratorCheck mc_generator_check(const DriftModel& drift,
                                  const SpectralSpace& sp, const Vec& x,
                                  double h, int n_samples, uint64_t seed);

}  // namespace couplab
