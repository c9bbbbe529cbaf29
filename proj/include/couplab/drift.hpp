#pragma once

#include <functional>
#include <optional>
#include <string>

#include "couplab/spectral.hpp"

namespace couplab {

// ||grad m(x)|| <= b + c ||x|| with c < 1; feeds the closed-form quadratic
// Lyapunov fit.
struct GrowthBound {
  double b = 0, c = 0;
};

// ||b(x)-b(y)||_alpha <= M ||x-y||_alpha whenever ||x-y||_alpha >= R.
struct LargeDistanceContract {
  double M = 0.75, R = 1;
};

// Drift perturbation b of dX = (-X + b(X)) dt + sqrt(2) dW. Constants are
// declared claims, checked by sampling, not inferred from the callable.
struct DriftModel {
  std::string name;
  std::function<Vec(const Vec&)> b;
  std::optional<LipschitzConstants> declared;
  std::optional<LargeDistanceContract> large_distance;
  std::optional<GrowthBound> growth;
};

// U(x) = (a/2)||x||^2 + m(x); the drift is b = -G grad U.
struct PotentialSpec {
  double a = 1;
  std::function<Vec(const Vec&)> grad_m;  // empty means m == 0
  double L = 1;                           // Lipschitz bound of grad m
  std::optional<GrowthBound> growth;
};

PotentialSpec ou_potential(double a);
// m(x) = -c1 exp(-||x - center||^2 / (2 sigma^2)); grad m has Lipschitz
// constant c1/sigma^2 and sup norm c1/(sigma sqrt(e)).
PotentialSpec gaussian_bump_potential(double a, double c1, double sigma,
                                      const Vec& center = Vec());

DriftModel preconditioned_gradient_drift(const SpectralSpace& sp,
                                         const PotentialSpec& pot);

// Scalar-path transition-path potential U(x) = (1/2) int_0^1 Phi(x(s)) ds
// with Phi = (W')^2 + W''. The drift needs (1/2) Phi' = W'W'' + W'''/2, so
// derivative evaluators up to W''' are required (W'''' only for the declared
// Lipschitz bound of the non-quadratic part).
struct PathPotential {
  double a = 1;  // quadratic well coefficient; effective drift stiffness a^2
  std::function<double(double)> W1, W2, W3, W4;
  double L_m = 0;       // sup |(1/2) Phi'' - a^2|
  GrowthBound growth;   // pointwise |(1/2) Phi'(u) - a^2 u| <= b + c|u|
};

PathPotential tps_quadratic_potential(double a);
PathPotential tps_doublewell_potential(double a, double c1, double sigma);

// Spectral Galerkin drift on the sine basis of the Dirichlet Laplacian;
// requires lambda_k = (pi k)^-2. quad_nodes = 0 picks max(256, 8 d);
// fewer than 4 d nodes is rejected (sine products would alias).
DriftModel tps_drift(const SpectralSpace& sp, const PathPotential& pp,
                     int quad_nodes = 0);

// Sampled verification of declared block Lipschitz bounds, plus the combined
// weighted-norm consequence ||db||_a <= (1+beta)||dz^l|| + (1-1/a) a ||dz^h||.
struct BlockBoundReport {
  int samples = 0;
  int violations = 0;
  double max_ratio_low = 0;       // lhs/rhs maxima over sampled pairs
  double max_ratio_high = 0;
  double max_ratio_weighted = 0;
  double tol = 1e-10;
};

BlockBoundReport check_block_bounds(const DriftModel& drift,
                                    const SpectralSpace& sp,
                                    const LipschitzConstants& claimed,
                                    int n_samples, uint64_t seed);

// Pairs whose low-block separation obeys (1+beta)||dz^l|| <= ||dz^h||/2 must
// satisfy ||b(x)-b(y)||_alpha <= (1 - 1/(2 alpha)) ||x-y||_alpha.
struct SectorReport {
  int samples = 0;
  int violations = 0;
  double max_ratio = 0;
  double factor = 0;  // 1 - 1/(2 alpha)
  double tol = 1e-10;
};

SectorReport check_sector_contraction(const DriftModel& drift,
                                      const SpectralSpace& sp,
                                      const WeightedGeometry& geom,
                                      int n_samples, uint64_t seed);

// Sampled check of a large-distance contract on pairs with separation >= R.
struct LargeDistanceReport {
  int samples = 0;
  int violations = 0;
  double max_ratio = 0;
  double tol = 1e-10;
};

LargeDistanceReport check_large_distance(const DriftModel& drift,
                                         const SpectralSpace& sp,
                                         const WeightedGeometry& geom,
                                         const LargeDistanceContract& contract,
                                         int n_samples, uint64_t seed);

}  // namespace couplab
