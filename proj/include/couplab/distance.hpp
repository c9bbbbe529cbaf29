#pragma once

#include <optional>
#include <ostream>
#include <vector>

#include "couplab/spectral.hpp"

namespace couplab {

// Concave distance-shaping function f tabulated on [0, R].
//
// Both variants share the skeleton f(r) = int_0^r phi(s ^ R) g(s ^ R) ds with
// phi(s) = exp(-E(s)) and g running from 1 at 0 down to exactly 1/2 at R:
//   LinearTail:   E(s) = beta s^2 / (8 lambda_star); f continues linearly
//                 beyond R with slope phi(R)/2.
//   ConstantTail: E(s) = beta s^2/(8 lambda_star) + 2 theta (lambda_sup/
//                 lambda_star) s; f is frozen at f(R) beyond R (kink at R).
// gamma normalizes the inner integral int_0^R Phi/phi; it sets the curvature
// so that 4 lambda_star f'' = -4 lambda_star E' f' - 2 lambda_star gamma Phi.
enum class ProfileVariant { LinearTail, ConstantTail };

struct ProfileOptions {
  int grid_size = 1024;       // tabulation nodes on [0, R], Chebyshev-spaced
  bool convergence_check = true;
  double convergence_tol = 1e-10;
};

struct DistanceProfile {
  ProfileVariant variant = ProfileVariant::LinearTail;
  double R = 1, beta = 0, lambda_star = 1;
  double theta = 0, lambda_sup = 1;

  double gamma = 0;       // may underflow to 0 for stiff parameters
  double log_gamma = 0;   // always finite
  double tail_slope = 0;  // slope of f beyond R (0 for ConstantTail)

  std::vector<double> r, Phi, f, g, fprime, fsecond;  // node tables

  double exponent(double s) const;        // E(min(s,R))
  double exponent_slope(double s) const;  // E'(s)
  double phi(double s) const;             // exp(-E(min(s,R)))
  double phi_R() const;

  double eval_f(double s) const;
  double eval_fprime(double s) const;  // left-derivative at the kink
  double eval_Phi(double s) const;
  double band(double s) const;  // f'(s)/phi(s); in [1/2, 1] by construction
  double f_R() const { return f.back(); }
};

DistanceProfile build_profile_linear_tail(double beta, double lambda_star,
                                          double R,
                                          const ProfileOptions& opts = {});
DistanceProfile build_profile_constant_tail(double beta, double lambda_star,
                                            double lambda_sup, double theta,
                                            double R,
                                            const ProfileOptions& opts = {});

// Contraction rate assembled from a profile plus the coupling geometry.
// LinearTail:   c = min{ f'(R)(1-M), f'(R)/(2 alpha), 2 lambda_star gamma }
// ConstantTail: c = min{ lambda_star gamma, phi(R)/(8 alpha), eta/2 } and
//               epsilon = min{first two}/(2C) weights the Lyapunov term.
struct RateReport {
  ProfileVariant variant = ProfileVariant::LinearTail;
  double c = 0;
  double comp_large = 0;   // f'(R)(1-M)              [LinearTail]
  double comp_sector = 0;  // f'(R)/(2a) or phi(R)/(8a)
  double comp_gamma = 0;   // 2 l* gamma or l* gamma
  double comp_eta = 0;     // eta/2                    [ConstantTail]
  std::optional<double> lower_bound;  // closed form, defined for beta > 0
  double epsilon = 0;      // Lyapunov weight          [ConstantTail]
  double M = 0, alpha = 1, C = 0, eta = 0;
  double log_phi_R = 0, log_gamma = 0;  // diagnostics for underflowed rates
};

RateReport rate_linear_tail(const DistanceProfile& p, double M, double alpha);
RateReport rate_constant_tail(const DistanceProfile& p, double alpha, double C,
                              double eta);

// Exponential-decay envelopes implied by a rate report, normalized per unit
// Lipschitz seminorm of the observable where one is involved.
struct DecayEnvelopes {
  double c = 0;
  double alpha = 1, beta = 0, lambda_star = 1, theta = 0, lambda_sup = 1, R = 1;
  double epsilon = 0, C = 0, eta = 0;

  double w1_prefactor = 0;        // 4 alpha exp(beta R^2/(8 l*)); may be inf
  double gradient_prefactor = 0;  // sqrt(2) alpha

  // ConstantTail extras:
  double semimetric_equivalence(double K) const;
  double averaging_bias(double t, double V_x) const;
  double averaging_variance(double t, double V_x, double C_star,
                            double eta_star) const;
};

DecayEnvelopes envelopes(const DistanceProfile& p, const RateReport& rate);

// f(||x-y||_alpha), optionally weighted by the quadratic Lyapunov envelope
// (1 + eps V(x) + eps V(y)) with V = 1 + ||.||^2.
double profile_distance(const DistanceProfile& p, const Vec& x, const Vec& y,
                        const SpectralSpace& sp, const WeightedGeometry& geom);
double profile_distance_lyapunov(const DistanceProfile& p, const Vec& x,
                                 const Vec& y, const SpectralSpace& sp,
                                 const WeightedGeometry& geom, double epsilon);

void write_profile_csv(const DistanceProfile& p, std::ostream& os);

}  // namespace couplab
