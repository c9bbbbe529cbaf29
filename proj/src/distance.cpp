#include "couplab/distance.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace couplab {

namespace {

// Five-point Gauss-Lobatto rule on [0,1] (degree-7 exact) plus the prefix
// integrals P[j][i] = int_0^{x_j} l_i of the Lagrange basis, so cumulative
// integrals are available at interior nodes from the same five evaluations.
struct LobattoTable {
  double x[5];
  double w[5];
  double P[5][5];

  LobattoTable() {
    const double s = std::sqrt(3.0 / 7.0);
    x[0] = 0.0;
    x[1] = 0.5 * (1.0 - s);
    x[2] = 0.5;
    x[3] = 0.5 * (1.0 + s);
    x[4] = 1.0;
    w[0] = w[4] = 1.0 / 20.0;
    w[1] = w[3] = 49.0 / 180.0;
    w[2] = 16.0 / 45.0;
    for (int i = 0; i < 5; ++i) {
      // coefficients of the Lagrange basis polynomial l_i
      long double coef[6] = {1.0L, 0, 0, 0, 0, 0};
      int deg = 0;
      for (int k = 0; k < 5; ++k) {
        if (k == i) continue;
        long double inv = 1.0L / ((long double)x[i] - x[k]);
        long double next[6] = {0, 0, 0, 0, 0, 0};
        for (int c = 0; c <= deg; ++c) {
          next[c + 1] += coef[c] * inv;
          next[c] -= coef[c] * (long double)x[k] * inv;
        }
        ++deg;
        for (int c = 0; c <= deg; ++c) coef[c] = next[c];
      }
      for (int j = 0; j < 5; ++j) {
        long double v = 0;
        long double p = x[j];
        for (int c = 0; c <= 4; ++c) {
          v += coef[c] * p / (c + 1);
          p *= x[j];
        }
        P[j][i] = double(v);
      }
    }
  }
};

const LobattoTable kLob;

struct Exponent {
  double a;  // beta/(8 lambda_star), coefficient of s^2
  double b;  // 2 theta lambda_sup/lambda_star, coefficient of s
  double at(double s) const { return s * (a * s + b); }
  double slope(double s) const { return 2.0 * a * s + b; }
};

struct BuildResult {
  std::vector<double> Phi, J, f;
  double J_total = 0;
  double f_R = 0;
};

// Two passes over an exponent-graded cell subdivision of the node panels:
// pass 0 accumulates Phi = int phi and the rescaled J = int Phi e^{E - E_R},
// pass 1 re-runs the identical arithmetic and integrates f' = phi * g with
// g = 1 - J/(2 J_total). The e^{E - E_R} <= 1 rescale keeps stiff parameter
// sets inside double range; J stays a monotone sum so g lands in [1/2, 1].
BuildResult integrate_tables(const std::vector<double>& nodes,
                             const Exponent& E, double E_R, double de_max) {
  const int K = int(nodes.size());
  BuildResult out;
  out.Phi.assign(K, 0.0);
  out.J.assign(K, 0.0);
  out.f.assign(K, 0.0);

  for (int pass = 0; pass < 2; ++pass) {
    double Phi_cum = 0, J_cum = 0, f_cum = 0;
    for (int i = 0; i + 1 < K; ++i) {
      const double a = nodes[i], b = nodes[i + 1];
      const double dE = E.at(b) - E.at(a);
      const int m = std::max(2, int(std::ceil(dE / de_max)));
      const double h = (b - a) / m;
      for (int cell = 0; cell < m; ++cell) {
        const double u = a + cell * h;
        double phi_n[5], q_n[5], J_n[5];
        for (int j = 0; j < 5; ++j)
          phi_n[j] = std::exp(-E.at(u + kLob.x[j] * h));
        for (int j = 0; j < 5; ++j) {
          double pref = 0;
          for (int l = 0; l < 5; ++l) pref += kLob.P[j][l] * phi_n[l];
          const double Phi_j = Phi_cum + h * pref;
          q_n[j] = Phi_j * std::exp(E.at(u + kLob.x[j] * h) - E_R);
        }
        for (int j = 0; j < 5; ++j) {
          double pref = 0;
          for (int l = 0; l < 5; ++l) pref += kLob.P[j][l] * q_n[l];
          J_n[j] = J_cum + h * pref;
        }
        if (pass == 1) {
          double df = 0;
          for (int j = 0; j < 5; ++j) {
            double gj = 1.0 - 0.5 * J_n[j] / out.J_total;
            gj = std::min(1.0, std::max(0.5, gj));
            df += kLob.w[j] * phi_n[j] * gj;
          }
          f_cum += h * df;
        }
        double dPhi = 0, dJ = 0;
        for (int j = 0; j < 5; ++j) {
          dPhi += kLob.w[j] * phi_n[j];
          dJ += kLob.w[j] * q_n[j];
        }
        Phi_cum += h * dPhi;
        J_cum += h * dJ;
      }
      if (pass == 0) {
        out.Phi[i + 1] = Phi_cum;
        out.J[i + 1] = J_cum;
      } else {
        out.f[i + 1] = f_cum;
      }
    }
    if (pass == 0) out.J_total = J_cum;
    if (pass == 1) out.f_R = f_cum;
  }
  return out;
}

std::vector<double> chebyshev_nodes(double R, int K) {
  std::vector<double> r(K);
  for (int i = 0; i < K; ++i)
    r[i] = R * 0.5 * (1.0 - std::cos(M_PI * double(i) / double(K - 1)));
  r.front() = 0.0;
  r.back() = R;
  return r;
}

DistanceProfile build(ProfileVariant variant, double beta, double lambda_star,
                      double lambda_sup, double theta, double R,
                      const ProfileOptions& opts) {
  if (beta < 0)
    throw std::invalid_argument(
        "profile: beta < 0; use the synchronous weighted-norm route");
  if (!(lambda_star > 0))
    throw std::invalid_argument("profile: lambda_star must be positive");
  if (!(R > 0)) throw std::invalid_argument("profile: R must be positive");
  if (theta < 0) throw std::invalid_argument("profile: theta must be >= 0");
  if (lambda_sup < lambda_star)
    throw std::invalid_argument("profile: lambda_sup must be >= lambda_star");
  if (opts.grid_size < 16)
    throw std::invalid_argument("profile: grid_size must be >= 16");

  const Exponent E{beta / (8.0 * lambda_star),
                   variant == ProfileVariant::ConstantTail
                       ? 2.0 * theta * lambda_sup / lambda_star
                       : 0.0};
  const double E_R = E.at(R);
  if (E_R > 1e5)
    throw std::invalid_argument(
        "profile: exponent at R exceeds 1e5; profile is numerically "
        "degenerate for these parameters");

  const auto nodes = chebyshev_nodes(R, opts.grid_size);
  BuildResult res = integrate_tables(nodes, E, E_R, 0.02);
  if (opts.convergence_check) {
    BuildResult fine = integrate_tables(nodes, E, E_R, 0.01);
    const double dJ = std::abs(fine.J_total - res.J_total) / fine.J_total;
    const double df = std::abs(fine.f_R - res.f_R) / fine.f_R;
    if (dJ > opts.convergence_tol || df > opts.convergence_tol)
      throw std::runtime_error("profile quadrature did not converge");
  }

  DistanceProfile p;
  p.variant = variant;
  p.R = R;
  p.beta = beta;
  p.lambda_star = lambda_star;
  p.theta = variant == ProfileVariant::ConstantTail ? theta : 0.0;
  p.lambda_sup =
      variant == ProfileVariant::ConstantTail ? lambda_sup : lambda_star;
  p.log_gamma = -(E_R + std::log(res.J_total));
  p.gamma = std::exp(p.log_gamma);

  const int K = opts.grid_size;
  p.r = nodes;
  p.Phi = std::move(res.Phi);
  p.f = std::move(res.f);
  p.g.resize(K);
  p.fprime.resize(K);
  p.fsecond.resize(K);
  const double scale = std::exp(-E_R);  // may underflow; the g ratio cannot
  for (int i = 0; i < K; ++i) {
    p.g[i] = 1.0 - 0.5 * (res.J[i] / res.J_total);
    const double phi_i = std::exp(-E.at(p.r[i]));
    p.fprime[i] = phi_i * p.g[i];
    const double gamma_Phi = scale * (p.Phi[i] / res.J_total);
    p.fsecond[i] = -E.slope(p.r[i]) * p.fprime[i] - 0.5 * gamma_Phi;
  }
  p.tail_slope = variant == ProfileVariant::LinearTail ? p.fprime.back() : 0.0;
  return p;
}

// cubic Hermite on the tabulation panel containing s
int panel_of(const std::vector<double>& xs, double s) {
  const auto it = std::upper_bound(xs.begin(), xs.end(), s);
  int i = int(it - xs.begin()) - 1;
  return std::max(0, std::min(i, int(xs.size()) - 2));
}

double hermite(const std::vector<double>& xs, const std::vector<double>& ys,
               const std::vector<double>& dys, double s) {
  const int i = panel_of(xs, s);
  const double h = xs[i + 1] - xs[i];
  const double t = (s - xs[i]) / h;
  const double t2 = t * t, t3 = t2 * t;
  return ys[i] * (2 * t3 - 3 * t2 + 1) + dys[i] * h * (t3 - 2 * t2 + t) +
         ys[i + 1] * (-2 * t3 + 3 * t2) + dys[i + 1] * h * (t3 - t2);
}

}  // namespace

DistanceProfile build_profile_linear_tail(double beta, double lambda_star,
                                          double R,
                                          const ProfileOptions& opts) {
  return build(ProfileVariant::LinearTail, beta, lambda_star, lambda_star, 0.0,
               R, opts);
}

DistanceProfile build_profile_constant_tail(double beta, double lambda_star,
                                            double lambda_sup, double theta,
                                            double R,
                                            const ProfileOptions& opts) {
  return build(ProfileVariant::ConstantTail, beta, lambda_star, lambda_sup,
               theta, R, opts);
}

double DistanceProfile::exponent(double s) const {
  s = std::min(s, R);
  const double a = beta / (8.0 * lambda_star);
  const double b = variant == ProfileVariant::ConstantTail
                       ? 2.0 * theta * lambda_sup / lambda_star
                       : 0.0;
  return s * (a * s + b);
}

double DistanceProfile::exponent_slope(double s) const {
  const double a = beta / (8.0 * lambda_star);
  const double b = variant == ProfileVariant::ConstantTail
                       ? 2.0 * theta * lambda_sup / lambda_star
                       : 0.0;
  return 2.0 * a * s + b;
}

double DistanceProfile::phi(double s) const { return std::exp(-exponent(s)); }

double DistanceProfile::phi_R() const { return std::exp(-exponent(R)); }

double DistanceProfile::eval_f(double s) const {
  if (s <= 0) return 0.0;
  if (s >= R) return f.back() + (s - R) * tail_slope;
  return hermite(r, f, fprime, s);
}

double DistanceProfile::eval_fprime(double s) const {
  if (s <= 0) return 1.0;
  if (s >= R)
    return variant == ProfileVariant::LinearTail
               ? tail_slope
               : (s == R ? fprime.back() : 0.0);
  return hermite(r, fprime, fsecond, s);
}

double DistanceProfile::eval_Phi(double s) const {
  if (s <= 0) return 0.0;
  if (s >= R) {
    if (variant == ProfileVariant::ConstantTail) return Phi.back();
    return Phi.back() + (s - R) * phi_R();
  }
  const int i = panel_of(r, s);
  const double h = r[i + 1] - r[i];
  const double t = (s - r[i]) / h;
  const double t2 = t * t, t3 = t2 * t;
  return Phi[i] * (2 * t3 - 3 * t2 + 1) + phi(r[i]) * h * (t3 - 2 * t2 + t) +
         Phi[i + 1] * (-2 * t3 + 3 * t2) + phi(r[i + 1]) * h * (t3 - t2);
}

double DistanceProfile::band(double s) const {
  if (s <= 0) return 1.0;
  if (s >= R) return 0.5;
  const int i = panel_of(r, s);
  const double t = (s - r[i]) / (r[i + 1] - r[i]);
  return g[i] + t * (g[i + 1] - g[i]);
}

RateReport rate_linear_tail(const DistanceProfile& p, double M, double alpha) {
  if (p.variant != ProfileVariant::LinearTail)
    throw std::invalid_argument("rate_linear_tail: wrong profile variant");
  if (!(M >= 0) || !(M < 1))
    throw std::invalid_argument("rate_linear_tail: need 0 <= M < 1");
  if (!(alpha >= 1))
    throw std::invalid_argument("rate_linear_tail: need alpha >= 1");
  RateReport rep;
  rep.variant = p.variant;
  rep.M = M;
  rep.alpha = alpha;
  const double fpR = p.fprime.back();
  rep.comp_large = fpR * (1.0 - M);
  rep.comp_sector = fpR / (2.0 * alpha);
  rep.comp_gamma = 2.0 * p.lambda_star * p.gamma;
  rep.c = std::min({rep.comp_large, rep.comp_sector, rep.comp_gamma});
  if (p.beta > 0)
    rep.lower_bound =
        0.5 * p.phi_R() * std::min({p.beta, 1.0 - M, 1.0 / (2.0 * alpha)});
  rep.log_phi_R = -p.exponent(p.R);
  rep.log_gamma = p.log_gamma;
  return rep;
}

RateReport rate_constant_tail(const DistanceProfile& p, double alpha, double C,
                              double eta) {
  if (p.variant != ProfileVariant::ConstantTail)
    throw std::invalid_argument("rate_constant_tail: wrong profile variant");
  if (!(alpha >= 1))
    throw std::invalid_argument("rate_constant_tail: need alpha >= 1");
  if (!(C > 0) || !(eta > 0))
    throw std::invalid_argument("rate_constant_tail: need C, eta > 0");
  RateReport rep;
  rep.variant = p.variant;
  rep.alpha = alpha;
  rep.C = C;
  rep.eta = eta;
  rep.comp_gamma = p.lambda_star * p.gamma;
  rep.comp_sector = p.phi_R() / (8.0 * alpha);
  rep.comp_eta = 0.5 * eta;
  rep.c = std::min({rep.comp_gamma, rep.comp_sector, rep.comp_eta});
  rep.epsilon = std::min(rep.comp_gamma, rep.comp_sector) / (2.0 * C);
  rep.lower_bound =
      0.5 * std::min(p.phi_R() * std::min(0.5 * p.beta, 0.25 / alpha), eta);
  rep.log_phi_R = -p.exponent(p.R);
  rep.log_gamma = p.log_gamma;
  return rep;
}

DecayEnvelopes envelopes(const DistanceProfile& p, const RateReport& rate) {
  DecayEnvelopes e;
  e.c = rate.c;
  e.alpha = rate.alpha;
  e.beta = p.beta;
  e.lambda_star = p.lambda_star;
  e.theta = p.theta;
  e.lambda_sup = p.lambda_sup;
  e.R = p.R;
  e.epsilon = rate.epsilon;
  e.C = rate.C;
  e.eta = rate.eta;
  e.w1_prefactor =
      4.0 * rate.alpha * std::exp(p.beta * p.R * p.R / (8.0 * p.lambda_star));
  e.gradient_prefactor = std::sqrt(2.0) * rate.alpha;
  return e;
}

double DecayEnvelopes::semimetric_equivalence(double K) const {
  const double ex = std::exp(beta / (8.0 * lambda_star) +
                             2.0 * theta * lambda_sup / lambda_star);
  const double denom = epsilon * std::min(1.0, R);
  return 2.0 * ex * std::max(1.0, K / denom);
}

double DecayEnvelopes::averaging_bias(double t, double V_x) const {
  if (!(t > 0)) throw std::invalid_argument("averaging_bias: need t > 0");
  const double shape = -std::expm1(-c * t) / (c * t);
  return shape * R * (1.0 + epsilon * V_x + epsilon * C / eta);
}

double DecayEnvelopes::averaging_variance(double t, double V_x, double C_star,
                                          double eta_star) const {
  if (!(t > 0)) throw std::invalid_argument("averaging_variance: need t > 0");
  return (3.0 * R * R / (c * t)) *
         (1.0 + 2.0 * epsilon * epsilon *
                    (C_star / eta_star + std::exp(-eta_star * t) * V_x * V_x));
}

double profile_distance(const DistanceProfile& p, const Vec& x, const Vec& y,
                        const SpectralSpace& sp, const WeightedGeometry& geom) {
  return p.eval_f(weighted_norm(x - y, sp, geom));
}

double profile_distance_lyapunov(const DistanceProfile& p, const Vec& x,
                                 const Vec& y, const SpectralSpace& sp,
                                 const WeightedGeometry& geom, double epsilon) {
  const double Vx = 1.0 + x.squaredNorm();
  const double Vy = 1.0 + y.squaredNorm();
  return p.eval_f(weighted_norm(x - y, sp, geom)) *
         (1.0 + epsilon * Vx + epsilon * Vy);
}

void write_profile_csv(const DistanceProfile& p, std::ostream& os) {
  os << "r,f,fprime,fsecond\n";
  char buf[160];
  for (size_t i = 0; i < p.r.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g\n", p.r[i],
                  p.f[i], p.fprime[i], p.fsecond[i]);
    os << buf;
  }
}

}  // namespace couplab
