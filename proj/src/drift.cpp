#include "couplab/drift.hpp"

#include <cmath>
#include <stdexcept>

#include "couplab/rng.hpp"

namespace couplab {

PotentialSpec ou_potential(double a) {
  if (!(a >= 0)) throw std::invalid_argument("ou_potential: need a >= 0");
  PotentialSpec pot;
  pot.a = a;
  pot.L = 0;
  pot.growth = GrowthBound{0.0, 0.0};
  return pot;
}

PotentialSpec gaussian_bump_potential(double a, double c1, double sigma,
                                      const Vec& center) {
  if (!(a >= 0) || !(c1 > 0) || !(sigma > 0))
    throw std::invalid_argument("gaussian_bump_potential: bad parameters");
  PotentialSpec pot;
  pot.a = a;
  const double s2 = sigma * sigma;
  Vec x0 = center;
  pot.grad_m = [c1, s2, x0](const Vec& x) -> Vec {
    Vec u = x0.size() == x.size() ? Vec(x - x0) : x;
    return (c1 / s2) * std::exp(-u.squaredNorm() / (2.0 * s2)) * u;
  };
  pot.L = c1 / s2;
  pot.growth = GrowthBound{c1 / (sigma * std::sqrt(std::exp(1.0))), 0.0};
  return pot;
}

namespace {

// Tight constants for a purely linear drift b = -a G x.
std::optional<LipschitzConstants> linear_constants(const SpectralSpace& sp,
                                                   double a) {
  const int n = sp.split_index, d = sp.dim();
  const double lam_hi = n < d ? sp.eigenvalues.segment(n, d - n).maxCoeff() : 0.0;
  LipschitzConstants lip{0.0, a * lam_hi, a * sp.eigenvalues.head(n).maxCoeff(),
                         0.0};
  if (lip.H_h >= 1) return std::nullopt;
  return lip;
}

// Splitting constants (1/2, 1/2, L, L), valid when lambda_{n+1} < 1/(2L).
std::optional<LipschitzConstants> splitting_constants(const SpectralSpace& sp,
                                                      double L) {
  const int n = sp.split_index, d = sp.dim();
  const double lam_next = n < d ? sp.eigenvalues.segment(n, d - n).maxCoeff() : 0.0;
  if (L <= 0 || !(lam_next < 1.0 / (2.0 * L))) return std::nullopt;
  return LipschitzConstants{0.5, 0.5, L, L};
}

}  // namespace

DriftModel preconditioned_gradient_drift(const SpectralSpace& sp,
                                         const PotentialSpec& pot) {
  DriftModel m;
  m.name = pot.grad_m ? "preconditioned_gradient" : "ou";
  const Vec lam = sp.eigenvalues;
  const double a = pot.a;
  if (pot.grad_m) {
    auto grad = pot.grad_m;
    m.b = [lam, a, grad](const Vec& x) -> Vec {
      return (-lam.array() * (a * x + grad(x)).array()).matrix();
    };
    m.declared = splitting_constants(sp, pot.L);
  } else {
    m.b = [lam, a](const Vec& x) -> Vec {
      return (-a * lam.array() * x.array()).matrix();
    };
    m.declared = linear_constants(sp, a);
  }
  m.growth = pot.growth;
  return m;
}

PathPotential tps_quadratic_potential(double a) {
  PathPotential pp;
  pp.a = a;
  pp.W1 = [a](double u) { return a * u; };
  pp.W2 = [a](double) { return a; };
  pp.W3 = [](double) { return 0.0; };
  pp.W4 = [](double) { return 0.0; };
  pp.L_m = 0;
  pp.growth = GrowthBound{0.0, 0.0};
  return pp;
}

PathPotential tps_doublewell_potential(double a, double c1, double sigma) {
  if (!(a >= 0) || !(c1 > 0) || !(sigma > 0))
    throw std::invalid_argument("tps_doublewell_potential: bad parameters");
  PathPotential pp;
  pp.a = a;
  const double s2 = sigma * sigma;
  auto E = [s2](double u) { return std::exp(-u * u / (2.0 * s2)); };
  auto H1 = [c1, s2, E](double u) { return c1 * u / s2 * E(u); };
  auto H2 = [c1, s2, E](double u) {
    return c1 / s2 * (1.0 - u * u / s2) * E(u);
  };
  auto H3 = [c1, s2, E](double u) {
    return c1 * u / (s2 * s2) * (u * u / s2 - 3.0) * E(u);
  };
  auto H4 = [c1, s2, E](double u) {
    const double q = u * u / s2;
    return c1 / (s2 * s2) * (6.0 * q - q * q - 3.0) * E(u);
  };
  pp.W1 = [a, H1](double u) { return a * u + H1(u); };
  pp.W2 = [a, H2](double u) { return a + H2(u); };
  pp.W3 = H3;
  pp.W4 = H4;

  // scan for the sups of the non-quadratic part of (1/2) Phi' and its slope;
  // every term decays like a Gaussian, so a wide finite scan suffices
  const double U = std::max(6.0, 12.0 * sigma);
  const int N = 40001;
  double sup_psi = 0, sup_dpsi = 0;
  for (int i = 0; i < N; ++i) {
    const double u = -U + 2.0 * U * i / (N - 1);
    const double psi =
        a * (H1(u) + u * H2(u)) + H1(u) * H2(u) + 0.5 * H3(u);
    const double dpsi = 2.0 * a * H2(u) + H2(u) * H2(u) + a * u * H3(u) +
                        H1(u) * H3(u) + 0.5 * H4(u);
    sup_psi = std::max(sup_psi, std::abs(psi));
    sup_dpsi = std::max(sup_dpsi, std::abs(dpsi));
  }
  pp.L_m = 1.001 * sup_dpsi;
  pp.growth = GrowthBound{1.001 * sup_psi, 0.0};
  return pp;
}

DriftModel tps_drift(const SpectralSpace& sp, const PathPotential& pp,
                     int quad_nodes) {
  const int d = sp.dim();
  for (int k = 0; k < d; ++k) {
    const double pk = M_PI * (k + 1);
    if (std::abs(sp.eigenvalues[k] * pk * pk - 1.0) > 1e-12)
      throw std::invalid_argument(
          "tps_drift: eigenvalues must be (pi k)^-2 (inverse Dirichlet "
          "Laplacian on [0,1])");
  }
  int Q = quad_nodes == 0 ? std::max(256, 8 * d) : quad_nodes;
  if (Q < 4 * d)
    throw std::invalid_argument("tps_drift: quadrature grid too coarse (need >= 4 d nodes)");

  // sine synthesis matrix and trapezoid weights on the uniform grid; the
  // interior-point sine sums are exactly orthogonal for modes below Q-1
  Eigen::MatrixXd syn(Q, d);
  Vec wq(Q);
  const double h = 1.0 / (Q - 1);
  for (int j = 0; j < Q; ++j) {
    const double s = j * h;
    wq[j] = (j == 0 || j == Q - 1) ? h / 2 : h;
    for (int k = 0; k < d; ++k)
      syn(j, k) = std::sqrt(2.0) * std::sin(M_PI * (k + 1) * s);
  }

  DriftModel m;
  m.name = "tps";
  const Vec lam = sp.eigenvalues;
  auto W1 = pp.W1, W2 = pp.W2, W3 = pp.W3;
  m.b = [syn, wq, lam, W1, W2, W3](const Vec& x) -> Vec {
    Vec path = syn * x;
    Vec w(path.size());
    for (int j = 0; j < path.size(); ++j) {
      const double u = path[j];
      w[j] = wq[j] * (W1(u) * W2(u) + 0.5 * W3(u));  // (1/2) Phi'(u) weighted
    }
    Vec grad = syn.transpose() * w;
    return (-lam.array() * grad.array()).matrix();
  };

  const double a_eff = pp.a * pp.a;
  if (pp.L_m == 0) {
    m.declared = linear_constants(sp, a_eff);
  } else {
    m.declared = splitting_constants(sp, std::max(1.0, pp.L_m));
  }
  m.growth = pp.growth;
  return m;
}

namespace {

// pair sampler shared by the claim checkers: base points alternate between
// covariance-G Gaussians and a uniform ball, separations span several scales
struct PairSampler {
  const SpectralSpace& sp;
  NoiseStream ns;
  int d;

  PairSampler(const SpectralSpace& sp_, uint64_t seed)
      : sp(sp_), ns(seed, 0x70616972u, 0), d(sp_.dim()) {}

  void draw(uint64_t i, Vec& x, Vec& y) {
    std::vector<double> buf(2 * d + 2);
    ns.normals(i, buf);
    x.resize(d);
    y.resize(d);
    for (int k = 0; k < d; ++k) x[k] = buf[k];
    if (i % 2 == 0) {
      for (int k = 0; k < d; ++k) x[k] *= std::sqrt(sp.eigenvalues[k]);
    } else {
      const double r = 5.0 * std::pow(ns.uniform(i, 1000), 1.0 / d);
      x *= r / x.norm();
    }
    const double scale = std::pow(10.0, -3.0 + 3.5 * ns.uniform(i, 1001));
    for (int k = 0; k < d; ++k) y[k] = x[k] + scale * buf[d + k];
  }
};

}  // namespace

BlockBoundReport check_block_bounds(const DriftModel& drift,
                                    const SpectralSpace& sp,
                                    const LipschitzConstants& claimed,
                                    int n_samples, uint64_t seed) {
  const auto geom = compute_geometry(claimed);
  const int n = sp.split_index;
  BlockBoundReport rep;
  PairSampler sampler(sp, seed);
  Vec x, y;
  for (int i = 0; i < n_samples; ++i) {
    sampler.draw(uint64_t(i), x, y);
    const Vec db = drift.b(x) - drift.b(y);
    const Vec dz = x - y;
    const double dl = low_norm(dz, n), dh = high_norm(dz, n);
    const double lhs_l = low_norm(db, n), lhs_h = high_norm(db, n);
    const double rhs_l = claimed.L_l * dl + claimed.L_h * dh;
    const double rhs_h = claimed.H_l * dl + claimed.H_h * dh;
    const double lhs_w = weighted_norm(db, n, geom.alpha);
    const double rhs_w =
        (1.0 + geom.beta) * dl + (1.0 - 1.0 / geom.alpha) * geom.alpha * dh;
    ++rep.samples;
    bool bad = false;
    if (rhs_l > 1e-300) {
      rep.max_ratio_low = std::max(rep.max_ratio_low, lhs_l / rhs_l);
      bad |= lhs_l > rhs_l * (1.0 + rep.tol);
    } else {
      bad |= lhs_l > 1e-300;
    }
    if (rhs_h > 1e-300) {
      rep.max_ratio_high = std::max(rep.max_ratio_high, lhs_h / rhs_h);
      bad |= lhs_h > rhs_h * (1.0 + rep.tol);
    } else {
      bad |= lhs_h > 1e-300;
    }
    if (rhs_w > 1e-300) {
      rep.max_ratio_weighted = std::max(rep.max_ratio_weighted, lhs_w / rhs_w);
      bad |= lhs_w > rhs_w * (1.0 + rep.tol);
    }
    if (bad) ++rep.violations;
  }
  return rep;
}

SectorReport check_sector_contraction(const DriftModel& drift,
                                      const SpectralSpace& sp,
                                      const WeightedGeometry& geom,
                                      int n_samples, uint64_t seed) {
  const int n = sp.split_index, d = sp.dim();
  if (n >= d)
    throw std::invalid_argument(
        "check_sector_contraction: empty high block, no sector pairs exist");
  SectorReport rep;
  rep.factor = 1.0 - 1.0 / (2.0 * geom.alpha);
  NoiseStream ns(seed, 0x73656374u, 0);
  std::vector<double> buf(2 * d);
  Vec x(d), dz(d);
  for (int i = 0; i < n_samples; ++i) {
    ns.normals(uint64_t(i), buf);
    for (int k = 0; k < d; ++k) {
      x[k] = buf[k] * std::sqrt(sp.eigenvalues[k]);
      dz[k] = k < n ? 0.0 : buf[d + k];
    }
    const double dh = dz.norm();
    // low separation capped by the sector constraint
    const double cap = 1.0 + geom.beta > 1e-12
                           ? 0.5 * dh / (1.0 + geom.beta)
                           : 10.0 * dh;
    const double frac = ns.uniform(uint64_t(i), 2000);
    Vec dl = Vec::Zero(d);
    double nl = 0;
    for (int k = 0; k < n; ++k) {
      dl[k] = buf[k];
      nl += buf[k] * buf[k];
    }
    nl = std::sqrt(nl);
    if (nl > 0) dl *= frac * cap / nl;
    dz += dl;
    const Vec y = x - dz;
    const double lhs = weighted_norm(drift.b(x) - drift.b(y), n, geom.alpha);
    const double rhs = rep.factor * weighted_norm(dz, n, geom.alpha);
    ++rep.samples;
    if (rhs > 1e-300) {
      rep.max_ratio = std::max(rep.max_ratio, lhs / rhs);
      if (lhs > rhs * (1.0 + rep.tol)) ++rep.violations;
    }
  }
  return rep;
}

LargeDistanceReport check_large_distance(const DriftModel& drift,
                                         const SpectralSpace& sp,
                                         const WeightedGeometry& geom,
                                         const LargeDistanceContract& contract,
                                         int n_samples, uint64_t seed) {
  const int n = sp.split_index, d = sp.dim();
  LargeDistanceReport rep;
  NoiseStream ns(seed, 0x6c646973u, 0);
  std::vector<double> buf(2 * d);
  Vec x(d), dz(d);
  for (int i = 0; i < n_samples; ++i) {
    ns.normals(uint64_t(i), buf);
    for (int k = 0; k < d; ++k) {
      x[k] = buf[k] * std::sqrt(sp.eigenvalues[k]);
      dz[k] = buf[d + k];
    }
    // push the separation to a weighted norm in [R, 4R]
    const double target =
        contract.R * (1.0 + 3.0 * ns.uniform(uint64_t(i), 3000));
    dz *= target / weighted_norm(dz, n, geom.alpha);
    const Vec y = x - dz;
    const double lhs = weighted_norm(drift.b(x) - drift.b(y), n, geom.alpha);
    const double rhs = contract.M * weighted_norm(dz, n, geom.alpha);
    ++rep.samples;
    rep.max_ratio = std::max(rep.max_ratio, lhs / rhs);
    if (lhs > rhs * (1.0 + rep.tol)) ++rep.violations;
  }
  return rep;
}

}  // namespace couplab
