#include "couplab/coupling.hpp"

#include <cmath>
#include <stdexcept>

#include "couplab/lyapunov.hpp"

namespace couplab {

namespace {

// linear ramp clamped to [0,1]
double ramp(double v, double lo, double hi) {
  if (v <= lo) return 0.0;
  if (v >= hi) return 1.0;
  return (v - lo) / (hi - lo);
}

}  // namespace

MixingWeights rc_mixing(const Vec& z, const SpectralSpace& sp,
                        const WeightedGeometry& geom, double delta) {
  if (!(delta > 0)) throw std::invalid_argument("rc_mixing: need delta > 0");
  const int n = sp.split_index;
  const double nl = low_norm(z, n), nh = high_norm(z, n);
  const double r = nl + geom.alpha * nh;
  // sector part: 1 when 2(beta+1)||z^l|| >= ||z^h||, 0 when 4(beta+1)||z^l||
  // <= ||z^h||; expressed through rho = ||z^h|| / ((beta+1)||z^l||)
  double h1;
  if (nl <= 0.0) {
    h1 = 0.0;
  } else {
    const double rho = nh / ((1.0 + geom.beta) * nl);
    h1 = ramp(4.0 - rho, 0.0, 2.0);
  }
  const double h2 = ramp(r, 0.5 * delta, delta);
  MixingWeights w;
  w.rc = h1 * h2;
  w.sc = std::sqrt(std::max(0.0, 1.0 - w.rc * w.rc));
  return w;
}

Vec reflection_direction(const Vec& z, const SpectralSpace& sp) {
  const int n = sp.split_index;
  Vec e = Vec::Zero(z.size());
  double nrm2 = 0;
  for (int k = 0; k < n; ++k) {
    e[k] = z[k] / std::sqrt(sp.eigenvalues[k]);
    nrm2 += e[k] * e[k];
  }
  if (nrm2 <= 0.0) {
    e.setZero();
    e[0] = 1.0;
    return e;
  }
  e.head(n) /= std::sqrt(nrm2);
  return e;
}

Vec reflected_low_noise(const Vec& w1, const Vec& e, const SpectralSpace& sp) {
  const int n = sp.split_index;
  Vec out = w1;
  Vec v = Vec::Zero(n);
  double edotv = 0;
  for (int k = 0; k < n; ++k) {
    v[k] = w1[k] / std::sqrt(sp.eigenvalues[k]);
    edotv += e[k] * v[k];
  }
  for (int k = 0; k < n; ++k)
    out[k] = std::sqrt(sp.eigenvalues[k]) * (v[k] - 2.0 * edotv * e[k]);
  return out;
}

namespace {

const double kSqrt2 = std::sqrt(2.0);

void check_finite(const CouplingState& st, uint64_t step) {
  if (!st.X.allFinite() || !st.Y.allFinite())
    throw std::runtime_error("coupled pair diverged (non-finite state) at t=" +
                             std::to_string(st.t) + ", step " +
                             std::to_string(step));
}

double effective_delta(const PairDynamics& dyn, const CouplingConfig& cfg) {
  if (cfg.delta > 0) return cfg.delta;
  return 1e-6 * (dyn.profile ? dyn.profile->R : 1.0);
}

}  // namespace

void step_synchronous(CouplingState& st, const PairDynamics& dyn,
                      const CouplingConfig& cfg, const NoiseStream& ns,
                      uint64_t step) {
  const auto& sp = *dyn.space;
  const int d = sp.dim();
  std::vector<double> xi(d);
  ns.normals(step, xi);
  const double dt = cfg.dt;
  Vec noise(d);
  for (int k = 0; k < d; ++k)
    noise[k] = kSqrt2 * std::sqrt(sp.eigenvalues[k] * dt) * xi[k];
  if (st.coalesced) {
    st.X += (-st.X + dyn.drift->b(st.X)) * dt + noise;
    st.Y = st.X;
  } else {
    const Vec bX = dyn.drift->b(st.X), bY = dyn.drift->b(st.Y);
    st.X += (-st.X + bX) * dt + noise;
    st.Y += (-st.Y + bY) * dt + noise;
    if (weighted_norm(st.X - st.Y, sp, dyn.geom) <= cfg.merge_tol) {
      st.Y = st.X;
      st.coalesced = true;
    }
  }
  st.t += dt;
  check_finite(st, step);
}

void step_switching(CouplingState& st, const PairDynamics& dyn,
                    const CouplingConfig& cfg, const NoiseStream& ns,
                    uint64_t step) {
  const auto& sp = *dyn.space;
  const int d = sp.dim(), n = sp.split_index;
  const double dt = cfg.dt;
  std::vector<double> xi(2 * d);
  ns.normals(step, xi);

  if (st.coalesced) {
    Vec noise(d);
    for (int k = 0; k < d; ++k)
      noise[k] = kSqrt2 * std::sqrt(sp.eigenvalues[k] * dt) * xi[d + k];
    st.X += (-st.X + dyn.drift->b(st.X)) * dt + noise;
    st.Y = st.X;
    st.t += dt;
    check_finite(st, step);
    return;
  }

  const Vec z = st.X - st.Y;
  const MixingWeights mix = rc_mixing(z, sp, dyn.geom, effective_delta(dyn, cfg));
  const Vec e = reflection_direction(z, sp);

  // w1 drives the reflected low-block noise, w2 the synchronous remainder
  Vec w1 = Vec::Zero(d), w2(d);
  for (int k = 0; k < d; ++k) {
    const double s = std::sqrt(sp.eigenvalues[k] * dt);
    if (k < n) w1[k] = s * xi[k];
    w2[k] = s * xi[d + k];
  }
  const Vec w1_refl = reflected_low_noise(w1, e, sp);

  Vec noiseX(d), noiseY(d);
  for (int k = 0; k < d; ++k) {
    if (k < n) {
      noiseX[k] = kSqrt2 * (mix.rc * w1[k] + mix.sc * w2[k]);
      noiseY[k] = kSqrt2 * (mix.rc * w1_refl[k] + mix.sc * w2[k]);
    } else {
      noiseX[k] = kSqrt2 * w2[k];
      noiseY[k] = kSqrt2 * w2[k];
    }
  }
  const Vec bX = dyn.drift->b(st.X), bY = dyn.drift->b(st.Y);
  st.X += (-st.X + bX) * dt + noiseX;
  st.Y += (-st.Y + bY) * dt + noiseY;
  if (weighted_norm(st.X - st.Y, sp, dyn.geom) <= cfg.merge_tol) {
    st.Y = st.X;
    st.coalesced = true;
  }
  st.t += dt;
  check_finite(st, step);
}

TrajectoryRecord simulate_pair(const Vec& x0, const Vec& y0,
                               const PairDynamics& dyn,
                               const CouplingConfig& cfg,
                               uint64_t trajectory_index) {
  const auto& sp = *dyn.space;
  if (x0.size() != sp.dim() || y0.size() != sp.dim())
    throw std::invalid_argument("simulate_pair: state dimension mismatch");
  if (!(cfg.dt > 0) || !(cfg.T >= cfg.dt))
    throw std::invalid_argument("simulate_pair: need 0 < dt <= T");
  const long n_steps = std::lround(cfg.T / cfg.dt);

  CouplingState st;
  st.X = x0;
  st.Y = y0;
  st.coalesced = weighted_norm(x0 - y0, sp, dyn.geom) <= cfg.merge_tol;

  NoiseStream ns(cfg.seed, 100 + uint64_t(cfg.kind), trajectory_index);
  TrajectoryRecord rec;
  const double delta = effective_delta(dyn, cfg);

  auto record = [&](const CouplingState& s) {
    const double r = weighted_norm(s.X - s.Y, sp, dyn.geom);
    const double f_r = dyn.profile ? dyn.profile->eval_f(r) : r;
    double Q = f_r;
    if (dyn.epsilon > 0)
      Q = f_r * (1.0 + dyn.epsilon * quadratic_V(s.X) +
                 dyn.epsilon * quadratic_V(s.Y));
    double rc = 0.0;
    if (cfg.kind == CouplingKind::Switching && !s.coalesced)
      rc = rc_mixing(s.X - s.Y, sp, dyn.geom, delta).rc;
    rec.t.push_back(s.t);
    rec.r.push_back(r);
    rec.f_r.push_back(f_r);
    rec.Q.push_back(Q);
    rec.rc.push_back(rc);
  };

  record(st);
  for (long s = 0; s < n_steps; ++s) {
    if (cfg.kind == CouplingKind::Synchronous)
      step_synchronous(st, dyn, cfg, ns, uint64_t(s));
    else
      step_switching(st, dyn, cfg, ns, uint64_t(s));
    if ((s + 1) % cfg.record_stride == 0 || s + 1 == n_steps) record(st);
  }
  rec.final_X = st.X;
  rec.final_Y = st.Y;
  rec.coalesced = st.coalesced;
  return rec;
}

ReflectionCouplingFd::ReflectionCouplingFd(std::function<Vec(const Vec&)> a,
                                           Eigen::MatrixXd sigma)
    : a_(std::move(a)), sigma_(std::move(sigma)), lu_(sigma_) {
  if (sigma_.rows() != sigma_.cols())
    throw std::invalid_argument("reflection coupling: sigma must be square");
  if (!lu_.isInvertible())
    throw std::invalid_argument("reflection coupling: sigma is singular");
}

void ReflectionCouplingFd::step(State& st, double dt, double merge_tol,
                                const NoiseStream& ns,
                                uint64_t step_index) const {
  const int d = int(st.R.size());
  std::vector<double> buf(d);
  ns.normals(step_index, buf);
  Vec xi(d);
  for (int k = 0; k < d; ++k) xi[k] = buf[k];
  const double sdt = std::sqrt(dt);

  if (st.coalesced) {
    st.R += a_(st.R) * dt + sdt * (sigma_ * xi);
    st.S = st.R;
    st.t += dt;
    return;
  }
  const Vec v = lu_.solve(st.R - st.S);
  const Vec ehat = v / v.norm();
  const Vec xi_refl = xi - 2.0 * ehat.dot(xi) * ehat;
  st.R += a_(st.R) * dt + sdt * (sigma_ * xi);
  st.S += a_(st.S) * dt + sdt * (sigma_ * xi_refl);
  if ((st.R - st.S).norm() <= merge_tol) {
    st.S = st.R;
    st.coalesced = true;
  }
  st.t += dt;
}

}  // namespace couplab
