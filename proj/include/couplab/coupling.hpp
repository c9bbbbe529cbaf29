#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "couplab/distance.hpp"
#include "couplab/drift.hpp"
#include "couplab/rng.hpp"
#include "couplab/spectral.hpp"

namespace couplab {

enum class CouplingKind { Synchronous, Switching };

struct CouplingConfig {
  CouplingKind kind = CouplingKind::Switching;
  double dt = 1e-3;
  double T = 10.0;
  double delta = 0;  // switching width; 0 picks 1e-6 * profile R
  double merge_tol = 1e-9;
  int record_stride = 20;
  uint64_t seed = 1;
};

struct CouplingState {
  Vec X, Y;
  double t = 0;
  bool coalesced = false;
};

struct TrajectoryRecord {
  std::vector<double> t, r, f_r, Q, rc;
  Vec final_X, final_Y;  // marginal states at time T
  bool coalesced = false;
};

// Smooth mixing between reflection (rc=1) and synchronous (rc=0) noise on
// the low block: rc = 1 on {2(beta+1)||z^l|| >= ||z^h||} n {||z||_a >= delta},
// rc = 0 on {4(beta+1)||z^l|| <= ||z^h||} u {||z||_a <= delta/2}, and
// rc^2 + sc^2 = 1 so the per-marginal noise law is exact.
struct MixingWeights {
  double rc = 0, sc = 1;
};

MixingWeights rc_mixing(const Vec& z, const SpectralSpace& sp,
                        const WeightedGeometry& geom, double delta);

// Unit reflection direction e = G^{-1/2} z^l / ||G^{-1/2} z^l|| (zero high
// block); a vanishing low difference falls back to the first coordinate.
Vec reflection_direction(const Vec& z, const SpectralSpace& sp);

// Partner's low-block noise sqrt(G) (I - 2 e e^T) sqrt(G)^{-1} w1 for a unit
// direction e supported on the low block; high-block entries pass through.
// Conjugating the Householder reflection by sqrt(G) preserves the low-block
// covariance, so the partner's marginal noise law is exact.
Vec reflected_low_noise(const Vec& w1, const Vec& e, const SpectralSpace& sp);

// Everything a coupled pair step needs besides the state.
struct PairDynamics {
  const DriftModel* drift = nullptr;
  const SpectralSpace* space = nullptr;
  WeightedGeometry geom;
  const DistanceProfile* profile = nullptr;  // optional: f_r column, delta
  double epsilon = 0;                        // Lyapunov weight for Q
};

void step_synchronous(CouplingState& st, const PairDynamics& dyn,
                      const CouplingConfig& cfg, const NoiseStream& ns,
                      uint64_t step);
void step_switching(CouplingState& st, const PairDynamics& dyn,
                    const CouplingConfig& cfg, const NoiseStream& ns,
                    uint64_t step);

TrajectoryRecord simulate_pair(const Vec& x0, const Vec& y0,
                               const PairDynamics& dyn,
                               const CouplingConfig& cfg,
                               uint64_t trajectory_index);

// Classical reflection coupling for dS = a(S) dt + sigma dB in R^d with a
// constant invertible sigma; the partner's noise is reflected across the
// sigma^{-1}(R - S) direction until the pair merges.
class ReflectionCouplingFd {
 public:
  ReflectionCouplingFd(std::function<Vec(const Vec&)> a,
                       Eigen::MatrixXd sigma);

  struct State {
    Vec R, S;
    double t = 0;
    bool coalesced = false;
  };

  void step(State& st, double dt, double merge_tol, const NoiseStream& ns,
            uint64_t step_index) const;

 private:
  std::function<Vec(const Vec&)> a_;
  Eigen::MatrixXd sigma_;
  Eigen::FullPivLU<Eigen::MatrixXd> lu_;
};

}  // namespace couplab
