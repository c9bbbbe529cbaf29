#pragma once

#include <Eigen/Dense>
#include <string>

namespace couplab {

using Vec = Eigen::VectorXd;

// Diagonal covariance operator on the truncated Hilbert space, plus the
// split of coordinates into a low block (1..n) and a high block (n+1..d).
struct SpectralSpace {
  Vec eigenvalues;     // lambda_1..lambda_d, all > 0
  int split_index = 1; // n, size of the low block (1 <= n <= d)

  int dim() const { return int(eigenvalues.size()); }
  double lambda_star() const;  // min over the low block
  double lambda_sup() const;   // max over the low block
  double trace() const { return eigenvalues.sum(); }

  static SpectralSpace brownian_bridge(int d, int n);  // lambda_k = (pi k)^-2
  static SpectralSpace geometric(double rho, int d, int n);
  static SpectralSpace from_eigenvalues(Vec lambda, int n);
};

// Block Lipschitz bounds of the drift perturbation: high-block inequality
// uses (H_l, H_h), low-block uses (L_l, L_h).
struct LipschitzConstants {
  double H_l = 0, H_h = 0, L_l = 0, L_h = 0;
};

// alpha = (1+L_h)/(1-H_h) weights the high block; beta = alpha*H_l + L_l - 1
// is the low-block expansion budget. Requires H_h < 1.
struct WeightedGeometry {
  double alpha = 1;
  double beta = 0;
};

WeightedGeometry compute_geometry(const LipschitzConstants& lip);

// Smallest n with lambda_{n+1} < 1/(2L); requires a non-increasing sequence.
int split_index_for(double L, const Vec& eigenvalues);

double low_norm(const Vec& x, int n);
double high_norm(const Vec& x, int n);
double weighted_norm(const Vec& x, int n, double alpha);
inline double weighted_norm(const Vec& x, const SpectralSpace& sp,
                            const WeightedGeometry& g) {
  return weighted_norm(x, sp.split_index, g.alpha);
}

enum class Block { Low, High };
Vec project(const Vec& x, int n, Block which);

}  // namespace couplab
