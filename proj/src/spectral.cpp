#include "couplab/spectral.hpp"

#include <cmath>
#include <stdexcept>

namespace couplab {

namespace {

void validate(const SpectralSpace& sp) {
  if (sp.dim() < 1) throw std::invalid_argument("spectral space: empty eigenvalue list");
  if (sp.split_index < 1 || sp.split_index > sp.dim())
    throw std::invalid_argument("spectral space: split index out of range");
  for (int k = 0; k < sp.dim(); ++k)
    if (!(sp.eigenvalues[k] > 0))
      throw std::invalid_argument("spectral space: eigenvalues must be positive");
}

}  // namespace

double SpectralSpace::lambda_star() const {
  return eigenvalues.head(split_index).minCoeff();
}

double SpectralSpace::lambda_sup() const {
  return eigenvalues.head(split_index).maxCoeff();
}

SpectralSpace SpectralSpace::brownian_bridge(int d, int n) {
  Vec lam(d);
  for (int k = 0; k < d; ++k) {
    double pk = M_PI * (k + 1);
    lam[k] = 1.0 / (pk * pk);
  }
  return from_eigenvalues(lam, n);
}

SpectralSpace SpectralSpace::geometric(double rho, int d, int n) {
  if (!(rho > 0) || !(rho < 1))
    throw std::invalid_argument("geometric eigenvalues need 0 < rho < 1");
  Vec lam(d);
  double v = rho;
  for (int k = 0; k < d; ++k, v *= rho) lam[k] = v;
  return from_eigenvalues(lam, n);
}

SpectralSpace SpectralSpace::from_eigenvalues(Vec lambda, int n) {
  SpectralSpace sp{std::move(lambda), n};
  validate(sp);
  return sp;
}

WeightedGeometry compute_geometry(const LipschitzConstants& lip) {
  if (lip.H_l < 0 || lip.H_h < 0 || lip.L_l < 0 || lip.L_h < 0)
    throw std::invalid_argument("Lipschitz constants must be non-negative");
  if (!(lip.H_h < 1))
    throw std::invalid_argument("high-block constant H_h must be < 1");
  WeightedGeometry g;
  g.alpha = (1.0 + lip.L_h) / (1.0 - lip.H_h);
  g.beta = g.alpha * lip.H_l + lip.L_l - 1.0;
  return g;
}

int split_index_for(double L, const Vec& eigenvalues) {
  if (!(L > 0)) throw std::invalid_argument("split_index_for: L must be positive");
  const int d = int(eigenvalues.size());
  for (int k = 1; k < d; ++k)
    if (eigenvalues[k] > eigenvalues[k - 1])
      throw std::invalid_argument("split_index_for: eigenvalues must be non-increasing");
  const double cut = 1.0 / (2.0 * L);
  for (int k = 0; k + 1 < d; ++k)
    if (eigenvalues[k + 1] < cut) return k + 1;
  throw std::runtime_error("split_index_for: no split within truncation satisfies lambda_{n+1} < 1/(2L)");
}

double low_norm(const Vec& x, int n) { return x.head(n).norm(); }

double high_norm(const Vec& x, int n) {
  return x.size() > n ? x.tail(x.size() - n).norm() : 0.0;
}

double weighted_norm(const Vec& x, int n, double alpha) {
  return low_norm(x, n) + alpha * high_norm(x, n);
}

Vec project(const Vec& x, int n, Block which) {
  Vec out = Vec::Zero(x.size());
  if (which == Block::Low)
    out.head(n) = x.head(n);
  else if (x.size() > n)
    out.tail(x.size() - n) = x.tail(x.size() - n);
  return out;
}

}  // namespace couplab
