#pragma once

#include <vector>

namespace couplab {

struct DecayEstimate {
  double c_hat = 0;  // decay rate: slope of -log(mean) over the window
  double se = 0;
  int n_used = 0;
  double t_lo = 0, t_hi = 0;
};

// OLS fit of log(means) over t in [t_lo, t_hi]. The reported SE is the
// larger of the OLS residual SE and the delta-method SE propagated from the
// per-time standard errors (when provided); conservative for one-sided rate
// comparisons. Means inside the window must be positive.
DecayEstimate estimate_decay(const std::vector<double>& t,
                             const std::vector<double>& means, double t_lo,
                             double t_hi,
                             const std::vector<double>* mean_se = nullptr);

// Same point estimate computed from the per-trajectory rows, but with a
// delete-1 jackknife SE over trajectories. Unlike the per-time delta method
// this accounts for the cross-time correlation of the ensemble means (every
// record time shares the same trajectories), which otherwise understates the
// slope uncertainty.
DecayEstimate estimate_decay_rows(const std::vector<double>& t,
                                  const std::vector<std::vector<double>>& rows,
                                  double t_lo, double t_hi);

// Exact W1 between two empirical laws on the line (sorted-sample mean
// absolute difference); requires equal, non-zero sample counts.
double empirical_w1_marginal(std::vector<double> a, std::vector<double> b);

struct SeriesStats {
  std::vector<double> mean, se;
};

// Column means and standard errors over per-trajectory rows of equal length.
SeriesStats column_stats(const std::vector<std::vector<double>>& rows);

struct MomentStats {
  double mean = 0, var = 0, se_mean = 0, se_var = 0;
};

MomentStats moments(const std::vector<double>& xs);

}  // namespace couplab
