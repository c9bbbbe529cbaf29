#include "couplab/estimate.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace couplab {

DecayEstimate estimate_decay(const std::vector<double>& t,
                             const std::vector<double>& means, double t_lo,
                             double t_hi,
                             const std::vector<double>* mean_se) {
  if (t.size() != means.size())
    throw std::invalid_argument("estimate_decay: length mismatch");
  if (mean_se && mean_se->size() != t.size())
    throw std::invalid_argument("estimate_decay: SE length mismatch");

  std::vector<double> ts, ys, rel;
  for (size_t i = 0; i < t.size(); ++i) {
    if (t[i] < t_lo || t[i] > t_hi) continue;
    if (!(means[i] > 0))
      throw std::invalid_argument(
          "estimate_decay: non-positive mean inside the fit window; shorten "
          "the horizon or enlarge the ensemble");
    ts.push_back(t[i]);
    ys.push_back(std::log(means[i]));
    rel.push_back(mean_se ? (*mean_se)[i] / means[i] : 0.0);
  }
  const int n = int(ts.size());
  if (n < 3)
    throw std::invalid_argument("estimate_decay: fewer than 3 points in window");

  double tbar = 0, ybar = 0;
  for (int i = 0; i < n; ++i) {
    tbar += ts[i];
    ybar += ys[i];
  }
  tbar /= n;
  ybar /= n;
  double sxx = 0, sxy = 0;
  for (int i = 0; i < n; ++i) {
    sxx += (ts[i] - tbar) * (ts[i] - tbar);
    sxy += (ts[i] - tbar) * (ys[i] - ybar);
  }
  if (!(sxx > 0))
    throw std::invalid_argument("estimate_decay: degenerate time window");
  const double slope = sxy / sxx;

  double rss = 0, var_delta = 0;
  for (int i = 0; i < n; ++i) {
    const double fit = ybar + slope * (ts[i] - tbar);
    rss += (ys[i] - fit) * (ys[i] - fit);
    const double a = (ts[i] - tbar) / sxx;
    var_delta += a * a * rel[i] * rel[i];
  }
  const double var_resid = n > 2 ? (rss / (n - 2)) / sxx : 0.0;

  DecayEstimate est;
  est.c_hat = -slope;
  est.se = std::sqrt(std::max(var_resid, var_delta));
  est.n_used = n;
  est.t_lo = t_lo;
  est.t_hi = t_hi;
  return est;
}

DecayEstimate estimate_decay_rows(const std::vector<double>& t,
                                  const std::vector<std::vector<double>>& rows,
                                  double t_lo, double t_hi) {
  const size_t N = rows.size();
  if (N < 3)
    throw std::invalid_argument("estimate_decay_rows: need >= 3 trajectories");
  for (const auto& r : rows)
    if (r.size() != t.size())
      throw std::invalid_argument("estimate_decay_rows: ragged rows");

  std::vector<size_t> idx;
  std::vector<double> ts, sums;
  for (size_t j = 0; j < t.size(); ++j) {
    if (t[j] < t_lo || t[j] > t_hi) continue;
    double s = 0;
    for (const auto& r : rows) s += r[j];
    if (!(s > 0))
      throw std::invalid_argument(
          "estimate_decay_rows: non-positive mean inside the fit window; "
          "shorten the horizon or enlarge the ensemble");
    idx.push_back(j);
    ts.push_back(t[j]);
    sums.push_back(s);
  }
  const int n = int(ts.size());
  if (n < 3)
    throw std::invalid_argument(
        "estimate_decay_rows: fewer than 3 points in window");

  double tbar = 0;
  for (int j = 0; j < n; ++j) tbar += ts[j];
  tbar /= n;
  double sxx = 0;
  for (int j = 0; j < n; ++j) sxx += (ts[j] - tbar) * (ts[j] - tbar);
  if (!(sxx > 0))
    throw std::invalid_argument("estimate_decay_rows: degenerate time window");
  std::vector<double> a(n);
  for (int j = 0; j < n; ++j) a[j] = (ts[j] - tbar) / sxx;

  auto slope_of = [&](const std::vector<double>& m) {
    double s = 0;
    for (int j = 0; j < n; ++j) s += a[j] * std::log(m[j]);
    return s;
  };

  std::vector<double> mean(n);
  for (int j = 0; j < n; ++j) mean[j] = sums[j] / double(N);
  const double slope_full = slope_of(mean);

  std::vector<double> loo(n), slopes(N);
  double jbar = 0;
  for (size_t i = 0; i < N; ++i) {
    for (int j = 0; j < n; ++j) {
      loo[j] = (sums[j] - rows[i][idx[j]]) / double(N - 1);
      if (!(loo[j] > 0))
        throw std::invalid_argument(
            "estimate_decay_rows: leave-one-out mean vanishes; the estimate "
            "rests on too few live trajectories");
    }
    slopes[i] = slope_of(loo);
    jbar += slopes[i];
  }
  jbar /= double(N);
  double var_jack = 0;
  for (size_t i = 0; i < N; ++i)
    var_jack += (slopes[i] - jbar) * (slopes[i] - jbar);
  var_jack *= double(N - 1) / double(N);

  DecayEstimate est;
  est.c_hat = -slope_full;
  est.se = std::sqrt(var_jack);
  est.n_used = n;
  est.t_lo = t_lo;
  est.t_hi = t_hi;
  return est;
}

double empirical_w1_marginal(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || a.size() != b.size())
    throw std::invalid_argument(
        "empirical_w1_marginal: need equal non-zero sample counts");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double s = 0;
  for (size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return s / double(a.size());
}

SeriesStats column_stats(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) throw std::invalid_argument("column_stats: no rows");
  const size_t m = rows.front().size();
  const size_t N = rows.size();
  for (const auto& r : rows)
    if (r.size() != m)
      throw std::invalid_argument("column_stats: ragged rows");
  SeriesStats out;
  out.mean.assign(m, 0.0);
  out.se.assign(m, 0.0);
  for (const auto& r : rows)
    for (size_t j = 0; j < m; ++j) out.mean[j] += r[j];
  for (size_t j = 0; j < m; ++j) out.mean[j] /= double(N);
  if (N > 1) {
    for (const auto& r : rows)
      for (size_t j = 0; j < m; ++j) {
        const double d = r[j] - out.mean[j];
        out.se[j] += d * d;
      }
    for (size_t j = 0; j < m; ++j)
      out.se[j] = std::sqrt(out.se[j] / double(N - 1) / double(N));
  }
  return out;
}

MomentStats moments(const std::vector<double>& xs) {
  if (xs.size() < 2) throw std::invalid_argument("moments: need >= 2 samples");
  const double n = double(xs.size());
  MomentStats ms;
  for (double v : xs) ms.mean += v;
  ms.mean /= n;
  double m2 = 0, m4 = 0;
  for (double v : xs) {
    const double d = v - ms.mean;
    m2 += d * d;
    m4 += d * d * d * d;
  }
  ms.var = m2 / (n - 1);
  m2 /= n;
  m4 /= n;
  ms.se_mean = std::sqrt(ms.var / n);
  // SE of the sample variance from the fourth central moment
  const double var_of_var = (m4 - m2 * m2) / n;
  ms.se_var = std::sqrt(std::max(var_of_var, 0.0));
  return ms;
}

}  // namespace couplab
