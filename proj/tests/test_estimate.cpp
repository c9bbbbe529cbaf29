#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "couplab/estimate.hpp"
#include "couplab/rng.hpp"

using namespace couplab;

TEST_CASE("exact exponential series recovers its rate with zero residual") {
  std::vector<double> t, means;
  for (int j = 0; j <= 100; ++j) {
    t.push_back(0.25 * j);  // exactly representable grid
    means.push_back(2.5 * std::exp(-0.3 * 0.25 * j));
  }
  auto est = estimate_decay(t, means, 5.0, 20.0);
  CHECK(est.c_hat == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(est.se == doctest::Approx(0.0).scale(1).epsilon(1e-10));
  CHECK(est.n_used == 61);
  CHECK(est.t_lo == 5.0);
  CHECK(est.t_hi == 20.0);
}

TEST_CASE("window selection uses only interior points") {
  // exact rate 0.5 inside the window, junk outside it
  std::vector<double> t, means;
  for (int j = 0; j <= 50; ++j) {
    t.push_back(0.25 * j);
    const double tt = 0.25 * j;
    means.push_back((tt >= 3.0 && tt <= 7.0) ? std::exp(-0.5 * tt) : 99.0);
  }
  auto est = estimate_decay(t, means, 3.0, 7.0);
  CHECK(est.c_hat == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("noisy series: estimate within its own confidence band") {
  NoiseStream ns(11, 0x65737431u, 0);
  std::vector<double> buf(1);
  std::vector<double> t, means, ses;
  for (int j = 0; j <= 80; ++j) {
    const double tt = 0.25 * j;
    ns.normals(uint64_t(j), buf);
    t.push_back(tt);
    means.push_back(std::exp(-0.4 * tt) * (1.0 + 0.01 * buf[0]));
    ses.push_back(0.01 * std::exp(-0.4 * tt));
  }
  auto est = estimate_decay(t, means, 1.0, 7.0, &ses);
  CHECK(est.se > 0.0);
  CHECK(std::abs(est.c_hat - 0.4) < 3.0 * est.se);
}

TEST_CASE("decay estimate rejects degenerate input") {
  std::vector<double> t{0, 1, 2, 3}, means{1.0, 0.5, 0.25, 0.125};
  CHECK_THROWS_AS(estimate_decay(t, means, 2.5, 2.6), std::invalid_argument);
  CHECK_THROWS_AS(estimate_decay(t, means, 3.0, 1.0), std::invalid_argument);
  std::vector<double> negative{1.0, -0.5, 0.25, 0.125};
  CHECK_THROWS_AS(estimate_decay(t, negative, 0.0, 3.0),
                  std::invalid_argument);
  std::vector<double> short_means{1.0};
  CHECK_THROWS_AS(estimate_decay(t, short_means, 0.0, 3.0),
                  std::invalid_argument);
}

TEST_CASE("jackknife rate from rows") {
  SUBCASE("identical exponential rows: exact rate, zero jackknife spread") {
    std::vector<double> t;
    std::vector<std::vector<double>> rows(8);
    for (int j = 0; j <= 40; ++j) {
      const double tt = 0.25 * j;  // exact grid
      t.push_back(tt);
      for (auto& row : rows) row.push_back(3.0 * std::exp(-0.7 * tt));
    }
    auto est = estimate_decay_rows(t, rows, 1.0, 9.0);
    CHECK(est.c_hat == doctest::Approx(0.7).epsilon(1e-12));
    CHECK(est.se == doctest::Approx(0.0).scale(1).epsilon(1e-10));
  }

  SUBCASE("point estimate equals the column-mean fit") {
    // rows with trajectory-level amplitude noise: the jackknife point
    // estimate must match estimate_decay on the column means, while its SE
    // accounts for the shared-trajectory correlation
    NoiseStream ns(5, 0x65737432u, 0);
    std::vector<double> buf(64);
    ns.normals(0, buf);
    std::vector<double> t;
    std::vector<std::vector<double>> rows(64);
    for (int j = 0; j <= 30; ++j) t.push_back(0.25 * j);
    for (int i = 0; i < 64; ++i) {
      const double amp = std::exp(0.2 * buf[i]);
      for (double tt : t) rows[i].push_back(amp * std::exp(-0.5 * tt));
    }
    auto rows_est = estimate_decay_rows(t, rows, 1.0, 5.0);
    SeriesStats st = column_stats(rows);
    auto mean_est = estimate_decay(t, st.mean, 1.0, 5.0, &st.se);
    CHECK(rows_est.c_hat == doctest::Approx(mean_est.c_hat).epsilon(1e-12));
    // pure amplitude noise shifts log-rows by constants, so the slope is
    // exact and the jackknife detects that
    CHECK(rows_est.c_hat == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(rows_est.se == doctest::Approx(0.0).scale(1).epsilon(1e-10));
  }

  SUBCASE("trajectory-level rate noise: jackknife covers the truth") {
    NoiseStream ns(6, 0x65737433u, 0);
    std::vector<double> buf(64);
    ns.normals(0, buf);
    std::vector<double> t;
    std::vector<std::vector<double>> rows(64);
    for (int j = 0; j <= 30; ++j) t.push_back(0.25 * j);
    double mean_rate = 0;
    for (int i = 0; i < 64; ++i) {
      const double rate = 0.5 + 0.05 * buf[i];
      mean_rate += rate / 64.0;
      for (double tt : t) rows[i].push_back(std::exp(-rate * tt));
    }
    auto est = estimate_decay_rows(t, rows, 1.0, 5.0);
    CHECK(est.se > 0.001);  // heterogeneous rates leave real uncertainty
    CHECK(std::abs(est.c_hat - mean_rate) < 3.0 * est.se + 0.02);
  }

  SUBCASE("rejects rows of mismatched length and empty windows") {
    std::vector<double> t{0.0, 1.0, 2.0};
    std::vector<std::vector<double>> rows{{1.0, 0.5, 0.25}, {1.0, 0.5}};
    CHECK_THROWS_AS(estimate_decay_rows(t, rows, 0.0, 2.0),
                    std::invalid_argument);
    std::vector<std::vector<double>> ok{{1.0, 0.5, 0.25}, {1.0, 0.5, 0.25}};
    CHECK_THROWS_AS(estimate_decay_rows(t, ok, 5.0, 6.0),
                    std::invalid_argument);
  }
}

TEST_CASE("empirical W1 on the line") {
  SUBCASE("translation shifts by exactly the offset") {
    NoiseStream ns(9, 0x77317472u, 0);
    std::vector<double> buf(1000);
    ns.normals(0, buf);
    std::vector<double> a(buf.begin(), buf.end()), b;
    for (double v : a) b.push_back(v + 0.75);
    CHECK(empirical_w1_marginal(a, b) == doctest::Approx(0.75).epsilon(1e-12));
  }

  SUBCASE("identical samples give zero; permutation does not matter") {
    std::vector<double> a{3.0, -1.0, 2.0, 0.5};
    std::vector<double> b{0.5, 2.0, 3.0, -1.0};
    CHECK(empirical_w1_marginal(a, b) == 0.0);
  }

  SUBCASE("hand value on small samples") {
    // sorted a = (0,1), sorted b = (2,5): W1 = (|0-2| + |1-5|)/2 = 3
    std::vector<double> a{1.0, 0.0}, b{5.0, 2.0};
    CHECK(empirical_w1_marginal(a, b) == doctest::Approx(3.0).epsilon(1e-15));
  }

  SUBCASE("rejects mismatched or empty inputs") {
    std::vector<double> a{1.0, 2.0}, b{1.0};
    CHECK_THROWS_AS(empirical_w1_marginal(a, b), std::invalid_argument);
    std::vector<double> empty;
    CHECK_THROWS_AS(empirical_w1_marginal(empty, empty),
                    std::invalid_argument);
  }
}

TEST_CASE("column statistics and scalar moments") {
  SUBCASE("column stats on a hand-checkable block") {
    std::vector<std::vector<double>> rows{{1.0, 4.0}, {3.0, 8.0}};
    auto st = column_stats(rows);
    REQUIRE(st.mean.size() == 2);
    CHECK(st.mean[0] == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(st.mean[1] == doctest::Approx(6.0).epsilon(1e-15));
    // sample sd of {1,3} is sqrt(2); SE = sqrt(2)/sqrt(2) = 1
    CHECK(st.se[0] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(st.se[1] == doctest::Approx(2.0).epsilon(1e-15));
  }

  SUBCASE("moments of a known sample") {
    std::vector<double> xs{2.0, 4.0, 6.0, 8.0};
    auto m = moments(xs);
    CHECK(m.mean == doctest::Approx(5.0).epsilon(1e-15));
    // unbiased variance of {2,4,6,8} is 20/3
    CHECK(m.var == doctest::Approx(20.0 / 3.0).epsilon(1e-14));
    CHECK(m.se_mean ==
          doctest::Approx(std::sqrt(20.0 / 3.0 / 4.0)).epsilon(1e-14));
    CHECK(m.se_var > 0.0);
    std::vector<double> lone{1.0};
    CHECK_THROWS_AS(moments(lone), std::invalid_argument);
  }

  SUBCASE("gaussian sample: moments near truth with reported uncertainty") {
    NoiseStream ns(23, 0x6d6f6d74u, 0);
    std::vector<double> buf(20000);
    ns.normals(0, buf);
    std::vector<double> xs;
    for (double v : buf) xs.push_back(1.5 + 2.0 * v);
    auto m = moments(xs);
    CHECK(std::abs(m.mean - 1.5) < 4.0 * m.se_mean);
    CHECK(std::abs(m.var - 4.0) < 4.0 * m.se_var);
  }
}
