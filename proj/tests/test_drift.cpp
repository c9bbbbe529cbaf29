#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "couplab/drift.hpp"

using namespace couplab;

TEST_CASE("gaussian bump potential: gradient, constants") {
  const double c1 = 0.4, sigma = 0.3;
  auto pot = gaussian_bump_potential(1.0, c1, sigma);
  CHECK(pot.L == doctest::Approx(c1 / (sigma * sigma)).epsilon(1e-15));
  REQUIRE(pot.growth.has_value());
  CHECK(pot.growth->b ==
        doctest::Approx(c1 / (sigma * std::sqrt(std::exp(1.0)))).epsilon(1e-15));
  CHECK(pot.growth->c == 0.0);

  // grad m of m(x) = -c1 exp(-||x||^2/(2 s^2)) is (c1/s^2) x exp(...)
  Vec x(3);
  x << 0.2, -0.1, 0.35;
  Vec g = pot.grad_m(x);
  const double e = std::exp(-x.squaredNorm() / (2 * sigma * sigma));
  for (int k = 0; k < 3; ++k)
    CHECK(g[k] == doctest::Approx(c1 / (sigma * sigma) * x[k] * e).epsilon(1e-14));

  CHECK_THROWS(gaussian_bump_potential(-1.0, c1, sigma));
  CHECK_THROWS(gaussian_bump_potential(1.0, 0.0, sigma));
  CHECK_THROWS(gaussian_bump_potential(1.0, c1, 0.0));
}

TEST_CASE("ou drift carries tight linear constants") {
  auto sp = SpectralSpace::brownian_bridge(4, 1);
  auto m = preconditioned_gradient_drift(sp, ou_potential(1.0));
  CHECK(m.name == "ou");
  REQUIRE(m.declared.has_value());
  CHECK(m.declared->H_l == 0.0);
  CHECK(m.declared->H_h == doctest::Approx(sp.eigenvalues[1]).epsilon(1e-15));
  CHECK(m.declared->L_l == doctest::Approx(sp.eigenvalues[0]).epsilon(1e-15));
  CHECK(m.declared->L_h == 0.0);
  // stiff a pushes H_h past 1 and the tight split disappears
  auto stiff = preconditioned_gradient_drift(sp, ou_potential(50.0));
  CHECK_FALSE(stiff.declared.has_value());

  Vec x(4);
  x << 1, -2, 3, 0.5;
  Vec b = m.b(x);
  for (int k = 0; k < 4; ++k)
    CHECK(b[k] == doctest::Approx(-sp.eigenvalues[k] * x[k]).epsilon(1e-15));
}

TEST_CASE("bump drift satisfies its declared split and sector bound") {
  auto sp = SpectralSpace::brownian_bridge(8, 1);
  auto pot = gaussian_bump_potential(1.0, 0.01, 0.1);  // L = 1
  auto m = preconditioned_gradient_drift(sp, pot);
  REQUIRE(m.declared.has_value());
  CHECK(m.declared->L_l == doctest::Approx(1.0));
  auto geom = compute_geometry(*m.declared);
  CHECK(geom.alpha == doctest::Approx(4.0));
  CHECK(geom.beta == doctest::Approx(2.0));

  auto rep = check_block_bounds(m, sp, *m.declared, 800, 11);
  CHECK(rep.samples == 800);
  CHECK(rep.violations == 0);
  CHECK(rep.max_ratio_weighted <= 1.0);

  auto sec = check_sector_contraction(m, sp, geom, 800, 11);
  CHECK(sec.violations == 0);
  CHECK(sec.factor == doctest::Approx(0.875));
}

TEST_CASE("negative control: a claim far below the truth is rejected") {
  auto sp = SpectralSpace::brownian_bridge(8, 1);
  auto m = preconditioned_gradient_drift(sp,
                                         gaussian_bump_potential(1.0, 0.01, 0.1));
  // shrink the honest splitting constants 50x; sampled ratios then exceed 1
  LipschitzConstants lie{0.01, 0.01, 0.02, 0.02};
  auto rep = check_block_bounds(m, sp, lie, 800, 11);
  CHECK(rep.violations > 0);
  CHECK(rep.max_ratio_weighted > 1.0);
}

TEST_CASE("negative control: an expanding drift fails the sector bound") {
  auto sp = SpectralSpace::brownian_bridge(6, 2);
  DriftModel expand;
  expand.name = "expanding";
  expand.b = [](const Vec& x) -> Vec { return x; };
  WeightedGeometry geom{2.0, 0.5};
  auto sec = check_sector_contraction(expand, sp, geom, 200, 3);
  CHECK(sec.violations == sec.samples);
}

TEST_CASE("compactly supported bump honors a large-distance contract") {
  // m(x) = -c1 (1 - ||x||^2/r0^2)^3 on the unit ball, zero outside;
  // grad m = (6 c1/r0^2) x s^2 with s = max(0, 1 - ||x||^2/r0^2).
  // sup ||grad m|| = (6 c1/r0) max_u u(1-u^2)^2 = 1.7172 c1/r0 and the
  // Hessian bound is L = 8 c1/r0^2 (max of (1-u)(1+3u) at u = 1/3).
  const double c1 = 1.0, r0 = 1.0;
  PotentialSpec pot;
  pot.a = 0.0;
  pot.L = 8.0 * c1 / (r0 * r0);
  pot.grad_m = [c1, r0](const Vec& x) -> Vec {
    const double s = std::max(0.0, 1.0 - x.squaredNorm() / (r0 * r0));
    return (6.0 * c1 / (r0 * r0)) * s * s * x;
  };
  pot.growth = GrowthBound{1.72 * c1 / r0, 0.0};

  auto sp = SpectralSpace::brownian_bridge(8, 1);
  auto m = preconditioned_gradient_drift(sp, pot);
  REQUIRE(m.declared.has_value());  // lambda_2 < 1/(2L) = 1/16
  auto geom = compute_geometry(*m.declared);
  CHECK(geom.alpha == doctest::Approx(18.0));

  // ||b(x)-b(y)||_alpha <= sqrt(2) alpha lambda_1 * 2 sup||grad m||, so any
  // R >= that / M certifies the contract; R = 12 has margin
  LargeDistanceContract contract{0.75, 12.0};
  auto rep = check_large_distance(m, sp, geom, contract, 600, 5);
  CHECK(rep.samples == 600);
  CHECK(rep.violations == 0);
}

TEST_CASE("tps quadratic well reduces to the linear spectral drift") {
  const double a = 1.3;
  auto sp = SpectralSpace::brownian_bridge(12, 1);
  auto m = tps_drift(sp, tps_quadratic_potential(a), 0);
  REQUIRE(m.declared.has_value());

  // closed form b_k = -lambda_k a^2 x_k, exact by discrete sine orthogonality
  Vec x = Vec::Zero(12);
  for (int k = 0; k < 12; ++k) x[k] = std::sin(1.0 + k) * 0.7;
  Vec b = m.b(x);
  for (int k = 0; k < 12; ++k)
    CHECK(b[k] == doctest::Approx(-sp.eigenvalues[k] * a * a * x[k])
                      .epsilon(1e-10));

  // no off-mode leakage from a single excited mode
  Vec e3 = Vec::Zero(12);
  e3[3] = 1.0;
  Vec b3 = m.b(e3);
  for (int k = 0; k < 12; ++k) {
    if (k == 3) continue;
    CHECK(std::abs(b3[k]) < 1e-10);
  }

  // aliasing guard: fewer than 4 d quadrature nodes is rejected
  CHECK_THROWS(tps_drift(sp, tps_quadratic_potential(a), 32));
}

TEST_CASE("tps doublewell derivative chain is consistent") {
  auto pp = tps_doublewell_potential(2.0, 0.25, 0.5);
  CHECK(pp.L_m > 0.0);
  CHECK(pp.growth.b > 0.0);
  // finite differences tie W', W'', W''', W'''' together
  const double h = 1e-5;
  for (double u : {-1.1, -0.4, 0.0, 0.3, 0.9, 1.7}) {
    const double d1 = (pp.W1(u + h) - pp.W1(u - h)) / (2 * h);
    const double d2 = (pp.W2(u + h) - pp.W2(u - h)) / (2 * h);
    const double d3 = (pp.W3(u + h) - pp.W3(u - h)) / (2 * h);
    CHECK(d1 == doctest::Approx(pp.W2(u)).epsilon(1e-7));
    CHECK(d2 == doctest::Approx(pp.W3(u)).epsilon(1e-7));
    CHECK(d3 == doctest::Approx(pp.W4(u)).epsilon(1e-6));
  }

  // a valid split for max(1, L_m) exists on this truncation
  auto lam = SpectralSpace::brownian_bridge(16, 1).eigenvalues;
  const int n = split_index_for(std::max(1.0, pp.L_m), lam);
  auto sp2 = SpectralSpace::brownian_bridge(16, n);
  auto m = tps_drift(sp2, pp, 0);
  CHECK(m.declared.has_value());
}

TEST_CASE("tps drift demands the sine-basis eigenvalues") {
  auto wrong = SpectralSpace::geometric(0.5, 8, 1);
  CHECK_THROWS(tps_drift(wrong, tps_quadratic_potential(1.0), 0));
}
