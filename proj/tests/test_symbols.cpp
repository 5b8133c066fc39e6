#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "slab/error.hpp"
#include "slab/symbols.hpp"
#include "support.hpp"

using namespace slab;
using namespace slab::symbols;
using test::vec2;

namespace {

Mat diag(double a, double b) {
  Mat m = Mat::Zero(2, 2);
  m(0, 0) = a;
  m(1, 1) = b;
  return m;
}

// Closed-form curvature of x^2/a^2 + y^2/b^2 = 1 at (a cos t, b sin t).
double ellipse_curvature(double a, double b, double t) {
  const double s = std::sin(t), c = std::cos(t);
  return a * b / std::pow(a * a * s * s + b * b * c * c, 1.5);
}

}  // namespace

TEST_CASE("euclidean values and gradients") {
  const auto p = euclidean(2);
  CHECK(p.value(vec2(3, 4)) == doctest::Approx(5.0).epsilon(1e-15));
  const Vec g = p.gradient(vec2(3, 4));
  CHECK(g[0] == doctest::Approx(0.6));
  CHECK(g[1] == doctest::Approx(0.8));
  CHECK(std::get<double>(p.evaluate(vec2(3, 4), 0)) == doctest::Approx(5.0));
}

TEST_CASE("quadratic form gradient") {
  const auto p = quadratic_form(diag(1, 0.5));
  const Vec g = p.gradient(vec2(0, 1));
  CHECK(std::abs(g[0]) < 1e-14);
  CHECK(g[1] == doctest::Approx(0.5));
}

TEST_CASE("zero frequency is rejected") {
  const auto p = euclidean(2);
  try {
    p.value(Vec::Zero(2));
    FAIL("expected ZeroFrequency");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ZeroFrequency);
  }
  CHECK_THROWS_AS(psi(euclidean_pair(2), Vec::Zero(2)), Error);
}

TEST_CASE("curvature audit") {
  CHECK(curvature_audit(euclidean(2), 256).min_abs_curvature == doctest::Approx(1.0).epsilon(1e-6));

  // Semi-axes 1 along xi_1 and 2 along xi_2: the minimum is 1/4 at (+-1, 0).
  const auto r = curvature_audit(quadratic_form(diag(1, 0.5)), 720);
  double oracle = 1e9;
  for (int k = 0; k < 100000; ++k) oracle = std::min(oracle, ellipse_curvature(1.0, 2.0, 2.0 * M_PI * k / 100000));
  CHECK(oracle == doctest::Approx(0.25).epsilon(1e-9));
  CHECK(r.min_abs_curvature == doctest::Approx(oracle).epsilon(1e-5));
  CHECK(std::abs(std::abs(r.worst_point[0]) - 1.0) < 1e-4);
  CHECK(r.passed);

  const auto q = curvature_audit(quartic(2), 720);
  CHECK(q.min_abs_curvature < kKappaMin);
  CHECK_FALSE(q.passed);
}

TEST_CASE("curvature matches the closed form along the ellipse") {
  const auto p = quadratic_form(diag(1, 0.5));
  for (double t : {0.1, 0.7, 1.3, 2.9}) {
    const Vec xi = vec2(std::cos(t), 2.0 * std::sin(t));
    CHECK(std::abs(gaussian_curvature(p, xi)) == doctest::Approx(ellipse_curvature(1.0, 2.0, t)).epsilon(1e-5));
  }
}

TEST_CASE("dual pairs") {
  CHECK(euclidean_pair(2).dual.value(vec2(3, 4)) == doctest::Approx(5.0));
  const auto p = quadratic_form(diag(1, 0.5));
  CHECK(quadratic_pair(diag(1, 0.5)).dual.value(vec2(0, 1)) == doctest::Approx(2.0));
  const auto built = make_dual(p, curvature_audit(p, 256));
  CHECK(built.construction == DualConstruction::SupportFunction);
  CHECK(built.dual.value(vec2(0, 1)) == doctest::Approx(2.0).epsilon(1e-6));

  CHECK_THROWS_AS(make_dual(p, std::nullopt), Error);
  try {
    make_dual(quartic(2), curvature_audit(quartic(2), 1000));
    FAIL("expected CurvatureUnchecked");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::CurvatureUnchecked);
  }
}

TEST_CASE("perturbed dual satisfies p*(grad p) = 1") {
  const auto p = perturbed(2, 0.05);
  const auto pair = make_dual(p, curvature_audit(p, 256));
  std::mt19937_64 rng(7);
  double worst = 0;
  for (int s = 0; s < 200; ++s) {
    const Vec xi = test::random_vec(rng, 2);
    worst = std::max(worst, std::abs(pair.dual.value(p.gradient(xi)) - 1.0));
  }
  CHECK(worst <= 1e-6);
}

TEST_CASE("psi examples") {
  const auto e = euclidean_pair(2);
  const Vec a = psi(e, vec2(1, 2));
  CHECK((a - vec2(1, 2)).norm() < 1e-14);
  const auto q = quadratic_pair(diag(1, 0.5));
  CHECK((psi(q, vec2(0, 1)) - vec2(0, 0.5)).norm() < 1e-14);
  CHECK((psi_inv(q, vec2(0, 0.5)) - vec2(0, 1)).norm() < 1e-14);
}

TEST_CASE("property: |psi| = p, p(psi^-1) = |xi| and round trips") {
  std::mt19937_64 rng(11);
  for (const auto& pair : {euclidean_pair(2), quadratic_pair(diag(1, 0.5)), test::ellipse_pair()}) {
    for (int s = 0; s < 100; ++s) {
      const Vec xi = test::random_vec(rng, 2) * std::ldexp(1.0, s % 9 - 4);
      CHECK(psi(pair, xi).norm() == doctest::Approx(pair.primal.value(xi)).epsilon(1e-8));
      CHECK(pair.primal.value(psi_inv(pair, xi)) == doctest::Approx(xi.norm()).epsilon(1e-8));
      CHECK((psi(pair, psi_inv(pair, xi)) - xi).norm() <= 1e-8 * xi.norm());
      CHECK((psi_inv(pair, psi(pair, xi)) - xi).norm() <= 1e-8 * xi.norm());
    }
  }
}

TEST_CASE("property: Euler identity and radial Hessian kernel") {
  std::mt19937_64 rng(5);
  for (const auto& p : {euclidean(2), quadratic_form(diag(1, 0.5)), perturbed(2, 0.05)}) {
    for (int s = 0; s < 100; ++s) {
      const Vec xi = test::random_vec(rng, 2) * std::ldexp(1.0, 4 * (s % 3) - 4);
      CHECK(std::abs(p.gradient(xi).dot(xi) - p.value(xi)) <= 1e-8 * p.value(xi));
      const Mat h = p.hessian(xi);
      CHECK((h * xi).norm() <= 1e-6 * h.norm() * xi.norm());
      // rank n - 1
      Eigen::JacobiSVD<Mat> svd(h);
      const auto sv = svd.singularValues();
      CHECK(sv[1] <= 1e-6 * sv[0]);
    }
  }
}

TEST_CASE("omega examples") {
  const auto e = euclidean_pair(2);
  const Vec w = omega(e, vec2(1, 0), vec2(0, 1));
  REQUIRE(w.size() == 1);
  CHECK(w[0] == doctest::Approx(1.0));
  CHECK(omega(e, Vec::Zero(2), vec2(0.3, 1)).norm() == 0.0);
  // Euclidean: Omega = x ^ xi.
  std::mt19937_64 rng(3);
  for (int s = 0; s < 50; ++s) {
    const Vec x = test::random_vec(rng, 2), xi = test::random_vec(rng, 2);
    CHECK(omega(e, x, xi)[0] == doctest::Approx(x[0] * xi[1] - x[1] * xi[0]).epsilon(1e-8));
  }
  CHECK(wedge_size(3) == 3);
  CHECK((wedge(vec2(1, 0), vec2(0, 1)) - Vec::Ones(1)).norm() == 0.0);
}

TEST_CASE("property: Omega is linear in x and homogeneous of order 1 in xi") {
  const auto pair = test::ellipse_pair();
  std::mt19937_64 rng(9);
  for (int s = 0; s < 50; ++s) {
    const Vec x = test::random_vec(rng, 2), y = test::random_vec(rng, 2), xi = test::random_vec(rng, 2);
    const Vec lin = omega(pair, 2.0 * x + y, xi) - 2.0 * omega(pair, x, xi) - omega(pair, y, xi);
    CHECK(lin.norm() <= 1e-8 * (1 + omega(pair, x, xi).norm()));
    CHECK((omega(pair, x, 3.0 * xi) - 3.0 * omega(pair, x, xi)).norm() <= 1e-7 * (1 + omega(pair, x, xi).norm()));
  }
}

TEST_CASE("orbit membership") {
  const auto e = euclidean_pair(2);
  const Vec xi0 = vec2(0.4, -1.1);
  const auto on = gamma_p_membership(e, 2.0 * e.primal.gradient(xi0), xi0);
  CHECK(on.residual <= 1e-12);
  CHECK(on.member);
  const auto off = gamma_p_membership(e, vec2(1, 0), vec2(0, 1));
  CHECK(off.residual == doctest::Approx(1.0));
  CHECK_FALSE(off.member);
  CHECK(gamma_p_membership(e, Vec::Zero(2), vec2(0, 1)).member);
}

TEST_CASE("property: orbit points are members, both signs of lambda") {
  std::mt19937_64 rng(21);
  for (const auto& pair : {euclidean_pair(2), test::ellipse_pair()}) {
    for (int s = 0; s < 100; ++s) {
      const Vec k = test::random_vec(rng, 2);
      const double t = std::uniform_real_distribution<double>(-3, 3)(rng);
      const auto o = orbit(pair, k, t);
      CHECK(gamma_p_membership(pair, o.x, o.xi).member);
    }
  }
}

TEST_CASE("orbit examples") {
  const auto e = euclidean_pair(2);
  const auto o = orbit(e, vec2(1, 0), 0.5);
  CHECK((o.x - vec2(1, 0)).norm() < 1e-14);
  CHECK(orbit(e, vec2(1, 0), 0.0).x.norm() == 0.0);
}

TEST_CASE("tau examples") {
  const auto e = euclidean_pair(2);
  CHECK(tau_symbol(e, vec2(1, 0), vec2(0, 1)) == doctest::Approx(1.0));
  const Vec xi = vec2(0.3, 0.8);
  CHECK(std::abs(tau_symbol(e, 1.7 * e.primal.gradient(xi), xi)) < 1e-12);
  const auto q = test::ellipse_pair();
  const Vec x = vec2(0.2, -1.3), k = vec2(1.1, 0.4);
  CHECK(tau_symbol(q, 2.0 * x, 3.0 * k) == doctest::Approx(36.0 * tau_symbol(q, x, k)).epsilon(1e-9));
  CHECK(tau_symbol(q, x, k) >= 0.0);
  CHECK_THROWS_AS(tau_symbol(q, Vec::Zero(2), k), Error);
}

TEST_CASE("property: tau is |x ^ xi|^2 for the euclidean pair") {
  const auto e = euclidean_pair(2);
  std::mt19937_64 rng(13);
  for (int s = 0; s < 50; ++s) {
    const Vec x = test::random_vec(rng, 2), xi = test::random_vec(rng, 2);
    const double w = x[0] * xi[1] - x[1] * xi[0];
    CHECK(tau_symbol(e, x, xi) == doctest::Approx(w * w).epsilon(1e-8));
  }
}

TEST_CASE("structured sigma") {
  const auto e = euclidean_pair(2);
  const auto s = structured_sigma(e);
  CHECK(s.order_x == -0.5);
  CHECK(s.order_xi == 0.5);
  CHECK(std::abs(s(vec2(1, 0), vec2(0, 2))) == doctest::Approx(std::sqrt(2.0)));
  const Vec x = vec2(0.6, 1.1), xi = vec2(-0.4, 2.2);
  CHECK(std::abs(s(4.0 * x, xi)) == doctest::Approx(0.5 * std::abs(s(x, xi))));
  const auto q = test::ellipse_pair();
  const auto sq = structured_sigma(q);
  CHECK(std::abs(sq(q.primal.gradient(xi), xi)) < 1e-12);
  CHECK(orbit_vanishing_defect(sq, q, 500, 3, true) <= 1e-10);
  CHECK(orbit_vanishing_defect(critical_sigma(2), q, 50, 3) > 1e-3);
}

TEST_CASE("symbol registry") {
  CHECK(parse_symbol("euclidean", 2).value(vec2(3, 4)) == doctest::Approx(5.0));
  CHECK(parse_symbol("quadratic-form:A=[1,0;0,0.5]", 2).value(vec2(0, 2)) == doctest::Approx(1.0));
  CHECK(parse_symbol("perturbed:amp=0.05", 2).value(vec2(1, 0)) == doctest::Approx(1.05));
  CHECK_THROWS_AS(parse_symbol("hyperbolic", 2), Error);
  CHECK(parse_quadratic_matrix("quadratic-form:A=[1,0;0,0.5]")(1, 1) == 0.5);
}

TEST_CASE("three-dimensional interfaces") {
  const auto pair = euclidean_pair(3);
  Vec xi(3);
  xi << 0.3, -0.2, 1.0;
  CHECK((psi(pair, xi) - xi).norm() < 1e-12);
  CHECK(omega(pair, xi, xi).norm() < 1e-12);
  CHECK(sphere_points(3, 50).size() == 50u);
}
