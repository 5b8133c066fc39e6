#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

#include "slab/error.hpp"
#include "slab/estimates.hpp"
#include "slab/quantize.hpp"
#include "support.hpp"

using namespace slab;
using namespace slab::quantize;
using test::vec2;

namespace {

Field gaussian(const Grid& g) {
  return grid::sample(g, [](const Vec& x) -> Complex { return std::exp(-0.5 * x.squaredNorm()); });
}

// x_1 xi_1 with its one-term expansion.
PhaseSpaceSymbol x1_xi1() {
  PhaseSpaceSymbol s;
  s.label = "x1*xi1";
  s.order_x = 1;
  s.order_xi = 1;
  s.value = [](const Vec& x, const Vec& xi) -> Complex { return x[0] * xi[0]; };
  s.terms = {{[](const Vec& x) -> Complex { return x[0]; }, [](const Vec& xi) -> Complex { return xi[0]; }}};
  return s;
}

double bracket(const Vec& v) { return std::sqrt(1.0 + v.squaredNorm()); }

}  // namespace

TEST_CASE("apply_multiplier") {
  const Grid g = grid::make_grid(2, 64, 16.0, true);
  const Field u = test::noise(g, 1);
  CHECK(test::rel_diff(apply_multiplier([](const Vec&) -> Complex { return 1.0; }, u), u) <= 1e-14);

  // Unimodular multipliers preserve the norm.
  const Field v = apply_multiplier([](const Vec& xi) { return std::polar(1.0, xi[0] * xi[1]); }, u);
  CHECK(std::abs(grid::norm(v) / grid::norm(u) - 1.0) <= 1e-12);

  // exp(-i t |xi|^2) on a Gaussian: (1 + 2it)^{-1} exp(-|x|^2 / (2 (1 + 2it))).
  const Grid w = grid::make_grid(2, 128, 16.0, true);
  const double t = 0.7;
  const Complex a(1.0, 2.0 * t);
  const Field out = apply_multiplier([t](const Vec& xi) { return std::polar(1.0, -t * xi.squaredNorm()); }, gaussian(w));
  const Field exact = grid::sample(w, [&](const Vec& x) { return std::exp(-0.5 * x.squaredNorm() / a) / a; });
  CHECK(test::rel_diff(out, exact) <= 1e-8);

  CHECK_THROWS_AS(apply_multiplier([](const Vec&) -> Complex { return std::nan(""); }, u), Error);
}

TEST_CASE("apply_pseudo agrees with multipliers and factorized compositions") {
  const Grid g = grid::make_grid(2, 32, 8.0, true);
  const Field u = test::packet(g, vec2(0.3, -0.2), 1.2, vec2(1.0, 0.5));
  const auto m = [](const Vec& xi) -> Complex { return std::exp(-xi.squaredNorm()) * Complex(1.0, xi[0]); };
  QuantizeOptions plain;
  plain.xi_min = 0.0;
  const auto sym = symbols::multiplier_symbol("m", m);
  CHECK(test::rel_diff(apply_pseudo(sym, u, plain), apply_multiplier(m, u)) <= 1e-12);
  QuantizeOptions direct = plain;
  direct.force_direct = true;
  CHECK(test::rel_diff(apply_pseudo(sym, u, direct), apply_multiplier(m, u)) <= 1e-12);

  // x_1 xi_1: pointwise x_1 times D_1 u with D_1 spectral.
  Field d1 = apply_multiplier([](const Vec& xi) -> Complex { return xi[0]; }, u);
  for (std::size_t j = 0; j < g.size(); ++j) d1.values[static_cast<Eigen::Index>(j)] *= g.point(j)[0];
  CHECK(test::rel_diff(apply_pseudo(x1_xi1(), u, plain), d1) <= 1e-10);
  CHECK(test::rel_diff(apply_pseudo(x1_xi1(), u, direct), d1) <= 1e-10);
}

TEST_CASE("property: apply_pseudo is linear and its adjoint is consistent") {
  const Grid g = grid::make_grid(2, 16, 4.0, true);
  const auto pair = test::ellipse_pair();
  const auto sigma = symbols::structured_sigma(pair);
  const Operator op(sigma, g);
  const Field u = test::noise(g, 5), v = test::noise(g, 6);
  const Complex c(0.3, -1.2);
  const Field lhs = op.apply(Field{g, u.values + c * v.values});
  const Field rhs{g, op.apply(u).values + c * op.apply(v).values};
  CHECK(test::rel_diff(lhs, rhs) <= 1e-12);
  const Complex a = grid::inner(op.apply(u), v);
  const Complex b = grid::inner(u, op.adjoint(v));
  CHECK(std::abs(a - b) <= 1e-10 * std::abs(a));
}

TEST_CASE("Omega_12 is the rotation generator for the euclidean pair") {
  const auto pair = symbols::euclidean_pair(2);
  const Grid g = grid::make_grid(2, 64, 10.0, true);
  QuantizeOptions plain;
  plain.xi_min = 0.0;
  const auto om = symbols::omega_symbol(pair, 0, 1);
  // Radial fields are annihilated.
  const Field radial = gaussian(g);
  CHECK(grid::norm(apply_pseudo(om, radial, plain)) <= 1e-8 * grid::norm(radial));
  // (x_1 + i x_2)^k e^{-|x|^2/2} = r^k e^{ik theta} e^{-r^2/2} has eigenvalue k.
  for (int k : {1, 2, 3}) {
    const Field u = grid::sample(g, [k](const Vec& x) {
      return std::pow(Complex(x[0], x[1]), k) * std::exp(-0.5 * x.squaredNorm());
    });
    CHECK(test::rel_diff(apply_pseudo(om, u, plain), Field{g, static_cast<double>(k) * u.values}) <= 1e-6);
  }
}

TEST_CASE("low-rank factorization") {
  const Grid g = grid::make_grid(2, 16, 4.0, true);
  const LowRank lr = factorize(x1_xi1(), g);
  CHECK(lr.fx.size() == 1u);
  const Field u = test::noise(g, 9);
  QuantizeOptions plain;
  plain.xi_min = 0.0;
  CHECK(test::rel_diff(apply_low_rank(lr, u), apply_pseudo(x1_xi1(), u, plain)) <= 1e-10);
}

TEST_CASE("canonical transform") {
  const Grid g = grid::make_grid(2, 128, 24.0, true);
  const Field u = test::packet(g, vec2(0.2, 0.1), 3.0, vec2(2.4, 1.2));
  // psi = id for the euclidean pair, gamma = 1 on the band of u.
  const CanonicalPlan id(symbols::euclidean_pair(2), grid::annular(0.05, 0.1, 6.0, 7.0), Direction::Forward, g);
  CHECK(test::rel_diff(id.apply(u), u) <= 1e-10);

  const auto pair = test::ellipse_pair();
  const grid::Cutoff gamma = grid::annular(0.1, 0.4, 4.6, 5.0);
  const Grid w = grid::make_grid(2, 128, 40.0, true);
  const CanonicalPlan forward(pair, gamma, Direction::Forward, w);
  const CanonicalPlan partner = partner_plan(forward);
  CHECK(partner.direction() == Direction::Inverse);
  const Field v = test::packet(w, vec2(0.5, -0.3), 3.0, vec2(0.0, 2.5));
  const Field rhs = apply_multiplier([&](const Vec& xi) -> Complex { return std::pow(gamma(xi), 2); }, v);
  CHECK(test::rel_diff(forward.apply(partner.apply(v)), rhs) <= 1e-8);
}

TEST_CASE("canonical transform reports leakage") {
  const Grid g = grid::make_grid(2, 32, 8.0, true);
  CanonicalPlan plan(test::ellipse_pair(), grid::annular(0.5, 1.5, 2.0, 3.0), Direction::Forward, g);
  const Field u = test::packet(g, Vec::Zero(2), 1.0, vec2(1.0, 0.0));
  double leak = 0;
  plan.apply(u, &leak);
  CHECK(leak > 0.01);
  plan.leakage_limit = 0.01;
  try {
    plan.apply(u);
    FAIL("expected CutoffLeakage");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::CutoffLeakage);
  }
}

TEST_CASE("change of variables") {
  const Grid g = grid::make_grid(2, 64, 8.0, true);
  const Field u = test::packet(g, vec2(2.0, 0.5), 0.8, vec2(0.3, 0.0));
  const grid::Cutoff bump = grid::radial_bump(vec2(2.0, 0.5), 1.0, 3.0);
  // Identity map: gamma u.
  Field gu = u;
  for (std::size_t j = 0; j < g.size(); ++j) gu.values[static_cast<Eigen::Index>(j)] *= bump(g.point(j));
  CHECK(test::rel_diff(apply_change_of_vars(VarMap{}, bump, u), gu) <= 1e-14);

  // A quarter turn maps the offset lattice onto itself: exact relocation.
  const VarMap quarter{VarMap::Kind::Rotation, std::numbers::pi / 2};
  const grid::Cutoff one = grid::radial_bump(Vec::Zero(2), 20.0, 30.0);
  const Field r = apply_change_of_vars(quarter, one, u);
  CHECK(std::abs(grid::norm(r) / grid::norm(u) - 1.0) <= 1e-8);
  const Vec moved = quarter.inverse(vec2(2.0, 0.5));
  double peak = 0;
  Vec at;
  for (std::size_t j = 0; j < g.size(); ++j) {
    if (std::abs(r.values[static_cast<Eigen::Index>(j)]) > peak) {
      peak = std::abs(r.values[static_cast<Eigen::Index>(j)]);
      at = g.point(j);
    }
  }
  CHECK((at - moved).norm() <= g.h());

  // Sector map round trip: kappa(kappa^{-1}(y)) = y.
  const VarMap sector{VarMap::Kind::Sector, 0.0};
  const Vec y = vec2(0.4, 1.7);
  CHECK((sector.forward(sector.inverse(y)) - y).norm() <= 1e-14);
  CHECK_FALSE(sector.in_domain(vec2(2.0, 1.0)));

  // Support reaching outside the sector.
  try {
    apply_change_of_vars(sector, grid::radial_bump(vec2(0.0, 1.0), 0.5, 2.0), u);
    FAIL("expected OutOfSector");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::OutOfSector);
  }
}

TEST_CASE("commutator residual") {
  const auto pair = symbols::euclidean_pair(2);
  const Grid g = grid::make_grid(2, 128, 12.0, true);
  const Field u = estimates::random_data(g, estimates::DataSpec{4, 1.0, 8.0, 14.0, 16.0}, 3);
  const std::function<double(double)> h = [](double s) { return std::exp(-s * s / 72.0); };
  CHECK(commutator_residual(pair, 0, 1, h, u) <= 1e-7);
  const Multiplier not_p = [h](const Vec& xi) -> Complex { return h(xi[0]); };
  CHECK(commutator_residual(symbols::omega_symbol(pair, 0, 1), not_p, u) >= 1e-2);

  // Radial data: both products vanish on their own.
  const Field radial = grid::sample(g, [](const Vec& x) -> Complex { return std::exp(-0.5 * x.squaredNorm()); });
  QuantizeOptions plain;
  plain.xi_min = 0.0;
  const auto om = symbols::omega_symbol(pair, 0, 1);
  const Multiplier hp = [h](const Vec& xi) -> Complex { return h(xi.norm()); };
  CHECK(grid::norm(apply_pseudo(om, apply_multiplier(hp, radial), plain)) <= 1e-8 * grid::norm(radial));
  CHECK(grid::norm(apply_multiplier(hp, apply_pseudo(om, radial, plain))) <= 1e-8 * grid::norm(radial));
}

TEST_CASE("class audit") {
  const auto x_half = [](const Vec& x, const Vec&, const Vec&) -> Complex { return std::pow(bracket(x), 0.5); };
  const auto wobble = [](const Vec& x, const Vec&, const Vec&) -> Complex {
    return std::pow(bracket(x), 0.5) * std::sin(x.norm());
  };
  const auto spin = [](const Vec& x, const Vec&, const Vec&) -> Complex {
    return bracket(x) * std::polar(1.0, x.norm());
  };
  const AmplitudeClass a{Family::A, 0.5, 0.0, 0.0};
  const AmplitudeClass b{Family::B, 0.5, 0.0, 0.0};
  CHECK(class_audit(x_half, 2, a, 200, 1).passed);
  // The x-derivative of sin|x| does not decay, and B asks for the same x gain as A.
  CHECK_FALSE(class_audit(wobble, 2, a, 200, 1).passed);
  CHECK_FALSE(class_audit(wobble, 2, b, 200, 1).passed);
  CHECK(class_audit(wobble, 2, AmplitudeClass{Family::R, 0.5, 0.0, 0.0}, 200, 1).passed);
  CHECK_FALSE(class_audit(spin, 2, AmplitudeClass{Family::B, 1.0, 0.0, 0.0}, 200, 1).passed);
  CHECK(class_audit(spin, 2, AmplitudeClass{Family::R, 1.0, 0.0, 0.0}, 200, 1).passed);
}

TEST_CASE("property: a passing A audit passes B and R") {
  const auto amp = [](const Vec& x, const Vec& y, const Vec& xi) -> Complex {
    return std::pow(bracket(x), 0.5) * std::pow(bracket(y), -0.5) / (1.0 + xi.squaredNorm());
  };
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    for (Family f : {Family::A, Family::B, Family::R}) {
      CHECK(class_audit(amp, 2, AmplitudeClass{f, 0.5, -0.5, 0.0}, 100, seed).passed);
    }
  }
}

TEST_CASE("fio boundedness") {
  const Grid g = grid::make_grid(2, 64, 48.0, true);
  const auto family = dilation_family(g, [](const Vec& x) -> Complex { return std::exp(-0.5 * x.squaredNorm()); });
  const auto one = [](const Vec&) -> Complex { return 1.0; };
  Fio t;
  t.terms = {{one, one, one}};
  const auto seq = fio_bound_ratio(t, 0.0, 0.0, family, {1, 2, 4, 8});
  for (double r : seq.ratios) CHECK(r == doctest::Approx(std::pow(2.0 * std::numbers::pi, 2)).epsilon(1e-10));
  CHECK(seq.bounded());
}

TEST_CASE("egorov residual vanishes for psi = id and x-independent a") {
  const Grid g = grid::make_grid(2, 32, 16.0, true);
  const CanonicalPlan plan(symbols::euclidean_pair(2), grid::annular(0.3, 0.5, 2.0, 2.6), Direction::Forward, g);
  const auto a = symbols::multiplier_symbol("m", [](const Vec& xi) -> Complex { return Complex(xi[0], xi.squaredNorm()); }, 2.0);
  const auto waves = [g](double lambda) { return test::packet(g, Vec::Zero(2), lambda, vec2(1.2, 0.4)); };
  // gamma_0 = 1 on the support of gamma.
  const auto seq = egorov_residual(a, grid::annular(0.2, 0.3, 2.6, 3.0), plan, 0.5, waves, {1, 2, 4});
  for (double r : seq.ratios) CHECK(r <= 1e-8);
}

TEST_CASE("basic inequality") {
  const auto pair = test::ellipse_pair();
  const Grid g = grid::make_grid(2, 32, 24.0, true);
  const auto family = dilation_family(g, [](const Vec& x) -> Complex { return std::exp(-0.5 * x.squaredNorm()); });
  try {
    basiclem_ratio(pair, symbols::critical_sigma(2), -0.5, family, {1, 2});
    FAIL("expected StructureViolation");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::StructureViolation);
  }
  // tau times an annular cutoff in xi, order 2 in x. Modulated packets keep
  // the spectrum inside the annulus as lambda grows.
  const grid::Cutoff annulus = grid::annular(0.3, 0.5, 1.5, 2.0);
  const auto tau = symbols::with_frequency_factor(symbols::tau_phase_symbol(pair), annulus, "*annulus");
  const FieldFamily waves = [g](double lambda) { return test::packet(g, Vec::Zero(2), lambda, vec2(1.0, 0.3)); };
  CHECK(basiclem_ratio(pair, tau, 2.0, waves, {1, 2, 4, 8}).bounded());
}
