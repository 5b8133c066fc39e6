#include <cmath>
#include <sstream>

#include "slab/error.hpp"
#include "slab/estimates.hpp"
#include "slab/parallel.hpp"

namespace slab::estimates {

namespace {

constexpr double kExponentTol = 1e-12;

void check_exponents(double gamma, double delta, double m, int n) {
  const double half = 0.5 * n;
  if (!(gamma < half) || !(delta < half) || !(m < n) ||
      std::abs(gamma + delta + m - n) > kExponentTol) {
    std::ostringstream msg;
    msg << "hardy_littlewood_oracle: needs gamma < n/2, delta < n/2, m < n and gamma + delta + m = n"
        << " (got " << gamma << ", " << delta << ", " << m << " with n = " << n << ")";
    throw Error(ErrorCode::ExponentViolation, msg.str());
  }
}

double beta(double a, double b) { return std::exp(std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b)); }

}  // namespace

double hardy_littlewood_oracle(double gamma, double delta, double m, const Field& f) {
  const Grid& g = f.grid;
  check_exponents(gamma, delta, m, g.n);
  if (!g.offset) throw Error(ErrorCode::ConfigInvalid, "hardy_littlewood_oracle: needs an offset grid");
  for (Eigen::Index j = 0; j < f.values.size(); ++j) {
    if (f.values[j].imag() != 0.0 || f.values[j].real() < 0.0) {
      throw Error(ErrorCode::ConfigInvalid, "hardy_littlewood_oracle: f must be real and non-negative");
    }
  }
  const double base = grid::norm(f);
  if (base == 0.0) return 0.0;

  const std::size_t P = g.size();
  const double cell = std::pow(g.h(), g.n);
  const Vec shift = Vec::Constant(g.n, 0.25 * g.h());
  std::vector<Vec> ys;
  std::vector<double> fy;
  for (std::size_t j = 0; j < P; ++j) {
    const double v = f.values[static_cast<Eigen::Index>(j)].real();
    if (v == 0.0) continue;
    const Vec y = g.point(j) - shift;
    ys.push_back(y);
    fy.push_back(cell * v * std::pow(y.norm(), -delta));
  }
  const auto rows = parallel_map<double>(P, [&](std::size_t i) {
    const Vec x = g.point(i) + shift;
    double acc = 0.0;
    for (std::size_t j = 0; j < ys.size(); ++j) acc += fy[j] * std::pow((x - ys[j]).norm(), -m);
    acc *= std::pow(x.norm(), -gamma);
    return cell * acc * acc;
  });
  double total = 0.0;
  for (double r : rows) total += r;
  return std::sqrt(total) / base;
}

double hardy_littlewood_bound_1d(double gamma, double m) {
  check_exponents(gamma, gamma, m, 1);
  // Schur test with |y|^{-1/2}; a = 1/2 - gamma splits the integral into Beta functions.
  const double a = 0.5 - gamma;
  return beta(a, 1.0 - m) + beta(m - a, 1.0 - m) + beta(a, m - a);
}

}  // namespace slab::estimates
