#pragma once

#include <cmath>
#include <complex>
#include <random>

#include "slab/grid.hpp"
#include "slab/symbols.hpp"

namespace slab::test {

inline symbols::DualPair ellipse_pair() {
  Mat a(2, 2);
  a << 1.0, 0.0, 0.0, 0.5;
  return symbols::quadratic_pair(a);
}

inline Vec vec2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

/// Gaussian packet exp(-|x - c|^2 / (2 w^2) + i k.x).
inline grid::Field packet(const grid::Grid& g, const Vec& center, double width, const Vec& carrier) {
  return grid::sample(g, [&](const Vec& x) {
    return std::polar(std::exp(-0.5 * (x - center).squaredNorm() / (width * width)), carrier.dot(x));
  });
}

inline grid::Field noise(const grid::Grid& g, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  grid::Field u = grid::zeros(g);
  for (Eigen::Index i = 0; i < u.values.size(); ++i) u.values[i] = Complex(normal(rng), normal(rng));
  return u;
}

inline Vec random_vec(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> normal;
  Vec v(n);
  for (int i = 0; i < n; ++i) v[i] = normal(rng);
  return v;
}

inline double rel_diff(const grid::Field& a, const grid::Field& b) {
  return grid::norm(grid::Field{a.grid, a.values - b.values}) / grid::norm(b);
}

}  // namespace slab::test
