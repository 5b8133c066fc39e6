#include <cmath>

#include "slab/error.hpp"
#include "slab/quantize.hpp"

namespace slab::quantize {

namespace {

Vec rotate(const Vec& x, double angle) {
  Vec y = x;
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  y[0] = c * x[0] - s * x[1];
  y[1] = s * x[0] + c * x[1];
  return y;
}

bool inside_box(const Grid& g, const Vec& y) {
  for (int a = 0; a < g.n; ++a) {
    if (!(y[a] >= -g.L && y[a] < g.L)) return false;
  }
  return true;
}

}  // namespace

Vec VarMap::forward(const Vec& x) const {
  switch (kind) {
    case Kind::Identity: return x;
    case Kind::Rotation: return rotate(x, angle);
    case Kind::Sector: {
      const Eigen::Index n = x.size();
      Vec y = x;
      const double tangential = x.head(n - 1).squaredNorm();
      y[n - 1] = std::sqrt(std::max(0.0, x[n - 1] * x[n - 1] - tangential));
      return y;
    }
  }
  return x;
}

Vec VarMap::inverse(const Vec& y) const {
  switch (kind) {
    case Kind::Identity: return y;
    case Kind::Rotation: return rotate(y, -angle);
    case Kind::Sector: {
      const Eigen::Index n = y.size();
      Vec x = y;
      x[n - 1] = std::sqrt(y[n - 1] * y[n - 1] + y.head(n - 1).squaredNorm());
      return x;
    }
  }
  return y;
}

bool VarMap::in_domain(const Vec& x) const {
  if (kind != Kind::Sector) return true;
  const Eigen::Index n = x.size();
  return x[n - 1] > x.head(n - 1).norm();
}

bool VarMap::in_range(const Vec& y) const {
  if (kind != Kind::Sector) return true;
  return y[y.size() - 1] > 0.0;
}

Complex interpolate(const Field& u, const Vec& x, int nodes) {
  const Grid& g = u.grid;
  if (nodes != 4 && nodes != 6) throw Error(ErrorCode::InvalidSize, "interpolate: nodes must be 4 or 6");
  const double shift = g.offset ? 0.5 : 0.0;
  const int back = nodes / 2 - 1;
  std::vector<std::vector<int>> idx(g.n, std::vector<int>(nodes));
  std::vector<std::vector<double>> w(g.n, std::vector<double>(nodes));
  for (int a = 0; a < g.n; ++a) {
    const double t = (x[a] + g.L) / g.h() - shift;
    const int base = static_cast<int>(std::floor(t));
    for (int q = 0; q < nodes; ++q) {
      const int node = base - back + q;
      idx[a][q] = ((node % g.N) + g.N) % g.N;
      double lw = 1.0;
      for (int r = 0; r < nodes; ++r) {
        if (r == q) continue;
        const int other = base - back + r;
        lw *= (t - other) / static_cast<double>(node - other);
      }
      w[a][q] = lw;
    }
  }
  // Sum over the tensor stencil; axis 0 is the slowest index.
  Complex acc = 0.0;
  std::vector<int> q(g.n, 0);
  while (true) {
    std::size_t flat = 0;
    double weight = 1.0;
    for (int a = 0; a < g.n; ++a) {
      flat = flat * static_cast<std::size_t>(g.N) + static_cast<std::size_t>(idx[a][q[a]]);
      weight *= w[a][q[a]];
    }
    acc += weight * u.values[static_cast<Eigen::Index>(flat)];
    int a = g.n - 1;
    while (a >= 0 && ++q[a] == nodes) q[a--] = 0;
    if (a < 0) break;
  }
  return acc;
}

Field apply_change_of_vars(const VarMap& kappa, const Weight& gamma, const Field& u,
                           Direction direction, double* monitor) {
  const Grid& g = u.grid;
  if (kappa.kind == VarMap::Kind::Rotation && g.n < 2) {
    throw Error(ErrorCode::InvalidSize, "apply_change_of_vars: rotation needs n >= 2");
  }
  Field out = grid::zeros(g);
  double worst = 0.0;
  for (std::size_t j = 0; j < g.size(); ++j) {
    const Vec x = g.point(j);
    double c = 0.0;
    Vec source;
    if (direction == Direction::Forward) {
      // gamma must live inside the range of kappa.
      if (gamma(x) != 0.0 && !kappa.in_range(x)) {
        throw Error(ErrorCode::OutOfSector, "apply_change_of_vars: gamma reaches outside the sector");
      }
      if (!kappa.in_domain(x)) continue;
      source = kappa.forward(x);
      c = gamma(source);
    } else {
      c = gamma(x);
      if (c == 0.0) continue;
      if (!kappa.in_range(x)) {
        throw Error(ErrorCode::OutOfSector, "apply_change_of_vars: gamma reaches outside the sector");
      }
      source = kappa.inverse(x);
    }
    if (c == 0.0) continue;
    if (!inside_box(g, source)) {
      throw Error(ErrorCode::OutOfSector, "apply_change_of_vars: source point leaves the box");
    }
    const Complex cubic = interpolate(u, source, 4);
    if (monitor) worst = std::max(worst, std::abs(cubic - interpolate(u, source, 6)));
    out.values[static_cast<Eigen::Index>(j)] = c * cubic;
  }
  if (monitor) *monitor = worst;
  return out;
}

}  // namespace slab::quantize
