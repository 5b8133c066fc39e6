#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "slab/error.hpp"
#include "slab/estimates.hpp"
#include "slab/parallel.hpp"

namespace slab::estimates {

namespace {

// Unit directions and their quadrature weights on S^{n-1}.
void sphere_rule(int dim, int nodes, std::vector<Vec>& dirs, double& weight) {
  if (dim == 1) {
    dirs = {Vec::Constant(1, 1.0), Vec::Constant(1, -1.0)};
    weight = 1.0;
    return;
  }
  dirs = symbols::sphere_points(dim, nodes);
  weight = (dim == 2 ? 2.0 * std::numbers::pi : 4.0 * std::numbers::pi) / nodes;
}

}  // namespace

double surface_norm_squared(const symbols::HomogeneousSymbol& p, const Field& g, double rho,
                            int nodes) {
  const int n = g.grid.n;
  std::vector<Vec> dirs;
  double weight = 0.0;
  sphere_rule(n, nodes, dirs, weight);
  std::vector<Vec> points;
  std::vector<double> scale;
  const double band = g.grid.nyquist();
  for (const Vec& theta : dirs) {
    const double pt = p.value(theta);
    const Vec xi = rho * theta / pt;
    if (xi.cwiseAbs().maxCoeff() >= band) {
      std::ostringstream msg;
      msg << "surface_norm_squared: rho = " << rho << " reaches |xi_i| = " << xi.cwiseAbs().maxCoeff()
          << " beyond the lattice band " << band;
      throw Error(ErrorCode::BandExceeded, msg.str());
    }
    points.push_back(xi);
    scale.push_back(weight * std::pow(pt, -n));
  }
  const grid::CVec values = grid::spectrum_at(g, points);
  double total = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    total += scale[i] * std::norm(values[static_cast<Eigen::Index>(i)]);
  }
  return std::pow(rho, n - 1) * total;
}

double restriction_ratio(const PhaseSpaceSymbol& sigma, const EvolutionSpec& spec, const Field& f,
                         double rho, const RestrictionOptions& options) {
  quantize::QuantizeOptions q;
  q.xi_min = options.xi_min;
  const quantize::Operator op(sigma, f.grid, q);
  const double base = grid::norm(f);
  if (base == 0.0) return 0.0;
  return std::sqrt(surface_norm_squared(spec.pair.primal, op.adjoint(f), rho, options.nodes)) / base;
}

double restriction_norm(const PhaseSpaceSymbol& sigma, const EvolutionSpec& spec, double rho,
                        int trials, std::uint64_t seed, const RestrictionOptions& options,
                        const DataSpec& data) {
  const Grid& g = options.grid;
  if (!g.offset) throw Error(ErrorCode::ConfigInvalid, "restriction_norm: needs an offset grid");
  // Offset grids scale exactly: x_j on [-rho L, rho L) is rho times x_j on [-L, L).
  const Grid wide = grid::make_grid(g.n, g.N, rho * g.L, true);
  quantize::QuantizeOptions q;
  q.xi_min = options.xi_min;
  const quantize::Operator op(sigma, g, q);
  const auto ratios = parallel_map<double>(static_cast<std::size_t>(std::max(trials, 1)), [&](std::size_t t) {
    const Field f{g, random_data(wide, data, trial_seed(seed, t)).values};
    const double base = grid::norm(f);
    if (base == 0.0) return 0.0;
    return std::sqrt(surface_norm_squared(spec.pair.primal, op.adjoint(f), rho, options.nodes)) / base;
  });
  return *std::max_element(ratios.begin(), ratios.end());
}

double duality_check(const PhaseSpaceSymbol& sigma, const EvolutionSpec& spec, const Grid& g,
                     int trials, std::uint64_t seed) {
  evolve::validate(spec);
  const quantize::Operator op(sigma, g);
  const evolve::Propagator prop(spec, g);
  const std::vector<double> times = spec.times();
  const double dt = spec.dt;

  const auto defects = parallel_map<double>(static_cast<std::size_t>(std::max(trials, 1)), [&](std::size_t t) {
    std::mt19937_64 rng(trial_seed(seed, t));
    std::normal_distribution<double> normal;
    auto noise = [&] {
      Field u = grid::zeros(g);
      for (Eigen::Index i = 0; i < u.values.size(); ++i) u.values[i] = Complex(normal(rng), normal(rng));
      return u;
    };
    const Field phi = noise();
    const grid::Spectrum phi_hat = grid::transform(phi);
    Complex lhs = 0.0;
    double v_norm2 = 0.0;
    grid::Spectrum back{g, grid::CVec::Zero(static_cast<Eigen::Index>(g.size()))};
    for (double tj : times) {
      const Field v = noise();
      v_norm2 += dt * std::pow(grid::norm(v), 2);
      lhs += dt * grid::inner(op.apply(prop.at(phi_hat, tj)), v);
      // T^*: undo the propagator phase on sigma^* v_j and sum over the time lattice.
      grid::Spectrum w = grid::transform(op.adjoint(v));
      back.values += dt * prop.at(w, -tj).values;
    }
    const Complex rhs = grid::inner(phi, grid::inverse_transform(back));
    return std::abs(lhs - rhs) / (grid::norm(phi) * std::sqrt(v_norm2));
  });
  return *std::max_element(defects.begin(), defects.end());
}

}  // namespace slab::estimates
