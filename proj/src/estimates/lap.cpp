#include <algorithm>
#include <cmath>
#include <limits>

#include "slab/error.hpp"
#include "slab/estimates.hpp"
#include "slab/parallel.hpp"

namespace slab::estimates {

std::vector<double> dyadic_eps(int k_max) {
  std::vector<double> out;
  for (int k = 0; k <= k_max; ++k) out.push_back(std::ldexp(1.0, -k));
  return out;
}

double lap_norm(const quantize::Operator& op, const EvolutionSpec& spec, const LapOptions& options,
                double eps) {
  const Grid& g = op.grid();
  evolve::ResolventQuery q;
  q.d = options.d;
  q.eps = eps;
  q.branch = options.branch;
  q.chi = options.chi;
  const grid::CVec m = evolve::resolvent_multiplier(q, spec, g);
  const grid::CVec mc = m.conjugate();

  // G = A R A^* and G^* = A R^* A^* with A = sigma(X,D).
  const auto apply_adjoint = [&](const Field& w) {
    grid::Spectrum s = grid::transform(op.adjoint(w));
    s.values.array() *= mc.array();
    return op.apply(s);
  };

  const std::size_t trials = static_cast<std::size_t>(std::max(options.trials, 1));
  const auto norms = parallel_map<double>(trials, [&](std::size_t t) {
    std::mt19937_64 rng(trial_seed(options.seed, t));
    std::normal_distribution<double> normal;
    Field v = grid::zeros(g);
    for (Eigen::Index i = 0; i < v.values.size(); ++i) v.values[i] = Complex(normal(rng), normal(rng));
    v.values /= grid::norm(v);
    double lambda = 0.0;
    for (int it = 0; it < options.iterations; ++it) {
      grid::Spectrum s = grid::transform(op.adjoint(v));
      s.values.array() *= m.array();
      const Field w = apply_adjoint(op.apply(s));
      lambda = grid::norm(w);
      if (lambda == 0.0) return 0.0;
      v.values = w.values / lambda;
    }
    return std::sqrt(lambda);
  });
  return *std::max_element(norms.begin(), norms.end());
}

SweepResult lap_sweep(const PhaseSpaceSymbol& sigma, const EvolutionSpec& spec,
                      const LapOptions& options) {
  evolve::validate(spec);
  if (!options.control) {
    const double defect = symbols::orbit_vanishing_defect(sigma, spec.pair, 256, options.seed, true);
    if (defect > quantize::kStructureTol) {
      throw Error(ErrorCode::StructureViolation,
                  "lap_sweep(" + sigma.label + "): symbol does not vanish on the orbit set (defect " +
                      std::to_string(defect) + ")");
    }
  }
  quantize::QuantizeOptions q;
  q.xi_min = options.xi_min;
  const quantize::Operator op(sigma, options.grid, q);

  SweepResult result;
  result.symbol = sigma.label;
  result.p = spec.pair.primal.label();
  result.trials = options.trials;
  for (double eps : options.eps) {
    result.rows.push_back(Row{sigma.label, result.p, options.grid.N, options.grid.L,
                              std::numeric_limits<double>::quiet_NaN(), eps,
                              lap_norm(op, spec, options, eps), true, options.seed});
  }
  result.verdict = classify_lap(result.ratios());
  return result;
}

double spread(const SweepResult& r) {
  const auto v = r.ratios();
  if (v.empty()) return 0.0;
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  return *hi / *lo;
}

Verdict classify_lap(const std::vector<double>& values, double bound, double factor) {
  if (values.size() < 2) return Verdict::Inconclusive;
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  if (*hi <= bound * *lo) return Verdict::Bounded;
  const bool monotone = std::is_sorted(values.begin(), values.end());
  if (monotone && values.back() >= factor * values.front()) return Verdict::Growing;
  return Verdict::Inconclusive;
}

double stabilization_eps(const SweepResult& r, double tol) {
  const auto v = r.ratios();
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  const double last = v.back();
  std::size_t first = v.size() - 1;
  while (first > 0 && std::abs(v[first - 1] - last) <= tol * std::abs(last)) --first;
  if (first == v.size() - 1 && v.size() > 1) return std::numeric_limits<double>::quiet_NaN();
  return r.rows[first].eps;
}

}  // namespace slab::estimates
