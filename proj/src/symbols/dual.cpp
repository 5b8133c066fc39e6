#include <cmath>
#include <random>

#include "slab/error.hpp"
#include "slab/symbols.hpp"

namespace slab::symbols {

namespace {

double support_objective(const HomogeneousSymbol& p, const Vec& x, const Vec& u) {
  return x.dot(u) / p.value(u);
}

// Riemannian gradient of u -> x.u / p(u) on the unit sphere.
Vec tangent_gradient(const HomogeneousSymbol& p, const Vec& x, const Vec& u) {
  const double pu = p.value(u);
  const Vec g = x / pu - (x.dot(u) / (pu * pu)) * p.gradient(u);
  return g - g.dot(u) * u;
}

}  // namespace

Vec support_point(const HomogeneousSymbol& p, const Vec& x, const DualOptions& options) {
  const int n = p.dim();
  const double xn = x.norm();
  if (!(xn >= kXiFloor)) throw Error(ErrorCode::ZeroFrequency, "support_point: |x| below floor");
  const Vec xhat = x / xn;

  // Multi-start: the direction of x itself plus seeded random directions.
  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> normal;
  Vec best = xhat;
  double best_f = support_objective(p, x, xhat);
  for (int s = 0; s < options.starts; ++s) {
    Vec u(n);
    for (int i = 0; i < n; ++i) u[i] = normal(rng);
    u.normalize();
    const double f = support_objective(p, x, u);
    if (f > best_f) {
      best_f = f;
      best = u;
    }
  }

  // Projected ascent with Armijo backtracking until the tangent gradient is small.
  Vec u = best;
  double f = best_f;
  double step = 1.0 / xn;
  for (int it = 0; it < options.ascent_iterations; ++it) {
    const Vec g = tangent_gradient(p, x, u);
    const double gn = g.norm();
    if (gn < 1e-4 * xn) break;
    bool moved = false;
    for (int b = 0; b < 40; ++b) {
      const Vec trial = (u + step * g).normalized();
      const double ft = support_objective(p, x, trial);
      if (ft >= f + 1e-4 * step * gn * gn) {
        u = trial;
        f = ft;
        step *= 2.0;
        moved = true;
        break;
      }
      step *= 0.5;
    }
    if (!moved) break;
  }

  // Newton on the bordered system grad p(s) = lambda x, p(s) = 1.
  Vec s = u / p.value(u);
  double lambda = p.gradient(s).norm() / xn;
  const double scale = p.gradient(s).norm();
  Vec rhs(n + 1);
  Mat jac(n + 1, n + 1);
  bool converged = false;
  for (int it = 0; it < options.newton_iterations; ++it) {
    const Vec g = p.gradient(s);
    rhs.head(n) = g - lambda * x;
    rhs[n] = p.value(s) - 1.0;
    if (rhs.norm() <= 4e-15 * scale) {
      converged = true;
      break;
    }
    jac.setZero();
    jac.topLeftCorner(n, n) = p.hessian(s);
    jac.block(0, n, n, 1) = -x;
    jac.block(n, 0, 1, n) = g.transpose();
    const Vec delta = jac.partialPivLu().solve(-rhs);
    if (!delta.allFinite()) break;
    Vec next = s + delta.head(n);
    if (next.norm() < kXiFloor) break;
    next /= p.value(next);
    const double step_size = (next - s).norm();
    s = next;
    lambda += delta[n];
    if (step_size <= 1e-15 * s.norm()) {
      converged = true;
      break;
    }
  }
  const Vec g = p.gradient(s);
  const double alignment = (g.normalized() - xhat).norm();
  if (!converged && alignment > 1e-11) {
    throw Error(ErrorCode::OptimizerStall,
                "make_dual(" + p.label() + "): support maximization did not converge");
  }
  if (alignment > 1e-9 || x.dot(s) < f - 1e-9 * xn) {
    throw Error(ErrorCode::OptimizerStall,
                "make_dual(" + p.label() + "): maximizer failed the optimality check");
  }
  return s;
}

DualPair make_dual(const HomogeneousSymbol& p, const std::optional<CurvatureReport>& audit,
                   const DualOptions& options) {
  if (!audit || audit->label != p.label() || !audit->passed) {
    throw Error(ErrorCode::CurvatureUnchecked,
                "make_dual(" + p.label() + "): no passing curvature audit for this symbol");
  }
  HomogeneousSymbol dual(
      "dual(" + p.label() + ")", p.dim(),
      [p, options](const Vec& x) { return x.dot(support_point(p, x, options)); },
      [p, options](const Vec& x) -> Vec { return support_point(p, x, options); });
  return DualPair{p, std::move(dual), DualConstruction::SupportFunction};
}

DualPair euclidean_pair(int dim) {
  return DualPair{euclidean(dim), euclidean(dim), DualConstruction::ClosedForm};
}

DualPair quadratic_pair(const Mat& a) {
  const Mat inv = a.inverse();
  return DualPair{quadratic_form(a), quadratic_form(0.5 * (inv + inv.transpose())),
                  DualConstruction::ClosedForm};
}

DualPair pair_from_spec(const std::string& spec, int dim, const DualOptions& options) {
  HomogeneousSymbol p = parse_symbol(spec, dim);
  if (spec == "euclidean") return euclidean_pair(dim);
  if (spec.rfind("quadratic-form:", 0) == 0) {
    return quadratic_pair(parse_quadratic_matrix(spec));
  }
  const CurvatureReport report = curvature_audit(p, dim == 2 ? 256 : 400);
  return make_dual(p, report, options);
}

}  // namespace slab::symbols
