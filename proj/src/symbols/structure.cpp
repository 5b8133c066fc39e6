#include <cmath>
#include <random>

#include "slab/error.hpp"
#include "slab/symbols.hpp"

namespace slab::symbols {

namespace {

void require_frequency(const Vec& xi, const char* where) {
  if (!(xi.norm() >= kXiFloor)) {
    throw Error(ErrorCode::ZeroFrequency, std::string(where) + ": |xi| below degeneracy floor");
  }
}

void require_position(const Vec& x, const char* where) {
  if (!(x.norm() >= kXiFloor)) {
    throw Error(ErrorCode::ZeroPosition, std::string(where) + ": x = 0 is excluded");
  }
}

// Hess p* at grad p(xi). Closed-form duals use their own Hessian. For
// optimizer-built duals it is recovered from the primal: differentiating
// grad p*(grad p(xi)) = xi / p(xi) gives M Hp = (I - xi g^T / p) / p, and
// M g = 0 fixes the remaining direction.
Mat dual_hessian_at_gradient(const DualPair& pair, const Vec& xi) {
  const Vec g = pair.primal.gradient(xi);
  if (pair.construction == DualConstruction::ClosedForm) {
    return project_out_radial(pair.dual.hessian(g), g);
  }
  const int n = pair.primal.dim();
  const double p = pair.primal.value(xi);
  const Mat h = pair.primal.hessian(xi);
  const Mat id = Mat::Identity(n, n);
  const Mat b = (id - xi * g.transpose() / p) / p;
  const Vec xhat = xi.normalized();
  // h is invertible on xi-perp; invert it there through the shifted matrix.
  const Mat shifted = h + xhat * xhat.transpose();
  const Mat h_pinv = shifted.inverse() - xhat * xhat.transpose();
  const Mat q = id - g * xi.transpose() / xi.dot(g);
  return project_out_radial(b * h_pinv * q, g);
}

double frequency_weight(const Vec& xi) { return std::sqrt(xi.norm()); }

}  // namespace

Vec psi(const DualPair& pair, const Vec& xi) {
  require_frequency(xi, "psi");
  const Vec g = pair.primal.gradient(xi);
  return pair.primal.value(xi) * g / g.norm();
}

Vec psi_inv(const DualPair& pair, const Vec& xi) {
  require_frequency(xi, "psi_inv");
  return xi.norm() * pair.dual.gradient(xi);
}

Mat psi_jacobian(const DualPair& pair, const Vec& xi) {
  require_frequency(xi, "psi_jacobian");
  const int n = pair.primal.dim();
  const double h = kFdStep * xi.norm();
  Mat jac(n, n);
  Vec probe = xi;
  for (int j = 0; j < n; ++j) {
    probe[j] = xi[j] + h;
    const Vec up = psi(pair, probe);
    probe[j] = xi[j] - h;
    const Vec down = psi(pair, probe);
    probe[j] = xi[j];
    jac.col(j) = (up - down) / (2.0 * h);
  }
  return jac;
}

int wedge_size(int dim) { return dim * (dim - 1) / 2; }

Vec wedge(const Vec& a, const Vec& b) {
  if (a.size() != b.size()) throw Error(ErrorCode::InvalidSize, "wedge: size mismatch");
  const int n = static_cast<int>(a.size());
  Vec out(wedge_size(n));
  int c = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) out[c++] = a[i] * b[j] - a[j] * b[i];
  }
  return out;
}

Mat omega_coefficients(const DualPair& pair, const Vec& xi) {
  require_frequency(xi, "omega");
  const int n = pair.primal.dim();
  const Mat h = dual_hessian_at_gradient(pair, xi);
  const Vec right = pair.primal.value(xi) * pair.primal.gradient(xi);
  Mat m(n, wedge_size(n));
  for (int k = 0; k < n; ++k) m.row(k) = wedge(h.row(k).transpose(), right).transpose();
  return m;
}

Vec omega(const DualPair& pair, const Vec& x, const Vec& xi) {
  if (x.size() != pair.primal.dim()) throw Error(ErrorCode::InvalidSize, "omega: bad x size");
  return omega_coefficients(pair, xi).transpose() * x;
}

Membership gamma_p_membership(const DualPair& pair, const Vec& x, const Vec& xi, double tol) {
  require_frequency(xi, "gamma_p_membership");
  const double xn = x.norm();
  if (xn == 0.0) return {0.0, true};
  const double r = omega(pair, x, xi).norm() / (xn * xi.norm());
  return {r, r <= tol};
}

double tau_symbol(const DualPair& pair, const Vec& x, const Vec& xi) {
  require_position(x, "tau_symbol");
  require_frequency(xi, "tau_symbol");
  const Vec dg = pair.dual.gradient(x);
  const double c = pair.dual.value(x) / dg.norm();
  return (c * c) * wedge(dg, xi).squaredNorm();
}

OrbitPoint orbit(const DualPair& pair, const Vec& k, double t) {
  require_frequency(k, "orbit");
  const Vec x = 2.0 * t * pair.primal.value(k) * pair.primal.gradient(k);
  return OrbitPoint{k, t, x, k};
}

PhaseSpaceSymbol structured_sigma(const DualPair& pair) {
  const HomogeneousSymbol p = pair.primal;
  const int n = p.dim();
  PhaseSpaceSymbol s;
  s.label = "structured";
  s.order_x = -0.5;
  s.order_xi = 0.5;
  s.singular_at_origin = true;
  s.singular_at_zero_frequency = true;
  s.value = [p](const Vec& x, const Vec& xi) -> Complex {
    require_position(x, "structured_sigma");
    if (xi.norm() < kXiFloor) return 0.0;
    const double xn = x.norm();
    return std::pow(xn, -0.5) * wedge(x / xn, p.gradient(xi)).squaredNorm() *
           frequency_weight(xi);
  };
  // |xhat ^ g|^2 = |g|^2 - sum_{a,b} xhat_a xhat_b g_a g_b.
  s.terms.push_back({[](const Vec& x) -> Complex { return std::pow(x.norm(), -0.5); },
                     [p](const Vec& xi) -> Complex {
                       if (xi.norm() < kXiFloor) return 0.0;
                       return p.gradient(xi).squaredNorm() * frequency_weight(xi);
                     }});
  for (int a = 0; a < n; ++a) {
    for (int b = a; b < n; ++b) {
      const double mult = a == b ? -1.0 : -2.0;
      s.terms.push_back({[a, b, mult](const Vec& x) -> Complex {
                           const double xn = x.norm();
                           return mult * std::pow(xn, -2.5) * x[a] * x[b];
                         },
                         [p, a, b](const Vec& xi) -> Complex {
                           if (xi.norm() < kXiFloor) return 0.0;
                           const Vec g = p.gradient(xi);
                           return g[a] * g[b] * frequency_weight(xi);
                         }});
    }
  }
  return s;
}

PhaseSpaceSymbol critical_sigma(int dim) {
  PhaseSpaceSymbol s;
  s.label = "unstructured";
  s.order_x = -0.5;
  s.order_xi = 0.5;
  s.singular_at_origin = true;
  s.singular_at_zero_frequency = true;
  s.value = [dim](const Vec& x, const Vec& xi) -> Complex {
    if (x.size() != dim) throw Error(ErrorCode::InvalidSize, "critical_sigma: bad x size");
    require_position(x, "critical_sigma");
    return std::pow(x.norm(), -0.5) * frequency_weight(xi);
  };
  s.terms.push_back({[](const Vec& x) -> Complex { return std::pow(x.norm(), -0.5); },
                     [](const Vec& xi) -> Complex { return frequency_weight(xi); }});
  return s;
}

PhaseSpaceSymbol bracket_sigma(int dim, double power) {
  PhaseSpaceSymbol s;
  s.label = "bracket";
  s.singular_at_zero_frequency = true;
  s.order_x = -power;
  s.order_xi = 0.5;
  auto in_x = [power](const Vec& x) -> Complex {
    return std::pow(1.0 + x.squaredNorm(), -0.5 * power);
  };
  s.value = [dim, in_x](const Vec& x, const Vec& xi) -> Complex {
    if (x.size() != dim) throw Error(ErrorCode::InvalidSize, "bracket_sigma: bad x size");
    return in_x(x) * frequency_weight(xi);
  };
  s.terms.push_back({in_x, [](const Vec& xi) -> Complex { return frequency_weight(xi); }});
  return s;
}

PhaseSpaceSymbol tau_phase_symbol(const DualPair& pair) {
  const HomogeneousSymbol dual = pair.dual;
  const int n = dual.dim();
  // v(x) = p*(x) grad p*(x) / |grad p*(x)|, so tau = |v|^2 |xi|^2 - (v.xi)^2.
  auto v_of = [dual](const Vec& x) -> Vec {
    require_position(x, "tau");
    const Vec dg = dual.gradient(x);
    return dual.value(x) * dg / dg.norm();
  };
  PhaseSpaceSymbol s;
  s.label = "tau";
  s.order_x = 2.0;
  s.order_xi = 2.0;
  s.value = [pair](const Vec& x, const Vec& xi) -> Complex {
    if (xi.norm() < kXiFloor) return 0.0;
    return tau_symbol(pair, x, xi);
  };
  s.terms.push_back({[v_of](const Vec& x) -> Complex { return v_of(x).squaredNorm(); },
                     [](const Vec& xi) -> Complex { return xi.squaredNorm(); }});
  for (int a = 0; a < n; ++a) {
    for (int b = a; b < n; ++b) {
      const double mult = a == b ? -1.0 : -2.0;
      s.terms.push_back({[v_of, a, b, mult](const Vec& x) -> Complex {
                           const Vec v = v_of(x);
                           return mult * v[a] * v[b];
                         },
                         [a, b](const Vec& xi) -> Complex { return xi[a] * xi[b]; }});
    }
  }
  return s;
}

PhaseSpaceSymbol omega_symbol(const DualPair& pair, int i, int j) {
  const int n = pair.primal.dim();
  if (i < 0 || j <= i || j >= n) throw Error(ErrorCode::InvalidSize, "omega_symbol: need i < j < n");
  int c = 0;
  for (int a = 0; a < i; ++a) c += n - 1 - a;
  c += j - i - 1;
  PhaseSpaceSymbol s;
  s.label = "omega_" + std::to_string(i) + std::to_string(j);
  s.order_x = 1.0;
  s.order_xi = 1.0;
  s.value = [pair, c](const Vec& x, const Vec& xi) -> Complex {
    if (xi.norm() < kXiFloor) return 0.0;
    return omega(pair, x, xi)[c];
  };
  for (int k = 0; k < n; ++k) {
    s.terms.push_back({[k](const Vec& x) -> Complex { return x[k]; },
                       [pair, k, c](const Vec& xi) -> Complex {
                         if (xi.norm() < kXiFloor) return 0.0;
                         return omega_coefficients(pair, xi)(k, c);
                       }});
  }
  return s;
}

PhaseSpaceSymbol multiplier_symbol(std::string label, std::function<Complex(const Vec&)> m,
                                   double order_xi) {
  PhaseSpaceSymbol s;
  s.label = std::move(label);
  s.order_xi = order_xi;
  s.value = [m](const Vec&, const Vec& xi) { return m(xi); };
  s.terms.push_back({[](const Vec&) -> Complex { return 1.0; }, m});
  return s;
}

PhaseSpaceSymbol with_frequency_factor(const PhaseSpaceSymbol& sigma,
                                       std::function<double(const Vec&)> w,
                                       const std::string& suffix) {
  PhaseSpaceSymbol s = sigma;
  s.label = sigma.label + suffix;
  s.value = [inner = sigma.value, w](const Vec& x, const Vec& xi) -> Complex {
    const double f = w(xi);
    if (f == 0.0) return 0.0;
    return f * inner(x, xi);
  };
  for (auto& term : s.terms) {
    term.in_xi = [g = term.in_xi, w](const Vec& xi) -> Complex {
      const double f = w(xi);
      if (f == 0.0) return 0.0;
      return f * g(xi);
    };
  }
  return s;
}

double orbit_vanishing_defect(const PhaseSpaceSymbol& sigma, const DualPair& pair, int samples,
                              std::uint64_t seed, bool positive_lambda_only) {
  const int n = pair.primal.dim();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_int_distribution<int> coin(0, 1);
  double worst = 0.0;
  for (int s = 0; s < samples; ++s) {
    Vec xi(n);
    for (int i = 0; i < n; ++i) xi[i] = normal(rng);
    xi.normalize();
    Vec x = pair.primal.gradient(xi).normalized();
    if (!positive_lambda_only && coin(rng) == 1) x = -x;
    worst = std::max(worst, std::abs(sigma(x, xi)));
  }
  return worst;
}

}  // namespace slab::symbols
