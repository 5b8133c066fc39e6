#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <random>

#include "slab/error.hpp"
#include "slab/quantize.hpp"

namespace slab::quantize {

double commutator_residual(const PhaseSpaceSymbol& a, const Multiplier& m, const Field& u) {
  QuantizeOptions options;
  options.xi_min = 0.0;
  const Operator op(a, u.grid, options);
  const Field left = op.apply(apply_multiplier(m, u));
  const Field right = apply_multiplier(m, op.apply(u));
  return grid::norm(Field{u.grid, left.values - right.values}) / grid::norm(u);
}

double commutator_residual(const DualPair& pair, int i, int j, const grid::Cutoff& h, const Field& u) {
  return commutator_residual(pair, i, j, [h](double s) { return h(s); }, u);
}

double commutator_residual(const DualPair& pair, int i, int j, const std::function<double(double)>& h,
                           const Field& u) {
  const symbols::HomogeneousSymbol p = pair.primal;
  const Multiplier m = [p, h](const Vec& xi) -> Complex {
    return xi.norm() < symbols::kXiFloor ? h(0.0) : h(p.value(xi));
  };
  return commutator_residual(symbols::omega_symbol(pair, i, j), m, u);
}

std::string to_string(Family f) {
  switch (f) {
    case Family::A: return "A";
    case Family::B: return "B";
    case Family::R: return "R";
  }
  return "?";
}

namespace {

using Eval = std::function<Complex(const Vec&, const Vec&, const Vec&)>;

constexpr double kAuditStep = 1e-2;

// Central difference of f along direction v of variable group `group`.
Eval differentiate(const Eval& f, int group, const Vec& v, int order) {
  if (order == 0) return f;
  const double h = kAuditStep;
  auto shifted = [f, group, v](double s) {
    return [f, group, v, s](const Vec& x, const Vec& y, const Vec& xi) {
      if (group == 0) return f(x + s * v, y, xi);
      if (group == 1) return f(x, y + s * v, xi);
      return f(x, y, xi + s * v);
    };
  };
  const Eval up = shifted(h);
  const Eval down = shifted(-h);
  if (order == 1) {
    return [up, down, h](const Vec& x, const Vec& y, const Vec& xi) {
      return (up(x, y, xi) - down(x, y, xi)) / (2.0 * h);
    };
  }
  return [f, up, down, h](const Vec& x, const Vec& y, const Vec& xi) {
    return (up(x, y, xi) - 2.0 * f(x, y, xi) + down(x, y, xi)) / (h * h);
  };
}

double bracket(const Vec& v) { return std::sqrt(1.0 + v.squaredNorm()); }

}  // namespace

AuditResult class_audit(const Amplitude& amp, int dim, const AmplitudeClass& cls, int samples,
                        std::uint64_t seed, double constant, const std::string& label) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_int_distribution<int> level(0, 12);
  auto direction = [&] {
    Vec v(dim);
    for (int i = 0; i < dim; ++i) v[i] = normal(rng);
    return Vec(v.normalized());
  };
  auto point = [&] { return Vec(direction() * std::ldexp(1.0, level(rng))); };

  double worst = 0.0;
  for (int s = 0; s < samples; ++s) {
    const Vec x = point();
    const Vec y = point();
    const Vec xi = point();
    const Vec dx = direction();
    const Vec dy = direction();
    const Vec dxi = direction();
    for (int a = 0; a <= 2; ++a) {
      for (int b = 0; a + b <= 2; ++b) {
        for (int c = 0; a + b + c <= 2; ++c) {
          const Eval d = differentiate(differentiate(differentiate(amp, 0, dx, a), 1, dy, b), 2, dxi, c);
          const double value = std::abs(d(x, y, xi));
          double weight = std::pow(bracket(y), cls.m_prime - b) * std::pow(bracket(xi), cls.k);
          switch (cls.family) {
            case Family::A: weight *= std::pow(bracket(x), cls.m - a) * std::pow(bracket(xi), -c); break;
            case Family::B: weight *= std::pow(bracket(x), cls.m - a); break;
            case Family::R: weight *= std::pow(bracket(x), cls.m); break;
          }
          worst = std::max(worst, value / weight);
        }
      }
    }
  }
  return AuditResult{label, cls.family, worst, worst <= constant};
}

void write_audit_csv(const std::string& path, const std::vector<AuditResult>& rows) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::ConfigInvalid, "write_audit_csv: cannot open " + path);
  out << "symbol,family,worst_ratio,passed\n" << std::setprecision(10);
  for (const auto& r : rows) {
    out << r.label << ',' << to_string(r.family) << ',' << r.worst_ratio << ',' << (r.passed ? 1 : 0) << '\n';
  }
}

Field apply_fio(const Fio& t, const Field& u) {
  const Grid& g = u.grid;
  if (t.phase != Phase::Identity && !t.pair) {
    throw Error(ErrorCode::ConfigInvalid, "apply_fio: warped phase needs a dual pair");
  }
  const double scale = std::pow(2.0 * std::numbers::pi, g.n);
  Field out = grid::zeros(g);
  for (const auto& term : t.terms) {
    Field w = grid::sample(g, term.gy);
    w.values.array() *= u.values.array();
    Spectrum s{g, CVec::Zero(static_cast<Eigen::Index>(g.size()))};
    if (t.phase == Phase::Identity) {
      s = grid::transform(w);
      s.values.array() *= grid::sample_spectrum(g, term.cxi).values.array();
    } else {
      std::vector<std::size_t> support;
      std::vector<Vec> warped;
      std::vector<Complex> weights;
      for (std::size_t k = 0; k < g.size(); ++k) {
        const Vec xi = g.frequency(k);
        const Complex c = term.cxi(xi);
        if (c == 0.0) continue;
        if (xi.norm() < symbols::kXiFloor) {
          throw Error(ErrorCode::ConfigInvalid, "apply_fio: amplitude must vanish near xi = 0");
        }
        support.push_back(k);
        warped.push_back(t.phase == Phase::Psi ? symbols::psi(*t.pair, xi) : symbols::psi_inv(*t.pair, xi));
        weights.push_back(c);
      }
      const CVec values = grid::spectrum_at(w, warped);
      for (std::size_t i = 0; i < support.size(); ++i) {
        s.values[static_cast<Eigen::Index>(support[i])] = weights[i] * values[static_cast<Eigen::Index>(i)];
      }
    }
    Field v = grid::inverse_transform(s);
    v.values.array() *= grid::sample(g, term.fx).values.array();
    out.values += scale * v.values;
  }
  return out;
}

double RatioSequence::spread() const {
  if (ratios.empty()) return 0.0;
  const auto [lo, hi] = std::minmax_element(ratios.begin(), ratios.end());
  return *hi / *lo;
}

FieldFamily dilation_family(const Grid& g, std::function<Complex(const Vec&)> f) {
  return [g, f](double lambda) {
    return grid::sample(g, [&](const Vec& x) { return f(x / lambda); });
  };
}

RatioSequence fio_bound_ratio(const Fio& t, double m, double mu, const FieldFamily& family,
                              const std::vector<double>& lambdas) {
  RatioSequence seq;
  for (double lambda : lambdas) {
    const Field u = family(lambda);
    seq.lambdas.push_back(lambda);
    seq.ratios.push_back(grid::weighted_norm(apply_fio(t, u), mu) / grid::weighted_norm(u, m + mu));
  }
  return seq;
}

RatioSequence egorov_residual(const PhaseSpaceSymbol& a, const Weight& gamma0,
                              const CanonicalPlan& plan, double m, const FieldFamily& family,
                              const std::vector<double>& lambdas) {
  if (plan.direction() != Direction::Forward) {
    throw Error(ErrorCode::ConfigInvalid, "egorov_residual: needs a forward plan");
  }
  if (!a.separable()) throw Error(ErrorCode::ConfigInvalid, "egorov_residual: symbol must be separable");
  const Grid& g = plan.grid();
  const DualPair& pair = plan.pair();

  // a_0 = a gamma_0 on the left-hand side.
  const PhaseSpaceSymbol a0 = symbols::with_frequency_factor(a, gamma0, "*gamma0");
  QuantizeOptions options;
  options.xi_min = 0.0;
  const Operator left(a0, g, options);

  // a~(x, xi) = a_0(J^T x, eta) with eta = psi^{-1}(xi), J = psi'(eta).
  struct Column {
    double g0 = 0.0;
    Mat jt;
    std::vector<Complex> gr;
  };
  std::vector<Column> cols(g.size());
  for (std::size_t k = 0; k < g.size(); ++k) {
    const Vec xi = g.frequency(k);
    if (xi.norm() < symbols::kXiFloor) continue;
    const Vec eta = symbols::psi_inv(pair, xi);
    const double g0 = gamma0(eta);
    if (g0 == 0.0) continue;
    cols[k].g0 = g0;
    cols[k].jt = symbols::psi_jacobian(pair, eta).transpose();
    for (const auto& term : a.terms) cols[k].gr.push_back(term.in_xi(eta));
  }
  std::vector<Vec> points(g.size());
  for (std::size_t j = 0; j < g.size(); ++j) points[j] = g.point(j);
  const auto kernel = [&](std::size_t j, std::size_t k) -> Complex {
    const Column& c = cols[k];
    if (c.g0 == 0.0) return 0.0;
    const Vec x = c.jt * points[j];
    Complex acc = 0.0;
    for (std::size_t r = 0; r < a.terms.size(); ++r) acc += a.terms[r].in_x(x) * c.gr[r];
    return c.g0 * acc;
  };

  RatioSequence seq;
  for (double lambda : lambdas) {
    const Field u = family(lambda);
    const Field lhs = left.apply(plan.apply(u));
    const Field rhs = plan.apply(apply_kernel(grid::transform(u), kernel));
    seq.lambdas.push_back(lambda);
    seq.ratios.push_back(grid::norm(Field{g, lhs.values - rhs.values}) / grid::weighted_norm(u, m - 1.0));
  }
  return seq;
}

RatioSequence basiclem_ratio(const DualPair& pair, const PhaseSpaceSymbol& a, double m,
                             const FieldFamily& family, const std::vector<double>& lambdas,
                             const QuantizeOptions& options) {
  const double defect = symbols::orbit_vanishing_defect(a, pair, 256, 0xb45e, true);
  if (defect > kStructureTol) {
    throw Error(ErrorCode::StructureViolation,
                "basiclem_ratio(" + a.label + "): symbol does not vanish on the orbit set (defect " +
                    std::to_string(defect) + ")");
  }
  RatioSequence seq;
  const int n = pair.primal.dim();
  for (double lambda : lambdas) {
    const Field u = family(lambda);
    const Operator op(a, u.grid, options);
    double rhs = grid::weighted_norm(u, m - 1.0);
    QuantizeOptions plain;
    plain.xi_min = 0.0;
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        rhs += grid::weighted_norm(apply_pseudo(symbols::omega_symbol(pair, i, j), u, plain), m - 1.0);
      }
    }
    seq.lambdas.push_back(lambda);
    seq.ratios.push_back(grid::norm(op.apply(u)) / rhs);
  }
  return seq;
}

}  // namespace slab::quantize
