#include <cmath>

#include <Eigen/SVD>

#include "slab/error.hpp"
#include "slab/quantize.hpp"

namespace slab::quantize {

namespace {

bool finite(Complex z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

CVec sample_cutoff(const Grid& g, double xi_min) {
  CVec c = CVec::Ones(static_cast<Eigen::Index>(g.size()));
  if (xi_min <= 0.0) return c;
  const grid::Cutoff low = grid::low_frequency_cutoff(xi_min);
  for (std::size_t k = 0; k < g.size(); ++k) c[static_cast<Eigen::Index>(k)] = low(g.frequency(k));
  return c;
}

// Per-axis phase table exp(i x_j xi_k) and the axis indices of every flat index.
struct PhaseTable {
  Eigen::MatrixXcd e;
  std::vector<std::vector<int>> axis;

  explicit PhaseTable(const Grid& g) : e(g.N, g.N), axis(g.n, std::vector<int>(g.size())) {
    for (int j = 0; j < g.N; ++j) {
      for (int k = 0; k < g.N; ++k) e(j, k) = std::polar(1.0, g.x(j) * g.xi(k));
    }
    for (std::size_t f = 0; f < g.size(); ++f) {
      const auto idx = g.unflatten(f);
      for (int a = 0; a < g.n; ++a) axis[a][f] = idx[a];
    }
  }

  Complex phase(std::size_t j, std::size_t k) const {
    Complex z = 1.0;
    for (std::size_t a = 0; a < axis.size(); ++a) z *= e(axis[a][j], axis[a][k]);
    return z;
  }
};

}  // namespace

CVec sample_multiplier(const Multiplier& m, const Grid& g, double xi_min) {
  const CVec cut = sample_cutoff(g, xi_min);
  CVec out(static_cast<Eigen::Index>(g.size()));
  for (std::size_t k = 0; k < g.size(); ++k) {
    const auto i = static_cast<Eigen::Index>(k);
    if (cut[i] == 0.0) {
      out[i] = 0.0;
      continue;
    }
    const Complex v = m(g.frequency(k)) * cut[i];
    if (!finite(v)) {
      throw Error(ErrorCode::NonFiniteMultiplier,
                  "apply_multiplier: non-finite value at lattice index " + std::to_string(k));
    }
    out[i] = v;
  }
  return out;
}

Field apply_multiplier(const Multiplier& m, const Field& u, double xi_min) {
  Spectrum s = grid::transform(u);
  s.values.array() *= sample_multiplier(m, u.grid, xi_min).array();
  return grid::inverse_transform(s);
}

Field apply_kernel(const Spectrum& uhat,
                   const std::function<Complex(std::size_t, std::size_t)>& kernel) {
  const Grid& g = uhat.grid;
  const PhaseTable table(g);
  const double scale = std::pow(1.0 / (2.0 * g.L), g.n);
  Field out = grid::zeros(g);
  for (std::size_t j = 0; j < g.size(); ++j) {
    Complex acc = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k) {
      const Complex uk = uhat.values[static_cast<Eigen::Index>(k)];
      if (uk == 0.0) continue;
      acc += table.phase(j, k) * kernel(j, k) * uk;
    }
    out.values[static_cast<Eigen::Index>(j)] = scale * acc;
  }
  return out;
}

Operator::Operator(const PhaseSpaceSymbol& sigma, const Grid& g, const QuantizeOptions& options)
    : grid_(g), label_(sigma.label), value_(sigma.value) {
  if (sigma.singular_at_origin && !g.offset) {
    throw Error(ErrorCode::SingularAtOrigin,
                "apply_pseudo(" + sigma.label + "): symbol singular at x = 0 needs an offset grid");
  }
  xi_min_ = options.xi_min >= 0.0 ? options.xi_min
                                  : (sigma.singular_at_zero_frequency ? grid::default_xi_min(g) : 0.0);
  cutoff_ = sample_cutoff(g, xi_min_);
  if (!sigma.separable() || options.force_direct) {
    for (std::size_t i = 0; i < g.size(); ++i) {
      points_.push_back(g.point(i));
      freqs_.push_back(g.frequency(i));
    }
    return;
  }
  const auto P = static_cast<Eigen::Index>(g.size());
  for (const auto& term : sigma.terms) {
    CVec f(P);
    CVec h(P);
    for (Eigen::Index i = 0; i < P; ++i) {
      f[i] = term.in_x(g.point(static_cast<std::size_t>(i)));
      h[i] = cutoff_[i] == 0.0 ? Complex(0.0) : cutoff_[i] * term.in_xi(g.frequency(static_cast<std::size_t>(i)));
      if (!finite(f[i]) || !finite(h[i])) {
        throw Error(ErrorCode::NonFiniteSymbol,
                    "apply_pseudo(" + sigma.label + "): non-finite separable factor");
      }
    }
    fx_.push_back(std::move(f));
    gxi_.push_back(std::move(h));
  }
}

Complex Operator::kernel(std::size_t j, std::size_t k) const {
  const Complex c = cutoff_[static_cast<Eigen::Index>(k)];
  if (c == 0.0) return 0.0;
  const Complex v = c * value_(points_[j], freqs_[k]);
  if (!finite(v)) {
    throw Error(ErrorCode::NonFiniteSymbol, "apply_pseudo(" + label_ + "): non-finite symbol value");
  }
  return v;
}

Field Operator::apply(const Spectrum& uhat) const {
  if (!(uhat.grid == grid_)) throw Error(ErrorCode::InvalidSize, "apply_pseudo: grid mismatch");
  if (direct()) {
    return apply_kernel(uhat, [this](std::size_t j, std::size_t k) { return kernel(j, k); });
  }
  Field out = grid::zeros(grid_);
  for (std::size_t r = 0; r < fx_.size(); ++r) {
    Spectrum s{grid_, uhat.values.cwiseProduct(gxi_[r])};
    out.values += fx_[r].cwiseProduct(grid::inverse_transform(s).values);
  }
  return out;
}

Field Operator::apply(const Field& u) const { return apply(grid::transform(u)); }

Field Operator::adjoint(const Field& v) const {
  if (!(v.grid == grid_)) throw Error(ErrorCode::InvalidSize, "adjoint: grid mismatch");
  if (direct()) {
    const PhaseTable table(grid_);
    const double hn = std::pow(grid_.h(), grid_.n);
    Spectrum s{grid_, CVec::Zero(static_cast<Eigen::Index>(grid_.size()))};
    for (std::size_t k = 0; k < grid_.size(); ++k) {
      Complex acc = 0.0;
      for (std::size_t j = 0; j < grid_.size(); ++j) {
        const Complex vj = v.values[static_cast<Eigen::Index>(j)];
        if (vj == 0.0) continue;
        acc += std::conj(table.phase(j, k) * kernel(j, k)) * vj;
      }
      s.values[static_cast<Eigen::Index>(k)] = hn * acc;
    }
    return grid::inverse_transform(s);
  }
  Field out = grid::zeros(grid_);
  for (std::size_t r = 0; r < fx_.size(); ++r) {
    Field w{grid_, fx_[r].conjugate().cwiseProduct(v.values)};
    Spectrum s = grid::transform(w);
    s.values.array() *= gxi_[r].conjugate().array();
    out.values += grid::inverse_transform(s).values;
  }
  return out;
}

Field apply_pseudo(const PhaseSpaceSymbol& sigma, const Field& u, const QuantizeOptions& options) {
  return Operator(sigma, u.grid, options).apply(u);
}

Field apply_pseudo_adjoint(const PhaseSpaceSymbol& sigma, const Field& v,
                           const QuantizeOptions& options) {
  return Operator(sigma, v.grid, options).adjoint(v);
}

LowRank factorize(const PhaseSpaceSymbol& sigma, const Grid& g, double tol, double xi_min) {
  const CVec cut = sample_cutoff(g, xi_min);
  const auto P = static_cast<Eigen::Index>(g.size());
  Eigen::MatrixXcd s(P, P);
  for (Eigen::Index j = 0; j < P; ++j) {
    const Vec x = g.point(static_cast<std::size_t>(j));
    for (Eigen::Index k = 0; k < P; ++k) {
      s(j, k) = cut[k] == 0.0 ? Complex(0.0) : cut[k] * sigma(x, g.frequency(static_cast<std::size_t>(k)));
      if (!finite(s(j, k))) {
        throw Error(ErrorCode::NonFiniteSymbol, "factorize(" + sigma.label + "): non-finite symbol value");
      }
    }
  }
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(s, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  LowRank lr;
  for (Eigen::Index r = 0; r < sv.size(); ++r) {
    if (sv[r] <= tol * sv[0] || sv[r] == 0.0) break;
    lr.fx.push_back(sv[r] * svd.matrixU().col(r));
    lr.gxi.push_back(svd.matrixV().col(r).conjugate());
    lr.singular_values.push_back(sv[r]);
  }
  return lr;
}

Field apply_low_rank(const LowRank& lr, const Field& u) {
  const Spectrum uhat = grid::transform(u);
  Field out = grid::zeros(u.grid);
  for (std::size_t r = 0; r < lr.fx.size(); ++r) {
    Spectrum s{u.grid, uhat.values.cwiseProduct(lr.gxi[r])};
    out.values += lr.fx[r].cwiseProduct(grid::inverse_transform(s).values);
  }
  return out;
}

}  // namespace slab::quantize
