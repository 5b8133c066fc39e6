#include <cmath>
#include <numbers>
#include <sstream>

#include "slab/error.hpp"
#include "slab/symbols.hpp"

namespace slab::symbols {

HomogeneousSymbol::HomogeneousSymbol(std::string label, int dim, ValueFn value,
                                     GradientFn gradient, HessianFn hessian)
    : label_(std::move(label)),
      dim_(dim),
      value_(std::move(value)),
      gradient_(std::move(gradient)),
      hessian_(std::move(hessian)) {
  if (dim_ < 1) throw Error(ErrorCode::InvalidSize, "HomogeneousSymbol: dimension must be >= 1");
}

void HomogeneousSymbol::check_point(const Vec& xi) const {
  if (xi.size() != dim_) {
    throw Error(ErrorCode::InvalidSize, "evaluate(" + label_ + "): point has wrong dimension");
  }
  if (!(xi.norm() >= kXiFloor)) {
    throw Error(ErrorCode::ZeroFrequency, "evaluate(" + label_ + "): |xi| below degeneracy floor");
  }
}

double HomogeneousSymbol::value(const Vec& xi) const {
  check_point(xi);
  return value_(xi);
}

Vec HomogeneousSymbol::gradient(const Vec& xi) const {
  check_point(xi);
  if (gradient_) return gradient_(xi);
  const double h = kFdStep * xi.norm();
  Vec g(dim_);
  Vec probe = xi;
  for (int i = 0; i < dim_; ++i) {
    probe[i] = xi[i] + h;
    const double up = value_(probe);
    probe[i] = xi[i] - h;
    const double down = value_(probe);
    probe[i] = xi[i];
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

Mat HomogeneousSymbol::hessian(const Vec& xi) const {
  check_point(xi);
  if (hessian_) return hessian_(xi);
  Mat hess(dim_, dim_);
  Vec probe = xi;
  if (gradient_) {
    const double h = kFdStep * xi.norm();
    for (int j = 0; j < dim_; ++j) {
      probe[j] = xi[j] + h;
      const Vec up = gradient_(probe);
      probe[j] = xi[j] - h;
      const Vec down = gradient_(probe);
      probe[j] = xi[j];
      hess.col(j) = (up - down) / (2.0 * h);
    }
  } else {
    // Second differences of values need a larger step to stay above rounding.
    const double h = 1e-4 * xi.norm();
    const double center = value_(xi);
    for (int i = 0; i < dim_; ++i) {
      for (int j = i; j < dim_; ++j) {
        double d;
        if (i == j) {
          probe[i] = xi[i] + h;
          const double up = value_(probe);
          probe[i] = xi[i] - h;
          const double down = value_(probe);
          probe[i] = xi[i];
          d = (up - 2.0 * center + down) / (h * h);
        } else {
          auto at = [&](double si, double sj) {
            probe[i] = xi[i] + si * h;
            probe[j] = xi[j] + sj * h;
            const double v = value_(probe);
            probe[i] = xi[i];
            probe[j] = xi[j];
            return v;
          };
          d = (at(1, 1) - at(1, -1) - at(-1, 1) + at(-1, -1)) / (4.0 * h * h);
        }
        hess(i, j) = d;
        hess(j, i) = d;
      }
    }
  }
  return 0.5 * (hess + hess.transpose());
}

std::variant<double, Vec, Mat> HomogeneousSymbol::evaluate(const Vec& xi, int order) const {
  switch (order) {
    case 0: return value(xi);
    case 1: return gradient(xi);
    case 2: return hessian(xi);
    default:
      throw Error(ErrorCode::InvalidSize, "evaluate(" + label_ + "): order must be 0, 1 or 2");
  }
}

HomogeneousSymbol euclidean(int dim) {
  return HomogeneousSymbol(
      "euclidean", dim, [](const Vec& xi) { return xi.norm(); },
      [](const Vec& xi) -> Vec { return xi / xi.norm(); },
      [dim](const Vec& xi) -> Mat {
        const double r = xi.norm();
        const Vec u = xi / r;
        return (Mat::Identity(dim, dim) - u * u.transpose()) / r;
      });
}

namespace {

std::string matrix_label(const Mat& a) {
  std::ostringstream out;
  out.precision(17);
  out << "quadratic-form:A=[";
  for (int i = 0; i < a.rows(); ++i) {
    if (i) out << ';';
    for (int j = 0; j < a.cols(); ++j) {
      if (j) out << ',';
      out << a(i, j);
    }
  }
  out << ']';
  return out.str();
}

void require_spd(const Mat& a, const char* where) {
  if (a.rows() != a.cols() || a.rows() < 1) {
    throw Error(ErrorCode::ConfigInvalid, std::string(where) + ": matrix must be square");
  }
  if (!a.isApprox(a.transpose(), 1e-14)) {
    throw Error(ErrorCode::ConfigInvalid, std::string(where) + ": matrix must be symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Mat> eig(a);
  if (eig.eigenvalues().minCoeff() <= 0.0) {
    throw Error(ErrorCode::ConfigInvalid, std::string(where) + ": matrix must be positive definite");
  }
}

HomogeneousSymbol quadratic_with_label(const Mat& a, std::string label) {
  const Mat a2 = a * a;
  const int dim = static_cast<int>(a.rows());
  return HomogeneousSymbol(
      std::move(label), dim, [a](const Vec& xi) { return (a * xi).norm(); },
      [a, a2](const Vec& xi) -> Vec { return a2 * xi / (a * xi).norm(); },
      [a, a2](const Vec& xi) -> Mat {
        const double p = (a * xi).norm();
        const Vec g = a2 * xi;
        return (a2 - g * g.transpose() / (p * p)) / p;
      });
}

}  // namespace

HomogeneousSymbol quadratic_form(const Mat& a) {
  require_spd(a, "quadratic_form");
  return quadratic_with_label(a, matrix_label(a));
}

HomogeneousSymbol perturbed(int dim, double amp) {
  std::ostringstream label;
  label << "perturbed:amp=" << amp;
  return HomogeneousSymbol(
      label.str(), dim,
      [amp](const Vec& xi) {
        const double r2 = xi.squaredNorm();
        return std::sqrt(r2) + amp * xi[0] * xi[0] * xi[0] / r2;
      },
      [amp](const Vec& xi) -> Vec {
        const double r2 = xi.squaredNorm();
        const double r = std::sqrt(r2);
        Vec g = xi / r - (2.0 * amp * xi[0] * xi[0] * xi[0] / (r2 * r2)) * xi;
        g[0] += 3.0 * amp * xi[0] * xi[0] / r2;
        return g;
      });
}

HomogeneousSymbol quartic(int dim) {
  return HomogeneousSymbol(
      "quartic", dim, [](const Vec& xi) { return std::pow(xi.array().pow(4).sum(), 0.25); },
      [](const Vec& xi) -> Vec {
        const double p = std::pow(xi.array().pow(4).sum(), 0.25);
        return xi.array().cube().matrix() / (p * p * p);
      },
      [dim](const Vec& xi) -> Mat {
        const double p = std::pow(xi.array().pow(4).sum(), 0.25);
        const Vec c = xi.array().cube().matrix();
        Mat h = -c * c.transpose() / std::pow(p, 4);
        for (int i = 0; i < dim; ++i) h(i, i) += xi[i] * xi[i];
        return 3.0 * h / (p * p * p);
      });
}

namespace {

Mat parse_matrix(const std::string& body, const std::string& spec) {
  const auto open = body.find('[');
  const auto close = body.rfind(']');
  if (open == std::string::npos || close == std::string::npos || close < open) {
    throw Error(ErrorCode::ConfigInvalid, "parse_symbol: expected A=[...] in '" + spec + "'");
  }
  std::vector<std::vector<double>> rows(1);
  std::string token;
  auto flush = [&] {
    if (token.find_first_not_of(" \t") == std::string::npos) {
      throw Error(ErrorCode::ConfigInvalid, "parse_symbol: empty matrix entry in '" + spec + "'");
    }
    try {
      rows.back().push_back(std::stod(token));
    } catch (const std::exception&) {
      throw Error(ErrorCode::ConfigInvalid, "parse_symbol: bad number '" + token + "'");
    }
    token.clear();
  };
  for (std::size_t i = open + 1; i < close; ++i) {
    const char c = body[i];
    if (c == ',') {
      flush();
    } else if (c == ';') {
      flush();
      rows.emplace_back();
    } else {
      token.push_back(c);
    }
  }
  flush();
  const std::size_t n = rows.size();
  Mat a(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    if (rows[i].size() != n) {
      throw Error(ErrorCode::ConfigInvalid, "parse_symbol: matrix must be square in '" + spec + "'");
    }
    for (std::size_t j = 0; j < n; ++j) a(i, j) = rows[i][j];
  }
  return a;
}

}  // namespace

Mat parse_quadratic_matrix(const std::string& spec) {
  if (spec.rfind("quadratic-form:", 0) != 0) {
    throw Error(ErrorCode::ConfigInvalid, "parse_symbol: not a quadratic form '" + spec + "'");
  }
  return parse_matrix(spec.substr(15), spec);
}

HomogeneousSymbol parse_symbol(const std::string& spec, int dim) {
  if (spec == "euclidean") return euclidean(dim);
  if (spec == "quartic") return quartic(dim);
  if (spec.rfind("quadratic-form:", 0) == 0) {
    const Mat a = parse_quadratic_matrix(spec);
    if (a.rows() != dim) {
      throw Error(ErrorCode::ConfigInvalid, "parse_symbol: matrix size does not match dimension");
    }
    return quadratic_form(a);
  }
  if (spec.rfind("perturbed:amp=", 0) == 0) {
    try {
      return perturbed(dim, std::stod(spec.substr(14)));
    } catch (const std::invalid_argument&) {
      throw Error(ErrorCode::ConfigInvalid, "parse_symbol: bad amplitude in '" + spec + "'");
    }
  }
  throw Error(ErrorCode::ConfigInvalid, "parse_symbol: unknown symbol '" + spec + "'");
}

Mat project_out_radial(const Mat& m, const Vec& axis) {
  const int n = static_cast<int>(axis.size());
  const Vec u = axis.normalized();
  const Mat proj = Mat::Identity(n, n) - u * u.transpose();
  return proj * (0.5 * (m + m.transpose())) * proj;
}

double gaussian_curvature(const HomogeneousSymbol& p, const Vec& xi) {
  const int n = p.dim();
  const Vec g = p.gradient(xi);
  const double gn = g.norm();
  if (gn < 1e-12) {
    throw Error(ErrorCode::DegenerateGradient, "curvature_audit(" + p.label() + "): |grad p| vanishes");
  }
  Mat bordered = Mat::Zero(n + 1, n + 1);
  bordered.topLeftCorner(n, n) = p.hessian(xi);
  bordered.block(0, n, n, 1) = g;
  bordered.block(n, 0, 1, n) = g.transpose();
  return -bordered.determinant() / std::pow(gn, n + 1);
}

std::vector<Vec> sphere_points(int dim, int count) {
  std::vector<Vec> pts;
  pts.reserve(count);
  if (dim == 2) {
    for (int k = 0; k < count; ++k) {
      const double th = 2.0 * std::numbers::pi * (k + 0.5) / count;
      Vec v(2);
      v << std::cos(th), std::sin(th);
      pts.push_back(v);
    }
  } else if (dim == 3) {
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (int k = 0; k < count; ++k) {
      const double z = 1.0 - (2.0 * k + 1.0) / count;
      const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
      Vec v(3);
      v << r * std::cos(golden * k), r * std::sin(golden * k), z;
      pts.push_back(v);
    }
  } else {
    throw Error(ErrorCode::InvalidSize, "sphere_points: only n = 2 and n = 3 are supported");
  }
  return pts;
}

CurvatureReport curvature_audit(const HomogeneousSymbol& p, int samples) {
  if (p.dim() < 2) throw Error(ErrorCode::InvalidSize, "curvature_audit: needs n >= 2");
  CurvatureReport report;
  report.label = p.label();
  report.samples = samples;
  report.min_abs_curvature = std::numeric_limits<double>::infinity();
  for (const Vec& u : sphere_points(p.dim(), samples)) {
    const Vec s = u / p.value(u);
    const double k = std::abs(gaussian_curvature(p, s));
    if (k < report.min_abs_curvature) {
      report.min_abs_curvature = k;
      report.worst_point = s;
    }
  }
  report.passed = report.min_abs_curvature > kKappaMin;
  return report;
}

}  // namespace slab::symbols
