#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "slab/types.hpp"

namespace slab::symbols {

/// Relative central-difference step: h = kFdStep * |xi|.
inline constexpr double kFdStep = 1e-5;
/// Frequencies with |xi| below this floor are treated as the origin.
inline constexpr double kXiFloor = 1e-12;
/// Normalized |Omega| below this value counts as lying on the orbit set.
inline constexpr double kTolOrbit = 1e-8;
/// Minimum |Gaussian curvature| accepted by curvature_audit.
inline constexpr double kKappaMin = 1e-4;

/// A positive function on R^n \ 0, positively homogeneous of degree 1.
///
/// Derivatives fall back to central differences when no closed form is
/// supplied; the fallback is reported by closed_form_gradient() and
/// closed_form_hessian().
class HomogeneousSymbol {
 public:
  using ValueFn = std::function<double(const Vec&)>;
  using GradientFn = std::function<Vec(const Vec&)>;
  using HessianFn = std::function<Mat(const Vec&)>;

  HomogeneousSymbol(std::string label, int dim, ValueFn value, GradientFn gradient = {},
                    HessianFn hessian = {});

  const std::string& label() const { return label_; }
  int dim() const { return dim_; }
  bool closed_form_gradient() const { return static_cast<bool>(gradient_); }
  bool closed_form_hessian() const { return static_cast<bool>(hessian_); }

  double value(const Vec& xi) const;
  Vec gradient(const Vec& xi) const;
  Mat hessian(const Vec& xi) const;

  /// order 0, 1 or 2 -> value, gradient or Hessian.
  std::variant<double, Vec, Mat> evaluate(const Vec& xi, int order) const;

 private:
  void check_point(const Vec& xi) const;

  std::string label_;
  int dim_;
  ValueFn value_;
  GradientFn gradient_;
  HessianFn hessian_;
};

HomogeneousSymbol euclidean(int dim);
/// p(xi) = |xi A| for a symmetric positive definite A.
HomogeneousSymbol quadratic_form(const Mat& a);
/// p(xi) = |xi| (1 + amp (xi_1/|xi|)^3).
HomogeneousSymbol perturbed(int dim, double amp);
/// p(xi) = (sum xi_i^4)^(1/4); its unit level set is flat at the axis points.
HomogeneousSymbol quartic(int dim);

/// Parses "euclidean", "quadratic-form:A=[1,0;0,0.5]", "perturbed:amp=0.05",
/// "quartic". Throws Error(ConfigInvalid) for anything else.
HomogeneousSymbol parse_symbol(const std::string& spec, int dim);
/// The matrix of a "quadratic-form:A=[...]" spec.
Mat parse_quadratic_matrix(const std::string& spec);

/// Symmetrizes m and removes its action along `axis`: P m P with
/// P = I - axis axis^T / |axis|^2. Hessians of degree-1 homogeneous
/// functions have the radial direction in their kernel (Euler identity).
Mat project_out_radial(const Mat& m, const Vec& axis);

/// Gaussian curvature of the level set {p = p(xi)} at xi, from grad and Hessian.
double gaussian_curvature(const HomogeneousSymbol& p, const Vec& xi);

/// Quasi-uniform points on the unit sphere S^{n-1}: equispaced angles for
/// n = 2, a Fibonacci lattice for n = 3.
std::vector<Vec> sphere_points(int dim, int count);

struct CurvatureReport {
  std::string label;
  double min_abs_curvature = 0.0;
  Vec worst_point;
  int samples = 0;
  bool passed = false;
};

CurvatureReport curvature_audit(const HomogeneousSymbol& p, int samples);

enum class DualConstruction { ClosedForm, SupportFunction };

struct DualPair {
  HomogeneousSymbol primal;
  HomogeneousSymbol dual;
  DualConstruction construction;
};

struct DualOptions {
  std::uint64_t seed = 0x5eed;
  int starts = 24;
  int ascent_iterations = 400;
  int newton_iterations = 30;
};

/// Support function of Sigma_p: dual(x) = max { x.s : p(s) = 1 }, gradient by
/// the envelope rule (the maximizer). Requires a passing curvature report for
/// the same symbol; throws CurvatureUnchecked otherwise.
DualPair make_dual(const HomogeneousSymbol& p, const std::optional<CurvatureReport>& audit,
                   const DualOptions& options = {});

/// The maximizer s(x) with p(s) = 1; throws OptimizerStall on failure.
Vec support_point(const HomogeneousSymbol& p, const Vec& x, const DualOptions& options = {});

/// Closed-form pairs: |xi| is self-dual and |xi A| pairs with |xi A^{-1}|.
DualPair euclidean_pair(int dim);
DualPair quadratic_pair(const Mat& a);

/// Closed form when one is known, support-function construction otherwise.
DualPair pair_from_spec(const std::string& spec, int dim, const DualOptions& options = {});

// ---------------------------------------------------------------------------
// Canonical map, structure symbols, orbits.

Vec psi(const DualPair& pair, const Vec& xi);
Vec psi_inv(const DualPair& pair, const Vec& xi);
/// Jacobian d psi / d xi (central differences), rows indexed by output.
Mat psi_jacobian(const DualPair& pair, const Vec& xi);

/// a ^ b = (a_i b_j - a_j b_i)_{i<j}, lexicographic in (i, j).
Vec wedge(const Vec& a, const Vec& b);
int wedge_size(int dim);

/// Omega(x, xi) = (x H) ^ (p(xi) grad p(xi)) with H = Hess p*(grad p(xi)).
Vec omega(const DualPair& pair, const Vec& x, const Vec& xi);
/// Coefficients of Omega as a linear function of x: Omega_c = sum_k x_k M(k, c).
Mat omega_coefficients(const DualPair& pair, const Vec& xi);

struct Membership {
  double residual = 0.0;
  bool member = false;
};

/// |Omega(x, xi)| / (|x| |xi|); x = 0 counts as a member.
Membership gamma_p_membership(const DualPair& pair, const Vec& x, const Vec& xi,
                              double tol = kTolOrbit);

double tau_symbol(const DualPair& pair, const Vec& x, const Vec& xi);

struct OrbitPoint {
  Vec k;
  double t = 0.0;
  Vec x;
  Vec xi;
};

/// Classical orbit of p^2 through x(0) = 0, xi(0) = k.
OrbitPoint orbit(const DualPair& pair, const Vec& k, double t);

// ---------------------------------------------------------------------------
// Phase-space symbols sigma(x, xi).

/// One factor pair of a separable expansion sigma = sum_r f_r(x) g_r(xi).
struct SeparableTerm {
  std::function<Complex(const Vec&)> in_x;
  std::function<Complex(const Vec&)> in_xi;
};

struct PhaseSpaceSymbol {
  std::string label;
  double order_x = 0.0;
  double order_xi = 0.0;
  std::function<Complex(const Vec& x, const Vec& xi)> value;
  /// Exact separable expansion; empty when none is known.
  std::vector<SeparableTerm> terms;
  bool singular_at_origin = false;
  bool singular_at_zero_frequency = false;

  Complex operator()(const Vec& x, const Vec& xi) const { return value(x, xi); }
  bool separable() const { return !terms.empty(); }
};

/// |x|^{-1/2} |(x/|x|) ^ grad p(xi)|^2 |xi|^{1/2}; vanishes on the orbit set.
PhaseSpaceSymbol structured_sigma(const DualPair& pair);
/// |x|^{-1/2} |xi|^{1/2}, the critical weight with no structure.
PhaseSpaceSymbol critical_sigma(int dim);
/// <x>^{-s} |xi|^{1/2}.
PhaseSpaceSymbol bracket_sigma(int dim, double s);
/// tau(x, xi) as a phase-space symbol of orders (2, 2).
PhaseSpaceSymbol tau_phase_symbol(const DualPair& pair);
/// Omega_ij(x, xi) for i < j.
PhaseSpaceSymbol omega_symbol(const DualPair& pair, int i, int j);
/// x-independent symbol m(xi).
PhaseSpaceSymbol multiplier_symbol(std::string label, std::function<Complex(const Vec&)> m,
                                   double order_xi = 0.0);
/// sigma(x, xi) * w(xi); keeps separability and orders.
PhaseSpaceSymbol with_frequency_factor(const PhaseSpaceSymbol& sigma,
                                       std::function<double(const Vec&)> w,
                                       const std::string& suffix);

/// Largest |sigma| on unit-normalized orbit samples (x = lambda grad p(xi)).
double orbit_vanishing_defect(const PhaseSpaceSymbol& sigma, const DualPair& pair, int samples,
                              std::uint64_t seed, bool positive_lambda_only = false);

}  // namespace slab::symbols
