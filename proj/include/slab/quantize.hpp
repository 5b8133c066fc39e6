#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "slab/grid.hpp"
#include "slab/symbols.hpp"

namespace slab::quantize {

using grid::CVec;
using grid::Field;
using grid::Grid;
using grid::Spectrum;
using symbols::DualPair;
using symbols::PhaseSpaceSymbol;

using Multiplier = std::function<Complex(const Vec&)>;
using Weight = std::function<double(const Vec&)>;

/// Samples m on the frequency lattice. With xi_min > 0 the values are
/// multiplied by the low-frequency cutoff and never evaluated below xi_min.
/// Throws NonFiniteMultiplier.
CVec sample_multiplier(const Multiplier& m, const Grid& g, double xi_min = 0.0);

/// inverse_transform(m(xi) transform(u)).
Field apply_multiplier(const Multiplier& m, const Field& u, double xi_min = 0.0);

struct QuantizeOptions {
  /// Lower edge of the low-frequency cutoff. Negative selects
  /// grid::default_xi_min for symbols flagged singular at zero frequency
  /// and no cutoff otherwise; zero disables the cutoff.
  double xi_min = -1.0;
  /// Ignore a separable expansion and sum the full kernel.
  bool force_direct = false;
};

/// Kohn-Nirenberg quantization on a grid:
/// (sigma(X,D) u)_j = (2L)^{-n} sum_k exp(i x_j . xi_k) sigma(x_j, xi_k) u^_k.
///
/// Separable symbols are applied as sum_r f_r(X) g_r(D) with the factors
/// sampled once; other symbols fall back to the O(N^{2n}) sum.
class Operator {
 public:
  Operator(const PhaseSpaceSymbol& sigma, const Grid& g, const QuantizeOptions& options = {});

  Field apply(const Field& u) const;
  Field apply(const Spectrum& uhat) const;
  /// Discrete adjoint with respect to grid::inner.
  Field adjoint(const Field& v) const;

  const Grid& grid() const { return grid_; }
  int rank() const { return static_cast<int>(fx_.size()); }
  bool direct() const { return fx_.empty(); }
  double xi_min() const { return xi_min_; }
  const std::string& label() const { return label_; }

 private:
  Complex kernel(std::size_t j, std::size_t k) const;

  Grid grid_;
  std::string label_;
  double xi_min_ = 0.0;
  std::vector<CVec> fx_;
  std::vector<CVec> gxi_;
  std::function<Complex(const Vec&, const Vec&)> value_;
  CVec cutoff_;
  std::vector<Vec> points_;
  std::vector<Vec> freqs_;
};

Field apply_pseudo(const PhaseSpaceSymbol& sigma, const Field& u, const QuantizeOptions& options = {});
Field apply_pseudo_adjoint(const PhaseSpaceSymbol& sigma, const Field& v,
                           const QuantizeOptions& options = {});

/// Generic kernel sum out_j = (2L)^{-n} sum_k exp(i x_j . xi_k) K(j, k) u^_k.
Field apply_kernel(const Spectrum& uhat, const std::function<Complex(std::size_t, std::size_t)>& kernel);

/// Low-rank expansion of the sampled symbol matrix sigma(x_j, xi_k), rank
/// chosen by the singular-value threshold tol relative to the largest.
struct LowRank {
  std::vector<CVec> fx;
  std::vector<CVec> gxi;
  std::vector<double> singular_values;
};
LowRank factorize(const PhaseSpaceSymbol& sigma, const Grid& g, double tol = 1e-10,
                  double xi_min = 0.0);
/// sum_r f_r(X) g_r(D) u for a factorization on u's grid.
Field apply_low_rank(const LowRank& lr, const Field& u);

// ---------------------------------------------------------------------------
// Canonical transform I_gamma and change of variables J_gamma.

enum class Direction { Forward, Inverse };

/// Forward: (I u)^(xi) = gamma(xi) u^(psi(xi)). Inverse: gamma(xi) u^(psi^{-1}(xi)).
/// Warped frequencies are precomputed for one grid.
class CanonicalPlan {
 public:
  CanonicalPlan(DualPair pair, Weight gamma, Direction direction, const Grid& g);

  /// Applies the plan; leakage receives the share of warped spectral mass
  /// sitting where 0 < gamma < 1.
  Field apply(const Field& u, double* leakage = nullptr) const;

  const DualPair& pair() const { return pair_; }
  const Weight& gamma() const { return gamma_; }
  Direction direction() const { return direction_; }
  const Grid& grid() const { return grid_; }
  /// Map applied inside the spectrum: psi or psi^{-1}.
  Vec warp(const Vec& xi) const;

  /// Throw CutoffLeakage when the leakage exceeds this share.
  double leakage_limit = 1.0;

 private:
  DualPair pair_;
  Weight gamma_;
  Direction direction_;
  Grid grid_;
  std::vector<std::size_t> support_;
  std::vector<Vec> warped_;
  CVec weights_;
};

/// The partner plan: gamma~ = gamma o psi^{-1} with the opposite direction,
/// so that forward(inverse(u)) = gamma(D)^2 u.
CanonicalPlan partner_plan(const CanonicalPlan& plan);

Field apply_canonical(const CanonicalPlan& plan, const Field& u, double* leakage = nullptr);

/// Coordinate changes kappa for J_gamma u = (gamma u) o kappa.
struct VarMap {
  enum class Kind { Identity, Rotation, Sector };
  Kind kind = Kind::Identity;
  /// Rotation angle in the (x_1, x_2) plane.
  double angle = 0.0;

  /// Sector map kappa(x) = (x', sqrt(x_n^2 - |x'|^2)) on x_n > |x'|.
  Vec forward(const Vec& x) const;
  /// kappa^{-1}(y) = (y', sqrt(y_n^2 + |y'|^2)) on y_n > 0.
  Vec inverse(const Vec& y) const;
  bool in_domain(const Vec& x) const;
  bool in_range(const Vec& y) const;
};

/// Forward: out(x) = gamma(kappa(x)) u(kappa(x)). Inverse: out(x) = gamma(x) u(kappa^{-1}(x)),
/// which is (gamma~ u) o kappa^{-1} with gamma~ = gamma o kappa.
/// Off-grid values come from tensor cubic interpolation; `monitor` receives
/// the largest difference between the cubic and quintic interpolants.
/// Throws OutOfSector when gamma reaches outside the range of kappa or a
/// needed source point leaves the box.
Field apply_change_of_vars(const VarMap& kappa, const Weight& gamma, const Field& u,
                           Direction direction = Direction::Forward, double* monitor = nullptr);

/// Tensor Lagrange interpolation of the samples at an arbitrary point
/// (periodic wrap), using 4 (cubic) or 6 (quintic) nodes per axis.
Complex interpolate(const Field& u, const Vec& x, int nodes = 4);

// ---------------------------------------------------------------------------
// Audits and residual checks.

/// ||A M u - M A u|| / ||u|| for a symbol A and multiplier M.
double commutator_residual(const PhaseSpaceSymbol& a, const Multiplier& m, const Field& u);
/// The Omega_ij against h(p(D)) case.
double commutator_residual(const DualPair& pair, int i, int j, const grid::Cutoff& h, const Field& u);
double commutator_residual(const DualPair& pair, int i, int j, const std::function<double(double)>& h,
                           const Field& u);

enum class Family { A, B, R };
std::string to_string(Family f);

/// Orders of an amplitude class: <x>^m, <y>^{m'}, <xi>^k.
struct AmplitudeClass {
  Family family = Family::A;
  double m = 0.0;
  double m_prime = 0.0;
  double k = 0.0;
};

using Amplitude = std::function<Complex(const Vec& x, const Vec& y, const Vec& xi)>;

struct AuditResult {
  std::string label;
  Family family = Family::A;
  double worst_ratio = 0.0;
  bool passed = false;
};

/// Largest |d_x^a d_y^b d_xi^c amp| / weight over seeded samples at dyadic
/// radii 1..2^12, derivative orders a + b + c <= 2 by central differences in
/// random directions. Passes iff the worst ratio is at most `constant`.
AuditResult class_audit(const Amplitude& amp, int dim, const AmplitudeClass& cls, int samples,
                        std::uint64_t seed, double constant = 4.0, const std::string& label = "");

/// Header symbol,family,worst_ratio,passed.
void write_audit_csv(const std::string& path, const std::vector<AuditResult>& rows);

/// Products f(x) g(y) c(xi); a general amplitude is a sum of them.
struct AmplitudeTerm {
  std::function<Complex(const Vec&)> fx;
  std::function<Complex(const Vec&)> gy;
  std::function<Complex(const Vec&)> cxi;
};

enum class Phase { Identity, Psi, PsiInverse };

/// T_a u(x) = sum over terms of integral e^{i(x.xi + phi(y, xi))} a(x, y, xi) u(y) dy dxi
/// with phi = -y.xi, -y.psi(xi) or -y.psi^{-1}(xi). T_1 with the identity phase is (2 pi)^n.
struct Fio {
  std::vector<AmplitudeTerm> terms;
  Phase phase = Phase::Identity;
  std::shared_ptr<const DualPair> pair;
};
Field apply_fio(const Fio& t, const Field& u);

struct RatioSequence {
  std::vector<double> lambdas;
  std::vector<double> ratios;
  double spread() const;
  bool bounded(double slack = 3.0) const { return spread() <= slack; }
};

using FieldFamily = std::function<Field(double lambda)>;

/// u_lambda(x) = f(x / lambda) on g.
FieldFamily dilation_family(const Grid& g, std::function<Complex(const Vec&)> f);

/// ||T_a u_l||_{L^2_mu} / ||u_l||_{L^2_{m+mu}} across the family.
RatioSequence fio_bound_ratio(const Fio& t, double m, double mu, const FieldFamily& family,
                              const std::vector<double>& lambdas);

/// ||(a(X,D) I_gamma - I_gamma a~(X,D)) u_l|| / ||u_l||_{L^2_{m-1}} with
/// a~(x, xi) = a_0(x psi'(psi^{-1} xi), psi^{-1} xi) and a_0 = a gamma_0.
/// `a` must be separable; the plan must be a forward plan.
RatioSequence egorov_residual(const PhaseSpaceSymbol& a, const Weight& gamma0,
                              const CanonicalPlan& plan, double m, const FieldFamily& family,
                              const std::vector<double>& lambdas);

/// ||a(X,D) u|| / (sum_{i<j} ||Omega_ij(X,D) u||_{L^2_{m-1}} + ||u||_{L^2_{m-1}}).
/// Throws StructureViolation when a does not vanish on orbit samples.
RatioSequence basiclem_ratio(const DualPair& pair, const PhaseSpaceSymbol& a, double m,
                             const FieldFamily& family, const std::vector<double>& lambdas,
                             const QuantizeOptions& options = {});

/// Orbit-vanishing threshold used by the structure spot-checks.
inline constexpr double kStructureTol = 1e-10;

}  // namespace slab::quantize
