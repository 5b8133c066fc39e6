#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "slab/evolve.hpp"
#include "slab/grid.hpp"
#include "slab/quantize.hpp"
#include "slab/symbols.hpp"

namespace slab::estimates {

using evolve::EvolutionSpec;
using grid::Field;
using grid::Grid;
using symbols::PhaseSpaceSymbol;

// ---------------------------------------------------------------------------
// Sweep bookkeeping.

struct Row {
  std::string symbol;
  std::string p;
  int N = 0;
  double L = 0.0;
  double T = 0.0;
  /// NaN when the sweep has no regularization parameter.
  double eps = 0.0;
  double ratio = 0.0;
  bool mass_ok = true;
  std::uint64_t seed = 0;
};

enum class Verdict { Bounded, Growing, Inconclusive };
std::string to_string(Verdict v);

struct VerdictRule {
  /// Bounded when the last step grows by at most this fraction.
  double bounded_growth = 0.10;
  /// Growing when every step grows by at least this fraction.
  double growing_growth = 0.25;
};

/// Verdict from one value per rung, in ladder order.
Verdict classify(const std::vector<double>& values, const VerdictRule& rule = {});

struct SweepResult {
  std::string symbol;
  std::string p;
  int trials = 0;
  std::vector<Row> rows;
  Verdict verdict = Verdict::Inconclusive;

  std::vector<double> ratios() const;
  bool mass_ok() const;
};

/// One row per SweepResult row, header symbol,p,N,L,T,eps,ratio,mass_ok,seed.
void write_sweep_csv(const std::string& path, const std::vector<SweepResult>& results);
std::vector<Row> read_sweep_csv(const std::string& path);

/// Independent stream for trial `trial` of a sweep seeded with `seed`.
std::uint64_t trial_seed(std::uint64_t seed, std::uint64_t trial);

// ---------------------------------------------------------------------------
// Smoothing norm.

enum class MassPolicy { Enforce, Record };

struct SmoothingOptions {
  /// Ball radius for the containment monitor; negative selects L.
  double containment_radius = -1.0;
  double mass_target = 0.999;
  MassPolicy policy = MassPolicy::Enforce;
  /// Low-frequency cutoff for sigma; negative selects grid::default_xi_min.
  double xi_min = -1.0;
};

struct SmoothingReport {
  double ratio = 0.0;
  /// Last-sample integrand over the peak integrand.
  double tail = 0.0;
  /// Smallest contained mass fraction over the window.
  double min_mass = 1.0;
  bool mass_ok = true;
};

/// Trapezoid rule for int_{-T}^{T} ||sigma(X,D) u(t)||^2 dt / ||phi||^2 with
/// u(t) = exp(sign i t p(D)^m) phi, on the samples spec.times().
/// Throws MassEscape under MassPolicy::Enforce when the contained fraction
/// drops below the target at some sample.
SmoothingReport smoothing_ratio(const PhaseSpaceSymbol& sigma, const EvolutionSpec& spec,
                                const Field& phi, const SmoothingOptions& options = {});
/// Same, with a prebuilt operator and propagator on phi's grid.
SmoothingReport smoothing_ratio(const quantize::Operator& op, const evolve::Propagator& prop,
                                const EvolutionSpec& spec, const Field& phi,
                                const SmoothingOptions& options = {});

/// Random band-limited data: a sum of Gaussian packets centred at the origin
/// with random complex amplitudes and carrier directions, then a smooth
/// spectral lowpass equal to 1 on |xi| <= band_lo and 0 past band_hi.
/// The draw depends on the seed only, so every grid sees the same function.
struct DataSpec {
  int packets = 4;
  double width = 6.0;
  double carrier = 0.25;
  double band_lo = 0.5;
  double band_hi = 0.9;
};
Field random_data(const Grid& g, const DataSpec& data, std::uint64_t seed);

struct Rung {
  int N = 0;
  double L = 0.0;
  double T = 0.0;
};

struct SweepOptions {
  int trials = 8;
  std::uint64_t seed = 1;
  DataSpec data;
  SmoothingOptions smoothing;
  VerdictRule rule;
  int dim = 2;
};

/// Per rung the max of smoothing_ratio over `trials` data draws; trial k
/// uses the same draw on every rung.
SweepResult smoothing_sweep(const PhaseSpaceSymbol& sigma, const EvolutionSpec& spec,
                            const std::vector<Rung>& ladder, const SweepOptions& options);

// ---------------------------------------------------------------------------
// Limiting absorption.

struct LapOptions {
  Grid grid;
  double d = 1.0;
  evolve::Branch branch = evolve::Branch::Minus;
  std::function<double(const Vec&)> chi;
  std::vector<double> eps;
  int trials = 8;
  int iterations = 20;
  std::uint64_t seed = 1;
  /// Low-frequency cutoff for sigma; negative selects grid::default_xi_min.
  double xi_min = -1.0;
  /// Skip the orbit-vanishing check (control branch).
  bool control = false;
  VerdictRule rule;
};

/// Dyadic ladder 2^0, 2^-1, ..., 2^-k_max.
std::vector<double> dyadic_eps(int k_max);

/// Randomized power-iteration estimate of ||G|| with
/// G = sigma(X,D) (p(D)^m - d -+ i eps)^{-1} chi(D) sigma(X,D)^*.
double lap_norm(const quantize::Operator& op, const EvolutionSpec& spec, const LapOptions& options,
                double eps);

/// One row per eps. Throws StructureViolation unless options.control or sigma
/// vanishes on the orbit set.
SweepResult lap_sweep(const PhaseSpaceSymbol& sigma, const EvolutionSpec& spec,
                      const LapOptions& options);

/// max/min of the sweep ratios.
double spread(const SweepResult& r);
/// Verdicts for an eps ladder (ratios ordered by decreasing eps): bounded when
/// max/min <= bound, growing when non-decreasing with last/first >= factor.
Verdict classify_lap(const std::vector<double>& values, double bound = 2.0, double factor = 2.0);

/// First eps after which the relative change to the last value stays below
/// tol; NaN when the sequence never settles.
double stabilization_eps(const SweepResult& r, double tol);

// ---------------------------------------------------------------------------
// Restriction to rho Sigma_p.

struct RestrictionOptions {
  Grid grid;
  int nodes = 256;
  double xi_min = -1.0;
};

/// rho^{n-1} int_{S^{n-1}} |g^(rho theta / p(theta))|^2 p(theta)^{-n} dtheta,
/// the squared L^2 norm of g^ on rho Sigma_p against dS / |grad p|.
/// Throws BandExceeded when rho Sigma_p leaves the lattice band.
double surface_norm_squared(const symbols::HomogeneousSymbol& p, const Field& g, double rho,
                            int nodes);

/// ||(sigma(X,D)^* f)^||_{L^2(rho Sigma_p)} / ||f||.
double restriction_ratio(const PhaseSpaceSymbol& sigma, const EvolutionSpec& spec, const Field& f,
                         double rho, const RestrictionOptions& options);

/// Max of restriction_ratio over `trials` draws of random_data dilated by rho,
/// f_rho(x) = f(rho x).
double restriction_norm(const PhaseSpaceSymbol& sigma, const EvolutionSpec& spec, double rho,
                        int trials, std::uint64_t seed, const RestrictionOptions& options,
                        const DataSpec& data = {});

// ---------------------------------------------------------------------------
// Duality.

/// max over random (phi, v) of |<sigma T phi, v>_{t,x} - <phi, T^* sigma^* v>_x|
/// / (||phi|| ||v||), with <F, G>_{t,x} = dt sum_j <F_j, G_j> over spec.times()
/// and T^* w = F^{-1}[dt sum_j exp(-sign i t_j p^m) w^_j].
double duality_check(const PhaseSpaceSymbol& sigma, const EvolutionSpec& spec, const Grid& g,
                     int trials, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Weighted convolution bound.

/// (sum_i h^n |sum_j h^n f_j / (|x_i|^g |x_i - y_j|^m |y_j|^d)|^2)^{1/2} / ||f||
/// with y_j = x_j - h/4 and x_i = x_i + h/4 per axis, so no node meets a
/// singularity. f must be real and non-negative on an offset grid.
/// Throws ExponentViolation unless g < n/2, d < n/2, m < n and g + d + m = n.
double hardy_littlewood_oracle(double gamma, double delta, double m, const Field& f);

/// The n = 1 Schur bound int_0^inf t^{-1/2-gamma} (|1-t|^{-m} + (1+t)^{-m}) dt
/// evaluated for gamma = delta by Beta functions.
double hardy_littlewood_bound_1d(double gamma, double m);

}  // namespace slab::estimates
