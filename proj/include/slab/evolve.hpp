#pragma once

#include <functional>
#include <string>
#include <vector>

#include "slab/grid.hpp"
#include "slab/symbols.hpp"

namespace slab::evolve {

using grid::CVec;
using grid::Field;
using grid::Grid;
using grid::Spectrum;
using symbols::DualPair;

/// i d_t u = +- p(D)^m u, sampled on t_j = -T + j dt.
struct EvolutionSpec {
  DualPair pair;
  int order = 2;
  /// -1 gives exp(-i t p^m), +1 gives exp(+i t p^m).
  int sign = -1;
  double T = 1.0;
  double dt = 0.25;

  std::vector<double> times() const;
};

/// Throws ConfigInvalid unless order >= 1, sign = +-1, dt > 0 and T >= 0.
void validate(const EvolutionSpec& spec);

/// p(xi)^m on the lattice, 0 at xi = 0.
CVec symbol_power(const EvolutionSpec& spec, const Grid& g);

/// Caches p^m on one grid so each time sample is a single multiplier.
class Propagator {
 public:
  Propagator(const EvolutionSpec& spec, const Grid& g);
  Spectrum at(const Spectrum& phi_hat, double t) const;
  Field at(const Field& phi, double t) const;
  const CVec& power() const { return power_; }

 private:
  int sign_;
  Grid grid_;
  CVec power_;
};

/// u(t) = inverse_transform(exp(sign i t p^m) phi^).
Field schrodinger_propagate(const EvolutionSpec& spec, const Field& phi, double t);

struct WaveState {
  Field displacement;
  Field velocity;
};

/// w(t) = cos(t p(D)) phi + p(D)^{-1} sin(t p(D)) chi(D) psi with chi the
/// low-frequency cutoff at xi_min (negative selects grid::default_xi_min).
/// Throws LowFrequencyMass when more than 0.1% of |psi^|^2 sits where chi < 1.
Field wave_propagate(const EvolutionSpec& spec, const WaveState& state, double t, double xi_min = -1.0);
/// d_t w(t).
Field wave_velocity(const EvolutionSpec& spec, const WaveState& state, double t, double xi_min = -1.0);
/// ||p(D) w||^2 + ||d_t w||^2.
double wave_energy(const EvolutionSpec& spec, const Field& w, const Field& wt);

/// (p^m - d - i eps)^{-1} for Branch::Minus, (p^m - d + i eps)^{-1} for Branch::Plus.
enum class Branch { Minus, Plus };

struct ResolventQuery {
  double d = 1.0;
  double eps = 1.0;
  Branch branch = Branch::Minus;
  std::function<double(const Vec&)> chi;
};

CVec resolvent_multiplier(const ResolventQuery& q, const EvolutionSpec& spec, const Grid& g);
Field resolvent_apply(const ResolventQuery& q, const EvolutionSpec& spec, const Field& f);

/// Writes field_NNN.bin (+ sidecars) per time and manifest.json {spec, times}.
void write_trajectory(const std::string& dir, const EvolutionSpec& spec, const Field& phi,
                      const std::vector<double>& times);

}  // namespace slab::evolve
