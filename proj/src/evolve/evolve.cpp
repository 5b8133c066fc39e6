#include "slab/evolve.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "json.hpp"
#include "slab/error.hpp"

namespace slab::evolve {

std::vector<double> EvolutionSpec::times() const {
  std::vector<double> t;
  const int steps = static_cast<int>(std::llround(2.0 * T / dt));
  for (int j = 0; j <= steps; ++j) t.push_back(-T + j * dt);
  return t;
}

void validate(const EvolutionSpec& spec) {
  if (spec.order < 1) throw Error(ErrorCode::ConfigInvalid, "EvolutionSpec: order must be >= 1");
  if (spec.sign != 1 && spec.sign != -1) throw Error(ErrorCode::ConfigInvalid, "EvolutionSpec: sign must be +-1");
  if (!(spec.dt > 0.0)) throw Error(ErrorCode::ConfigInvalid, "EvolutionSpec: dt must be positive");
  if (!(spec.T >= 0.0)) throw Error(ErrorCode::ConfigInvalid, "EvolutionSpec: T must be non-negative");
}

CVec symbol_power(const EvolutionSpec& spec, const Grid& g) {
  CVec out(static_cast<Eigen::Index>(g.size()));
  for (std::size_t k = 0; k < g.size(); ++k) {
    const Vec xi = g.frequency(k);
    out[static_cast<Eigen::Index>(k)] =
        xi.norm() < symbols::kXiFloor ? 0.0 : std::pow(spec.pair.primal.value(xi), spec.order);
  }
  return out;
}

Propagator::Propagator(const EvolutionSpec& spec, const Grid& g)
    : sign_(spec.sign), grid_(g), power_(symbol_power(spec, g)) {
  validate(spec);
}

Spectrum Propagator::at(const Spectrum& phi_hat, double t) const {
  Spectrum out = phi_hat;
  for (Eigen::Index k = 0; k < out.values.size(); ++k) {
    out.values[k] *= std::polar(1.0, sign_ * t * power_[k].real());
  }
  return out;
}

Field Propagator::at(const Field& phi, double t) const {
  return grid::inverse_transform(at(grid::transform(phi), t));
}

Field schrodinger_propagate(const EvolutionSpec& spec, const Field& phi, double t) {
  return Propagator(spec, phi.grid).at(phi, t);
}

namespace {

struct WaveParts {
  CVec p;
  CVec chi;
  Spectrum phi;
  Spectrum psi;
};

WaveParts wave_parts(const EvolutionSpec& spec, const WaveState& state, double xi_min) {
  if (spec.order != 1) throw Error(ErrorCode::ConfigInvalid, "wave_propagate: needs order 1");
  const Grid& g = state.displacement.grid;
  if (xi_min < 0.0) xi_min = grid::default_xi_min(g);
  const grid::Cutoff low = grid::low_frequency_cutoff(xi_min);
  WaveParts parts{symbol_power(spec, g), CVec(static_cast<Eigen::Index>(g.size())),
                  grid::transform(state.displacement), grid::transform(state.velocity)};
  double excluded = 0.0;
  double total = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k) {
    const auto i = static_cast<Eigen::Index>(k);
    const double c = low(g.frequency(k));
    parts.chi[i] = c;
    const double mass = std::norm(parts.psi.values[i]);
    total += mass;
    excluded += (1.0 - c * c) * mass;
  }
  if (total > 0.0 && excluded > 1e-3 * total) {
    throw Error(ErrorCode::LowFrequencyMass,
                "wave_propagate: velocity has " + std::to_string(100.0 * excluded / total) +
                    "% of its spectral mass in the excluded band");
  }
  return parts;
}

}  // namespace

Field wave_propagate(const EvolutionSpec& spec, const WaveState& state, double t, double xi_min) {
  const WaveParts w = wave_parts(spec, state, xi_min);
  Spectrum out = w.phi;
  for (Eigen::Index k = 0; k < out.values.size(); ++k) {
    const double p = w.p[k].real();
    const Complex c = w.chi[k];
    const Complex lifted = c == 0.0 ? Complex(0.0) : c * std::sin(t * p) / p * w.psi.values[k];
    out.values[k] = std::cos(t * p) * w.phi.values[k] + lifted;
  }
  return grid::inverse_transform(out);
}

Field wave_velocity(const EvolutionSpec& spec, const WaveState& state, double t, double xi_min) {
  const WaveParts w = wave_parts(spec, state, xi_min);
  Spectrum out = w.phi;
  for (Eigen::Index k = 0; k < out.values.size(); ++k) {
    const double p = w.p[k].real();
    out.values[k] = -p * std::sin(t * p) * w.phi.values[k] + w.chi[k] * std::cos(t * p) * w.psi.values[k];
  }
  return grid::inverse_transform(out);
}

double wave_energy(const EvolutionSpec& spec, const Field& w, const Field& wt) {
  Spectrum s = grid::transform(w);
  s.values.array() *= symbol_power(spec, w.grid).array();
  const double a = grid::norm(s);
  const double b = grid::norm(wt);
  return a * a + b * b;
}

CVec resolvent_multiplier(const ResolventQuery& q, const EvolutionSpec& spec, const Grid& g) {
  if (!(q.eps > 0.0)) throw Error(ErrorCode::ConfigInvalid, "resolvent_apply: eps must be positive");
  const CVec power = symbol_power(spec, g);
  const double s = q.branch == Branch::Minus ? -1.0 : 1.0;
  CVec out(power.size());
  for (Eigen::Index k = 0; k < power.size(); ++k) {
    const double c = q.chi ? q.chi(g.frequency(static_cast<std::size_t>(k))) : 1.0;
    out[k] = c == 0.0 ? Complex(0.0) : c / Complex(power[k].real() - q.d, s * q.eps);
  }
  return out;
}

Field resolvent_apply(const ResolventQuery& q, const EvolutionSpec& spec, const Field& f) {
  Spectrum s = grid::transform(f);
  s.values.array() *= resolvent_multiplier(q, spec, f.grid).array();
  return grid::inverse_transform(s);
}

void write_trajectory(const std::string& dir, const EvolutionSpec& spec, const Field& phi,
                      const std::vector<double>& times) {
  std::filesystem::create_directories(dir);
  const Propagator prop(spec, phi.grid);
  const Spectrum phi_hat = grid::transform(phi);
  nlohmann::json files = nlohmann::json::array();
  for (std::size_t i = 0; i < times.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "field_%03zu.bin", i);
    grid::write_field((std::filesystem::path(dir) / name).string(),
                      grid::inverse_transform(prop.at(phi_hat, times[i])));
    files.push_back(name);
  }
  nlohmann::json manifest = {
      {"spec", {{"p", spec.pair.primal.label()}, {"order", spec.order}, {"sign", spec.sign}}},
      {"times", times},
      {"files", files}};
  std::ofstream out(std::filesystem::path(dir) / "manifest.json");
  out << manifest.dump(2) << '\n';
}

}  // namespace slab::evolve
