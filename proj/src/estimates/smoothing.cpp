#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <memory>
#include <sstream>

#include "slab/error.hpp"
#include "slab/estimates.hpp"
#include "slab/parallel.hpp"

namespace slab::estimates {

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Bounded: return "bounded";
    case Verdict::Growing: return "growing";
    case Verdict::Inconclusive: return "inconclusive";
  }
  return "?";
}

Verdict classify(const std::vector<double>& values, const VerdictRule& rule) {
  if (values.size() < 2) return Verdict::Inconclusive;
  bool growing = true;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (!(values[i] >= (1.0 + rule.growing_growth) * values[i - 1])) growing = false;
  }
  if (growing) return Verdict::Growing;
  const double last = values.back();
  const double prev = values[values.size() - 2];
  if (last <= (1.0 + rule.bounded_growth) * prev) return Verdict::Bounded;
  return Verdict::Inconclusive;
}

std::vector<double> SweepResult::ratios() const {
  std::vector<double> out;
  for (const auto& r : rows) out.push_back(r.ratio);
  return out;
}

bool SweepResult::mass_ok() const {
  return std::all_of(rows.begin(), rows.end(), [](const Row& r) { return r.mass_ok; });
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        out.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        out.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.emplace_back();
    } else {
      out.back() += c;
    }
  }
  return out;
}

}  // namespace

void write_sweep_csv(const std::string& path, const std::vector<SweepResult>& results) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::ConfigInvalid, "write_sweep_csv: cannot open " + path);
  out << "symbol,p,N,L,T,eps,ratio,mass_ok,seed\n" << std::setprecision(12);
  for (const auto& res : results) {
    for (const auto& r : res.rows) {
      out << csv_field(r.symbol) << ',' << csv_field(r.p) << ',' << r.N << ',' << r.L << ',' << r.T
          << ',' << r.eps << ',' << r.ratio << ',' << (r.mass_ok ? 1 : 0) << ',' << r.seed << '\n';
    }
  }
}

std::vector<Row> read_sweep_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ConfigInvalid, "read_sweep_csv: cannot open " + path);
  std::string line;
  std::getline(in, line);
  std::vector<Row> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_csv(line);
    if (f.size() != 9) throw Error(ErrorCode::ConfigInvalid, "read_sweep_csv: expected 9 fields");
    Row r;
    r.symbol = f[0];
    r.p = f[1];
    r.N = std::stoi(f[2]);
    r.L = std::stod(f[3]);
    r.T = std::stod(f[4]);
    r.eps = std::stod(f[5]);
    r.ratio = std::stod(f[6]);
    r.mass_ok = f[7] == "1";
    r.seed = std::stoull(f[8]);
    rows.push_back(r);
  }
  return rows;
}

std::uint64_t trial_seed(std::uint64_t seed, std::uint64_t trial) {
  // splitmix64 finalizer over a golden-ratio stride.
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (trial + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

SmoothingReport smoothing_ratio(const quantize::Operator& op, const evolve::Propagator& prop,
                                const EvolutionSpec& spec, const Field& phi,
                                const SmoothingOptions& options) {
  const Grid& g = phi.grid;
  const double radius = options.containment_radius < 0.0 ? g.L : options.containment_radius;
  const double base = grid::norm(phi);
  SmoothingReport report;
  if (base == 0.0) return report;

  const grid::Spectrum phi_hat = grid::transform(phi);
  const std::vector<double> times = spec.times();
  std::vector<double> integrand(times.size());
  for (std::size_t j = 0; j < times.size(); ++j) {
    const grid::Spectrum u_hat = prop.at(phi_hat, times[j]);
    const double mass = grid::mass_fraction(grid::inverse_transform(u_hat), radius);
    report.min_mass = std::min(report.min_mass, mass);
    if (mass < options.mass_target) {
      report.mass_ok = false;
      if (options.policy == MassPolicy::Enforce) {
        std::ostringstream msg;
        msg << "smoothing_ratio: contained mass " << mass << " < " << options.mass_target
            << " at t = " << times[j];
        throw Error(ErrorCode::MassEscape, msg.str());
      }
    }
    const double a = grid::norm(op.apply(u_hat));
    integrand[j] = a * a;
  }

  double total = 0.0;
  for (std::size_t j = 0; j + 1 < times.size(); ++j) {
    total += 0.5 * (times[j + 1] - times[j]) * (integrand[j] + integrand[j + 1]);
  }
  const double peak = *std::max_element(integrand.begin(), integrand.end());
  report.ratio = total / (base * base);
  report.tail = peak > 0.0 ? integrand.back() / peak : 0.0;
  return report;
}

SmoothingReport smoothing_ratio(const PhaseSpaceSymbol& sigma, const EvolutionSpec& spec,
                                const Field& phi, const SmoothingOptions& options) {
  quantize::QuantizeOptions q;
  q.xi_min = options.xi_min;
  const quantize::Operator op(sigma, phi.grid, q);
  const evolve::Propagator prop(spec, phi.grid);
  return smoothing_ratio(op, prop, spec, phi, options);
}

Field random_data(const Grid& g, const DataSpec& data, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> stretch(0.8, 1.2);
  struct Packet {
    Complex c;
    Vec k;
  };
  std::vector<Packet> packets;
  for (int q = 0; q < data.packets; ++q) {
    const Complex c(normal(rng), normal(rng));
    Vec dir(g.n);
    for (int i = 0; i < g.n; ++i) dir[i] = normal(rng);
    packets.push_back({c, dir.normalized() * data.carrier * stretch(rng)});
  }
  const double s2 = 2.0 * data.width * data.width;
  Field u = grid::sample(g, [&](const Vec& x) {
    Complex acc = 0.0;
    const double env = std::exp(-x.squaredNorm() / s2);
    for (const auto& p : packets) acc += p.c * std::polar(env, p.k.dot(x));
    return acc;
  });
  grid::Spectrum s = grid::transform(u);
  const double width = data.band_hi - data.band_lo;
  for (std::size_t k = 0; k < g.size(); ++k) {
    const double r = g.frequency(k).norm();
    s.values[static_cast<Eigen::Index>(k)] *= 1.0 - grid::smooth_step((r - data.band_lo) / width);
  }
  return grid::inverse_transform(s);
}

SweepResult smoothing_sweep(const PhaseSpaceSymbol& sigma, const EvolutionSpec& spec,
                            const std::vector<Rung>& ladder, const SweepOptions& options) {
  evolve::validate(spec);
  struct Stage {
    Grid grid;
    EvolutionSpec spec;
    std::unique_ptr<quantize::Operator> op;
    std::unique_ptr<evolve::Propagator> prop;
  };
  std::vector<Stage> stages;
  quantize::QuantizeOptions q;
  q.xi_min = options.smoothing.xi_min;
  for (const Rung& r : ladder) {
    Stage s{grid::make_grid(options.dim, r.N, r.L, true), spec, nullptr, nullptr};
    s.spec.T = r.T;
    s.op = std::make_unique<quantize::Operator>(sigma, s.grid, q);
    s.prop = std::make_unique<evolve::Propagator>(s.spec, s.grid);
    stages.push_back(std::move(s));
  }

  const std::size_t trials = static_cast<std::size_t>(std::max(options.trials, 1));
  const auto reports = parallel_map<SmoothingReport>(stages.size() * trials, [&](std::size_t i) {
    const Stage& s = stages[i / trials];
    const Field phi = random_data(s.grid, options.data, trial_seed(options.seed, i % trials));
    return smoothing_ratio(*s.op, *s.prop, s.spec, phi, options.smoothing);
  });

  SweepResult result;
  result.symbol = sigma.label;
  result.p = spec.pair.primal.label();
  result.trials = static_cast<int>(trials);
  for (std::size_t r = 0; r < stages.size(); ++r) {
    Row row{sigma.label, result.p, ladder[r].N, ladder[r].L, ladder[r].T,
            std::numeric_limits<double>::quiet_NaN(), 0.0, true, options.seed};
    for (std::size_t t = 0; t < trials; ++t) {
      const SmoothingReport& rep = reports[r * trials + t];
      row.ratio = std::max(row.ratio, rep.ratio);
      row.mass_ok = row.mass_ok && rep.mass_ok;
    }
    result.rows.push_back(row);
  }
  result.verdict = classify(result.ratios(), options.rule);
  return result;
}

}  // namespace slab::estimates
