#include <cctype>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "slab/cli.hpp"
#include "slab/error.hpp"
#include "slab/estimates.hpp"
#include "slab/evolve.hpp"
#include "slab/parallel.hpp"
#include "slab/quantize.hpp"
#include "slab/symbols.hpp"

namespace slab::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

using estimates::Verdict;
using grid::Field;
using grid::Grid;
using symbols::DualPair;
using symbols::PhaseSpaceSymbol;

// Reads "name:key=value" and returns value, or `fallback` when absent.
double spec_param(const std::string& spec, const std::string& key, double fallback) {
  const auto pos = spec.find(key + "=");
  if (pos == std::string::npos) return fallback;
  try {
    return std::stod(spec.substr(pos + key.size() + 1));
  } catch (const std::exception&) {
    throw Error(ErrorCode::ConfigInvalid, "sigma spec '" + spec + "': bad value for " + key);
  }
}

PhaseSpaceSymbol make_sigma(const std::string& name, const DualPair& pair) {
  const int n = pair.primal.dim();
  if (name == "structured") return symbols::structured_sigma(pair);
  if (name == "unstructured") return symbols::critical_sigma(n);
  if (name == "tau") return symbols::tau_phase_symbol(pair);
  if (name == "one") return symbols::multiplier_symbol("one", [](const Vec&) -> Complex { return 1.0; });
  if (name.rfind("bracket", 0) == 0) return symbols::bracket_sigma(n, spec_param(name, "s", 0.6));
  if (name.rfind("omega", 0) == 0) {
    const int i = static_cast<int>(spec_param(name, "i", 0));
    const int j = static_cast<int>(spec_param(name, "j", 1));
    if (i < 0 || j <= i || j >= n) throw Error(ErrorCode::ConfigInvalid, "sigma spec '" + name + "': need 0 <= i < j < n");
    return symbols::omega_symbol(pair, i, j);
  }
  throw Error(ErrorCode::ConfigInvalid, "unknown sigma '" + name + "'");
}

std::string file_stem(const std::string& s) {
  std::string out;
  for (char c : s) out += std::isalnum(static_cast<unsigned char>(c)) ? c : '_';
  return out;
}

Grid config_grid(const json& d) {
  return grid::make_grid(d["dim"].get<int>(), d["grid"]["N"].get<int>(), d["grid"]["L"].get<double>(),
                         d["grid"]["offset"].get<bool>());
}

evolve::EvolutionSpec config_spec(const json& d, const DualPair& pair) {
  const auto& ev = d["evolution"];
  evolve::EvolutionSpec spec{pair, ev["order"].get<int>(), ev["sign"].get<int>(), ev["T"].get<double>(),
                             ev["dt"].get<double>()};
  evolve::validate(spec);
  return spec;
}

estimates::DataSpec config_data(const json& d) {
  estimates::DataSpec data;
  if (!d.contains("data")) return data;
  const auto& j = d["data"];
  data.packets = j.value("packets", data.packets);
  data.width = j.value("width", data.width);
  data.carrier = j.value("carrier", data.carrier);
  data.band_lo = j.value("band_lo", data.band_lo);
  data.band_hi = j.value("band_hi", data.band_hi);
  return data;
}

grid::Cutoff profile(const json& edges) {
  return grid::annular(edges[0].get<double>(), edges[1].get<double>(), edges[2].get<double>(),
                       edges[3].get<double>());
}

Verdict expected(const json& d, const std::string& sigma) {
  if (!d.contains("expect") || !d["expect"].contains(sigma)) return Verdict::Inconclusive;
  return d["expect"][sigma] == "bounded" ? Verdict::Bounded : Verdict::Growing;
}

std::string fmt(double v) {
  std::ostringstream s;
  s << std::setprecision(6) << v;
  return s.str();
}

struct Context {
  const ExperimentConfig& cfg;
  const json& d;
  RunOutcome& outcome;

  std::string path(const std::string& name) {
    outcome.artifacts.push_back(name);
    return (fs::path(cfg.out) / name).string();
  }
  void report(const std::string& line, bool ok) {
    outcome.summary.push_back(line + (ok ? "  [pass]" : "  [FAIL]"));
    if (!ok) outcome.exit_code = 2;
  }
};

void run_geometry(Context& ctx) {
  const int dim = ctx.d["dim"].get<int>();
  const int samples = ctx.d["samples"].get<int>();
  std::ofstream out(ctx.path("geometry.csv"));
  out << "p,check,worst,tolerance,passed\n" << std::setprecision(6);
  for (const auto& spec : ctx.d["p"]) {
    const DualPair pair = symbols::pair_from_spec(spec.get<std::string>(), dim);
    const bool closed = pair.construction == symbols::DualConstruction::ClosedForm;
    std::mt19937_64 rng(ctx.cfg.seed);
    std::normal_distribution<double> normal;
    double euler = 0.0, dual_one = 0.0, inverse = 0.0, round = 0.0, orbit = 0.0;
    for (int s = 0; s < samples; ++s) {
      Vec xi(dim);
      for (int i = 0; i < dim; ++i) xi[i] = normal(rng);
      const double p = pair.primal.value(xi);
      const Vec g = pair.primal.gradient(xi);
      euler = std::max(euler, std::abs(g.dot(xi) - p) / p);
      dual_one = std::max(dual_one, std::abs(pair.dual.value(g) - 1.0));
      inverse = std::max(inverse, (pair.dual.gradient(g) - xi / p).norm());
      round = std::max(round, (symbols::psi_inv(pair, symbols::psi(pair, xi)) - xi).norm() / xi.norm());
      const auto o = symbols::orbit(pair, xi, 0.5 + std::abs(normal(rng)));
      orbit = std::max(orbit, symbols::gamma_p_membership(pair, o.x, o.xi).residual);
    }
    const std::string label = pair.primal.label();
    const struct {
      const char* name;
      double worst;
      double tol;
    } rows[] = {{"euler", euler, 1e-8},
                {"dual_at_gradient", dual_one, closed ? 1e-6 : 1e-5},
                {"dual_gradient_inverse", inverse, 1e-5},
                {"psi_round_trip", round, 1e-8},
                {"omega_on_orbit", orbit, 1e-10}};
    for (const auto& r : rows) {
      const bool ok = r.worst <= r.tol;
      out << '"' << label << "\"," << r.name << ',' << r.worst << ',' << r.tol << ',' << (ok ? 1 : 0) << '\n';
      ctx.report(label + " " + r.name + " = " + fmt(r.worst) + " (tolerance " + fmt(r.tol) + ")", ok);
    }
  }
}

void run_commutator(Context& ctx) {
  const int dim = ctx.d["dim"].get<int>();
  if (dim < 2) throw Error(ErrorCode::ConfigInvalid, "commutator: needs dim >= 2");
  const Grid g = config_grid(ctx.d);
  const double tol = ctx.d["tolerance"].get<double>();
  // Gaussian in p keeps the kernel of h(p(D)) short, so the periodic box does not leak.
  const double w = ctx.d["h_width"].get<double>();
  const auto hp = [w](double s) { return std::exp(-0.5 * s * s / (w * w)); };
  const Field u = estimates::random_data(g, config_data(ctx.d), estimates::trial_seed(ctx.cfg.seed, 0));
  std::ofstream out(ctx.path("commutator.csv"));
  out << "p,N,L,residual,tolerance,passed\n" << std::setprecision(6);
  for (const auto& spec : ctx.d["p"]) {
    const DualPair pair = symbols::pair_from_spec(spec.get<std::string>(), dim);
    const double r = quantize::commutator_residual(pair, 0, 1, std::function<double(double)>(hp), u);
    const bool ok = r <= tol;
    out << '"' << pair.primal.label() << "\"," << g.N << ',' << g.L << ',' << r << ',' << tol << ',' << (ok ? 1 : 0)
        << '\n';
    ctx.report(pair.primal.label() + " [Omega_01, h(p(D))] residual = " + fmt(r), ok);
  }
}

void run_egorov(Context& ctx) {
  const int dim = ctx.d["dim"].get<int>();
  const Grid g = config_grid(ctx.d);
  const double order = ctx.d["order"].get<double>();
  const double slack = ctx.d["slack"].get<double>();
  std::vector<double> lambdas;
  for (const auto& l : ctx.d["lambdas"]) lambdas.push_back(l.get<double>());
  // <x>^order, x-only, so the declared class is A with m = order.
  PhaseSpaceSymbol a = symbols::multiplier_symbol("bracket_x", [](const Vec&) -> Complex { return 1.0; });
  a.order_x = order;
  a.terms = {{[order](const Vec& x) -> Complex { return std::pow(1.0 + x.squaredNorm(), 0.5 * order); },
              [](const Vec&) -> Complex { return 1.0; }}};
  a.value = [order](const Vec& x, const Vec&) -> Complex { return std::pow(1.0 + x.squaredNorm(), 0.5 * order); };
  const grid::Cutoff gamma = grid::annular(0.3, 0.5, 2.0, 2.6);
  const grid::Cutoff gamma0 = grid::annular(0.2, 0.3, 2.6, 3.0);
  Vec carrier = Vec::Zero(dim);
  carrier[0] = 1.2;
  if (dim > 1) carrier[1] = 0.4;
  const auto family = [g, carrier](double lambda) {
    return grid::sample(g, [&](const Vec& x) {
      return std::polar(std::exp(-0.5 * x.squaredNorm() / (lambda * lambda)), carrier.dot(x));
    });
  };
  std::ofstream out(ctx.path("egorov.csv"));
  out << "p,lambda,ratio\n" << std::setprecision(10);
  for (const auto& spec : ctx.d["p"]) {
    const DualPair pair = symbols::pair_from_spec(spec.get<std::string>(), dim);
    const quantize::CanonicalPlan plan(pair, gamma, quantize::Direction::Forward, g);
    const auto seq = quantize::egorov_residual(a, gamma0, plan, order, family, lambdas);
    for (std::size_t i = 0; i < seq.ratios.size(); ++i) {
      out << '"' << pair.primal.label() << "\"," << seq.lambdas[i] << ',' << seq.ratios[i] << '\n';
    }
    ctx.report(pair.primal.label() + " egorov residual spread = " + fmt(seq.spread()), seq.bounded(slack));
  }
}

void run_smoothing(Context& ctx) {
  estimates::SweepOptions opt;
  opt.trials = ctx.d["trials"].get<int>();
  opt.seed = ctx.cfg.seed;
  opt.dim = ctx.d["dim"].get<int>();
  opt.data = config_data(ctx.d);
  opt.smoothing.xi_min = ctx.d["xi_min"].get<double>();
  opt.smoothing.policy =
      ctx.d["mass_policy"] == "enforce" ? estimates::MassPolicy::Enforce : estimates::MassPolicy::Record;
  std::vector<estimates::Rung> ladder;
  for (const auto& r : ctx.d["ladder"]) {
    ladder.push_back({r["N"].get<int>(), r["L"].get<double>(), r["T"].get<double>()});
  }
  for (const auto& spec : ctx.d["p"]) {
    const DualPair pair = symbols::pair_from_spec(spec.get<std::string>(), opt.dim);
    const auto ev = config_spec(ctx.d, pair);
    for (const auto& name : ctx.d["sigma"]) {
      const PhaseSpaceSymbol sigma = make_sigma(name.get<std::string>(), pair);
      const auto res = estimates::smoothing_sweep(sigma, ev, ladder, opt);
      estimates::write_sweep_csv(ctx.path("smoothing_" + file_stem(name.get<std::string>()) + ".csv"), {res});
      const Verdict want = expected(ctx.d, name.get<std::string>());
      std::string line = name.get<std::string>() + " on " + pair.primal.label() + ": ratios";
      for (double r : res.ratios()) line += " " + fmt(r);
      line += " -> " + estimates::to_string(res.verdict);
      if (!res.mass_ok()) line += " (mass below target on some rung)";
      ctx.report(line, want == Verdict::Inconclusive || res.verdict == want);
    }
  }
}

constexpr double kStabilizationTol = 1e-3;
constexpr double kStabilizationEps = 0.0625;

void run_lap(Context& ctx) {
  const int dim = ctx.d["dim"].get<int>();
  estimates::LapOptions opt;
  opt.grid = config_grid(ctx.d);
  opt.d = ctx.d["d"].get<double>();
  opt.chi = profile(ctx.d["chi"]);
  opt.eps = estimates::dyadic_eps(ctx.d["eps_k_max"].get<int>());
  opt.trials = ctx.d["trials"].get<int>();
  opt.iterations = ctx.d["iterations"].get<int>();
  opt.seed = ctx.cfg.seed;
  for (const auto& spec : ctx.d["p"]) {
    const DualPair pair = symbols::pair_from_spec(spec.get<std::string>(), dim);
    const auto ev = config_spec(ctx.d, pair);
    for (const auto& name : ctx.d["sigma"]) {
      const Verdict want = expected(ctx.d, name.get<std::string>());
      opt.control = want == Verdict::Growing;
      const auto res = estimates::lap_sweep(make_sigma(name.get<std::string>(), pair), ev, opt);
      estimates::write_sweep_csv(ctx.path("lap_" + file_stem(name.get<std::string>()) + ".csv"), {res});
      ctx.report(name.get<std::string>() + " on " + pair.primal.label() + ": max/min = " +
                     fmt(estimates::spread(res)) + " -> " + estimates::to_string(res.verdict),
                 want == Verdict::Inconclusive || res.verdict == want);
      if (opt.control || !ctx.d.contains("chi_off")) continue;
      // Away from the characteristic set the resolvent converges as eps -> 0.
      estimates::LapOptions off = opt;
      off.chi = profile(ctx.d["chi_off"]);
      const auto tail = estimates::lap_sweep(make_sigma(name.get<std::string>(), pair), ev, off);
      estimates::write_sweep_csv(ctx.path("lap_" + file_stem(name.get<std::string>()) + "_off.csv"), {tail});
      const double settle = estimates::stabilization_eps(tail, kStabilizationTol);
      ctx.report(name.get<std::string>() + " off-characteristic: within 0.1% from eps = " + fmt(settle),
                 settle >= kStabilizationEps);
    }
  }
}

void run_restriction(Context& ctx) {
  const int dim = ctx.d["dim"].get<int>();
  estimates::RestrictionOptions opt;
  opt.grid = config_grid(ctx.d);
  opt.nodes = ctx.d["nodes"].get<int>();
  const auto data = config_data(ctx.d);
  const double lo = ctx.d["window"][0].get<double>();
  const double hi = ctx.d["window"][1].get<double>();
  std::ofstream out(ctx.path("restriction.csv"));
  out << "symbol,p,rho,ratio,step,passed\n" << std::setprecision(10);
  for (const auto& spec : ctx.d["p"]) {
    const DualPair pair = symbols::pair_from_spec(spec.get<std::string>(), dim);
    const auto ev = config_spec(ctx.d, pair);
    for (const auto& name : ctx.d["sigma"]) {
      const PhaseSpaceSymbol sigma = make_sigma(name.get<std::string>(), pair);
      double prev = 0.0;
      bool all = true;
      std::string line = sigma.label + " on " + pair.primal.label() + ": steps";
      for (const auto& rho : ctx.d["rho"]) {
        const double r = estimates::restriction_norm(sigma, ev, rho.get<double>(), ctx.d["trials"].get<int>(),
                                                     ctx.cfg.seed, opt, data);
        const double step = prev > 0.0 ? r / prev : std::numeric_limits<double>::quiet_NaN();
        const bool ok = prev == 0.0 || (step >= lo && step <= hi);
        all = all && ok;
        out << sigma.label << ",\"" << pair.primal.label() << "\"," << rho.get<double>() << ',' << r << ',' << step
            << ',' << (ok ? 1 : 0) << '\n';
        if (prev > 0.0) line += " " + fmt(step);
        prev = r;
      }
      ctx.report(line, all);
    }
  }
}

void run_duality(Context& ctx) {
  const int dim = ctx.d["dim"].get<int>();
  const Grid g = config_grid(ctx.d);
  const double tol = ctx.d["tolerance"].get<double>();
  std::ofstream out(ctx.path("duality.csv"));
  out << "symbol,p,N,L,T,defect,passed\n" << std::setprecision(6);
  for (const auto& spec : ctx.d["p"]) {
    const DualPair pair = symbols::pair_from_spec(spec.get<std::string>(), dim);
    const auto ev = config_spec(ctx.d, pair);
    for (const auto& name : ctx.d["sigma"]) {
      const PhaseSpaceSymbol sigma = make_sigma(name.get<std::string>(), pair);
      const double defect = estimates::duality_check(sigma, ev, g, ctx.d["trials"].get<int>(), ctx.cfg.seed);
      const bool ok = defect <= tol;
      out << sigma.label << ",\"" << pair.primal.label() << "\"," << g.N << ',' << g.L << ',' << ev.T << ','
          << defect << ',' << (ok ? 1 : 0) << '\n';
      ctx.report(sigma.label + " on " + pair.primal.label() + ": duality defect = " + fmt(defect), ok);
    }
  }
}

void run_hl(Context& ctx) {
  const Grid g = config_grid(ctx.d);
  const auto& e = ctx.d["exponents"];
  const double gamma = e["gamma"].get<double>();
  const double delta = e["delta"].get<double>();
  const double m = e["m"].get<double>();
  const double a = ctx.d["support"][0].get<double>();
  const double b = ctx.d["support"][1].get<double>();
  const Field f = grid::sample(g, [&](const Vec& x) -> Complex {
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      if (x[i] < a || x[i] > b) return 0.0;
    }
    return 1.0;
  });
  const double ratio = estimates::hardy_littlewood_oracle(gamma, delta, m, f);
  const bool has_bound = g.n == 1 && gamma == delta;
  const double bound = has_bound ? estimates::hardy_littlewood_bound_1d(gamma, m)
                                 : std::numeric_limits<double>::quiet_NaN();
  const bool ok = !has_bound || ratio <= bound;
  std::ofstream out(ctx.path("hl_oracle.csv"));
  out << "gamma,delta,m,n,N,L,ratio,bound,passed\n" << std::setprecision(10);
  out << gamma << ',' << delta << ',' << m << ',' << g.n << ',' << g.N << ',' << g.L << ',' << ratio << ','
      << bound << ',' << (ok ? 1 : 0) << '\n';
  ctx.report("weighted convolution ratio = " + fmt(ratio) + (has_bound ? " against bound " + fmt(bound) : ""), ok);
}

}  // namespace

RunOutcome run(const ExperimentConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  fs::create_directories(cfg.out);
  default_jobs() = cfg.doc["jobs"].get<int>();
  RunOutcome outcome;
  Context ctx{cfg, cfg.doc, outcome};
  const std::string& k = cfg.kind;
  try {
    if (k == "geometry-audit") run_geometry(ctx);
    else if (k == "commutator") run_commutator(ctx);
    else if (k == "egorov") run_egorov(ctx);
    else if (k == "smoothing") run_smoothing(ctx);
    else if (k == "lap") run_lap(ctx);
    else if (k == "restriction") run_restriction(ctx);
    else if (k == "duality") run_duality(ctx);
    else if (k == "hl-oracle") run_hl(ctx);
  } catch (const Error& e) {
    // Re-raise with the experiment name in front of the operation name.
    const std::string what = e.what();
    throw Error(e.code(), k + ": " + what.substr(to_string(e.code()).size() + 2));
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  {
    std::ofstream s(fs::path(cfg.out) / "summary.txt");
    s << k << (outcome.exit_code == 0 ? ": all verdicts as expected" : ": verdict failure") << '\n';
    for (const auto& line : outcome.summary) s << "  " << line << '\n';
  }
  char hash[17];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(fnv1a(cfg.doc.dump())));
  const json manifest = {{"kind", k},
                         {"config_hash", hash},
                         {"version", SLAB_VERSION},
                         {"wall_time_s", wall},
                         {"seed", cfg.seed},
                         {"exit_code", outcome.exit_code},
                         {"artifacts", outcome.artifacts},
                         {"config", cfg.doc}};
  std::ofstream(fs::path(cfg.out) / "manifest.json") << manifest.dump(2) << '\n';
  outcome.artifacts.push_back("summary.txt");
  outcome.artifacts.push_back("manifest.json");
  return outcome;
}

int main_entry(int argc, char** argv) {
  CLI::App app{"slab: numerical experiments on dispersive smoothing estimates"};
  app.require_subcommand(1);
  std::string config;
  std::vector<std::string> overrides;
  int jobs = 0;
  std::string out;
  for (const auto& kind : kinds()) {
    CLI::App* sub = app.add_subcommand(kind, "run the " + kind + " experiment");
    sub->add_option("--config", config, "JSON experiment config")->required();
    sub->add_option("--override", overrides, "key=value, dotted keys reach nested objects");
    sub->add_option("--jobs", jobs, "worker threads for trial-level parallelism");
    sub->add_option("--out", out, "output directory");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  const std::string kind = app.get_subcommands().front()->get_name();
  try {
    std::vector<std::string> all = overrides;
    if (jobs > 0) all.push_back("jobs=" + std::to_string(jobs));
    if (!out.empty()) all.push_back("out=" + out);
    const ExperimentConfig cfg = load_config(config, kind, all);
    const RunOutcome outcome = run(cfg);
    for (const auto& line : outcome.summary) std::cout << line << '\n';
    std::cout << kind << ": wrote " << outcome.artifacts.size() << " artifacts to " << cfg.out << '\n';
    return outcome.exit_code;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << kind << ": " << e.what() << '\n';
    return 1;
  }
}

}  // namespace slab::cli
