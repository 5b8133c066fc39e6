#include <cmath>
#include <fstream>
#include <algorithm>
#include <cstdlib>
#include <map>
#include <numbers>

#include "slab/cli.hpp"
#include "slab/error.hpp"

namespace slab::cli {

using nlohmann::json;

namespace {

enum class Type { Int, Number, Bool, String, Strings, Numbers, Ladder, Verdicts, Object };

// Keys every kind accepts, with dotted paths for nested objects.
const std::map<std::string, Type>& common_keys() {
  static const std::map<std::string, Type> keys = {
      {"kind", Type::String},          {"seed", Type::Int},          {"out", Type::String},
      {"jobs", Type::Int},             {"dim", Type::Int},           {"p", Type::Strings},
      {"sigma", Type::Strings},        {"trials", Type::Int},        {"grid", Type::Object},
      {"grid.N", Type::Int},           {"grid.L", Type::Number},     {"grid.offset", Type::Bool},
      {"evolution", Type::Object},     {"evolution.order", Type::Int}, {"evolution.sign", Type::Int},
      {"evolution.T", Type::Number},   {"evolution.dt", Type::Number},
  };
  return keys;
}

const std::map<std::string, Type>& data_keys() {
  static const std::map<std::string, Type> keys = {
      {"data", Type::Object},          {"data.packets", Type::Int},   {"data.width", Type::Number},
      {"data.carrier", Type::Number},  {"data.band_lo", Type::Number}, {"data.band_hi", Type::Number},
  };
  return keys;
}

std::map<std::string, Type> kind_keys(const std::string& kind) {
  std::map<std::string, Type> keys = common_keys();
  auto add = [&](std::initializer_list<std::pair<const std::string, Type>> extra) { keys.insert(extra); };
  if (kind == "geometry-audit") {
    add({{"samples", Type::Int}});
  } else if (kind == "commutator") {
    keys.insert(data_keys().begin(), data_keys().end());
    add({{"h_width", Type::Number}, {"tolerance", Type::Number}});
  } else if (kind == "egorov") {
    add({{"lambdas", Type::Numbers}, {"order", Type::Number}, {"slack", Type::Number}});
  } else if (kind == "smoothing") {
    keys.insert(data_keys().begin(), data_keys().end());
    add({{"ladder", Type::Ladder}, {"xi_min", Type::Number}, {"mass_policy", Type::String},
         {"expect", Type::Verdicts}});
  } else if (kind == "lap") {
    add({{"eps_k_max", Type::Int}, {"d", Type::Number}, {"chi", Type::Numbers}, {"chi_off", Type::Numbers},
         {"iterations", Type::Int}, {"expect", Type::Verdicts}});
  } else if (kind == "restriction") {
    keys.insert(data_keys().begin(), data_keys().end());
    add({{"rho", Type::Numbers}, {"nodes", Type::Int}, {"window", Type::Numbers}});
  } else if (kind == "duality") {
    add({{"tolerance", Type::Number}});
  } else if (kind == "hl-oracle") {
    add({{"exponents", Type::Object}, {"exponents.gamma", Type::Number}, {"exponents.delta", Type::Number},
         {"exponents.m", Type::Number}, {"support", Type::Numbers}});
  }
  return keys;
}

json defaults(const std::string& kind) {
  json d = {{"seed", 1},
            {"out", "out/" + kind},
            {"jobs", 1},
            {"dim", 2},
            {"p", {"euclidean"}},
            {"sigma", {"structured"}},
            {"trials", 8},
            {"grid", {{"N", 64}, {"L", 16.0}, {"offset", true}}},
            {"evolution", {{"order", 2}, {"sign", -1}, {"T", 4.0}, {"dt", 0.25}}}};
  const json packets = {{"packets", 4}, {"width", 6.0}, {"carrier", 0.25}, {"band_lo", 0.5}, {"band_hi", 0.9}};
  if (kind == "geometry-audit") {
    d["samples"] = 1000;
    d["p"] = {"euclidean", "quadratic-form:A=[1,0;0,0.5]", "perturbed:amp=0.05"};
  } else if (kind == "commutator") {
    d["grid"]["N"] = 128;
    d["grid"]["L"] = 12.0;
    d["data"] = {{"packets", 4}, {"width", 1.0}, {"carrier", 8.0}, {"band_lo", 14.0}, {"band_hi", 16.0}};
    d["h_width"] = 6.0;
    d["p"] = {"euclidean", "quadratic-form:A=[1,0;0,0.5]", "perturbed:amp=0.05"};
    d["tolerance"] = 1e-7;
  } else if (kind == "egorov") {
    d["p"] = {"quadratic-form:A=[1,0;0,0.5]"};
    d["lambdas"] = {1.0, 2.0, 4.0, 8.0};
    d["order"] = 0.5;
    d["slack"] = 3.0;
  } else if (kind == "smoothing") {
    d["sigma"] = {"structured", "unstructured"};
    d["data"] = packets;
    d["ladder"] = json::array({{{"N", 128}, {"L", 16.0}, {"T", 8.0}},
                               {{"N", 128}, {"L", 32.0}, {"T", 16.0}},
                               {{"N", 128}, {"L", 64.0}, {"T", 32.0}}});
    d["xi_min"] = 2.0 * std::numbers::pi / 16.0;
    d["mass_policy"] = "record";
    d["expect"] = {{"structured", "bounded"}, {"unstructured", "growing"}};
  } else if (kind == "lap") {
    d["p"] = {"quadratic-form:A=[1,0;0,0.5]"};
    d["sigma"] = {"structured", "unstructured"};
    d["eps_k_max"] = 12;
    d["d"] = 1.0;
    d["chi"] = {0.5, 0.7, 1.4, 2.0};
    d["chi_off"] = {3.0, 3.2, 3.8, 4.0};
    d["iterations"] = 20;
    d["expect"] = {{"structured", "bounded"}, {"unstructured", "growing"}};
  } else if (kind == "restriction") {
    d["p"] = {"euclidean", "quadratic-form:A=[1,0;0,0.5]"};
    d["grid"]["N"] = 128;
    d["data"] = {{"packets", 4}, {"width", 1.0}, {"carrier", 1.0}, {"band_lo", 1.5}, {"band_hi", 2.5}};
    d["rho"] = {1.0, 2.0, 4.0};
    d["nodes"] = 256;
    d["window"] = {1.19, 1.61};
  } else if (kind == "duality") {
    d["tolerance"] = 1e-8;
  } else if (kind == "hl-oracle") {
    d["dim"] = 1;
    d["grid"]["N"] = 1024;
    d["grid"]["L"] = 8.0;
    d["exponents"] = {{"gamma", 0.25}, {"delta", 0.25}, {"m", 0.5}};
    d["support"] = {-1.0, 1.0};
  }
  return d;
}

[[noreturn]] void invalid(const std::string& key, const std::string& why) {
  throw Error(ErrorCode::ConfigInvalid, "config key '" + key + "': " + why);
}

void check_type(const std::string& key, const json& v, Type t) {
  auto need = [&](bool ok, const char* what) {
    if (!ok) invalid(key, std::string("expected ") + what);
  };
  switch (t) {
    case Type::Int: need(v.is_number_integer(), "an integer"); break;
    case Type::Number: need(v.is_number(), "a number"); break;
    case Type::Bool: need(v.is_boolean(), "a boolean"); break;
    case Type::String: need(v.is_string(), "a string"); break;
    case Type::Object: need(v.is_object(), "an object"); break;
    case Type::Strings:
      need(v.is_array(), "an array of strings");
      for (const auto& e : v) need(e.is_string(), "an array of strings");
      break;
    case Type::Numbers:
      need(v.is_array(), "an array of numbers");
      for (const auto& e : v) need(e.is_number(), "an array of numbers");
      break;
    case Type::Ladder:
      need(v.is_array() && !v.empty(), "a non-empty array of {N, L, T}");
      for (const auto& e : v) {
        need(e.is_object(), "a non-empty array of {N, L, T}");
        for (const auto& [k, x] : e.items()) {
          if (k != "N" && k != "L" && k != "T") invalid(key + "[]." + k, "unknown key");
          need(k == "N" ? x.is_number_integer() : x.is_number(), "integer N and numeric L, T");
        }
        need(e.contains("N") && e.contains("L") && e.contains("T"), "every rung to give N, L and T");
      }
      break;
    case Type::Verdicts:
      need(v.is_object(), "an object of verdicts");
      for (const auto& [k, x] : v.items()) {
        if (!x.is_string() || (x != "bounded" && x != "growing")) {
          invalid(key + "." + k, "expected \"bounded\" or \"growing\"");
        }
      }
      break;
  }
}

void walk(const json& doc, const std::string& prefix, const std::map<std::string, Type>& keys) {
  for (const auto& [k, v] : doc.items()) {
    const std::string path = prefix.empty() ? k : prefix + "." + k;
    const auto it = keys.find(path);
    if (it == keys.end()) invalid(path, "unknown key");
    check_type(path, v, it->second);
    if (it->second == Type::Object) walk(v, path, keys);
  }
}

bool power_of_two(long long n) { return n >= 2 && (n & (n - 1)) == 0; }

void check_values(const json& d) {
  auto grid_ok = [](const std::string& key, long long n, double l) {
    if (!power_of_two(n)) invalid(key + ".N", "N = " + std::to_string(n) + " is not a power of two");
    if (!(l > 0.0)) invalid(key + ".L", "L must be positive");
  };
  grid_ok("grid", d["grid"]["N"].get<long long>(), d["grid"]["L"].get<double>());
  if (d.contains("ladder")) {
    for (const auto& r : d["ladder"]) {
      grid_ok("ladder[]", r["N"].get<long long>(), r["L"].get<double>());
      if (!(r["T"].get<double>() >= 0.0)) invalid("ladder[].T", "T must be non-negative");
    }
  }
  const int dim = d["dim"].get<int>();
  if (dim < 1 || dim > 3) invalid("dim", "must be 1, 2 or 3");
  if (d["jobs"].get<int>() < 1) invalid("jobs", "must be at least 1");
  if (d["trials"].get<int>() < 1) invalid("trials", "must be at least 1");
  if (d["seed"].get<long long>() < 0) invalid("seed", "must be non-negative");
  const auto& ev = d["evolution"];
  if (ev["order"].get<int>() < 1) invalid("evolution.order", "must be >= 1");
  if (ev["sign"] != 1 && ev["sign"] != -1) invalid("evolution.sign", "must be +1 or -1");
  if (!(ev["dt"].get<double>() > 0.0)) invalid("evolution.dt", "must be positive");
  if (!(ev["T"].get<double>() >= 0.0)) invalid("evolution.T", "must be non-negative");
  if (d.contains("mass_policy") && d["mass_policy"] != "enforce" && d["mass_policy"] != "record") {
    invalid("mass_policy", "expected \"enforce\" or \"record\"");
  }
  if (d.contains("h_width") && !(d["h_width"].get<double>() > 0.0)) invalid("h_width", "must be positive");
  for (const char* key : {"chi", "chi_off"}) {
    if (d.contains(key) && d[key].size() != 4) invalid(key, "expected four profile edges a <= b <= c <= d");
  }
  for (const char* key : {"window", "support"}) {
    if (d.contains(key) && d[key].size() != 2) invalid(key, "expected two numbers");
  }
}

}  // namespace

ExperimentConfig parse_config(const json& doc, const std::string& kind) {
  if (std::find(kinds().begin(), kinds().end(), kind) == kinds().end()) {
    throw Error(ErrorCode::ConfigInvalid, "unknown experiment kind '" + kind + "'");
  }
  if (!doc.is_object()) throw Error(ErrorCode::ConfigInvalid, "config must be a JSON object");
  walk(doc, "", kind_keys(kind));
  if (doc.contains("kind") && doc["kind"] != kind) {
    invalid("kind", "config is for '" + doc["kind"].get<std::string>() + "', not '" + kind + "'");
  }
  json merged = defaults(kind);
  merged.merge_patch(doc);
  merged["kind"] = kind;
  check_values(merged);

  ExperimentConfig cfg;
  cfg.kind = kind;
  cfg.seed = merged["seed"].get<std::uint64_t>();
  cfg.out = merged["out"].get<std::string>();
  cfg.doc = merged;
  return cfg;
}

void apply_override(json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw Error(ErrorCode::ConfigInvalid, "override '" + assignment + "' is not key=value");
  }
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;
  json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (dot == std::string::npos) {
      (*node)[part] = value;
      break;
    }
    if (!node->contains(part) || !(*node)[part].is_object()) (*node)[part] = json::object();
    node = &(*node)[part];
    start = dot + 1;
  }
}

ExperimentConfig load_config(const std::string& path, const std::string& kind,
                             const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ConfigInvalid, "cannot read config " + path);
  json doc = json::parse(in, nullptr, false);
  if (doc.is_discarded()) throw Error(ErrorCode::ConfigInvalid, "config " + path + " is not valid JSON");
  if (const char* env = std::getenv("SLAB_SEED")) {
    try {
      doc["seed"] = std::stoull(env);
    } catch (const std::exception&) {
      throw Error(ErrorCode::ConfigInvalid, std::string("SLAB_SEED='") + env + "' is not a seed");
    }
  }
  for (const auto& o : overrides) apply_override(doc, o);
  return parse_config(doc, kind);
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace slab::cli
