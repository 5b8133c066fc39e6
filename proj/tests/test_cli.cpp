#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "slab/cli.hpp"
#include "slab/error.hpp"

using namespace slab;
using namespace slab::cli;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const std::string kConfigs = std::string(SLAB_FIXTURES) + "/../../configs";

int invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "slab");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  return main_entry(static_cast<int>(argv.size()), argv.data());
}

json read_json(const std::string& path) {
  std::ifstream in(path);
  return json::parse(in);
}

// Quote-aware split; p labels such as "quadratic-form:A=[1,0;0,0.5]" contain commas.
std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells(1);
  bool quoted = false;
  for (char c : line) {
    if (c == '"') {
      quoted = !quoted;
    } else if (c == ',' && !quoted) {
      cells.emplace_back();
    } else {
      cells.back() += c;
    }
  }
  return cells;
}

std::vector<std::vector<std::string>> read_csv(const std::string& path) {
  std::ifstream in(path);
  std::vector<std::vector<std::string>> rows;
  for (std::string line; std::getline(in, line);) rows.push_back(split_csv(line));
  return rows;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Numeric cells agree to relative 1e-9 or absolute 1e-12; others exactly.
void check_same_table(const std::string& got, const std::string& want) {
  const auto a = read_csv(got), b = read_csv(want);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    REQUIRE(a[i].size() == b[i].size());
    for (std::size_t j = 0; j < a[i].size(); ++j) {
      char* end = nullptr;
      const double x = std::strtod(a[i][j].c_str(), &end);
      const bool numeric = !a[i][j].empty() && *end == '\0';
      if (numeric && !std::isnan(x)) {
        const double y = std::stod(b[i][j]);
        CHECK(std::abs(x - y) <= std::max(1e-12, 1e-9 * std::abs(y)));
      } else {
        CHECK(a[i][j] == b[i][j]);
      }
    }
  }
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("slab_cli_" + name);
  fs::remove_all(dir);
  return dir;
}

}  // namespace

TEST_CASE("every shipped config parses") {
  for (const auto& kind : kinds()) {
    const ExperimentConfig cfg = load_config(kConfigs + "/" + kind + ".json", kind, {});
    CHECK(cfg.kind == kind);
    CHECK(cfg.doc["kind"] == kind);
  }
}

TEST_CASE("invalid configs") {
  json doc = read_json(kConfigs + "/smoothing.json");
  json bad = doc;
  bad["grid"]["N"] = 100;
  CHECK_THROWS_AS(parse_config(bad, "smoothing"), Error);
  bad = doc;
  bad["colour"] = "red";
  try {
    parse_config(bad, "smoothing");
    FAIL("unknown key accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ConfigInvalid);
    CHECK(std::string(e.what()).find("colour") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_config(doc, "duality"), Error);

  const fs::path dir = scratch("bad");
  CHECK(invoke({"geometry-audit", "--config", kConfigs + "/geometry-audit.json", "--override", "grid.N=100", "--out",
                dir.string()}) == 1);
  CHECK(invoke({"geometry-audit", "--config", (dir / "missing.json").string()}) == 1);
  CHECK(invoke({"no-such-kind", "--config", kConfigs + "/geometry-audit.json"}) == 1);
}

TEST_CASE("overrides and seed precedence") {
  json doc = {{"a", 1}};
  apply_override(doc, "grid.N=64");
  apply_override(doc, "name=hello");
  apply_override(doc, "a=[1,2]");
  CHECK(doc["grid"]["N"] == 64);
  CHECK(doc["name"] == "hello");
  CHECK(doc["a"].size() == 2u);

  const std::string path = kConfigs + "/duality.json";
  CHECK(load_config(path, "duality", {}).seed == 1u);
  ::setenv("SLAB_SEED", "17", 1);
  CHECK(load_config(path, "duality", {}).seed == 17u);
  // Explicit overrides win over the environment.
  CHECK(load_config(path, "duality", {"seed=5"}).seed == 5u);
  ::setenv("SLAB_SEED", "x", 1);
  CHECK_THROWS_AS(load_config(path, "duality", {}), Error);
  ::unsetenv("SLAB_SEED");
}

TEST_CASE("fnv1a") {
  CHECK(fnv1a("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a("a") == 0xaf63dc4c8601ec8cULL);
}

TEST_CASE("fast kinds reproduce the golden CSVs") {
  const std::vector<std::pair<std::string, std::string>> runs = {
      {"geometry-audit", "geometry.csv"}, {"commutator", "commutator.csv"}, {"egorov", "egorov.csv"},
      {"restriction", "restriction.csv"}, {"duality", "duality.csv"},       {"hl-oracle", "hl_oracle.csv"}};
  for (const auto& [kind, csv] : runs) {
    CAPTURE(kind);
    const fs::path dir = scratch(kind);
    CHECK(invoke({kind, "--config", kConfigs + "/" + kind + ".json", "--out", dir.string()}) == 0);
    check_same_table((dir / csv).string(), std::string(SLAB_FIXTURES) + "/" + csv);
    CHECK(fs::exists(dir / "summary.txt"));
    const json manifest = read_json((dir / "manifest.json").string());
    CHECK(manifest.contains("config"));
    fs::remove_all(dir);
  }
}

TEST_CASE("property: identical configs give byte-identical CSVs for any job count") {
  const fs::path a = scratch("rep_a"), b = scratch("rep_b");
  CHECK(invoke({"egorov", "--config", kConfigs + "/egorov.json", "--jobs", "1", "--out", a.string()}) == 0);
  CHECK(invoke({"egorov", "--config", kConfigs + "/egorov.json", "--jobs", "4", "--out", b.string()}) == 0);
  CHECK(slurp((a / "egorov.csv").string()) == slurp((b / "egorov.csv").string()));
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("smoothing sweep writes both branches") {
  const fs::path dir = scratch("smoothing");
  CHECK(invoke({"smoothing", "--config", kConfigs + "/smoothing.json", "--out", dir.string()}) == 0);
  CHECK(fs::exists(dir / "smoothing_structured.csv"));
  CHECK(fs::exists(dir / "smoothing_unstructured.csv"));
  const std::string summary = slurp((dir / "summary.txt").string());
  CHECK(summary.find("bounded") != std::string::npos);
  CHECK(summary.find("growing") != std::string::npos);
  fs::remove_all(dir);
}
