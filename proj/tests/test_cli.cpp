#include <filesystem>
#include <random>
#include <regex>
#include <sstream>

#include "cli.hpp"
#include "doctest.h"
#include "entropy_forge/io.hpp"
#include "entropy_forge/report.hpp"

using namespace ef;
namespace fs = std::filesystem;
using report::Json;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("ef_cli_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

// Subset of JSON Schema: type, const, enum, required, properties,
// additionalProperties, items, minimum, maximum, exclusiveMinimum, pattern, $ref.
class SchemaChecker {
 public:
  explicit SchemaChecker(Json root) : root_(std::move(root)) {}

  std::vector<std::string> check(const Json& doc) {
    errors_.clear();
    visit(root_, doc, "$");
    return errors_;
  }

 private:
  Json root_;
  std::vector<std::string> errors_;

  static bool has_type(const Json& v, const std::string& t) {
    if (t == "object") return v.is_object();
    if (t == "array") return v.is_array();
    if (t == "string") return v.is_string();
    if (t == "boolean") return v.is_boolean();
    if (t == "null") return v.is_null();
    if (t == "integer") return v.is_number_integer();
    if (t == "number") return v.is_number();
    return false;
  }

  const Json& resolve(const std::string& ref) const {
    REQUIRE(ref.rfind("#/$defs/", 0) == 0);
    return root_.at("$defs").at(ref.substr(8));
  }

  void visit(const Json& schema, const Json& v, const std::string& where) {
    if (schema.contains("$ref")) {
      visit(resolve(schema.at("$ref").get<std::string>()), v, where);
      return;
    }
    if (schema.contains("type")) {
      const Json& t = schema.at("type");
      bool ok = false;
      if (t.is_string()) {
        ok = has_type(v, t.get<std::string>());
      } else {
        for (const auto& alt : t) ok = ok || has_type(v, alt.get<std::string>());
      }
      if (!ok) {
        errors_.push_back(where + ": expected type " + t.dump() + ", got " + v.dump());
        return;
      }
    }
    if (schema.contains("const") && v != schema.at("const")) errors_.push_back(where + ": const mismatch");
    if (schema.contains("enum")) {
      bool found = false;
      for (const auto& e : schema.at("enum")) found = found || e == v;
      if (!found) errors_.push_back(where + ": " + v.dump() + " not in enum");
    }
    if (v.is_number()) {
      const double x = v.get<double>();
      if (schema.contains("minimum") && x < schema.at("minimum").get<double>()) {
        errors_.push_back(where + ": below minimum");
      }
      if (schema.contains("maximum") && x > schema.at("maximum").get<double>()) {
        errors_.push_back(where + ": above maximum");
      }
      if (schema.contains("exclusiveMinimum") && x <= schema.at("exclusiveMinimum").get<double>()) {
        errors_.push_back(where + ": not above exclusiveMinimum");
      }
    }
    if (v.is_string() && schema.contains("pattern") &&
        !std::regex_search(v.get<std::string>(), std::regex(schema.at("pattern").get<std::string>()))) {
      errors_.push_back(where + ": pattern mismatch");
    }
    if (v.is_object()) {
      if (schema.contains("required")) {
        for (const auto& k : schema.at("required")) {
          if (!v.contains(k.get<std::string>())) errors_.push_back(where + ": missing " + k.get<std::string>());
        }
      }
      const Json props = schema.value("properties", Json::object());
      for (const auto& [k, child] : v.items()) {
        if (props.contains(k)) {
          visit(props.at(k), child, where + "." + k);
        } else if (schema.contains("additionalProperties")) {
          const Json& extra = schema.at("additionalProperties");
          if (extra.is_boolean()) {
            if (!extra.get<bool>()) errors_.push_back(where + ": unexpected key " + k);
          } else {
            visit(extra, child, where + "." + k);
          }
        }
      }
    }
    if (v.is_array() && schema.contains("items")) {
      for (std::size_t i = 0; i < v.size(); ++i) visit(schema.at("items"), v[i], where + "[" + std::to_string(i) + "]");
    }
  }
};

Json load(const fs::path& p) { return Json::parse(io::read_text(p)); }

void check_schema(const std::string& schema_name, const fs::path& doc) {
  SchemaChecker checker(load(fs::path(ENTROPY_FORGE_SCHEMA_DIR) / (schema_name + ".schema.json")));
  const auto errors = checker.check(load(doc));
  INFO(doc.string() << " against " << schema_name);
  for (const auto& e : errors) INFO(e);
  CHECK(errors.empty());
  if (!errors.empty()) MESSAGE(errors.front());
}

void write_iid_stream(const fs::path& p, std::size_t count, int n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  SymbolStream s;
  s.n = n;
  s.symbols.resize(count);
  for (auto& v : s.symbols) v = static_cast<std::uint32_t>(gen() >> (64 - n));
  io::write_symbols(p, s);
}

}  // namespace

TEST_CASE("schema checker rejects malformed documents") {
  SchemaChecker c(Json::parse(R"({"type":"object","required":["a"],"additionalProperties":false,
    "properties":{"a":{"type":"integer","minimum":0},"b":{"enum":["x"]}}})"));
  CHECK(c.check(Json::parse(R"({"a":1,"b":"x"})")).empty());
  CHECK(c.check(Json::parse(R"({"b":"x"})")).size() == 1);
  CHECK(c.check(Json::parse(R"({"a":-1})")).size() == 1);
  CHECK(c.check(Json::parse(R"({"a":1,"c":2})")).size() == 1);
  CHECK(c.check(Json::parse(R"({"a":1.5})")).size() == 1);
  CHECK(c.check(Json::parse(R"({"a":1,"b":"y"})")).size() == 1);
}

TEST_CASE("exit codes for usage, help, version and I/O errors") {
  CHECK(run({"--help"}).code == cli::kExitOk);
  const Result v = run({"--version"});
  CHECK(v.code == cli::kExitOk);
  CHECK(v.out.find(ENTROPY_FORGE_VERSION) != std::string::npos);
  CHECK(run({}).code == cli::kExitUsage);
  CHECK(run({"frobnicate"}).code == cli::kExitUsage);
  CHECK(run({"sp90b", "assess", "--bogus"}).code == cli::kExitUsage);
  CHECK(run({"extract", "--in", "x.vtrc"}).code == cli::kExitUsage);  // --out is required
  CHECK(run({"extract", "--in", "x.vtrc", "--out", "y.bin", "--n", "17"}).code == cli::kExitUsage);

  TempDir dir;
  const Result missing = run({"analyze", "stats", "--in", (dir.path / "nope.bin").string(), "--report",
                              (dir.path / "r.json").string()});
  CHECK(missing.code == cli::kExitError);
  CHECK(missing.err.find("nope.bin") != std::string::npos);
  io::write_text(dir.path / "p.json", "{\"max_trapped\": 0}");
  CHECK(run({"simulate", "--params", (dir.path / "p.json").string(), "--out", (dir.path / "t.vtrc").string()})
            .code == cli::kExitError);
}

TEST_CASE("simulate and extract write traces, streams and manifests") {
  TempDir dir;
  const fs::path trace = dir.path / "t.vtrc";
  const fs::path stream = dir.path / "s.bin";
  REQUIRE(run({"simulate", "--out", trace.string(), "--duration", "0.05", "--seed", "3"}).code == cli::kExitOk);
  REQUIRE(run({"extract", "--in", trace.string(), "--out", stream.string()}).code == cli::kExitOk);
  check_schema("manifest", trace.string() + ".manifest.json");
  check_schema("manifest", stream.string() + ".manifest.json");
  check_schema("symbols_sidecar", io::sidecar_path(stream));
  const Json m = load(stream.string() + ".manifest.json");
  CHECK(m.at("inputs")[0].at("sha256") == io::sha256_file(trace));
  CHECK(m.at("outputs")[0].at("sha256") == io::sha256_file(stream));
  CHECK(io::read_symbols(stream).symbols.size() > 100);
}

TEST_CASE("analysis reports conform to their schemas") {
  TempDir dir;
  const fs::path stream = dir.path / "s.bin";
  write_iid_stream(stream, 20000, 8, 5);

  const fs::path stats = dir.path / "stats.json";
  const fs::path pgm = dir.path / "map.pgm";
  REQUIRE(run({"analyze", "stats", "--in", stream.string(), "--report", stats.string(), "--pgm", pgm.string()})
              .code == cli::kExitOk);
  check_schema("stats_report", stats);
  check_schema("manifest", stats.string() + ".manifest.json");
  CHECK(load(stats).at("histogram").size() == 256);
  CHECK(fs::exists(pgm));

  const fs::path chaos = dir.path / "chaos.json";
  const Result ch = run({"analyze", "chaos", "--in", stream.string(), "--report", chaos.string(), "--k2", "--points",
                         "3000"});
  INFO(ch.err);
  REQUIRE(ch.code == cli::kExitOk);
  const Json cj = load(chaos);
  CHECK(cj.at("schema_version") == report::kSchemaVersion);
  CHECK(!cj.at("k2").at("curve").empty());

  const fs::path health = dir.path / "health.json";
  REQUIRE(run({"sp90b", "health", "--in", stream.string(), "--hmin", "7", "--out", health.string()}).code ==
          cli::kExitOk);
  check_schema("health_report", health);
  CHECK(load(health).at("healthy") == true);
}

TEST_CASE("health check exits 2 on a stuck stream") {
  TempDir dir;
  SymbolStream s;
  s.n = 8;
  s.symbols.assign(5000, 42);
  io::write_symbols(dir.path / "stuck.bin", s);
  const fs::path out = dir.path / "h.json";
  const Result r = run({"sp90b", "health", "--in", (dir.path / "stuck.bin").string(), "--hmin", "7.5", "--out",
                        out.string()});
  CHECK(r.code == cli::kExitAssessment);
  check_schema("health_report", out);
  const Json j = load(out);
  CHECK(j.at("healthy") == false);
  CHECK(!j.at("repetition_count").at("alarms").empty());
  CHECK(!j.at("adaptive_proportion").at("alarms").empty());
}

TEST_CASE("assessment report conforms and a stuck stream exits 2") {
  TempDir dir;
  write_iid_stream(dir.path / "s.bin", 5000, 8, 11);
  const fs::path rep = dir.path / "r.json";
  const Result ok =
      run({"sp90b", "assess", "--in", (dir.path / "s.bin").string(), "--out", rep.string(), "--permutations", "100",
           "--threads", "1"});
  INFO(ok.err);
  CHECK(ok.code == cli::kExitOk);
  check_schema("assessment_report", rep);
  const Json j = load(rep);
  CHECK(j.at("sequential").at("permutation_tests").size() == 19);
  CHECK(j.at("sequential").at("chi_square_tests").size() == 3);
  CHECK(j.at("conformant") == false);  // fewer than one million samples

  SymbolStream stuck;
  stuck.n = 8;
  stuck.symbols.resize(5000);
  for (std::size_t i = 0; i < stuck.symbols.size(); ++i) stuck.symbols[i] = static_cast<std::uint32_t>(i % 7);
  io::write_symbols(dir.path / "p.bin", stuck);
  const fs::path bad = dir.path / "bad.json";
  CHECK(run({"sp90b", "assess", "--in", (dir.path / "p.bin").string(), "--out", bad.string(), "--permutations",
             "100", "--threads", "1"})
            .code == cli::kExitAssessment);
  check_schema("assessment_report", bad);
  CHECK(load(bad).at("iid_verdict") == false);
}

TEST_CASE("pipeline is reproducible across thread counts") {
  TempDir dir;
  const fs::path a = dir.path / "a";
  const fs::path b = dir.path / "b";
  const std::vector<std::string> common{"pipeline", "--symbols", "5000", "--permutations", "100", "--seed", "7"};
  auto with = [&](const fs::path& wd, const std::string& threads) {
    auto args = common;
    args.insert(args.end(), {"--workdir", wd.string(), "--threads", threads});
    return run(args);
  };
  const Result ra = with(a, "1");
  const Result rb = with(b, "3");
  INFO(ra.err);
  CHECK(ra.code == rb.code);
  CHECK((ra.code == cli::kExitOk || ra.code == cli::kExitAssessment));
  for (const char* f : {"params.json", "stream.bin", "stream.bin.json", "stats.json", "report.json", "manifest.json"}) {
    INFO(f);
    REQUIRE(fs::exists(a / f));
    CHECK(io::read_bytes(a / f) == io::read_bytes(b / f));
  }
  check_schema("device_params", a / "params.json");
  check_schema("symbols_sidecar", a / "stream.bin.json");
  check_schema("stats_report", a / "stats.json");
  check_schema("assessment_report", a / "report.json");
  check_schema("manifest", a / "manifest.json");
  CHECK(io::read_symbols(a / "stream.bin").symbols.size() == 5000);
}
