#include <filesystem>
#include <random>

#include "doctest.h"
#include "entropy_forge/error.hpp"
#include "entropy_forge/io.hpp"
#include "entropy_forge/report.hpp"

using namespace ef;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("ef_io_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("SHA-256 known vectors") {
  CHECK(io::sha256_hex({}) == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(io::sha256_hex({'a', 'b', 'c'}) == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  TempDir dir;
  io::write_text(dir.path / "abc.txt", "abc");
  CHECK(io::sha256_file(dir.path / "abc.txt") == io::sha256_hex({'a', 'b', 'c'}));
}

TEST_CASE("trace round trip and format checks") {
  TempDir dir;
  VoltageTrace t;
  t.dt = 8e-8;
  t.samples = {0.5, 0.4951, -1e-300, 1e300};
  io::write_trace(dir.path / "t.vtrc", t);
  const auto bytes = io::read_bytes(dir.path / "t.vtrc");
  CHECK(bytes.size() == 8 + 8 + 4 * 8);
  CHECK(std::string(bytes.begin(), bytes.begin() + 4) == "VTRC");
  const VoltageTrace back = io::read_trace(dir.path / "t.vtrc");
  CHECK(back.dt == t.dt);
  CHECK(back.samples == t.samples);

  auto bad = bytes;
  bad[0] = 'X';
  io::write_bytes(dir.path / "bad.vtrc", bad);
  CHECK_THROWS_AS(io::read_trace(dir.path / "bad.vtrc"), IoError);
  auto truncated = bytes;
  truncated.pop_back();
  io::write_bytes(dir.path / "short.vtrc", truncated);
  CHECK_THROWS_AS(io::read_trace(dir.path / "short.vtrc"), IoError);
  CHECK_THROWS_AS(io::read_trace(dir.path / "missing.vtrc"), IoError);
}

TEST_CASE("symbol packing") {
  CHECK(io::pack_symbols({5, 2}, 3) == std::vector<std::uint8_t>{0b10101000});
  CHECK(io::pack_symbols({1, 255}, 8) == std::vector<std::uint8_t>{1, 255});
  CHECK(io::unpack_symbols({0b10101000}, 3, 2) == std::vector<std::uint32_t>{5, 2});
  std::mt19937_64 gen(1);
  for (int n = 1; n <= 16; ++n) {
    std::vector<std::uint32_t> s(333);
    for (auto& v : s) v = static_cast<std::uint32_t>(gen() >> (64 - n));
    const auto packed = io::pack_symbols(s, n);
    CHECK(packed.size() == (333 * static_cast<std::size_t>(n) + 7) / 8);
    CHECK(io::unpack_symbols(packed, n, s.size()) == s);
  }
  CHECK_THROWS_AS(io::unpack_symbols({0}, 8, 2), IoError);
}

TEST_CASE("symbol stream files with sidecars") {
  TempDir dir;
  SymbolStream s;
  s.n = 5;
  s.symbols = {0, 31, 17, 4};
  s.dropped_blocks = 3;
  s.empty_blocks = 9;
  io::write_symbols(dir.path / "s.bin", s);
  CHECK(fs::exists(dir.path / "s.bin.json"));
  const SymbolStream back = io::read_symbols(dir.path / "s.bin");
  CHECK(back.n == 5);
  CHECK(back.symbols == s.symbols);
  CHECK(back.dropped_blocks == 3);
  CHECK(back.empty_blocks == 9);

  // Raw bytes without a sidecar read as 8-bit symbols.
  io::write_bytes(dir.path / "raw.bin", {7, 8, 9});
  const SymbolStream raw = io::read_symbols(dir.path / "raw.bin");
  CHECK(raw.n == 8);
  CHECK(raw.symbols == std::vector<std::uint32_t>{7, 8, 9});

  io::write_text(dir.path / "s.bin.json", "{\"n\": 5, \"count\": 40}");
  CHECK_THROWS_AS(io::read_symbols(dir.path / "s.bin"), IoError);
}

TEST_CASE("restart matrix round trip") {
  TempDir dir;
  sp90b::RestartMatrix m;
  m.rows = 3;
  m.cols = 4;
  m.n = 8;
  for (std::uint32_t i = 0; i < 12; ++i) m.data.push_back(i * 20);
  io::write_restart_matrix(dir.path / "m.bin", m);
  const auto back = io::read_restart_matrix(dir.path / "m.bin");
  CHECK(back.rows == 3);
  CHECK(back.cols == 4);
  CHECK(back.n == 8);
  CHECK(back.data == m.data);
}

TEST_CASE("PGM output") {
  TempDir dir;
  GrayscaleMap map(2, 3);
  map << 0, 1, 2, 253, 254, 255;
  io::write_pgm(dir.path / "m.pgm", map);
  const auto bytes = io::read_bytes(dir.path / "m.pgm");
  const std::string header = "P5\n3 2\n255\n";
  REQUIRE(bytes.size() == header.size() + 6);
  CHECK(std::string(bytes.begin(), bytes.begin() + static_cast<std::ptrdiff_t>(header.size())) == header);
  CHECK(bytes.back() == 255);
  CHECK(bytes[header.size()] == 0);
}

TEST_CASE("graph and web files") {
  TempDir dir;
  const apps::Graph g{4, {{0, 1}, {1, 2}, {2, 3}, {3, 0}, {0, 1}}};
  io::write_graph(dir.path / "g.csv", g);
  const apps::Graph gb = io::read_graph(dir.path / "g.csv");
  CHECK(gb.nodes == 4);
  CHECK(gb.edges == g.edges);
  CHECK(io::read_text(dir.path / "g.csv").rfind("# {", 0) == 0);

  const apps::Web w{3, {{0, 1}, {1, 2}, {2, 0}}};
  io::write_web(dir.path / "w.csv", w);
  CHECK(io::read_web(dir.path / "w.csv").edges == w.edges);
  CHECK_THROWS_AS(io::read_graph(dir.path / "w.csv"), IoError);
}

TEST_CASE("device parameters JSON round trip") {
  DeviceParams p;
  p.max_trapped = 2;
  p.seed = 99;
  p.bias_current = 25e-9;
  const report::Json j = report::to_json(p);
  CHECK(j.at("max_trapped") == 2);
  CHECK(report::device_params_from_json(j) == p);
  report::Json bad = j;
  bad["unknown"] = 1;
  CHECK_THROWS_AS(report::device_params_from_json(bad), ParameterError);
  bad = j;
  bad["duration"] = "long";
  CHECK_THROWS_AS(report::device_params_from_json(bad), ParameterError);
  bad = j;
  bad["max_trapped"] = 0;
  CHECK_THROWS_AS(report::device_params_from_json(bad), ParameterError);
}

TEST_CASE("manifest lists digests relative to the manifest") {
  TempDir dir;
  io::write_text(dir.path / "out.txt", "abc");
  report::Manifest m;
  m.subcommand = "test";
  m.parameters["x"] = 1;
  m.outputs.push_back(dir.path / "out.txt");
  const report::Json j = report::to_json(m, dir.path / "out.txt.manifest.json");
  CHECK(j.at("tool") == "entropy-forge");
  CHECK(j.at("schema_version") == report::kSchemaVersion);
  CHECK(j.at("outputs")[0].at("path") == "out.txt");
  CHECK(j.at("outputs")[0].at("sha256") == io::sha256_hex({'a', 'b', 'c'}));
  CHECK_FALSE(j.contains("wall_time_s"));
  CHECK(report::dump(report::Json(std::nan(""))) == "null\n");
}
