#include "entropy_forge/io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include <openssl/evp.h>

#include "json.hpp"

#include "entropy_forge/error.hpp"

namespace ef::io {

namespace {

using Json = nlohmann::ordered_json;

constexpr char kTraceMagic[4] = {'V', 'T', 'R', 'C'};
constexpr std::uint16_t kTraceVersion = 1;
constexpr std::size_t kTraceHeader = 16;

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xff));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_f64(std::vector<std::uint8_t>& out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
}

std::uint16_t get_u16(const std::uint8_t* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

double get_f64(const std::uint8_t* p) {
  std::uint64_t bits = 0;
  for (int i = 7; i >= 0; --i) bits = (bits << 8) | p[i];
  return std::bit_cast<double>(bits);
}

Json read_json(const fs::path& path) {
  try {
    return Json::parse(read_text(path));
  } catch (const nlohmann::json::exception& e) {
    throw IoError(path.string() + ": invalid JSON: " + e.what());
  }
}

template <typename T>
T field(const Json& j, const char* key, const fs::path& path) {
  if (!j.contains(key)) throw IoError(path.string() + ": missing field '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw IoError(path.string() + ": field '" + key + "' has the wrong type");
  }
}

std::string edge_list_text(const Json& header,
                           const std::vector<std::pair<std::uint32_t, std::uint32_t>>& edges) {
  std::string out = "# " + header.dump() + "\n";
  for (const auto& [u, v] : edges) out += std::to_string(u) + "," + std::to_string(v) + "\n";
  return out;
}

std::pair<Json, std::vector<std::pair<std::uint32_t, std::uint32_t>>> parse_edge_list(
    const fs::path& path, const char* kind) {
  std::istringstream in(read_text(path));
  std::string line;
  if (!std::getline(in, line) || line.rfind("# ", 0) != 0) {
    throw IoError(path.string() + ": missing '# {json}' header line");
  }
  Json header;
  try {
    header = Json::parse(line.substr(2));
  } catch (const nlohmann::json::exception& e) {
    throw IoError(path.string() + ": bad header: " + e.what());
  }
  if (field<std::string>(header, "kind", path) != kind) {
    throw IoError(path.string() + ": expected a " + kind + " file");
  }
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    unsigned long u = 0;
    unsigned long v = 0;
    char comma = 0;
    std::istringstream row(line);
    if (!(row >> u >> comma >> v) || comma != ',') {
      throw IoError(path.string() + ":" + std::to_string(line_no) + ": expected 'u,v'");
    }
    edges.emplace_back(static_cast<std::uint32_t>(u), static_cast<std::uint32_t>(v));
  }
  return {header, edges};
}

}  // namespace

fs::path sidecar_path(const fs::path& path) { return fs::path(path.string() + ".json"); }

std::vector<std::uint8_t> read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_bytes(const fs::path& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed: " + path.string());
}

void write_trace(const fs::path& path, const VoltageTrace& trace) {
  validate(trace);
  std::vector<std::uint8_t> out;
  out.reserve(kTraceHeader + 8 * trace.samples.size());
  out.insert(out.end(), std::begin(kTraceMagic), std::end(kTraceMagic));
  put_u16(out, kTraceVersion);
  put_u16(out, 0);
  put_f64(out, trace.dt);
  for (double v : trace.samples) put_f64(out, v);
  write_bytes(path, out);
}

VoltageTrace read_trace(const fs::path& path) {
  const auto bytes = read_bytes(path);
  if (bytes.size() < kTraceHeader || std::memcmp(bytes.data(), kTraceMagic, 4) != 0) {
    throw IoError(path.string() + ": not a VTRC trace");
  }
  if (get_u16(bytes.data() + 4) != kTraceVersion) {
    throw IoError(path.string() + ": unsupported trace version " + std::to_string(get_u16(bytes.data() + 4)));
  }
  if ((bytes.size() - kTraceHeader) % 8 != 0) throw IoError(path.string() + ": truncated sample data");
  VoltageTrace trace;
  trace.dt = get_f64(bytes.data() + 8);
  const std::size_t n = (bytes.size() - kTraceHeader) / 8;
  trace.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) trace.samples[i] = get_f64(bytes.data() + kTraceHeader + 8 * i);
  trace.meta.note = "imported: " + path.filename().string();
  try {
    validate(trace);
  } catch (const Error& e) {
    throw IoError(path.string() + ": " + e.what());
  }
  return trace;
}

std::vector<std::uint8_t> pack_symbols(const std::vector<std::uint32_t>& symbols, int n) {
  if (n < 1 || n > 16) throw ParameterError("symbol width must be in [1, 16]");
  if (n == 8) return {symbols.begin(), symbols.end()};
  const std::uint64_t bits = static_cast<std::uint64_t>(symbols.size()) * static_cast<std::uint64_t>(n);
  std::vector<std::uint8_t> out((bits + 7) / 8, 0);
  std::uint64_t pos = 0;
  for (std::uint32_t s : symbols) {
    for (int b = n - 1; b >= 0; --b, ++pos) {
      if ((s >> b) & 1u) out[pos / 8] |= static_cast<std::uint8_t>(0x80u >> (pos % 8));
    }
  }
  return out;
}

std::vector<std::uint32_t> unpack_symbols(const std::vector<std::uint8_t>& bytes, int n, std::size_t count) {
  if (n < 1 || n > 16) throw ParameterError("symbol width must be in [1, 16]");
  const std::uint64_t bits = static_cast<std::uint64_t>(count) * static_cast<std::uint64_t>(n);
  if (bytes.size() != (bits + 7) / 8) {
    throw IoError("symbol data holds " + std::to_string(bytes.size()) + " bytes, expected " +
                  std::to_string((bits + 7) / 8));
  }
  if (n == 8) return {bytes.begin(), bytes.end()};
  std::vector<std::uint32_t> out(count, 0);
  std::uint64_t pos = 0;
  for (std::size_t i = 0; i < count; ++i) {
    std::uint32_t s = 0;
    for (int b = 0; b < n; ++b, ++pos) s = (s << 1) | ((bytes[pos / 8] >> (7 - pos % 8)) & 1u);
    out[i] = s;
  }
  return out;
}

void write_symbols(const fs::path& path, const SymbolStream& stream) {
  validate(stream);
  write_bytes(path, pack_symbols(stream.symbols, stream.n));
  Json side;
  side["n"] = stream.n;
  side["count"] = stream.symbols.size();
  side["dropped_blocks"] = stream.dropped_blocks;
  side["empty_blocks"] = stream.empty_blocks;
  write_text(sidecar_path(path), side.dump(2) + "\n");
}

SymbolStream read_symbols(const fs::path& path) {
  const auto bytes = read_bytes(path);
  SymbolStream stream;
  const fs::path side_path = sidecar_path(path);
  if (fs::exists(side_path)) {
    const Json side = read_json(side_path);
    stream.n = field<int>(side, "n", side_path);
    const auto count = field<std::size_t>(side, "count", side_path);
    stream.dropped_blocks = side.value("dropped_blocks", std::size_t{0});
    stream.empty_blocks = side.value("empty_blocks", std::size_t{0});
    try {
      stream.symbols = unpack_symbols(bytes, stream.n, count);
    } catch (const Error& e) {
      throw IoError(path.string() + ": " + e.what());
    }
  } else {
    // Without a sidecar the file is taken as raw bytes.
    stream.n = 8;
    stream.symbols.assign(bytes.begin(), bytes.end());
  }
  return stream;
}

void write_restart_matrix(const fs::path& path, const sp90b::RestartMatrix& matrix) {
  if (matrix.data.size() != matrix.rows * matrix.cols) throw ParameterError("restart matrix size mismatch");
  write_bytes(path, pack_symbols(matrix.data, matrix.n));
  Json side;
  side["rows"] = matrix.rows;
  side["cols"] = matrix.cols;
  side["n"] = matrix.n;
  write_text(sidecar_path(path), side.dump(2) + "\n");
}

sp90b::RestartMatrix read_restart_matrix(const fs::path& path) {
  const fs::path side_path = sidecar_path(path);
  if (!fs::exists(side_path)) throw IoError(side_path.string() + ": restart sidecar not found");
  const Json side = read_json(side_path);
  sp90b::RestartMatrix m;
  m.rows = field<std::size_t>(side, "rows", side_path);
  m.cols = field<std::size_t>(side, "cols", side_path);
  m.n = field<int>(side, "n", side_path);
  try {
    m.data = unpack_symbols(read_bytes(path), m.n, m.rows * m.cols);
  } catch (const IoError&) {
    throw;
  } catch (const Error& e) {
    throw IoError(path.string() + ": " + e.what());
  }
  return m;
}

void write_pgm(const fs::path& path, const GrayscaleMap& map) {
  const std::string header =
      "P5\n" + std::to_string(map.cols()) + " " + std::to_string(map.rows()) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), map.data(), map.data() + map.size());
  write_bytes(path, out);
}

void write_graph(const fs::path& path, const apps::Graph& graph) {
  Json header;
  header["kind"] = "graph";
  header["nodes"] = graph.nodes;
  header["edges"] = graph.edges.size();
  write_text(path, edge_list_text(header, graph.edges));
}

void write_web(const fs::path& path, const apps::Web& web) {
  Json header;
  header["kind"] = "web";
  header["nodes"] = web.nodes;
  header["edges"] = web.edges.size();
  write_text(path, edge_list_text(header, web.edges));
}

apps::Graph read_graph(const fs::path& path) {
  auto [header, edges] = parse_edge_list(path, "graph");
  apps::Graph g;
  g.nodes = field<std::uint32_t>(header, "nodes", path);
  g.edges = std::move(edges);
  return g;
}

apps::Web read_web(const fs::path& path) {
  auto [header, edges] = parse_edge_list(path, "web");
  apps::Web w;
  w.nodes = field<std::uint32_t>(header, "nodes", path);
  w.edges = std::move(edges);
  return w;
}

std::string sha256_hex(const std::vector<std::uint8_t>& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 computation failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xf]);
  }
  return out;
}

std::string sha256_file(const fs::path& path) { return sha256_hex(read_bytes(path)); }

}  // namespace ef::io
