#pragma once

// File formats. All binary data is little-endian; symbol streams and
// restart matrices carry a JSON sidecar named <file>.json.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "entropy_forge/apps.hpp"
#include "entropy_forge/device_sim.hpp"
#include "entropy_forge/extraction.hpp"
#include "entropy_forge/sp90b.hpp"
#include "entropy_forge/stats.hpp"

namespace ef::io {

namespace fs = std::filesystem;

std::vector<std::uint8_t> read_bytes(const fs::path& path);
std::string read_text(const fs::path& path);
void write_bytes(const fs::path& path, const std::vector<std::uint8_t>& bytes);
void write_text(const fs::path& path, const std::string& text);

/// "VTRC", u16 version = 1, u16 reserved = 0, f64 dt, then f64 samples.
void write_trace(const fs::path& path, const VoltageTrace& trace);
VoltageTrace read_trace(const fs::path& path);

/// Raw bytes for n = 8, otherwise n bits per symbol packed MSB first.
std::vector<std::uint8_t> pack_symbols(const std::vector<std::uint32_t>& symbols, int n);
std::vector<std::uint32_t> unpack_symbols(const std::vector<std::uint8_t>& bytes, int n, std::size_t count);

/// Writes the stream and its sidecar {n, count, dropped_blocks, empty_blocks}.
void write_symbols(const fs::path& path, const SymbolStream& stream);
SymbolStream read_symbols(const fs::path& path);

/// Row-major symbols with sidecar {rows, cols, n}.
void write_restart_matrix(const fs::path& path, const sp90b::RestartMatrix& matrix);
sp90b::RestartMatrix read_restart_matrix(const fs::path& path);

/// Binary (P5) PGM with maxval 255.
void write_pgm(const fs::path& path, const GrayscaleMap& map);

/// First line "# " + JSON header, then one "u,v" line per edge.
void write_graph(const fs::path& path, const apps::Graph& graph);
void write_web(const fs::path& path, const apps::Web& web);
apps::Graph read_graph(const fs::path& path);
apps::Web read_web(const fs::path& path);

std::string sha256_hex(const std::vector<std::uint8_t>& bytes);
std::string sha256_file(const fs::path& path);

fs::path sidecar_path(const fs::path& path);

}  // namespace ef::io
