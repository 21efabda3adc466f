#pragma once

// JSON renderings of results, and run manifests.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "entropy_forge/chaos.hpp"
#include "entropy_forge/device_sim.hpp"
#include "entropy_forge/extraction.hpp"
#include "entropy_forge/sp90b.hpp"
#include "entropy_forge/stats.hpp"

namespace ef::report {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

/// Two-space indented JSON followed by a newline; NaN and infinities become null.
std::string dump(const Json& j);

Json to_json(const DeviceParams& params);
DeviceParams device_params_from_json(const Json& j);

Json to_json(const sp90b::PermutationTestOutcome& o);
Json to_json(const sp90b::ChiSquareOutcome& o);
Json to_json(const sp90b::IidResult& r);
Json to_json(const sp90b::McvEstimate& e);
Json to_json(const sp90b::MinEntropy& e);
Json to_json(const sp90b::RestartResult& r);
Json to_json(const sp90b::AssessmentReport& r);

struct Manifest {
  std::string subcommand;
  Json parameters = Json::object();
  std::vector<std::filesystem::path> inputs;
  std::vector<std::filesystem::path> outputs;
  std::optional<double> wall_time_s;  ///< left out by default so re-runs are byte-identical
};

/// Digests every listed file; paths are stored relative to the manifest's directory.
Json to_json(const Manifest& m, const std::filesystem::path& manifest_path);
void write_manifest(const std::filesystem::path& path, const Manifest& m);

}  // namespace ef::report
