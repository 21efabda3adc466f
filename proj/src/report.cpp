#include "entropy_forge/report.hpp"

#include "entropy_forge/error.hpp"
#include "entropy_forge/io.hpp"

namespace ef::report {

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

Json to_json(const DeviceParams& p) {
  Json j;
  j["max_trapped"] = p.max_trapped;
  j["capture_rate_base"] = p.capture_rate_base;
  j["release_rate_base"] = p.release_rate_base;
  j["bias_current"] = p.bias_current;
  j["bias_scale"] = p.bias_scale;
  j["level_step"] = p.level_step;
  j["baseline"] = p.baseline;
  j["noise_sigma"] = p.noise_sigma;
  j["rc_time_constant"] = p.rc_time_constant;
  j["sample_rate"] = p.sample_rate;
  j["duration"] = p.duration;
  j["seed"] = p.seed;
  return j;
}

DeviceParams device_params_from_json(const Json& j) {
  if (!j.is_object()) throw ParameterError("device parameters must be a JSON object");
  DeviceParams p;
  const Json defaults = to_json(p);
  for (const auto& [key, value] : j.items()) {
    if (!defaults.contains(key)) throw ParameterError("unknown device parameter '" + key + "'");
    if (!value.is_number()) throw ParameterError("device parameter '" + key + "' must be a number");
  }
  p.max_trapped = j.value("max_trapped", p.max_trapped);
  p.capture_rate_base = j.value("capture_rate_base", p.capture_rate_base);
  p.release_rate_base = j.value("release_rate_base", p.release_rate_base);
  p.bias_current = j.value("bias_current", p.bias_current);
  p.bias_scale = j.value("bias_scale", p.bias_scale);
  p.level_step = j.value("level_step", p.level_step);
  p.baseline = j.value("baseline", p.baseline);
  p.noise_sigma = j.value("noise_sigma", p.noise_sigma);
  p.rc_time_constant = j.value("rc_time_constant", p.rc_time_constant);
  p.sample_rate = j.value("sample_rate", p.sample_rate);
  p.duration = j.value("duration", p.duration);
  p.seed = j.value("seed", p.seed);
  p.validate();
  return p;
}

Json to_json(const sp90b::PermutationTestOutcome& o) {
  Json j;
  j["statistic"] = o.statistic_name;
  j["original_value"] = o.original_value;
  j["counter_higher"] = o.counter_higher;
  j["counter_equal"] = o.counter_equal;
  j["permutations"] = o.permutations;
  j["pass"] = o.pass;
  return j;
}

Json to_json(const sp90b::ChiSquareOutcome& o) {
  Json j;
  j["test"] = o.test_name;
  j["statistic"] = o.statistic;
  j["dof"] = o.dof;
  j["p_value"] = o.p_value;
  j["pass"] = o.pass;
  return j;
}

Json to_json(const sp90b::IidResult& r) {
  Json j;
  j["verdict"] = r.verdict;
  j["permutation_tests"] = Json::array();
  for (const auto& o : r.permutation) j["permutation_tests"].push_back(to_json(o));
  j["chi_square_tests"] = Json::array();
  for (const auto& o : r.chi_square) j["chi_square_tests"].push_back(to_json(o));
  return j;
}

Json to_json(const sp90b::McvEstimate& e) {
  Json j;
  j["p_hat"] = e.p_hat;
  j["p_upper"] = e.p_upper;
  j["h_min"] = e.h_min;
  return j;
}

Json to_json(const sp90b::MinEntropy& e) {
  Json j;
  j["symbol"] = to_json(e.symbol);
  j["bitstring"] = to_json(e.bitstring);
  j["h_symbol"] = e.h_symbol;
  j["h_bitstring"] = e.h_bitstring;
  j["min_entropy"] = e.min_entropy;
  return j;
}

Json to_json(const sp90b::RestartResult& r) {
  Json j;
  j["h_claim"] = r.h_claim;
  j["max_row_count"] = r.max_row_count;
  j["max_col_count"] = r.max_col_count;
  j["row_tail"] = r.row_tail;
  j["col_tail"] = r.col_tail;
  j["sanity_pass"] = r.sanity_pass;
  j["rows"] = to_json(r.rows);
  j["cols"] = to_json(r.cols);
  j["validation_pass"] = r.validation_pass;
  return j;
}

Json to_json(const sp90b::AssessmentReport& r) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["n"] = r.n;
  j["samples"] = r.samples;
  j["seed"] = r.seed;
  j["permutations"] = r.permutations;
  j["status"] = r.status;
  j["iid_verdict"] = r.iid_verdict;
  j["h_symbol"] = r.h_symbol;
  j["h_bitstring"] = r.h_bitstring;
  j["min_entropy"] = r.min_entropy;
  j["sequential"] = to_json(r.sequential);
  j["sequential"]["entropy"] = to_json(r.sequential_entropy);
  j["sequential"]["sanity_check"] = "NA";
  j["restart"] = r.restart ? to_json(*r.restart) : Json(nullptr);
  j["restart_rows_iid"] = r.restart_rows_iid ? to_json(*r.restart_rows_iid) : Json(nullptr);
  j["restart_cols_iid"] = r.restart_cols_iid ? to_json(*r.restart_cols_iid) : Json(nullptr);
  j["conformance_flags"] = r.conformance_flags;
  j["conformant"] = r.conformance_flags.empty();
  return j;
}

Json to_json(const Manifest& m, const std::filesystem::path& manifest_path) {
  namespace fs = std::filesystem;
  const fs::path base = fs::absolute(manifest_path).parent_path();
  auto entries = [&](const std::vector<fs::path>& files) {
    Json list = Json::array();
    for (const auto& f : files) {
      Json e;
      e["path"] = fs::absolute(f).lexically_relative(base).generic_string();
      e["sha256"] = io::sha256_file(f);
      list.push_back(e);
    }
    return list;
  };
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["tool"] = "entropy-forge";
  j["version"] = ENTROPY_FORGE_VERSION;
  j["subcommand"] = m.subcommand;
  j["parameters"] = m.parameters;
  j["inputs"] = entries(m.inputs);
  j["outputs"] = entries(m.outputs);
  if (m.wall_time_s) j["wall_time_s"] = *m.wall_time_s;
  return j;
}

void write_manifest(const std::filesystem::path& path, const Manifest& m) {
  io::write_text(path, dump(to_json(m, path)));
}

}  // namespace ef::report
