#include "cli.hpp"

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <optional>
#include <ostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"

#include "entropy_forge/apps.hpp"
#include "entropy_forge/chaos.hpp"
#include "entropy_forge/device_sim.hpp"
#include "entropy_forge/error.hpp"
#include "entropy_forge/extraction.hpp"
#include "entropy_forge/io.hpp"
#include "entropy_forge/report.hpp"
#include "entropy_forge/sp90b.hpp"
#include "entropy_forge/stats.hpp"

namespace ef::cli {

namespace {

namespace fs = std::filesystem;
using report::Json;
using Clock = std::chrono::steady_clock;

/// Thrown by handlers when the work succeeded but the verdict is negative.
struct AssessmentFailure {
  std::string message;
};

unsigned resolve_threads(unsigned requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("ENTROPY_FORGE_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v > 0) return static_cast<unsigned>(v);
    } catch (const std::exception&) {
    }
    throw ParameterError(std::string("ENTROPY_FORGE_THREADS must be a positive integer, got '") + env + "'");
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

struct ManifestOptions {
  std::string path;
  bool record_timing = false;

  void add(CLI::App* cmd) {
    cmd->add_option("--manifest", path, "Manifest path (default: <output>.manifest.json)");
    cmd->add_flag("--record-timing", record_timing, "Store wall time in the manifest");
  }

  void write(report::Manifest m, const fs::path& primary_output, Clock::time_point start) const {
    if (record_timing) m.wall_time_s = std::chrono::duration<double>(Clock::now() - start).count();
    const fs::path where = path.empty() ? fs::path(primary_output.string() + ".manifest.json") : fs::path(path);
    report::write_manifest(where, m);
  }
};

std::vector<fs::path> with_sidecar(const fs::path& p) { return {p, io::sidecar_path(p)}; }

// --- simulate -----------------------------------------------------------------

struct SimulateArgs {
  std::string params;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<double> duration;
  ManifestOptions manifest;
};

int do_simulate(const SimulateArgs& a, std::ostream& out) {
  const auto start = Clock::now();
  DeviceParams p;
  if (!a.params.empty()) {
    try {
      p = report::device_params_from_json(Json::parse(io::read_text(a.params)));
    } catch (const nlohmann::json::exception& e) {
      throw IoError(a.params + ": invalid JSON: " + e.what());
    }
  }
  if (a.seed) p.seed = *a.seed;
  if (a.duration) p.duration = *a.duration;
  p.validate();
  const VoltageTrace trace = simulate_trace(p);
  io::write_trace(a.out, trace);
  report::Manifest m;
  m.subcommand = "simulate";
  m.parameters = report::to_json(p);
  if (!a.params.empty()) m.inputs.push_back(a.params);
  m.outputs.push_back(a.out);
  a.manifest.write(m, a.out, start);
  out << "wrote " << trace.samples.size() << " samples (" << trace.meta.event_count << " transitions) to "
      << a.out << "\n";
  return kExitOk;
}

// --- extract ------------------------------------------------------------------

struct ExtractArgs {
  std::string in;
  std::string out;
  int n = 8;
  double bin_width = 8e-8;
  std::optional<double> cutoff;
  std::optional<double> threshold;
  std::optional<double> dead_time;
  double threshold_sigmas = 4.0;
  ManifestOptions manifest;
};

int do_extract(const ExtractArgs& a, std::ostream& out) {
  const auto start = Clock::now();
  const VoltageTrace trace = io::read_trace(a.in);
  ExtractionConfig cfg;
  cfg.n = a.n;
  cfg.bin_width = a.bin_width;
  cfg.cutoff_hz = a.cutoff;
  cfg.threshold = a.threshold;
  cfg.dead_time = a.dead_time;
  cfg.threshold_sigmas = a.threshold_sigmas;
  const ExtractionResult result = extract(trace, cfg);
  io::write_symbols(a.out, result.stream);

  report::Manifest m;
  m.subcommand = "extract";
  m.parameters["n"] = a.n;
  m.parameters["bin_width"] = a.bin_width;
  m.parameters["cutoff_hz"] = a.cutoff ? Json(*a.cutoff) : Json(nullptr);
  m.parameters["threshold"] = result.threshold;
  m.parameters["dead_time"] = a.dead_time ? Json(*a.dead_time) : Json(nullptr);
  m.parameters["threshold_sigmas"] = a.threshold_sigmas;
  m.parameters["events"] = result.events;
  m.inputs.push_back(a.in);
  m.outputs = with_sidecar(a.out);
  a.manifest.write(m, a.out, start);
  out << "extracted " << result.stream.symbols.size() << " symbols from " << result.events << " events ("
      << result.stream.dropped_blocks << " blocks dropped)\n";
  return kExitOk;
}

// --- analyze stats ------------------------------------------------------------

struct StatsArgs {
  std::string in;
  std::string report;
  std::string pgm;
  std::string pairs_csv;
  std::string diff_csv;
  std::size_t lag = 1;
  std::size_t block_len = 100;
  std::size_t pgm_side = 0;
  ManifestOptions manifest;
};

Json stats_report(const SymbolStream& stream, std::size_t block_len) {
  const SymbolHistogram hist = histogram(stream);
  const EntropyReport entropy = shannon_entropy(hist);
  const auto bits = to_bits(stream);
  Json j;
  j["schema_version"] = report::kSchemaVersion;
  j["n"] = stream.n;
  j["count"] = stream.symbols.size();
  j["dropped_blocks"] = stream.dropped_blocks;
  j["empty_blocks"] = stream.empty_blocks;
  j["shannon_bits_per_symbol"] = entropy.shannon_bits_per_symbol;
  j["shannon_bits_per_bit"] = entropy.shannon_bits_per_bit;
  j["histogram"] = hist.counts;
  Json blocks;
  blocks["block_len"] = block_len;
  if (bits.size() >= block_len) {
    const BlockOnesHistogram ones = bit_block_ones(bits, block_len);
    blocks["blocks"] = ones.blocks;
    blocks["counts"] = ones.counts;
    const ChiSquareResult chi = ones.chi_square();
    blocks["chi_square"] = {{"statistic", chi.statistic}, {"dof", chi.dof}, {"p_value", chi.p_value},
                            {"bins", chi.bins}};
  } else {
    blocks["blocks"] = 0;
  }
  j["bit_blocks"] = blocks;
  Json corr = Json::object();
  for (std::size_t lag : sp90b::kLags) {
    if (stream.symbols.size() > lag + 1) corr[std::to_string(lag)] = lag_correlation(stream, lag);
  }
  j["lag_correlation"] = corr;
  return j;
}

int do_stats(const StatsArgs& a, std::ostream& out) {
  const auto start = Clock::now();
  const SymbolStream stream = io::read_symbols(a.in);
  const Json j = stats_report(stream, a.block_len);
  io::write_text(a.report, report::dump(j));
  report::Manifest m;
  m.subcommand = "analyze stats";
  m.parameters["block_len"] = a.block_len;
  m.parameters["lag"] = a.lag;
  m.inputs.push_back(a.in);
  m.outputs.push_back(a.report);
  if (!a.pgm.empty()) {
    auto side = static_cast<Eigen::Index>(a.pgm_side);
    if (side == 0) side = static_cast<Eigen::Index>(std::sqrt(static_cast<double>(stream.symbols.size())));
    io::write_pgm(a.pgm, grayscale_map(stream, side, side));
    m.parameters["pgm_side"] = side;
    m.outputs.push_back(a.pgm);
  }
  if (!a.pairs_csv.empty()) {
    std::string csv = "x_t,x_t_plus_lag\n";
    for (const auto& [x, y] : lag_pairs(stream, a.lag)) csv += std::to_string(x) + "," + std::to_string(y) + "\n";
    io::write_text(a.pairs_csv, csv);
    m.outputs.push_back(a.pairs_csv);
  }
  if (!a.diff_csv.empty()) {
    std::string csv = "t,difference\n";
    const auto diff = difference_series(stream);
    for (std::size_t t = 0; t < diff.size(); ++t) csv += std::to_string(t) + "," + std::to_string(diff[t]) + "\n";
    io::write_text(a.diff_csv, csv);
    m.outputs.push_back(a.diff_csv);
  }
  a.manifest.write(m, a.report, start);
  out << "H_S = " << j["shannon_bits_per_symbol"].get<double>() << " bits/symbol over " << stream.symbols.size()
      << " symbols\n";
  return kExitOk;
}

// --- analyze chaos ------------------------------------------------------------

struct ChaosArgs {
  std::string in;
  std::string report;
  bool k2 = false;
  bool corrdim = false;
  int dmin = 1;
  int dmax = 8;
  int k2_dmin = 2;
  int k2_dmax = 5;
  int lag = 1;
  std::size_t points = 5000;
  double r_min = 0.03;
  double r_max = 0.5;
  std::size_t radii = 24;
  double eps_max = 0.5;
  double eps_min = 0.05;
  std::size_t eps_count = 10;
  long theiler = 0;
  std::string k2_csv;
  std::string corrdim_csv;
  std::string recurrence_csv;
  double recurrence_radius = 0.05;
  ManifestOptions manifest;
};

int do_chaos(const ChaosArgs& a, std::ostream& out) {
  const auto start = Clock::now();
  if (!a.k2 && !a.corrdim && a.recurrence_csv.empty()) {
    throw ParameterError("choose at least one of --k2, --corrdim, --recurrence-csv");
  }
  const SymbolStream stream = io::read_symbols(a.in);
  const std::size_t take = std::min(a.points, stream.symbols.size());
  Eigen::VectorXd series(static_cast<Eigen::Index>(take));
  for (std::size_t i = 0; i < take; ++i) series[static_cast<Eigen::Index>(i)] = stream.symbols[i];
  const std::uint32_t levels = stream.alphabet_size();

  Json j;
  j["schema_version"] = report::kSchemaVersion;
  j["points"] = take;
  j["lag"] = a.lag;
  j["theiler"] = a.theiler;
  report::Manifest m;
  m.subcommand = "analyze chaos";
  m.inputs.push_back(a.in);
  m.outputs.push_back(a.report);

  if (a.corrdim) {
    const std::vector<double> radii = quantized_grid(a.r_min, a.r_max, a.radii, levels);
    std::vector<int> dims;
    for (int d = a.dmin; d <= a.dmax; ++d) dims.push_back(d);
    ScalingFitOptions fit;
    fit.theiler = a.theiler;
    const CorrDimCurve curve = correlation_dimension_curve(series, std::span<const int>(dims), a.lag,
                                                           std::span<const double>(radii), fit);
    Json c = Json::array();
    std::string csv = "d,nu,r_low,r_high\n";
    for (std::size_t k = 0; k < curve.dims.size(); ++k) {
      c.push_back({{"d", curve.dims[k]},
                   {"nu", curve.nus[k]},
                   {"r_low", curve.fit_ranges[k].first},
                   {"r_high", curve.fit_ranges[k].second}});
      std::ostringstream row;
      row.precision(17);
      row << curve.dims[k] << "," << curve.nus[k] << "," << curve.fit_ranges[k].first << ","
          << curve.fit_ranges[k].second << "\n";
      csv += row.str();
    }
    j["correlation_dimension"] = c;
    if (!a.corrdim_csv.empty()) {
      io::write_text(a.corrdim_csv, csv);
      m.outputs.push_back(a.corrdim_csv);
    }
  }
  if (a.k2) {
    const std::vector<double> eps = log_grid_descending(a.eps_max, a.eps_min, a.eps_count);
    const K2Curve curve = k2_estimate(series, a.k2_dmin, a.k2_dmax, std::span<const double>(eps), a.lag, a.theiler);
    Json c = Json::array();
    std::string csv = "epsilon,k2\n";
    for (std::size_t e = 0; e < curve.epsilons.size(); ++e) {
      c.push_back({{"epsilon", curve.epsilons[e]},
                   {"k2", curve.usable[e] ? Json(curve.k2[e]) : Json(nullptr)}});
      if (curve.usable[e]) {
        std::ostringstream row;
        row.precision(17);
        row << curve.epsilons[e] << "," << curve.k2[e] << "\n";
        csv += row.str();
      }
    }
    j["k2"] = {{"d_first", curve.d_first}, {"d_last", curve.d_last}, {"curve", c}};
    if (!a.k2_csv.empty()) {
      io::write_text(a.k2_csv, csv);
      m.outputs.push_back(a.k2_csv);
    }
  }
  if (!a.recurrence_csv.empty()) {
    const auto emb = embed(series, a.dmin, a.lag);
    const auto pairs = recurrence_matrix(emb, a.recurrence_radius);
    std::string csv = "i,j\n";
    for (const auto& [p, q] : pairs) csv += std::to_string(p) + "," + std::to_string(q) + "\n";
    io::write_text(a.recurrence_csv, csv);
    m.outputs.push_back(a.recurrence_csv);
    j["recurrence_pairs"] = pairs.size();
  }
  io::write_text(a.report, report::dump(j));
  m.parameters = {{"k2", a.k2},           {"corrdim", a.corrdim},     {"dmin", a.dmin},
                  {"dmax", a.dmax},       {"k2_dmin", a.k2_dmin},     {"k2_dmax", a.k2_dmax},
                  {"lag", a.lag},         {"points", a.points},       {"r_min", a.r_min},
                  {"r_max", a.r_max},     {"radii", a.radii},         {"eps_max", a.eps_max},
                  {"eps_min", a.eps_min}, {"eps_count", a.eps_count}, {"theiler", a.theiler},
                  {"recurrence_radius", a.recurrence_radius}};
  a.manifest.write(m, a.report, start);
  out << "wrote chaos report to " << a.report << "\n";
  return kExitOk;
}

// --- sp90b ----------------------------------------------------------------------

struct AssessArgs {
  std::string in;
  std::string restart;
  std::string out;
  std::uint64_t seed = 0;
  std::size_t permutations = sp90b::kPermutations;
  unsigned threads = 0;
  bool strict = false;
  bool no_restart_iid = false;
  ManifestOptions manifest;
};

sp90b::AssessmentReport run_assessment(const SymbolStream& stream, const std::optional<sp90b::RestartMatrix>& restart,
                                       std::uint64_t seed, std::size_t permutations, unsigned threads, bool strict,
                                       bool restart_iid) {
  sp90b::AssessmentOptions opts;
  opts.permutation.permutations = permutations;
  opts.permutation.seed = seed;
  opts.permutation.threads = resolve_threads(threads);
  opts.strict = strict;
  opts.run_restart_iid = restart_iid;
  return sp90b::assess(sp90b::Dataset(stream), restart, opts);
}

int do_assess(const AssessArgs& a, std::ostream& out) {
  const auto start = Clock::now();
  const SymbolStream stream = io::read_symbols(a.in);
  std::optional<sp90b::RestartMatrix> restart;
  if (!a.restart.empty()) restart = io::read_restart_matrix(a.restart);
  const auto rep = run_assessment(stream, restart, a.seed, a.permutations, a.threads, a.strict, !a.no_restart_iid);
  io::write_text(a.out, report::dump(report::to_json(rep)));

  report::Manifest m;
  m.subcommand = "sp90b assess";
  m.parameters = {{"seed", a.seed},
                  {"permutations", a.permutations},
                  {"strict", a.strict},
                  {"restart_iid", !a.no_restart_iid}};
  m.inputs = with_sidecar(a.in);
  if (!a.restart.empty()) {
    for (const auto& p : with_sidecar(a.restart)) m.inputs.push_back(p);
  }
  m.outputs.push_back(a.out);
  a.manifest.write(m, a.out, start);
  out << "iid_verdict=" << (rep.iid_verdict ? "true" : "false") << " min_entropy=" << rep.min_entropy
      << " status=" << rep.status << "\n";
  if (rep.status != "complete") throw AssessmentFailure{"assessment status: " + rep.status};
  return kExitOk;
}

struct HealthArgs {
  std::string in;
  std::string out;
  double h_min = 0;
  double alpha = sp90b::kHealthAlpha;
  std::size_t window = 0;
  ManifestOptions manifest;
};

int do_health(const HealthArgs& a, std::ostream& out) {
  const auto start = Clock::now();
  const SymbolStream stream = io::read_symbols(a.in);
  const std::size_t window =
      a.window > 0 ? a.window : (stream.n == 1 ? sp90b::kAptWindowBinary : sp90b::kAptWindow);
  const auto rct = sp90b::repetition_count_health(stream.symbols, a.h_min, a.alpha);
  const auto apt = sp90b::adaptive_proportion_health(stream.symbols, a.h_min, window, a.alpha);
  Json j;
  j["schema_version"] = report::kSchemaVersion;
  j["samples"] = stream.symbols.size();
  j["h_min"] = a.h_min;
  j["alpha"] = a.alpha;
  j["repetition_count"] = {{"cutoff", sp90b::repetition_count_cutoff(a.h_min, a.alpha)}, {"alarms", rct}};
  j["adaptive_proportion"] = {{"window", window},
                              {"cutoff", sp90b::adaptive_proportion_cutoff(window, a.h_min, a.alpha)},
                              {"alarms", apt}};
  const bool healthy = rct.empty() && apt.empty();
  j["healthy"] = healthy;
  if (!a.out.empty()) {
    io::write_text(a.out, report::dump(j));
    report::Manifest m;
    m.subcommand = "sp90b health";
    m.parameters = {{"h_min", a.h_min}, {"alpha", a.alpha}, {"window", window}};
    m.inputs = with_sidecar(a.in);
    m.outputs.push_back(a.out);
    a.manifest.write(m, a.out, start);
  }
  out << "repetition_count alarms=" << rct.size() << " adaptive_proportion alarms=" << apt.size() << "\n";
  if (!healthy) throw AssessmentFailure{"health test alarm"};
  return kExitOk;
}

// --- apps -----------------------------------------------------------------------

struct WalkArgs {
  std::string stream;
  std::string out;
  std::string report;
  std::size_t steps = 1000;
  std::size_t walks = 1;
  ManifestOptions manifest;
};

int do_walk(const WalkArgs& a, std::ostream& out) {
  const auto start = Clock::now();
  apps::RandomSource src = apps::RandomSource::from_stream(io::read_symbols(a.stream));
  std::string csv = "walk,step,x,y,z\n";
  double msd = 0.0;
  for (std::size_t w = 0; w < a.walks; ++w) {
    const auto path = apps::random_walk_3d(src, a.steps);
    for (std::size_t s = 0; s < path.size(); ++s) {
      csv += std::to_string(w) + "," + std::to_string(s) + "," + std::to_string(path[s][0]) + "," +
             std::to_string(path[s][1]) + "," + std::to_string(path[s][2]) + "\n";
    }
    const auto& end = path.back();
    msd += static_cast<double>(end[0] * end[0] + end[1] * end[1] + end[2] * end[2]);
  }
  msd /= static_cast<double>(a.walks);
  io::write_text(a.out, csv);
  report::Manifest m;
  m.subcommand = "apps walk";
  m.parameters = {{"steps", a.steps}, {"walks", a.walks}, {"bits_consumed", src.consumed()}};
  m.inputs = with_sidecar(a.stream);
  m.outputs.push_back(a.out);
  if (!a.report.empty()) {
    Json j = {{"schema_version", report::kSchemaVersion},
              {"steps", a.steps},
              {"walks", a.walks},
              {"mean_squared_displacement", msd},
              {"bits_consumed", src.consumed()}};
    io::write_text(a.report, report::dump(j));
    m.outputs.push_back(a.report);
  }
  a.manifest.write(m, a.out, start);
  out << "mean squared end displacement " << msd << " over " << a.walks << " walks of " << a.steps << " steps\n";
  return kExitOk;
}

struct PagerankArgs {
  std::string stream;
  std::string web;
  std::string report;
  std::string web_out;
  std::uint32_t nodes = 50;
  double edge_prob = 0.1;
  std::uint64_t web_seed = 1;
  std::uint64_t steps = 1000000;
  double damping = apps::kDamping;
  double rbo_p = apps::kRboPersistence;
  ManifestOptions manifest;
};

int do_pagerank(const PagerankArgs& a, std::ostream& out) {
  const auto start = Clock::now();
  const apps::Web web = a.web.empty() ? apps::generate_web(a.nodes, a.edge_prob, a.web_seed) : io::read_web(a.web);
  apps::RandomSource src = apps::RandomSource::from_stream(io::read_symbols(a.stream));
  const Eigen::VectorXd power = apps::pagerank_power(web, a.damping);
  const Eigen::VectorXd walk = apps::pagerank_walk(web, src, a.steps, a.damping);
  const auto rank_power = apps::ranking(power);
  const auto rank_walk = apps::ranking(walk);
  const double l1 = (power - walk).lpNorm<1>();
  const double overlap = apps::rbo(rank_power, rank_walk, a.rbo_p);
  Json j = {{"schema_version", report::kSchemaVersion},
            {"nodes", web.nodes},
            {"edges", web.edges.size()},
            {"steps", a.steps},
            {"damping", a.damping},
            {"l1_distance", l1},
            {"rbo", overlap},
            {"bits_consumed", src.consumed()},
            {"power", std::vector<double>(power.data(), power.data() + power.size())},
            {"walk", std::vector<double>(walk.data(), walk.data() + walk.size())},
            {"ranking_power", rank_power},
            {"ranking_walk", rank_walk}};
  io::write_text(a.report, report::dump(j));
  report::Manifest m;
  m.subcommand = "apps pagerank";
  m.parameters = {{"steps", a.steps}, {"damping", a.damping}, {"rbo_p", a.rbo_p}};
  if (a.web.empty()) {
    m.parameters["nodes"] = a.nodes;
    m.parameters["edge_prob"] = a.edge_prob;
    m.parameters["web_seed"] = a.web_seed;
  }
  m.inputs = with_sidecar(a.stream);
  if (!a.web.empty()) m.inputs.push_back(a.web);
  m.outputs.push_back(a.report);
  if (!a.web_out.empty()) {
    io::write_web(a.web_out, web);
    m.outputs.push_back(a.web_out);
  }
  a.manifest.write(m, a.report, start);
  out << "L1=" << l1 << " RBO=" << overlap << "\n";
  return kExitOk;
}

struct MincutArgs {
  std::string stream;
  std::string graph;
  std::string report;
  std::string trace;
  std::string graph_out;
  std::uint32_t nodes = 10;
  double edge_prob = 0.5;
  std::uint64_t graph_seed = 1;
  std::uint64_t iterations = 0;
  ManifestOptions manifest;
};

int do_mincut(const MincutArgs& a, std::ostream& out) {
  const auto start = Clock::now();
  const apps::Graph graph =
      a.graph.empty() ? apps::generate_graph(a.nodes, a.edge_prob, a.graph_seed) : io::read_graph(a.graph);
  apps::validate(graph);
  apps::RandomSource src = apps::RandomSource::from_stream(io::read_symbols(a.stream));
  const std::uint64_t iterations = a.iterations > 0 ? a.iterations : apps::karger_default_iterations(graph.nodes);
  const auto result = apps::karger_min_cut(graph, src, iterations);
  Json j = {{"schema_version", report::kSchemaVersion},
            {"nodes", graph.nodes},
            {"edges", graph.edges.size()},
            {"iterations", iterations},
            {"best_cut", result.best},
            {"bits_consumed", src.consumed()}};
  if (graph.nodes <= 20) {
    const auto exact = apps::brute_force_min_cut(graph);
    j["exact_cut"] = exact;
    j["error"] = result.best - exact;
  }
  io::write_text(a.report, report::dump(j));
  report::Manifest m;
  m.subcommand = "apps mincut";
  m.parameters = {{"iterations", iterations}};
  if (a.graph.empty()) {
    m.parameters["nodes"] = a.nodes;
    m.parameters["edge_prob"] = a.edge_prob;
    m.parameters["graph_seed"] = a.graph_seed;
  }
  m.inputs = with_sidecar(a.stream);
  if (!a.graph.empty()) m.inputs.push_back(a.graph);
  m.outputs.push_back(a.report);
  if (!a.trace.empty()) {
    std::string csv = "iteration,cut,running_min\n";
    for (std::size_t i = 0; i < result.cuts.size(); ++i) {
      csv += std::to_string(i + 1) + "," + std::to_string(result.cuts[i]) + "," +
             std::to_string(result.running_min[i]) + "\n";
    }
    io::write_text(a.trace, csv);
    m.outputs.push_back(a.trace);
  }
  if (!a.graph_out.empty()) {
    io::write_graph(a.graph_out, graph);
    m.outputs.push_back(a.graph_out);
  }
  a.manifest.write(m, a.report, start);
  out << "best cut " << result.best << " after " << iterations << " iterations\n";
  return kExitOk;
}

// --- pipeline -------------------------------------------------------------------

struct PipelineArgs {
  std::string workdir = "entropy-forge-run";
  std::string params;
  std::uint64_t seed = 1;
  std::size_t symbols = 100000;
  int n = 8;
  double bin_width = 8e-8;
  std::size_t permutations = sp90b::kPermutations;
  unsigned threads = 0;
  bool strict = false;
  bool record_timing = false;
};

int do_pipeline(const PipelineArgs& a, std::ostream& out) {
  const auto start = Clock::now();
  const fs::path dir = a.workdir;
  fs::create_directories(dir);
  DeviceParams p;
  if (!a.params.empty()) {
    try {
      p = report::device_params_from_json(Json::parse(io::read_text(a.params)));
    } catch (const nlohmann::json::exception& e) {
      throw IoError(a.params + ": invalid JSON: " + e.what());
    }
  }
  p.seed = a.seed;
  p.validate();
  ExtractionConfig cfg;
  cfg.n = a.n;
  cfg.bin_width = a.bin_width;

  const fs::path params_path = dir / "params.json";
  const fs::path stream_path = dir / "stream.bin";
  const fs::path stats_path = dir / "stats.json";
  const fs::path report_path = dir / "report.json";
  io::write_text(params_path, report::dump(report::to_json(p)));
  const SymbolStream stream = acquire_symbols(p, cfg, a.symbols);
  io::write_symbols(stream_path, stream);
  io::write_text(stats_path, report::dump(stats_report(stream, 100)));
  const auto rep = run_assessment(stream, std::nullopt, a.seed, a.permutations, a.threads, a.strict, false);
  io::write_text(report_path, report::dump(report::to_json(rep)));

  report::Manifest m;
  m.subcommand = "pipeline";
  m.parameters = {{"seed", a.seed},
                  {"symbols", a.symbols},
                  {"n", a.n},
                  {"bin_width", a.bin_width},
                  {"permutations", a.permutations},
                  {"strict", a.strict},
                  {"segment_duration", p.duration}};
  if (!a.params.empty()) m.inputs.push_back(a.params);
  m.outputs = {params_path, stream_path, io::sidecar_path(stream_path), stats_path, report_path};
  if (a.record_timing) m.wall_time_s = std::chrono::duration<double>(Clock::now() - start).count();
  report::write_manifest(dir / "manifest.json", m);
  out << "pipeline: " << stream.symbols.size() << " symbols, iid_verdict=" << (rep.iid_verdict ? "true" : "false")
      << " min_entropy=" << rep.min_entropy << " status=" << rep.status << "\n";
  if (rep.status != "complete") throw AssessmentFailure{"assessment status: " + rep.status};
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"entropy-forge: telegraph-noise entropy source simulation, extraction and assessment"};
  app.set_version_flag("--version", std::string(ENTROPY_FORGE_VERSION));
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* c_sim = app.add_subcommand("simulate", "Simulate a telegraph-noise voltage trace");
  c_sim->add_option("--params", sim.params, "Device parameters (JSON object)");
  c_sim->add_option("--out", sim.out, "Output trace (.vtrc)")->required();
  c_sim->add_option("--seed", sim.seed, "Override the seed");
  c_sim->add_option("--duration", sim.duration, "Override the duration, s");
  sim.manifest.add(c_sim);

  ExtractArgs ex;
  auto* c_ex = app.add_subcommand("extract", "Turn a trace into a symbol stream");
  c_ex->add_option("--in", ex.in, "Input trace (.vtrc)")->required();
  c_ex->add_option("--out", ex.out, "Output symbol stream")->required();
  c_ex->add_option("--n", ex.n, "Bits per symbol")->check(CLI::Range(1, 16));
  c_ex->add_option("--bin-width", ex.bin_width, "Time-bin width, s");
  c_ex->add_option("--cutoff", ex.cutoff, "High-pass cutoff, Hz");
  c_ex->add_option("--threshold", ex.threshold, "Edge threshold, V");
  c_ex->add_option("--dead-time", ex.dead_time, "Detector dead time, s");
  c_ex->add_option("--threshold-sigmas", ex.threshold_sigmas, "Threshold in noise standard deviations");
  ex.manifest.add(c_ex);

  auto* c_an = app.add_subcommand("analyze", "Statistical and chaos analysis of a symbol stream");
  c_an->require_subcommand(1);
  StatsArgs st;
  auto* c_st = c_an->add_subcommand("stats", "Shannon entropy, distributions, grayscale map");
  c_st->add_option("--in", st.in, "Symbol stream")->required();
  c_st->add_option("--report", st.report, "Output JSON report")->required();
  c_st->add_option("--pgm", st.pgm, "Grayscale map output (n = 8 only)");
  c_st->add_option("--pgm-side", st.pgm_side, "Map side length (default: floor(sqrt(count)))");
  c_st->add_option("--pairs-csv", st.pairs_csv, "Lag pairs output");
  c_st->add_option("--lag", st.lag, "Lag for --pairs-csv");
  c_st->add_option("--diff-csv", st.diff_csv, "Difference series output");
  c_st->add_option("--block-len", st.block_len, "Bit block length for the ones-count test");
  st.manifest.add(c_st);

  ChaosArgs ch;
  auto* c_ch = c_an->add_subcommand("chaos", "K2 entropy and correlation dimension");
  c_ch->add_option("--in", ch.in, "Symbol stream")->required();
  c_ch->add_option("--report", ch.report, "Output JSON report")->required();
  c_ch->add_flag("--k2", ch.k2, "Estimate K2 over an epsilon grid");
  c_ch->add_flag("--corrdim", ch.corrdim, "Estimate the correlation dimension per embedding dimension");
  c_ch->add_option("--dmin", ch.dmin, "Smallest embedding dimension");
  c_ch->add_option("--dmax", ch.dmax, "Largest embedding dimension");
  c_ch->add_option("--k2-dmin", ch.k2_dmin, "First dimension of the K2 average");
  c_ch->add_option("--k2-dmax", ch.k2_dmax, "Last dimension of the K2 average");
  c_ch->add_option("--lag", ch.lag, "Embedding delay");
  c_ch->add_option("--points", ch.points, "Symbols used");
  c_ch->add_option("--r-min", ch.r_min, "Smallest radius (normalized units)");
  c_ch->add_option("--r-max", ch.r_max, "Largest radius");
  c_ch->add_option("--radii", ch.radii, "Radius grid size");
  c_ch->add_option("--eps-max", ch.eps_max, "Largest K2 threshold");
  c_ch->add_option("--eps-min", ch.eps_min, "Smallest K2 threshold");
  c_ch->add_option("--eps-count", ch.eps_count, "K2 threshold grid size");
  c_ch->add_option("--theiler", ch.theiler, "Theiler window");
  c_ch->add_option("--k2-csv", ch.k2_csv, "(epsilon, K2) CSV output");
  c_ch->add_option("--corrdim-csv", ch.corrdim_csv, "(d, nu) CSV output");
  c_ch->add_option("--recurrence-csv", ch.recurrence_csv, "Recurrence pairs CSV output (dimension --dmin)");
  c_ch->add_option("--recurrence-radius", ch.recurrence_radius, "Recurrence radius");
  ch.manifest.add(c_ch);

  auto* c_sp = app.add_subcommand("sp90b", "SP 800-90B assessment and health tests");
  c_sp->require_subcommand(1);
  AssessArgs as;
  auto* c_as = c_sp->add_subcommand("assess", "IID tests, MCV min-entropy and restart tests");
  c_as->add_option("--in", as.in, "Sequential symbol stream")->required();
  c_as->add_option("--restart", as.restart, "Restart matrix");
  c_as->add_option("--out", as.out, "Output JSON report")->required();
  c_as->add_option("--seed", as.seed, "Permutation seed");
  c_as->add_option("--permutations", as.permutations, "Permutations per statistic");
  c_as->add_option("--threads", as.threads, "Worker threads (default: ENTROPY_FORGE_THREADS or all cores)");
  c_as->add_flag("--strict", as.strict, "Reject undersized datasets instead of flagging them");
  c_as->add_flag("--no-restart-iid", as.no_restart_iid, "Skip IID tests on the restart rows and columns");
  as.manifest.add(c_as);

  HealthArgs he;
  auto* c_he = c_sp->add_subcommand("health", "Repetition-count and adaptive-proportion tests");
  c_he->add_option("--in", he.in, "Symbol stream")->required();
  c_he->add_option("--hmin", he.h_min, "Claimed min-entropy, bits/symbol")->required();
  c_he->add_option("--alpha", he.alpha, "False-positive rate");
  c_he->add_option("--window", he.window, "Adaptive-proportion window (default 512, 1024 for n = 1)");
  c_he->add_option("--out", he.out, "Output JSON report");
  he.manifest.add(c_he);

  auto* c_ap = app.add_subcommand("apps", "Applications driven by a recorded stream");
  c_ap->require_subcommand(1);
  WalkArgs wa;
  auto* c_wa = c_ap->add_subcommand("walk", "Random walks on the cubic lattice");
  c_wa->add_option("--stream", wa.stream, "Symbol stream")->required();
  c_wa->add_option("--out", wa.out, "Path CSV output")->required();
  c_wa->add_option("--report", wa.report, "JSON summary");
  c_wa->add_option("--steps", wa.steps, "Steps per walk");
  c_wa->add_option("--walks", wa.walks, "Number of walks");
  wa.manifest.add(c_wa);

  PagerankArgs pr;
  auto* c_pr = c_ap->add_subcommand("pagerank", "PageRank by random walk against power iteration");
  c_pr->add_option("--stream", pr.stream, "Symbol stream")->required();
  c_pr->add_option("--report", pr.report, "JSON report")->required();
  c_pr->add_option("--web", pr.web, "Web edge-list CSV (default: generate one)");
  c_pr->add_option("--web-out", pr.web_out, "Write the web used");
  c_pr->add_option("--nodes", pr.nodes, "Generated web size");
  c_pr->add_option("--edge-prob", pr.edge_prob, "Generated web edge probability");
  c_pr->add_option("--web-seed", pr.web_seed, "Generated web seed");
  c_pr->add_option("--steps", pr.steps, "Walk length");
  c_pr->add_option("--damping", pr.damping, "Damping factor");
  c_pr->add_option("--rbo-p", pr.rbo_p, "RBO persistence");
  pr.manifest.add(c_pr);

  MincutArgs mc;
  auto* c_mc = c_ap->add_subcommand("mincut", "Karger contraction min-cut");
  c_mc->add_option("--stream", mc.stream, "Symbol stream")->required();
  c_mc->add_option("--report", mc.report, "JSON report")->required();
  c_mc->add_option("--graph", mc.graph, "Graph edge-list CSV (default: generate one)");
  c_mc->add_option("--graph-out", mc.graph_out, "Write the graph used");
  c_mc->add_option("--trace", mc.trace, "Per-iteration CSV output");
  c_mc->add_option("--nodes", mc.nodes, "Generated graph size");
  c_mc->add_option("--edge-prob", mc.edge_prob, "Generated graph edge probability");
  c_mc->add_option("--graph-seed", mc.graph_seed, "Generated graph seed");
  c_mc->add_option("--iterations", mc.iterations, "Contraction runs (default: ceil(C(N,2) ln N))");
  mc.manifest.add(c_mc);

  PipelineArgs pl;
  auto* c_pl = app.add_subcommand("pipeline", "simulate -> extract -> analyze stats -> sp90b assess");
  c_pl->add_option("--workdir", pl.workdir, "Working directory");
  c_pl->add_option("--params", pl.params, "Device parameters (JSON object)");
  c_pl->add_option("--seed", pl.seed, "Seed for simulation and permutations");
  c_pl->add_option("--symbols", pl.symbols, "Symbols to acquire");
  c_pl->add_option("--n", pl.n, "Bits per symbol")->check(CLI::Range(1, 16));
  c_pl->add_option("--bin-width", pl.bin_width, "Time-bin width, s");
  c_pl->add_option("--permutations", pl.permutations, "Permutations per statistic");
  c_pl->add_option("--threads", pl.threads, "Worker threads");
  c_pl->add_flag("--strict", pl.strict, "Reject undersized datasets instead of flagging them");
  c_pl->add_flag("--record-timing", pl.record_timing, "Store wall time in the manifest");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    std::ostringstream o;
    std::ostringstream e_out;
    const int code = app.exit(e, o, e_out);
    out << o.str();
    err << e_out.str();
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (c_sim->parsed()) return do_simulate(sim, out);
    if (c_ex->parsed()) return do_extract(ex, out);
    if (c_st->parsed()) return do_stats(st, out);
    if (c_ch->parsed()) return do_chaos(ch, out);
    if (c_as->parsed()) return do_assess(as, out);
    if (c_he->parsed()) return do_health(he, out);
    if (c_wa->parsed()) return do_walk(wa, out);
    if (c_pr->parsed()) return do_pagerank(pr, out);
    if (c_mc->parsed()) return do_mincut(mc, out);
    if (c_pl->parsed()) return do_pipeline(pl, out);
  } catch (const AssessmentFailure& f) {
    err << "entropy-forge: " << f.message << "\n";
    return kExitAssessment;
  } catch (const EstimationError& e) {
    err << "entropy-forge: " << e.what() << "\n";
    if (!e.diagnostics().empty()) err << e.diagnostics() << "\n";
    return kExitError;
  } catch (const Error& e) {
    err << "entropy-forge: " << e.what() << "\n";
    return kExitError;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "entropy-forge: " << e.what() << "\n";
    return kExitError;
  }
  err << "entropy-forge: no subcommand\n";
  return kExitUsage;
}

}  // namespace ef::cli
