// Acceptance suite: one PASS/FAIL line per criterion.
//   acceptance            run AC1..AC9
//   acceptance AC3 AC7    run the named criteria only

#include <boost/multiprecision/cpp_bin_float.hpp>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <thread>

#include "cli.hpp"
#include "entropy_forge/apps.hpp"
#include "entropy_forge/chaos.hpp"
#include "entropy_forge/device_sim.hpp"
#include "entropy_forge/extraction.hpp"
#include "entropy_forge/io.hpp"
#include "entropy_forge/sp90b.hpp"
#include "entropy_forge/stats.hpp"

using namespace ef;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v, int precision = 4) {
  std::ostringstream o;
  o << std::setprecision(precision) << v;
  return o.str();
}

std::vector<std::uint32_t> prng_symbols(std::size_t count, int n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::vector<std::uint32_t> s(count);
  for (auto& v : s) v = static_cast<std::uint32_t>(gen() >> (64 - n));
  return s;
}

apps::RandomSource prng_source(std::size_t bytes, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::vector<std::uint8_t> b(bytes);
  for (auto& x : b) x = static_cast<std::uint8_t>(gen() >> 56);
  return apps::RandomSource::from_bytes(std::move(b));
}

unsigned all_threads() { return std::max(1u, std::thread::hardware_concurrency()); }

// --- AC1 ------------------------------------------------------------------------

double mcv_oracle(std::uint64_t max_count, std::uint64_t samples) {
  using Big = boost::multiprecision::cpp_bin_float_50;
  const Big p = Big(max_count) / Big(samples);
  Big pu = p + Big("2.576") * sqrt(p * (1 - p) / Big(samples - 1));
  if (pu > 1) pu = 1;
  return static_cast<double>(-log(pu) / log(Big(2)));
}

Outcome ac1() {
  std::mt19937_64 gen(101);
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    // Random histogram over 2^n symbols, expanded to a sample sequence.
    const int n = 1 + static_cast<int>(gen() % 8);
    const std::size_t k = std::size_t{1} << n;
    std::vector<std::uint32_t> samples;
    std::uint64_t max_count = 0;
    for (std::uint32_t sym = 0; sym < k; ++sym) {
      const std::uint64_t c = gen() % 2000;
      max_count = std::max(max_count, c);
      samples.insert(samples.end(), c, sym);
    }
    if (max_count == 0) {
      samples.push_back(0);
      max_count = 1;
    }
    if (samples.size() < 2) samples.push_back(1 % static_cast<std::uint32_t>(k));
    std::shuffle(samples.begin(), samples.end(), gen);
    const sp90b::McvEstimate e = sp90b::mcv_estimate(sp90b::Dataset(samples, n));
    std::vector<std::uint64_t> counts(k, 0);
    for (auto s : samples) ++counts[s];
    const std::uint64_t m = *std::max_element(counts.begin(), counts.end());
    worst = std::max(worst, std::abs(e.h_min - mcv_oracle(m, samples.size())));
  }
  return {worst <= 1e-12, "100 histograms, max |h - oracle| = " + fmt(worst)};
}

// --- AC2 ------------------------------------------------------------------------

Outcome ac2() {
  DeviceParams p;  // M = 1, balanced capture/release rates
  ExtractionConfig cfg;
  cfg.n = 8;
  int good = 0;
  double lowest = 8.0;
  std::ostringstream per_seed;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    p.seed = seed;
    const SymbolStream stream = acquire_symbols(p, cfg, 100000);
    sp90b::AssessmentOptions opts;
    opts.permutation.permutations = 1000;
    opts.permutation.seed = seed;
    opts.permutation.threads = all_threads();
    const auto rep = sp90b::assess(sp90b::Dataset(stream), std::nullopt, opts);
    const bool ok = rep.iid_verdict && rep.min_entropy >= 7.5;
    good += ok ? 1 : 0;
    lowest = std::min(lowest, rep.min_entropy);
    if (!ok) per_seed << " seed" << seed << "(iid=" << rep.iid_verdict << ",h=" << fmt(rep.min_entropy) << ")";
  }
  return {good >= 18, std::to_string(good) + "/20 seeds iid with min_entropy >= 7.5, lowest " + fmt(lowest) +
                          per_seed.str()};
}

// --- AC3 ------------------------------------------------------------------------

bool is_lag_statistic(const std::string& name) {
  return name.rfind("periodicity", 0) == 0 || name.rfind("covariance", 0) == 0;
}

Outcome ac3() {
  sp90b::PermutationOptions opts;
  opts.permutations = 1000;
  opts.threads = all_threads();
  int detected = 0;
  int clean = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    opts.seed = seed;
    auto injected = prng_symbols(100000, 8, 5000 + seed);
    for (std::size_t i = 0; i < injected.size(); i += 16) injected[i] = 0x5A;
    const auto suite = sp90b::permutation_test_suite(sp90b::Dataset(injected, 8), opts);
    bool hit = false;
    for (const auto& o : suite) hit = hit || (!o.pass && is_lag_statistic(o.statistic_name));
    detected += hit ? 1 : 0;

    const auto iid = sp90b::iid_tests(sp90b::Dataset(prng_symbols(100000, 8, 7000 + seed), 8), opts);
    bool all = iid.permutation.size() + iid.chi_square.size() == 22;
    for (const auto& o : iid.permutation) all = all && o.pass;
    for (const auto& o : iid.chi_square) all = all && o.pass;
    clean += all ? 1 : 0;
  }
  return {detected >= 19 && clean >= 18, "period-16 injection caught " + std::to_string(detected) +
                                             "/20, unbiased stream passes all 22 in " + std::to_string(clean) +
                                             "/20"};
}

// --- AC4 ------------------------------------------------------------------------

Outcome ac4() {
  SymbolStream s;
  s.n = 8;
  s.symbols = prng_symbols(1000000, 8, 404);
  const double hs = shannon_entropy(histogram(s)).shannon_bits_per_symbol;
  const auto ones = bit_block_ones(to_bits(s), 100);
  const ChiSquareResult chi = ones.chi_square();
  const bool ok = hs >= 7.99 && chi.p_value >= 0.001;
  return {ok, "H_S = " + fmt(hs, 6) + " bits/symbol, block chi-square p = " + fmt(chi.p_value)};
}

// --- AC5 ------------------------------------------------------------------------

Outcome ac5() {
  bool ok = true;
  std::ostringstream d;

  // Simulator-fed IID stream, 5000 symbols.
  DeviceParams p;
  ExtractionConfig cfg;
  const SymbolStream stream = acquire_symbols(p, cfg, 5000);
  Series<double> iid(5000);
  for (Eigen::Index i = 0; i < iid.size(); ++i) iid(i) = stream.symbols[static_cast<std::size_t>(i)];
  const auto radii = quantized_grid(0.03, 0.5, 24, 256);
  const std::vector<int> dims{1, 2, 3, 4, 5, 6};
  const auto curve = correlation_dimension_curve(iid, std::span<const int>(dims), 1, std::span<const double>(radii));
  d << "IID nu(d):";
  for (std::size_t i = 0; i < dims.size(); ++i) {
    const double dd = dims[i];
    ok = ok && std::abs(curve.nus[i] - dd) <= std::max(0.15 * dd, 0.3);
    d << " " << fmt(curve.nus[i], 3);
  }
  auto eps = quantized_grid(0.05, 0.5, 10, 256);
  std::reverse(eps.begin(), eps.end());
  const auto k2 = k2_estimate(iid, 2, 5, std::span<const double>(eps));
  auto ratio = [](const K2Curve& c) {
    double lo = 1e300, hi = 0.0;
    for (const auto& [e, v] : c.usable_points()) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    return hi / lo;
  };
  const double iid_ratio = ratio(k2);
  ok = ok && k2.usable_points().size() == eps.size() && iid_ratio > 2.0;
  d << "; IID K2 ratio " << fmt(iid_ratio, 3);

  // Lorenz reference: every fifth step of a dt = 0.01 integration, lag 3.
  const auto full = lorenz_series<double>(25000, 0.01, Eigen::Vector3d(1, 1, 1), 5000);
  Series<double> lz(5000);
  for (Eigen::Index i = 0; i < lz.size(); ++i) lz(i) = full(5 * i);
  const auto grid = log_grid_descending(0.3, 0.005, 24);
  const std::vector<double> lz_radii(grid.rbegin(), grid.rend());
  ScalingFitOptions options;
  options.theiler = 10;
  const std::vector<int> lz_dims{4, 5, 6, 7, 8};
  const auto lz_curve =
      correlation_dimension_curve(lz, std::span<const int>(lz_dims), 3, std::span<const double>(lz_radii), options);
  d << "; Lorenz nu(d):";
  for (double nu : lz_curve.nus) {
    ok = ok && nu >= 1.7 && nu <= 2.4;
    d << " " << fmt(nu, 3);
  }
  ok = ok && lz_curve.nus.back() - lz_curve.nus.front() < 0.5;
  const auto lz_eps = log_grid_descending(0.2, 0.02, 10);
  const auto lz_k2 = k2_estimate(lz, 2, 5, std::span<const double>(lz_eps), 3, 10);
  const double lz_ratio = ratio(lz_k2);
  ok = ok && lz_k2.usable_points().size() >= 8 && lz_ratio < 3.0;
  d << "; Lorenz K2 ratio " << fmt(lz_ratio, 3);
  return {ok, d.str()};
}

// --- AC6 ------------------------------------------------------------------------

Outcome ac6() {
  std::mt19937_64 gen(606);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int mismatches = 0;
  Eigen::Index largest = 0;
  for (int set = 0; set < 50; ++set) {
    const int d = 1 + static_cast<int>(gen() % 5);
    const int lag = 1 + static_cast<int>(gen() % 3);
    const Eigen::Index points = set == 0 ? 2000 : 2 + static_cast<Eigen::Index>(gen() % 1999);
    Series<double> s(points + static_cast<Eigen::Index>(d - 1) * lag);
    for (Eigen::Index i = 0; i < s.size(); ++i) s(i) = u(gen);
    const auto e = embed(s, d, lag);
    largest = std::max(largest, e.size());
    const double r = 0.02 + 0.5 * u(gen);
    std::uint64_t within = 0, pairs = 0;
    for (Eigen::Index i = 0; i < e.size(); ++i) {
      for (Eigen::Index j = i + 1; j < e.size(); ++j) {
        ++pairs;
        double dist = 0.0;
        for (int c = 0; c < d; ++c) dist = std::max(dist, std::abs(e.points(i, c) - e.points(j, c)));
        within += dist <= r ? 1 : 0;
      }
    }
    const double brute = static_cast<double>(within) / static_cast<double>(pairs);
    mismatches += correlation_integral(e, r) == brute ? 0 : 1;
  }
  return {mismatches == 0, "50 point sets up to P = " + std::to_string(largest) + ", " +
                               std::to_string(mismatches) + " mismatches"};
}

// --- AC7 ------------------------------------------------------------------------

Outcome ac7() {
  bool ok = true;
  std::ostringstream d;
  for (double h : {1.0, 4.0, 7.86}) {
    const std::uint64_t c = sp90b::repetition_count_cutoff(h);
    std::vector<std::uint32_t> below{9};
    below.insert(below.end(), c - 1, 5);
    below.push_back(9);
    std::vector<std::uint32_t> at{9};
    at.insert(at.end(), c, 5);
    at.push_back(9);
    const auto alarms = sp90b::repetition_count_health(at, h);
    const bool exact = sp90b::repetition_count_health(below, h).empty() && alarms.size() == 1 && alarms[0] == c;
    ok = ok && exact;
    d << "RCT h=" << h << " C=" << c << (exact ? " ok; " : " WRONG; ");
  }
  const std::vector<std::uint32_t> stuck(sp90b::kAptWindow, 77);
  const auto apt_stuck = sp90b::adaptive_proportion_health(stuck, 7.86);
  const bool stuck_ok = !apt_stuck.empty() && apt_stuck[0] < sp90b::kAptWindow;
  ok = ok && stuck_ok;
  d << "APT stuck alarm at " << (apt_stuck.empty() ? std::string("none") : std::to_string(apt_stuck[0])) << "; ";

  std::mt19937_64 gen(707);
  sp90b::AdaptiveProportionTest apt(8.0);
  std::size_t alarms = 0;
  const std::size_t total = 10000000;
  for (std::size_t i = 0; i < total; ++i) alarms += apt.feed(static_cast<std::uint32_t>(gen() >> 56)) ? 1 : 0;
  const double windows = static_cast<double>(total / sp90b::kAptWindow);
  const double rate = static_cast<double>(alarms) / windows;
  ok = ok && rate <= 3.0 * sp90b::kHealthAlpha;
  d << "APT false alarms " << alarms << " in " << windows << " windows (rate " << fmt(rate) << ", nominal "
    << fmt(sp90b::kHealthAlpha) << ")";
  return {ok, d.str()};
}

// --- AC8 ------------------------------------------------------------------------

Outcome ac8() {
  bool ok = true;
  std::ostringstream d;

  // Karger: error rate at a quarter, half and all of the default budget.
  apps::RandomSource src = prng_source(32000000, 808);
  std::array<int, 3> wrong{0, 0, 0};
  bool monotone = true;
  for (std::uint64_t g = 0; g < 1000; ++g) {
    const apps::Graph graph = apps::generate_graph(static_cast<std::uint32_t>(2 + g % 9), 0.2 + 0.6 * ((g * 37) % 100) / 100.0, 9000 + g);
    const std::uint64_t truth = apps::brute_force_min_cut(graph);
    const std::uint64_t budget = apps::karger_default_iterations(graph.nodes);
    const auto r = apps::karger_min_cut(graph, src, budget);
    for (std::size_t i = 1; i < r.running_min.size(); ++i) monotone = monotone && r.running_min[i] <= r.running_min[i - 1];
    const std::size_t len = r.running_min.size();
    const std::array<std::size_t, 3> at{std::max<std::size_t>(1, len / 4), std::max<std::size_t>(1, len / 2), len};
    for (int k = 0; k < 3; ++k) wrong[k] += r.running_min[at[k] - 1] != truth ? 1 : 0;
  }
  const double final_error = wrong[2] / 1000.0;
  ok = ok && monotone && final_error < 0.01 && wrong[2] <= wrong[1] && wrong[1] <= wrong[0];
  d << "Karger errors at 1/4, 1/2, full budget: " << wrong[0] << ", " << wrong[1] << ", " << wrong[2]
    << " of 1000, running min " << (monotone ? "monotone" : "NOT monotone");

  // PageRank on 100 random 50-node webs.
  double worst_l1 = 0.0;
  double rbo_sum = 0.0;
  for (std::uint64_t w = 0; w < 100; ++w) {
    const apps::Web web = apps::generate_web(50, 0.1, 100 + w);
    apps::RandomSource wsrc = prng_source(4000000, 200 + w);
    const Eigen::VectorXd walk = apps::pagerank_walk(web, wsrc, 1000000);
    const Eigen::VectorXd power = apps::pagerank_power(web);
    worst_l1 = std::max(worst_l1, (walk - power).cwiseAbs().sum());
    rbo_sum += apps::rbo(apps::ranking(walk), apps::ranking(power));
  }
  const double mean_rbo = rbo_sum / 100.0;
  ok = ok && worst_l1 < 0.05 && mean_rbo >= 0.9;
  d << "; PageRank max L1 " << fmt(worst_l1) << ", mean RBO " << fmt(mean_rbo);

  // 3-D walks: mean squared displacement after n steps.
  apps::RandomSource wsrc = prng_source(1500000, 909);
  double msd = 0.0;
  for (int w = 0; w < 1000; ++w) {
    const apps::LatticePoint end = apps::random_walk_3d(wsrc, 1000).back();
    msd += static_cast<double>(end[0] * end[0] + end[1] * end[1] + end[2] * end[2]);
  }
  msd /= 1000.0;
  ok = ok && std::abs(msd - 1000.0) <= 100.0;
  d << "; walk E|X_1000|^2 = " << fmt(msd);
  return {ok, d.str()};
}

// --- AC9 ------------------------------------------------------------------------

int cli_run(std::vector<std::string> args) {
  std::ostringstream out, err;
  return cli::run(args, out, err);
}

// Runs every stage in `dir` with the given thread count; returns the exit codes.
std::vector<int> run_stages(const fs::path& dir, const std::string& threads) {
  fs::create_directories(dir);
  auto at = [&](const char* name) { return (dir / name).string(); };
  std::vector<int> codes;
  codes.push_back(cli_run({"simulate", "--out", at("t.vtrc"), "--duration", "0.2", "--seed", "9"}));
  codes.push_back(cli_run({"extract", "--in", at("t.vtrc"), "--out", at("s.bin")}));
  codes.push_back(cli_run({"analyze", "stats", "--in", at("s.bin"), "--report", at("stats.json"), "--pgm", at("m.pgm")}));
  codes.push_back(cli_run({"analyze", "chaos", "--in", at("s.bin"), "--report", at("chaos.json"), "--k2", "--corrdim",
                           "--points", "2000", "--dmax", "4"}));
  codes.push_back(cli_run({"sp90b", "assess", "--in", at("s.bin"), "--out", at("assess.json"), "--permutations", "200",
                           "--threads", threads}));
  codes.push_back(cli_run({"sp90b", "health", "--in", at("s.bin"), "--hmin", "7", "--out", at("health.json")}));
  codes.push_back(cli_run({"apps", "walk", "--stream", at("s.bin"), "--out", at("walk.csv"), "--steps", "100",
                           "--walks", "20"}));
  codes.push_back(cli_run({"apps", "pagerank", "--stream", at("s.bin"), "--report", at("pr.json"), "--nodes", "10",
                           "--steps", "2000"}));
  codes.push_back(cli_run({"apps", "mincut", "--stream", at("s.bin"), "--report", at("mc.json"), "--nodes", "6"}));
  codes.push_back(cli_run({"pipeline", "--workdir", at("pipe"), "--symbols", "20000", "--permutations", "200",
                           "--threads", threads}));
  return codes;
}

std::map<std::string, std::vector<std::uint8_t>> snapshot(const fs::path& dir) {
  std::map<std::string, std::vector<std::uint8_t>> files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) files[fs::relative(e.path(), dir).string()] = io::read_bytes(e.path());
  }
  return files;
}

Outcome ac9() {
  const fs::path root = fs::temp_directory_path() / ("ef_acceptance_" + std::to_string(std::random_device{}()));
  const auto codes_a = run_stages(root / "a", "1");
  const auto codes_b = run_stages(root / "b", "3");
  const auto a = snapshot(root / "a");
  const auto b = snapshot(root / "b");
  fs::remove_all(root);
  std::vector<std::string> differing;
  for (const auto& [name, bytes] : a) {
    const auto it = b.find(name);
    if (it == b.end() || it->second != bytes) differing.push_back(name);
  }
  bool codes_ok = codes_a == codes_b;
  std::ostringstream c;
  for (int code : codes_a) {
    c << code;
    codes_ok = codes_ok && code != cli::kExitError && code != cli::kExitUsage;
  }
  std::string detail = std::to_string(a.size()) + " files from 10 stages, exit codes " + c.str() + ", " +
                       std::to_string(differing.size()) + " differ";
  for (const auto& f : differing) detail += " " + f;
  return {codes_ok && differing.empty() && a.size() == b.size(), detail};
}

struct Criterion {
  const char* id;
  double budget_s;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all{
      {"AC1", 1, ac1},    {"AC2", 600, ac2}, {"AC3", 600, ac3}, {"AC4", 30, ac4},  {"AC5", 300, ac5},
      {"AC6", 60, ac6},   {"AC7", 120, ac7}, {"AC8", 600, ac8}, {"AC9", 300, ac9},
  };
  std::vector<std::string> wanted(argv + 1, argv + argc);
  bool all_pass = true;
  for (const auto& c : all) {
    if (!wanted.empty() && std::find(wanted.begin(), wanted.end(), c.id) == wanted.end()) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs <= c.budget_s;
    const bool pass = o.pass && in_time;
    all_pass = all_pass && pass;
    std::cout << (pass ? "PASS " : "FAIL ") << c.id << " " << o.detail << " [" << fmt(secs, 3) << " s"
              << (in_time ? "" : ", over the " + fmt(c.budget_s, 4) + " s budget") << "]" << std::endl;
  }
  return all_pass ? 0 : 1;
}
