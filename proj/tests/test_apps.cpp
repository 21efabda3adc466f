#include <Eigen/Dense>
#include <random>

#include "doctest.h"
#include "entropy_forge/apps.hpp"
#include "entropy_forge/error.hpp"
#include "entropy_forge/special.hpp"

using namespace ef;
using namespace ef::apps;

namespace {

RandomSource prng_source(std::size_t bytes, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::vector<std::uint8_t> b(bytes);
  for (auto& x : b) x = static_cast<std::uint8_t>(gen() >> 56);
  return RandomSource::from_bytes(std::move(b));
}

RandomSource bit_source(const std::vector<int>& bits) {
  SymbolStream s;
  s.n = 1;
  for (int b : bits) s.symbols.push_back(static_cast<std::uint32_t>(b));
  return RandomSource::from_stream(s);
}

Graph cycle(std::uint32_t n) {
  Graph g;
  g.nodes = n;
  for (std::uint32_t i = 0; i < n; ++i) g.edges.emplace_back(i, (i + 1) % n);
  return g;
}

Web complete_web(std::uint32_t n) {
  Web w;
  w.nodes = n;
  for (std::uint32_t i = 0; i < n; ++i) {
    for (std::uint32_t j = 0; j < n; ++j) {
      if (i != j) w.edges.emplace_back(i, j);
    }
  }
  return w;
}

// Dense solve of (I - d M) r = (1 - d) / N as an independent oracle.
Eigen::VectorXd pagerank_oracle(const Web& web, double d) {
  const Eigen::Index n = web.nodes;
  std::vector<double> deg(web.nodes, 0.0);
  for (const auto& [from, to] : web.edges) deg[from] += 1.0;
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (const auto& [from, to] : web.edges) m(to, from) += 1.0 / deg[from];
  const Eigen::MatrixXd a = Eigen::MatrixXd::Identity(n, n) - d * m;
  const Eigen::VectorXd b = Eigen::VectorXd::Constant(n, (1.0 - d) / static_cast<double>(n));
  return a.fullPivLu().solve(b);
}

}  // namespace

TEST_CASE("random source reads bits MSB first and never recycles them") {
  RandomSource src = RandomSource::from_bytes({0xA5, 0x0F});
  CHECK(src.size() == 16);
  CHECK(src.bits(4) == 0xA);
  CHECK(src.bits(8) == 0x50);
  CHECK(src.consumed() == 12);
  CHECK(src.remaining() == 4);
  CHECK(src.bits(4) == 0xF);
  try {
    src.bit();
    FAIL("expected ExhaustedError");
  } catch (const ExhaustedError& e) {
    CHECK(std::string(e.what()).find("16") != std::string::npos);
  }
  SymbolStream s;
  s.n = 3;
  s.symbols = {5, 2};
  RandomSource packed = RandomSource::from_stream(s);
  CHECK(packed.size() == 6);
  CHECK(packed.bits(6) == 0b101010);
}

TEST_CASE("draw_uniform examples") {
  RandomSource empty = RandomSource::from_bytes({});
  CHECK(draw_uniform(empty, 1) == 0);
  CHECK(empty.consumed() == 0);
  CHECK_THROWS_AS(draw_uniform(empty, 2), ExhaustedError);
  CHECK_THROWS_AS(draw_uniform(empty, 0), ParameterError);

  std::vector<std::uint8_t> all(256);
  for (int i = 0; i < 256; ++i) all[i] = static_cast<std::uint8_t>(i);
  RandomSource src = RandomSource::from_bytes(all);
  for (std::uint32_t i = 0; i < 256; ++i) CHECK(draw_uniform(src, 256) == i);
  CHECK(src.remaining() == 0);
}

TEST_CASE("draw_uniform: one rejection round accepts every outcome equally") {
  for (std::uint32_t m = 2; m <= 64; ++m) {
    const int width = std::bit_width(m - 1);
    std::vector<int> accepted(m, 0);
    for (std::uint32_t word = 0; word < (1u << width); ++word) {
      std::vector<int> bits;
      for (int b = width - 1; b >= 0; --b) bits.push_back((word >> b) & 1);
      RandomSource src = bit_source(bits);
      try {
        ++accepted[draw_uniform(src, m)];
      } catch (const ExhaustedError&) {
        // rejected word, needs another round
      }
    }
    for (int count : accepted) CHECK(count == 1);
  }
}

TEST_CASE("draw_uniform(6) is uniform") {
  RandomSource src = prng_source(200000, 3);
  std::vector<double> counts(6, 0.0);
  for (int i = 0; i < 100000; ++i) counts[draw_uniform(src, 6)] += 1;
  const std::vector<double> p(6, 1.0 / 6.0);
  CHECK(chi_square_gof(counts, p).p_value > 0.001);
}

TEST_CASE("draw_bernoulli") {
  RandomSource none = RandomSource::from_bytes({});
  CHECK(draw_bernoulli(none, 1.0));
  CHECK_FALSE(draw_bernoulli(none, 0.0));
  CHECK_THROWS_AS(draw_bernoulli(none, 1.5), ParameterError);
  // p = 0.5 = 0.1b: first bit 0 -> below p.
  RandomSource zero = bit_source({0});
  CHECK(draw_bernoulli(zero, 0.5));
  RandomSource one = bit_source({1});
  CHECK_FALSE(draw_bernoulli(one, 0.5));

  RandomSource src = prng_source(100000, 4);
  for (double p : {0.85, 0.3, 0.01}) {
    const int trials = 100000;
    int hits = 0;
    const auto before = src.consumed();
    for (int i = 0; i < trials; ++i) hits += draw_bernoulli(src, p) ? 1 : 0;
    const double sd = std::sqrt(p * (1 - p) / trials);
    CHECK(std::abs(static_cast<double>(hits) / trials - p) < 4 * sd);
    CHECK(static_cast<double>(src.consumed() - before) / trials < 2.1);
    if (src.remaining() < 400000) src = prng_source(100000, 5 + static_cast<std::uint64_t>(p * 100));
  }
}

TEST_CASE("3-D walk: origin start and lattice adjacency") {
  RandomSource empty = RandomSource::from_bytes({});
  CHECK(random_walk_3d(empty, 0) == std::vector<LatticePoint>{{0, 0, 0}});
  RandomSource src = prng_source(10000, 6);
  const auto path = random_walk_3d(src, 1000);
  REQUIRE(path.size() == 1001);
  for (std::size_t i = 1; i < path.size(); ++i) {
    std::int64_t total = 0;
    int moved = 0;
    for (int a = 0; a < 3; ++a) {
      const auto d = std::abs(path[i][a] - path[i - 1][a]);
      total += d;
      moved += d != 0;
    }
    CHECK(total == 1);
    CHECK(moved == 1);
  }
}

TEST_CASE("3-D walk mean squared displacement equals the step count") {
  RandomSource src = prng_source(1000 * 1000 * 5 / 8 * 2, 7);
  double msd = 0.0;
  for (int w = 0; w < 1000; ++w) {
    const LatticePoint end = random_walk_3d(src, 1000).back();
    msd += static_cast<double>(end[0] * end[0] + end[1] * end[1] + end[2] * end[2]);
  }
  CHECK(msd / 1000.0 == doctest::Approx(1000.0).epsilon(0.10));
}

TEST_CASE("web and graph validation") {
  Web w{3, {{0, 1}, {1, 2}, {2, 0}}};
  CHECK_NOTHROW(validate(w));
  w.edges.push_back({0, 0});
  CHECK_THROWS_AS(validate(w), ValidationError);
  w.edges.back() = {0, 1};
  CHECK_THROWS_AS(validate(w), ValidationError);
  w.edges.back() = {0, 3};
  CHECK_THROWS_AS(validate(w), ValidationError);
  CHECK_THROWS_AS(validate(Web{3, {{0, 1}, {1, 0}}}), ValidationError);

  CHECK(connected(cycle(5)));
  CHECK_FALSE(connected(Graph{4, {{0, 1}, {2, 3}}}));
  CHECK_THROWS_AS(validate(Graph{4, {{0, 1}, {2, 3}}}), ValidationError);
  CHECK_THROWS_AS(validate(Graph{2, {{0, 0}}}), ValidationError);
  CHECK_THROWS_AS(validate(Graph{1, {}}), ValidationError);
}

TEST_CASE("PageRank by power iteration") {
  const Eigen::VectorXd uniform = pagerank_power(complete_web(7));
  for (Eigen::Index i = 0; i < 7; ++i) CHECK(uniform(i) == doctest::Approx(1.0 / 7.0).epsilon(1e-9));
  const Eigen::VectorXd two = pagerank_power(Web{2, {{0, 1}, {1, 0}}});
  CHECK(two(0) == doctest::Approx(0.5));
  CHECK(two(1) == doctest::Approx(0.5));

  const Web chain{3, {{0, 1}, {1, 2}, {2, 0}, {0, 2}}};
  const Eigen::VectorXd got = pagerank_power(chain);
  const Eigen::VectorXd want = pagerank_oracle(chain, kDamping);
  CHECK((got - want).cwiseAbs().maxCoeff() < 1e-9);
  CHECK(got.sum() == doctest::Approx(1.0));

  const Web random = generate_web(30, 0.1, 8);
  CHECK((pagerank_power(random, 0.7) - pagerank_oracle(random, 0.7)).cwiseAbs().maxCoeff() < 1e-9);
  CHECK_THROWS_AS(pagerank_power(random, 0.85, 1e-10, 1), EstimationError);
}

TEST_CASE("PageRank by random walk") {
  RandomSource src = prng_source(4000000, 9);
  const std::uint64_t steps = 200000;
  const Eigen::VectorXd complete = pagerank_walk(complete_web(10), src, steps);
  const Eigen::VectorXd teleport = pagerank_walk(Web{10, {{0, 1}, {1, 0}, {2, 0}, {3, 0}, {4, 0}, {5, 0}, {6, 0}, {7, 0}, {8, 0}, {9, 0}}}, src, steps, 0.0);
  // Successive positions of the complete-graph walk are not independent, so
  // the bound uses the independent-draw sigma of the teleport-only walk as a
  // scale and the complete-graph check a looser 5 sigma.
  const double sigma = std::sqrt(0.1 * 0.9 / static_cast<double>(steps));
  for (Eigen::Index i = 0; i < 10; ++i) {
    CHECK(std::abs(teleport(i) - 0.1) < 3 * sigma);
    CHECK(std::abs(complete(i) - 0.1) < 5 * sigma);
  }
  CHECK(complete.sum() == doctest::Approx(1.0));
}

TEST_CASE("PageRank walk approaches power iteration on a random web") {
  const Web web = generate_web(50, 0.1, 10);
  RandomSource src = prng_source(3000000, 11);
  const Eigen::VectorXd walk = pagerank_walk(web, src, 1000000);
  const Eigen::VectorXd power = pagerank_power(web);
  CHECK((walk - power).cwiseAbs().sum() < 0.05);
  CHECK(rbo(ranking(walk), ranking(power)) >= 0.9);
}

TEST_CASE("ranking orders by score then id") {
  Eigen::VectorXd s(4);
  s << 0.2, 0.5, 0.2, 0.1;
  CHECK(ranking(s) == std::vector<std::uint32_t>{1, 0, 2, 3});
}

TEST_CASE("rank-biased overlap") {
  const std::vector<std::uint32_t> a{1, 2, 3};
  const std::vector<std::uint32_t> b{1, 3, 2};
  CHECK(rbo(a, a) == doctest::Approx(1.0));
  CHECK(rbo(a, b) == doctest::Approx(0.955).epsilon(1e-12));
  CHECK(rbo(a, b) == rbo(b, a));
  const std::vector<std::uint32_t> c{4, 5, 6};
  CHECK(rbo(a, c) == 0.0);
  // Moving a disagreement deeper raises the score.
  const std::vector<std::uint32_t> base{0, 1, 2, 3, 4, 5};
  const std::vector<std::uint32_t> swap_top{1, 0, 2, 3, 4, 5};
  const std::vector<std::uint32_t> swap_deep{0, 1, 2, 3, 5, 4};
  CHECK(rbo(base, swap_deep) > rbo(base, swap_top));
  const std::vector<std::uint32_t> dup{1, 1, 2};
  CHECK_THROWS_AS(rbo(a, dup), ValidationError);
  CHECK_THROWS_AS(rbo(a, std::vector<std::uint32_t>{}), ParameterError);
}

TEST_CASE("brute-force min cut examples") {
  CHECK(brute_force_min_cut(Graph{2, {{0, 1}, {0, 1}, {1, 0}}}) == 3);
  CHECK(brute_force_min_cut(Graph{3, {{0, 1}, {1, 2}}}) == 1);
  CHECK(brute_force_min_cut(Graph{4, {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}}) == 3);
  CHECK(brute_force_min_cut(cycle(9)) == 2);
  Graph big;
  big.nodes = 21;
  CHECK_THROWS_AS(brute_force_min_cut(big), ParameterError);
}

TEST_CASE("Karger contraction") {
  RandomSource src = prng_source(100000, 12);
  const Graph parallel{2, {{0, 1}, {0, 1}, {0, 1}, {0, 1}}};
  const KargerResult one = karger_min_cut(parallel, src, 1);
  CHECK(one.best == 4);
  CHECK(one.cuts == std::vector<std::uint64_t>{4});

  const KargerResult r = karger_min_cut(generate_graph(9, 0.4, 13), src, 50);
  REQUIRE(r.cuts.size() == 50);
  REQUIRE(r.running_min.size() == 50);
  for (std::size_t i = 0; i < r.cuts.size(); ++i) {
    CHECK(r.running_min[i] == *std::min_element(r.cuts.begin(), r.cuts.begin() + static_cast<std::ptrdiff_t>(i) + 1));
    if (i > 0) CHECK(r.running_min[i] <= r.running_min[i - 1]);
  }
  CHECK(r.best == r.running_min.back());
  CHECK_THROWS_AS(karger_min_cut(Graph{4, {{0, 1}, {2, 3}}}, src, 5), ValidationError);
  CHECK(karger_default_iterations(10) == 104);
}

TEST_CASE("Karger finds the cycle cut within the default budget") {
  RandomSource src = prng_source(2000000, 14);
  const Graph g = cycle(8);
  const std::uint64_t budget = karger_default_iterations(8);
  int found = 0;
  for (int t = 0; t < 200; ++t) found += karger_min_cut(g, src, budget).best == 2 ? 1 : 0;
  CHECK(found >= 198);
}

TEST_CASE("Karger agrees with brute force on random graphs") {
  RandomSource src = prng_source(8000000, 15);
  int errors = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const Graph g = generate_graph(4 + seed % 7, 0.5, 100 + seed);
    const auto truth = brute_force_min_cut(g);
    const auto r = karger_min_cut(g, src, karger_default_iterations(g.nodes));
    CHECK(r.best >= truth);
    errors += r.best != truth ? 1 : 0;
  }
  CHECK(errors <= 1);
}

TEST_CASE("generators") {
  const Web full = generate_web(6, 1.0, 1);
  CHECK(full.edges.size() == 30);
  CHECK_NOTHROW(validate(full));
  const Graph complete = generate_graph(6, 1.0, 1);
  CHECK(complete.edges.size() == 15);
  const Graph two = generate_graph(2, 0.3, 2);
  CHECK(two.edges.size() == 1);
  CHECK(generate_web(40, 0.05, 3).edges == generate_web(40, 0.05, 3).edges);
  CHECK(generate_graph(10, 0.3, 4).edges == generate_graph(10, 0.3, 4).edges);
  for (std::uint64_t s = 0; s < 20; ++s) {
    CHECK_NOTHROW(validate(generate_web(20, 0.02, s)));
    CHECK(connected(generate_graph(10, 0.2, s)));
  }
  CHECK_THROWS_AS(generate_graph(1, 0.5, 1), ParameterError);
  CHECK_THROWS_AS(generate_web(5, 0.0, 1), ParameterError);
  CHECK_THROWS_AS(generate_graph(60, 1e-6, 1), ParameterError);
}
