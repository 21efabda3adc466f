#include "entropy_forge/apps.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <unordered_set>

#include <Eigen/SparseCore>

#include "entropy_forge/error.hpp"
#include "entropy_forge/rng.hpp"

namespace ef::apps {

RandomSource RandomSource::from_bytes(std::vector<std::uint8_t> bytes) {
  RandomSource src;
  src.size_ = static_cast<std::uint64_t>(bytes.size()) * 8;
  src.bytes_ = std::move(bytes);
  return src;
}

RandomSource RandomSource::from_stream(const SymbolStream& stream) {
  validate(stream);
  if (stream.n == 8) {
    std::vector<std::uint8_t> bytes(stream.symbols.begin(), stream.symbols.end());
    return from_bytes(std::move(bytes));
  }
  RandomSource src;
  src.size_ = static_cast<std::uint64_t>(stream.symbols.size()) * static_cast<std::uint64_t>(stream.n);
  src.bytes_.assign((src.size_ + 7) / 8, 0);
  std::uint64_t pos = 0;
  for (std::uint32_t s : stream.symbols) {
    for (int b = stream.n - 1; b >= 0; --b, ++pos) {
      if ((s >> b) & 1u) src.bytes_[pos / 8] |= static_cast<std::uint8_t>(0x80u >> (pos % 8));
    }
  }
  return src;
}

std::uint32_t RandomSource::bits(int count) {
  if (count < 0 || count > 32) throw ParameterError("can read 0 to 32 bits at a time");
  if (static_cast<std::uint64_t>(count) > remaining()) {
    throw ExhaustedError("random source exhausted after " + std::to_string(cursor_) + " bits");
  }
  std::uint32_t out = 0;
  for (int i = 0; i < count; ++i, ++cursor_) {
    out = (out << 1) | ((bytes_[cursor_ / 8] >> (7 - cursor_ % 8)) & 1u);
  }
  return out;
}

std::uint32_t draw_uniform(RandomSource& src, std::uint32_t m) {
  if (m == 0) throw ParameterError("draw_uniform needs m >= 1");
  if (m == 1) return 0;
  const int width = std::bit_width(m - 1);
  for (;;) {
    const std::uint32_t w = src.bits(width);
    if (w < m) return w;
  }
}

bool draw_bernoulli(RandomSource& src, double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw ParameterError("probability must be in [0, 1]");
  if (p == 1.0) return true;
  // U = 0.b1 b2 ... against p = 0.p1 p2 ...; the first differing bit decides.
  double rest = p;
  while (rest > 0.0) {
    rest *= 2.0;
    const bool p_bit = rest >= 1.0;
    if (p_bit) rest -= 1.0;
    const bool u_bit = src.bit();
    if (u_bit != p_bit) return p_bit;
  }
  return false;
}

std::vector<LatticePoint> random_walk_3d(RandomSource& src, std::size_t steps) {
  std::vector<LatticePoint> path;
  path.reserve(steps + 1);
  LatticePoint at{0, 0, 0};
  path.push_back(at);
  for (std::size_t i = 0; i < steps; ++i) {
    const std::uint32_t move = draw_uniform(src, 6);
    at[move / 2] += (move % 2 == 0) ? 1 : -1;
    path.push_back(at);
  }
  return path;
}

void validate(const Web& web) {
  if (web.nodes == 0) throw ValidationError("web has no nodes");
  std::vector<std::uint32_t> out_degree(web.nodes, 0);
  std::set<std::pair<std::uint32_t, std::uint32_t>> seen;
  for (const auto& [from, to] : web.edges) {
    if (from >= web.nodes || to >= web.nodes) throw ValidationError("web edge endpoint out of range");
    if (from == to) throw ValidationError("web has a self-loop at node " + std::to_string(from));
    if (!seen.insert({from, to}).second) {
      throw ValidationError("web repeats edge " + std::to_string(from) + "->" + std::to_string(to));
    }
    ++out_degree[from];
  }
  for (std::uint32_t v = 0; v < web.nodes; ++v) {
    if (out_degree[v] == 0) throw ValidationError("web node " + std::to_string(v) + " has no out-edges");
  }
}

bool connected(const Graph& graph) {
  if (graph.nodes == 0) return false;
  std::vector<std::uint32_t> parent(graph.nodes);
  std::iota(parent.begin(), parent.end(), 0u);
  auto find = [&](std::uint32_t v) {
    while (parent[v] != v) v = parent[v] = parent[parent[v]];
    return v;
  };
  std::uint32_t components = graph.nodes;
  for (const auto& [u, v] : graph.edges) {
    const std::uint32_t a = find(u);
    const std::uint32_t b = find(v);
    if (a != b) {
      parent[a] = b;
      --components;
    }
  }
  return components == 1;
}

void validate(const Graph& graph) {
  if (graph.nodes < 2) throw ValidationError("graph needs at least 2 nodes");
  for (const auto& [u, v] : graph.edges) {
    if (u >= graph.nodes || v >= graph.nodes) throw ValidationError("graph edge endpoint out of range");
    if (u == v) throw ValidationError("graph has a self-loop at node " + std::to_string(u));
  }
  if (!connected(graph)) throw ValidationError("graph is not connected");
}

namespace {

void check_generator_args(std::uint32_t nodes, double edge_prob) {
  if (nodes < 2) throw ParameterError("generators need at least 2 nodes");
  if (!(edge_prob > 0.0 && edge_prob <= 1.0)) throw ParameterError("edge probability must be in (0, 1]");
}

}  // namespace

Web generate_web(std::uint32_t nodes, double edge_prob, std::uint64_t seed) {
  check_generator_args(nodes, edge_prob);
  std::mt19937_64 engine(seed);
  Web web;
  web.nodes = nodes;
  std::vector<bool> has_out(nodes, false);
  for (std::uint32_t u = 0; u < nodes; ++u) {
    for (std::uint32_t v = 0; v < nodes; ++v) {
      if (u != v && (edge_prob >= 1.0 || uniform01(engine) < edge_prob)) {
        web.edges.emplace_back(u, v);
        has_out[u] = true;
      }
    }
  }
  for (std::uint32_t u = 0; u < nodes; ++u) {
    if (has_out[u]) continue;
    auto v = static_cast<std::uint32_t>(uniform01(engine) * (nodes - 1));
    v = std::min(v, nodes - 2);
    if (v >= u) ++v;
    web.edges.emplace_back(u, v);
  }
  return web;
}

Graph generate_graph(std::uint32_t nodes, double edge_prob, std::uint64_t seed) {
  check_generator_args(nodes, edge_prob);
  std::mt19937_64 engine(seed);
  constexpr int kAttempts = 10000;
  for (int attempt = 0; attempt < kAttempts; ++attempt) {
    Graph graph;
    graph.nodes = nodes;
    for (std::uint32_t u = 0; u < nodes; ++u) {
      for (std::uint32_t v = u + 1; v < nodes; ++v) {
        if (edge_prob >= 1.0 || uniform01(engine) < edge_prob) graph.edges.emplace_back(u, v);
      }
    }
    if (connected(graph)) return graph;
  }
  throw ParameterError("no connected graph after " + std::to_string(kAttempts) +
                       " attempts; raise edge_prob");
}

Eigen::VectorXd pagerank_power(const Web& web, double damping, double tol, std::size_t max_iterations) {
  validate(web);
  if (!(damping >= 0.0 && damping <= 1.0)) throw ParameterError("damping must be in [0, 1]");
  if (!(tol > 0.0)) throw ParameterError("tolerance must be positive");
  const Eigen::Index n = web.nodes;
  std::vector<double> out_degree(web.nodes, 0.0);
  for (const auto& e : web.edges) out_degree[e.first] += 1.0;
  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(web.edges.size());
  for (const auto& [from, to] : web.edges) entries.emplace_back(to, from, 1.0 / out_degree[from]);
  Eigen::SparseMatrix<double> transition(n, n);
  transition.setFromTriplets(entries.begin(), entries.end());

  const double jump = (1.0 - damping) / static_cast<double>(n);
  Eigen::VectorXd rank = Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
  for (std::size_t it = 0; it < max_iterations; ++it) {
    Eigen::VectorXd next = damping * (transition * rank);
    next.array() += jump;
    const double change = (next - rank).lpNorm<1>();
    rank = std::move(next);
    if (change < tol) return rank / rank.sum();
  }
  throw EstimationError("power iteration did not converge in " + std::to_string(max_iterations) +
                            " iterations",
                        "");
}

Eigen::VectorXd pagerank_walk(const Web& web, RandomSource& src, std::uint64_t n_steps, double damping) {
  validate(web);
  if (n_steps < 1) throw ParameterError("walk needs at least one step");
  if (!(damping >= 0.0 && damping <= 1.0)) throw ParameterError("damping must be in [0, 1]");
  std::vector<std::vector<std::uint32_t>> out(web.nodes);
  for (const auto& [from, to] : web.edges) out[from].push_back(to);

  std::vector<std::uint64_t> visits(web.nodes, 0);
  std::uint32_t at = draw_uniform(src, web.nodes);
  for (std::uint64_t step = 0;; ++step) {
    ++visits[at];
    if (step + 1 == n_steps) break;
    if (draw_bernoulli(src, damping)) {
      const auto& next = out[at];
      at = next[draw_uniform(src, static_cast<std::uint32_t>(next.size()))];
    } else {
      at = draw_uniform(src, web.nodes);
    }
  }
  Eigen::VectorXd freq(web.nodes);
  for (std::uint32_t v = 0; v < web.nodes; ++v) {
    freq[v] = static_cast<double>(visits[v]) / static_cast<double>(n_steps);
  }
  return freq;
}

std::vector<std::uint32_t> ranking(const Eigen::VectorXd& scores) {
  std::vector<std::uint32_t> order(static_cast<std::size_t>(scores.size()));
  std::iota(order.begin(), order.end(), 0u);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::uint32_t a, std::uint32_t b) { return scores[a] > scores[b]; });
  return order;
}

double rbo(std::span<const std::uint32_t> a, std::span<const std::uint32_t> b, double p) {
  if (!(p > 0.0 && p < 1.0)) throw ParameterError("RBO persistence must be in (0, 1)");
  const std::size_t depth = std::min(a.size(), b.size());
  if (depth == 0) throw ParameterError("RBO needs non-empty rankings");
  auto check_unique = [](std::span<const std::uint32_t> list) {
    std::unordered_set<std::uint32_t> seen;
    for (std::uint32_t x : list) {
      if (!seen.insert(x).second) throw ValidationError("ranking repeats item " + std::to_string(x));
    }
  };
  check_unique(a);
  check_unique(b);

  std::unordered_set<std::uint32_t> seen_a;
  std::unordered_set<std::uint32_t> seen_b;
  double overlap = 0.0;
  double sum = 0.0;
  double weight = 1.0;  // p^(d-1)
  double agreement = 0.0;
  for (std::size_t d = 1; d <= depth; ++d) {
    const std::uint32_t x = a[d - 1];
    const std::uint32_t y = b[d - 1];
    if (x == y) {
      overlap += 1.0;
    } else {
      overlap += (seen_b.contains(x) ? 1.0 : 0.0) + (seen_a.contains(y) ? 1.0 : 0.0);
    }
    seen_a.insert(x);
    seen_b.insert(y);
    agreement = overlap / static_cast<double>(d);
    sum += weight * agreement;
    weight *= p;
  }
  // weight is now p^depth.
  return (1.0 - p) * sum + weight * agreement;
}

std::uint64_t karger_default_iterations(std::uint32_t nodes) {
  if (nodes < 2) throw ParameterError("min cut needs at least 2 nodes");
  const double n = nodes;
  return static_cast<std::uint64_t>(std::ceil(n * (n - 1.0) / 2.0 * std::log(n)));
}

KargerResult karger_min_cut(const Graph& graph, RandomSource& src, std::uint64_t iterations) {
  validate(graph);
  if (iterations == 0) throw ParameterError("Karger needs at least one iteration");
  KargerResult result;
  result.cuts.reserve(iterations);
  result.running_min.reserve(iterations);
  std::vector<std::uint32_t> label(graph.nodes);
  std::vector<std::pair<std::uint32_t, std::uint32_t>> live;
  for (std::uint64_t it = 0; it < iterations; ++it) {
    std::iota(label.begin(), label.end(), 0u);
    live = graph.edges;
    for (std::uint32_t groups = graph.nodes; groups > 2; --groups) {
      const auto& picked = live[draw_uniform(src, static_cast<std::uint32_t>(live.size()))];
      const std::uint32_t keep = label[picked.first];
      const std::uint32_t gone = label[picked.second];
      for (auto& l : label) {
        if (l == gone) l = keep;
      }
      std::erase_if(live, [&](const auto& e) { return label[e.first] == label[e.second]; });
    }
    const std::uint64_t cut = live.size();
    result.best = it == 0 ? cut : std::min(result.best, cut);
    result.cuts.push_back(cut);
    result.running_min.push_back(result.best);
  }
  return result;
}

std::uint64_t brute_force_min_cut(const Graph& graph) {
  if (graph.nodes > 20) throw ParameterError("brute-force min cut supports at most 20 nodes");
  validate(graph);
  // Node 0 stays on side A; bit i of `side` puts node i+1 on side B.
  const std::uint32_t masks = 1u << (graph.nodes - 1);
  std::uint64_t best = graph.edges.size();
  for (std::uint32_t side = 1; side < masks; ++side) {
    const std::uint64_t in_b = static_cast<std::uint64_t>(side) << 1;
    std::uint64_t crossing = 0;
    for (const auto& [u, v] : graph.edges) crossing += ((in_b >> u) ^ (in_b >> v)) & 1u;
    best = std::min(best, crossing);
  }
  return best;
}

}  // namespace ef::apps
