#pragma once

// Consumers of a recorded random stream: lattice walks, PageRank by random
// walk, rank-biased overlap and Karger's contraction min-cut.

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "entropy_forge/extraction.hpp"

namespace ef::apps {

/// Sequential reader over a finite bit string. Bits are read MSB first and
/// never reused; reading past the end throws ExhaustedError.
class RandomSource {
 public:
  RandomSource() = default;
  /// Every byte contributes 8 bits.
  static RandomSource from_bytes(std::vector<std::uint8_t> bytes);
  /// Every symbol contributes its n bits, MSB first.
  static RandomSource from_stream(const SymbolStream& stream);

  /// Next `count` bits (count <= 32) as an unsigned integer, MSB first.
  std::uint32_t bits(int count);
  bool bit() { return bits(1) != 0; }

  std::uint64_t consumed() const noexcept { return cursor_; }
  std::uint64_t remaining() const noexcept { return size_ - cursor_; }
  std::uint64_t size() const noexcept { return size_; }

 private:
  std::vector<std::uint8_t> bytes_;
  std::uint64_t size_ = 0;  ///< bits
  std::uint64_t cursor_ = 0;
};

/// Uniform integer in [0, m) by rejection on ceil(log2 m)-bit words.
std::uint32_t draw_uniform(RandomSource& src, std::uint32_t m);

/// True with probability p. Compares fresh bits against the binary
/// expansion of p, so it uses 2 bits on average and is exact.
bool draw_bernoulli(RandomSource& src, double p);

using LatticePoint = std::array<std::int64_t, 3>;

/// Walk on Z^3 from the origin; each step picks one of the six unit moves.
std::vector<LatticePoint> random_walk_3d(RandomSource& src, std::size_t steps);

/// Directed graph without self-loops or repeated edges.
struct Web {
  std::uint32_t nodes = 0;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;  ///< (from, to)
};

/// Throws ValidationError on out-of-range endpoints, self-loops, repeated
/// edges or a node without out-edges.
void validate(const Web& web);

/// Undirected multigraph.
struct Graph {
  std::uint32_t nodes = 0;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
};

bool connected(const Graph& graph);
/// Throws ValidationError on bad endpoints, self-loops or a disconnected graph.
void validate(const Graph& graph);

/// Every ordered pair is an edge with probability edge_prob; nodes left
/// without out-edges receive one uniformly chosen out-edge.
Web generate_web(std::uint32_t nodes, double edge_prob, std::uint64_t seed);
/// Erdos-Renyi graph, resampled until connected (at most 10000 attempts).
Graph generate_graph(std::uint32_t nodes, double edge_prob, std::uint64_t seed);

inline constexpr double kDamping = 0.85;
inline constexpr double kRboPersistence = 0.9;

Eigen::VectorXd pagerank_power(const Web& web, double damping = kDamping, double tol = 1e-10,
                               std::size_t max_iterations = 100000);

/// Visit frequencies of one walk of n_steps positions. The walk starts at a
/// uniform node; each move follows a uniform out-edge with probability
/// `damping` and otherwise jumps to a uniform node.
Eigen::VectorXd pagerank_walk(const Web& web, RandomSource& src, std::uint64_t n_steps,
                              double damping = kDamping);

/// Node ids ordered by decreasing score, ties by increasing id.
std::vector<std::uint32_t> ranking(const Eigen::VectorXd& scores);

/// Extrapolated rank-biased overlap over the first min(|a|, |b|) ranks.
double rbo(std::span<const std::uint32_t> a, std::span<const std::uint32_t> b,
           double p = kRboPersistence);

struct KargerResult {
  std::uint64_t best = 0;
  std::vector<std::uint64_t> cuts;       ///< cut found by each iteration
  std::vector<std::uint64_t> running_min;
};

/// ceil(N(N-1)/2 * ln N).
std::uint64_t karger_default_iterations(std::uint32_t nodes);

KargerResult karger_min_cut(const Graph& graph, RandomSource& src, std::uint64_t iterations);

std::uint64_t brute_force_min_cut(const Graph& graph);

}  // namespace ef::apps
