#pragma once

// First-line statistics of a symbol stream: Shannon entropy, symbol and
// bit-block distributions, grayscale maps and lag/difference series.

#include <Eigen/Core>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "entropy_forge/extraction.hpp"
#include "entropy_forge/special.hpp"

namespace ef {

struct SymbolHistogram {
  std::vector<std::uint64_t> counts;  ///< one cell per alphabet symbol
  std::uint64_t total = 0;
};

SymbolHistogram histogram(const SymbolStream& stream);

/// Merges shard histograms; exact for any split of the stream.
SymbolHistogram merge(const SymbolHistogram& a, const SymbolHistogram& b);

struct EntropyReport {
  double shannon_bits_per_symbol = 0.0;
  double shannon_bits_per_bit = 0.0;
  int n = 0;
};

/// -sum p log2 p over occupied cells. n is log2 of the histogram size.
EntropyReport shannon_entropy(const SymbolHistogram& hist);

struct BlockOnesHistogram {
  std::size_t block_len = 0;
  std::vector<std::uint64_t> counts;  ///< counts[j] = blocks with j ones, j in [0, block_len]
  std::vector<double> binomial_p;     ///< Binomial(block_len, 1/2) pmf for comparison
  std::uint64_t blocks = 0;

  /// Pearson test of `counts` against `binomial_p` (tails pooled to >= 5 expected).
  ChiSquareResult chi_square() const;
};

/// Ones per consecutive block of `block_len` bits; the partial tail is dropped.
BlockOnesHistogram bit_block_ones(std::span<const std::uint8_t> bits, std::size_t block_len = 100);

using GrayscaleMap = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Row-major fill of the first rows*cols symbols; symbol v is intensity v.
GrayscaleMap grayscale_map(const SymbolStream& stream, Eigen::Index rows, Eigen::Index cols);

std::vector<std::pair<std::uint32_t, std::uint32_t>> lag_pairs(const SymbolStream& stream,
                                                               std::size_t lag);

/// x[t+1] - x[t]
std::vector<std::int64_t> difference_series(const SymbolStream& stream);

/// Sample Pearson correlation of (x_t, x_{t+lag}) pairs.
double lag_correlation(const SymbolStream& stream, std::size_t lag);

}  // namespace ef
