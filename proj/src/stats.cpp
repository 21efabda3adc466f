#include "entropy_forge/stats.hpp"

#include <algorithm>
#include <boost/math/distributions/binomial.hpp>
#include <cmath>
#include <string>

#include "entropy_forge/error.hpp"

namespace ef {

SymbolHistogram histogram(const SymbolStream& stream) {
  validate(stream);
  SymbolHistogram hist;
  hist.counts.assign(stream.alphabet_size(), 0);
  for (std::uint32_t s : stream.symbols) ++hist.counts[s];
  hist.total = stream.symbols.size();
  return hist;
}

SymbolHistogram merge(const SymbolHistogram& a, const SymbolHistogram& b) {
  if (a.counts.size() != b.counts.size()) throw ParameterError("histogram sizes differ");
  SymbolHistogram out = a;
  for (std::size_t i = 0; i < b.counts.size(); ++i) out.counts[i] += b.counts[i];
  out.total += b.total;
  return out;
}

EntropyReport shannon_entropy(const SymbolHistogram& hist) {
  if (hist.total == 0) throw InsufficientDataError("Shannon entropy of an empty histogram");
  const std::size_t k = hist.counts.size();
  if (k < 2 || (k & (k - 1)) != 0) {
    throw ParameterError("histogram size must be a power of two >= 2");
  }
  EntropyReport report;
  report.n = static_cast<int>(std::log2(static_cast<double>(k)) + 0.5);
  const double total = static_cast<double>(hist.total);
  double h = 0.0;
  for (std::uint64_t c : hist.counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / total;
    h -= p * std::log2(p);
  }
  // Guard the closed interval against rounding: -sum p log2 p can land a
  // few ulps outside [0, n].
  h = std::clamp(h, 0.0, static_cast<double>(report.n));
  report.shannon_bits_per_symbol = h;
  report.shannon_bits_per_bit = h / report.n;
  return report;
}

ChiSquareResult BlockOnesHistogram::chi_square() const {
  std::vector<double> observed(counts.begin(), counts.end());
  return chi_square_gof(observed, binomial_p);
}

BlockOnesHistogram bit_block_ones(std::span<const std::uint8_t> bits, std::size_t block_len) {
  if (block_len < 1) throw ParameterError("block_len must be >= 1");
  if (bits.size() < block_len) {
    throw InsufficientDataError("need at least " + std::to_string(block_len) + " bits, have " +
                                std::to_string(bits.size()));
  }
  BlockOnesHistogram out;
  out.block_len = block_len;
  out.counts.assign(block_len + 1, 0);
  out.blocks = bits.size() / block_len;
  for (std::size_t b = 0; b < out.blocks; ++b) {
    std::size_t ones = 0;
    for (std::size_t i = 0; i < block_len; ++i) ones += bits[b * block_len + i] & 1u;
    ++out.counts[ones];
  }
  const boost::math::binomial_distribution<double> dist(static_cast<double>(block_len), 0.5);
  out.binomial_p.resize(block_len + 1);
  for (std::size_t j = 0; j <= block_len; ++j) {
    out.binomial_p[j] = boost::math::pdf(dist, static_cast<double>(j));
  }
  return out;
}

GrayscaleMap grayscale_map(const SymbolStream& stream, Eigen::Index rows, Eigen::Index cols) {
  if (stream.n != 8) throw ParameterError("grayscale maps need 8-bit symbols");
  if (rows < 1 || cols < 1) throw ParameterError("grayscale map dimensions must be >= 1");
  const auto needed = static_cast<std::size_t>(rows * cols);
  if (stream.symbols.size() < needed) {
    throw InsufficientDataError("grayscale map needs " + std::to_string(needed) +
                                " symbols, have " + std::to_string(stream.symbols.size()));
  }
  GrayscaleMap map(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      map(r, c) = static_cast<std::uint8_t>(stream.symbols[static_cast<std::size_t>(r * cols + c)]);
    }
  }
  return map;
}

std::vector<std::pair<std::uint32_t, std::uint32_t>> lag_pairs(const SymbolStream& stream,
                                                               std::size_t lag) {
  if (lag < 1) throw ParameterError("lag must be >= 1");
  if (stream.symbols.size() <= lag) {
    throw InsufficientDataError("stream shorter than lag + 1");
  }
  std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;
  pairs.reserve(stream.symbols.size() - lag);
  for (std::size_t t = 0; t + lag < stream.symbols.size(); ++t) {
    pairs.emplace_back(stream.symbols[t], stream.symbols[t + lag]);
  }
  return pairs;
}

std::vector<std::int64_t> difference_series(const SymbolStream& stream) {
  if (stream.symbols.size() < 2) throw InsufficientDataError("difference series needs 2 symbols");
  std::vector<std::int64_t> diffs(stream.symbols.size() - 1);
  for (std::size_t t = 0; t + 1 < stream.symbols.size(); ++t) {
    diffs[t] = static_cast<std::int64_t>(stream.symbols[t + 1]) -
               static_cast<std::int64_t>(stream.symbols[t]);
  }
  return diffs;
}

double lag_correlation(const SymbolStream& stream, std::size_t lag) {
  const auto pairs = lag_pairs(stream, lag);
  Eigen::ArrayXd x(static_cast<Eigen::Index>(pairs.size()));
  Eigen::ArrayXd y(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    x(i) = pairs[static_cast<std::size_t>(i)].first;
    y(i) = pairs[static_cast<std::size_t>(i)].second;
  }
  x -= x.mean();
  y -= y.mean();
  const double denom = std::sqrt((x * x).sum() * (y * y).sum());
  if (!(denom > 0.0)) return 0.0;
  return (x * y).sum() / denom;
}

}  // namespace ef
