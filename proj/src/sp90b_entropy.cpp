#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

#include "entropy_forge/error.hpp"
#include "entropy_forge/sp90b.hpp"
#include "entropy_forge/special.hpp"

namespace ef::sp90b {

McvEstimate mcv_from_count(std::uint64_t max_count, std::uint64_t samples) {
  if (samples < 2) throw InsufficientDataError("MCV estimate needs at least 2 samples");
  if (max_count == 0 || max_count > samples) {
    throw ParameterError("most common count must be in [1, samples]");
  }
  McvEstimate out;
  out.p_hat = static_cast<double>(max_count) / static_cast<double>(samples);
  out.p_upper = std::min(
      1.0, out.p_hat + kZ995 * std::sqrt(out.p_hat * (1.0 - out.p_hat) /
                                         static_cast<double>(samples - 1)));
  out.h_min = out.p_upper >= 1.0 ? 0.0 : -std::log2(out.p_upper);
  return out;
}

McvEstimate mcv_estimate(std::span<const std::uint32_t> samples) {
  if (samples.size() < 2) throw InsufficientDataError("MCV estimate needs at least 2 samples");
  std::vector<std::uint32_t> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  std::uint64_t best = 0;
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    best = std::max<std::uint64_t>(best, j - i);
    i = j;
  }
  return mcv_from_count(best, samples.size());
}

McvEstimate mcv_estimate(const Dataset& data) {
  validate(data);
  if (data.samples.size() < 2) throw InsufficientDataError("MCV estimate needs at least 2 samples");
  std::vector<std::uint64_t> counts(std::size_t{1} << data.n, 0);
  for (std::uint32_t s : data.samples) ++counts[s];
  return mcv_from_count(*std::max_element(counts.begin(), counts.end()), data.samples.size());
}

MinEntropy min_entropy(const Dataset& data) {
  MinEntropy out;
  out.symbol = mcv_estimate(data);
  // The bitstring is the MSB-first expansion of every sample.
  std::uint64_t ones = 0;
  for (std::uint32_t s : data.samples) ones += static_cast<std::uint64_t>(std::popcount(s));
  const std::uint64_t bits = static_cast<std::uint64_t>(data.samples.size()) *
                             static_cast<std::uint64_t>(data.n);
  out.bitstring = mcv_from_count(std::max(ones, bits - ones), bits);
  out.h_symbol = out.symbol.h_min;
  out.h_bitstring = out.bitstring.h_min;
  out.min_entropy = std::min(out.h_symbol, data.n * out.h_bitstring);
  return out;
}

namespace {

void validate(const RestartMatrix& m) {
  if (m.rows == 0 || m.cols == 0) throw ParameterError("restart matrix must be non-empty");
  if (m.data.size() != m.rows * m.cols) {
    throw ParameterError("restart matrix holds " + std::to_string(m.data.size()) +
                         " samples, expected " + std::to_string(m.rows) + " x " +
                         std::to_string(m.cols));
  }
  validate(Dataset(m.data, m.n));
}

}  // namespace

Dataset RestartMatrix::row_dataset() const { return Dataset(data, n); }

Dataset RestartMatrix::column_dataset() const {
  std::vector<std::uint32_t> out(data.size());
  for (std::size_t c = 0; c < cols; ++c) {
    for (std::size_t r = 0; r < rows; ++r) out[c * rows + r] = data[r * cols + c];
  }
  return Dataset(std::move(out), n);
}

RestartResult restart_tests(const RestartMatrix& matrix, double h_claim) {
  validate(matrix);
  if (!(h_claim > 0.0) || h_claim > matrix.n) {
    throw ParameterError("claimed entropy must be in (0, n]");
  }
  RestartResult out;
  out.h_claim = h_claim;

  std::vector<std::uint32_t> counts(std::size_t{1} << matrix.n, 0);
  std::vector<std::uint32_t> touched;
  auto line_max = [&](auto&& at, std::size_t len) {
    std::uint32_t best = 0;
    touched.clear();
    for (std::size_t i = 0; i < len; ++i) {
      const std::uint32_t s = at(i);
      if (counts[s]++ == 0) touched.push_back(s);
      best = std::max(best, counts[s]);
    }
    for (std::uint32_t s : touched) counts[s] = 0;
    return best;
  };
  for (std::size_t r = 0; r < matrix.rows; ++r) {
    const std::uint32_t* row = matrix.data.data() + r * matrix.cols;
    out.max_row_count = std::max<std::uint64_t>(
        out.max_row_count, line_max([&](std::size_t i) { return row[i]; }, matrix.cols));
  }
  for (std::size_t c = 0; c < matrix.cols; ++c) {
    out.max_col_count = std::max<std::uint64_t>(
        out.max_col_count,
        line_max([&](std::size_t i) { return matrix.data[i * matrix.cols + c]; }, matrix.rows));
  }
  const double p = std::exp2(-h_claim);
  out.row_tail = binomial_upper_tail(matrix.cols, p, out.max_row_count);
  out.col_tail = binomial_upper_tail(matrix.rows, p, out.max_col_count);
  out.sanity_pass = out.row_tail >= kRestartAlpha && out.col_tail >= kRestartAlpha;

  out.rows = min_entropy(matrix.row_dataset());
  out.cols = min_entropy(matrix.column_dataset());
  out.validation_pass = std::min(out.rows.min_entropy, out.cols.min_entropy) >= h_claim / 2.0;
  return out;
}

}  // namespace ef::sp90b
