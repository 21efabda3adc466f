#pragma once

// IID assessment, MCV min-entropy, restart tests and continuous health tests
// following NIST SP 800-90B. Every constant taken from the standard lives in
// this header and is listed in docs/conformance.md.

#include <array>
#include <bitset>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "entropy_forge/extraction.hpp"

namespace ef::sp90b {

inline constexpr double kZ995 = 2.576;                    ///< upper bound critical value, MCV
inline constexpr std::size_t kPermutations = 10000;
inline constexpr std::size_t kMinPermutations = 100;
inline constexpr std::size_t kRankTail = 5;               ///< extreme-rank count at 10000 permutations
inline constexpr double kChiSquareAlpha = 0.001;
inline constexpr double kLrsAlpha = 0.001;
inline constexpr double kRestartAlpha = 0.000005;
inline constexpr double kHealthAlpha = 0x1.0p-20;
inline constexpr std::size_t kSequentialSamples = 1000000;
inline constexpr std::size_t kRestartDim = 1000;
inline constexpr std::size_t kAptWindow = 512;            ///< non-binary sources
inline constexpr std::size_t kAptWindowBinary = 1024;
inline constexpr int kCompressionBlockSize100k = 5;
inline constexpr std::size_t kChiSquareMinSamples = 100;
inline constexpr std::array<std::size_t, 5> kLags = {1, 2, 8, 16, 32};

struct Dataset {
  std::vector<std::uint32_t> samples;
  int n = 8;  ///< bits per sample

  Dataset() = default;
  Dataset(std::vector<std::uint32_t> s, int bits) : samples(std::move(s)), n(bits) {}
  explicit Dataset(const SymbolStream& stream) : samples(stream.symbols), n(stream.n) {}

  bool binary() const noexcept { return n == 1; }
  std::size_t size() const noexcept { return samples.size(); }
};

/// Throws ParameterError if n is out of [1, 16] or a sample is >= 2^n.
void validate(const Dataset& data);

// --- permutation-test statistics -------------------------------------------

enum class Statistic : std::uint8_t {
  Excursion,
  DirectionalRuns,
  LongestDirectionalRun,
  IncreasesDecreases,
  MedianRuns,
  LongestMedianRun,
  AverageCollision,
  MaxCollision,
  Periodicity1,
  Periodicity2,
  Periodicity8,
  Periodicity16,
  Periodicity32,
  Covariance1,
  Covariance2,
  Covariance8,
  Covariance16,
  Covariance32,
  Compression,
};
inline constexpr std::size_t kStatisticCount = 19;
using StatisticMask = std::bitset<kStatisticCount>;
using StatisticValues = std::array<double, kStatisticCount>;

std::string_view name(Statistic s);

/// Hamming weight of each complete 8-bit block (binary inputs).
std::vector<std::uint32_t> conversion_one(std::span<const std::uint32_t> bits);
/// Value of each complete 8-bit block, MSB first (binary inputs).
std::vector<std::uint32_t> conversion_two(std::span<const std::uint32_t> bits);

double excursion(std::span<const std::uint32_t> s);

struct DirectionalRuns {
  double runs = 0;
  double longest = 0;
  double increases_decreases = 0;  ///< max(#increases, #decreases)
};
/// Signs s'_i = -1 if s_i > s_{i+1} else +1.
DirectionalRuns directional_runs(std::span<const std::uint32_t> s);

struct MedianRuns {
  double runs = 0;
  double longest = 0;
};
/// Signs -1 below the median, +1 otherwise.
MedianRuns median_runs(std::span<const std::uint32_t> s, double median);

struct Collisions {
  double average = 0;
  double maximum = 0;
};
Collisions collisions(std::span<const std::uint32_t> s);

double periodicity(std::span<const std::uint32_t> s, std::size_t lag);
double covariance(std::span<const std::uint32_t> s, std::size_t lag);

/// Length in bytes of the bzip2 encoding (block size 5) of the samples
/// written as space-separated decimal integers.
double compression_length(std::span<const std::uint32_t> s);

/// Evaluates the 19 statistics on orderings of one dataset. Quantities that
/// do not depend on order (mean, median) are fixed at construction.
class StatisticEvaluator {
 public:
  explicit StatisticEvaluator(const Dataset& data);

  /// Statistics not in `mask` are left as NaN.
  StatisticValues evaluate(std::span<const std::uint32_t> ordering, StatisticMask mask) const;

  double median() const noexcept { return median_; }

 private:
  bool binary_;
  double median_;
};

// --- permutation suite --------------------------------------------------------

struct PermutationTestOutcome {
  std::string statistic_name;
  double original_value = 0;
  std::uint64_t counter_higher = 0;  ///< C0: permuted value > original
  std::uint64_t counter_equal = 0;   ///< C1: permuted value == original
  std::uint64_t permutations = 0;    ///< permutations evaluated for this statistic
  bool pass = false;
};

struct PermutationOptions {
  std::size_t permutations = kPermutations;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  /// Stop evaluating a statistic once its pass is certain (both rank
  /// counters above the tail). Verdicts are identical either way.
  bool early_exit = true;
};

/// Extreme-rank tail for a permutation count: floor(5 * count / 10000).
std::size_t rank_tail(std::size_t permutations);

/// Fisher-Yates shuffle number `index` of `data`; a pure function of (seed, index).
void shuffle(std::span<std::uint32_t> data, std::uint64_t seed, std::uint64_t index);

std::vector<PermutationTestOutcome> permutation_test_suite(const Dataset& data,
                                                           const PermutationOptions& options);

// --- chi-square tests ---------------------------------------------------------

struct ChiSquareOutcome {
  std::string test_name;
  double statistic = 0;  ///< chi-square value, or the repeated-substring length
  double dof = 0;
  double p_value = 1;    ///< for the repeated-substring test: P(X >= 1)
  bool pass = false;
};

ChiSquareOutcome chi_square_independence(const Dataset& data);
ChiSquareOutcome chi_square_goodness_of_fit(const Dataset& data);
ChiSquareOutcome longest_repeated_substring_test(const Dataset& data);
std::vector<ChiSquareOutcome> chi_square_tests(const Dataset& data);

/// Length of the longest substring occurring at least twice (overlaps allowed).
std::size_t longest_repeated_substring(std::span<const std::uint32_t> s);

// --- min-entropy -------------------------------------------------------------

struct McvEstimate {
  double p_hat = 0;
  double p_upper = 0;
  double h_min = 0;  ///< bits per sample
};

/// Most-common-value estimate from the largest symbol count and sample count.
McvEstimate mcv_from_count(std::uint64_t max_count, std::uint64_t samples);
McvEstimate mcv_estimate(std::span<const std::uint32_t> samples);
McvEstimate mcv_estimate(const Dataset& data);

struct MinEntropy {
  McvEstimate symbol;
  McvEstimate bitstring;
  double h_symbol = 0;     ///< bits per symbol
  double h_bitstring = 0;  ///< bits per bit
  double min_entropy = 0;  ///< min(h_symbol, n * h_bitstring)
};
MinEntropy min_entropy(const Dataset& data);

// --- restart tests -------------------------------------------------------------

struct RestartMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  int n = 8;
  std::vector<std::uint32_t> data;  ///< row-major, one restart per row

  Dataset row_dataset() const;     ///< rows concatenated
  Dataset column_dataset() const;  ///< columns concatenated
};

struct RestartResult {
  double h_claim = 0;
  std::uint64_t max_row_count = 0;  ///< most frequent symbol count in any row
  std::uint64_t max_col_count = 0;
  double row_tail = 1;  ///< P(Binomial(cols, 2^-h) >= max_row_count)
  double col_tail = 1;
  bool sanity_pass = false;
  MinEntropy rows;
  MinEntropy cols;
  bool validation_pass = false;  ///< min(rows, cols) >= h_claim / 2
};

RestartResult restart_tests(const RestartMatrix& matrix, double h_claim);

// --- health tests ----------------------------------------------------------------

/// C = 1 + ceil(-log2(alpha) / h).
std::uint64_t repetition_count_cutoff(double h_min, double alpha = kHealthAlpha);

/// 1 + smallest k with P(Binomial(window, 2^-h) <= k) >= 1 - alpha.
std::uint64_t adaptive_proportion_cutoff(std::size_t window, double h_min, double alpha = kHealthAlpha);

class RepetitionCountTest {
 public:
  explicit RepetitionCountTest(double h_min, double alpha = kHealthAlpha);

  /// Returns true when this sample completes a run of `cutoff()` identical
  /// samples; the run counter then restarts.
  bool feed(std::uint32_t sample);
  void reset() noexcept { run_ = 0; }
  std::uint64_t cutoff() const noexcept { return cutoff_; }

 private:
  std::uint64_t cutoff_;
  std::uint64_t run_ = 0;
  std::uint32_t last_ = 0;
};

class AdaptiveProportionTest {
 public:
  AdaptiveProportionTest(double h_min, std::size_t window = kAptWindow, double alpha = kHealthAlpha);

  /// Returns true at the sample where the reference count first reaches the
  /// cutoff inside the current window (at most once per window).
  bool feed(std::uint32_t sample);
  void reset() noexcept { position_ = 0; }
  std::uint64_t cutoff() const noexcept { return cutoff_; }
  std::size_t window() const noexcept { return window_; }

 private:
  std::size_t window_;
  std::uint64_t cutoff_;
  std::size_t position_ = 0;
  std::uint32_t reference_ = 0;
  std::uint64_t count_ = 0;
  bool alarmed_ = false;
};

std::vector<std::size_t> repetition_count_health(std::span<const std::uint32_t> stream, double h_min,
                                                 double alpha = kHealthAlpha);
std::vector<std::size_t> adaptive_proportion_health(std::span<const std::uint32_t> stream, double h_min,
                                                    std::size_t window = kAptWindow,
                                                    double alpha = kHealthAlpha);

// --- full assessment -----------------------------------------------------------

struct IidResult {
  std::vector<PermutationTestOutcome> permutation;
  std::vector<ChiSquareOutcome> chi_square;
  bool verdict = false;
};

IidResult iid_tests(const Dataset& data, const PermutationOptions& options);

struct AssessmentOptions {
  PermutationOptions permutation;
  /// Reject undersized datasets instead of flagging them non-conformant.
  bool strict = false;
  bool run_restart_iid = true;
};

struct AssessmentReport {
  int n = 8;
  std::size_t samples = 0;
  std::uint64_t seed = 0;
  std::size_t permutations = 0;
  IidResult sequential;
  std::optional<IidResult> restart_rows_iid;
  std::optional<IidResult> restart_cols_iid;
  bool iid_verdict = false;
  MinEntropy sequential_entropy;
  double h_symbol = 0;
  double h_bitstring = 0;
  std::optional<RestartResult> restart;
  double min_entropy = 0;
  std::vector<std::string> conformance_flags;
  std::string status;  ///< "complete", "assessment incomplete" or "restart failed"
};

AssessmentReport assess(const Dataset& data, const std::optional<RestartMatrix>& restart,
                        const AssessmentOptions& options);

}  // namespace ef::sp90b
