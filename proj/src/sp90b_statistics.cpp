#include <bzlib.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <string>

#include "entropy_forge/error.hpp"
#include "entropy_forge/rng.hpp"
#include "entropy_forge/sp90b.hpp"

namespace ef::sp90b {

void validate(const Dataset& data) {
  if (data.n < 1 || data.n > 16) {
    throw ParameterError("sample width n must be in [1, 16], got " + std::to_string(data.n));
  }
  const std::uint32_t k = 1u << data.n;
  for (std::uint32_t s : data.samples) {
    if (s >= k) throw ParameterError("sample " + std::to_string(s) + " exceeds 2^n - 1");
  }
}

std::string_view name(Statistic s) {
  switch (s) {
    case Statistic::Excursion: return "excursion";
    case Statistic::DirectionalRuns: return "number_of_directional_runs";
    case Statistic::LongestDirectionalRun: return "length_of_directional_runs";
    case Statistic::IncreasesDecreases: return "number_of_increases_and_decreases";
    case Statistic::MedianRuns: return "number_of_runs_based_on_median";
    case Statistic::LongestMedianRun: return "length_of_runs_based_on_median";
    case Statistic::AverageCollision: return "average_collision";
    case Statistic::MaxCollision: return "maximum_collision";
    case Statistic::Periodicity1: return "periodicity_lag_1";
    case Statistic::Periodicity2: return "periodicity_lag_2";
    case Statistic::Periodicity8: return "periodicity_lag_8";
    case Statistic::Periodicity16: return "periodicity_lag_16";
    case Statistic::Periodicity32: return "periodicity_lag_32";
    case Statistic::Covariance1: return "covariance_lag_1";
    case Statistic::Covariance2: return "covariance_lag_2";
    case Statistic::Covariance8: return "covariance_lag_8";
    case Statistic::Covariance16: return "covariance_lag_16";
    case Statistic::Covariance32: return "covariance_lag_32";
    case Statistic::Compression: return "compression";
  }
  return "unknown";
}

std::vector<std::uint32_t> conversion_one(std::span<const std::uint32_t> bits) {
  std::vector<std::uint32_t> out(bits.size() / 8);
  for (std::size_t b = 0; b < out.size(); ++b) {
    std::uint32_t w = 0;
    for (std::size_t i = 0; i < 8; ++i) w += bits[8 * b + i] & 1u;
    out[b] = w;
  }
  return out;
}

std::vector<std::uint32_t> conversion_two(std::span<const std::uint32_t> bits) {
  std::vector<std::uint32_t> out(bits.size() / 8);
  for (std::size_t b = 0; b < out.size(); ++b) {
    std::uint32_t w = 0;
    for (std::size_t i = 0; i < 8; ++i) w = (w << 1) | (bits[8 * b + i] & 1u);
    out[b] = w;
  }
  return out;
}

double excursion(std::span<const std::uint32_t> s) {
  if (s.empty()) return 0.0;
  // max_i |prefix_i - i * mean|, evaluated exactly as |L prefix_i - i total| / L.
  int128 total = 0;
  for (std::uint32_t v : s) total += v;
  const auto length = static_cast<int128>(s.size());
  int128 prefix = 0;
  int128 best = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    prefix += s[i];
    int128 d = length * prefix - static_cast<int128>(i + 1) * total;
    if (d < 0) d = -d;
    best = std::max(best, d);
  }
  return static_cast<double>(best) / static_cast<double>(s.size());
}

DirectionalRuns directional_runs(std::span<const std::uint32_t> s) {
  DirectionalRuns out;
  if (s.size() < 2) return out;
  std::size_t runs = 1;
  std::size_t current = 1;
  std::size_t longest = 1;
  std::size_t ups = 0;
  bool previous_up = !(s[0] > s[1]);
  ups += previous_up ? 1 : 0;
  for (std::size_t i = 1; i + 1 < s.size(); ++i) {
    const bool up = !(s[i] > s[i + 1]);
    ups += up ? 1 : 0;
    if (up == previous_up) {
      ++current;
    } else {
      ++runs;
      current = 1;
      previous_up = up;
    }
    longest = std::max(longest, current);
  }
  const std::size_t signs = s.size() - 1;
  out.runs = static_cast<double>(runs);
  out.longest = static_cast<double>(longest);
  out.increases_decreases = static_cast<double>(std::max(ups, signs - ups));
  return out;
}

MedianRuns median_runs(std::span<const std::uint32_t> s, double median) {
  MedianRuns out;
  if (s.empty()) return out;
  std::size_t runs = 1;
  std::size_t current = 1;
  std::size_t longest = 1;
  bool previous = static_cast<double>(s[0]) >= median;
  for (std::size_t i = 1; i < s.size(); ++i) {
    const bool above = static_cast<double>(s[i]) >= median;
    if (above == previous) {
      ++current;
    } else {
      ++runs;
      current = 1;
      previous = above;
    }
    longest = std::max(longest, current);
  }
  out.runs = static_cast<double>(runs);
  out.longest = static_cast<double>(longest);
  return out;
}

Collisions collisions(std::span<const std::uint32_t> s) {
  Collisions out;
  if (s.empty()) return out;
  const std::uint32_t top = *std::max_element(s.begin(), s.end());
  // stamp[v] == generation marks v as seen in the current segment.
  std::vector<std::uint32_t> stamp(static_cast<std::size_t>(top) + 1, 0);
  std::uint32_t generation = 1;
  std::uint64_t sum = 0;
  std::uint64_t count = 0;
  std::uint64_t longest = 0;
  std::size_t start = 0;
  for (std::size_t j = 0; j < s.size(); ++j) {
    if (stamp[s[j]] == generation) {
      const std::uint64_t len = j - start + 1;
      sum += len;
      ++count;
      longest = std::max(longest, len);
      start = j + 1;
      ++generation;
    } else {
      stamp[s[j]] = generation;
    }
  }
  if (count > 0) {
    out.average = static_cast<double>(sum) / static_cast<double>(count);
    out.maximum = static_cast<double>(longest);
  }
  return out;
}

double periodicity(std::span<const std::uint32_t> s, std::size_t lag) {
  std::uint64_t matches = 0;
  for (std::size_t i = 0; i + lag < s.size(); ++i) matches += s[i] == s[i + lag] ? 1 : 0;
  return static_cast<double>(matches);
}

double covariance(std::span<const std::uint32_t> s, std::size_t lag) {
  std::uint64_t sum = 0;
  for (std::size_t i = 0; i + lag < s.size(); ++i) {
    sum += static_cast<std::uint64_t>(s[i]) * s[i + lag];
  }
  return static_cast<double>(sum);
}

double compression_length(std::span<const std::uint32_t> s) {
  std::string text;
  text.reserve(s.size() * 4);
  char digits[16];
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i > 0) text.push_back(' ');
    const auto [end, ec] = std::to_chars(digits, digits + sizeof digits, s[i]);
    text.append(digits, end);
  }
  if (text.empty()) return 0.0;
  auto capacity = static_cast<unsigned int>(text.size() + text.size() / 100 + 600);
  std::string out(capacity, '\0');
  const int rc = BZ2_bzBuffToBuffCompress(out.data(), &capacity, text.data(),
                                          static_cast<unsigned int>(text.size()),
                                          kCompressionBlockSize100k, 0, 0);
  if (rc != BZ_OK) throw Error("bzip2 compression failed with code " + std::to_string(rc));
  return static_cast<double>(capacity);
}

StatisticEvaluator::StatisticEvaluator(const Dataset& data) : binary_(data.binary()) {
  validate(data);
  if (data.samples.empty()) throw InsufficientDataError("statistics of an empty dataset");
  if (binary_) {
    median_ = 0.5;
  } else {
    std::vector<std::uint32_t> sorted = data.samples;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t m = sorted.size() / 2;
    median_ = sorted.size() % 2 == 1 ? sorted[m]
                                     : 0.5 * (static_cast<double>(sorted[m - 1]) + sorted[m]);
  }
}

StatisticValues StatisticEvaluator::evaluate(std::span<const std::uint32_t> ordering,
                                             StatisticMask mask) const {
  StatisticValues v;
  v.fill(std::numeric_limits<double>::quiet_NaN());
  auto want = [&](Statistic s) { return mask.test(static_cast<std::size_t>(s)); };

  std::vector<std::uint32_t> conv1;
  std::vector<std::uint32_t> conv2;
  std::span<const std::uint32_t> weights = ordering;  // conversion I view
  std::span<const std::uint32_t> bytes = ordering;    // conversion II view
  if (binary_) {
    conv1 = conversion_one(ordering);
    conv2 = conversion_two(ordering);
    weights = conv1;
    bytes = conv2;
  }

  if (want(Statistic::Excursion)) v[0] = excursion(ordering);
  if (want(Statistic::DirectionalRuns) || want(Statistic::LongestDirectionalRun) ||
      want(Statistic::IncreasesDecreases)) {
    const auto r = directional_runs(weights);
    v[1] = r.runs;
    v[2] = r.longest;
    v[3] = r.increases_decreases;
  }
  if (want(Statistic::MedianRuns) || want(Statistic::LongestMedianRun)) {
    const auto r = median_runs(ordering, median_);
    v[4] = r.runs;
    v[5] = r.longest;
  }
  if (want(Statistic::AverageCollision) || want(Statistic::MaxCollision)) {
    const auto c = collisions(bytes);
    v[6] = c.average;
    v[7] = c.maximum;
  }
  for (std::size_t k = 0; k < kLags.size(); ++k) {
    const auto p = static_cast<std::size_t>(Statistic::Periodicity1) + k;
    const auto c = static_cast<std::size_t>(Statistic::Covariance1) + k;
    if (mask.test(p)) v[p] = periodicity(weights, kLags[k]);
    if (mask.test(c)) v[c] = covariance(weights, kLags[k]);
  }
  if (want(Statistic::Compression)) v[18] = compression_length(ordering);
  return v;
}

}  // namespace ef::sp90b
