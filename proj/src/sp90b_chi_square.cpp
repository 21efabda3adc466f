#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <string>

#include "entropy_forge/error.hpp"
#include "entropy_forge/sp90b.hpp"
#include "entropy_forge/special.hpp"

namespace ef::sp90b {

namespace {

void require_samples(const Dataset& data, std::string_view test) {
  if (data.samples.size() < kChiSquareMinSamples) {
    throw InsufficientDataError(std::string(test) + " needs at least " +
                                std::to_string(kChiSquareMinSamples) + " samples, have " +
                                std::to_string(data.samples.size()));
  }
}

ChiSquareOutcome finish(std::string name, double statistic, double dof) {
  ChiSquareOutcome out;
  out.test_name = std::move(name);
  out.statistic = statistic;
  out.dof = dof;
  out.p_value = chi_square_sf(statistic, dof);
  out.pass = out.p_value >= kChiSquareAlpha;
  return out;
}

ChiSquareOutcome independence_binary(const Dataset& data) {
  const std::size_t length = data.samples.size();
  const double ones = static_cast<double>(std::count(data.samples.begin(), data.samples.end(), 1u));
  const double p1 = ones / static_cast<double>(length);
  const double p0 = 1.0 - p1;
  const double p_min = std::min(p0, p1);
  if (p_min == 0.0) {
    ChiSquareOutcome out;
    out.test_name = "chi_square_independence";
    out.pass = false;
    out.p_value = 0.0;
    return out;
  }
  int m = 0;
  for (int candidate = 11; candidate >= 2; --candidate) {
    const double tuples = std::floor(static_cast<double>(length) / candidate);
    if (tuples * std::pow(p_min, candidate) >= 5.0) {
      m = candidate;
      break;
    }
  }
  if (m == 0) throw InsufficientDataError("binary independence test: too few samples for 2-bit tuples");
  const std::size_t tuples = length / static_cast<std::size_t>(m);
  std::vector<double> observed(std::size_t{1} << m, 0.0);
  for (std::size_t t = 0; t < tuples; ++t) {
    std::uint32_t w = 0;
    for (int b = 0; b < m; ++b) w = (w << 1) | data.samples[t * m + b];
    observed[w] += 1.0;
  }
  double statistic = 0.0;
  for (std::uint32_t w = 0; w < observed.size(); ++w) {
    const int h = std::popcount(w);
    const double e = static_cast<double>(tuples) * std::pow(p1, h) * std::pow(p0, m - h);
    statistic += (observed[w] - e) * (observed[w] - e) / e;
  }
  return finish("chi_square_independence", statistic, static_cast<double>(observed.size()) - 2.0);
}

ChiSquareOutcome independence_symbols(const Dataset& data) {
  const std::size_t length = data.samples.size();
  std::vector<std::uint64_t> counts(std::size_t{1} << data.n, 0);
  for (std::uint32_t s : data.samples) ++counts[s];
  std::vector<std::uint32_t> present;
  for (std::uint32_t s = 0; s < counts.size(); ++s) {
    if (counts[s] > 0) present.push_back(s);
  }
  if (present.size() < 2) {
    // A single repeated value cannot be shown independent.
    ChiSquareOutcome out;
    out.test_name = "chi_square_independence";
    out.p_value = 0.0;
    out.pass = false;
    return out;
  }

  // Symbols are grouped, most frequent first, into classes holding at least
  // sqrt(5 / (L - 1)) of the mass each, so every class pair expects >= 5
  // overlapping pairs. Classes depend only on the symbol counts, which keeps
  // the class-pair table a plain contingency test with (k - 1)^2 dof.
  std::stable_sort(present.begin(), present.end(),
                   [&](std::uint32_t a, std::uint32_t b) { return counts[a] > counts[b]; });
  const double pairs = static_cast<double>(length - 1);
  const double total = static_cast<double>(length);
  const double min_mass = std::sqrt(5.0 / pairs);
  std::vector<std::int32_t> group_of(counts.size(), -1);
  std::vector<double> mass;
  double acc = 0.0;
  for (std::uint32_t s : present) {
    if (mass.empty() || acc >= min_mass) {
      mass.push_back(0.0);
      acc = 0.0;
    }
    group_of[s] = static_cast<std::int32_t>(mass.size() - 1);
    const double p = static_cast<double>(counts[s]) / total;
    mass.back() += p;
    acc += p;
  }
  if (mass.size() >= 2 && mass.back() < min_mass) {
    const auto last = static_cast<std::int32_t>(mass.size() - 1);
    mass[mass.size() - 2] += mass.back();
    mass.pop_back();
    for (auto& g : group_of) {
      if (g == last) g = last - 1;
    }
  }
  const std::size_t k = mass.size();
  if (k < 2) {
    throw InsufficientDataError("independence test: too few samples to form two symbol classes");
  }

  std::vector<double> observed(k * k, 0.0);
  for (std::size_t i = 0; i + 1 < length; ++i) {
    observed[static_cast<std::size_t>(group_of[data.samples[i]]) * k +
             static_cast<std::size_t>(group_of[data.samples[i + 1]])] += 1.0;
  }
  double statistic = 0.0;
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t b = 0; b < k; ++b) {
      const double e = pairs * mass[a] * mass[b];
      statistic += (observed[a * k + b] - e) * (observed[a * k + b] - e) / e;
    }
  }
  const double dof = static_cast<double>((k - 1) * (k - 1));
  return finish("chi_square_independence", statistic, dof);
}

}  // namespace

ChiSquareOutcome chi_square_independence(const Dataset& data) {
  validate(data);
  require_samples(data, "chi-square independence");
  return data.binary() ? independence_binary(data) : independence_symbols(data);
}

ChiSquareOutcome chi_square_goodness_of_fit(const Dataset& data) {
  validate(data);
  require_samples(data, "chi-square goodness of fit");
  constexpr std::size_t kSubsets = 10;
  const std::size_t subset = data.samples.size() / kSubsets;
  const std::size_t used = subset * kSubsets;
  std::vector<std::uint64_t> counts(std::size_t{1} << data.n, 0);
  for (std::size_t i = 0; i < used; ++i) ++counts[data.samples[i]];

  // Bin map: symbols expecting >= 5 per subset keep their own bin, the
  // rest share one pooled bin.
  std::vector<std::int32_t> bin_of(counts.size(), -1);
  std::vector<double> expected;
  for (std::uint32_t s = 0; s < counts.size(); ++s) {
    const double e = static_cast<double>(counts[s]) / kSubsets;
    if (counts[s] > 0 && e >= 5.0) {
      bin_of[s] = static_cast<std::int32_t>(expected.size());
      expected.push_back(e);
    }
  }
  double pooled = 0.0;
  for (std::uint32_t s = 0; s < counts.size(); ++s) {
    if (counts[s] > 0 && bin_of[s] < 0) pooled += static_cast<double>(counts[s]) / kSubsets;
  }
  std::int32_t pooled_bin = -1;
  if (pooled > 0.0) {
    if (pooled >= 5.0 || expected.empty()) {
      pooled_bin = static_cast<std::int32_t>(expected.size());
      expected.push_back(pooled);
    } else {
      // Too small alone: fold into the smallest regular bin.
      pooled_bin = static_cast<std::int32_t>(
          std::min_element(expected.begin(), expected.end()) - expected.begin());
      expected[static_cast<std::size_t>(pooled_bin)] += pooled;
    }
    for (std::uint32_t s = 0; s < counts.size(); ++s) {
      if (counts[s] > 0 && bin_of[s] < 0) bin_of[s] = pooled_bin;
    }
  }

  const std::size_t bins = expected.size();
  if (bins < 2) {
    ChiSquareOutcome out;
    out.test_name = "chi_square_goodness_of_fit";
    out.pass = true;  // a single occupied bin is trivially homogeneous across subsets
    return out;
  }
  double statistic = 0.0;
  std::vector<double> observed(bins);
  for (std::size_t k = 0; k < kSubsets; ++k) {
    std::fill(observed.begin(), observed.end(), 0.0);
    for (std::size_t i = k * subset; i < (k + 1) * subset; ++i) {
      observed[static_cast<std::size_t>(bin_of[data.samples[i]])] += 1.0;
    }
    for (std::size_t b = 0; b < bins; ++b) {
      statistic += (observed[b] - expected[b]) * (observed[b] - expected[b]) / expected[b];
    }
  }
  return finish("chi_square_goodness_of_fit", statistic,
                static_cast<double>((kSubsets - 1) * (bins - 1)));
}

std::size_t longest_repeated_substring(std::span<const std::uint32_t> s) {
  const std::size_t n = s.size();
  if (n < 2) return 0;
  // Suffix array by prefix doubling, then Kasai's LCP.
  std::vector<std::size_t> sa(n);
  std::vector<std::int64_t> rank(n);
  std::vector<std::int64_t> next_rank(n);
  std::iota(sa.begin(), sa.end(), std::size_t{0});
  for (std::size_t i = 0; i < n; ++i) rank[i] = s[i];
  for (std::size_t k = 1;; k <<= 1) {
    auto key = [&](std::size_t i) {
      return std::pair<std::int64_t, std::int64_t>(rank[i], i + k < n ? rank[i + k] : -1);
    };
    std::sort(sa.begin(), sa.end(), [&](std::size_t a, std::size_t b) { return key(a) < key(b); });
    next_rank[sa[0]] = 0;
    for (std::size_t i = 1; i < n; ++i) {
      next_rank[sa[i]] = next_rank[sa[i - 1]] + (key(sa[i - 1]) < key(sa[i]) ? 1 : 0);
    }
    rank.swap(next_rank);
    if (rank[sa[n - 1]] == static_cast<std::int64_t>(n - 1) || k >= n) break;
  }
  std::vector<std::size_t> inverse(n);
  for (std::size_t i = 0; i < n; ++i) inverse[sa[i]] = i;
  std::size_t best = 0;
  std::size_t h = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (inverse[i] == 0) {
      h = 0;
      continue;
    }
    const std::size_t j = sa[inverse[i] - 1];
    while (i + h < n && j + h < n && s[i + h] == s[j + h]) ++h;
    best = std::max(best, h);
    if (h > 0) --h;
  }
  return best;
}

ChiSquareOutcome longest_repeated_substring_test(const Dataset& data) {
  validate(data);
  require_samples(data, "longest repeated substring");
  const std::size_t length = data.samples.size();
  std::vector<std::uint64_t> counts(std::size_t{1} << data.n, 0);
  for (std::uint32_t v : data.samples) ++counts[v];
  double collision = 0.0;
  for (std::uint64_t c : counts) {
    const double p = static_cast<double>(c) / static_cast<double>(length);
    collision += p * p;
  }
  const std::size_t w = longest_repeated_substring(data.samples);
  ChiSquareOutcome out;
  out.test_name = "longest_repeated_substring";
  out.statistic = static_cast<double>(w);
  // P(X >= 1) with X the number of colliding W-length substring pairs.
  const double substrings = static_cast<double>(length - w + 1);
  const double pairs = substrings * (substrings - 1.0) / 2.0;
  const double p_match = std::pow(collision, static_cast<double>(w));
  out.p_value = p_match >= 1.0 ? 1.0 : -std::expm1(pairs * std::log1p(-p_match));
  out.pass = out.p_value >= kLrsAlpha;
  return out;
}

std::vector<ChiSquareOutcome> chi_square_tests(const Dataset& data) {
  return {chi_square_independence(data), chi_square_goodness_of_fit(data),
          longest_repeated_substring_test(data)};
}

}  // namespace ef::sp90b
