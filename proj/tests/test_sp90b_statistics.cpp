#include <bzlib.h>

#include <algorithm>
#include <random>
#include <set>
#include <sstream>

#include "doctest.h"
#include "entropy_forge/error.hpp"
#include "entropy_forge/sp90b.hpp"

using namespace ef;
using namespace ef::sp90b;

namespace {

using Samples = std::vector<std::uint32_t>;

Samples random_samples(std::size_t count, std::uint32_t alphabet, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_int_distribution<std::uint32_t> u(0, alphabet - 1);
  Samples s(count);
  for (auto& v : s) v = u(gen);
  return s;
}

// Naive reference implementations written straight from the definitions.

double naive_excursion(const Samples& s) {
  long double mean = 0;
  for (auto v : s) mean += v;
  mean /= s.size();
  long double best = 0, prefix = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    prefix += s[i];
    best = std::max(best, std::abs(prefix - (i + 1) * mean));
  }
  return static_cast<double>(best);
}

std::vector<int> signs_of(const Samples& s) {
  std::vector<int> out;
  for (std::size_t i = 0; i + 1 < s.size(); ++i) out.push_back(s[i] > s[i + 1] ? -1 : 1);
  return out;
}

std::pair<double, double> runs_of(const std::vector<int>& x) {
  double runs = 0, longest = 0, current = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (i == 0 || x[i] != x[i - 1]) {
      ++runs;
      current = 0;
    }
    longest = std::max(longest, ++current);
  }
  return {runs, longest};
}

std::pair<double, double> naive_collisions(const Samples& s) {
  std::vector<double> lengths;
  std::size_t i = 0;
  while (i < s.size()) {
    bool found = false;
    for (std::size_t j = i + 1; j < s.size() && !found; ++j) {
      for (std::size_t k = i; k < j; ++k) {
        if (s[k] == s[j]) {
          lengths.push_back(static_cast<double>(j - i + 1));
          i = j + 1;
          found = true;
          break;
        }
      }
    }
    if (!found) break;
  }
  if (lengths.empty()) return {0, 0};
  double sum = 0;
  for (double l : lengths) sum += l;
  return {sum / lengths.size(), *std::max_element(lengths.begin(), lengths.end())};
}

double naive_compression(const Samples& s) {
  std::ostringstream text;
  for (std::size_t i = 0; i < s.size(); ++i) text << (i ? " " : "") << s[i];
  const std::string in = text.str();
  std::string out(in.size() * 2 + 1000, '\0');
  auto len = static_cast<unsigned int>(out.size());
  std::string src = in;
  REQUIRE(BZ2_bzBuffToBuffCompress(out.data(), &len, src.data(), static_cast<unsigned int>(src.size()), 5, 0, 0) ==
          BZ_OK);
  return len;
}

StatisticValues naive_all(const Samples& s, bool binary, double median) {
  StatisticValues v{};
  Samples weights = s;
  Samples bytes = s;
  if (binary) {
    weights.clear();
    bytes.clear();
    for (std::size_t b = 0; b + 8 <= s.size(); b += 8) {
      std::uint32_t ones = 0, value = 0;
      for (std::size_t i = 0; i < 8; ++i) {
        ones += s[b + i];
        value = value * 2 + s[b + i];
      }
      weights.push_back(ones);
      bytes.push_back(value);
    }
  }
  v[0] = naive_excursion(s);
  const auto sg = signs_of(weights);
  const auto [runs, longest] = runs_of(sg);
  v[1] = runs;
  v[2] = longest;
  const auto ups = std::count(sg.begin(), sg.end(), 1);
  v[3] = static_cast<double>(std::max<std::ptrdiff_t>(ups, static_cast<std::ptrdiff_t>(sg.size()) - ups));
  std::vector<int> med;
  for (auto x : s) med.push_back(x < median ? -1 : 1);
  const auto [mruns, mlongest] = runs_of(med);
  v[4] = mruns;
  v[5] = mlongest;
  const auto [avg, mx] = naive_collisions(bytes);
  v[6] = avg;
  v[7] = mx;
  for (std::size_t k = 0; k < kLags.size(); ++k) {
    double p = 0, c = 0;
    for (std::size_t i = 0; i + kLags[k] < weights.size(); ++i) {
      p += weights[i] == weights[i + kLags[k]];
      c += static_cast<double>(weights[i]) * weights[i + kLags[k]];
    }
    v[8 + k] = p;
    v[13 + k] = c;
  }
  v[18] = naive_compression(s);
  return v;
}

}  // namespace

TEST_CASE("directional runs examples") {
  const Samples inc{1, 2, 3, 4, 5, 6};
  CHECK(directional_runs(inc).runs == 1);
  CHECK(directional_runs(inc).longest == 5);
  CHECK(directional_runs(inc).increases_decreases == 5);
  const Samples s{2, 1, 3, 1};
  CHECK(directional_runs(s).runs == 3);
  CHECK(directional_runs(s).longest == 1);
  CHECK(directional_runs(s).increases_decreases == 2);
  // Equal neighbours count as increases.
  CHECK(directional_runs(Samples{4, 4, 4}).runs == 1);
}

TEST_CASE("statistic examples") {
  CHECK(excursion(Samples{1, 3}) == 1.0);
  CHECK(median_runs(Samples{1, 5, 6, 2, 2, 9}, 3.5).runs == 4);
  CHECK(median_runs(Samples{1, 5, 6, 2, 2, 9}, 3.5).longest == 2);
  const auto c = collisions(Samples{1, 2, 1, 3, 3, 4, 5});
  CHECK(c.average == 2.5);
  CHECK(c.maximum == 3);
  CHECK(periodicity(Samples{1, 2, 1, 2, 1}, 2) == 3);
  CHECK(covariance(Samples{1, 2, 3}, 1) == 8);
  CHECK(conversion_one(Samples{1, 1, 0, 1, 0, 0, 0, 1, 1}) == Samples{4});
  CHECK(conversion_two(Samples{1, 1, 0, 1, 0, 0, 0, 1, 1}) == Samples{0xD1});
}

TEST_CASE("statistics agree with naive implementations on permuted data") {
  for (int n : {1, 3, 8}) {
    const Samples original = random_samples(997, 1u << n, 40 + n);
    const Dataset data(original, n);
    const StatisticEvaluator eval(data);
    Samples sorted = original;
    std::sort(sorted.begin(), sorted.end());
    const double median = n == 1 ? 0.5
                          : sorted.size() % 2 ? sorted[sorted.size() / 2]
                                              : 0.5 * (sorted[sorted.size() / 2 - 1] + sorted[sorted.size() / 2]);
    CHECK(eval.median() == median);
    Samples ordering = original;
    for (std::uint64_t i = 0; i < 5; ++i) {
      shuffle(ordering, 99, i);
      const StatisticValues got = eval.evaluate(ordering, StatisticMask().set());
      const StatisticValues want = naive_all(ordering, n == 1, median);
      for (std::size_t k = 0; k < kStatisticCount; ++k) {
        INFO("n=" << n << " statistic " << name(static_cast<Statistic>(k)));
        CHECK(got[k] == doctest::Approx(want[k]).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("evaluate leaves unrequested statistics unset") {
  const Dataset data(random_samples(200, 256, 1), 8);
  StatisticMask mask;
  mask.set(static_cast<std::size_t>(Statistic::Periodicity8));
  const auto v = StatisticEvaluator(data).evaluate(data.samples, mask);
  CHECK(!std::isnan(v[static_cast<std::size_t>(Statistic::Periodicity8)]));
  CHECK(std::isnan(v[static_cast<std::size_t>(Statistic::Compression)]));
}

TEST_CASE("shuffle is a seeded permutation") {
  const Samples base = random_samples(500, 256, 2);
  Samples a = base, b = base, c = base;
  shuffle(a, 7, 3);
  shuffle(b, 7, 3);
  shuffle(c, 7, 4);
  CHECK(a == b);
  CHECK(a != c);
  CHECK(a != base);
  std::multiset<std::uint32_t> ma(a.begin(), a.end()), mb(base.begin(), base.end());
  CHECK(ma == mb);
}

TEST_CASE("statistic names are unique") {
  std::set<std::string_view> names;
  for (std::size_t k = 0; k < kStatisticCount; ++k) names.insert(name(static_cast<Statistic>(k)));
  CHECK(names.size() == kStatisticCount);
}

TEST_CASE("dataset validation") {
  CHECK_THROWS_AS(validate(Dataset(Samples{4}, 2)), ParameterError);
  CHECK_THROWS_AS(validate(Dataset(Samples{0}, 17)), ParameterError);
  CHECK_NOTHROW(validate(Dataset(Samples{3}, 2)));
  CHECK_THROWS_AS(StatisticEvaluator(Dataset(Samples{}, 8)), InsufficientDataError);
}
