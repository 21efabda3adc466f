#include <random>

#include "doctest.h"
#include "entropy_forge/error.hpp"
#include "entropy_forge/sp90b.hpp"

using namespace ef;
using namespace ef::sp90b;

namespace {

Dataset iid(std::size_t count, int n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::vector<std::uint32_t> s(count);
  for (auto& v : s) v = static_cast<std::uint32_t>(gen() >> (64 - n));
  return {s, n};
}

bool all_pass(const std::vector<PermutationTestOutcome>& outcomes) {
  for (const auto& o : outcomes) {
    if (!o.pass) return false;
  }
  return true;
}

const PermutationTestOutcome& find(const std::vector<PermutationTestOutcome>& outcomes, Statistic s) {
  return outcomes[static_cast<std::size_t>(s)];
}

}  // namespace

TEST_CASE("rank tail scales with the permutation count") {
  CHECK(rank_tail(10000) == 5);
  CHECK(rank_tail(1000) == 0);
  CHECK(rank_tail(20000) == 10);
}

TEST_CASE("permutation count and data preconditions") {
  PermutationOptions o;
  o.permutations = 99;
  CHECK_THROWS_AS(permutation_test_suite(iid(200, 8, 1), o), ParameterError);
  o.permutations = 100;
  CHECK_THROWS_AS(permutation_test_suite(Dataset({}, 8), o), InsufficientDataError);
}

TEST_CASE("suite is deterministic and independent of the thread count") {
  const Dataset data = iid(2000, 8, 3);
  PermutationOptions o;
  o.permutations = 300;
  o.seed = 17;
  o.threads = 1;
  const auto a = permutation_test_suite(data, o);
  const auto b = permutation_test_suite(data, o);
  o.threads = 3;
  const auto c = permutation_test_suite(data, o);
  REQUIRE(a.size() == kStatisticCount);
  for (std::size_t s = 0; s < kStatisticCount; ++s) {
    CHECK(a[s].counter_higher == b[s].counter_higher);
    CHECK(a[s].counter_equal == b[s].counter_equal);
    CHECK(a[s].counter_higher == c[s].counter_higher);
    CHECK(a[s].counter_equal == c[s].counter_equal);
    CHECK(a[s].permutations == c[s].permutations);
    CHECK(a[s].counter_higher + a[s].counter_equal <= a[s].permutations);
    CHECK(a[s].permutations <= o.permutations);
  }
}

TEST_CASE("early exit never changes a verdict") {
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    std::vector<std::uint32_t> s = iid(1500, 8, seed).samples;
    for (std::size_t i = 0; i < s.size(); i += 8) s[i] = 7;  // some statistics fail
    const Dataset data(s, 8);
    PermutationOptions o;
    o.permutations = 200;
    o.seed = seed;
    const auto fast = permutation_test_suite(data, o);
    o.early_exit = false;
    const auto full = permutation_test_suite(data, o);
    for (std::size_t k = 0; k < kStatisticCount; ++k) {
      CHECK(fast[k].pass == full[k].pass);
      CHECK(full[k].permutations == 200);
    }
  }
}

TEST_CASE("IID data passes and periodic injection fails a periodicity statistic") {
  PermutationOptions o;
  o.permutations = 1000;
  o.seed = 5;
  CHECK(all_pass(permutation_test_suite(iid(5000, 8, 11), o)));

  std::vector<std::uint32_t> s = iid(5000, 8, 12).samples;
  for (std::size_t i = 0; i < s.size(); i += 16) s[i] = 0x5A;
  const auto out = permutation_test_suite(Dataset(s, 8), o);
  CHECK_FALSE(find(out, Statistic::Periodicity16).pass);
  CHECK_FALSE(all_pass(out));
}

TEST_CASE("binary data runs through both conversions") {
  PermutationOptions o;
  o.permutations = 200;
  const auto out = permutation_test_suite(iid(8000, 1, 4), o);
  CHECK(all_pass(out));
  std::vector<std::uint32_t> stuck(8000, 1);
  for (std::size_t i = 0; i < stuck.size(); i += 3) stuck[i] = 0;
  CHECK_FALSE(all_pass(permutation_test_suite(Dataset(stuck, 1), o)));
}

TEST_CASE("excursion verdict is stable under reversal") {
  std::size_t agree = 0;
  const std::size_t trials = 20;
  for (std::uint64_t t = 0; t < trials; ++t) {
    const Dataset data = iid(1000, 8, 100 + t);
    Dataset reversed = data;
    std::reverse(reversed.samples.begin(), reversed.samples.end());
    PermutationOptions o;
    o.permutations = 1000;
    o.seed = 1000 + t;
    const bool forward = find(permutation_test_suite(data, o), Statistic::Excursion).pass;
    o.seed = 5000 + t;
    const bool backward = find(permutation_test_suite(reversed, o), Statistic::Excursion).pass;
    agree += forward == backward ? 1 : 0;
  }
  CHECK(agree >= 19);
}
