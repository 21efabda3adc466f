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

// Naive longest repeated substring: compare every pair of start offsets.
std::size_t naive_lrs(const std::vector<std::uint32_t>& s) {
  std::size_t best = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    for (std::size_t j = i + 1; j < s.size(); ++j) {
      std::size_t k = 0;
      while (j + k < s.size() && s[i + k] == s[j + k]) ++k;
      best = std::max(best, k);
    }
  }
  return best;
}

}  // namespace

TEST_CASE("longest repeated substring matches brute force") {
  CHECK(longest_repeated_substring(std::vector<std::uint32_t>{1, 2, 3, 1, 2, 3, 1}) == 4);
  CHECK(longest_repeated_substring(std::vector<std::uint32_t>{1, 2, 3}) == 0);
  CHECK(longest_repeated_substring(std::vector<std::uint32_t>{5, 5, 5, 5}) == 3);
  std::mt19937_64 gen(1);
  for (int t = 0; t < 30; ++t) {
    std::vector<std::uint32_t> s(50 + t * 7);
    for (auto& v : s) v = static_cast<std::uint32_t>(gen() % (2 + t % 5));
    CHECK(longest_repeated_substring(s) == naive_lrs(s));
  }
}

TEST_CASE("periodic ABAB data fails the repeated-substring test") {
  std::vector<std::uint32_t> s(1000);
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = i % 2 ? 0xB : 0xA;
  const auto out = longest_repeated_substring_test(Dataset(s, 8));
  CHECK(out.test_name == "longest_repeated_substring");
  CHECK(out.statistic == 998);
  CHECK_FALSE(out.pass);
}

TEST_CASE("all-identical symbols fail independence") {
  const Dataset same(std::vector<std::uint32_t>(1000, 42), 8);
  CHECK_FALSE(chi_square_independence(same).pass);
  const Dataset same_bits(std::vector<std::uint32_t>(1000, 1), 1);
  CHECK_FALSE(chi_square_independence(same_bits).pass);
}

TEST_CASE("IID bytes pass all three tests") {
  const auto outcomes = chi_square_tests(iid(1000000, 8, 7));
  REQUIRE(outcomes.size() == 3);
  CHECK(outcomes[0].test_name == "chi_square_independence");
  CHECK(outcomes[1].test_name == "chi_square_goodness_of_fit");
  CHECK(outcomes[2].test_name == "longest_repeated_substring");
  for (const auto& o : outcomes) {
    INFO(o.test_name << " p=" << o.p_value);
    CHECK(o.pass);
  }
}

TEST_CASE("IID bits pass all three tests") {
  for (const auto& o : chi_square_tests(iid(200000, 1, 8))) {
    INFO(o.test_name << " p=" << o.p_value);
    CHECK(o.pass);
  }
}

TEST_CASE("false rejection rate of the chi-square tests on IID data is small") {
  for (int n : {1, 4, 8}) {
    int failures[3] = {0, 0, 0};
    for (std::uint64_t seed = 0; seed < 60; ++seed) {
      const auto outcomes = chi_square_tests(iid(8000, n, 1000 + seed));
      for (int k = 0; k < 3; ++k) failures[k] += outcomes[k].pass ? 0 : 1;
    }
    // alpha = 0.001 over 60 datasets; three failures would be a 1e-5 event.
    for (int k = 0; k < 3; ++k) {
      INFO("n=" << n << " test " << k);
      CHECK(failures[k] <= 2);
    }
  }
}

TEST_CASE("sticky Markov source fails independence") {
  std::mt19937_64 gen(3);
  std::vector<std::uint32_t> s(20000);
  s[0] = 0;
  for (std::size_t i = 1; i < s.size(); ++i) {
    s[i] = (gen() % 10 < 3) ? s[i - 1] : static_cast<std::uint32_t>(gen() >> 56);
  }
  CHECK_FALSE(chi_square_independence(Dataset(s, 8)).pass);

  std::vector<std::uint32_t> bits(20000);
  for (std::size_t i = 1; i < bits.size(); ++i) bits[i] = (gen() % 10 < 3) ? bits[i - 1] : (gen() >> 63);
  CHECK_FALSE(chi_square_independence(Dataset(bits, 1)).pass);
}

TEST_CASE("drifting distribution fails goodness of fit") {
  std::mt19937_64 gen(4);
  std::vector<std::uint32_t> s(50000);
  for (std::size_t i = 0; i < s.size(); ++i) {
    // Symbols 0..15; the first half favours low symbols.
    const bool low = i < s.size() / 2 && gen() % 4 == 0;
    s[i] = low ? static_cast<std::uint32_t>(gen() % 4) : static_cast<std::uint32_t>(gen() % 16);
  }
  const auto out = chi_square_goodness_of_fit(Dataset(s, 4));
  CHECK_FALSE(out.pass);
  CHECK(out.dof > 0);
}

TEST_CASE("chi-square tests need enough data") {
  const Dataset small = iid(99, 8, 1);
  CHECK_THROWS_AS(chi_square_independence(small), InsufficientDataError);
  CHECK_THROWS_AS(chi_square_goodness_of_fit(small), InsufficientDataError);
  CHECK_THROWS_AS(longest_repeated_substring_test(small), InsufficientDataError);
  try {
    chi_square_tests(small);
    FAIL("expected InsufficientDataError");
  } catch (const InsufficientDataError& e) {
    CHECK(std::string(e.what()).find("100") != std::string::npos);
  }
}
