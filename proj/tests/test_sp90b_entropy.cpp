#include <boost/multiprecision/cpp_bin_float.hpp>
#include <random>

#include "doctest.h"
#include "entropy_forge/error.hpp"
#include "entropy_forge/sp90b.hpp"

using namespace ef;
using namespace ef::sp90b;

namespace {

using Big = boost::multiprecision::cpp_bin_float_50;

// Extended-precision evaluation of the MCV bound.
double big_h(std::uint64_t max_count, std::uint64_t samples) {
  const Big p = Big(max_count) / Big(samples);
  Big pu = p + Big("2.576") * sqrt(p * (1 - p) / Big(samples - 1));
  if (pu > 1) pu = 1;
  return static_cast<double>(-log(pu) / log(Big(2)));
}

Dataset iid(std::size_t count, int n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::vector<std::uint32_t> s(count);
  for (auto& v : s) v = static_cast<std::uint32_t>(gen() >> (64 - n));
  return {s, n};
}

RestartMatrix iid_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  RestartMatrix m;
  m.rows = rows;
  m.cols = cols;
  m.n = 8;
  m.data = iid(rows * cols, 8, seed).samples;
  return m;
}

}  // namespace

TEST_CASE("MCV example N=1000, max count 300") {
  const McvEstimate e = mcv_from_count(300, 1000);
  CHECK(e.p_hat == 0.3);
  // 0.3 + 2.576 * sqrt(0.21 / 999)
  CHECK(e.p_upper == doctest::Approx(0.3373485).epsilon(1e-6));
  CHECK(e.h_min == doctest::Approx(1.5676885).epsilon(1e-6));
  CHECK(std::abs(e.h_min - big_h(300, 1000)) < 1e-12);
}

TEST_CASE("MCV matches the extended-precision oracle") {
  std::mt19937_64 gen(5);
  for (int t = 0; t < 200; ++t) {
    const std::uint64_t n = 2 + gen() % 2000000;
    const std::uint64_t max = 1 + gen() % n;
    const McvEstimate e = mcv_from_count(max, n);
    CHECK(std::abs(e.h_min - big_h(max, n)) < 1e-12);
    CHECK(e.p_hat <= e.p_upper);
    CHECK(e.p_upper <= 1.0);
    CHECK(e.h_min >= 0.0);
  }
}

TEST_CASE("MCV examples and preconditions") {
  const McvEstimate same = mcv_estimate(Dataset(std::vector<std::uint32_t>(50, 3), 8));
  CHECK(same.p_hat == 1.0);
  CHECK(same.p_upper == 1.0);
  CHECK(same.h_min == 0.0);
  CHECK_THROWS_AS(mcv_estimate(Dataset({1}, 8)), InsufficientDataError);
  CHECK_THROWS_AS(mcv_from_count(0, 10), ParameterError);
  CHECK_THROWS_AS(mcv_from_count(11, 10), ParameterError);
  const std::vector<std::uint32_t> raw{1, 2, 2, 3, 2};
  CHECK(mcv_estimate(std::span<const std::uint32_t>(raw)).p_hat == 0.6);
  CHECK(mcv_estimate(Dataset(raw, 2)).p_hat == 0.6);
}

TEST_CASE("MCV entropy is non-increasing in the most common count") {
  double previous = 1e9;
  for (std::uint64_t c = 1; c <= 10000; c += 37) {
    const double h = mcv_from_count(c, 10000).h_min;
    CHECK(h <= previous);
    previous = h;
  }
}

TEST_CASE("uniform 8-bit stream has min-entropy in [7.5, 8)") {
  const MinEntropy m = min_entropy(iid(1000000, 8, 9));
  CHECK(m.min_entropy >= 7.5);
  CHECK(m.min_entropy < 8.0);
  CHECK(m.h_symbol < 8.0);
  CHECK(m.min_entropy == std::min(m.h_symbol, 8 * m.h_bitstring));
}

TEST_CASE("bitstring estimate counts the MSB-first expansion") {
  // 0b11 and 0b01 at n = 2: three ones in four bits.
  const MinEntropy m = min_entropy(Dataset({3, 1}, 2));
  CHECK(m.bitstring.p_hat == 0.75);
  const MinEntropy b = min_entropy(iid(10000, 1, 3));
  CHECK(b.h_symbol == b.h_bitstring);
  CHECK(b.min_entropy == b.h_symbol);
}

TEST_CASE("restart sanity check fails on a stuck row") {
  RestartMatrix m = iid_matrix(1000, 1000, 4);
  for (std::size_t c = 0; c < m.cols; ++c) m.data[17 * m.cols + c] = 9;
  const RestartResult r = restart_tests(m, 7.86);
  CHECK(r.max_row_count == 1000);
  CHECK_FALSE(r.sanity_pass);
}

TEST_CASE("IID restart matrix passes with estimates near the sequential one") {
  const MinEntropy sequential = min_entropy(iid(1000000, 8, 21));
  const RestartResult r = restart_tests(iid_matrix(1000, 1000, 22), sequential.min_entropy);
  CHECK(r.sanity_pass);
  CHECK(r.validation_pass);
  CHECK(r.row_tail >= kRestartAlpha);
  CHECK(r.col_tail >= kRestartAlpha);
  CHECK(std::abs(r.rows.min_entropy - sequential.min_entropy) < 0.05);
  CHECK(std::abs(r.cols.min_entropy - sequential.min_entropy) < 0.05);
}

TEST_CASE("restart serializations and preconditions") {
  RestartMatrix m;
  m.rows = 2;
  m.cols = 3;
  m.n = 4;
  m.data = {1, 2, 3, 4, 5, 6};
  CHECK(m.row_dataset().samples == std::vector<std::uint32_t>{1, 2, 3, 4, 5, 6});
  CHECK(m.column_dataset().samples == std::vector<std::uint32_t>{1, 4, 2, 5, 3, 6});
  CHECK_THROWS_AS(restart_tests(m, 0.0), ParameterError);
  CHECK_THROWS_AS(restart_tests(m, 5.0), ParameterError);
  m.data.pop_back();
  CHECK_THROWS_AS(restart_tests(m, 2.0), ParameterError);
}
