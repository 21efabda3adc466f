#include <cmath>
#include <random>

#include "doctest.h"
#include "entropy_forge/error.hpp"
#include "entropy_forge/extraction.hpp"
#include "entropy_forge/special.hpp"

using namespace ef;

namespace {

VoltageTrace step_trace(std::size_t length, double dt, const std::vector<std::pair<std::size_t, double>>& steps) {
  VoltageTrace t;
  t.dt = dt;
  t.samples.assign(length, 0.0);
  for (const auto& [at, height] : steps) {
    for (std::size_t k = at; k < length; ++k) t.samples[k] += height;
  }
  return t;
}

EventTrain train_at(std::vector<double> times, double duration) {
  EventTrain e;
  e.times = std::move(times);
  e.polarities.assign(e.times.size(), Polarity::Rise);
  e.source_dt = 1e-9;
  e.duration = duration;
  return e;
}

}  // namespace

TEST_CASE("highpass rejects DC") {
  VoltageTrace t;
  t.dt = 1e-3;
  t.samples.assign(5000, 0.7);
  const VoltageTrace y = highpass(t, 5.0);
  for (double v : y.samples) CHECK(v == 0.0);
}

TEST_CASE("highpass step response peaks at the step and decays with RC") {
  const double dt = 1e-4;
  const double cutoff = 10.0;
  const double h = 2.0;
  const std::size_t at = 1000;
  const VoltageTrace y = highpass(step_trace(20000, dt, {{at, h}}), cutoff);
  const double rc = 1.0 / (2.0 * M_PI * cutoff);
  CHECK(y.samples[at] == doctest::Approx(h).epsilon(0.01));
  std::size_t k = at;
  while (y.samples[k] > h / std::exp(1.0)) ++k;
  CHECK((k - at) * dt == doctest::Approx(rc).epsilon(0.05));
  for (std::size_t j = 0; j < at; ++j) CHECK(y.samples[j] == 0.0);
}

TEST_CASE("highpass output of a long stationary input has near-zero mean") {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  VoltageTrace t;
  t.dt = 1e-5;
  for (int i = 0; i < 200000; ++i) t.samples.push_back(3.0 + (u(gen) < 0.5 ? 0.0 : 0.01));
  const VoltageTrace y = highpass(t, 200.0);
  double mean = 0.0;
  for (double v : y.samples) mean += v;
  mean /= static_cast<double>(y.samples.size());
  CHECK(std::abs(mean) < 0.01 * 0.01);
}

TEST_CASE("highpass preconditions") {
  VoltageTrace t;
  t.dt = 1e-3;
  CHECK_THROWS_AS(highpass(t, 1.0), InsufficientDataError);
  t.samples = {0.0, 1.0};
  CHECK_THROWS_AS(highpass(t, 0.0), ParameterError);
  CHECK_THROWS_AS(highpass(t, 500.0), ParameterError);
  CHECK_NOTHROW(highpass(t, 499.0));
}

TEST_CASE("flat trace yields no events") {
  VoltageTrace t;
  t.dt = 1e-3;
  t.samples.assign(1000, 0.0);
  CHECK(detect_edges(t, 0.1, 0.0).size() == 0);
}

TEST_CASE("steps at 1.0 s and 2.5 s are detected within one sample") {
  const double dt = 1e-3;
  const VoltageTrace raw = step_trace(4000, dt, {{1000, 1.0}, {2500, -1.0}});
  const VoltageTrace y = highpass(raw, 5.0);
  const EventTrain e = detect_edges(y, 0.2, 2 * dt);
  REQUIRE(e.size() == 2);
  CHECK(std::abs(e.times[0] - 1.0) <= dt);
  CHECK(std::abs(e.times[1] - 2.5) <= dt);
  CHECK(e.polarities[0] == Polarity::Rise);
  CHECK(e.polarities[1] == Polarity::Fall);
  CHECK(e.duration == doctest::Approx(4.0));
}

TEST_CASE("two steps within the dead time give one event") {
  const double dt = 1e-3;
  const VoltageTrace raw = step_trace(4000, dt, {{1000, 1.0}, {1003, -1.0}});
  const EventTrain e = detect_edges(highpass(raw, 5.0), 0.2, 10 * dt);
  CHECK(e.size() == 1);
}

TEST_CASE("event times respect the dead time") {
  const double dt = 1e-3;
  std::vector<std::pair<std::size_t, double>> steps;
  for (std::size_t k = 100; k < 9000; k += 7) steps.emplace_back(k, (k / 7) % 2 ? 1.0 : -1.0);
  const VoltageTrace y = highpass(step_trace(10000, dt, steps), 5.0);
  const double dead = 20 * dt;
  const EventTrain e = detect_edges(y, 0.2, dead);
  REQUIRE(e.size() > 10);
  for (std::size_t i = 1; i < e.size(); ++i) {
    CHECK(e.times[i] > e.times[i - 1]);
    CHECK(e.times[i] - e.times[i - 1] >= dead - 1e-9);
  }
}

TEST_CASE("detect_edges preconditions") {
  VoltageTrace t;
  t.dt = 1e-3;
  t.samples = {0.0, 0.0};
  CHECK_THROWS_AS(detect_edges(t, 0.0, 0.0), ParameterError);
  CHECK_THROWS_AS(detect_edges(t, 0.1, -1.0), ParameterError);
}

TEST_CASE("symbolize maps bin offsets to symbols") {
  const double w = 1e-6;
  const double block = 256 * w;
  const EventTrain e = train_at({0.5 * w, block + 17.5 * w, 2 * block + 255.5 * w}, 3 * block);
  const SymbolStream s = symbolize(e, w, 8);
  CHECK(s.alphabet_size() == 256);
  CHECK(s.symbols == std::vector<std::uint32_t>{0, 17, 255});
  CHECK(s.dropped_blocks == 0);
  CHECK(s.empty_blocks == 0);
}

TEST_CASE("symbolize drops multi-event blocks and counts empty ones") {
  const double w = 1.0;
  // n = 2: blocks of 4 bins. Block 0 has two events, block 1 is empty,
  // block 2 has one event in bin 3, block 3 is partial and ignored.
  const EventTrain e = train_at({0.5, 2.5, 11.5, 12.5}, 14.0);
  const SymbolStream s = symbolize(e, w, 2);
  CHECK(s.symbols == std::vector<std::uint32_t>{3});
  CHECK(s.dropped_blocks == 1);
  CHECK(s.empty_blocks == 1);
  CHECK(symbolize(train_at({}, 14.0), w, 2).symbols.empty());
}

TEST_CASE("symbolize preconditions") {
  const EventTrain e = train_at({}, 1.0);
  CHECK_THROWS_AS(symbolize(e, 0.0, 8), ParameterError);
  CHECK_THROWS_AS(symbolize(e, 1e-3, 0), ParameterError);
  CHECK_THROWS_AS(symbolize(e, 1e-3, 17), ParameterError);
}

TEST_CASE("to_bits expands MSB first") {
  SymbolStream s;
  s.n = 8;
  s.symbols = {0};
  CHECK(to_bits(s) == std::vector<std::uint8_t>(8, 0));
  s.symbols = {255};
  CHECK(to_bits(s) == std::vector<std::uint8_t>(8, 1));
  s.n = 3;
  s.symbols = {5, 2};
  CHECK(to_bits(s) == std::vector<std::uint8_t>{1, 0, 1, 0, 1, 0});
  s.symbols = {8};
  CHECK_THROWS_AS(to_bits(s), ParameterError);
}

TEST_CASE("to_bits then from_bits is the identity") {
  std::mt19937_64 gen(11);
  for (int n = 1; n <= 16; ++n) {
    SymbolStream s;
    s.n = n;
    for (int i = 0; i < 500; ++i) s.symbols.push_back(static_cast<std::uint32_t>(gen() >> (64 - n)));
    const auto bits = to_bits(s);
    CHECK(bits.size() == 500u * n);
    CHECK(from_bits(bits, n).symbols == s.symbols);
  }
}

TEST_CASE("symbol, dropped and empty counts add up to the block count") {
  std::mt19937_64 gen(5);
  std::exponential_distribution<double> gap(1.0 / 200.0);
  for (int n : {1, 4, 8}) {
    const double w = 1.0;
    std::vector<double> times;
    double t = 0.0;
    while ((t += gap(gen)) < 1e6) times.push_back(t);
    const EventTrain e = train_at(times, 1e6);
    const SymbolStream s = symbolize(e, w, n);
    const auto blocks = static_cast<std::size_t>(std::floor(1e6 / (w * (1 << n))));
    CHECK(s.symbols.size() + s.dropped_blocks + s.empty_blocks == blocks);
  }
}

TEST_CASE("uniform event phases give uniform symbols") {
  std::mt19937_64 gen(9);
  std::exponential_distribution<double> gap(1.0 / 256.0);
  std::vector<double> times;
  double t = 0.0;
  const double duration = 256.0 * 300000;
  while ((t += gap(gen)) < duration) times.push_back(t);
  const SymbolStream s = symbolize(train_at(times, duration), 1.0, 8);
  REQUIRE(s.symbols.size() >= 100000);
  std::vector<double> observed(256, 0.0);
  for (auto v : s.symbols) observed[v] += 1;
  const std::vector<double> p(256, 1.0 / 256);
  CHECK(chi_square_gof(observed, p).p_value > 0.001);
}

TEST_CASE("noise floor estimate recovers sigma") {
  std::mt19937_64 gen(1);
  std::normal_distribution<double> noise(0.0, 3e-4);
  VoltageTrace t;
  t.dt = 1e-7;
  for (int i = 0; i < 100000; ++i) t.samples.push_back(0.5 + noise(gen));
  CHECK(estimate_noise_sigma(t, 100000) == doctest::Approx(3e-4).epsilon(0.02));
}

TEST_CASE("extraction is deterministic and respects alphabet bounds") {
  DeviceParams p;
  p.duration = 0.08;
  const VoltageTrace trace = simulate_trace(p);
  ExtractionConfig c;
  const ExtractionResult a = extract(trace, c);
  const ExtractionResult b = extract(trace, c);
  CHECK(a.stream.symbols == b.stream.symbols);
  CHECK(a.stream.dropped_blocks == b.stream.dropped_blocks);
  CHECK(a.stream.symbols.size() > 500);
  CHECK_NOTHROW(validate(a.stream));
  CHECK(a.threshold > 0.0);
}

TEST_CASE("noiseless trace needs an explicit threshold") {
  DeviceParams p;
  p.duration = 0.01;
  p.noise_sigma = 0.0;
  p.rc_time_constant = 0.0;
  const VoltageTrace trace = simulate_trace(p);
  ExtractionConfig c;
  CHECK_THROWS_AS(extract(trace, c), ParameterError);
  c.threshold = p.level_step / 2;
  CHECK(extract(trace, c).events > 0);
}

TEST_CASE("acquire_symbols collects exactly the target") {
  DeviceParams p;
  p.duration = 0.08;
  ExtractionConfig c;
  const SymbolStream s = acquire_symbols(p, c, 3000);
  CHECK(s.symbols.size() == 3000);
  CHECK(acquire_symbols(p, c, 3000).symbols == s.symbols);
  CHECK_THROWS_AS(acquire_symbols(p, c, 1000000, 2), InsufficientDataError);
}
