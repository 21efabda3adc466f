#include "entropy_forge/extraction.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "entropy_forge/error.hpp"
#include "entropy_forge/rng.hpp"

namespace ef {

void validate(const SymbolStream& stream) {
  if (stream.n < 1 || stream.n > 16) {
    throw ParameterError("symbol width n must be in [1, 16], got " + std::to_string(stream.n));
  }
  const std::uint32_t k = stream.alphabet_size();
  for (std::uint32_t s : stream.symbols) {
    if (s >= k) {
      throw ParameterError("symbol " + std::to_string(s) + " out of range for n=" +
                           std::to_string(stream.n));
    }
  }
}

VoltageTrace highpass(const VoltageTrace& trace, double cutoff_hz) {
  validate(trace);
  const double nyquist = 0.5 / trace.dt;
  if (!(cutoff_hz > 0.0) || !(cutoff_hz < nyquist)) {
    throw ParameterError("high-pass cutoff must lie in (0, fs/2)");
  }
  const double rc = 1.0 / (2.0 * std::numbers::pi * cutoff_hz);
  const double a = rc / (rc + trace.dt);

  VoltageTrace out;
  out.dt = trace.dt;
  out.meta = trace.meta;
  out.samples.resize(trace.samples.size());
  double y = 0.0;
  double previous = trace.samples.front();
  for (std::size_t k = 0; k < trace.samples.size(); ++k) {
    const double x = trace.samples[k];
    y = a * (y + x - previous);
    previous = x;
    out.samples[k] = y;
  }
  return out;
}

EventTrain detect_edges(const VoltageTrace& filtered, double threshold, double dead_time,
                        double rearm_fraction, double same_polarity_holdoff) {
  validate(filtered);
  if (!(threshold > 0.0)) throw ParameterError("edge threshold must be > 0");
  if (!(dead_time >= 0.0)) throw ParameterError("dead_time must be >= 0");
  if (!(rearm_fraction >= 0.0 && rearm_fraction <= 1.0)) {
    throw ParameterError("rearm_fraction must lie in [0, 1]");
  }
  if (!(same_polarity_holdoff >= 0.0)) throw ParameterError("holdoff must be >= 0");

  EventTrain train;
  train.source_dt = filtered.dt;
  train.duration = filtered.duration();

  const double rearm_level = rearm_fraction * threshold;
  // Dead time measured in whole samples; events are suppressed while
  // (k - last) * dt < dead_time.
  const double dead_samples = dead_time / filtered.dt;
  const double holdoff_samples = std::max(dead_samples, same_polarity_holdoff / filtered.dt);
  bool armed = true;
  bool have_last = false;
  std::size_t last = 0;
  Polarity last_polarity = Polarity::Rise;

  for (std::size_t k = 0; k < filtered.samples.size(); ++k) {
    const double y = filtered.samples[k];
    const double magnitude = std::abs(y);
    const bool dead = have_last && static_cast<double>(k - last) < dead_samples * (1.0 - 1e-12);
    const bool holding =
        have_last && static_cast<double>(k - last) < holdoff_samples * (1.0 - 1e-12);
    if (!armed && !holding && magnitude < rearm_level) armed = true;
    if (magnitude < threshold || dead) continue;

    const Polarity polarity = y > 0.0 ? Polarity::Rise : Polarity::Fall;
    if (armed || polarity != last_polarity) {
      train.times.push_back(static_cast<double>(k) * filtered.dt);
      train.polarities.push_back(polarity);
      have_last = true;
      last = k;
      last_polarity = polarity;
      armed = false;
    }
  }
  return train;
}

SymbolStream symbolize(const EventTrain& events, double bin_width, int n) {
  if (!(bin_width > 0.0) || !std::isfinite(bin_width)) {
    throw ParameterError("bin_width must be positive");
  }
  if (n < 1 || n > 16) throw ParameterError("symbol width n must be in [1, 16]");

  SymbolStream stream;
  stream.n = n;
  const std::uint64_t bins_per_block = std::uint64_t{1} << n;
  const double block_length = bin_width * static_cast<double>(bins_per_block);
  const auto total_blocks =
      static_cast<std::uint64_t>(std::floor(events.duration / block_length + 1e-9));

  // Bin index of an event; the small offset absorbs representation error
  // when event times and bin edges are both multiples of the sample period.
  auto bin_of = [&](double t) {
    return static_cast<std::uint64_t>(std::floor(t / bin_width + 1e-6));
  };

  std::uint64_t non_empty = 0;
  std::size_t i = 0;
  while (i < events.times.size()) {
    const std::uint64_t bin = bin_of(events.times[i]);
    const std::uint64_t block = bin / bins_per_block;
    if (block >= total_blocks) break;
    std::size_t j = i + 1;
    while (j < events.times.size() && bin_of(events.times[j]) / bins_per_block == block) ++j;
    ++non_empty;
    if (j - i == 1) {
      stream.symbols.push_back(static_cast<std::uint32_t>(bin % bins_per_block));
    } else {
      ++stream.dropped_blocks;
    }
    i = j;
  }
  stream.empty_blocks = static_cast<std::size_t>(total_blocks - non_empty);
  return stream;
}

std::vector<std::uint8_t> to_bits(const SymbolStream& stream) {
  validate(stream);
  std::vector<std::uint8_t> bits;
  bits.reserve(stream.symbols.size() * static_cast<std::size_t>(stream.n));
  for (std::uint32_t s : stream.symbols) {
    for (int b = stream.n - 1; b >= 0; --b) bits.push_back(static_cast<std::uint8_t>((s >> b) & 1u));
  }
  return bits;
}

SymbolStream from_bits(const std::vector<std::uint8_t>& bits, int n) {
  if (n < 1 || n > 16) throw ParameterError("symbol width n must be in [1, 16]");
  SymbolStream stream;
  stream.n = n;
  const std::size_t words = bits.size() / static_cast<std::size_t>(n);
  stream.symbols.reserve(words);
  for (std::size_t w = 0; w < words; ++w) {
    std::uint32_t s = 0;
    for (int b = 0; b < n; ++b) s = (s << 1) | (bits[w * n + b] & 1u);
    stream.symbols.push_back(s);
  }
  return stream;
}

double estimate_noise_sigma(const VoltageTrace& trace, std::size_t head) {
  validate(trace);
  const std::size_t count = std::min(std::max<std::size_t>(head, 1), trace.samples.size());
  std::vector<double> window(trace.samples.begin(), trace.samples.begin() + count);
  auto median_of = [](std::vector<double>& v) {
    const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
    std::nth_element(v.begin(), mid, v.end());
    return *mid;
  };
  const double center = median_of(window);
  for (double& v : window) v = std::abs(v - center);
  return 1.4826 * median_of(window);
}

ExtractionResult extract(const VoltageTrace& trace, const ExtractionConfig& config) {
  validate(trace);
  const double fs = 1.0 / trace.dt;
  const double cutoff = config.cutoff_hz.value_or(fs / 50.0);
  const VoltageTrace filtered = highpass(trace, cutoff);

  double threshold = 0.0;
  if (config.threshold) {
    threshold = *config.threshold;
  } else {
    const double sigma = estimate_noise_sigma(filtered, config.noise_head);
    // Filter tails of a noiseless trace leave a MAD that is tiny but not exactly zero.
    const double peak = filtered.samples.empty() ? 0.0 : *std::max_element(filtered.samples.begin(), filtered.samples.end(),
        [](double a, double b) { return std::abs(a) < std::abs(b); });
    if (!(sigma > 1e-9 * std::abs(peak))) {
      throw ParameterError(
          "noise floor estimate is zero (noiseless trace); pass an explicit threshold");
    }
    threshold = config.threshold_sigmas * sigma;
  }
  const double dead_time = config.dead_time.value_or(2.0 / fs);

  ExtractionResult result;
  const double holdoff = config.same_polarity_holdoff.value_or(
      5.0 / (2.0 * std::numbers::pi * cutoff));
  const EventTrain events =
      detect_edges(filtered, threshold, dead_time, config.rearm_fraction, holdoff);
  result.events = events.size();
  result.threshold = threshold;
  result.stream = symbolize(events, config.bin_width, config.n);
  return result;
}

SymbolStream acquire_symbols(const DeviceParams& params, const ExtractionConfig& config,
                             std::size_t target_symbols, std::size_t max_segments) {
  SymbolStream out;
  out.n = config.n;
  for (std::size_t segment = 0; out.symbols.size() < target_symbols; ++segment) {
    if (segment >= max_segments) {
      throw InsufficientDataError("acquisition produced only " +
                                  std::to_string(out.symbols.size()) + " of " +
                                  std::to_string(target_symbols) + " symbols in " +
                                  std::to_string(max_segments) + " segments");
    }
    DeviceParams segment_params = params;
    segment_params.seed = segment == 0 ? params.seed : derive_seed(params.seed, 1000 + segment);
    const ExtractionResult part = extract(simulate_trace(segment_params), config);
    out.dropped_blocks += part.stream.dropped_blocks;
    out.empty_blocks += part.stream.empty_blocks;
    const std::size_t take =
        std::min(part.stream.symbols.size(), target_symbols - out.symbols.size());
    out.symbols.insert(out.symbols.end(), part.stream.symbols.begin(),
                       part.stream.symbols.begin() + static_cast<std::ptrdiff_t>(take));
  }
  return out;
}

}  // namespace ef
