#pragma once

// Voltage trace -> edge events -> time-bin symbols.

#include <cstdint>
#include <optional>
#include <vector>

#include "entropy_forge/device_sim.hpp"

namespace ef {

enum class Polarity : std::int8_t { Fall = -1, Rise = 1 };

struct EventTrain {
  std::vector<double> times;  ///< s, strictly increasing
  std::vector<Polarity> polarities;
  double source_dt = 0.0;
  double duration = 0.0;  ///< span of the source trace, s

  std::size_t size() const noexcept { return times.size(); }
};

struct SymbolStream {
  int n = 8;  ///< bits per symbol, alphabet size 2^n
  std::vector<std::uint32_t> symbols;
  std::size_t dropped_blocks = 0;  ///< blocks holding two or more events
  std::size_t empty_blocks = 0;

  std::uint32_t alphabet_size() const noexcept { return 1u << n; }
  std::size_t size() const noexcept { return symbols.size(); }
};

/// Throws ParameterError unless 1 <= n <= 16 and every symbol < 2^n.
void validate(const SymbolStream& stream);

/// One-pole RC high-pass, y[k] = a (y[k-1] + x[k] - x[k-1]), a = RC / (RC + dt),
/// RC = 1 / (2 pi cutoff). The input is taken to have been at x[0] forever.
VoltageTrace highpass(const VoltageTrace& trace, double cutoff_hz);

/// Threshold detector on an already filtered trace. Fires at the first
/// sample with |y| >= threshold and polarity = sign(y); nothing fires for
/// `dead_time` afterwards. Another edge of the same polarity additionally
/// needs `same_polarity_holdoff` to have passed and |y| to have dropped below
/// `rearm_fraction * threshold`, so the decaying tail of one edge cannot
/// re-trigger. An opposite-polarity crossing fires as soon as the dead time
/// is over.
EventTrain detect_edges(const VoltageTrace& filtered, double threshold, double dead_time,
                        double rearm_fraction = 0.5, double same_polarity_holdoff = 0.0);

/// Symbols from events: blocks of 2^n bins of width `bin_width` starting at
/// t = 0. A block with exactly one event yields the bin index of that event.
/// Only complete blocks inside `events.duration` are considered.
SymbolStream symbolize(const EventTrain& events, double bin_width, int n);

/// Expands each symbol to n bits, most significant bit first.
std::vector<std::uint8_t> to_bits(const SymbolStream& stream);

/// Regroups an MSB-first bit sequence into n-bit words (partial tail dropped).
SymbolStream from_bits(const std::vector<std::uint8_t>& bits, int n);

/// Robust noise estimate: 1.4826 * MAD over the first `head` samples.
double estimate_noise_sigma(const VoltageTrace& trace, std::size_t head);

struct ExtractionConfig {
  int n = 8;
  double bin_width = 8e-8;                 ///< s
  std::optional<double> cutoff_hz;         ///< default: sample_rate / 50
  std::optional<double> threshold;         ///< default: threshold_sigmas * noise floor
  std::optional<double> dead_time;         ///< default: 2 / sample_rate
  double threshold_sigmas = 4.0;
  std::size_t noise_head = 100000;         ///< samples used for the noise floor
  double rearm_fraction = 0.5;
  std::optional<double> same_polarity_holdoff;  ///< default: 5 high-pass time constants
};

struct ExtractionResult {
  SymbolStream stream;
  std::size_t events = 0;
  double threshold = 0.0;  ///< threshold actually used, V
};

/// highpass -> detect_edges -> symbolize with defaults filled in.
ExtractionResult extract(const VoltageTrace& trace, const ExtractionConfig& config);

/// Simulates consecutive trace segments (seeds derived from params.seed)
/// and extracts each until `target_symbols` symbols are collected. Each
/// segment is an independent acquisition, so blocks never straddle segments.
SymbolStream acquire_symbols(const DeviceParams& params, const ExtractionConfig& config,
                             std::size_t target_symbols, std::size_t max_segments = 100000);

}  // namespace ef
