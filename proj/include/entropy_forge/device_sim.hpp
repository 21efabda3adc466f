#pragma once

// Phenomenological telegraph-noise device: a continuous-time Markov chain
// over the number of trapped electrons, rendered as a sampled output voltage.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace ef {

struct DeviceParams {
  int max_trapped = 1;                ///< M, number of trap sites (>= 1)
  double capture_rate_base = 8000.0;  ///< events/s at zero bias
  double release_rate_base = 8000.0;  ///< events/s at zero bias
  double bias_current = 20e-9;        ///< A
  double bias_scale = 20e-9;          ///< A, e-folding current of the rate law
  double level_step = 5e-3;           ///< V per trapped electron
  double baseline = 0.5;              ///< V with no trapped electron
  double noise_sigma = 2e-4;          ///< V, additive Gaussian per sample
  double rc_time_constant = 4e-8;     ///< s, 0 disables the low-pass
  double sample_rate = 12.5e6;        ///< samples/s
  double duration = 0.8;              ///< s
  std::uint64_t seed = 1;

  /// floor(sample_rate * duration); throws ParameterError when < 1.
  std::size_t sample_count() const;

  /// Checks every invariant, throwing ParameterError or OverflowError.
  void validate() const;

  friend bool operator==(const DeviceParams&, const DeviceParams&) = default;
};

struct TraceMeta {
  std::optional<DeviceParams> params;  ///< set when the trace was simulated
  std::string note;                    ///< free-form origin (e.g. "imported: x.vtrc")
  std::size_t event_count = 0;         ///< CTMC jumps that fell inside the sampled window
};

struct VoltageTrace {
  std::vector<double> samples;
  double dt = 0.0;
  TraceMeta meta;

  double duration() const noexcept { return dt * static_cast<double>(samples.size()); }
};

/// Throws InsufficientDataError for an empty trace and ParameterError for a
/// non-positive dt or non-finite samples.
void validate(const VoltageTrace& trace);

/// One jump of the occupancy chain.
struct Transition {
  double time;    ///< s
  int occupancy;  ///< occupancy after the jump
};

struct OccupancyPath {
  int initial = 0;
  std::vector<Transition> jumps;  ///< strictly increasing times, all < horizon
  double horizon = 0.0;
};

/// base_rate * exp(bias_current / bias_scale).
double effective_rate(double base_rate, double bias_current, double bias_scale);

/// Gillespie simulation of the occupancy chain on [0, params.duration).
/// Starts empty (m = 0). Capture rate (M - m) * lc, release rate m * lr.
OccupancyPath simulate_occupancy(const DeviceParams& params);

/// Ideal level V0 - m * dV, low-passed (one pole, time constant tau_RC) and
/// sampled at fs with additive Gaussian noise. Deterministic given the seed.
VoltageTrace render_trace(const OccupancyPath& path, const DeviceParams& params);

VoltageTrace simulate_trace(const DeviceParams& params);

/// Sample-to-sample jumps larger than `threshold`, per second of trace.
double edge_frequency(const VoltageTrace& trace, double threshold);

}  // namespace ef
