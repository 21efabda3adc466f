#include "entropy_forge/device_sim.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "entropy_forge/error.hpp"
#include "entropy_forge/rng.hpp"

namespace ef {

namespace {

constexpr std::uint64_t kChainStream = 1;
constexpr std::uint64_t kNoiseStream = 2;

bool finite_non_negative(double x) { return std::isfinite(x) && x >= 0.0; }

}  // namespace

std::size_t DeviceParams::sample_count() const {
  if (!(sample_rate > 0.0) || !(duration > 0.0) || !std::isfinite(sample_rate) ||
      !std::isfinite(duration)) {
    throw ParameterError("sample_rate and duration must be positive and finite");
  }
  // Guard against products like 12.5e6 * 0.08 landing one ulp below an integer.
  const double product = sample_rate * duration;
  const double count = std::floor(product * (1.0 + 1e-12));
  if (count < 1.0) {
    throw ParameterError("sample_rate * duration must yield at least one sample");
  }
  if (count > 1e11) throw ParameterError("trace too long: " + std::to_string(count) + " samples");
  return static_cast<std::size_t>(count);
}

void DeviceParams::validate() const {
  if (max_trapped < 1) throw ParameterError("max_trapped must be >= 1");
  if (!finite_non_negative(capture_rate_base) || !finite_non_negative(release_rate_base)) {
    throw ParameterError("base rates must be finite and >= 0");
  }
  if (!finite_non_negative(bias_current)) throw ParameterError("bias_current must be >= 0");
  if (!(bias_scale > 0.0) || !std::isfinite(bias_scale)) {
    throw ParameterError("bias_scale must be > 0");
  }
  if (!(level_step > 0.0) || !std::isfinite(level_step)) {
    throw ParameterError("level_step must be > 0");
  }
  if (!std::isfinite(baseline)) throw ParameterError("baseline must be finite");
  if (!finite_non_negative(noise_sigma)) throw ParameterError("noise_sigma must be >= 0");
  if (!finite_non_negative(rc_time_constant)) {
    throw ParameterError("rc_time_constant must be >= 0");
  }
  sample_count();
  // Both throw OverflowError if the exponential law leaves the double range.
  const double capture = effective_rate(capture_rate_base, bias_current, bias_scale);
  const double release = effective_rate(release_rate_base, bias_current, bias_scale);
  if (!std::isfinite(capture * max_trapped) || !std::isfinite(release * max_trapped)) {
    throw OverflowError("total event rate overflows for max_trapped=" +
                        std::to_string(max_trapped));
  }
}

void validate(const VoltageTrace& trace) {
  if (trace.samples.empty()) throw InsufficientDataError("voltage trace has no samples");
  if (!(trace.dt > 0.0) || !std::isfinite(trace.dt)) {
    throw ParameterError("voltage trace dt must be positive and finite");
  }
  for (double v : trace.samples) {
    if (!std::isfinite(v)) throw ParameterError("voltage trace contains a non-finite sample");
  }
}

double effective_rate(double base_rate, double bias_current, double bias_scale) {
  if (!(base_rate >= 0.0)) throw ParameterError("base_rate must be >= 0");
  if (!(bias_scale > 0.0)) throw ParameterError("bias_scale must be > 0");
  if (base_rate == 0.0) return 0.0;
  const double rate = base_rate * std::exp(bias_current / bias_scale);
  if (!std::isfinite(rate)) {
    std::ostringstream msg;
    msg << "effective rate overflows: base_rate=" << base_rate
        << " bias_current=" << bias_current << " bias_scale=" << bias_scale;
    throw OverflowError(msg.str());
  }
  return rate;
}

OccupancyPath simulate_occupancy(const DeviceParams& params) {
  params.validate();
  const double capture = effective_rate(params.capture_rate_base, params.bias_current,
                                        params.bias_scale);
  const double release = effective_rate(params.release_rate_base, params.bias_current,
                                        params.bias_scale);
  const int max_m = params.max_trapped;
  const double horizon = static_cast<double>(params.sample_count()) / params.sample_rate;

  std::mt19937_64 engine(derive_seed(params.seed, kChainStream));
  OccupancyPath path;
  path.horizon = horizon;

  int m = 0;
  double t = 0.0;
  for (;;) {
    const double capture_total = static_cast<double>(max_m - m) * capture;
    const double release_total = static_cast<double>(m) * release;
    const double total = capture_total + release_total;
    if (total <= 0.0) break;
    t += exponential(engine, total);
    if (!(t < horizon)) break;
    if (uniform01(engine) * total < capture_total) {
      ++m;
    } else {
      --m;
    }
    path.jumps.push_back({t, m});
  }
  return path;
}

VoltageTrace render_trace(const OccupancyPath& path, const DeviceParams& params) {
  params.validate();
  const std::size_t count = params.sample_count();
  const double dt = 1.0 / params.sample_rate;

  VoltageTrace trace;
  trace.dt = dt;
  trace.samples.resize(count);
  trace.meta.params = params;
  trace.meta.note = "simulated";

  const bool lowpass = params.rc_time_constant > 0.0;
  const double gain = lowpass ? -std::expm1(-dt / params.rc_time_constant) : 1.0;

  std::mt19937_64 engine(derive_seed(params.seed, kNoiseStream));
  NormalSource normal;

  int m = path.initial;
  std::size_t next_jump = 0;
  double filtered = params.baseline - m * params.level_step;
  for (std::size_t k = 0; k < count; ++k) {
    const double t = static_cast<double>(k) * dt;
    while (next_jump < path.jumps.size() && path.jumps[next_jump].time <= t) {
      m = path.jumps[next_jump].occupancy;
      ++next_jump;
    }
    const double ideal = params.baseline - m * params.level_step;
    filtered = lowpass ? filtered + gain * (ideal - filtered) : ideal;
    double v = filtered;
    if (params.noise_sigma > 0.0) v += params.noise_sigma * normal(engine);
    trace.samples[k] = v;
  }
  trace.meta.event_count = next_jump;
  return trace;
}

VoltageTrace simulate_trace(const DeviceParams& params) {
  return render_trace(simulate_occupancy(params), params);
}

double edge_frequency(const VoltageTrace& trace, double threshold) {
  if (!(threshold > 0.0)) throw ParameterError("edge threshold must be > 0");
  if (trace.samples.size() < 2) {
    throw InsufficientDataError("edge_frequency needs at least 2 samples");
  }
  validate(trace);
  std::size_t edges = 0;
  for (std::size_t k = 1; k < trace.samples.size(); ++k) {
    if (std::abs(trace.samples[k] - trace.samples[k - 1]) > threshold) ++edges;
  }
  return static_cast<double>(edges) / trace.duration();
}

}  // namespace ef
