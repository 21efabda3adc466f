#include <algorithm>
#include <cmath>

#include "entropy_forge/error.hpp"
#include "entropy_forge/sp90b.hpp"
#include "entropy_forge/special.hpp"

namespace ef::sp90b {

namespace {

void check_health_args(double h_min, double alpha) {
  if (!(h_min > 0.0)) throw ParameterError("health tests need h_min > 0");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ParameterError("health test alpha must be in (0, 1)");
}

}  // namespace

std::uint64_t repetition_count_cutoff(double h_min, double alpha) {
  check_health_args(h_min, alpha);
  // -log2(alpha) / h is often an exact integer (alpha = 2^-20, h = 1 or 4);
  // trim rounding noise before taking the ceiling.
  const double ratio = -std::log2(alpha) / h_min;
  const double nearest = std::round(ratio);
  const double steps = std::abs(ratio - nearest) < 1e-9 * std::max(1.0, ratio) ? nearest : std::ceil(ratio);
  return 1 + static_cast<std::uint64_t>(steps);
}

std::uint64_t adaptive_proportion_cutoff(std::size_t window, double h_min, double alpha) {
  check_health_args(h_min, alpha);
  if (window < 2) throw ParameterError("adaptive proportion window must be >= 2");
  return 1 + binomial_critical_value(window, std::exp2(-h_min), alpha);
}

RepetitionCountTest::RepetitionCountTest(double h_min, double alpha)
    : cutoff_(repetition_count_cutoff(h_min, alpha)) {}

bool RepetitionCountTest::feed(std::uint32_t sample) {
  if (run_ > 0 && sample == last_) {
    ++run_;
  } else {
    run_ = 1;
    last_ = sample;
  }
  if (run_ >= cutoff_) {
    run_ = 0;
    return true;
  }
  return false;
}

AdaptiveProportionTest::AdaptiveProportionTest(double h_min, std::size_t window, double alpha)
    : window_(window), cutoff_(adaptive_proportion_cutoff(window, h_min, alpha)) {}

bool AdaptiveProportionTest::feed(std::uint32_t sample) {
  if (position_ == 0) {
    reference_ = sample;
    count_ = 1;
    alarmed_ = false;
  } else if (sample == reference_) {
    ++count_;
  }
  bool alarm = false;
  if (!alarmed_ && count_ >= cutoff_) {
    alarmed_ = true;
    alarm = true;
  }
  if (++position_ == window_) position_ = 0;
  return alarm;
}

std::vector<std::size_t> repetition_count_health(std::span<const std::uint32_t> stream, double h_min,
                                                 double alpha) {
  RepetitionCountTest test(h_min, alpha);
  std::vector<std::size_t> alarms;
  for (std::size_t i = 0; i < stream.size(); ++i) {
    if (test.feed(stream[i])) alarms.push_back(i);
  }
  return alarms;
}

std::vector<std::size_t> adaptive_proportion_health(std::span<const std::uint32_t> stream, double h_min,
                                                    std::size_t window, double alpha) {
  AdaptiveProportionTest test(h_min, window, alpha);
  std::vector<std::size_t> alarms;
  for (std::size_t i = 0; i < stream.size(); ++i) {
    if (test.feed(stream[i])) alarms.push_back(i);
  }
  return alarms;
}

}  // namespace ef::sp90b
