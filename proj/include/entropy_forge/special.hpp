#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace ef {

/// P(X >= x) for X ~ chi-square(dof).
double chi_square_sf(double x, double dof);

/// P(X >= k) for X ~ Binomial(trials, p).
double binomial_upper_tail(std::uint64_t trials, double p, std::uint64_t k);

/// Smallest k with P(X <= k) >= 1 - alpha for X ~ Binomial(trials, p),
/// computed from the upper tail so tiny alpha keeps full precision.
std::uint64_t binomial_critical_value(std::uint64_t trials, double p, double alpha);

struct ChiSquareResult {
  double statistic = 0.0;
  double dof = 0.0;
  double p_value = 1.0;
  std::size_t bins = 0;  ///< after pooling
};

/// Pearson goodness of fit of `observed` against probabilities
/// `expected_p` (summing to 1). Adjacent cells are pooled from each tail
/// inward until every pooled cell expects at least `min_expected` counts.
ChiSquareResult chi_square_gof(std::span<const double> observed,
                               std::span<const double> expected_p,
                               double min_expected = 5.0);

}  // namespace ef
