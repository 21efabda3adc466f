#include "entropy_forge/special.hpp"

#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <numeric>

#include "entropy_forge/error.hpp"

namespace ef {

double chi_square_sf(double x, double dof) {
  if (!(dof > 0.0)) throw ParameterError("chi-square needs dof > 0");
  if (x <= 0.0) return 1.0;
  return boost::math::gamma_q(dof / 2.0, x / 2.0);
}

double binomial_upper_tail(std::uint64_t trials, double p, std::uint64_t k) {
  if (!(p >= 0.0 && p <= 1.0)) throw ParameterError("binomial p must lie in [0, 1]");
  if (k == 0) return 1.0;
  if (k > trials) return 0.0;
  if (p == 0.0) return 0.0;
  if (p == 1.0) return 1.0;
  // P(X >= k) = I_p(k, n - k + 1)
  return boost::math::ibeta(static_cast<double>(k), static_cast<double>(trials - k + 1), p);
}

std::uint64_t binomial_critical_value(std::uint64_t trials, double p, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ParameterError("alpha must lie in (0, 1)");
  // P(X <= k) >= 1 - alpha  <=>  P(X >= k + 1) <= alpha
  std::uint64_t k = static_cast<std::uint64_t>(std::floor(static_cast<double>(trials) * p));
  while (k > 0 && binomial_upper_tail(trials, p, k) <= alpha) --k;
  while (k < trials && binomial_upper_tail(trials, p, k + 1) > alpha) ++k;
  return k;
}

ChiSquareResult chi_square_gof(std::span<const double> observed,
                               std::span<const double> expected_p, double min_expected) {
  if (observed.size() != expected_p.size() || observed.empty()) {
    throw ParameterError("observed and expected cell counts differ");
  }
  const double total = std::accumulate(observed.begin(), observed.end(), 0.0);
  if (!(total > 0.0)) throw InsufficientDataError("chi-square test on zero observations");

  // Pool from the left tail and the right tail toward the mode.
  std::vector<double> obs;
  std::vector<double> exp;
  const std::size_t cells = observed.size();
  std::size_t mode = 0;
  for (std::size_t i = 1; i < cells; ++i) {
    if (expected_p[i] > expected_p[mode]) mode = i;
  }
  double o_acc = 0.0;
  double e_acc = 0.0;
  for (std::size_t i = 0; i < mode; ++i) {
    o_acc += observed[i];
    e_acc += expected_p[i] * total;
    if (e_acc >= min_expected) {
      obs.push_back(o_acc);
      exp.push_back(e_acc);
      o_acc = e_acc = 0.0;
    }
  }
  std::vector<double> right_obs;
  std::vector<double> right_exp;
  double ro_acc = 0.0;
  double re_acc = 0.0;
  for (std::size_t i = cells; i-- > mode + 1;) {
    ro_acc += observed[i];
    re_acc += expected_p[i] * total;
    if (re_acc >= min_expected) {
      right_obs.push_back(ro_acc);
      right_exp.push_back(re_acc);
      ro_acc = re_acc = 0.0;
    }
  }
  // The leftovers of both tails join the mode cell.
  obs.push_back(observed[mode] + o_acc + ro_acc);
  exp.push_back(expected_p[mode] * total + e_acc + re_acc);
  for (std::size_t i = right_obs.size(); i-- > 0;) {
    obs.push_back(right_obs[i]);
    exp.push_back(right_exp[i]);
  }

  ChiSquareResult result;
  result.bins = obs.size();
  for (std::size_t i = 0; i < obs.size(); ++i) {
    if (exp[i] > 0.0) {
      const double d = obs[i] - exp[i];
      result.statistic += d * d / exp[i];
    }
  }
  result.dof = static_cast<double>(obs.size()) - 1.0;
  result.p_value = result.dof > 0.0 ? chi_square_sf(result.statistic, result.dof) : 1.0;
  return result;
}

}  // namespace ef
