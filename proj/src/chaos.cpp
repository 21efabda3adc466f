#include "entropy_forge/chaos.hpp"

#include <Eigen/Dense>
#include <limits>
#include <sstream>

namespace ef {

CorrelationDimensionFit fit_correlation_dimension(std::vector<double> radii, const PairCounts& counts,
                                                  const ScalingFitOptions& options) {
  CorrelationDimensionFit fit;
  fit.radii = radii;
  fit.ci.resize(radii.size());
  for (std::size_t k = 0; k < radii.size(); ++k) fit.ci[k] = counts.fraction(k);
  if (counts.eligible == 0) throw InsufficientDataError("no eligible point pairs");

  // Every eligible pair coincides: a point mass has dimension zero.
  if (counts.within.front() == counts.eligible) {
    fit.nu = 0.0;
    fit.r_low = radii.front();
    fit.r_high = radii.back();
    return fit;
  }

  // Usable grid points: enough pairs for a stable log, not yet saturated.
  std::vector<bool> usable(radii.size());
  for (std::size_t k = 0; k < radii.size(); ++k) {
    usable[k] = counts.within[k] >= options.min_pairs && counts.within[k] < counts.eligible;
  }
  std::vector<double> slope(radii.size(), std::numeric_limits<double>::quiet_NaN());
  for (std::size_t k = 0; k + 1 < radii.size(); ++k) {
    if (usable[k] && usable[k + 1]) {
      slope[k] = std::log(fit.ci[k + 1] / fit.ci[k]) / std::log(radii[k + 1] / radii[k]);
    }
  }

  // Longest run of >= 2 consecutive slopes whose spread stays within the
  // tolerance of their mean; ties go to larger radii (more pairs).
  std::size_t best_first = 0;
  std::size_t best_len = 0;
  for (std::size_t a = 0; a + 1 < radii.size(); ++a) {
    if (std::isnan(slope[a])) continue;
    double lo = slope[a];
    double hi = slope[a];
    double sum = slope[a];
    for (std::size_t b = a + 1; b + 1 < radii.size() && !std::isnan(slope[b]); ++b) {
      lo = std::min(lo, slope[b]);
      hi = std::max(hi, slope[b]);
      sum += slope[b];
      const std::size_t len = b - a + 1;
      const double mean = sum / static_cast<double>(len);
      if (hi - lo > options.slope_tolerance * std::abs(mean)) break;
      if (len >= best_len) {
        best_len = len;
        best_first = a;
      }
    }
  }
  if (best_len < 2) {
    std::ostringstream diag;
    diag << "radius,ci,local_slope\n";
    for (std::size_t k = 0; k < radii.size(); ++k) {
      diag << radii[k] << ',' << fit.ci[k] << ',' << slope[k] << '\n';
    }
    throw EstimationError("no scaling region found for the correlation dimension", diag.str());
  }

  const std::size_t first = best_first;
  const std::size_t last = best_first + best_len;  // inclusive point index
  const auto m = static_cast<Eigen::Index>(last - first + 1);
  Eigen::MatrixXd design(m, 2);
  Eigen::VectorXd target(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const std::size_t k = first + static_cast<std::size_t>(i);
    design(i, 0) = std::log(radii[k]);
    design(i, 1) = 1.0;
    target(i) = std::log(fit.ci[k]);
  }
  const Eigen::Vector2d coef = design.colPivHouseholderQr().solve(target);
  fit.nu = std::max(0.0, coef(0));
  fit.r_low = radii[first];
  fit.r_high = radii[last];
  return fit;
}

std::vector<std::pair<double, double>> K2Curve::usable_points() const {
  std::vector<std::pair<double, double>> out;
  for (std::size_t i = 0; i < epsilons.size(); ++i) {
    if (usable[i]) out.emplace_back(epsilons[i], k2[i]);
  }
  return out;
}

K2Curve k2_from_counts(std::span<const double> epsilons, const std::vector<PairCounts>& counts,
                       int d_first, int d_last, int lag) {
  K2Curve curve;
  curve.d_first = d_first;
  curve.d_last = d_last;
  curve.epsilons.assign(epsilons.begin(), epsilons.end());
  curve.k2.assign(epsilons.size(), std::numeric_limits<double>::quiet_NaN());
  curve.usable.assign(epsilons.size(), false);
  const int dims = d_last - d_first + 1;
  for (std::size_t e = 0; e < epsilons.size(); ++e) {
    double sum = 0.0;
    bool ok = true;
    for (int k = 0; k < dims && ok; ++k) {
      const std::uint64_t lower = counts[k].within[e];
      const std::uint64_t upper = counts[k + 1].within[e];
      if (upper == 0 || lower == 0) {
        ok = false;
      } else {
        sum += std::log(static_cast<double>(lower) / static_cast<double>(upper));
      }
    }
    if (ok) {
      curve.k2[e] = sum / (static_cast<double>(dims) * lag);
      curve.usable[e] = true;
    }
  }
  return curve;
}

std::vector<double> log_grid_descending(double hi, double lo, std::size_t n) {
  if (!(hi > lo && lo > 0.0) || n < 2) throw ParameterError("invalid log grid");
  std::vector<double> grid(n);
  const double ratio = std::log(lo / hi) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) grid[i] = hi * std::exp(ratio * static_cast<double>(i));
  grid.back() = lo;
  return grid;
}

std::vector<double> quantized_grid(double lo, double hi, std::size_t n, std::uint32_t levels) {
  if (levels < 2) throw ParameterError("quantized grid needs >= 2 levels");
  const double step = 1.0 / static_cast<double>(levels - 1);
  std::vector<double> out;
  for (double r : log_grid_descending(hi, lo, n)) {
    const double m = std::max(0.0, std::round(r / step - 0.5));
    out.push_back((m + 0.5) * step);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace ef
