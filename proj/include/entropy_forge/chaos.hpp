#pragma once

// Hidden-determinism diagnostics: time-delay embedding, Grassberger-Procaccia
// correlation sums (Chebyshev metric), correlation dimension, K2 entropy and
// recurrence pairs, plus a Lorenz reference generator.

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "entropy_forge/error.hpp"

namespace ef {

template <typename Scalar>
using PointMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename Scalar>
using Series = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar = double>
struct EmbeddedSeries {
  PointMatrix<Scalar> points;  ///< one d-tuple per row
  int dimension = 1;
  int lag = 1;

  Eigen::Index size() const noexcept { return points.rows(); }
};

/// Min-max rescaling to [0, 1]; a constant series maps to all zeros.
template <typename Derived>
Series<typename Derived::Scalar> normalize(const Eigen::MatrixBase<Derived>& series) {
  using Scalar = typename Derived::Scalar;
  Series<Scalar> out = series;
  if (out.size() == 0) return out;
  const Scalar lo = out.minCoeff();
  const Scalar span = out.maxCoeff() - lo;
  if (span > Scalar(0)) {
    out = (out.array() - lo) / span;
  } else {
    out.setZero();
  }
  return out;
}

/// Delay embedding of an already normalized series.
template <typename Derived>
EmbeddedSeries<typename Derived::Scalar> embed_normalized(const Eigen::MatrixBase<Derived>& series,
                                                          int d, int lag) {
  if (d < 1) throw ParameterError("embedding dimension must be >= 1");
  if (lag < 1) throw ParameterError("embedding lag must be >= 1");
  const Eigen::Index n = series.size();
  const Eigen::Index span = static_cast<Eigen::Index>(d - 1) * lag;
  if (n <= span) {
    throw InsufficientDataError("series of length " + std::to_string(n) +
                                " too short for d=" + std::to_string(d) +
                                ", lag=" + std::to_string(lag));
  }
  EmbeddedSeries<typename Derived::Scalar> out;
  out.dimension = d;
  out.lag = lag;
  out.points.resize(n - span, d);
  for (int c = 0; c < d; ++c) {
    out.points.col(c) = series.segment(static_cast<Eigen::Index>(c) * lag, n - span);
  }
  return out;
}

/// Point i = (s_i, s_{i+lag}, ..., s_{i+(d-1)lag}) of the min-max normalized series.
template <typename Derived>
EmbeddedSeries<typename Derived::Scalar> embed(const Eigen::MatrixBase<Derived>& series, int d,
                                               int lag = 1) {
  return embed_normalized(normalize(series), d, lag);
}

template <typename Scalar>
Scalar chebyshev(const EmbeddedSeries<Scalar>& emb, Eigen::Index i, Eigen::Index j) {
  return (emb.points.row(i) - emb.points.row(j)).cwiseAbs().maxCoeff();
}

/// Pair counts within each radius, from one pass over the eligible pairs.
struct PairCounts {
  std::vector<std::uint64_t> within;  ///< within[r] = #{i<j, j-i > theiler, dist <= radii[r]}
  std::uint64_t eligible = 0;         ///< #{i<j, j-i > theiler}

  double fraction(std::size_t r) const {
    return eligible == 0 ? 0.0 : static_cast<double>(within[r]) / static_cast<double>(eligible);
  }
};

inline std::uint64_t eligible_pairs(Eigen::Index points, Eigen::Index theiler) {
  if (theiler < 0) throw ParameterError("Theiler window must be >= 0");
  const auto p = static_cast<std::uint64_t>(points);
  const auto w = static_cast<std::uint64_t>(theiler);
  if (p <= w + 1) return 0;
  // sum over gaps g = w+1 .. p-1 of (p - g)
  const std::uint64_t m = p - w - 1;
  return m * (m + 1) / 2;
}

template <typename Scalar>
PairCounts correlation_counts(const EmbeddedSeries<Scalar>& emb, std::span<const Scalar> radii,
                              Eigen::Index theiler = 0) {
  for (Scalar r : radii) {
    if (!(r > Scalar(0))) throw ParameterError("correlation radius must be > 0");
  }
  std::vector<std::size_t> order(radii.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return radii[a] < radii[b]; });
  std::vector<Scalar> sorted(radii.size());
  for (std::size_t k = 0; k < order.size(); ++k) sorted[k] = radii[order[k]];

  PairCounts out;
  out.eligible = eligible_pairs(emb.size(), theiler);
  std::vector<std::uint64_t> first_bin(radii.size() + 1, 0);
  const Eigen::Index n = emb.size();
  const Eigen::Index d = emb.points.cols();
  const Scalar r_max = sorted.empty() ? Scalar(0) : sorted.back();
  for (Eigen::Index i = 0; i < n; ++i) {
    const Scalar* pi = emb.points.row(i).data();
    for (Eigen::Index j = i + theiler + 1; j < n; ++j) {
      const Scalar* pj = emb.points.row(j).data();
      Scalar dist = 0;
      for (Eigen::Index c = 0; c < d && dist <= r_max; ++c) dist = std::max(dist, std::abs(pi[c] - pj[c]));
      if (dist > r_max) continue;
      const auto bin = static_cast<std::size_t>(std::lower_bound(sorted.begin(), sorted.end(), dist) - sorted.begin());
      ++first_bin[bin];
    }
  }
  std::vector<std::uint64_t> cumulative(radii.size());
  std::uint64_t acc = 0;
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    acc += first_bin[k];
    cumulative[k] = acc;
  }
  out.within.resize(radii.size());
  for (std::size_t k = 0; k < order.size(); ++k) out.within[order[k]] = cumulative[k];
  return out;
}

/// CI(R): fraction of eligible pairs (i<j, j-i > theiler) within Chebyshev distance R.
template <typename Scalar>
double correlation_integral(const EmbeddedSeries<Scalar>& emb, Scalar radius, Eigen::Index theiler = 0) {
  if (emb.size() < 2) throw InsufficientDataError("correlation integral needs >= 2 points");
  if (eligible_pairs(emb.size(), theiler) == 0) {
    throw InsufficientDataError("no point pairs outside the Theiler window");
  }
  const Scalar radii[1] = {radius};
  return correlation_counts(emb, std::span<const Scalar>(radii, 1), theiler).fraction(0);
}

/// Recurrent index pairs (i, j) with dist <= eps, both orders and the diagonal.
template <typename Scalar>
std::vector<std::pair<Eigen::Index, Eigen::Index>> recurrence_matrix(const EmbeddedSeries<Scalar>& emb,
                                                                     Scalar eps) {
  if (!(eps > Scalar(0))) throw ParameterError("recurrence threshold must be > 0");
  std::vector<std::pair<Eigen::Index, Eigen::Index>> pairs;
  const Eigen::Index n = emb.size();
  for (Eigen::Index i = 0; i < n; ++i) {
    pairs.emplace_back(i, i);
    for (Eigen::Index j = i + 1; j < n; ++j) {
      if (chebyshev(emb, i, j) <= eps) {
        pairs.emplace_back(i, j);
        pairs.emplace_back(j, i);
      }
    }
  }
  std::sort(pairs.begin(), pairs.end());
  return pairs;
}

struct ScalingFitOptions {
  double slope_tolerance = 0.2;   ///< max spread of local slopes relative to their mean
  std::uint64_t min_pairs = 20;   ///< grid points with fewer recurrent pairs are ignored
  Eigen::Index theiler = 0;
};

struct CorrelationDimensionFit {
  double nu = 0.0;
  double r_low = 0.0;
  double r_high = 0.0;
  std::vector<double> radii;  ///< ascending grid actually evaluated
  std::vector<double> ci;     ///< CI at each radius
};

/// Log-log slope of CI(R) over the longest contiguous run of grid points
/// whose local slopes agree within the tolerance. Needs >= 10 radii.
CorrelationDimensionFit fit_correlation_dimension(std::vector<double> radii,
                                                  const PairCounts& counts,
                                                  const ScalingFitOptions& options);

template <typename Scalar>
CorrelationDimensionFit correlation_dimension(const EmbeddedSeries<Scalar>& emb,
                                              std::span<const Scalar> radii,
                                              const ScalingFitOptions& options = {}) {
  if (radii.size() < 10) throw ParameterError("correlation dimension needs >= 10 radii");
  if (emb.size() < 2) throw InsufficientDataError("correlation dimension needs >= 2 points");
  std::vector<Scalar> grid(radii.begin(), radii.end());
  std::sort(grid.begin(), grid.end());
  const PairCounts counts = correlation_counts(emb, std::span<const Scalar>(grid), options.theiler);
  return fit_correlation_dimension(std::vector<double>(grid.begin(), grid.end()), counts, options);
}

struct CorrDimCurve {
  std::vector<int> dims;
  std::vector<double> nus;
  std::vector<std::pair<double, double>> fit_ranges;
};

/// nu(d) for each embedding dimension, each fit independently.
template <typename Derived>
CorrDimCurve correlation_dimension_curve(const Eigen::MatrixBase<Derived>& series,
                                         std::span<const int> dims, int lag,
                                         std::span<const typename Derived::Scalar> radii,
                                         const ScalingFitOptions& options = {}) {
  const auto normalized = normalize(series);
  CorrDimCurve curve;
  for (int d : dims) {
    const auto emb = embed_normalized(normalized, d, lag);
    const auto fit = correlation_dimension(emb, radii, options);
    curve.dims.push_back(d);
    curve.nus.push_back(fit.nu);
    curve.fit_ranges.emplace_back(fit.r_low, fit.r_high);
  }
  return curve;
}

struct K2Curve {
  std::vector<double> epsilons;  ///< as given (descending)
  std::vector<double> k2;        ///< nats per step; NaN where unusable
  std::vector<bool> usable;
  int d_first = 0;
  int d_last = 0;

  /// Usable (epsilon, K2) pairs in grid order.
  std::vector<std::pair<double, double>> usable_points() const;
};

/// Correlation counts for every dimension d_first .. d_last from one pass
/// over the pairs, all on the common point set of the largest dimension.
template <typename Scalar>
std::vector<PairCounts> correlation_counts_by_dimension(const Series<Scalar>& normalized, int d_first,
                                                        int d_last, int lag, std::span<const Scalar> radii,
                                                        Eigen::Index theiler) {
  if (d_first < 1 || d_last < d_first) throw ParameterError("invalid dimension range");
  const Eigen::Index span = static_cast<Eigen::Index>(d_last - 1) * lag;
  if (normalized.size() <= span + 1) throw InsufficientDataError("series too short for the dimension range");
  const Eigen::Index points = normalized.size() - span;
  std::vector<Scalar> sorted(radii.begin(), radii.end());
  std::vector<std::size_t> order(radii.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return radii[a] < radii[b]; });
  for (std::size_t k = 0; k < order.size(); ++k) sorted[k] = radii[order[k]];
  const Scalar r_max = sorted.back();

  const int dims = d_last - d_first + 1;
  std::vector<std::vector<std::uint64_t>> first_bin(dims, std::vector<std::uint64_t>(radii.size() + 1, 0));
  const Scalar* s = normalized.data();
  for (Eigen::Index i = 0; i < points; ++i) {
    for (Eigen::Index j = i + theiler + 1; j < points; ++j) {
      Scalar dist = 0;
      for (int c = 0; c < d_last; ++c) {
        const Eigen::Index off = static_cast<Eigen::Index>(c) * lag;
        dist = std::max(dist, std::abs(s[i + off] - s[j + off]));
        if (dist > r_max) break;
        if (c + 1 >= d_first) {
          const auto bin = static_cast<std::size_t>(std::lower_bound(sorted.begin(), sorted.end(), dist) - sorted.begin());
          ++first_bin[c + 1 - d_first][bin];
        }
      }
    }
  }
  std::vector<PairCounts> out(dims);
  const std::uint64_t eligible = eligible_pairs(points, theiler);
  for (int k = 0; k < dims; ++k) {
    out[k].eligible = eligible;
    out[k].within.resize(radii.size());
    std::uint64_t acc = 0;
    for (std::size_t r = 0; r < sorted.size(); ++r) {
      acc += first_bin[k][r];
      out[k].within[order[r]] = acc;
    }
  }
  return out;
}

/// K2(eps) = (1/lag) * mean_{d in [d_first, d_last]} ln(C_d(eps) / C_{d+1}(eps)).
K2Curve k2_from_counts(std::span<const double> epsilons, const std::vector<PairCounts>& counts,
                       int d_first, int d_last, int lag);

template <typename Derived>
K2Curve k2_estimate(const Eigen::MatrixBase<Derived>& series, int d_first, int d_last,
                    std::span<const typename Derived::Scalar> epsilons, int lag = 1,
                    Eigen::Index theiler = 0) {
  using Scalar = typename Derived::Scalar;
  if (d_last <= d_first) throw ParameterError("K2 needs a dimension range of at least two values");
  if (epsilons.empty()) throw ParameterError("K2 needs at least one threshold");
  for (std::size_t i = 1; i < epsilons.size(); ++i) {
    if (!(epsilons[i] < epsilons[i - 1])) throw ParameterError("K2 threshold grid must be descending");
  }
  const Series<Scalar> normalized = normalize(series);
  const auto counts = correlation_counts_by_dimension<Scalar>(normalized, d_first, d_last + 1, lag, epsilons, theiler);
  std::vector<double> eps(epsilons.begin(), epsilons.end());
  return k2_from_counts(eps, counts, d_first, d_last, lag);
}

/// x component of the Lorenz system (sigma 10, rho 28, beta 8/3) by fixed-step
/// RK4; `transient` steps are integrated and discarded first.
template <typename Scalar = double>
Series<Scalar> lorenz_series(std::size_t steps, Scalar dt, const Eigen::Matrix<Scalar, 3, 1>& initial,
                             std::size_t transient = 1000) {
  if (!(dt > Scalar(0) && dt <= Scalar(0.05))) throw ParameterError("Lorenz dt must lie in (0, 0.05]");
  if (steps < 1) throw ParameterError("Lorenz steps must be >= 1");
  using State = Eigen::Matrix<Scalar, 3, 1>;
  const Scalar sigma(10), rho(28), beta = Scalar(8) / Scalar(3);
  auto field = [&](const State& v) {
    return State(sigma * (v.y() - v.x()), v.x() * (rho - v.z()) - v.y(), v.x() * v.y() - beta * v.z());
  };
  auto step = [&](const State& v) {
    const State k1 = field(v);
    const State k2 = field(v + dt / 2 * k1);
    const State k3 = field(v + dt / 2 * k2);
    const State k4 = field(v + dt * k3);
    return State(v + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4));
  };
  State state = initial;
  for (std::size_t i = 0; i < transient; ++i) state = step(state);
  Series<Scalar> out(static_cast<Eigen::Index>(steps));
  for (std::size_t i = 0; i < steps; ++i) {
    state = step(state);
    if (!state.allFinite()) throw IntegrationError("Lorenz integration diverged at step " + std::to_string(i));
    out(static_cast<Eigen::Index>(i)) = state.x();
  }
  return out;
}

/// n log-spaced values from hi down to lo (descending).
std::vector<double> log_grid_descending(double hi, double lo, std::size_t n);

/// Radii snapped to half-steps (m + 1/2) / (levels - 1) of a quantized series
/// so that pair counts do not jitter with the quantization; ascending, unique.
std::vector<double> quantized_grid(double lo, double hi, std::size_t n, std::uint32_t levels);

}  // namespace ef
