#pragma once

#include "pair/grid.hpp"

namespace pair {

inline constexpr double kDefaultDelta = 0.01;
inline constexpr double kTvSmoothing = 1e-8;

/// Edge weights: vertical pairs m(x, y) with m(x-1, y), horizontal pairs
/// m(x, y) with m(x, y-1). Values in (0, 1].
struct EdgeWeights {
  RealImage vertical;
  RealImage horizontal;
  double delta = kDefaultDelta;

  /// All-ones weights, which reduce weighted TV to isotropic TV.
  static EdgeWeights uniform(Eigen::Index rows, Eigen::Index cols);
};

/// Weights from the b=0 image, after rescaling it to max 1:
/// W = exp(-(backward difference)^2 / delta). First row/column get weight 1.
EdgeWeights compute_weights(const RealImage &m0, double delta = kDefaultDelta);

/// sum over pixels of sqrt(Wv dx^2 + Wh dy^2 + eps^2) - eps, backward
/// differences with zero difference on the first row/column.
double wtv_value(const RealImage &m, const EdgeWeights &w,
                 double smoothing = kTvSmoothing);

/// Gradient of wtv_value with respect to m.
RealImage wtv_subgradient(const RealImage &m, const EdgeWeights &w,
                          double smoothing = kTvSmoothing);

} // namespace pair
