#include "pair/wtv.hpp"

#include <cmath>
#include <limits>

#include "pair/error.hpp"

namespace pair {

namespace {

void check_shapes(const RealImage &m, const EdgeWeights &w) {
  require(w.vertical.rows() == m.rows() && w.vertical.cols() == m.cols() &&
              w.horizontal.rows() == m.rows() &&
              w.horizontal.cols() == m.cols(),
          ErrorKind::Shape, "edge weights do not match image shape");
}

// Backward differences along rows (dx) and columns (dy), zero on the first
// row/column.
void backward_differences(const RealImage &m, RealImage &dx, RealImage &dy) {
  const Eigen::Index n = m.rows(), k = m.cols();
  dx = RealImage::Zero(n, k);
  dy = RealImage::Zero(n, k);
  if (n > 1)
    dx.bottomRows(n - 1) = m.bottomRows(n - 1) - m.topRows(n - 1);
  if (k > 1)
    dy.rightCols(k - 1) = m.rightCols(k - 1) - m.leftCols(k - 1);
}

} // namespace

EdgeWeights EdgeWeights::uniform(Eigen::Index rows, Eigen::Index cols) {
  EdgeWeights w;
  w.vertical = RealImage::Ones(rows, cols);
  w.horizontal = RealImage::Ones(rows, cols);
  w.delta = std::numeric_limits<double>::infinity();
  return w;
}

EdgeWeights compute_weights(const RealImage &m0, double delta) {
  require(delta > 0.0, ErrorKind::Domain, "weight deviation delta must be > 0");
  require(m0.size() > 0 && m0.allFinite(), ErrorKind::Domain,
          "b=0 image must be non-empty and finite");
  const double peak = m0.abs().maxCoeff();
  const RealImage scaled = peak > 0.0 ? RealImage(m0 / peak) : m0;
  RealImage dx, dy;
  backward_differences(scaled, dx, dy);
  EdgeWeights w;
  w.delta = delta;
  w.vertical = (-dx.square() / delta).exp();
  w.horizontal = (-dy.square() / delta).exp();
  return w;
}

double wtv_value(const RealImage &m, const EdgeWeights &w, double smoothing) {
  check_shapes(m, w);
  RealImage dx, dy;
  backward_differences(m, dx, dy);
  const RealImage mag = (w.vertical * dx.square() + w.horizontal * dy.square() +
                         smoothing * smoothing)
                            .sqrt();
  return (mag - smoothing).sum();
}

RealImage wtv_subgradient(const RealImage &m, const EdgeWeights &w,
                          double smoothing) {
  check_shapes(m, w);
  const Eigen::Index n = m.rows(), k = m.cols();
  RealImage dx, dy;
  backward_differences(m, dx, dy);
  const RealImage mag = (w.vertical * dx.square() + w.horizontal * dy.square() +
                         smoothing * smoothing)
                            .sqrt();
  // d(mag)/d(dx) and d(mag)/d(dy); zero where the magnitude vanishes.
  const RealImage gx = (mag > 0.0).select(w.vertical * dx / mag, 0.0);
  const RealImage gy = (mag > 0.0).select(w.horizontal * dy / mag, 0.0);

  // dx(x, y) depends on m(x, y) with +1 and m(x-1, y) with -1 for x >= 1.
  RealImage grad = RealImage::Zero(n, k);
  if (n > 1) {
    grad.bottomRows(n - 1) += gx.bottomRows(n - 1);
    grad.topRows(n - 1) -= gx.bottomRows(n - 1);
  }
  if (k > 1) {
    grad.rightCols(k - 1) += gy.rightCols(k - 1);
    grad.leftCols(k - 1) -= gy.rightCols(k - 1);
  }
  return grad;
}

} // namespace pair
