#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include <Eigen/Dense>

#include "pair/grid.hpp"

namespace testing {

using pair::ComplexImage;
using pair::cplx;
using pair::RealImage;

inline ComplexImage random_complex(Eigen::Index rows, Eigen::Index cols,
                                   std::mt19937_64 &rng) {
  std::normal_distribution<double> g;
  ComplexImage x(rows, cols);
  for (Eigen::Index i = 0; i < x.size(); ++i)
    x.data()[i] = cplx(g(rng), g(rng));
  return x;
}

inline RealImage random_real(Eigen::Index rows, Eigen::Index cols,
                             std::mt19937_64 &rng, double lo = 0.0,
                             double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  RealImage x(rows, cols);
  for (Eigen::Index i = 0; i < x.size(); ++i)
    x.data()[i] = u(rng);
  return x;
}

inline Eigen::VectorXcd vec(const ComplexImage &x) {
  return Eigen::Map<const Eigen::VectorXcd>(x.data(), x.size());
}

inline ComplexImage unvec(const Eigen::VectorXcd &v, Eigen::Index rows,
                          Eigen::Index cols) {
  return Eigen::Map<const Eigen::ArrayXXcd>(v.data(), rows, cols);
}

// Centered unitary 1-D DFT matrix built straight from the definition: sample
// r sits at position r - floor(n/2), frequency u at u - floor(n/2).
inline Eigen::MatrixXcd dft_matrix_1d(Eigen::Index n) {
  Eigen::MatrixXcd f(n, n);
  const double c = static_cast<double>(n / 2);
  for (Eigen::Index u = 0; u < n; ++u)
    for (Eigen::Index r = 0; r < n; ++r) {
      const double arg = -2.0 * std::numbers::pi * (u - c) * (r - c) / n;
      f(u, r) = std::polar(1.0 / std::sqrt(static_cast<double>(n)), arg);
    }
  return f;
}

// Column-major vectorization: index r + rows * c. The 2-D transform is then
// kron(F_cols, F_rows).
inline Eigen::MatrixXcd dft_matrix_2d(Eigen::Index rows, Eigen::Index cols) {
  const Eigen::MatrixXcd fr = dft_matrix_1d(rows), fc = dft_matrix_1d(cols);
  Eigen::MatrixXcd out(rows * cols, rows * cols);
  for (Eigen::Index a = 0; a < cols; ++a)
    for (Eigen::Index b = 0; b < cols; ++b)
      out.block(a * rows, b * rows, rows, rows) = fc(a, b) * fr;
  return out;
}

inline double rel_err(const ComplexImage &a, const ComplexImage &b) {
  const double den = std::sqrt(b.abs2().sum());
  return std::sqrt((a - b).abs2().sum()) / (den > 0 ? den : 1.0);
}

inline double rel_err(const RealImage &a, const RealImage &b) {
  const double den = std::sqrt(b.square().sum());
  return std::sqrt((a - b).square().sum()) / (den > 0 ? den : 1.0);
}

} // namespace testing
