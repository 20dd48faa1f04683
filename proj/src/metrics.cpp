#include "pair/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Dense>

#include "pair/error.hpp"

namespace pair {

double psnr(const RealImage &reference, const RealImage &test) {
  require(reference.rows() == test.rows() && reference.cols() == test.cols(),
          ErrorKind::Shape, "psnr: image shapes differ");
  require(reference.size() > 0, ErrorKind::Shape, "psnr: empty images");
  const double peak = reference.maxCoeff();
  require(peak > 0.0, ErrorKind::Domain, "psnr: reference has no positive peak");
  const double err = ((test - reference) / peak).square().sum();
  if (err == 0.0)
    return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(static_cast<double>(reference.size()) / err);
}

TensorField fit_tensor(const std::vector<DiffusionSample> &dwi,
                       const RealImage &b0) {
  require(dwi.size() >= 6, ErrorKind::Domain,
          "tensor fit needs at least 6 diffusion-weighted images");
  const Eigen::Index n = static_cast<Eigen::Index>(dwi.size());
  Eigen::MatrixXd design(n, 6);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto &s = dwi[static_cast<std::size_t>(i)];
    require(s.image.rows() == b0.rows() && s.image.cols() == b0.cols(),
            ErrorKind::Shape, "diffusion image shape mismatch");
    Eigen::Vector3d g(s.direction[0], s.direction[1], s.direction[2]);
    require(g.norm() > 0.0, ErrorKind::Domain, "zero diffusion direction");
    g.normalize();
    design.row(i) << g.x() * g.x(), g.y() * g.y(), g.z() * g.z(),
        2 * g.x() * g.y(), 2 * g.x() * g.z(), 2 * g.y() * g.z();
    design.row(i) *= -s.b_value;
  }
  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  require(qr.rank() == 6, ErrorKind::Domain,
          "diffusion directions do not determine a tensor (rank " +
              std::to_string(qr.rank()) + ")");

  TensorField out;
  out.rows = b0.rows();
  out.cols = b0.cols();
  out.tensors.assign(static_cast<std::size_t>(b0.size()),
                     Eigen::Matrix3d::Zero());
  out.valid = MaskGrid::Constant(b0.rows(), b0.cols(), false);
  Eigen::VectorXd rhs(n);
  for (Eigen::Index c = 0; c < b0.cols(); ++c)
    for (Eigen::Index r = 0; r < b0.rows(); ++r) {
      bool ok = b0(r, c) > 0.0;
      for (Eigen::Index i = 0; ok && i < n; ++i) {
        const double s = dwi[static_cast<std::size_t>(i)].image(r, c);
        ok = s > 0.0;
        rhs(i) = ok ? std::log(s / b0(r, c)) : 0.0;
      }
      if (!ok)
        continue;
      const Eigen::VectorXd d = qr.solve(rhs);
      Eigen::Matrix3d t;
      t << d(0), d(3), d(4), d(3), d(1), d(5), d(4), d(5), d(2);
      out.tensors[static_cast<std::size_t>(c * b0.rows() + r)] = t;
      out.valid(r, c) = true;
    }
  return out;
}

double fractional_anisotropy(const Eigen::Vector3d &ev) {
  const double mean = ev.mean();
  const double num = (ev.array() - mean).square().sum();
  const double den = ev.squaredNorm();
  if (den == 0.0)
    return 0.0;
  return std::sqrt(1.5 * num / den);
}

DirectionField primary_direction(const TensorField &tensors) {
  DirectionField out;
  out.rows = tensors.rows;
  out.cols = tensors.cols;
  out.valid = tensors.valid;
  out.fa = RealImage::Zero(tensors.rows, tensors.cols);
  out.directions.assign(tensors.tensors.size(), Eigen::Vector3d::Zero());
  for (Eigen::Index c = 0; c < tensors.cols; ++c)
    for (Eigen::Index r = 0; r < tensors.rows; ++r) {
      if (!tensors.valid(r, c))
        continue;
      Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(tensors.at(r, c));
      Eigen::Vector3d v = eig.eigenvectors().col(2);
      for (int k = 0; k < 3; ++k)
        if (v(k) != 0.0) {
          if (v(k) < 0.0)
            v = -v;
          break;
        }
      const std::size_t idx = static_cast<std::size_t>(c * tensors.rows + r);
      out.directions[idx] = v.normalized();
      out.fa(r, c) = fractional_anisotropy(eig.eigenvalues());
    }
  return out;
}

double aae(const DirectionField &reference, const DirectionField &test) {
  require(reference.rows == test.rows && reference.cols == test.cols,
          ErrorKind::Shape, "aae: direction fields differ in shape");
  double sum = 0.0;
  std::size_t count = 0;
  for (Eigen::Index c = 0; c < reference.cols; ++c)
    for (Eigen::Index r = 0; r < reference.rows; ++r) {
      if (!reference.valid(r, c) || !test.valid(r, c))
        continue;
      const double dot =
          std::clamp(std::abs(reference.at(r, c).dot(test.at(r, c))), 0.0, 1.0);
      sum += std::acos(dot) * 180.0 / std::numbers::pi;
      ++count;
    }
  require(count > 0, ErrorKind::Domain, "aae: no jointly valid pixels");
  return sum / static_cast<double>(count);
}

} // namespace pair
