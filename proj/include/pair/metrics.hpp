#pragma once

#include <array>
#include <limits>
#include <vector>

#include <Eigen/Core>

#include "pair/grid.hpp"

namespace pair {

/// 10 log10(NM / ||test - ref||^2) after scaling both by 1 / max(ref).
/// Identical images give +infinity.
double psnr(const RealImage &reference, const RealImage &test);

/// One diffusion-weighted image with its encoding.
struct DiffusionSample {
  RealImage image;
  double b_value = 0.0;
  std::array<double, 3> direction{};
};

/// Symmetric 3x3 tensor per pixel plus validity.
struct TensorField {
  Eigen::Index rows = 0, cols = 0;
  std::vector<Eigen::Matrix3d> tensors; // column-major pixel order
  MaskGrid valid;

  const Eigen::Matrix3d &at(Eigen::Index r, Eigen::Index c) const {
    return tensors[static_cast<std::size_t>(c * rows + r)];
  }
};

/// Per-pixel linear least squares on ln(s / s0) = -b g^T D g. Pixels with a
/// non-positive signal are invalid.
TensorField fit_tensor(const std::vector<DiffusionSample> &dwi,
                       const RealImage &b0);

struct DirectionField {
  Eigen::Index rows = 0, cols = 0;
  std::vector<Eigen::Vector3d> directions; // column-major pixel order
  MaskGrid valid;
  RealImage fa;

  const Eigen::Vector3d &at(Eigen::Index r, Eigen::Index c) const {
    return directions[static_cast<std::size_t>(c * rows + r)];
  }
};

/// Principal eigenvector per pixel, sign fixed so the first nonzero component
/// is positive, with fractional anisotropy.
DirectionField primary_direction(const TensorField &tensors);

/// Mean of acos(|<v, w>|) in degrees over jointly valid pixels.
double aae(const DirectionField &reference, const DirectionField &test);

double fractional_anisotropy(const Eigen::Vector3d &eigenvalues);

} // namespace pair
