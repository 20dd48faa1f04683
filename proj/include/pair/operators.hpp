#pragma once

#include <vector>

#include "pair/grid.hpp"

namespace pair {

/// Unitary 2-D DFT, image center and k-space DC both at (floor(N/2),
/// floor(M/2)). idft_centered is its exact inverse and adjoint.
ComplexImage dft_centered(const ComplexImage &image);
ComplexImage idft_centered(const ComplexImage &kspace);

ComplexGrid dft_centered(const ComplexGrid &image);
ComplexGrid idft_centered(const ComplexGrid &kspace);

/// Per-shot unit-modulus phase maps. Construction projects every value onto
/// the unit circle; values with magnitude below 1e-12 become 1.
class ShotPhaseSet {
public:
  explicit ShotPhaseSet(std::vector<ComplexImage> images);
  /// Unit phases exp(i * angle) from real angle maps.
  static ShotPhaseSet from_angles(const std::vector<RealImage> &angles);
  /// J constant phases equal to 1.
  static ShotPhaseSet identity(int shots, Eigen::Index rows, Eigen::Index cols);

  int count() const { return static_cast<int>(phases_.size()); }
  const ComplexImage &operator[](int j) const {
    return phases_[static_cast<std::size_t>(j)];
  }
  const std::vector<ComplexImage> &phases() const { return phases_; }

private:
  std::vector<ComplexImage> phases_;
};

ComplexImage unit_phase(const ComplexImage &x);

/// U F (C_h . P_j . m): masked centered k-space of one coil/shot.
ComplexImage apply_forward(const RealImage &m, const ComplexImage &phase,
                           const ComplexImage &coil, const MaskGrid &mask);
/// Complex-input form of the same chain, x standing in for P_j . m.
ComplexImage apply_forward(const ComplexImage &x, const ComplexImage &phase,
                           const ComplexImage &coil, const MaskGrid &mask);
/// conj(P_j) . conj(C_h) . F* U* y, the exact adjoint of apply_forward.
ComplexImage apply_adjoint(const ComplexImage &y, const ComplexImage &phase,
                           const ComplexImage &coil, const MaskGrid &mask);

/// sum_h conj(C_h) . G_h, accumulated in channel order.
ComplexImage coil_combine(const std::vector<ComplexImage> &per_coil,
                          const CoilMapSet &coils);

} // namespace pair
