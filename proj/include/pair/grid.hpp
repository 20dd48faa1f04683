#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace pair {

using cplx = std::complex<double>;

// Grids are N rows (readout) by M columns (phase encode), column-major.
using ComplexImage = Eigen::ArrayXXcd;
using RealImage = Eigen::ArrayXXd;
using MaskGrid = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

enum class Domain { Image, KSpace };

/// A 2-D complex grid tagged with the domain it lives in. K-space grids put
/// DC at (floor(N/2), floor(M/2)).
class ComplexGrid {
public:
  ComplexGrid(ComplexImage values, Domain domain);

  Eigen::Index rows() const { return values_.rows(); }
  Eigen::Index cols() const { return values_.cols(); }
  Domain domain() const { return domain_; }
  const ComplexImage &values() const { return values_; }

private:
  ComplexImage values_;
  Domain domain_;
};

enum class MaskKind { FullInterleave, UniformUndersampled, PartialFourier };

std::string to_string(MaskKind kind);
MaskKind mask_kind_from_string(const std::string &s);

struct SamplingMask {
  MaskGrid bits;
  MaskKind kind = MaskKind::FullInterleave;

  Eigen::Index rows() const { return bits.rows(); }
  Eigen::Index cols() const { return bits.cols(); }
  /// Phase-encode lines with at least one sampled readout point.
  std::vector<int> lines() const;
};

struct AcquisitionMeta {
  double b_value = 0.0; // s/mm^2
  std::optional<std::array<double, 3>> direction;
};

/// Sampled multi-shot multi-channel k-space. Immutable once built; the
/// constructor validates shapes and masks and zeroes every non-acquired entry.
class AcquisitionSet {
public:
  /// kspace is indexed [shot][channel].
  AcquisitionSet(std::vector<std::vector<ComplexImage>> kspace,
                 std::vector<SamplingMask> masks, AcquisitionMeta meta = {});

  int shots() const { return static_cast<int>(kspace_.size()); }
  int channels() const { return static_cast<int>(kspace_.front().size()); }
  Eigen::Index rows() const { return kspace_.front().front().rows(); }
  Eigen::Index cols() const { return kspace_.front().front().cols(); }

  const ComplexImage &kspace(int shot, int channel) const {
    return kspace_[static_cast<std::size_t>(shot)]
                  [static_cast<std::size_t>(channel)];
  }
  const SamplingMask &mask(int shot) const {
    return masks_[static_cast<std::size_t>(shot)];
  }
  const std::vector<SamplingMask> &masks() const { return masks_; }
  const AcquisitionMeta &meta() const { return meta_; }

  /// Same masks and metadata, every k-space value multiplied by s.
  AcquisitionSet scaled(double s) const;
  /// Same data under new masks; entries outside them are dropped.
  AcquisitionSet with_masks(std::vector<SamplingMask> masks) const;

private:
  std::vector<std::vector<ComplexImage>> kspace_;
  std::vector<SamplingMask> masks_;
  AcquisitionMeta meta_;
};

/// Coil sensitivities. normalized() rescales so that sum_h |C_h|^2 = 1 on the
/// support; pixels where every coil vanishes stay zero (background).
class CoilMapSet {
public:
  explicit CoilMapSet(std::vector<ComplexImage> maps, bool normalized = false);

  int count() const { return static_cast<int>(maps_.size()); }
  Eigen::Index rows() const { return maps_.front().rows(); }
  Eigen::Index cols() const { return maps_.front().cols(); }
  bool is_normalized() const { return normalized_; }
  const ComplexImage &operator[](int h) const {
    return maps_[static_cast<std::size_t>(h)];
  }
  const std::vector<ComplexImage> &maps() const { return maps_; }

  CoilMapSet normalized() const;
  /// Zero outside the mask. Normalization is kept, since the sum of squares
  /// is unchanged inside and zero outside.
  CoilMapSet restricted(const MaskGrid &support) const;
  /// Pixels where sum_h |C_h|^2 > 0.
  MaskGrid support() const;

private:
  std::vector<ComplexImage> maps_;
  bool normalized_;
};

bool all_finite(const ComplexImage &x);
bool all_finite(const RealImage &x);

} // namespace pair
