#include "pair/grid.hpp"

#include <cmath>

#include "pair/error.hpp"

namespace pair {

bool all_finite(const ComplexImage &x) {
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const cplx v = x.data()[i];
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
      return false;
  }
  return true;
}

bool all_finite(const RealImage &x) { return x.allFinite(); }

ComplexGrid::ComplexGrid(ComplexImage values, Domain domain)
    : values_(std::move(values)), domain_(domain) {
  require(values_.rows() >= 1 && values_.cols() >= 1, ErrorKind::Shape,
          "ComplexGrid: empty grid");
  require(all_finite(values_), ErrorKind::Numerical,
          "ComplexGrid: non-finite value");
}

std::string to_string(MaskKind kind) {
  switch (kind) {
  case MaskKind::FullInterleave:
    return "full-interleave";
  case MaskKind::UniformUndersampled:
    return "uniform-undersampled";
  case MaskKind::PartialFourier:
    return "partial-fourier";
  }
  return "unknown";
}

MaskKind mask_kind_from_string(const std::string &s) {
  if (s == "full-interleave")
    return MaskKind::FullInterleave;
  if (s == "uniform-undersampled")
    return MaskKind::UniformUndersampled;
  if (s == "partial-fourier")
    return MaskKind::PartialFourier;
  fail(ErrorKind::Format, "unknown mask kind '" + s + "'");
}

std::vector<int> SamplingMask::lines() const {
  std::vector<int> out;
  for (Eigen::Index c = 0; c < bits.cols(); ++c)
    if (bits.col(c).any())
      out.push_back(static_cast<int>(c));
  return out;
}

AcquisitionSet::AcquisitionSet(std::vector<std::vector<ComplexImage>> kspace,
                               std::vector<SamplingMask> masks,
                               AcquisitionMeta meta)
    : kspace_(std::move(kspace)), masks_(std::move(masks)),
      meta_(std::move(meta)) {
  require(!kspace_.empty() && !kspace_.front().empty(), ErrorKind::Shape,
          "acquisition needs at least one shot and one channel");
  require(masks_.size() == kspace_.size(), ErrorKind::Format,
          "mask count " + std::to_string(masks_.size()) +
              " does not match shot count " + std::to_string(kspace_.size()));
  require(meta_.b_value >= 0.0, ErrorKind::Format, "negative b-value");
  if (meta_.direction) {
    const auto &d = *meta_.direction;
    const double n = std::sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2]);
    require(std::abs(n - 1.0) < 1e-6, ErrorKind::Format,
            "direction must be a unit vector");
  }

  const Eigen::Index n = kspace_.front().front().rows();
  const Eigen::Index m = kspace_.front().front().cols();
  require(n >= 1 && m >= 1, ErrorKind::Shape, "empty k-space grid");
  const std::size_t h = kspace_.front().size();

  for (std::size_t j = 0; j < kspace_.size(); ++j) {
    require(kspace_[j].size() == h, ErrorKind::Shape,
            "channel count differs between shots");
    const SamplingMask &mask = masks_[j];
    require(mask.rows() == n && mask.cols() == m, ErrorKind::Shape,
            "mask shape does not match k-space");
    require(mask.bits.any(), ErrorKind::Format,
            "shot " + std::to_string(j) + " has an empty mask");
    for (auto &grid : kspace_[j]) {
      require(grid.rows() == n && grid.cols() == m, ErrorKind::Shape,
              "k-space grid shape mismatch");
      require(all_finite(grid), ErrorKind::Format, "non-finite k-space value");
      grid = mask.bits.select(grid, cplx(0.0, 0.0));
    }
  }

  // Interleaved shots never share a phase-encode line; a full interleave
  // additionally covers every line.
  std::vector<int> owner(static_cast<std::size_t>(m), -1);
  for (std::size_t j = 0; j < masks_.size(); ++j) {
    for (int line : masks_[j].lines()) {
      auto &o = owner[static_cast<std::size_t>(line)];
      require(o < 0, ErrorKind::Format,
              "PE line " + std::to_string(line) + " sampled by shots " +
                  std::to_string(o) + " and " + std::to_string(j));
      o = static_cast<int>(j);
    }
  }
  bool full = true;
  for (const auto &mask : masks_)
    full = full && mask.kind == MaskKind::FullInterleave;
  if (full) {
    for (std::size_t c = 0; c < owner.size(); ++c)
      require(owner[c] >= 0, ErrorKind::Format,
              "full interleave leaves PE line " + std::to_string(c) +
                  " unsampled");
  }
}

AcquisitionSet AcquisitionSet::scaled(double s) const {
  auto k = kspace_;
  for (auto &shot : k)
    for (auto &grid : shot)
      grid *= s;
  return AcquisitionSet(std::move(k), masks_, meta_);
}

AcquisitionSet
AcquisitionSet::with_masks(std::vector<SamplingMask> masks) const {
  return AcquisitionSet(kspace_, std::move(masks), meta_);
}

CoilMapSet::CoilMapSet(std::vector<ComplexImage> maps, bool normalized)
    : maps_(std::move(maps)), normalized_(normalized) {
  require(!maps_.empty(), ErrorKind::Shape, "coil map set is empty");
  for (const auto &c : maps_) {
    require(c.rows() == maps_.front().rows() &&
                c.cols() == maps_.front().cols(),
            ErrorKind::Shape, "coil maps differ in shape");
    require(all_finite(c), ErrorKind::Numerical, "non-finite coil value");
  }
}

MaskGrid CoilMapSet::support() const {
  RealImage ss = RealImage::Zero(rows(), cols());
  for (const auto &c : maps_)
    ss += c.abs2();
  return ss > 0.0;
}

CoilMapSet CoilMapSet::restricted(const MaskGrid &support) const {
  require(support.rows() == rows() && support.cols() == cols(),
          ErrorKind::Shape, "support mask does not match the coil maps");
  std::vector<ComplexImage> out;
  out.reserve(maps_.size());
  for (const auto &c : maps_)
    out.push_back(support.select(c, cplx(0.0, 0.0)));
  return CoilMapSet(std::move(out), normalized_);
}

CoilMapSet CoilMapSet::normalized() const {
  RealImage ss = RealImage::Zero(rows(), cols());
  for (const auto &c : maps_)
    ss += c.abs2();
  const RealImage inv = (ss > 0.0).select(ss.sqrt().inverse(), 0.0);
  std::vector<ComplexImage> out;
  out.reserve(maps_.size());
  for (const auto &c : maps_)
    out.push_back(c * inv.cast<cplx>());
  return CoilMapSet(std::move(out), true);
}

} // namespace pair
