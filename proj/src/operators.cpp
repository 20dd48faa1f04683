#include "pair/operators.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <tuple>

#include <fftw3.h>

#include "pair/error.hpp"

namespace pair {

namespace {

// FFTW planning is not thread-safe; execution with new-array calls is.
// FFTW_ESTIMATE keeps the plan (and hence the bits) independent of timing.
fftw_plan plan_for(Eigen::Index n, Eigen::Index m, int sign) {
  static std::mutex mu;
  static std::map<std::tuple<Eigen::Index, Eigen::Index, int>, fftw_plan>
      cache;
  std::lock_guard lock(mu);
  auto key = std::make_tuple(n, m, sign);
  if (auto it = cache.find(key); it != cache.end())
    return it->second;
  ComplexImage scratch(n, m);
  auto *p = reinterpret_cast<fftw_complex *>(scratch.data());
  // Column-major N x M is row-major M x N; the 2-D DFT does not care.
  fftw_plan plan = fftw_plan_dft_2d(static_cast<int>(m), static_cast<int>(n),
                                    p, p, sign,
                                    FFTW_ESTIMATE | FFTW_UNALIGNED);
  require(plan != nullptr, ErrorKind::Numerical, "FFTW planning failed");
  cache.emplace(key, plan);
  return plan;
}

// out(i, j) = in((i + sr) mod N, (j + sc) mod M)
ComplexImage circshift_read(const ComplexImage &in, Eigen::Index sr,
                            Eigen::Index sc) {
  const Eigen::Index n = in.rows(), m = in.cols();
  ComplexImage out(n, m);
  for (Eigen::Index j = 0; j < m; ++j) {
    const Eigen::Index jj = (j + sc) % m;
    for (Eigen::Index i = 0; i < n; ++i)
      out(i, j) = in((i + sr) % n, jj);
  }
  return out;
}

ComplexImage centered_transform(const ComplexImage &x, int sign) {
  const Eigen::Index n = x.rows(), m = x.cols();
  require(n >= 1 && m >= 1, ErrorKind::Shape, "empty grid");
  // ifftshift: move the center to index 0.
  ComplexImage work = circshift_read(x, n / 2, m / 2);
  auto *p = reinterpret_cast<fftw_complex *>(work.data());
  fftw_execute_dft(plan_for(n, m, sign), p, p);
  work *= 1.0 / std::sqrt(static_cast<double>(n * m));
  // fftshift: index 0 moves to the center.
  return circshift_read(work, n - n / 2, m - m / 2);
}

void check_same_shape(const ComplexImage &a, const ComplexImage &b,
                      const char *what) {
  require(a.rows() == b.rows() && a.cols() == b.cols(), ErrorKind::Shape,
          std::string("shape mismatch: ") + what);
}

} // namespace

ComplexImage dft_centered(const ComplexImage &image) {
  return centered_transform(image, FFTW_FORWARD);
}

ComplexImage idft_centered(const ComplexImage &kspace) {
  return centered_transform(kspace, FFTW_BACKWARD);
}

ComplexGrid dft_centered(const ComplexGrid &image) {
  require(image.domain() == Domain::Image, ErrorKind::Domain,
          "dft_centered expects an image-domain grid");
  return ComplexGrid(dft_centered(image.values()), Domain::KSpace);
}

ComplexGrid idft_centered(const ComplexGrid &kspace) {
  require(kspace.domain() == Domain::KSpace, ErrorKind::Domain,
          "idft_centered expects a k-space grid");
  return ComplexGrid(idft_centered(kspace.values()), Domain::Image);
}

ComplexImage unit_phase(const ComplexImage &x) {
  ComplexImage out(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const cplx v = x.data()[i];
    const double a = std::abs(v);
    out.data()[i] = a < 1e-12 ? cplx(1.0, 0.0) : v / a;
  }
  return out;
}

ShotPhaseSet::ShotPhaseSet(std::vector<ComplexImage> images) {
  require(!images.empty(), ErrorKind::Shape, "phase set is empty");
  phases_.reserve(images.size());
  for (const auto &img : images) {
    check_same_shape(img, images.front(), "shot phases");
    require(all_finite(img), ErrorKind::Numerical, "non-finite phase");
    phases_.push_back(unit_phase(img));
  }
}

ShotPhaseSet ShotPhaseSet::from_angles(const std::vector<RealImage> &angles) {
  std::vector<ComplexImage> out;
  out.reserve(angles.size());
  for (const auto &a : angles)
    out.push_back(a.unaryExpr([](double t) { return std::polar(1.0, t); }));
  return ShotPhaseSet(std::move(out));
}

ShotPhaseSet ShotPhaseSet::identity(int shots, Eigen::Index rows,
                                    Eigen::Index cols) {
  return ShotPhaseSet(std::vector<ComplexImage>(
      static_cast<std::size_t>(shots),
      ComplexImage::Constant(rows, cols, cplx(1.0, 0.0))));
}

ComplexImage apply_forward(const ComplexImage &x, const ComplexImage &phase,
                           const ComplexImage &coil, const MaskGrid &mask) {
  check_same_shape(x, phase, "image vs phase");
  check_same_shape(x, coil, "image vs coil");
  require(mask.rows() == x.rows() && mask.cols() == x.cols(),
          ErrorKind::Shape, "shape mismatch: image vs mask");
  const ComplexImage k = dft_centered(ComplexImage(coil * phase * x));
  return mask.select(k, cplx(0.0, 0.0));
}

ComplexImage apply_forward(const RealImage &m, const ComplexImage &phase,
                           const ComplexImage &coil, const MaskGrid &mask) {
  return apply_forward(ComplexImage(m.cast<cplx>()), phase, coil, mask);
}

ComplexImage apply_adjoint(const ComplexImage &y, const ComplexImage &phase,
                           const ComplexImage &coil, const MaskGrid &mask) {
  check_same_shape(y, phase, "k-space vs phase");
  check_same_shape(y, coil, "k-space vs coil");
  require(mask.rows() == y.rows() && mask.cols() == y.cols(),
          ErrorKind::Shape, "shape mismatch: k-space vs mask");
  const ComplexImage img =
      idft_centered(ComplexImage(mask.select(y, cplx(0.0, 0.0))));
  return img * coil.conjugate() * phase.conjugate();
}

ComplexImage coil_combine(const std::vector<ComplexImage> &per_coil,
                          const CoilMapSet &coils) {
  require(static_cast<int>(per_coil.size()) == coils.count(), ErrorKind::Shape,
          "coil_combine: image count does not match coil count");
  ComplexImage out = ComplexImage::Zero(coils.rows(), coils.cols());
  for (int h = 0; h < coils.count(); ++h) {
    check_same_shape(per_coil[static_cast<std::size_t>(h)], coils[h],
                     "coil image vs coil map");
    out += coils[h].conjugate() * per_coil[static_cast<std::size_t>(h)];
  }
  return out;
}

} // namespace pair
