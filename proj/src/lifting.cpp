#include "pair/lifting.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "pair/error.hpp"
#include "pair/operators.hpp"

namespace pair {

SupportRegion support_points(int radius) {
  require(radius >= 0, ErrorKind::Domain, "support radius must be >= 0");
  SupportRegion z;
  z.radius = radius;
  for (int p = -radius; p <= radius; ++p)
    for (int q = -radius; q <= radius; ++q)
      if (p * p + q * q <= radius * radius)
        z.points.push_back({p, q});
  return z;
}

namespace {

struct CenteredRange {
  Eigen::Index lo, hi; // inclusive, centered coordinates
  Eigen::Index center;
  bool contains(Eigen::Index v) const { return v >= lo && v <= hi; }
};

CenteredRange range_of(Eigen::Index n) {
  return {-(n / 2), n - 1 - n / 2, n / 2};
}

} // namespace

std::vector<Offset> valid_coordinates(Eigen::Index rows, Eigen::Index cols,
                                      const SupportRegion &support) {
  const CenteredRange rx = range_of(rows), ry = range_of(cols);
  std::vector<Offset> out;
  for (Eigen::Index x = rx.lo; x <= rx.hi; ++x)
    for (Eigen::Index y = ry.lo; y <= ry.hi; ++y) {
      bool ok = true;
      for (const Offset &o : support.points) {
        ok = rx.contains(x - o.p) && rx.contains(-x - o.p) &&
             ry.contains(y - o.q) && ry.contains(-y - o.q);
        if (!ok)
          break;
      }
      if (ok)
        out.push_back({static_cast<int>(x), static_cast<int>(y)});
    }
  return out;
}

LiftedMatrix lift(const ComplexImage &kspace, const SupportRegion &support) {
  require(!support.points.empty(), ErrorKind::Domain, "empty support region");
  LiftedMatrix out;
  out.grid_rows = kspace.rows();
  out.grid_cols = kspace.cols();
  out.coords = valid_coordinates(kspace.rows(), kspace.cols(), support);
  require(!out.coords.empty(), ErrorKind::Shape,
          "grid too small for support radius " +
              std::to_string(support.radius));

  const Eigen::Index nr = support.size();
  const Eigen::Index nv = static_cast<Eigen::Index>(out.coords.size());
  const Eigen::Index cx = kspace.rows() / 2, cy = kspace.cols() / 2;
  out.values.resize(2 * nr, 2 * nv);
  out.weight = Eigen::ArrayXXd::Zero(kspace.rows(), kspace.cols());

  for (Eigen::Index e = 0; e < nv; ++e) {
    const Offset &c = out.coords[static_cast<std::size_t>(e)];
    for (Eigen::Index f = 0; f < nr; ++f) {
      const Offset &o = support.points[static_cast<std::size_t>(f)];
      const Eigen::Index ip = c.p - o.p + cx, jp = c.q - o.q + cy;
      const Eigen::Index im = -c.p - o.p + cx, jm = -c.q - o.q + cy;
      const cplx plus = kspace(ip, jp), minus = kspace(im, jm);
      out.values(f, e) = plus.real() - minus.real();
      out.values(nr + f, e) = plus.imag() - minus.imag();
      out.values(f, nv + e) = plus.imag() + minus.imag();
      out.values(nr + f, nv + e) = -(plus.real() + minus.real());
      out.weight(ip, jp) += 2.0;
      out.weight(im, jm) += 2.0;
    }
  }
  return out;
}

ComplexImage lift_adjoint(const LiftedMatrix &lifted,
                          const SupportRegion &support) {
  const Eigen::Index nr = support.size();
  const Eigen::Index nv = static_cast<Eigen::Index>(lifted.coords.size());
  require(lifted.values.rows() == 2 * nr && lifted.values.cols() == 2 * nv,
          ErrorKind::Shape, "lifted matrix inconsistent with its descriptor");
  require(lifted.weight.rows() == lifted.grid_rows &&
              lifted.weight.cols() == lifted.grid_cols,
          ErrorKind::Shape, "lifted weight grid inconsistent");
  const Eigen::Index cx = lifted.grid_rows / 2, cy = lifted.grid_cols / 2;
  Eigen::ArrayXXd re = Eigen::ArrayXXd::Zero(lifted.grid_rows, lifted.grid_cols);
  Eigen::ArrayXXd im = re;
  const Eigen::MatrixXd &l = lifted.values;

  for (Eigen::Index e = 0; e < nv; ++e) {
    const Offset &c = lifted.coords[static_cast<std::size_t>(e)];
    for (Eigen::Index f = 0; f < nr; ++f) {
      const Offset &o = support.points[static_cast<std::size_t>(f)];
      const Eigen::Index ip = c.p - o.p + cx, jp = c.q - o.q + cy;
      const Eigen::Index imr = -c.p - o.p + cx, jm = -c.q - o.q + cy;
      const double r = l(f, e), rd = l(nr + f, e);
      const double ic = l(f, nv + e), id = l(nr + f, nv + e);
      re(ip, jp) += r - id;
      re(imr, jm) += -r - id;
      im(ip, jp) += rd + ic;
      im(imr, jm) += -rd + ic;
    }
  }
  ComplexImage out(lifted.grid_rows, lifted.grid_cols);
  out.real() = re;
  out.imag() = im;
  return out;
}

ComplexImage unlift(const LiftedMatrix &lifted, const SupportRegion &support) {
  const ComplexImage raw = lift_adjoint(lifted, support);
  const Eigen::ArrayXXd inv =
      (lifted.weight > 0.0).select(lifted.weight.inverse(), 0.0);
  return raw * inv.cast<cplx>();
}

namespace {

// Left factor M with svt(a) = M a, computed from the Gram matrix of the short
// side. Expects a.rows() <= a.cols().
Eigen::MatrixXd shrink_operator(const Eigen::MatrixXd &a, int keep,
                                double sigma) {
  const Eigen::Index r = a.rows();
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(r, r);
  gram.selfadjointView<Eigen::Lower>().rankUpdate(a);
  gram.triangularView<Eigen::StrictlyUpper>() = gram.transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
  require(eig.info() == Eigen::Success, ErrorKind::Numerical,
          "eigendecomposition failed in SVT");
  // Eigenvalues come ascending; rank i counts from the largest.
  Eigen::VectorXd factor(r);
  for (Eigen::Index k = 0; k < r; ++k) {
    const Eigen::Index rank_from_top = r - 1 - k;
    const double s = std::sqrt(std::max(eig.eigenvalues()(k), 0.0));
    if (rank_from_top < keep)
      factor(k) = 1.0;
    else
      factor(k) = s > 0.0 ? std::max(1.0 - sigma / s, 0.0) : 0.0;
  }
  const Eigen::MatrixXd &u = eig.eigenvectors();
  return u * factor.asDiagonal() * u.transpose();
}

} // namespace

Eigen::MatrixXd svt(const Eigen::MatrixXd &a, int keep, double sigma) {
  require(keep >= 0, ErrorKind::Domain, "SVT keep count must be >= 0");
  require(sigma >= 0.0, ErrorKind::Domain, "SVT threshold must be >= 0");
  require(a.allFinite(), ErrorKind::Numerical, "SVT input is not finite");
  if (a.size() == 0)
    return a;
  if (a.rows() <= a.cols())
    return shrink_operator(a, keep, sigma) * a;
  const Eigen::MatrixXd at = a.transpose();
  return (shrink_operator(at, keep, sigma) * at).transpose();
}

Eigen::VectorXd singular_values(const Eigen::MatrixXd &a) {
  Eigen::BDCSVD<Eigen::MatrixXd> svd(a);
  return svd.singularValues();
}

namespace {

// The columns of x and -x in the lifted matrix agree up to sign, so the
// projection only needs one of each pair: the Gram matrix, the shrunk matrix
// and the adjoint are those of the full matrix with each kept column counted
// twice (the origin once).
ComplexImage project_half(const ComplexImage &k, const SupportRegion &support,
                          int keep, double sigma) {
  std::vector<Offset> coords;
  for (const Offset &c : valid_coordinates(k.rows(), k.cols(), support))
    if (c.p > 0 || (c.p == 0 && c.q >= 0))
      coords.push_back(c);
  require(!coords.empty(), ErrorKind::Shape,
          "grid too small for support radius " +
              std::to_string(support.radius));

  const Eigen::Index nr = support.size();
  const Eigen::Index nv = static_cast<Eigen::Index>(coords.size());
  const Eigen::Index cx = k.rows() / 2, cy = k.cols() / 2;
  Eigen::VectorXd mult(2 * nv);
  Eigen::MatrixXd half(2 * nr, 2 * nv);
  for (Eigen::Index e = 0; e < nv; ++e) {
    const Offset &c = coords[static_cast<std::size_t>(e)];
    mult(e) = mult(nv + e) = (c.p == 0 && c.q == 0) ? 1.0 : 2.0;
    for (Eigen::Index f = 0; f < nr; ++f) {
      const Offset &o = support.points[static_cast<std::size_t>(f)];
      const cplx plus = k(c.p - o.p + cx, c.q - o.q + cy);
      const cplx minus = k(-c.p - o.p + cx, -c.q - o.q + cy);
      half(f, e) = plus.real() - minus.real();
      half(nr + f, e) = plus.imag() - minus.imag();
      half(f, nv + e) = plus.imag() + minus.imag();
      half(nr + f, nv + e) = -(plus.real() + minus.real());
    }
  }

  Eigen::MatrixXd shrunk;
  if (half.rows() <= 2 * nv) {
    const Eigen::MatrixXd scaled = half * mult.cwiseSqrt().asDiagonal();
    shrunk = shrink_operator(scaled, keep, sigma) * half;
  } else {
    // Tiny grids: fall back to the full matrix.
    LiftedMatrix lifted = lift(k, support);
    lifted.values = svt(lifted.values, keep, sigma);
    const ComplexImage back = unlift(lifted, support);
    return (lifted.weight > 0.0).select(back, k);
  }

  Eigen::ArrayXXd re = Eigen::ArrayXXd::Zero(k.rows(), k.cols());
  Eigen::ArrayXXd im = re;
  Eigen::ArrayXXd weight = re;
  for (Eigen::Index e = 0; e < nv; ++e) {
    const Offset &c = coords[static_cast<std::size_t>(e)];
    const double w = mult(e);
    for (Eigen::Index f = 0; f < nr; ++f) {
      const Offset &o = support.points[static_cast<std::size_t>(f)];
      const Eigen::Index ip = c.p - o.p + cx, jp = c.q - o.q + cy;
      const Eigen::Index imr = -c.p - o.p + cx, jm = -c.q - o.q + cy;
      const double r = shrunk(f, e), rd = shrunk(nr + f, e);
      const double ic = shrunk(f, nv + e), id = shrunk(nr + f, nv + e);
      re(ip, jp) += w * (r - id);
      re(imr, jm) += w * (-r - id);
      im(ip, jp) += w * (rd + ic);
      im(imr, jm) += w * (-rd + ic);
      weight(ip, jp) += 2.0 * w;
      weight(imr, jm) += 2.0 * w;
    }
  }
  ComplexImage out(k.rows(), k.cols());
  for (Eigen::Index j = 0; j < k.cols(); ++j)
    for (Eigen::Index i = 0; i < k.rows(); ++i)
      out(i, j) = weight(i, j) > 0.0
                      ? cplx(re(i, j), im(i, j)) / weight(i, j)
                      : k(i, j); // entries outside every column pass through
  return out;
}

} // namespace

ComplexImage lowrank_project(const ComplexImage &image,
                             const SupportRegion &support, int keep,
                             double sigma) {
  return idft_centered(project_half(dft_centered(image), support, keep, sigma));
}

} // namespace pair
