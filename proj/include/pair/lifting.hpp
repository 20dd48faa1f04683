#pragma once

#include <utility>
#include <vector>

#include <Eigen/Core>

#include "pair/grid.hpp"

namespace pair {

struct Offset {
  int p = 0; // row offset
  int q = 0; // column offset
  friend bool operator==(const Offset &, const Offset &) = default;
};

/// Integer offsets inside the disk p^2 + q^2 <= R^2, lexicographic in (p, q).
struct SupportRegion {
  int radius = 0;
  std::vector<Offset> points;

  int size() const { return static_cast<int>(points.size()); }
};

SupportRegion support_points(int radius);

/// Centered coordinates (x, y) of a k-space grid for which x - p, y - q and
/// -x - p, -y - q stay on the grid for every support offset. Lexicographic.
std::vector<Offset> valid_coordinates(Eigen::Index rows, Eigen::Index cols,
                                      const SupportRegion &support);

/// Real structured matrix of one shot's k-space, 2*N_R rows by 2*|V|
/// columns. Row f < N_R pairs with Re Q(p_f), row N_R + f with Im Q(p_f);
/// column e < |V| holds the real part of the annihilation equation at
/// coordinate e, column |V| + e the imaginary part. With Q(p) = K(-p) for a
/// phase spectrum K supported in the disk, [Re Q; Im Q]^T L = 0.
struct LiftedMatrix {
  Eigen::MatrixXd values;
  Eigen::Index grid_rows = 0;
  Eigen::Index grid_cols = 0;
  std::vector<Offset> coords;
  /// Per k-space entry, the diagonal of lift^T lift (same for re and im).
  Eigen::ArrayXXd weight;
};

LiftedMatrix lift(const ComplexImage &kspace, const SupportRegion &support);

/// Raw adjoint of lift, written onto a k-space grid.
ComplexImage lift_adjoint(const LiftedMatrix &lifted,
                          const SupportRegion &support);
/// Adjoint divided by the per-entry weight: the exact left inverse of lift.
/// Entries no column touches come back as zero.
ComplexImage unlift(const LiftedMatrix &lifted, const SupportRegion &support);

/// Keeps the first keep singular values and soft-thresholds the rest by
/// sigma. Singular values are ordered descending.
Eigen::MatrixXd svt(const Eigen::MatrixXd &a, int keep, double sigma);

/// Singular values of a, descending.
Eigen::VectorXd singular_values(const Eigen::MatrixXd &a);

/// F* P* SVT(P F image): the low-rank projection of one shot image.
ComplexImage lowrank_project(const ComplexImage &image,
                             const SupportRegion &support, int keep,
                             double sigma);

} // namespace pair
