#include "doctest.h"

#include <Eigen/Dense>

#include "pair/error.hpp"
#include "pair/metrics.hpp"
#include "support.hpp"

using namespace pair;

namespace {

DirectionField field_of(std::vector<Eigen::Vector3d> dirs) {
  DirectionField f;
  f.rows = static_cast<Eigen::Index>(dirs.size());
  f.cols = 1;
  f.directions = std::move(dirs);
  f.valid = MaskGrid::Constant(f.rows, 1, true);
  f.fa = RealImage::Zero(f.rows, 1);
  return f;
}

// Twelve well-spread unit directions (icosahedron vertices, one per axis).
std::vector<std::array<double, 3>> gradient_table() {
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<std::array<double, 3>> out;
  for (double a : {-1.0, 1.0})
    for (double b : {-t, t}) {
      out.push_back({0.0, a, b});
      out.push_back({a, b, 0.0});
      out.push_back({b, 0.0, a});
    }
  for (auto &g : out) {
    const double n = std::sqrt(g[0] * g[0] + g[1] * g[1] + g[2] * g[2]);
    for (double &v : g)
      v /= n;
  }
  return out;
}

// Noiseless signals for one tensor per pixel.
std::vector<DiffusionSample>
forward_signals(const std::vector<Eigen::Matrix3d> &tensors, Eigen::Index rows,
                const RealImage &b0, double b,
                const std::vector<std::array<double, 3>> &dirs) {
  std::vector<DiffusionSample> out;
  for (const auto &g : dirs) {
    DiffusionSample s;
    s.b_value = b;
    s.direction = g;
    s.image = RealImage(rows, b0.cols());
    const Eigen::Vector3d v(g[0], g[1], g[2]);
    for (Eigen::Index c = 0; c < b0.cols(); ++c)
      for (Eigen::Index r = 0; r < rows; ++r) {
        const auto &d = tensors[static_cast<std::size_t>(c * rows + r)];
        s.image(r, c) = b0(r, c) * std::exp(-b * v.dot(d * v));
      }
    out.push_back(std::move(s));
  }
  return out;
}

Eigen::Matrix3d random_spd(std::mt19937_64 &rng) {
  std::normal_distribution<double> g;
  Eigen::Matrix3d a;
  for (int i = 0; i < 9; ++i)
    a.data()[i] = g(rng);
  const Eigen::Matrix3d q = Eigen::HouseholderQR<Eigen::Matrix3d>(a).householderQ();
  std::uniform_real_distribution<double> ev(0.1e-3, 3e-3);
  const Eigen::Vector3d lam(ev(rng), ev(rng), ev(rng));
  return q * lam.asDiagonal() * q.transpose();
}

} // namespace

TEST_SUITE("metrics") {

TEST_CASE("psnr examples") {
  RealImage ref(2, 2);
  ref << 1.0, 0.5, 0.25, 0.0;
  CHECK(std::isinf(psnr(ref, ref)));
  CHECK(psnr(ref, ref) > 0.0);
  RealImage test = ref;
  test(0, 1) += 0.2; // squared error 0.04
  CHECK(std::abs(psnr(ref, test) - 20.0) <= 1e-9);
  CHECK_THROWS_AS(psnr(RealImage::Zero(2, 2), test), Error);
  CHECK_THROWS_AS(psnr(ref, RealImage::Zero(3, 2)), Error);
}

TEST_CASE("psnr normalizes by the reference peak") {
  std::mt19937_64 rng(61);
  const RealImage ref = testing::random_real(9, 7, rng, 0.0, 4.0);
  const RealImage test = testing::random_real(9, 7, rng, 0.0, 4.0);
  const double peak = ref.maxCoeff();
  double err = 0.0;
  for (Eigen::Index i = 0; i < ref.size(); ++i) {
    const double d = (test.data()[i] - ref.data()[i]) / peak;
    err += d * d;
  }
  CHECK(psnr(ref, test) ==
        doctest::Approx(10.0 * std::log10(63.0 / err)).epsilon(1e-12));
  CHECK(psnr(3.0 * ref, 3.0 * test) ==
        doctest::Approx(psnr(ref, test)).epsilon(1e-12));
  // Strictly decreasing in the error norm.
  CHECK(psnr(ref, ref + 0.01) > psnr(ref, ref + 0.02));
}

TEST_CASE("aae examples") {
  const Eigen::Vector3d x(1, 0, 0), y(0, 1, 0);
  CHECK(aae(field_of({x, y}), field_of({x, y})) == 0.0);
  CHECK(aae(field_of({x, y}), field_of({y, x})) ==
        doctest::Approx(90.0).epsilon(1e-12));
  const Eigen::Vector3d d = Eigen::Vector3d(1, 1, 0).normalized();
  CHECK(std::abs(aae(field_of({x}), field_of({d})) - 45.0) <= 1e-9);
  CHECK(aae(field_of({x}), field_of({-x})) == 0.0);
}

TEST_CASE("aae ignores pixels invalid in either field") {
  const Eigen::Vector3d x(1, 0, 0), y(0, 1, 0);
  DirectionField a = field_of({x, x}), b = field_of({x, y});
  b.valid(1, 0) = false;
  CHECK(aae(a, b) == 0.0);
  b.valid(0, 0) = false;
  CHECK_THROWS_AS(aae(a, b), Error);
}

TEST_CASE("aae stays within [0, 90] and is sign invariant") {
  std::mt19937_64 rng(62);
  std::normal_distribution<double> g;
  std::vector<Eigen::Vector3d> u, v, w;
  for (int i = 0; i < 50; ++i) {
    u.push_back(Eigen::Vector3d(g(rng), g(rng), g(rng)).normalized());
    v.push_back(Eigen::Vector3d(g(rng), g(rng), g(rng)).normalized());
    w.push_back(-v.back());
  }
  const double e = aae(field_of(u), field_of(v));
  CHECK(e >= 0.0);
  CHECK(e <= 90.0);
  CHECK(aae(field_of(u), field_of(w)) == doctest::Approx(e).epsilon(1e-12));
}

TEST_CASE("isotropic tensor fit") {
  const Eigen::Index rows = 3, cols = 2;
  const double d = 0.8e-3;
  std::vector<Eigen::Matrix3d> tensors(6, d * Eigen::Matrix3d::Identity());
  const RealImage b0 = RealImage::Constant(rows, cols, 2.0);
  const auto dwi = forward_signals(tensors, rows, b0, 1000.0, gradient_table());
  const TensorField t = fit_tensor(dwi, b0);
  for (Eigen::Index c = 0; c < cols; ++c)
    for (Eigen::Index r = 0; r < rows; ++r) {
      CHECK(t.valid(r, c));
      CHECK((t.at(r, c) - d * Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() <=
            1e-8);
    }
  const DirectionField f = primary_direction(t);
  CHECK(f.fa.abs().maxCoeff() < 1e-6);
}

TEST_CASE("anisotropic tensor eigenvalues are recovered") {
  Eigen::Matrix3d rot;
  rot = Eigen::AngleAxisd(0.4, Eigen::Vector3d(1, 2, 3).normalized());
  const Eigen::Matrix3d d =
      rot * Eigen::Vector3d(1.7e-3, 0.3e-3, 0.3e-3).asDiagonal() *
      rot.transpose();
  std::vector<Eigen::Matrix3d> tensors(1, d);
  const RealImage b0 = RealImage::Ones(1, 1);
  const TensorField t =
      fit_tensor(forward_signals(tensors, 1, b0, 1000.0, gradient_table()), b0);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(t.at(0, 0));
  CHECK(eig.eigenvalues()(0) == doctest::Approx(0.3e-3).epsilon(1e-6));
  CHECK(eig.eigenvalues()(1) == doctest::Approx(0.3e-3).epsilon(1e-6));
  CHECK(eig.eigenvalues()(2) == doctest::Approx(1.7e-3).epsilon(1e-6));
  const DirectionField f = primary_direction(t);
  CHECK(std::abs(std::abs(f.at(0, 0).dot(rot.col(0))) - 1.0) < 1e-9);
}

TEST_CASE("random tensors round-trip through fit") {
  std::mt19937_64 rng(63);
  const Eigen::Index rows = 4, cols = 5;
  std::vector<Eigen::Matrix3d> tensors;
  for (int i = 0; i < rows * cols; ++i)
    tensors.push_back(random_spd(rng));
  const RealImage b0 = testing::random_real(rows, cols, rng, 0.5, 2.0);
  const TensorField t =
      fit_tensor(forward_signals(tensors, rows, b0, 1000.0, gradient_table()),
                 b0);
  double worst = 0.0;
  for (std::size_t i = 0; i < tensors.size(); ++i)
    worst = std::max(worst, (t.tensors[i] - tensors[i]).cwiseAbs().maxCoeff() /
                                tensors[i].cwiseAbs().maxCoeff());
  CHECK(worst <= 1e-6);
}

TEST_CASE("too few directions is rank deficient") {
  const RealImage b0 = RealImage::Ones(1, 1);
  auto dirs = gradient_table();
  dirs.resize(5);
  std::vector<Eigen::Matrix3d> tensors(1, 1e-3 * Eigen::Matrix3d::Identity());
  CHECK_THROWS_AS(fit_tensor(forward_signals(tensors, 1, b0, 1000.0, dirs), b0),
                  Error);
  // Six directions in one plane also leave the tensor undetermined.
  std::vector<std::array<double, 3>> flat;
  for (int i = 0; i < 6; ++i)
    flat.push_back({std::cos(0.5 * i), std::sin(0.5 * i), 0.0});
  CHECK_THROWS_AS(fit_tensor(forward_signals(tensors, 1, b0, 1000.0, flat), b0),
                  Error);
}

TEST_CASE("non-positive signals are invalid") {
  std::vector<Eigen::Matrix3d> tensors(2, 1e-3 * Eigen::Matrix3d::Identity());
  RealImage b0 = RealImage::Ones(2, 1);
  auto dwi = forward_signals(tensors, 2, b0, 1000.0, gradient_table());
  dwi[3].image(1, 0) = 0.0;
  const TensorField t = fit_tensor(dwi, b0);
  CHECK(t.valid(0, 0));
  CHECK_FALSE(t.valid(1, 0));
  b0(0, 0) = 0.0;
  CHECK_FALSE(fit_tensor(dwi, b0).valid(0, 0));
}

TEST_CASE("primary direction examples") {
  TensorField t;
  t.rows = 1;
  t.cols = 1;
  t.valid = MaskGrid::Constant(1, 1, true);
  t.tensors = {Eigen::Vector3d(2e-3, 1e-3, 1e-3).asDiagonal()};
  const DirectionField f = primary_direction(t);
  CHECK((f.at(0, 0) - Eigen::Vector3d(1, 0, 0)).norm() < 1e-12);
  CHECK(f.fa(0, 0) == doctest::Approx(fractional_anisotropy({2, 1, 1})));
  CHECK(fractional_anisotropy({1, 1, 1}) == 0.0);
  CHECK(fractional_anisotropy({1, 0, 0}) == doctest::Approx(1.0));
}

TEST_CASE("primary direction matches a dense eigensolver") {
  std::mt19937_64 rng(64);
  TensorField t;
  t.rows = 30;
  t.cols = 1;
  t.valid = MaskGrid::Constant(30, 1, true);
  for (int i = 0; i < 30; ++i)
    t.tensors.push_back(random_spd(rng));
  const DirectionField f = primary_direction(t);
  for (Eigen::Index i = 0; i < 30; ++i) {
    const Eigen::Matrix3d &d = t.tensors[static_cast<std::size_t>(i)];
    const Eigen::EigenSolver<Eigen::Matrix3d> es(d);
    Eigen::Index top = 0;
    es.eigenvalues().real().maxCoeff(&top);
    const Eigen::Vector3d v = es.eigenvectors().col(top).real().normalized();
    const Eigen::Vector3d &got = f.at(i, 0);
    CHECK(std::abs(got.norm() - 1.0) < 1e-12);
    CHECK(std::abs(std::abs(got.dot(v)) - 1.0) < 1e-9);
    // Sign convention: first nonzero component positive.
    CHECK(got(0) > 0.0);
    const Eigen::Vector3d ev = es.eigenvalues().real();
    CHECK(f.fa(i, 0) == doctest::Approx(fractional_anisotropy(ev)).epsilon(1e-9));
  }
}

} // TEST_SUITE
