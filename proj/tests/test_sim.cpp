#include "doctest.h"

#include <set>

#include "pair/error.hpp"
#include "pair/operators.hpp"
#include "pair/sim.hpp"
#include "support.hpp"

using namespace pair;
using std::numbers::pi;

namespace {

// Point-in-ellipse evaluated in the ellipse frame, sum then clamp.
double phantom_oracle(double x, double y) {
  struct E {
    double a, sx, sy, cx, cy, deg;
  };
  const E table[] = {
      {1.0, 0.69, 0.92, 0.0, 0.0, 0.0},
      {-0.8, 0.6624, 0.874, 0.0, -0.0184, 0.0},
      {-0.2, 0.11, 0.31, 0.22, 0.0, -18.0},
      {-0.2, 0.16, 0.41, -0.22, 0.0, 18.0},
      {0.1, 0.21, 0.25, 0.0, 0.35, 0.0},
      {0.1, 0.046, 0.046, 0.0, 0.1, 0.0},
      {0.1, 0.046, 0.046, 0.0, -0.1, 0.0},
      {0.1, 0.046, 0.023, -0.08, -0.605, 0.0},
      {0.1, 0.023, 0.023, 0.0, -0.606, 0.0},
      {0.1, 0.023, 0.046, 0.06, -0.605, 0.0},
  };
  double v = 0.0;
  for (const E &e : table) {
    const double t = e.deg * pi / 180.0;
    const double u = std::cos(t) * (x - e.cx) + std::sin(t) * (y - e.cy);
    const double w = -std::sin(t) * (x - e.cx) + std::cos(t) * (y - e.cy);
    if ((u / e.sx) * (u / e.sx) + (w / e.sy) * (w / e.sy) <= 1.0)
      v += e.a;
  }
  return std::clamp(v, 0.0, 1.0);
}

std::vector<int> kept_lines(const SamplingMask &m) { return m.lines(); }

} // namespace

TEST_SUITE("sim") {

TEST_CASE("phantom corner and center") {
  const RealImage p = shepp_logan(64, 64);
  CHECK(p(0, 0) == 0.0);
  CHECK(p(63, 63) == 0.0);
  const auto [x, y] = phantom_coordinates(32, 32, 64, 64);
  CHECK(p(32, 32) == phantom_oracle(x, y));
  CHECK((p >= 0.0).all());
  CHECK((p <= 1.0).all());
  CHECK_THROWS_AS(shepp_logan(8, 64), Error);
}

TEST_CASE("phantom matches the point-in-ellipse oracle everywhere") {
  for (Eigen::Index n : {64, 97}) {
    const RealImage p = shepp_logan(n, n + 3);
    int mismatches = 0;
    for (Eigen::Index r = 0; r < p.rows(); ++r)
      for (Eigen::Index c = 0; c < p.cols(); ++c) {
        const auto [x, y] = phantom_coordinates(r, c, p.rows(), p.cols());
        if (std::abs(p(r, c) - phantom_oracle(x, y)) > 1e-12)
          ++mismatches;
      }
    CHECK(mismatches == 0);
  }
}

TEST_CASE("phantom is mirror symmetric outside its asymmetric ellipses") {
  // Only the ellipses centered on x = 0 with zero tilt are their own mirror
  // image; the tilted pair and the bottom trio differ in size or offset.
  const Ellipse asym[] = {{-0.2, 0.11, 0.31, 0.22, 0.0, -18.0},
                          {-0.2, 0.16, 0.41, -0.22, 0.0, 18.0},
                          {0.1, 0.046, 0.023, -0.08, -0.605, 0.0},
                          {0.1, 0.023, 0.046, 0.06, -0.605, 0.0}};
  auto inside_asym = [&](double x, double y) {
    for (const Ellipse &e : asym) {
      const double t = e.angle_deg * pi / 180.0;
      const double u = (std::cos(t) * (x - e.center_x) +
                        std::sin(t) * (y - e.center_y)) / e.semi_x;
      const double w = (-std::sin(t) * (x - e.center_x) +
                        std::cos(t) * (y - e.center_y)) / e.semi_y;
      if (u * u + w * w <= 1.0 + 1e-9)
        return true;
    }
    return false;
  };
  const Eigen::Index n = 128;
  const RealImage p = shepp_logan(n, n);
  int checked = 0, asym_outside = 0, asym_inside = 0;
  for (Eigen::Index r = 0; r < n; ++r)
    for (Eigen::Index c = 0; c < n; ++c) {
      const auto [x, y] = phantom_coordinates(r, c, n, n);
      const bool excluded = inside_asym(x, y) || inside_asym(-x, y);
      const bool differs = p(r, c) != p(r, n - 1 - c);
      if (excluded) {
        asym_inside += differs;
      } else {
        ++checked;
        asym_outside += differs;
      }
    }
  CHECK(checked > n * n / 2);
  CHECK(asym_outside == 0);
  CHECK(asym_inside > 0);
}

TEST_CASE("coil maps are normalized") {
  const CoilMapSet coils = biot_savart_coils(32, 32, 8);
  CHECK(coils.is_normalized());
  RealImage ss = RealImage::Zero(32, 32);
  for (int h = 0; h < 8; ++h)
    ss += coils[h].abs2();
  CHECK((ss - 1.0).abs().maxCoeff() <= 1e-12);
}

TEST_CASE("single coil has unit magnitude") {
  const CoilMapSet coils = biot_savart_coils(24, 20, 1);
  CHECK((coils[0].abs() - 1.0).abs().maxCoeff() <= 1e-12);
}

TEST_CASE("neighboring coils are rotations of each other") {
  // With four coils the rotation is a quarter turn, an exact pixel
  // permutation on a square grid: (r, c) -> (n - 1 - c, r). The complex
  // sensitivity picks up only a constant phase.
  const Eigen::Index n = 32;
  CoilGeometry g;
  g.start_angle = 0.3;
  const CoilMapSet coils = biot_savart_coils(n, n, 4, g);
  for (int h = 0; h < 4; ++h) {
    const ComplexImage &a = coils[h];
    const ComplexImage &b = coils[(h + 1) % 4];
    const cplx ref = b(n - 1 - 5, 7) / a(7, 5);
    CHECK(std::abs(std::abs(ref) - 1.0) < 1e-9);
    for (Eigen::Index r = 0; r < n; ++r)
      for (Eigen::Index c = 0; c < n; ++c) {
        const cplx rotated = b(n - 1 - c, r);
        CHECK(std::abs(rotated - ref * a(r, c)) < 1e-9);
      }
  }
}

TEST_CASE("coil sensitivity falls off away from the coil") {
  const CoilMapSet coils = biot_savart_coils(32, 32, 4);
  // Coil 0 sits on the +x side, i.e. the last columns.
  const double near = std::abs(coils[0](16, 31));
  const double far = std::abs(coils[0](16, 0));
  CHECK(near > far);
}

TEST_CASE("degenerate coil geometry is rejected") {
  CoilGeometry g;
  g.ring_distance = 0.5;
  g.loop_radius = 0.1;
  CHECK_THROWS_AS(biot_savart_coils(16, 16, 4, g), Error);
  CHECK_THROWS_AS(biot_savart_coils(16, 16, 0), Error);
}

TEST_CASE("polynomial phase examples") {
  MotionPhaseParams params;
  params.coefficients.push_back({0, 0, 0, 0, 0, 0});
  params.coefficients.push_back({0.7, 0, 0, 0, 0, 0});
  params.coefficients.push_back({0, 0.01, 0, 0, 0, 0});
  CHECK(polynomial_shot_phase(params, 0, 8, 6).abs().maxCoeff() == 0.0);
  CHECK((polynomial_shot_phase(params, 1, 8, 6) == 0.7).all());
  const RealImage ramp = polynomial_shot_phase(params, 2, 9, 6);
  CHECK(ramp(8, 0) == doctest::Approx(0.08));
  CHECK(ramp(8, 5) == doctest::Approx(0.08));
  CHECK_THROWS_AS(polynomial_shot_phase(params, 3, 8, 6), Error);
}

TEST_CASE("motion coefficients respect their intervals") {
  std::mt19937_64 rng(51);
  const auto w = MotionPhaseParams::ranges(128, 96);
  CHECK(w[0] == doctest::Approx(pi));
  CHECK(w[1] == doctest::Approx(pi / 256.0));
  CHECK(w[2] == doctest::Approx(pi / 192.0));
  CHECK(w[3] == doctest::Approx(pi / (3.0 * 128 * 128)));
  CHECK(w[4] == doctest::Approx(pi / (3.0 * 96 * 96)));
  CHECK(w[5] == doctest::Approx(pi / (3.0 * 128 * 96)));
  const auto params = MotionPhaseParams::sample(500, 128, 96, rng);
  for (const auto &a : params.coefficients)
    for (std::size_t i = 0; i < 6; ++i) {
      CHECK(a[i] >= -w[i]);
      CHECK(a[i] < w[i]);
    }
}

TEST_CASE("background phase") {
  const RealImage a = background_phase(32, 30, 7);
  CHECK(a.abs().maxCoeff() == doctest::Approx(pi / 2.0).epsilon(1e-12));
  CHECK(a.abs().maxCoeff() <= pi / 2.0 + 1e-12);
  CHECK((background_phase(32, 30, 7) == a).all());
  CHECK((background_phase(32, 30, 8) != a).any());

  // Real part of a 5x5-supported spectrum: the spectrum of the field lives in
  // the same block.
  const ComplexImage k = dft_centered(a.cast<cplx>());
  double outside = 0.0;
  for (Eigen::Index c = 0; c < 30; ++c)
    for (Eigen::Index r = 0; r < 32; ++r)
      if (std::abs(r - 16) > 2 || std::abs(c - 15) > 2)
        outside = std::max(outside, std::abs(k(r, c)));
  CHECK(outside < 1e-12);
}

TEST_CASE("diffusion decay") {
  std::mt19937_64 rng(52);
  const RealImage s0 = testing::random_real(5, 6, rng);
  CHECK((diffusion_decay(s0, 0.0, 0.7e-3) == s0).all());
  const RealImage half = diffusion_decay(s0, 1000.0, std::log(2.0) / 1000.0);
  CHECK((half - s0 / 2.0).abs().maxCoeff() < 1e-15);
  const RealImage d = testing::random_real(5, 6, rng, 0.0, 3e-3);
  const RealImage s = diffusion_decay(s0, 800.0, d);
  for (Eigen::Index i = 0; i < s.size(); ++i)
    CHECK(s.data()[i] ==
          doctest::Approx(s0.data()[i] * std::exp(-800.0 * d.data()[i])));
  CHECK_THROWS_AS(diffusion_decay(s0, -1.0, 1e-3), Error);
  CHECK_THROWS_AS(diffusion_decay(s0, 1000.0, -1e-3), Error);
}

TEST_CASE("interleave masks") {
  const auto one = make_interleave_masks(4, 8, 1);
  CHECK(one[0].bits.all());
  const auto four = make_interleave_masks(3, 8, 4);
  CHECK(kept_lines(four[0]) == std::vector<int>{0, 4});
  CHECK(kept_lines(four[3]) == std::vector<int>{3, 7});
  std::vector<int> owner(8, 0);
  for (const auto &m : four)
    for (int l : m.lines())
      ++owner[static_cast<std::size_t>(l)];
  for (int o : owner)
    CHECK(o == 1);
  CHECK(four[1].bits.col(1).all());
  CHECK_THROWS_AS(make_interleave_masks(4, 3, 4), Error);
}

TEST_CASE("retrospective undersampling examples") {
  const auto full = make_interleave_masks(4, 16, 4);
  for (auto mode : {UndersampleMode::Uniform, UndersampleMode::PartialFourier}) {
    const auto same = retrospective_undersample(full, mode, 1.0);
    for (std::size_t j = 0; j < 4; ++j)
      CHECK((same[j].bits == full[j].bits).all());
  }
  const auto uni = retrospective_undersample(full, UndersampleMode::Uniform, 0.5);
  CHECK(kept_lines(uni[0]) == std::vector<int>{0, 8});
  CHECK(kept_lines(uni[1]) == std::vector<int>{1, 9});
  CHECK(uni[0].kind == MaskKind::UniformUndersampled);

  const auto pf =
      retrospective_undersample(full, UndersampleMode::PartialFourier, 0.6);
  // ceil(0.6 * 16) = 10, band 4..11.
  CHECK(kept_lines(pf[0]) == std::vector<int>{0, 4, 8});
  CHECK(kept_lines(pf[3]) == std::vector<int>{3, 7, 11});
  CHECK(pf[0].kind == MaskKind::PartialFourier);

  CHECK_THROWS_AS(retrospective_undersample(full, UndersampleMode::Uniform, 0.0),
                  Error);
  CHECK_THROWS_AS(retrospective_undersample(full, UndersampleMode::Uniform, 1.5),
                  Error);
}

TEST_CASE("uniform undersampling keeps about rate times the lines") {
  std::mt19937_64 rng(53);
  std::uniform_int_distribution<int> cols(8, 200), shots(1, 8);
  std::uniform_real_distribution<double> rate(0.1, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const int m = cols(rng), j = std::min(shots(rng), m);
    const double r = rate(rng);
    const auto full = make_interleave_masks(2, m, j);
    const auto kept = retrospective_undersample(full, UndersampleMode::Uniform, r);
    for (std::size_t s = 0; s < full.size(); ++s) {
      const double want = r * static_cast<double>(full[s].lines().size());
      const auto got = static_cast<double>(kept[s].lines().size());
      CHECK(std::abs(got - want) <= 1.0);
      CHECK(kept[s].lines().front() == full[s].lines().front());
      for (int l : kept[s].lines())
        CHECK(full[s].bits.col(l).all());
    }
  }
}

TEST_CASE("noiseless synthesis follows the forward model") {
  std::mt19937_64 rng(54);
  const RealImage m = shepp_logan(32, 32);
  const CoilMapSet coils = biot_savart_coils(32, 32, 4);
  const auto masks = make_interleave_masks(32, 32, 2);
  std::vector<RealImage> motion{testing::random_real(32, 32, rng),
                                testing::random_real(32, 32, rng)};
  const ShotPhaseSet phases =
      combine_phases(motion, background_phase(32, 32, 3));
  for (std::optional<double> off :
       {std::optional<double>{}, std::optional<double>{INFINITY}}) {
    const AcquisitionSet acq =
        synthesize_acquisition(m, coils, phases, masks, off, 9);
    for (int j = 0; j < 2; ++j)
      for (int h = 0; h < 4; ++h) {
        const ComplexImage y =
            apply_forward(m, phases[j], coils[h], masks[static_cast<std::size_t>(j)].bits);
        CHECK((acq.kspace(j, h) - y).abs().maxCoeff() <= 1e-12);
      }
  }
}

TEST_CASE("phases combine as exp(-i(phi + background))") {
  RealImage phi = RealImage::Constant(2, 2, 0.3);
  RealImage bg = RealImage::Constant(2, 2, 0.2);
  const ShotPhaseSet p = combine_phases({phi}, bg);
  CHECK(std::abs(p[0](1, 1) - std::polar(1.0, -0.5)) < 1e-15);
}

TEST_CASE("empirical SNR matches the request") {
  const RealImage m = shepp_logan(64, 64);
  const CoilMapSet coils = biot_savart_coils(64, 64, 4);
  const auto masks = make_interleave_masks(64, 64, 4);
  const ShotPhaseSet phases = ShotPhaseSet::identity(4, 64, 64);
  const AcquisitionSet clean =
      synthesize_acquisition(m, coils, phases, masks, std::nullopt, 0);
  for (double snr : {0.0, 10.0, 25.0})
    for (std::uint64_t seed : {1u, 2u, 3u}) {
      const AcquisitionSet noisy =
          synthesize_acquisition(m, coils, phases, masks, snr, seed);
      double signal = 0.0, noise = 0.0;
      for (int j = 0; j < 4; ++j)
        for (int h = 0; h < 4; ++h) {
          const MaskGrid &mk = masks[static_cast<std::size_t>(j)].bits;
          const ComplexImage d = noisy.kspace(j, h) - clean.kspace(j, h);
          signal += mk.select(clean.kspace(j, h).abs2(), 0.0).sum();
          noise += mk.select(d.abs2(), 0.0).sum();
          CHECK((mk || noisy.kspace(j, h).abs() == 0.0).all());
        }
      CHECK(std::abs(10.0 * std::log10(signal / noise) - snr) < 0.1);
    }
}

TEST_CASE("synthesis is deterministic per seed") {
  const RealImage m = shepp_logan(32, 32);
  const CoilMapSet coils = biot_savart_coils(32, 32, 2);
  const auto masks = make_interleave_masks(32, 32, 2);
  const ShotPhaseSet phases = ShotPhaseSet::identity(2, 32, 32);
  const auto a = synthesize_acquisition(m, coils, phases, masks, 10.0, 5);
  const auto b = synthesize_acquisition(m, coils, phases, masks, 10.0, 5);
  const auto c = synthesize_acquisition(m, coils, phases, masks, 10.0, 6);
  CHECK((a.kspace(1, 1) == b.kspace(1, 1)).all());
  CHECK((a.kspace(1, 1) != c.kspace(1, 1)).any());
}

TEST_CASE("stream seeds are distinct") {
  std::set<std::uint64_t> seen;
  for (std::uint64_t s = 0; s < 50; ++s)
    for (std::uint64_t k = 0; k < 5; ++k)
      seen.insert(stream_seed(s, k));
  CHECK(seen.size() == 250u);
  CHECK(stream_seed(3, 1) == stream_seed(3, 1));
}

TEST_CASE("full simulation") {
  SimulationConfig cfg;
  cfg.rows = cfg.cols = 32;
  cfg.channels = 4;
  cfg.seed = 11;
  const SimulatedData a = simulate(cfg);
  const SimulatedData b = simulate(cfg);
  CHECK(a.acquisition.shots() == 4);
  CHECK(a.acquisition.channels() == 4);
  CHECK((a.acquisition.kspace(2, 3) == b.acquisition.kspace(2, 3)).all());
  CHECK(a.magnitude.maxCoeff() ==
        doctest::Approx(std::exp(-1000.0 * 0.7e-3)).epsilon(1e-12));
  REQUIRE(a.acquisition.meta().direction.has_value());
  // Coil maps vanish outside the object.
  CHECK((a.coils.support() == (a.b0 > 0.0)).all());

  cfg.b_value = 0.0;
  CHECK_FALSE(simulate(cfg).acquisition.meta().direction.has_value());

  cfg.b_value = 1000.0;
  cfg.undersample = UndersampleMode::Uniform;
  cfg.rate = 0.5;
  const SimulatedData u = simulate(cfg);
  CHECK(u.acquisition.mask(0).lines().size() * 2 ==
        a.acquisition.mask(0).lines().size());
  // Retained lines carry the same noisy values as the full acquisition.
  for (int l : u.acquisition.mask(0).lines())
    CHECK((u.acquisition.kspace(0, 0).col(l) ==
           a.acquisition.kspace(0, 0).col(l))
              .all());
}

} // TEST_SUITE
