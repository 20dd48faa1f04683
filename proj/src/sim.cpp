#include "pair/sim.hpp"

#include <cmath>
#include <numbers>

#include "pair/error.hpp"

namespace pair {

using std::numbers::pi;

PhantomSpec PhantomSpec::modified_shepp_logan(Eigen::Index rows,
                                              Eigen::Index cols) {
  PhantomSpec spec;
  spec.rows = rows;
  spec.cols = cols;
  spec.ellipses = {
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
  return spec;
}

std::array<double, 2> phantom_coordinates(Eigen::Index r, Eigen::Index c,
                                          Eigen::Index rows,
                                          Eigen::Index cols) {
  const double x = -1.0 + (2.0 * static_cast<double>(c) + 1.0) /
                              static_cast<double>(cols);
  const double y = 1.0 - (2.0 * static_cast<double>(r) + 1.0) /
                             static_cast<double>(rows);
  return {x, y};
}

RealImage rasterize_phantom(const PhantomSpec &spec) {
  require(spec.rows >= 1 && spec.cols >= 1, ErrorKind::Domain,
          "phantom size must be positive");
  RealImage img = RealImage::Zero(spec.rows, spec.cols);
  for (const Ellipse &e : spec.ellipses) {
    const double t = e.angle_deg * pi / 180.0;
    const double ct = std::cos(t), st = std::sin(t);
    for (Eigen::Index c = 0; c < spec.cols; ++c)
      for (Eigen::Index r = 0; r < spec.rows; ++r) {
        const auto [x, y] = phantom_coordinates(r, c, spec.rows, spec.cols);
        const double dx = x - e.center_x, dy = y - e.center_y;
        const double u = (dx * ct + dy * st) / e.semi_x;
        const double v = (-dx * st + dy * ct) / e.semi_y;
        if (u * u + v * v <= 1.0)
          img(r, c) += e.intensity;
      }
  }
  return img.cwiseMax(0.0).cwiseMin(1.0);
}

RealImage shepp_logan(Eigen::Index rows, Eigen::Index cols) {
  require(rows >= 16 && cols >= 16, ErrorKind::Domain,
          "Shepp-Logan phantom needs at least 16x16 pixels");
  return rasterize_phantom(PhantomSpec::modified_shepp_logan(rows, cols));
}

CoilMapSet biot_savart_coils(Eigen::Index rows, Eigen::Index cols, int coils,
                             const CoilGeometry &g) {
  require(coils >= 1, ErrorKind::Domain, "need at least one coil");
  require(g.loop_radius > 0.0 && g.segments >= 8, ErrorKind::Domain,
          "degenerate coil geometry");
  const double ring = 0.5 * g.ring_distance;
  // The wire crosses the slice plane at distance sqrt(ring^2 + a^2); keep it
  // outside the FOV corners.
  require(ring * ring + g.loop_radius * g.loop_radius > 0.5 + 1e-9,
          ErrorKind::Domain, "coil loop intersects the field of view");

  std::vector<ComplexImage> maps;
  for (int h = 0; h < coils; ++h) {
    const double theta = g.start_angle + 2.0 * pi * h / coils;
    const double cx = ring * std::cos(theta), cy = ring * std::sin(theta);
    // Loop spanned by the tangent t = (-sin, cos, 0) and z.
    const double tx = -std::sin(theta), ty = std::cos(theta);
    ComplexImage map(rows, cols);
    for (Eigen::Index c = 0; c < cols; ++c)
      for (Eigen::Index r = 0; r < rows; ++r) {
        const double px = (static_cast<double>(c) - 0.5 * (cols - 1)) / cols;
        const double py = (0.5 * (rows - 1) - static_cast<double>(r)) / rows;
        double bx = 0.0, by = 0.0;
        const double dphi = 2.0 * pi / g.segments;
        for (int s = 0; s < g.segments; ++s) {
          const double phi = (s + 0.5) * dphi;
          const double ca = std::cos(phi), sa = std::sin(phi);
          // Wire element position and direction.
          const double wx = cx + g.loop_radius * ca * tx;
          const double wy = cy + g.loop_radius * ca * ty;
          const double wz = g.loop_radius * sa;
          const double lx = -g.loop_radius * sa * tx * dphi;
          const double ly = -g.loop_radius * sa * ty * dphi;
          const double lz = g.loop_radius * ca * dphi;
          const double rx = px - wx, ry = py - wy, rz = -wz;
          const double d2 = rx * rx + ry * ry + rz * rz;
          const double inv = 1.0 / (d2 * std::sqrt(d2));
          // dl x r
          bx += (ly * rz - lz * ry) * inv;
          by += (lz * rx - lx * rz) * inv;
        }
        map(r, c) = cplx(bx, -by);
      }
    maps.push_back(std::move(map));
  }
  return CoilMapSet(std::move(maps)).normalized();
}

std::array<double, 6> MotionPhaseParams::ranges(Eigen::Index rows,
                                                Eigen::Index cols) {
  const double n = static_cast<double>(rows), m = static_cast<double>(cols);
  return {pi,
          pi / (2.0 * n),
          pi / (2.0 * m),
          pi / (3.0 * n * n),
          pi / (3.0 * m * m),
          pi / (3.0 * n * m)};
}

MotionPhaseParams MotionPhaseParams::sample(int shots, Eigen::Index rows,
                                            Eigen::Index cols,
                                            std::mt19937_64 &rng) {
  require(shots >= 1, ErrorKind::Domain, "need at least one shot");
  const auto w = ranges(rows, cols);
  MotionPhaseParams out;
  for (int j = 0; j < shots; ++j) {
    std::array<double, 6> a{};
    for (std::size_t i = 0; i < a.size(); ++i)
      a[i] = std::uniform_real_distribution<double>(-w[i], w[i])(rng);
    out.coefficients.push_back(a);
  }
  return out;
}

RealImage polynomial_shot_phase(const MotionPhaseParams &params, int shot,
                                Eigen::Index rows, Eigen::Index cols) {
  require(shot >= 0 &&
              shot < static_cast<int>(params.coefficients.size()),
          ErrorKind::Domain, "shot index out of range");
  const auto &a = params.coefficients[static_cast<std::size_t>(shot)];
  RealImage phi(rows, cols);
  for (Eigen::Index y = 0; y < cols; ++y)
    for (Eigen::Index x = 0; x < rows; ++x) {
      const double fx = static_cast<double>(x), fy = static_cast<double>(y);
      phi(x, y) = a[0] + a[1] * fx + a[2] * fy + a[3] * fx * fx +
                  a[4] * fy * fy + a[5] * fx * fy;
    }
  return phi;
}

RealImage background_phase(Eigen::Index rows, Eigen::Index cols,
                           std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  ComplexImage spectrum = ComplexImage::Zero(rows, cols);
  const Eigen::Index cr = rows / 2, cc = cols / 2;
  for (Eigen::Index dq = -2; dq <= 2; ++dq)
    for (Eigen::Index dp = -2; dp <= 2; ++dp) {
      const Eigen::Index r = cr + dp, c = cc + dq;
      if (r < 0 || r >= rows || c < 0 || c >= cols)
        continue;
      const double re = gauss(rng);
      const double im = gauss(rng);
      spectrum(r, c) = cplx(re, im);
    }
  RealImage phi = idft_centered(spectrum).real();
  const double peak = phi.abs().maxCoeff();
  if (peak > 0.0)
    phi *= (pi / 2.0) / peak;
  return phi;
}

RealImage diffusion_decay(const RealImage &s0, double b, const RealImage &d) {
  require(b >= 0.0, ErrorKind::Domain, "b-value must be >= 0");
  require(d.rows() == s0.rows() && d.cols() == s0.cols(), ErrorKind::Shape,
          "diffusivity map shape mismatch");
  require((d >= 0.0).all(), ErrorKind::Domain, "diffusivity must be >= 0");
  return s0 * (-b * d).exp();
}

RealImage diffusion_decay(const RealImage &s0, double b, double d) {
  require(d >= 0.0, ErrorKind::Domain, "diffusivity must be >= 0");
  return diffusion_decay(s0, b, RealImage::Constant(s0.rows(), s0.cols(), d));
}

std::vector<SamplingMask> make_interleave_masks(Eigen::Index rows,
                                                Eigen::Index cols, int shots) {
  require(shots >= 1, ErrorKind::Domain, "need at least one shot");
  require(shots <= cols, ErrorKind::Domain,
          "more shots than phase-encode lines");
  std::vector<SamplingMask> masks;
  for (int j = 0; j < shots; ++j) {
    SamplingMask m{MaskGrid::Constant(rows, cols, false),
                   MaskKind::FullInterleave};
    for (Eigen::Index c = j; c < cols; c += shots)
      m.bits.col(c).setConstant(true);
    masks.push_back(std::move(m));
  }
  return masks;
}

std::vector<SamplingMask>
retrospective_undersample(const std::vector<SamplingMask> &masks,
                          UndersampleMode mode, double rate) {
  require(rate > 0.0 && rate <= 1.0, ErrorKind::Domain,
          "sampling rate must be in (0, 1]");
  std::vector<SamplingMask> out;
  for (std::size_t j = 0; j < masks.size(); ++j) {
    const SamplingMask &in = masks[j];
    if (rate == 1.0) {
      out.push_back(in);
      continue;
    }
    const Eigen::Index m = in.cols();
    SamplingMask kept{MaskGrid::Constant(in.rows(), m, false),
                      mode == UndersampleMode::Uniform
                          ? MaskKind::UniformUndersampled
                          : MaskKind::PartialFourier};
    const std::vector<int> lines = in.lines();
    if (mode == UndersampleMode::Uniform) {
      for (std::size_t i = 0; i < lines.size(); ++i) {
        const double cur = std::floor(static_cast<double>(i) * rate);
        const double prev = std::floor((static_cast<double>(i) - 1.0) * rate);
        if (i == 0 || cur > prev)
          kept.bits.col(lines[i]) = in.bits.col(lines[i]);
      }
    } else {
      const Eigen::Index limit =
          static_cast<Eigen::Index>(std::ceil(rate * static_cast<double>(m)));
      const Eigen::Index band_lo = m / 2 - kPartialFourierBand / 2;
      const Eigen::Index band_hi = band_lo + kPartialFourierBand;
      for (int line : lines)
        if (line < limit || (line >= band_lo && line < band_hi))
          kept.bits.col(line) = in.bits.col(line);
    }
    require(kept.bits.any(), ErrorKind::Domain,
            "undersampling leaves shot " + std::to_string(j) + " empty");
    out.push_back(std::move(kept));
  }
  return out;
}

ShotPhaseSet combine_phases(const std::vector<RealImage> &motion,
                            const RealImage &background) {
  std::vector<RealImage> angles;
  for (const auto &phi : motion)
    angles.push_back(-(phi + background));
  return ShotPhaseSet::from_angles(angles);
}

AcquisitionSet synthesize_acquisition(const RealImage &magnitude,
                                      const CoilMapSet &coils,
                                      const ShotPhaseSet &phases,
                                      const std::vector<SamplingMask> &masks,
                                      std::optional<double> snr_db,
                                      std::uint64_t seed,
                                      AcquisitionMeta meta) {
  require(phases.count() == static_cast<int>(masks.size()), ErrorKind::Shape,
          "phase count does not match mask count");
  require(coils.rows() == magnitude.rows() && coils.cols() == magnitude.cols(),
          ErrorKind::Shape, "coil maps do not match the magnitude image");

  const int shots = phases.count(), channels = coils.count();
  std::vector<std::vector<ComplexImage>> k(static_cast<std::size_t>(shots));
  double power = 0.0;
  double sampled = 0.0;
  for (int j = 0; j < shots; ++j) {
    const MaskGrid &mask = masks[static_cast<std::size_t>(j)].bits;
    for (int h = 0; h < channels; ++h) {
      ComplexImage y = apply_forward(magnitude, phases[j], coils[h], mask);
      power += y.abs2().sum();
      sampled += static_cast<double>(mask.count());
      k[static_cast<std::size_t>(j)].push_back(std::move(y));
    }
  }

  if (snr_db && std::isfinite(*snr_db)) {
    const double signal = power / sampled;
    const double noise = signal / std::pow(10.0, *snr_db / 10.0);
    const double sd = std::sqrt(noise / 2.0);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, sd);
    for (int j = 0; j < shots; ++j) {
      const MaskGrid &mask = masks[static_cast<std::size_t>(j)].bits;
      for (auto &y : k[static_cast<std::size_t>(j)])
        for (Eigen::Index c = 0; c < y.cols(); ++c)
          for (Eigen::Index r = 0; r < y.rows(); ++r)
            if (mask(r, c)) {
              const double re = gauss(rng);
              const double im = gauss(rng);
              y(r, c) += cplx(re, im);
            }
    }
  }
  return AcquisitionSet(std::move(k), masks, std::move(meta));
}

std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 finalizer over the combined value
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

SimulatedData simulate(const SimulationConfig &config) {
  const Eigen::Index n = config.rows, m = config.cols;
  const RealImage b0 = shepp_logan(n, m);
  const RealImage magnitude =
      diffusion_decay(b0, config.b_value, config.diffusivity);

  CoilMapSet coils =
      biot_savart_coils(n, m, config.channels, config.geometry);
  if (config.restrict_coils)
    coils = coils.restricted(b0 > 0.0);

  std::mt19937_64 motion_rng(stream_seed(config.seed, 1));
  MotionPhaseParams motion =
      MotionPhaseParams::sample(config.shots, n, m, motion_rng);
  std::vector<RealImage> angles;
  for (int j = 0; j < config.shots; ++j)
    angles.push_back(polynomial_shot_phase(motion, j, n, m));
  RealImage background = background_phase(n, m, stream_seed(config.seed, 2));
  ShotPhaseSet phases = combine_phases(angles, background);

  AcquisitionMeta meta;
  meta.b_value = config.b_value;
  if (config.b_value > 0.0)
    meta.direction = config.direction;

  const auto full = make_interleave_masks(n, m, config.shots);
  AcquisitionSet acq =
      synthesize_acquisition(magnitude, coils, phases, full, config.snr_db,
                             stream_seed(config.seed, 3), meta);
  if (config.undersample)
    acq = acq.with_masks(
        retrospective_undersample(full, *config.undersample, config.rate));
  return {std::move(acq), std::move(coils), b0,          magnitude,
          std::move(phases), std::move(motion), std::move(background)};
}

} // namespace pair
