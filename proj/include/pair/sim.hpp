#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "pair/grid.hpp"
#include "pair/operators.hpp"

namespace pair {

struct Ellipse {
  double intensity;
  double semi_x, semi_y;     // semi-axes in units of the half-FOV
  double center_x, center_y; // x to the right, y up, in [-1, 1]
  double angle_deg;
};

struct PhantomSpec {
  Eigen::Index rows = 128;
  Eigen::Index cols = 128;
  std::vector<Ellipse> ellipses;

  /// The modified (Toft) Shepp-Logan ellipse table.
  static PhantomSpec modified_shepp_logan(Eigen::Index rows, Eigen::Index cols);
};

/// Center of pixel (r, c) in phantom coordinates: x grows with the column,
/// y decreases with the row.
std::array<double, 2> phantom_coordinates(Eigen::Index r, Eigen::Index c,
                                          Eigen::Index rows, Eigen::Index cols);

/// Sum of ellipse intensities at each pixel center, clamped to [0, 1].
RealImage rasterize_phantom(const PhantomSpec &spec);
RealImage shepp_logan(Eigen::Index rows, Eigen::Index cols);

/// Receive coil geometry, in units of the field of view.
struct CoilGeometry {
  double loop_radius = 0.4;   // fraction of the FOV
  double ring_distance = 1.5; // loop centers at this multiple of the half-FOV
  double start_angle = 0.0;   // radians, position of coil 0
  int segments = 256;         // discretization of each loop
};

/// Circular loops evenly spaced on a ring around the object, each with its
/// normal pointing at the center and its plane containing the slice normal.
/// Sensitivity is Bx - i By of the loop's field in the slice plane (z = 0),
/// normalized so that sum_h |C_h|^2 = 1.
CoilMapSet biot_savart_coils(Eigen::Index rows, Eigen::Index cols, int coils,
                             const CoilGeometry &geometry = {});

/// Second-order polynomial shot phase coefficients a1..a6 for each shot.
struct MotionPhaseParams {
  std::vector<std::array<double, 6>> coefficients;

  /// Half-widths of the coefficient intervals [-w, w).
  static std::array<double, 6> ranges(Eigen::Index rows, Eigen::Index cols);
  static MotionPhaseParams sample(int shots, Eigen::Index rows,
                                  Eigen::Index cols, std::mt19937_64 &rng);
};

/// a1 + a2 x + a3 y + a4 x^2 + a5 y^2 + a6 x y with x the row index and y the
/// column index.
RealImage polynomial_shot_phase(const MotionPhaseParams &params, int shot,
                                Eigen::Index rows, Eigen::Index cols);

/// Smooth random phase: real part of the inverse DFT of random values in the
/// central 5x5 k-space block, rescaled to peak magnitude pi/2.
RealImage background_phase(Eigen::Index rows, Eigen::Index cols,
                           std::uint64_t seed);

/// s0 * exp(-b D), with D given per pixel.
RealImage diffusion_decay(const RealImage &s0, double b, const RealImage &d);
RealImage diffusion_decay(const RealImage &s0, double b, double d);

/// Shot j samples phase-encode lines j, j + J, j + 2J, ...
std::vector<SamplingMask> make_interleave_masks(Eigen::Index rows,
                                                Eigen::Index cols, int shots);

enum class UndersampleMode { Uniform, PartialFourier };

inline constexpr int kPartialFourierBand = 8;

/// Uniform: line i (0-based among a shot's acquired lines) is kept when
/// floor(i * rate) advances, which keeps every (1/rate)-th line from the first
/// for reciprocal rates. Partial Fourier: keep lines with index < ceil(rate M)
/// plus the central kPartialFourierBand lines.
std::vector<SamplingMask>
retrospective_undersample(const std::vector<SamplingMask> &masks,
                          UndersampleMode mode, double rate);

struct SyntheticTruth {
  RealImage magnitude;
  ShotPhaseSet phases;
};

/// Y_hj = mask_j . F(C_h . P_j . m) + noise, with P_j = exp(-i (phi_j +
/// background)). Noise is complex white Gaussian on sampled entries only, its
/// power set from the mean signal power over all sampled entries. No noise
/// when snr_db is empty or infinite.
AcquisitionSet synthesize_acquisition(const RealImage &magnitude,
                                      const CoilMapSet &coils,
                                      const ShotPhaseSet &phases,
                                      const std::vector<SamplingMask> &masks,
                                      std::optional<double> snr_db,
                                      std::uint64_t seed,
                                      AcquisitionMeta meta = {});

/// Combines motion and background phase angles into P_j = exp(-i(phi_j + bg)).
ShotPhaseSet combine_phases(const std::vector<RealImage> &motion,
                            const RealImage &background);

/// Independent, reproducible seed for one random stream of a run.
std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream);

/// The full simulation: Shepp-Logan b=0 image, diffusion decay, ring coils
/// restricted to the object, per-shot motion plus background phase, masks,
/// noise. Retrospective undersampling drops lines from the noisy full data.
struct SimulationConfig {
  Eigen::Index rows = 128;
  Eigen::Index cols = 128;
  int shots = 4;
  int channels = 8;
  std::optional<double> snr_db = 10.0; // empty: noiseless
  double b_value = 1000.0;             // s/mm^2
  double diffusivity = 0.7e-3;         // mm^2/s
  std::array<double, 3> direction{1.0, 0.0, 0.0};
  std::optional<UndersampleMode> undersample;
  double rate = 1.0;
  CoilGeometry geometry;
  bool restrict_coils = true; // zero the coil maps outside the phantom
  std::uint64_t seed = 0;
};

struct SimulatedData {
  AcquisitionSet acquisition;
  CoilMapSet coils;
  RealImage b0;        // noiseless b=0 phantom
  RealImage magnitude; // ground truth for this acquisition
  ShotPhaseSet phases;
  MotionPhaseParams motion;
  RealImage background;
};

SimulatedData simulate(const SimulationConfig &config);

} // namespace pair
