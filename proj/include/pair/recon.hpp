#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pair/grid.hpp"
#include "pair/lifting.hpp"
#include "pair/operators.hpp"
#include "pair/wtv.hpp"

namespace pair {

enum class Method {
  Pair,   // low-rank phase prior + weighted TV magnitude prior
  PairTv, // same with unit weights (plain TV)
  Phase,  // low-rank phase prior only (beta = 0)
  Plrhm,  // implicit-phase baseline: per-shot images, no shared magnitude
};

std::string to_string(Method m);
Method method_from_string(const std::string &s);

struct ReconConfig {
  Method method = Method::Pair;
  double lambda = 1.0;  // data-consistency step
  double beta = 7e-4;   // TV weight
  double eta = 1.5;     // relaxation, [1, 2)
  int keep = 25;        // leading singular values kept untouched
  double sigma = 0.6;   // threshold applied to the rest
  int radius = 3;       // support disk radius
  double delta = kDefaultDelta;
  int max_iters = 1000;
  double tol = 1e-5;
  std::uint64_t seed = 0;

  /// Throws ErrorKind::Config on any out-of-range field.
  void validate() const;
};

struct ReconState {
  RealImage magnitude;
  ShotPhaseSet phases;
  std::vector<ComplexImage> shot_images;
  int iteration = 0;
  std::vector<double> relative_changes;
};

struct IterationRecord {
  int iteration = 0;
  double relative_change = 0.0;
  double data_residual = 0.0; // sum over h, j of ||U(Y - F C P m)||^2
  double elapsed_seconds = 0.0;
};

enum class StopReason { Converged, MaxIterations };

struct ReconResult {
  RealImage magnitude;
  std::optional<ShotPhaseSet> phases; // absent for the implicit baseline
  std::vector<ComplexImage> shot_images;
  int iterations = 0;
  StopReason stop = StopReason::MaxIterations;
  double wall_seconds = 0.0;
  std::vector<IterationRecord> trace;
  ReconConfig config;
};

/// Per shot: I_j = sum_h conj(C_h) [C_h x_j + lambda F* U* (Y_hj - U F C_h
/// x_j)] with x_j = P_j m. Writes the summed squared residual if asked.
std::vector<ComplexImage> data_consistency_step(const RealImage &magnitude,
                                                const ShotPhaseSet &phases,
                                                const AcquisitionSet &acq,
                                                const CoilMapSet &coils,
                                                double lambda,
                                                double *residual = nullptr);

/// Same update for free per-shot images x_j.
std::vector<ComplexImage>
data_consistency_step(const std::vector<ComplexImage> &shot_images,
                      const AcquisitionSet &acq, const CoilMapSet &coils,
                      double lambda, double *residual = nullptr);

struct PhaseUpdate {
  ShotPhaseSet phases;
  std::vector<ComplexImage> images; // low-rank projected shot images
};

PhaseUpdate phase_update_step(const std::vector<ComplexImage> &shot_images,
                              const SupportRegion &support, int keep,
                              double sigma);

/// m_avg = Re(sum_j conj(P_j) I_j) / J, m_tv = m_avg - beta grad(m_avg),
/// result max(m + eta (m_tv - m), 0).
RealImage magnitude_update_step(const RealImage &magnitude,
                                const ShotPhaseSet &phases,
                                const std::vector<ComplexImage> &shot_images,
                                const EdgeWeights &weights, double beta,
                                double eta);

/// ||next - prev||^2 / ||prev||^2.
double relative_change(const RealImage &prev, const RealImage &next);
bool check_convergence(const RealImage &prev, const RealImage &next,
                       double tol);
/// Uses the last two iterates; needs at least two.
bool check_convergence(const std::vector<RealImage> &history, double tol);

/// Zero-filled start: P_j from the coil-combined shot image, m the
/// root-sum-of-squares of those images.
ReconState initial_state(const AcquisitionSet &acq, const CoilMapSet &coils);

struct PairOptions {
  std::optional<EdgeWeights> weights;
  std::optional<RealImage> m0;              // weights computed from this
  std::optional<ShotPhaseSet> fixed_phases; // skip phase updates
  std::optional<ShotPhaseSet> initial_phases; // warm start, still updated
};

/// Explicit phase-and-magnitude solver. Method Pair needs weights or m0;
/// PairTv uses unit weights; Phase forces beta to 0.
ReconResult pair_reconstruct(const AcquisitionSet &acq,
                             const CoilMapSet &coils, const ReconConfig &config,
                             const PairOptions &options = {});

ReconResult phase_only_reconstruct(const AcquisitionSet &acq,
                                   const CoilMapSet &coils,
                                   const ReconConfig &config);

/// Implicit-phase baseline. The magnitude is the root-mean-square over shots
/// of the per-shot images.
ReconResult plrhm_reconstruct(const AcquisitionSet &acq,
                              const CoilMapSet &coils,
                              const ReconConfig &config);

/// Dispatch on config.method.
ReconResult reconstruct(const AcquisitionSet &acq, const CoilMapSet &coils,
                        const ReconConfig &config,
                        const PairOptions &options = {});

} // namespace pair
