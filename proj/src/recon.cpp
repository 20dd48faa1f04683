#include "pair/recon.hpp"

#include <chrono>
#include <cmath>

#include "pair/error.hpp"
#include "pair/parallel.hpp"

namespace pair {

namespace {

constexpr double kDivergenceRatio = 1e3;

void check_inputs(const AcquisitionSet &acq, const CoilMapSet &coils) {
  require(coils.rows() == acq.rows() && coils.cols() == acq.cols(),
          ErrorKind::Shape, "coil maps do not match the acquisition grid");
  require(coils.count() == acq.channels(), ErrorKind::Shape,
          "coil count " + std::to_string(coils.count()) +
              " does not match channel count " +
              std::to_string(acq.channels()));
}

const CoilMapSet &normalized_coils(const CoilMapSet &coils,
                                   std::optional<CoilMapSet> &storage) {
  if (coils.is_normalized())
    return coils;
  storage = coils.normalized();
  return *storage;
}

// One shot: sum_h conj(C_h) [C_h x + lambda F* U* (Y - U F C_h x)].
ComplexImage consistency_for_shot(const ComplexImage &x,
                                  const AcquisitionSet &acq,
                                  const CoilMapSet &coils, int shot,
                                  double lambda, double &residual) {
  const MaskGrid &mask = acq.mask(shot).bits;
  const ComplexImage ones = ComplexImage::Ones(x.rows(), x.cols());
  ComplexImage out = ComplexImage::Zero(x.rows(), x.cols());
  residual = 0.0;
  for (int h = 0; h < coils.count(); ++h) {
    const ComplexImage cx = coils[h] * x;
    const ComplexImage predicted = apply_forward(x, ones, coils[h], mask);
    const ComplexImage r = acq.kspace(shot, h) - predicted;
    residual += r.abs2().sum();
    const ComplexImage g = cx + lambda * idft_centered(r);
    out += coils[h].conjugate() * g;
  }
  return out;
}

void zero_background(RealImage &m, const MaskGrid &support) {
  m = support.select(m, 0.0);
}

void check_finite(const RealImage &m, int k) {
  require(m.allFinite(), ErrorKind::Divergence,
          "non-finite magnitude at iteration " + std::to_string(k));
}

} // namespace

std::string to_string(Method m) {
  switch (m) {
  case Method::Pair:
    return "PAIR";
  case Method::PairTv:
    return "PAIR-TV";
  case Method::Phase:
    return "PHASE";
  case Method::Plrhm:
    return "PLRHM";
  }
  return "unknown";
}

Method method_from_string(const std::string &s) {
  if (s == "PAIR" || s == "PAIR-wTV")
    return Method::Pair;
  if (s == "PAIR-TV")
    return Method::PairTv;
  if (s == "PHASE")
    return Method::Phase;
  if (s == "PLRHM")
    return Method::Plrhm;
  fail(ErrorKind::Config, "unknown method '" + s + "'");
}

void ReconConfig::validate() const {
  require(lambda > 0.0, ErrorKind::Config, "lambda must be > 0");
  require(beta >= 0.0, ErrorKind::Config, "beta must be >= 0");
  require(eta >= 1.0 && eta < 2.0, ErrorKind::Config, "eta must be in [1, 2)");
  require(keep >= 0, ErrorKind::Config, "keep must be >= 0");
  require(sigma >= 0.0, ErrorKind::Config, "sigma must be >= 0");
  require(radius >= 0, ErrorKind::Config, "radius must be >= 0");
  require(delta > 0.0, ErrorKind::Config, "delta must be > 0");
  require(max_iters >= 1, ErrorKind::Config, "max_iters must be >= 1");
  require(tol > 0.0, ErrorKind::Config, "tol must be > 0");
}

std::vector<ComplexImage>
data_consistency_step(const std::vector<ComplexImage> &shot_images,
                      const AcquisitionSet &acq, const CoilMapSet &coils,
                      double lambda, double *residual) {
  check_inputs(acq, coils);
  require(static_cast<int>(shot_images.size()) == acq.shots(),
          ErrorKind::Shape, "shot image count does not match shot count");
  const int shots = acq.shots();
  std::vector<ComplexImage> out(static_cast<std::size_t>(shots));
  std::vector<double> res(static_cast<std::size_t>(shots), 0.0);
  parallel_for(shots, [&](int j) {
    const auto ju = static_cast<std::size_t>(j);
    require(shot_images[ju].rows() == acq.rows() &&
                shot_images[ju].cols() == acq.cols(),
            ErrorKind::Shape, "shot image shape mismatch");
    out[ju] = consistency_for_shot(shot_images[ju], acq, coils, j, lambda,
                                   res[ju]);
  });
  if (residual) {
    *residual = 0.0;
    for (double r : res)
      *residual += r;
  }
  return out;
}

std::vector<ComplexImage> data_consistency_step(const RealImage &magnitude,
                                                const ShotPhaseSet &phases,
                                                const AcquisitionSet &acq,
                                                const CoilMapSet &coils,
                                                double lambda,
                                                double *residual) {
  require(phases.count() == acq.shots(), ErrorKind::Shape,
          "phase count does not match shot count");
  require(magnitude.rows() == acq.rows() && magnitude.cols() == acq.cols(),
          ErrorKind::Shape, "magnitude shape mismatch");
  std::vector<ComplexImage> x;
  x.reserve(static_cast<std::size_t>(phases.count()));
  for (int j = 0; j < phases.count(); ++j)
    x.push_back(phases[j] * magnitude.cast<cplx>());
  return data_consistency_step(x, acq, coils, lambda, residual);
}

PhaseUpdate phase_update_step(const std::vector<ComplexImage> &shot_images,
                              const SupportRegion &support, int keep,
                              double sigma) {
  const int shots = static_cast<int>(shot_images.size());
  std::vector<ComplexImage> projected(static_cast<std::size_t>(shots));
  parallel_for(shots, [&](int j) {
    const auto ju = static_cast<std::size_t>(j);
    projected[ju] = lowrank_project(shot_images[ju], support, keep, sigma);
  });
  ShotPhaseSet phases(projected);
  return {std::move(phases), std::move(projected)};
}

RealImage magnitude_update_step(const RealImage &magnitude,
                                const ShotPhaseSet &phases,
                                const std::vector<ComplexImage> &shot_images,
                                const EdgeWeights &weights, double beta,
                                double eta) {
  require(static_cast<int>(shot_images.size()) == phases.count(),
          ErrorKind::Shape, "shot image count does not match phase count");
  const int shots = phases.count();
  RealImage avg = RealImage::Zero(magnitude.rows(), magnitude.cols());
  for (int j = 0; j < shots; ++j)
    avg += (phases[j].conjugate() *
            shot_images[static_cast<std::size_t>(j)])
               .real();
  avg /= static_cast<double>(shots);
  const RealImage tv =
      beta > 0.0 ? RealImage(avg - beta * wtv_subgradient(avg, weights)) : avg;
  return (magnitude + eta * (tv - magnitude)).cwiseMax(0.0);
}

double relative_change(const RealImage &prev, const RealImage &next) {
  require(prev.rows() == next.rows() && prev.cols() == next.cols(),
          ErrorKind::Shape, "iterate shapes differ");
  const double num = (next - prev).square().sum();
  const double den = prev.square().sum();
  if (num == 0.0)
    return 0.0;
  if (den == 0.0)
    return std::numeric_limits<double>::infinity();
  return num / den;
}

bool check_convergence(const RealImage &prev, const RealImage &next,
                       double tol) {
  return relative_change(prev, next) < tol;
}

bool check_convergence(const std::vector<RealImage> &history, double tol) {
  require(history.size() >= 2, ErrorKind::Domain,
          "convergence check needs two iterates");
  return check_convergence(history[history.size() - 2], history.back(), tol);
}

ReconState initial_state(const AcquisitionSet &acq, const CoilMapSet &coils) {
  check_inputs(acq, coils);
  std::vector<ComplexImage> images;
  RealImage ss = RealImage::Zero(acq.rows(), acq.cols());
  for (int j = 0; j < acq.shots(); ++j) {
    std::vector<ComplexImage> per_coil;
    for (int h = 0; h < acq.channels(); ++h)
      per_coil.push_back(idft_centered(acq.kspace(j, h)));
    ComplexImage img = coil_combine(per_coil, coils);
    ss += img.abs2();
    images.push_back(std::move(img));
  }
  ShotPhaseSet phases(images);
  return {ss.sqrt(), std::move(phases), std::move(images), 0, {}};
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Records one iteration and decides whether to stop. Throws on divergence.
bool record_iteration(ReconResult &result, const RealImage &prev,
                      const RealImage &next, double residual, int k,
                      double tol, Clock::time_point t0) {
  check_finite(next, k);
  const double rel = relative_change(prev, next);
  require(std::isfinite(rel) && rel <= kDivergenceRatio, ErrorKind::Divergence,
          "relative change " + std::to_string(rel) + " at iteration " +
              std::to_string(k));
  result.trace.push_back({k, rel, residual, seconds_since(t0)});
  result.iterations = k;
  return rel < tol;
}

} // namespace

ReconResult pair_reconstruct(const AcquisitionSet &acq,
                             const CoilMapSet &coils_in,
                             const ReconConfig &config_in,
                             const PairOptions &options) {
  ReconConfig config = config_in;
  if (config.method == Method::Phase)
    config.beta = 0.0;
  require(config.method != Method::Plrhm, ErrorKind::Config,
          "pair_reconstruct does not run the implicit baseline");
  config.validate();
  std::optional<CoilMapSet> coil_storage;
  const CoilMapSet &coils = normalized_coils(coils_in, coil_storage);
  check_inputs(acq, coils);

  EdgeWeights weights = EdgeWeights::uniform(acq.rows(), acq.cols());
  if (config.method == Method::Pair && config.beta > 0.0) {
    if (options.weights)
      weights = *options.weights;
    else if (options.m0)
      weights = compute_weights(*options.m0, config.delta);
    else
      fail(ErrorKind::Config, "PAIR needs edge weights or a b=0 image");
  }
  if (options.fixed_phases)
    require(options.fixed_phases->count() == acq.shots(), ErrorKind::Shape,
            "fixed phase count does not match shot count");

  const auto t0 = Clock::now();
  const SupportRegion support = support_points(config.radius);
  const MaskGrid background = coils.support();

  ReconState state = initial_state(acq, coils);
  if (options.fixed_phases)
    state.phases = *options.fixed_phases;
  else if (options.initial_phases)
    state.phases = *options.initial_phases;
  zero_background(state.magnitude, background);

  ReconResult result;
  result.config = config;
  for (int k = 1; k <= config.max_iters; ++k) {
    double residual = 0.0;
    const auto images = data_consistency_step(state.magnitude, state.phases,
                                              acq, coils, config.lambda,
                                              &residual);
    if (!options.fixed_phases)
      state.phases =
          phase_update_step(images, support, config.keep, config.sigma).phases;
    RealImage next =
        magnitude_update_step(state.magnitude, state.phases, images, weights,
                              config.beta, config.eta);
    zero_background(next, background);
    const bool done = record_iteration(result, state.magnitude, next, residual,
                                       k, config.tol, t0);
    state.relative_changes.push_back(result.trace.back().relative_change);
    state.magnitude = std::move(next);
    state.shot_images = images;
    state.iteration = k;
    if (done) {
      result.stop = StopReason::Converged;
      break;
    }
  }
  result.magnitude = std::move(state.magnitude);
  result.phases = std::move(state.phases);
  result.shot_images = std::move(state.shot_images);
  result.wall_seconds = seconds_since(t0);
  return result;
}

ReconResult phase_only_reconstruct(const AcquisitionSet &acq,
                                   const CoilMapSet &coils,
                                   const ReconConfig &config) {
  ReconConfig c = config;
  c.method = Method::Phase;
  c.beta = 0.0;
  return pair_reconstruct(acq, coils, c);
}

ReconResult plrhm_reconstruct(const AcquisitionSet &acq,
                              const CoilMapSet &coils_in,
                              const ReconConfig &config_in) {
  ReconConfig config = config_in;
  config.method = Method::Plrhm;
  config.validate();
  std::optional<CoilMapSet> coil_storage;
  const CoilMapSet &coils = normalized_coils(coils_in, coil_storage);
  check_inputs(acq, coils);

  const auto t0 = Clock::now();
  const SupportRegion support = support_points(config.radius);
  const MaskGrid background = coils.support();
  const double shots = static_cast<double>(acq.shots());

  auto rms = [&](const std::vector<ComplexImage> &images) {
    RealImage ss = RealImage::Zero(acq.rows(), acq.cols());
    for (const auto &img : images)
      ss += img.abs2();
    RealImage m = (ss / shots).sqrt();
    zero_background(m, background);
    return m;
  };

  std::vector<ComplexImage> images = initial_state(acq, coils).shot_images;
  RealImage m = rms(images);
  ReconResult result;
  result.config = config;
  for (int k = 1; k <= config.max_iters; ++k) {
    double residual = 0.0;
    const auto consistent =
        data_consistency_step(images, acq, coils, config.lambda, &residual);
    images =
        phase_update_step(consistent, support, config.keep, config.sigma).images;
    RealImage next = rms(images);
    const bool done =
        record_iteration(result, m, next, residual, k, config.tol, t0);
    m = std::move(next);
    if (done) {
      result.stop = StopReason::Converged;
      break;
    }
  }
  result.magnitude = std::move(m);
  result.shot_images = std::move(images);
  result.wall_seconds = seconds_since(t0);
  return result;
}

ReconResult reconstruct(const AcquisitionSet &acq, const CoilMapSet &coils,
                        const ReconConfig &config,
                        const PairOptions &options) {
  switch (config.method) {
  case Method::Plrhm:
    return plrhm_reconstruct(acq, coils, config);
  case Method::Phase:
  case Method::Pair:
  case Method::PairTv:
    return pair_reconstruct(acq, coils, config, options);
  }
  fail(ErrorKind::Config, "unknown method");
}

} // namespace pair
