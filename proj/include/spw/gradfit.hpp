#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "spw/sampler.hpp"
#include "spw/spectra.hpp"
#include "spw/variates.hpp"

namespace spw {

/// Jacobians dd_l / dsigma_r of the top L singular values with respect to
/// the k spike standard deviations. Matrices are L x k, row-major.
struct JacobianBatch {
  std::size_t L = 0;
  std::size_t k = 0;
  std::size_t batch_size = 0;
  std::vector<std::vector<double>> per_sample;
  std::vector<double> mean;

  double mean_at(std::size_t l, std::size_t r) const noexcept { return mean[l * k + r]; }
};

/// Derivative of each of the first L singular values with respect to each
/// spike, holding the unit-scale noise fixed:
///   dd_l / dsigma_r = U[r, l] * sum_j H[r, j] V[j, l] / sigma_r,  r < k.
/// Throws DegenerateDerivativeError if any of the first L values is
/// clustered, DomainError if S lacks vector data or has fewer than L values.
std::vector<double> sample_jacobian(const BandedSample& h, const SpectralResult& s, std::size_t L);

/// Replays recorded unit-scale noise at new spikes: H(sigma) = diag(sigma) H'.
BandedSample reparam_resample(const SpikeSpec& spec, const NoiseRecord& noise);

/// Unit-scale noise for `batch` draws, draw i taken from stream.substream(i).
std::vector<NoiseRecord> draw_noise_batch(const SpikeSpec& spec, std::size_t batch, const RandomStream& stream);

struct BatchOptions {
  std::size_t threads = 0;  ///< 0 = hardware concurrency
  bool keep_per_sample = true;
};

struct MeanResult {
  std::vector<double> means;       ///< batch means of d_1..d_L
  std::vector<double> std_errors;  ///< standard error of each mean
  JacobianBatch jacobian;
  std::size_t dropped = 0;  ///< draws removed for clustered singular values
};

/// Means of the top L singular values and of their spike Jacobians over the
/// given noise batch replayed at spec's spikes.
MeanResult evaluate_noise_batch(const SpikeSpec& spec, std::span<const NoiseRecord> noise, std::size_t L,
                                const BatchOptions& options = {});

/// Same, over `batch` fresh draws (draw i from stream.substream(i)).
MeanResult mean_singular_values(const SpikeSpec& spec, std::size_t L, std::size_t batch, const RandomStream& stream,
                                const BatchOptions& options = {});

enum class FitStatus { converged, max_iters, stalled };
std::string to_string(FitStatus status);

struct FitOptions {
  std::size_t batch = 2000;
  std::size_t max_iters = 100;
  /// Redraw the noise batch on every step instead of holding it fixed.
  bool fresh_noise = false;
  std::size_t threads = 0;
  /// Abort if more than this fraction of a batch is dropped.
  double max_drop_fraction = 0.01;
};

struct FitStep {
  std::vector<double> spikes;
  double residual_norm;
  double lambda;
  bool accepted;
};

struct FitReport {
  std::vector<double> target;
  std::vector<std::vector<double>> iterates;  ///< accepted spike vectors, starting point first
  std::vector<double> residual_norms;         ///< one per iterate
  std::vector<double> damping_trace;          ///< lambda used by every attempted step
  std::vector<FitStep> steps;                 ///< every attempted step
  FitStatus status = FitStatus::max_iters;
  std::vector<double> final_spikes;
  std::vector<double> final_means;
  std::size_t iterations = 0;  ///< attempted steps
  std::size_t dropped_samples = 0;
  std::size_t rank_deficient_evaluations = 0;
  std::size_t unevaluable_trials = 0;  ///< trial points rejected for too many dropped draws
  std::size_t evaluations = 0;
  std::vector<std::string> warnings;
};

/// Levenberg-Marquardt fit of the spikes so that the batch-mean top-L
/// singular values match `target` (L = target.size()). Works in log-spike
/// coordinates. Unless options.fresh_noise is set, one noise batch drawn
/// from `stream` is reused for every evaluation, which makes the objective
/// deterministic. Throws DomainError on a bad target and NumericError if too
/// many draws have to be dropped.
FitReport fit_spikes(std::span<const double> target, const SpikeSpec& spec_template,
                     std::span<const double> init_spikes, const RandomStream& stream, const FitOptions& options = {});

/// JSON document with the trajectory, status and final state.
std::string fit_report_json(const FitReport& report);

}  // namespace spw
