#include "spw/gradfit.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include "json.hpp"
#include <limits>
#include <optional>

#include "spw/detail/parallel.hpp"
#include "spw/error.hpp"

namespace spw {

std::vector<double> sample_jacobian(const BandedSample& h, const SpectralResult& s, std::size_t L) {
  if (!s.has_vectors) throw DomainError("sample_jacobian: spectral result has no vector data");
  if (L > s.ncomputed()) throw DomainError("sample_jacobian: L exceeds the computed singular values");
  const std::size_t k = h.k();
  if (s.k != k) throw DomainError("sample_jacobian: spectral result belongs to a different spec");
  for (std::size_t l = 0; l < L; ++l) {
    if (s.is_clustered(l)) {
      throw DegenerateDerivativeError("singular value " + std::to_string(l + 1) + " is not simple", l);
    }
  }
  std::vector<double> jac(L * k);
  for (std::size_t l = 0; l < L; ++l) {
    for (std::size_t r = 0; r < k; ++r) jac[l * k + r] = s.u(r, l) * s.p(r, l) / h.spec().sigma(r);
  }
  return jac;
}

BandedSample reparam_resample(const SpikeSpec& spec, const NoiseRecord& noise) { return BandedSample(spec, noise); }

std::vector<NoiseRecord> draw_noise_batch(const SpikeSpec& spec, std::size_t batch, const RandomStream& stream) {
  std::vector<NoiseRecord> out(batch);
  for (std::size_t i = 0; i < batch; ++i) {
    RandomStream sub = stream.substream(i);
    out[i] = sample_banded(spec, sub).noise();
  }
  return out;
}

namespace {

// Iterative solver only when a small fraction of a sizeable spectrum is wanted.
SpectralResult spectrum_for(const BandedSample& h, std::size_t L) {
  if (h.block_cols() > 64 && 4 * L < h.block_cols()) return top_svd(h, L);
  return full_svd(h, true);
}

struct Draw {
  std::vector<double> values;
  std::vector<double> jac;
  bool dropped = false;
};

MeanResult summarize(std::vector<Draw>& draws, std::size_t L, std::size_t k, bool keep) {
  MeanResult out;
  out.means.assign(L, 0.0);
  out.std_errors.assign(L, 0.0);
  out.jacobian.L = L;
  out.jacobian.k = k;
  out.jacobian.mean.assign(L * k, 0.0);
  std::size_t used = 0;
  for (const auto& d : draws) {
    if (d.dropped) {
      ++out.dropped;
      continue;
    }
    ++used;
    for (std::size_t l = 0; l < L; ++l) out.means[l] += d.values[l];
    for (std::size_t i = 0; i < L * k; ++i) out.jacobian.mean[i] += d.jac[i];
  }
  out.jacobian.batch_size = used;
  if (used == 0) throw NumericError("every draw in the batch was dropped");
  for (double& v : out.means) v /= static_cast<double>(used);
  for (double& v : out.jacobian.mean) v /= static_cast<double>(used);
  if (used > 1) {
    for (const auto& d : draws) {
      if (d.dropped) continue;
      for (std::size_t l = 0; l < L; ++l) {
        const double dev = d.values[l] - out.means[l];
        out.std_errors[l] += dev * dev;
      }
    }
    for (double& v : out.std_errors) v = std::sqrt(v / static_cast<double>(used - 1) / static_cast<double>(used));
  }
  if (keep) {
    for (auto& d : draws) {
      if (!d.dropped) out.jacobian.per_sample.push_back(std::move(d.jac));
    }
  }
  return out;
}

Draw evaluate_one(const BandedSample& h, std::size_t L) {
  Draw d;
  const SpectralResult s = spectrum_for(h, L);
  d.values.assign(s.singular_values.begin(), s.singular_values.begin() + static_cast<std::ptrdiff_t>(L));
  try {
    d.jac = sample_jacobian(h, s, L);
  } catch (const DegenerateDerivativeError&) {
    d.dropped = true;
  }
  return d;
}

void check_L(const SpikeSpec& spec, std::size_t L) {
  if (L < 1 || L > spec.block_cols()) {
    throw DomainError("L must be in [1, min(m, n)] = [1, " + std::to_string(spec.block_cols()) + "]");
  }
}

}  // namespace

MeanResult evaluate_noise_batch(const SpikeSpec& spec, std::span<const NoiseRecord> noise, std::size_t L,
                                const BatchOptions& options) {
  check_L(spec, L);
  if (noise.empty()) throw DomainError("batch must be >= 1");
  std::vector<Draw> draws(noise.size());
  detail::parallel_for(noise.size(), options.threads,
                       [&](std::size_t i) { draws[i] = evaluate_one(reparam_resample(spec, noise[i]), L); });
  return summarize(draws, L, spec.k(), options.keep_per_sample);
}

MeanResult mean_singular_values(const SpikeSpec& spec, std::size_t L, std::size_t batch, const RandomStream& stream,
                                const BatchOptions& options) {
  check_L(spec, L);
  if (batch < 1) throw DomainError("batch must be >= 1");
  std::vector<Draw> draws(batch);
  detail::parallel_for(batch, options.threads, [&](std::size_t i) {
    RandomStream sub = stream.substream(i);
    draws[i] = evaluate_one(sample_banded(spec, sub), L);
  });
  return summarize(draws, L, spec.k(), options.keep_per_sample);
}

// --- Levenberg-Marquardt ----------------------------------------------------------

std::string to_string(FitStatus status) {
  switch (status) {
    case FitStatus::converged:
      return "converged";
    case FitStatus::max_iters:
      return "max_iters";
    case FitStatus::stalled:
      return "stalled";
  }
  return "unknown";
}

namespace {

double norm2(const std::vector<double>& x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

struct Evaluation {
  std::vector<double> spikes;
  std::vector<double> means;
  std::vector<double> residual;
  double residual_norm = 0.0;
  Eigen::MatrixXd jac_log;  // L x k, derivative w.r.t. log sigma
  std::size_t dropped = 0;
};

}  // namespace

FitReport fit_spikes(std::span<const double> target, const SpikeSpec& spec_template, std::span<const double> init_spikes,
                     const RandomStream& stream, const FitOptions& options) {
  const std::size_t L = target.size();
  const std::size_t k = init_spikes.size();
  if (k == 0) throw DomainError("fit_spikes: need at least one initial spike");
  const SpikeSpec start_spec(spec_template.m(), spec_template.n(),
                             std::vector<double>(init_spikes.begin(), init_spikes.end()));
  check_L(start_spec, L);
  for (std::size_t l = 0; l < L; ++l) {
    if (!(target[l] > 0.0) || !std::isfinite(target[l])) throw DomainError("fit_spikes: target values must be positive");
    if (l > 0 && target[l] > target[l - 1]) throw DomainError("fit_spikes: target must be in descending order");
  }
  if (options.batch < 1) throw DomainError("fit_spikes: batch must be >= 1");

  FitReport report;
  report.target.assign(target.begin(), target.end());
  if (L < k) {
    report.warnings.push_back("fewer target values (" + std::to_string(L) + ") than spikes (" + std::to_string(k) +
                              "); the fit is underdetermined");
  }

  const BatchOptions batch_options{options.threads, false};
  std::vector<NoiseRecord> noise = draw_noise_batch(start_spec, options.batch, stream);
  std::size_t noise_generation = 0;

  auto evaluate = [&](const std::vector<double>& spikes) {
    const SpikeSpec spec = start_spec.with_spikes(spikes);
    MeanResult mr = evaluate_noise_batch(spec, noise, L, batch_options);
    ++report.evaluations;
    report.dropped_samples += mr.dropped;
    if (static_cast<double>(mr.dropped) > options.max_drop_fraction * static_cast<double>(noise.size())) {
      throw NumericError("fit aborted: " + std::to_string(mr.dropped) + " of " + std::to_string(noise.size()) +
                         " draws had clustered singular values among the fitted ones");
    }
    Evaluation ev;
    ev.spikes = spikes;
    ev.means = mr.means;
    ev.residual.resize(L);
    for (std::size_t l = 0; l < L; ++l) ev.residual[l] = mr.means[l] - target[l];
    ev.residual_norm = norm2(ev.residual);
    ev.jac_log.resize(static_cast<Eigen::Index>(L), static_cast<Eigen::Index>(k));
    for (std::size_t l = 0; l < L; ++l) {
      for (std::size_t r = 0; r < k; ++r) {
        ev.jac_log(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(r)) = mr.jacobian.mean_at(l, r) * spikes[r];
      }
    }
    ev.dropped = mr.dropped;
    return ev;
  };
  auto redraw = [&] {
    noise = draw_noise_batch(start_spec, options.batch, stream.substream(0x4e6f697365ull + ++noise_generation));
  };

  Evaluation current = evaluate(std::vector<double>(init_spikes.begin(), init_spikes.end()));
  report.iterates.push_back(current.spikes);
  report.residual_norms.push_back(current.residual_norm);

  auto gram_of = [](const Evaluation& ev) -> Eigen::MatrixXd { return ev.jac_log.transpose() * ev.jac_log; };
  auto note_rank = [&](const Eigen::MatrixXd& gram) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram, Eigen::EigenvaluesOnly);
    const double hi = es.eigenvalues().maxCoeff(), lo = es.eigenvalues().minCoeff();
    if (!(hi > 0.0) || lo <= 1e-12 * hi) ++report.rank_deficient_evaluations;
  };

  Eigen::MatrixXd gram = gram_of(current);
  note_rank(gram);
  double lambda = 1e-3 * gram.diagonal().maxCoeff();
  if (!(lambda > 0.0)) lambda = 1e-3;
  const double lambda_cap = 1e20 * std::max(1.0, gram.diagonal().maxCoeff());

  report.status = FitStatus::max_iters;
  while (true) {
    if (current.residual_norm == 0.0) {
      report.status = FitStatus::converged;
      break;
    }
    if (report.iterations >= options.max_iters) break;

    const Eigen::Map<const Eigen::VectorXd> r(current.residual.data(), static_cast<Eigen::Index>(L));
    const Eigen::VectorXd grad = current.jac_log.transpose() * r;
    Eigen::MatrixXd damped = gram;
    damped.diagonal().array() += lambda;
    const Eigen::VectorXd delta = damped.ldlt().solve(-grad);

    std::vector<double> candidate(k);
    double step = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      candidate[i] = current.spikes[i] * std::exp(delta(static_cast<Eigen::Index>(i)));
      step += (candidate[i] - current.spikes[i]) * (candidate[i] - current.spikes[i]);
      scale += current.spikes[i] * current.spikes[i];
    }
    if (!(std::sqrt(step) >= 1e-8 * std::sqrt(scale))) {
      report.status = FitStatus::converged;
      break;
    }

    if (options.fresh_noise) {
      redraw();
      current = evaluate(current.spikes);
      gram = gram_of(current);
    }
    // A trial point whose batch cannot be evaluated (too many clustered
    // draws) counts as a rejected step; the abort rule applies only to points
    // the fit actually moves to.
    std::optional<Evaluation> trial;
    try {
      trial = evaluate(candidate);
    } catch (const NumericError&) {
      ++report.unevaluable_trials;
    }
    ++report.iterations;
    report.damping_trace.push_back(lambda);
    const double trial_norm = trial ? trial->residual_norm : std::numeric_limits<double>::infinity();
    const bool accept = trial_norm < current.residual_norm;
    report.steps.push_back({candidate, trial_norm, lambda, accept});

    if (accept) {
      current = std::move(*trial);
      gram = gram_of(current);
      note_rank(gram);
      lambda *= 0.5;
      report.iterates.push_back(current.spikes);
      report.residual_norms.push_back(current.residual_norm);
      const std::size_t n = report.residual_norms.size();
      if (n >= 4) {
        const double before = report.residual_norms[n - 4];
        if (before - report.residual_norms[n - 1] < 1e-12 * before) {
          report.status = FitStatus::converged;
          break;
        }
      }
    } else {
      lambda *= 2.0;
      if (lambda > lambda_cap) {
        report.status = FitStatus::stalled;
        break;
      }
    }
  }

  report.final_spikes = current.spikes;
  report.final_means = current.means;
  if (report.rank_deficient_evaluations * 2 > report.evaluations) {
    report.warnings.push_back("Jacobian was rank deficient in most evaluations");
  }
  return report;
}

std::string fit_report_json(const FitReport& report) {
  nlohmann::ordered_json j;
  j["status"] = to_string(report.status);
  j["iterations"] = report.iterations;
  j["accepted_steps"] = report.iterates.empty() ? 0 : report.iterates.size() - 1;
  j["evaluations"] = report.evaluations;
  j["final_spikes"] = report.final_spikes;
  j["final_residual_norm"] = report.residual_norms.empty() ? 0.0 : report.residual_norms.back();
  j["target"] = report.target;
  j["final_means"] = report.final_means;
  j["iterates"] = report.iterates;
  j["residual_norms"] = report.residual_norms;
  j["damping_trace"] = report.damping_trace;
  auto steps = nlohmann::ordered_json::array();
  for (const auto& s : report.steps) {
    steps.push_back({{"spikes", s.spikes}, {"residual_norm", s.residual_norm}, {"lambda", s.lambda},
                     {"accepted", s.accepted}});
  }
  j["steps"] = std::move(steps);
  j["dropped_samples"] = report.dropped_samples;
  j["rank_deficient_evaluations"] = report.rank_deficient_evaluations;
  j["unevaluable_trials"] = report.unevaluable_trials;
  j["warnings"] = report.warnings;
  return j.dump(2) + "\n";
}

}  // namespace spw
