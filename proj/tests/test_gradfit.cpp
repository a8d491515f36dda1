#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "json.hpp"
#include "spw/error.hpp"
#include "spw/gradfit.hpp"
#include "spw/spectra.hpp"
#include "spw/stats.hpp"
#include "support.hpp"

namespace spw {
namespace {

// Central differences of the fixed-noise replay map, step 1e-6 sigma_r.
std::vector<double> fd_jacobian(const SpikeSpec& spec, const NoiseRecord& noise, std::size_t L) {
  const std::size_t k = spec.k();
  std::vector<double> out(L * k);
  for (std::size_t r = 0; r < k; ++r) {
    const double h = 1e-6 * spec.sigma(r);
    auto plus = spec.spikes(), minus = spec.spikes();
    plus[r] += h;
    minus[r] -= h;
    const auto dp = full_svd(reparam_resample(spec.with_spikes(plus), noise), false).singular_values;
    const auto dm = full_svd(reparam_resample(spec.with_spikes(minus), noise), false).singular_values;
    for (std::size_t l = 0; l < L; ++l) out[l * k + r] = (dp[l] - dm[l]) / (2 * h);
  }
  return out;
}

// Max-norm relative error of the whole matrix.
double matrix_relative_error(const std::vector<double>& got, const std::vector<double>& want) {
  double diff = 0, scale = 0;
  for (std::size_t i = 0; i < want.size(); ++i) {
    diff = std::max(diff, std::fabs(got[i] - want[i]));
    scale = std::max(scale, std::fabs(want[i]));
  }
  return diff / scale;
}

TEST(SampleJacobian, OneByOne) {
  const double c = 1.7, sigma = 3.0;
  const NoiseRecord noise{1, 1, 1, {c}};
  const auto h = reparam_resample(SpikeSpec(1, 1, {sigma}), noise);
  const auto s = full_svd(h);
  EXPECT_DOUBLE_EQ(s.singular_values[0], sigma * c);
  const auto j = sample_jacobian(h, s, 1);
  EXPECT_DOUBLE_EQ(j[0], c);
}

TEST(SampleJacobian, ZeroRowGivesZeroColumn) {
  // Row 1 (second spiked row) is identically zero.
  const std::vector<double> dense{3, 0, 0, 0, 0, 0, 1, 0.5, 2};
  const auto h = BandedSample::from_dense(SpikeSpec(3, 3, {1.0, 2.0}), dense);
  const auto s = full_svd(h);
  const auto j = sample_jacobian(h, s, 3);
  for (std::size_t l = 0; l < 3; ++l) EXPECT_EQ(j[l * 2 + 1], 0.0);
}

TEST(SampleJacobian, MatchesFiniteDifferences10x8) {
  const SpikeSpec spec(10, 8, {4.0, 1.5});
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    RandomStream rs(seed);
    const auto h = sample_banded(spec, rs);
    const auto j = sample_jacobian(h, full_svd(h), 8);
    EXPECT_LT(matrix_relative_error(j, fd_jacobian(spec, h.noise(), 8)), 1e-5);
  }
}

TEST(SampleJacobian, MatchesFiniteDifferencesRandomSpecs) {
  std::mt19937_64 rng(8);
  int checked = 0;
  for (int trial = 0; trial < 60; ++trial) {
    const auto spec = testing::random_spec(rng, 30, 3);
    RandomStream rs(500 + trial);
    const auto h = sample_banded(spec, rs);
    const auto s = full_svd(h);
    const std::size_t L = s.ncomputed();
    if (std::any_of(s.clustered.begin(), s.clustered.end(), [](auto c) { return c != 0; })) continue;
    ++checked;
    EXPECT_LT(matrix_relative_error(sample_jacobian(h, s, L), fd_jacobian(spec, h.noise(), L)), 1e-5)
        << spec.m() << "x" << spec.n() << " k=" << spec.k();
  }
  EXPECT_GT(checked, 50);
}

TEST(SampleJacobian, TopSvdDataAgreesWithFull) {
  RandomStream rs(3);
  const auto h = sample_banded(SpikeSpec(200, 150, {20.0, 8.0, 3.0}), rs);
  const auto jf = sample_jacobian(h, full_svd(h), 4);
  const auto jt = sample_jacobian(h, top_svd(h, 4), 4);
  EXPECT_LT(matrix_relative_error(jt, jf), 1e-8);
}

TEST(SampleJacobian, ClusteredValuesRaise) {
  const auto h = BandedSample::from_dense(SpikeSpec(3, 3, {1.0}), std::vector<double>{2, 0, 0, 0, 2, 0, 0, 0, 1});
  const auto s = full_svd(h);
  try {
    sample_jacobian(h, s, 2);
    FAIL() << "expected DegenerateDerivativeError";
  } catch (const DegenerateDerivativeError& e) {
    EXPECT_EQ(e.index(), 0u);
  }
  EXPECT_THROW(sample_jacobian(h, full_svd(h, false), 1), DomainError);
}

TEST(ReparamResample, IdentityReplayIsBitIdentical) {
  const SpikeSpec spec(12, 9, {5.0, 2.5});
  RandomStream rs(4);
  const auto h = sample_banded(spec, rs);
  const auto replay = reparam_resample(spec, h.noise());
  EXPECT_TRUE(std::equal(h.values().begin(), h.values().end(), replay.values().begin(), replay.values().end()));
}

TEST(ReparamResample, SpikedRowsScaleLinearly) {
  const SpikeSpec spec(9, 7, {5.0, 2.0});
  RandomStream rs(5);
  const auto h = sample_banded(spec, rs);
  const auto scaled = reparam_resample(spec.with_spikes({5.0 * 4, 2.0 * 4}), h.noise());
  for (std::size_t i = 0; i < 9; ++i) {
    for (std::size_t j = 0; j < 7; ++j) {
      EXPECT_EQ(scaled.at(i, j), i < 2 ? 4.0 * h.at(i, j) : h.at(i, j));
    }
  }
}

TEST(ReparamResample, ShapeMismatch) {
  const SpikeSpec spec(9, 7, {5.0, 2.0});
  RandomStream rs(5);
  const auto noise = sample_banded(spec, rs).noise();
  EXPECT_THROW(reparam_resample(SpikeSpec(9, 7, {5.0}), noise), DomainError);
  EXPECT_THROW(reparam_resample(SpikeSpec(9, 8, {5.0, 2.0}), noise), DomainError);
}

// First-order prediction along a sigma_1 grid from the Jacobian at the centre.
TEST(ReparamResample, FirstOrderAlongGrid) {
  const SpikeSpec spec(15, 12, {6.0, 2.0});
  RandomStream rs(6);
  const auto h = sample_banded(spec, rs);
  const auto s0 = full_svd(h);
  const auto j = sample_jacobian(h, s0, 12);
  for (double delta : {-1e-3, -1e-4, 1e-4, 1e-3}) {
    const auto d = full_svd(reparam_resample(spec.with_spikes({6.0 + delta, 2.0}), h.noise()), false).singular_values;
    for (std::size_t l = 0; l < 12; ++l) {
      const double predicted = s0.singular_values[l] + j[l * 2] * delta;
      EXPECT_NEAR(d[l], predicted, 10 * delta * delta * s0.singular_values[0] + 1e-12);
    }
  }
}

TEST(MeanSingularValues, BatchOfOneIsOneDraw) {
  const SpikeSpec spec(200, 150, {10.0, 4.0});
  const RandomStream stream(9);
  const auto mr = mean_singular_values(spec, 3, 1, stream);
  RandomStream sub = stream.substream(0);
  const auto top = top_svd(sample_banded(spec, sub), 3);
  for (std::size_t l = 0; l < 3; ++l) EXPECT_EQ(mr.means[l], top.singular_values[l]);
}

TEST(MeanSingularValues, MeanIsExactMeanOfPerSample) {
  const SpikeSpec spec(20, 15, {5.0, 2.0});
  const auto mr = mean_singular_values(spec, 15, 50, RandomStream(2));
  const auto& jb = mr.jacobian;
  ASSERT_EQ(jb.per_sample.size(), jb.batch_size);
  for (std::size_t i = 0; i < jb.L * jb.k; ++i) {
    double acc = 0;
    for (const auto& m : jb.per_sample) acc += m[i];
    EXPECT_EQ(jb.mean[i], acc / static_cast<double>(jb.batch_size));
    for (const auto& m : jb.per_sample) EXPECT_TRUE(std::isfinite(m[i]));
  }
}

TEST(MeanSingularValues, ThreadCountDoesNotChangeResult) {
  const SpikeSpec spec(40, 30, {5.0, 2.0});
  const auto one = mean_singular_values(spec, 30, 40, RandomStream(3), {1, true});
  const auto four = mean_singular_values(spec, 30, 40, RandomStream(3), {4, true});
  EXPECT_EQ(one.means, four.means);
  EXPECT_EQ(one.jacobian.mean, four.jacobian.mean);
}

TEST(MeanSingularValues, AgreesWithDenseSampler) {
  const SpikeSpec spec(100, 100, {1.0});
  const std::size_t batch = 5000;
  const auto mr = mean_singular_values(spec, 1, batch, RandomStream(10), {0, false});
  std::vector<double> dense_top;
  const RandomStream ds(10, 1);
  for (std::size_t i = 0; i < 2000; ++i) {
    RandomStream sub = ds.substream(i);
    dense_top.push_back(dense_singular_values(sample_dense(spec, sub))[0]);
  }
  const auto ref = summarize(dense_top);
  const double se = std::hypot(mr.std_errors[0], ref.std_error);
  EXPECT_LT(std::fabs(mr.means[0] - ref.mean), 3 * se);
}

TEST(MeanSingularValues, StandardErrorShrinksLikeRootTwo) {
  const SpikeSpec spec(30, 30, {4.0});
  const auto a = mean_singular_values(spec, 1, 2000, RandomStream(11), {0, false});
  const auto b = mean_singular_values(spec, 1, 4000, RandomStream(11), {0, false});
  const double ratio = a.std_errors[0] / b.std_errors[0];
  EXPECT_GT(ratio, 1.2);
  EXPECT_LT(ratio, 1.7);
  EXPECT_LT(std::fabs(a.means[0] - b.means[0]), 3 * a.std_errors[0]);
}

TEST(MeanSingularValues, Errors) {
  const SpikeSpec spec(10, 5, {2.0});
  EXPECT_THROW(mean_singular_values(spec, 6, 10, RandomStream()), DomainError);
  EXPECT_THROW(mean_singular_values(spec, 0, 10, RandomStream()), DomainError);
  EXPECT_THROW(mean_singular_values(spec, 2, 0, RandomStream()), DomainError);
}

TEST(FitSpikes, TargetAtInitConvergesImmediately) {
  const SpikeSpec spec(30, 30, {5.0, 2.0});
  const RandomStream stream(12);
  const auto target = mean_singular_values(spec, 30, 200, stream, {0, false}).means;
  FitOptions opts;
  opts.batch = 200;
  const std::vector<double> init{5.0, 2.0};
  const auto report = fit_spikes(target, spec, init, stream, opts);
  EXPECT_EQ(report.status, FitStatus::converged);
  EXPECT_EQ(report.iterations, 0u);
  EXPECT_EQ(report.final_spikes, init);
  EXPECT_EQ(report.residual_norms.front(), 0.0);
}

TEST(FitSpikes, OneSpikeRecovery) {
  const SpikeSpec spec(50, 50, {10.0});
  const auto target = mean_singular_values(spec, 1, 2000, RandomStream(13), {0, false}).means;
  FitOptions opts;
  opts.batch = 2000;
  const std::vector<double> init{1.5};
  const auto report = fit_spikes(target, spec, init, RandomStream(14), opts);
  EXPECT_NE(report.status, FitStatus::stalled);
  EXPECT_NEAR(report.final_spikes[0] / 10.0, 1.0, 0.05);
}

TEST(FitSpikes, AcceptedResidualsNonincreasing) {
  const SpikeSpec spec(40, 40, {8.0, 3.0});
  const auto target = mean_singular_values(spec, 40, 300, RandomStream(15), {0, false}).means;
  FitOptions opts;
  opts.batch = 300;
  const std::vector<double> init{2.0, 2.0};
  const auto report = fit_spikes(target, spec, init, RandomStream(16), opts);
  for (std::size_t i = 1; i < report.residual_norms.size(); ++i) {
    EXPECT_LE(report.residual_norms[i], report.residual_norms[i - 1]);
  }
  EXPECT_EQ(report.damping_trace.size(), report.iterations);
  for (double s : report.final_spikes) EXPECT_GT(s, 0.0);
  std::vector<double> got = report.final_spikes;
  std::sort(got.rbegin(), got.rend());
  EXPECT_NEAR(got[0] / 8.0, 1.0, 0.1);
  EXPECT_NEAR(got[1] / 3.0, 1.0, 0.1);
}

TEST(FitSpikes, MisspecifiedSpikeCountCompletes) {
  const SpikeSpec spec(30, 30, {10.0, 5.0, 3.0});
  const auto target = mean_singular_values(spec, 30, 200, RandomStream(17), {0, false}).means;
  FitOptions opts;
  opts.batch = 200;
  opts.max_iters = 30;
  const std::vector<double> init{2.0};
  const auto report = fit_spikes(target, SpikeSpec(30, 30, {1.0}), init, RandomStream(18), opts);
  EXPECT_TRUE(report.status == FitStatus::converged || report.status == FitStatus::max_iters);
  EXPECT_GT(report.residual_norms.back(), 0.0);
}

TEST(FitSpikes, FreshNoiseRuns) {
  const SpikeSpec spec(20, 20, {6.0});
  const auto target = mean_singular_values(spec, 20, 200, RandomStream(19), {0, false}).means;
  FitOptions opts;
  opts.batch = 200;
  opts.max_iters = 15;
  opts.fresh_noise = true;
  const std::vector<double> init{2.0};
  const auto report = fit_spikes(target, spec, init, RandomStream(20), opts);
  EXPECT_NEAR(report.final_spikes[0] / 6.0, 1.0, 0.1);
}

TEST(FitSpikes, RejectsBadTarget) {
  const SpikeSpec spec(10, 10, {2.0});
  const std::vector<double> init{2.0};
  EXPECT_THROW(fit_spikes(std::vector<double>{1.0, 2.0}, spec, init, RandomStream()), DomainError);
  EXPECT_THROW(fit_spikes(std::vector<double>{1.0, -1.0}, spec, init, RandomStream()), DomainError);
  EXPECT_THROW(fit_spikes(std::vector<double>(11, 1.0), spec, init, RandomStream()), DomainError);
  EXPECT_THROW(fit_spikes(std::vector<double>{}, spec, init, RandomStream()), DomainError);
}

TEST(FitSpikes, UnderdeterminedWarns) {
  const SpikeSpec spec(20, 20, {5.0, 2.0});
  const auto target = mean_singular_values(spec, 1, 100, RandomStream(21), {0, false}).means;
  FitOptions opts;
  opts.batch = 100;
  opts.max_iters = 5;
  const std::vector<double> init{4.0, 2.0};
  const auto report = fit_spikes(target, spec, init, RandomStream(22), opts);
  EXPECT_FALSE(report.warnings.empty());
}

TEST(FitReportJson, Fields) {
  const SpikeSpec spec(15, 15, {4.0});
  const auto target = mean_singular_values(spec, 15, 50, RandomStream(23), {0, false}).means;
  FitOptions opts;
  opts.batch = 50;
  const std::vector<double> init{2.0};
  const auto report = fit_spikes(target, spec, init, RandomStream(24), opts);
  const auto j = nlohmann::json::parse(fit_report_json(report));
  EXPECT_EQ(j["status"], to_string(report.status));
  EXPECT_EQ(j["final_spikes"].size(), 1u);
  EXPECT_EQ(j["iterates"].size(), report.iterates.size());
  EXPECT_EQ(j["residual_norms"].size(), report.residual_norms.size());
  EXPECT_EQ(j["damping_trace"].size(), report.damping_trace.size());
}

}  // namespace
}  // namespace spw
