#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "spw/error.hpp"
#include "spw/stats.hpp"
#include "spw/variates.hpp"

namespace spw {
namespace {

// Known-answer vectors of the Philox4x32-10 reference implementation.
TEST(Philox, KnownAnswers) {
  using A4 = std::array<std::uint32_t, 4>;
  using A2 = std::array<std::uint32_t, 2>;
  EXPECT_EQ(philox4x32(A4{0, 0, 0, 0}, A2{0, 0}), (A4{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8}));
  EXPECT_EQ(philox4x32(A4{0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, A2{0xffffffff, 0xffffffff}),
            (A4{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd}));
  EXPECT_EQ(philox4x32(A4{0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, A2{0xa4093822, 0x299f31d0}),
            (A4{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1}));
}

std::vector<double> normals(RandomStream s, std::size_t count, double sigma = 1.0) {
  std::vector<double> out(count);
  for (auto& v : out) v = sample_normal(s, sigma);
  return out;
}

std::vector<double> chis(RandomStream s, std::size_t count, std::int64_t df, double sigma = 1.0) {
  std::vector<double> out(count);
  for (auto& v : out) v = sample_chi(s, df, sigma);
  return out;
}

TEST(RandomStream, Reproducible) {
  RandomStream a(42, 3), b(42, 3);
  for (int i = 0; i < 1000; ++i) ASSERT_EQ(a.next_u64(), b.next_u64());
  EXPECT_EQ(normals(RandomStream(9), 100), normals(RandomStream(9), 100));
}

TEST(RandomStream, CopyForksIdenticalSequence) {
  RandomStream a(1);
  for (int i = 0; i < 7; ++i) a.normal();
  RandomStream b = a;
  for (int i = 0; i < 50; ++i) ASSERT_EQ(a.normal(), b.normal());
}

TEST(RandomStream, UniformOpenInterval) {
  RandomStream s(5);
  for (int i = 0; i < 100000; ++i) {
    const double u = s.uniform();
    ASSERT_GT(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
}

double correlation(const std::vector<double>& x, const std::vector<double>& y) {
  double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    syy += y[i] * y[i];
    sxy += x[i] * y[i];
  }
  return (sxy - sx * sy / n) / std::sqrt((sxx - sx * sx / n) * (syy - sy * sy / n));
}

TEST(RandomStream, DistinctStreamsUncorrelated) {
  const std::size_t n = 100000;
  const double bound = 5.0 / std::sqrt(static_cast<double>(n));
  const RandomStream base(77);
  const auto a = normals(base, n);
  EXPECT_LT(std::fabs(correlation(a, normals(RandomStream(77, 1), n))), bound);
  EXPECT_LT(std::fabs(correlation(a, normals(base.substream(0), n))), bound);
  EXPECT_LT(std::fabs(correlation(normals(base.substream(0), n), normals(base.substream(1), n))), bound);
  // lagged against itself
  std::vector<double> lag(a.begin() + 1, a.end()), head(a.begin(), a.end() - 1);
  EXPECT_LT(std::fabs(correlation(head, lag)), bound);
}

TEST(SampleNormal, Moments) {
  const auto x = normals(RandomStream(2024), 1000000);
  const auto s = summarize(x);
  EXPECT_LT(std::fabs(s.mean), 4e-3);
  EXPECT_LT(std::fabs(s.variance - 1.0), 0.01);
}

TEST(SampleNormal, ScaleFamilyExact) {
  const auto unit = normals(RandomStream(8), 1000);
  const auto ten = normals(RandomStream(8), 1000, 10.0);
  for (std::size_t i = 0; i < unit.size(); ++i) ASSERT_EQ(ten[i], 10.0 * unit[i]);
}

TEST(SampleNormal, RejectsBadSigma) {
  RandomStream s;
  EXPECT_THROW(sample_normal(s, 0.0), DomainError);
  EXPECT_THROW(sample_normal(s, -1.0), DomainError);
  EXPECT_THROW(sample_normal(s, std::nan("")), DomainError);
  EXPECT_THROW(sample_normal(s, INFINITY), DomainError);
}

TEST(SampleChi, OneDegreeIsHalfNormal) {
  const auto c = chis(RandomStream(10), 10000, 1);
  auto z = normals(RandomStream(11), 10000);
  for (auto& v : z) v = std::fabs(v);
  EXPECT_GT(ks_two_sample(c, z).p_value, 0.01);
}

TEST(SampleChi, ThreeDegreesScaleTwoMatchesSumOfSquares) {
  const auto c = chis(RandomStream(12), 10000, 3, 2.0);
  RandomStream other(13, 5);
  std::vector<double> oracle(10000);
  for (auto& v : oracle) {
    double acc = 0;
    for (int i = 0; i < 3; ++i) {
      const double z = other.normal();
      acc += z * z;
    }
    v = 2.0 * std::sqrt(acc);
  }
  EXPECT_GT(ks_two_sample(c, oracle).p_value, 0.01);
}

TEST(SampleChi, SquaredMeanWithinThreeStandardErrors) {
  for (std::int64_t df : {1, 2, 4, 5, 50, 999}) {
    auto c = chis(RandomStream(100 + df), 100000, df);
    for (auto& v : c) v *= v;
    const auto s = summarize(c);
    EXPECT_LT(std::fabs(s.mean - static_cast<double>(df)), 3.0 * s.std_error) << "df=" << df;
  }
}

TEST(SampleChi, ScaleEquivariantAndPositive) {
  const auto unit = chis(RandomStream(3), 5000, 7);
  const auto scaled = chis(RandomStream(3), 5000, 7, 2.5);
  for (std::size_t i = 0; i < unit.size(); ++i) {
    ASSERT_GT(unit[i], 0.0);
    ASSERT_EQ(scaled[i], 2.5 * unit[i]);
  }
}

TEST(SampleChi, HugeDegreesFinite) {
  RandomStream s(1);
  const double v = sample_chi(s, 1000000000, 1.0);
  EXPECT_TRUE(std::isfinite(v));
  EXPECT_NEAR(v * v / 1e9, 1.0, 1e-3);
}

TEST(SampleChi, RejectsBadArguments) {
  RandomStream s;
  EXPECT_THROW(sample_chi(s, 0), DomainError);
  EXPECT_THROW(sample_chi(s, -3), DomainError);
  EXPECT_THROW(sample_chi(s, 2, 0.0), DomainError);
}

TEST(SampleGamma, SmallShapeMean) {
  RandomStream s(21);
  std::vector<double> g(100000);
  for (auto& v : g) v = sample_gamma(s, 0.3);
  const auto sm = summarize(g);
  EXPECT_LT(std::fabs(sm.mean - 0.3), 3.0 * sm.std_error);
}

}  // namespace
}  // namespace spw
