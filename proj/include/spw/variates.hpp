#pragma once

#include <array>
#include <cstdint>
#include <optional>

namespace spw {

/// Philox4x32-10 counter-based generator (Salmon et al., "Parallel random
/// numbers: as easy as 1, 2, 3"). Exposed for known-answer tests.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key) noexcept;

/// Seedable stream of random variates.
///
/// The 64-bit seed is the Philox key; the stream id occupies the upper half
/// of the 128-bit counter and the draw position the lower half, so distinct
/// (seed, stream_id) pairs never share a block. A stream is a single-owner
/// value: copy it to fork an identical sequence, call substream() to derive
/// independent ones.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed = 0, std::uint64_t stream_id = 0) noexcept
      : seed_(seed), stream_id_(stream_id) {}

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }
  /// Number of 64-bit words consumed so far.
  std::uint64_t position() const noexcept { return 2 * block_ - (have_hi_ ? 1 : 0); }

  /// Deterministic child stream; children with different indices are
  /// independent of each other and of the parent.
  RandomStream substream(std::uint64_t index) const noexcept;

  std::uint64_t next_u64() noexcept;
  /// Uniform in the open interval (0, 1), 53-bit resolution.
  double uniform() noexcept;
  /// Standard normal (Marsaglia polar method; second value is cached).
  double normal() noexcept;

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::uint64_t block_ = 0;
  std::uint64_t hi_word_ = 0;
  bool have_hi_ = false;
  std::optional<double> spare_normal_;
};

/// One N(0, sigma^2) draw. Throws DomainError unless sigma is positive and
/// finite. Equals sigma * (the unit draw) bit-for-bit.
double sample_normal(RandomStream& stream, double sigma);

/// One draw of sigma * chi_df, i.e. sigma times the square root of a
/// chi-squared variate with df degrees of freedom. Generated as
/// sqrt(2 * Gamma(df / 2)) with Marsaglia-Tsang rejection, so the cost does
/// not grow with df.
double sample_chi(RandomStream& stream, std::int64_t df, double sigma = 1.0);

/// Gamma(shape, scale 1) variate, shape > 0.
double sample_gamma(RandomStream& stream, double shape);

}  // namespace spw
