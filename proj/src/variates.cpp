#include "spw/variates.hpp"

#include <cmath>
#include <string>

#include "spw/error.hpp"

namespace spw {
namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) noexcept {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

void check_sigma(double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw DomainError("sigma must be positive and finite, got " + std::to_string(sigma));
  }
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                        std::array<std::uint32_t, 2> key) noexcept {
  for (int round = 0; round < 10; ++round) {
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, ctr[0], hi0, lo0);
    mulhilo(kMul1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kWeyl0;
    key[1] += kWeyl1;
  }
  return ctr;
}

RandomStream RandomStream::substream(std::uint64_t index) const noexcept {
  return RandomStream(seed_, splitmix64(splitmix64(stream_id_) ^ splitmix64(~index)));
}

std::uint64_t RandomStream::next_u64() noexcept {
  if (have_hi_) {
    have_hi_ = false;
    return hi_word_;
  }
  const auto out = philox4x32(
      {static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
       static_cast<std::uint32_t>(stream_id_), static_cast<std::uint32_t>(stream_id_ >> 32)},
      {static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32)});
  ++block_;
  hi_word_ = (static_cast<std::uint64_t>(out[3]) << 32) | out[2];
  have_hi_ = true;
  return (static_cast<std::uint64_t>(out[1]) << 32) | out[0];
}

double RandomStream::uniform() noexcept {
  // (k + 0.5) / 2^53 for k in [0, 2^53): never 0 or 1.
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double RandomStream::normal() noexcept {
  if (spare_normal_) {
    const double z = *spare_normal_;
    spare_normal_.reset();
    return z;
  }
  double u, v, s;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double f = std::sqrt(-2.0 * std::log(s) / s);
  spare_normal_ = v * f;
  return u * f;
}

double sample_normal(RandomStream& stream, double sigma) {
  check_sigma(sigma);
  return sigma * stream.normal();
}

double sample_gamma(RandomStream& stream, double shape) {
  if (!(shape > 0.0) || !std::isfinite(shape)) {
    throw DomainError("gamma shape must be positive and finite");
  }
  if (shape < 1.0) {
    // Gamma(a) = Gamma(a + 1) * U^(1/a)
    const double g = sample_gamma(stream, shape + 1.0);
    return g * std::pow(stream.uniform(), 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = stream.normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = stream.uniform();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
    if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
  }
}

double sample_chi(RandomStream& stream, std::int64_t df, double sigma) {
  if (df <= 0) throw DomainError("chi degrees of freedom must be >= 1, got " + std::to_string(df));
  check_sigma(sigma);
  const double unit = std::sqrt(2.0 * sample_gamma(stream, 0.5 * static_cast<double>(df)));
  if (!std::isfinite(unit)) throw NumericError("non-finite chi variate");
  return sigma * unit;
}

}  // namespace spw
