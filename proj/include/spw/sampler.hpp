#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "spw/variates.hpp"

namespace spw {

/// Ensemble parameters: m variables (rows of G), n observations (columns),
/// and the standard deviations of the first k rows. Rows past k have unit
/// standard deviation.
///
/// An empty spike list (k = 0, the uncorrelated central case) is stored as
/// k = 1 with sigma_1 = 1, which has the same eigenvalue law.
class SpikeSpec {
 public:
  /// Throws DomainError if m or n is zero, k > m, or a spike is not
  /// positive and finite.
  SpikeSpec(std::size_t m, std::size_t n, std::vector<double> spikes);

  std::size_t m() const noexcept { return m_; }
  std::size_t n() const noexcept { return n_; }
  std::size_t k() const noexcept { return spikes_.size(); }
  const std::vector<double>& spikes() const noexcept { return spikes_; }

  /// Standard deviation of zero-based row i.
  double sigma(std::size_t row) const noexcept { return row < spikes_.size() ? spikes_[row] : 1.0; }

  /// Row count of the block that can hold nonzeros: min(m, n + k).
  std::size_t block_rows() const noexcept;
  /// Column count of that block: min(m, n).
  std::size_t block_cols() const noexcept;

  /// Same (m, n), new spike values. k must not change.
  SpikeSpec with_spikes(std::vector<double> spikes) const;

  friend bool operator==(const SpikeSpec&, const SpikeSpec&) = default;

 private:
  std::size_t m_;
  std::size_t n_;
  std::vector<double> spikes_;
};

enum class EntryKind : std::uint8_t { chi_diag, chi_sub, normal };

/// How a stored entry of H is distributed (before row scaling).
struct EntryLaw {
  EntryKind kind;
  std::int64_t df;  ///< degrees of freedom for chi kinds, 0 for normal

  friend bool operator==(const EntryLaw&, const EntryLaw&) = default;
};

/// Unit-scale variates of one banded draw in canonical order: offsets
/// t = 0..k ascending, and within each offset the column index ascending.
struct NoiseRecord {
  std::size_t m = 0;
  std::size_t n = 0;
  std::size_t k = 0;
  std::vector<double> values;
};

/// One realization of the lower-banded matrix H (bandwidth k).
///
/// Nonzeros are confined to the leading block_rows() x block_cols() block
/// and to offsets t = i - j in [0, k]. Band t holds H[j + t, j] for
/// j < band_length(t). Each stored value is sigma(row) times a unit-scale
/// variate, and both are kept so that the draw can be replayed at other
/// spike values.
class BandedSample {
 public:
  /// Builds H = diag(sigma) * H' from unit-scale noise. Throws DomainError
  /// if the noise shape does not match the spec.
  BandedSample(SpikeSpec spec, const NoiseRecord& noise);

  /// Fixture constructor: a dense row-major m x n matrix whose nonzeros lie
  /// inside the band. Throws DomainError otherwise.
  static BandedSample from_dense(SpikeSpec spec, std::span<const double> dense);

  const SpikeSpec& spec() const noexcept { return spec_; }
  std::size_t m() const noexcept { return spec_.m(); }
  std::size_t n() const noexcept { return spec_.n(); }
  std::size_t k() const noexcept { return spec_.k(); }
  std::size_t block_rows() const noexcept { return rows_; }
  std::size_t block_cols() const noexcept { return cols_; }

  std::size_t band_length(std::size_t t) const noexcept;
  std::span<const double> band(std::size_t t) const noexcept;
  std::span<const double> unit_band(std::size_t t) const noexcept;
  /// Total stored entries.
  std::size_t stored() const noexcept { return values_.size(); }

  /// H[i, j], zero-based, zero outside the band.
  double at(std::size_t i, std::size_t j) const noexcept;
  /// Law of the stored entry (i, j), or nullopt if (i, j) is structurally zero.
  std::optional<EntryLaw> law(std::size_t i, std::size_t j) const noexcept;

  /// Unit-scale noise of this draw.
  NoiseRecord noise() const;
  /// Row-major m x n expansion.
  std::vector<double> to_dense() const;

  /// Stored values in canonical order.
  std::span<const double> values() const noexcept { return values_; }

 private:
  BandedSample(SpikeSpec spec, std::vector<double> unit, std::vector<double> values);
  std::size_t offset(std::size_t t) const noexcept;

  SpikeSpec spec_;
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> unit_;
  std::vector<double> values_;
};

/// Canonical law of entry (i, j) for the given spec, nullopt if zero.
std::optional<EntryLaw> entry_law(const SpikeSpec& spec, std::size_t i, std::size_t j) noexcept;

struct SampleOptions {
  /// Added to every chi degree of freedom (clamped at 0, which yields a zero
  /// entry). Fault injection for validating the statistical checks; leave 0.
  std::int64_t df_shift = 0;
};

/// Draws H:
///   H[i,i]   ~ sigma_i chi_(n-i+1)           for i <= min(m, n)
///   H[i,i-k] ~ sigma_i chi_(m-i+1)           for k < i <= min(m, n + k)
///   H[i,j]   ~ N(0, sigma_i^2)               for i - k < j < i, j <= n, i <= m
/// (one-based indices), everything else zero. Variates are consumed in the
/// canonical band order.
BandedSample sample_banded(const SpikeSpec& spec, RandomStream& stream, const SampleOptions& options = {});

/// G with independent N(0, sigma_i^2) entries, stored row-major.
struct DenseSample {
  SpikeSpec spec;
  std::vector<double> values;

  double at(std::size_t i, std::size_t j) const noexcept { return values[i * spec.n() + j]; }
};

/// Brute-force sampler: all m * n entries, drawn row by row.
DenseSample sample_dense(const SpikeSpec& spec, RandomStream& stream);

/// Triplet text format: a comment line with the spec, a header, then one
/// "i,j,value,kind" line per stored entry (one-based indices; kind is
/// chi_diag(df), chi_sub(df) or normal).
void write_triplets(std::ostream& os, const BandedSample& h);
BandedSample read_triplets(std::istream& is);

/// Dense m x n CSV expansion, no header.
void write_dense_csv(std::ostream& os, const BandedSample& h);

}  // namespace spw
