#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "spw/sampler.hpp"

namespace spw {

/// Singular values of H (descending) plus, for each computed value l and
/// each spiked row r < k, the two quantities the spike Jacobian needs:
/// U[r, l] and p[r, l] = sum_j H[r, j] V[j, l].
struct SpectralResult {
  std::vector<double> singular_values;
  std::size_t k = 0;
  bool has_vectors = false;
  std::vector<double> left_rows;          ///< k x ncomputed, row-major
  std::vector<double> right_projections;  ///< k x ncomputed, row-major
  /// Value l lies within 1e-6 * d_1 of a computed neighbour.
  std::vector<std::uint8_t> clustered;

  std::size_t ncomputed() const noexcept { return singular_values.size(); }
  double u(std::size_t r, std::size_t l) const noexcept { return left_rows[r * ncomputed() + l]; }
  double p(std::size_t r, std::size_t l) const noexcept { return right_projections[r * ncomputed() + l]; }
  bool is_clustered(std::size_t l) const noexcept { return clustered[l] != 0; }
};

/// Relative gap below which two singular values count as clustered.
inline constexpr double kClusterGap = 1e-6;

/// All min(m, n) singular values of H, computed on the compact nonzero block
/// by band bidiagonalization and bidiagonal QR. With `vectors` the spiked
/// rows of U and V are tracked as well.
SpectralResult full_svd(const BandedSample& h, bool vectors = true);

struct TopSvdOptions {
  /// Triplet residual target relative to the singular value.
  double tolerance = 1e-10;
  /// Lanczos basis size per restart cycle; 0 picks max(40, 4 ell).
  std::size_t basis = 0;
  /// Restart-cycle cap; 0 means 10 * ell * ceil(log2(min(m, n))).
  std::size_t max_cycles = 0;
};

/// The ell largest singular values by Golub-Kahan-Lanczos bidiagonalization
/// of the compact block, with full reorthogonalization. One triplet is
/// locked per converged cycle and later cycles run in its orthogonal
/// complement, so repeated values are found one copy at a time. Throws
/// ConvergenceError (carrying residual norms) past the cycle cap.
SpectralResult top_svd(const BandedSample& h, std::size_t ell, const TopSvdOptions& options = {});

/// y = H x for x of length n; y has length m. Work is O((k + 1) min(m, n))
/// beyond zero-filling y.
std::vector<double> band_matvec(const BandedSample& h, std::span<const double> x);
/// x = H^T y for y of length m.
std::vector<double> band_rmatvec(const BandedSample& h, std::span<const double> y);

/// Same products restricted to the compact block: x has block_cols()
/// entries, y block_rows(). Outputs are overwritten.
void block_matvec(const BandedSample& h, std::span<const double> x, std::span<double> y);
void block_rmatvec(const BandedSample& h, std::span<const double> y, std::span<double> x);

/// Singular values (descending) of a dense sample, via Eigen's
/// divide-and-conquer SVD. This is the brute-force reference path.
std::vector<double> dense_singular_values(const DenseSample& g);

}  // namespace spw
