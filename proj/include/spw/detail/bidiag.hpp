#pragma once

// Building blocks of the banded SVD. Exposed for unit tests.

#include <cstddef>
#include <span>
#include <vector>

#include "spw/kernels.hpp"

namespace spw {
class BandedSample;
}

namespace spw::detail {

/// Plane rotation [c s; -s c] that maps (f, g) to (r, 0).
struct Givens {
  double c;
  double s;
  double r;
};
Givens givens(double f, double g) noexcept;

/// Dense block stored column by column. Used for the tracked rows of the
/// singular-vector matrices: a rotation of columns a and b is one kernel call
/// over two contiguous columns.
class ColumnBlock {
 public:
  ColumnBlock() = default;
  ColumnBlock(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

  /// Leading `rows` rows of the cols x cols identity.
  static ColumnBlock identity_rows(std::size_t rows, std::size_t cols);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  double* col(std::size_t c) noexcept { return data_.data() + c * rows_; }
  const double* col(std::size_t c) const noexcept { return data_.data() + c * rows_; }
  double& operator()(std::size_t r, std::size_t c) noexcept { return data_[c * rows_ + r]; }
  double operator()(std::size_t r, std::size_t c) const noexcept { return data_[c * rows_ + r]; }

  /// (col a, col b) <- (c a + s b, c b - s a)
  void rotate(std::size_t a, std::size_t b, double c, double s) noexcept {
    if (rows_ != 0) kernels::rot(col(a), col(b), rows_, c, s);
  }
  void negate(std::size_t c) noexcept { kernels::scal(-1.0, col(c), rows_); }
  void swap_cols(std::size_t a, std::size_t b) noexcept;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Singular values of the upper bidiagonal matrix with diagonal d and
/// superdiagonal e (implicit-shift Golub-Kahan QR with zero-diagonal
/// deflation). On return d holds the singular values in descending order
/// and e is zeroed.
///
/// With B = Q B_d P^T on entry, `left` holds rows of Q and `right` rows of
/// P; on return they hold the same rows of U and V for B = U D V^T. Either
/// may be null. Throws NumericError on non-finite input or if the sweep
/// count cap is reached.
void bidiagonal_svd(std::vector<double>& d, std::vector<double>& e, ColumnBlock* left, ColumnBlock* right);

/// Orthogonal reduction of the compact block of H (block_rows x block_cols,
/// lower bandwidth k) to upper bidiagonal form B = Q B_d P^T: Givens QR to
/// an upper band, then bulge chasing. Rotations are accumulated into `left`
/// (rows of Q, block_rows columns) and `right` (rows of P, block_cols
/// columns) when given; both should start as identity rows.
struct Bidiagonal {
  std::vector<double> d;
  std::vector<double> e;
};
Bidiagonal band_bidiagonalize(const BandedSample& h, ColumnBlock* left, ColumnBlock* right);

}  // namespace spw::detail
