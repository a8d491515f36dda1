#include "spw/detail/bidiag.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <string>

#include "spw/error.hpp"
#include "spw/sampler.hpp"

namespace spw::detail {

Givens givens(double f, double g) noexcept {
  if (g == 0.0) return {1.0, 0.0, f};
  if (f == 0.0) return {0.0, 1.0, g};
  // std::hypot is slow; scale only when squaring could over- or underflow.
  const double big = std::max(std::abs(f), std::abs(g));
  const double r = (big > 1e-150 && big < 1e150) ? std::sqrt(f * f + g * g) : std::hypot(f, g);
  const double inv = 1.0 / r;
  return {f * inv, g * inv, r};
}

ColumnBlock ColumnBlock::identity_rows(std::size_t rows, std::size_t cols) {
  ColumnBlock b(rows, cols);
  for (std::size_t i = 0; i < std::min(rows, cols); ++i) b(i, i) = 1.0;
  return b;
}

void ColumnBlock::swap_cols(std::size_t a, std::size_t b) noexcept {
  std::swap_ranges(col(a), col(a) + rows_, col(b));
}

// --- bidiagonal QR -------------------------------------------------------------

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

// Upper-bidiagonal block lo..hi has d[i] == 0 for some i < hi: rotate row i
// against the rows below until its superdiagonal entry is gone.
void chase_zero_diagonal_row(std::vector<double>& d, std::vector<double>& e, std::size_t i, std::size_t hi,
                             ColumnBlock* left) {
  double f = e[i];
  e[i] = 0.0;
  for (std::size_t j = i + 1; j <= hi && f != 0.0; ++j) {
    const Givens g = givens(d[j], f);
    d[j] = g.r;
    if (left) left->rotate(j, i, g.c, g.s);
    if (j < hi) {
      f = -g.s * e[j];
      e[j] = g.c * e[j];
    }
  }
}

// d[hi] == 0: rotate column hi against the columns to its left.
void chase_zero_diagonal_col(std::vector<double>& d, std::vector<double>& e, std::size_t lo, std::size_t hi,
                             ColumnBlock* right) {
  double f = e[hi - 1];
  e[hi - 1] = 0.0;
  for (std::size_t j = hi; j-- > lo && f != 0.0;) {
    const Givens g = givens(d[j], f);
    d[j] = g.r;
    if (right) right->rotate(j, hi, g.c, g.s);
    if (j > lo) {
      f = -g.s * e[j - 1];
      e[j - 1] = g.c * e[j - 1];
    }
  }
}

double wilkinson_shift(const std::vector<double>& d, const std::vector<double>& e, std::size_t lo, std::size_t hi) {
  const double a = d[hi - 1] * d[hi - 1] + (hi - 1 > lo ? e[hi - 2] * e[hi - 2] : 0.0);
  const double b = d[hi - 1] * e[hi - 1];
  const double c = d[hi] * d[hi] + e[hi - 1] * e[hi - 1];
  const double delta = 0.5 * (a - c);
  if (b == 0.0) return c;
  const double denom = delta + std::copysign(std::hypot(delta, b), delta);
  return c - b * b / denom;
}

void qr_sweep(std::vector<double>& d, std::vector<double>& e, std::size_t lo, std::size_t hi, double shift,
              ColumnBlock* left, ColumnBlock* right) {
  double y = d[lo] * d[lo] - shift;
  double z = d[lo] * e[lo];
  for (std::size_t k = lo; k < hi; ++k) {
    // Right rotation on columns (k, k+1).
    Givens g = givens(y, z);
    if (k > lo) e[k - 1] = g.r;
    const double dk = g.c * d[k] + g.s * e[k];
    e[k] = g.c * e[k] - g.s * d[k];
    const double below = g.s * d[k + 1];
    d[k + 1] = g.c * d[k + 1];
    d[k] = dk;
    if (right) right->rotate(k, k + 1, g.c, g.s);

    // Left rotation on rows (k, k+1) removes the bulge at (k+1, k).
    g = givens(d[k], below);
    d[k] = g.r;
    const double ek = g.c * e[k] + g.s * d[k + 1];
    d[k + 1] = g.c * d[k + 1] - g.s * e[k];
    e[k] = ek;
    if (left) left->rotate(k, k + 1, g.c, g.s);
    if (k + 1 < hi) {
      y = e[k];
      z = g.s * e[k + 1];
      e[k + 1] = g.c * e[k + 1];
    }
  }
}

}  // namespace

void bidiagonal_svd(std::vector<double>& d, std::vector<double>& e, ColumnBlock* left, ColumnBlock* right) {
  const std::size_t n = d.size();
  if (n == 0) return;
  if (e.size() + 1 != n) throw DomainError("bidiagonal: superdiagonal must have n - 1 entries");
  double norm = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double row = std::abs(d[i]) + (i + 1 < n ? std::abs(e[i]) : 0.0);
    if (!std::isfinite(row)) throw NumericError("bidiagonal: non-finite entry");
    norm = std::max(norm, row);
  }
  const double dtiny = kEps * norm;

  const std::size_t max_sweeps = 100 * n + 100;
  std::size_t sweeps = 0;
  std::size_t hi = n - 1;
  while (hi > 0) {
    for (std::size_t i = 0; i <= hi; ++i) {
      if (std::abs(d[i]) <= dtiny) d[i] = 0.0;
      if (i < hi && std::abs(e[i]) <= kEps * (std::abs(d[i]) + std::abs(d[i + 1]))) e[i] = 0.0;
    }
    if (e[hi - 1] == 0.0) {
      --hi;
      continue;
    }
    std::size_t lo = hi - 1;
    while (lo > 0 && e[lo - 1] != 0.0) --lo;

    bool chased = false;
    for (std::size_t i = lo; i <= hi; ++i) {
      if (d[i] != 0.0) continue;
      if (i < hi) {
        chase_zero_diagonal_row(d, e, i, hi, left);
      } else {
        chase_zero_diagonal_col(d, e, lo, hi, right);
      }
      chased = true;
      break;
    }
    if (chased) continue;

    if (++sweeps > max_sweeps) {
      throw NumericError("bidiagonal QR did not converge after " + std::to_string(max_sweeps) + " sweeps");
    }
    double shift = wilkinson_shift(d, e, lo, hi);
    // A shift that swamps the leading entry destroys relative accuracy of
    // the small values; fall back to a zero shift.
    if (shift >= 0.0 && shift <= kEps * d[lo] * d[lo]) shift = 0.0;
    if (!(shift >= 0.0)) shift = 0.0;
    qr_sweep(d, e, lo, hi, shift, left, right);
  }

  for (std::size_t i = 0; i < n; ++i) {
    if (d[i] < 0.0) {
      d[i] = -d[i];
      if (right) right->negate(i);
    }
  }
  for (std::size_t i = 0; i + 1 < n; ++i) {
    std::size_t best = i;
    for (std::size_t j = i + 1; j < n; ++j) {
      if (d[j] > d[best]) best = j;
    }
    if (best != i) {
      std::swap(d[i], d[best]);
      if (left) left->swap_cols(i, best);
      if (right) right->swap_cols(i, best);
    }
  }
}

// --- band reduction ------------------------------------------------------------

namespace {

// Working copy of the compact block with room for the fill-in of both
// phases: offsets (col - row) in [-k, k + 1].
class BandWork {
 public:
  BandWork(std::size_t rows, std::size_t cols, std::size_t k)
      : rows_(rows), cols_(cols), lo_(-static_cast<std::ptrdiff_t>(k)), width_(2 * k + 2),
        data_(rows * width_, 0.0) {}

  bool inside(std::size_t r, std::size_t c) const noexcept {
    const std::ptrdiff_t off = static_cast<std::ptrdiff_t>(c) - static_cast<std::ptrdiff_t>(r);
    return r < rows_ && c < cols_ && off >= lo_ && off < lo_ + static_cast<std::ptrdiff_t>(width_);
  }
  double get(std::size_t r, std::size_t c) const noexcept { return inside(r, c) ? data_[slot(r, c)] : 0.0; }
  void set(std::size_t r, std::size_t c, double v) noexcept {
    if (inside(r, c)) {
      data_[slot(r, c)] = v;
    } else {
      assert(v == 0.0 && "band reduction fill escaped the workspace");
    }
  }

  // (row a, row b) <- (c a + s b, c b - s a) over columns [c0, c1].
  void rotate_rows(std::size_t a, std::size_t b, std::size_t c0, std::size_t c1, double c, double s) noexcept {
    for (std::size_t col = c0; col <= c1 && col < cols_; ++col) {
      const double xa = get(a, col), xb = get(b, col);
      set(a, col, c * xa + s * xb);
      set(b, col, c * xb - s * xa);
    }
  }
  // (col a, col b) <- (c a + s b, c b - s a) over rows [r0, r1].
  void rotate_cols(std::size_t a, std::size_t b, std::size_t r0, std::size_t r1, double c, double s) noexcept {
    for (std::size_t row = r0; row <= r1 && row < rows_; ++row) {
      const double xa = get(row, a), xb = get(row, b);
      set(row, a, c * xa + s * xb);
      set(row, b, c * xb - s * xa);
    }
  }

 private:
  std::size_t slot(std::size_t r, std::size_t c) const noexcept {
    return r * width_ + static_cast<std::size_t>(static_cast<std::ptrdiff_t>(c) - static_cast<std::ptrdiff_t>(r) - lo_);
  }

  std::size_t rows_;
  std::size_t cols_;
  std::ptrdiff_t lo_;
  std::size_t width_;
  std::vector<double> data_;
};

}  // namespace

Bidiagonal band_bidiagonalize(const BandedSample& h, ColumnBlock* left, ColumnBlock* right) {
  const std::size_t p = h.block_rows(), q = h.block_cols(), k = h.k();
  BandWork w(p, q, k);
  for (std::size_t t = 0; t <= k; ++t) {
    const auto band = h.band(t);
    for (std::size_t j = 0; j < band.size(); ++j) {
      if (!std::isfinite(band[j])) throw NumericError("non-finite entry in banded sample");
      w.set(j + t, j, band[j]);
    }
  }

  // Phase 1: Givens QR, lower band -> upper band of width k.
  for (std::size_t c = 0; c < q; ++c) {
    for (std::size_t r = std::min(c + k, p - 1); r > c; --r) {
      const double below = w.get(r, c);
      if (below == 0.0) continue;
      const Givens g = givens(w.get(r - 1, c), below);
      w.rotate_rows(r - 1, r, c, std::min(q - 1, r + k), g.c, g.s);
      w.set(r, c, 0.0);
      if (left) left->rotate(r - 1, r, g.c, g.s);
    }
  }

  // Phase 2: chase each superfluous superdiagonal entry off the bottom.
  for (std::size_t i = 0; i + 2 < q; ++i) {
    for (std::size_t j = std::min(i + k, q - 1); j >= i + 2; --j) {
      if (w.get(i, j) == 0.0) continue;
      Givens g = givens(w.get(i, j - 1), w.get(i, j));
      w.rotate_cols(j - 1, j, i, j, g.c, g.s);
      w.set(i, j, 0.0);
      if (right) right->rotate(j - 1, j, g.c, g.s);

      std::size_t br = j;  // bulge at (br, br - 1)
      for (;;) {
        const double bulge = w.get(br, br - 1);
        if (bulge == 0.0) break;
        g = givens(w.get(br - 1, br - 1), bulge);
        w.rotate_rows(br - 1, br, br - 1, std::min(q - 1, br + k), g.c, g.s);
        w.set(br, br - 1, 0.0);
        if (left) left->rotate(br - 1, br, g.c, g.s);

        const std::size_t cc = br + k;  // bulge at (br - 1, cc)
        if (cc > q - 1) break;
        const double over = w.get(br - 1, cc);
        if (over == 0.0) break;
        g = givens(w.get(br - 1, cc - 1), over);
        w.rotate_cols(cc - 1, cc, br - 1, cc, g.c, g.s);
        w.set(br - 1, cc, 0.0);
        if (right) right->rotate(cc - 1, cc, g.c, g.s);
        br = cc;
      }
    }
  }

  Bidiagonal out;
  out.d.resize(q);
  out.e.resize(q > 0 ? q - 1 : 0);
  for (std::size_t i = 0; i < q; ++i) {
    out.d[i] = w.get(i, i);
    if (i + 1 < q) out.e[i] = w.get(i, i + 1);
  }
  return out;
}

}  // namespace spw::detail
