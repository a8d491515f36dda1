#pragma once

// Vector kernels used by the banded matvec, the Lanczos solver and the
// rotation sweeps of the bidiagonal SVD. Every kernel has a scalar
// reference implementation; an AVX2/FMA variant is picked at runtime when
// the CPU supports it. The two are tested for equivalence.

#include <cstddef>
#include <string_view>

namespace spw::kernels {

enum class Isa { scalar, avx2 };

struct KernelTable {
  Isa isa;
  std::string_view name;
  /// sum_i x[i] * y[i]
  double (*dot)(const double* x, const double* y, std::size_t n);
  /// y[i] += a * x[i]
  void (*axpy)(double a, const double* x, double* y, std::size_t n);
  /// x[i] *= a
  void (*scal)(double a, double* x, std::size_t n);
  /// out[i] += a[i] * b[i]
  void (*mul_add)(const double* a, const double* b, double* out, std::size_t n);
  /// (x, y) <- (c x + s y, c y - s x), the BLAS drot convention
  void (*rot)(double* x, double* y, std::size_t n, double c, double s);
};

/// Table for a specific instruction set, or nullptr when the variant was not
/// compiled in or the CPU cannot run it.
const KernelTable* table_for(Isa isa) noexcept;

/// Best table for this CPU. Resolved once.
const KernelTable& active() noexcept;

/// Force a variant (tests, benchmarks). Returns false if unavailable.
bool select(Isa isa) noexcept;

namespace scalar {
double dot(const double* x, const double* y, std::size_t n);
void axpy(double a, const double* x, double* y, std::size_t n);
void scal(double a, double* x, std::size_t n);
void mul_add(const double* a, const double* b, double* out, std::size_t n);
void rot(double* x, double* y, std::size_t n, double c, double s);
}  // namespace scalar

namespace avx2 {
bool compiled() noexcept;
double dot(const double* x, const double* y, std::size_t n);
void axpy(double a, const double* x, double* y, std::size_t n);
void scal(double a, double* x, std::size_t n);
void mul_add(const double* a, const double* b, double* out, std::size_t n);
void rot(double* x, double* y, std::size_t n, double c, double s);
}  // namespace avx2

// Convenience wrappers over the active table.
inline double dot(const double* x, const double* y, std::size_t n) { return active().dot(x, y, n); }
inline void axpy(double a, const double* x, double* y, std::size_t n) { active().axpy(a, x, y, n); }
inline void scal(double a, double* x, std::size_t n) { active().scal(a, x, n); }
inline void mul_add(const double* a, const double* b, double* out, std::size_t n) {
  active().mul_add(a, b, out, n);
}
inline void rot(double* x, double* y, std::size_t n, double c, double s) { active().rot(x, y, n, c, s); }

}  // namespace spw::kernels
