#include <atomic>

#include "spw/kernels.hpp"

namespace spw::kernels {
namespace {

constexpr KernelTable kScalar{Isa::scalar, "scalar", &scalar::dot, &scalar::axpy,
                              &scalar::scal, &scalar::mul_add, &scalar::rot};
constexpr KernelTable kAvx2{Isa::avx2, "avx2", &avx2::dot, &avx2::axpy,
                            &avx2::scal, &avx2::mul_add, &avx2::rot};

bool cpu_has_avx2() noexcept {
#if (defined(__x86_64__) || defined(__i386__)) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable* detect() noexcept {
  if (avx2::compiled() && cpu_has_avx2()) return &kAvx2;
  return &kScalar;
}

std::atomic<const KernelTable*>& current() noexcept {
  static std::atomic<const KernelTable*> table{detect()};
  return table;
}

}  // namespace

const KernelTable* table_for(Isa isa) noexcept {
  switch (isa) {
    case Isa::scalar:
      return &kScalar;
    case Isa::avx2:
      return (avx2::compiled() && cpu_has_avx2()) ? &kAvx2 : nullptr;
  }
  return nullptr;
}

const KernelTable& active() noexcept { return *current().load(std::memory_order_relaxed); }

bool select(Isa isa) noexcept {
  const KernelTable* t = table_for(isa);
  if (t == nullptr) return false;
  current().store(t, std::memory_order_relaxed);
  return true;
}

}  // namespace spw::kernels
