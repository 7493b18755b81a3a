#include <atomic>

#include "gnnflow/kernels.hpp"

namespace gnnflow::kernels {

#if defined(GNNFLOW_HAVE_AVX2)
namespace avx2 {
std::size_t intersect_count(std::span<const std::uint32_t>, std::span<const std::uint32_t>);
void group_max(std::span<const std::uint32_t>, std::size_t, std::span<std::uint32_t>);
void split_gains(std::span<const double>, double, std::span<double>);
void axpy(double, std::span<const double>, std::span<double>);
void subtract(std::span<const double>, std::span<const double>, std::span<double>);
}  // namespace avx2
#endif

#if defined(GNNFLOW_HAVE_NEON)
namespace neon {
std::size_t intersect_count(std::span<const std::uint32_t>, std::span<const std::uint32_t>);
void group_max(std::span<const std::uint32_t>, std::size_t, std::span<std::uint32_t>);
void split_gains(std::span<const double>, double, std::span<double>);
void axpy(double, std::span<const double>, std::span<double>);
void subtract(std::span<const double>, std::span<const double>, std::span<double>);
}  // namespace neon
#endif

namespace {

constexpr KernelTable kScalar{Isa::scalar,        scalar::intersect_count,
                              scalar::group_max,  scalar::split_gains,
                              scalar::axpy,       scalar::subtract};

#if defined(GNNFLOW_HAVE_AVX2)
constexpr KernelTable kAvx2{Isa::avx2,        avx2::intersect_count, avx2::group_max,
                            avx2::split_gains, avx2::axpy,            avx2::subtract};
#endif

#if defined(GNNFLOW_HAVE_NEON)
constexpr KernelTable kNeon{Isa::neon,        neon::intersect_count, neon::group_max,
                            neon::split_gains, neon::axpy,            neon::subtract};
#endif

const KernelTable* table_for(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return &kScalar;
    case Isa::avx2:
#if defined(GNNFLOW_HAVE_AVX2)
      return &kAvx2;
#else
      return nullptr;
#endif
    case Isa::neon:
#if defined(GNNFLOW_HAVE_NEON)
      return &kNeon;
#else
      return nullptr;
#endif
  }
  return nullptr;
}

const KernelTable* best_table() {
#if defined(GNNFLOW_HAVE_AVX2)
  if (supported(Isa::avx2)) return &kAvx2;
#endif
#if defined(GNNFLOW_HAVE_NEON)
  return &kNeon;
#endif
  return &kScalar;
}

std::atomic<const KernelTable*>& slot() {
  static std::atomic<const KernelTable*> current{best_table()};
  return current;
}

}  // namespace

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return "scalar";
    case Isa::avx2:
      return "avx2";
    case Isa::neon:
      return "neon";
  }
  return "unknown";
}

bool supported(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return true;
    case Isa::avx2:
#if defined(GNNFLOW_HAVE_AVX2)
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("popcnt");
#else
      return false;
#endif
    case Isa::neon:
#if defined(GNNFLOW_HAVE_NEON)
      return true;
#else
      return false;
#endif
  }
  return false;
}

const KernelTable& active() { return *slot().load(std::memory_order_acquire); }

const KernelTable& scalar_table() { return kScalar; }

bool select(Isa isa) {
  const KernelTable* t = table_for(isa);
  if (t == nullptr || !supported(isa)) return false;
  slot().store(t, std::memory_order_release);
  return true;
}

void reset() { slot().store(best_table(), std::memory_order_release); }

}  // namespace gnnflow::kernels
