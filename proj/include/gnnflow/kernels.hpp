#pragma once

// Data-parallel inner loops. Every kernel has a scalar reference version and,
// where the target supports it, an AVX2 (x86-64) or NEON (aarch64) version.
// The active table is picked once at startup from the CPU's capabilities.
// All variants produce bit-identical results: the float kernels are purely
// elementwise and the integer kernels are exact.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

namespace gnnflow::kernels {

enum class Isa { scalar, avx2, neon };

std::string_view isa_name(Isa isa);

struct KernelTable {
  Isa isa;

  /// |a ∩ b| for two strictly increasing lists.
  std::size_t (*intersect_count)(std::span<const std::uint32_t> a,
                                 std::span<const std::uint32_t> b);

  /// out[k] = max(values[k*group .. min((k+1)*group, n))). out.size() == ceil(n/group).
  void (*group_max)(std::span<const std::uint32_t> values, std::size_t group,
                    std::span<std::uint32_t> out);

  /// Squared-loss split score for every prefix of a sorted node:
  /// out[i] = L^2/(i+1) + (total-L)^2/(n-i-1) with L = prefix[i], n = prefix.size().
  /// The last position (empty right side) is written as 0.
  void (*split_gains)(std::span<const double> prefix, double total,
                      std::span<double> out);

  /// y[i] += a * x[i] (multiply then add, no fusion).
  void (*axpy)(double a, std::span<const double> x, std::span<double> y);

  /// out[i] = a[i] - b[i].
  void (*subtract)(std::span<const double> a, std::span<const double> b,
                   std::span<double> out);
};

/// Table for the best ISA this CPU supports (or the one forced via select()).
const KernelTable& active();

/// Reference implementations.
const KernelTable& scalar_table();

/// True when `isa` is compiled in and supported by the running CPU.
bool supported(Isa isa);

/// Forces the active table; returns false (and leaves it unchanged) if unsupported.
bool select(Isa isa);

/// Restores the automatic choice.
void reset();

namespace scalar {
std::size_t intersect_count(std::span<const std::uint32_t> a,
                            std::span<const std::uint32_t> b);
void group_max(std::span<const std::uint32_t> values, std::size_t group,
               std::span<std::uint32_t> out);
void split_gains(std::span<const double> prefix, double total, std::span<double> out);
void axpy(double a, std::span<const double> x, std::span<double> y);
void subtract(std::span<const double> a, std::span<const double> b, std::span<double> out);
}  // namespace scalar

}  // namespace gnnflow::kernels
