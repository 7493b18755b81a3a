#include "gnnflow/kernels.hpp"

#include <algorithm>

namespace gnnflow::kernels::scalar {

std::size_t intersect_count(std::span<const std::uint32_t> a,
                            std::span<const std::uint32_t> b) {
  std::size_t i = 0, j = 0, count = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] < b[j]) {
      ++i;
    } else if (b[j] < a[i]) {
      ++j;
    } else {
      ++count;
      ++i;
      ++j;
    }
  }
  return count;
}

void group_max(std::span<const std::uint32_t> values, std::size_t group,
               std::span<std::uint32_t> out) {
  const std::size_t n = values.size();
  std::size_t k = 0;
  for (std::size_t lo = 0; lo < n; lo += group, ++k) {
    const std::size_t hi = std::min(n, lo + group);
    std::uint32_t m = values[lo];
    for (std::size_t i = lo + 1; i < hi; ++i) m = std::max(m, values[i]);
    out[k] = m;
  }
}

void split_gains(std::span<const double> prefix, double total, std::span<double> out) {
  const std::size_t n = prefix.size();
  if (n == 0) return;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double left = prefix[i];
    const double right = total - left;
    const double left_score = (left * left) / static_cast<double>(i + 1);
    const double right_score = (right * right) / static_cast<double>(n - i - 1);
    out[i] = left_score + right_score;
  }
  out[n - 1] = 0.0;
}

void axpy(double a, std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double scaled = a * x[i];
    y[i] = y[i] + scaled;
  }
}

void subtract(std::span<const double> a, std::span<const double> b, std::span<double> out) {
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
}

}  // namespace gnnflow::kernels::scalar
