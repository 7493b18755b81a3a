// NEON is part of the aarch64 baseline, so no runtime check is needed.

#include <arm_neon.h>

#include <algorithm>

#include "gnnflow/kernels.hpp"

namespace gnnflow::kernels::neon {

// 4x4 block compare; see the AVX2 variant for the advance rule.
std::size_t intersect_count(std::span<const std::uint32_t> a,
                            std::span<const std::uint32_t> b) {
  const std::size_t full_a = a.size() / 4 * 4;
  const std::size_t full_b = b.size() / 4 * 4;
  std::size_t i = 0, j = 0, count = 0;
  while (i < full_a && j < full_b) {
    const uint32x4_t va = vld1q_u32(a.data() + i);
    const uint32x4_t vb = vld1q_u32(b.data() + j);
    const std::uint32_t a_last = a[i + 3];
    const std::uint32_t b_last = b[j + 3];

    uint32x4_t hits = vceqq_u32(va, vb);
    hits = vorrq_u32(hits, vceqq_u32(va, vextq_u32(vb, vb, 1)));
    hits = vorrq_u32(hits, vceqq_u32(va, vextq_u32(vb, vb, 2)));
    hits = vorrq_u32(hits, vceqq_u32(va, vextq_u32(vb, vb, 3)));
    count += vaddvq_u32(vshrq_n_u32(hits, 31));

    i += (a_last <= b_last) ? 4 : 0;
    j += (a_last >= b_last) ? 4 : 0;
  }
  return count + scalar::intersect_count(a.subspan(i), b.subspan(j));
}

void group_max(std::span<const std::uint32_t> values, std::size_t group,
               std::span<std::uint32_t> out) {
  if (group < 8) {
    scalar::group_max(values, group, out);
    return;
  }
  const std::size_t n = values.size();
  std::size_t k = 0;
  for (std::size_t lo = 0; lo < n; lo += group, ++k) {
    const std::size_t hi = std::min(n, lo + group);
    std::size_t i = lo;
    std::uint32_t m = 0;
    if (hi - lo >= 4) {
      uint32x4_t acc = vld1q_u32(values.data() + i);
      for (i += 4; i + 4 <= hi; i += 4) acc = vmaxq_u32(acc, vld1q_u32(values.data() + i));
      m = vmaxvq_u32(acc);
    }
    for (; i < hi; ++i) m = std::max(m, values[i]);
    out[k] = m;
  }
}

void split_gains(std::span<const double> prefix, double total, std::span<double> out) {
  const std::size_t n = prefix.size();
  if (n == 0) return;
  const std::size_t positions = n - 1;
  const float64x2_t vtotal = vdupq_n_f64(total);
  const float64x2_t vn = vdupq_n_f64(static_cast<double>(n));
  const float64x2_t step = vdupq_n_f64(2.0);
  const double init[2] = {1.0, 2.0};
  float64x2_t left_count = vld1q_f64(init);
  std::size_t i = 0;
  for (; i + 2 <= positions; i += 2) {
    const float64x2_t left = vld1q_f64(prefix.data() + i);
    const float64x2_t right = vsubq_f64(vtotal, left);
    const float64x2_t right_count = vsubq_f64(vn, left_count);
    const float64x2_t left_score = vdivq_f64(vmulq_f64(left, left), left_count);
    const float64x2_t right_score = vdivq_f64(vmulq_f64(right, right), right_count);
    vst1q_f64(out.data() + i, vaddq_f64(left_score, right_score));
    left_count = vaddq_f64(left_count, step);
  }
  for (; i < positions; ++i) {
    const double left = prefix[i];
    const double right = total - left;
    const double left_score = (left * left) / static_cast<double>(i + 1);
    const double right_score = (right * right) / static_cast<double>(n - i - 1);
    out[i] = left_score + right_score;
  }
  out[n - 1] = 0.0;
}

void axpy(double a, std::span<const double> x, std::span<double> y) {
  const std::size_t n = x.size();
  const float64x2_t va = vdupq_n_f64(a);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t scaled = vmulq_f64(va, vld1q_f64(x.data() + i));
    vst1q_f64(y.data() + i, vaddq_f64(vld1q_f64(y.data() + i), scaled));
  }
  for (; i < n; ++i) {
    const double scaled = a * x[i];
    y[i] = y[i] + scaled;
  }
}

void subtract(std::span<const double> a, std::span<const double> b, std::span<double> out) {
  const std::size_t n = a.size();
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    vst1q_f64(out.data() + i, vsubq_f64(vld1q_f64(a.data() + i), vld1q_f64(b.data() + i)));
  }
  for (; i < n; ++i) out[i] = a[i] - b[i];
}

}  // namespace gnnflow::kernels::neon
