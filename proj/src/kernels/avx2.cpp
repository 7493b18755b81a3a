// Compiled with -mavx2; only reached after a runtime CPU check.

#include <immintrin.h>

#include <algorithm>

#include "gnnflow/kernels.hpp"

namespace gnnflow::kernels::avx2 {

namespace {

inline __m256i rotation(int k) {
  return _mm256_setr_epi32(k & 7, (k + 1) & 7, (k + 2) & 7, (k + 3) & 7,
                           (k + 4) & 7, (k + 5) & 7, (k + 6) & 7, (k + 7) & 7);
}

inline std::uint32_t hmax_epu32(__m256i v) {
  __m128i m = _mm_max_epu32(_mm256_castsi256_si128(v), _mm256_extracti128_si256(v, 1));
  m = _mm_max_epu32(m, _mm_shuffle_epi32(m, _MM_SHUFFLE(1, 0, 3, 2)));
  m = _mm_max_epu32(m, _mm_shuffle_epi32(m, _MM_SHUFFLE(2, 3, 0, 1)));
  return static_cast<std::uint32_t>(_mm_cvtsi128_si32(m));
}

}  // namespace

// Block-wise all-pairs compare of 8x8 windows; the block whose last element is
// smaller advances (both on equality). Tails fall back to the scalar merge.
std::size_t intersect_count(std::span<const std::uint32_t> a,
                            std::span<const std::uint32_t> b) {
  const std::size_t full_a = a.size() / 8 * 8;
  const std::size_t full_b = b.size() / 8 * 8;
  std::size_t i = 0, j = 0, count = 0;
  if (full_a > 0 && full_b > 0) {
    const __m256i r1 = rotation(1), r2 = rotation(2), r3 = rotation(3), r4 = rotation(4),
                  r5 = rotation(5), r6 = rotation(6), r7 = rotation(7);
    while (i < full_a && j < full_b) {
      const __m256i va = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(a.data() + i));
      const __m256i vb = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(b.data() + j));
      const std::uint32_t a_last = a[i + 7];
      const std::uint32_t b_last = b[j + 7];

      __m256i hits = _mm256_cmpeq_epi32(va, vb);
      hits = _mm256_or_si256(hits, _mm256_cmpeq_epi32(va, _mm256_permutevar8x32_epi32(vb, r1)));
      hits = _mm256_or_si256(hits, _mm256_cmpeq_epi32(va, _mm256_permutevar8x32_epi32(vb, r2)));
      hits = _mm256_or_si256(hits, _mm256_cmpeq_epi32(va, _mm256_permutevar8x32_epi32(vb, r3)));
      hits = _mm256_or_si256(hits, _mm256_cmpeq_epi32(va, _mm256_permutevar8x32_epi32(vb, r4)));
      hits = _mm256_or_si256(hits, _mm256_cmpeq_epi32(va, _mm256_permutevar8x32_epi32(vb, r5)));
      hits = _mm256_or_si256(hits, _mm256_cmpeq_epi32(va, _mm256_permutevar8x32_epi32(vb, r6)));
      hits = _mm256_or_si256(hits, _mm256_cmpeq_epi32(va, _mm256_permutevar8x32_epi32(vb, r7)));
      const int mask = _mm256_movemask_ps(_mm256_castsi256_ps(hits));
      count += static_cast<std::size_t>(_mm_popcnt_u32(static_cast<unsigned>(mask)));

      i += (a_last <= b_last) ? 8 : 0;
      j += (a_last >= b_last) ? 8 : 0;
    }
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
    if (hi - lo >= 8) {
      __m256i acc = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(values.data() + i));
      for (i += 8; i + 8 <= hi; i += 8) {
        acc = _mm256_max_epu32(
            acc, _mm256_loadu_si256(reinterpret_cast<const __m256i*>(values.data() + i)));
      }
      m = hmax_epu32(acc);
    }
    for (; i < hi; ++i) m = std::max(m, values[i]);
    out[k] = m;
  }
}

void split_gains(std::span<const double> prefix, double total, std::span<double> out) {
  const std::size_t n = prefix.size();
  if (n == 0) return;
  const std::size_t positions = n - 1;
  const __m256d vtotal = _mm256_set1_pd(total);
  const __m256d vn = _mm256_set1_pd(static_cast<double>(n));
  const __m256d step = _mm256_set1_pd(4.0);
  __m256d left_count = _mm256_setr_pd(1.0, 2.0, 3.0, 4.0);
  std::size_t i = 0;
  for (; i + 4 <= positions; i += 4) {
    const __m256d left = _mm256_loadu_pd(prefix.data() + i);
    const __m256d right = _mm256_sub_pd(vtotal, left);
    const __m256d right_count = _mm256_sub_pd(vn, left_count);
    const __m256d left_score = _mm256_div_pd(_mm256_mul_pd(left, left), left_count);
    const __m256d right_score = _mm256_div_pd(_mm256_mul_pd(right, right), right_count);
    _mm256_storeu_pd(out.data() + i, _mm256_add_pd(left_score, right_score));
    left_count = _mm256_add_pd(left_count, step);
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
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d scaled = _mm256_mul_pd(va, _mm256_loadu_pd(x.data() + i));
    _mm256_storeu_pd(y.data() + i, _mm256_add_pd(_mm256_loadu_pd(y.data() + i), scaled));
  }
  for (; i < n; ++i) {
    const double scaled = a * x[i];
    y[i] = y[i] + scaled;
  }
}

void subtract(std::span<const double> a, std::span<const double> b, std::span<double> out) {
  const std::size_t n = a.size();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(out.data() + i,
                     _mm256_sub_pd(_mm256_loadu_pd(a.data() + i), _mm256_loadu_pd(b.data() + i)));
  }
  for (; i < n; ++i) out[i] = a[i] - b[i];
}

}  // namespace gnnflow::kernels::avx2
