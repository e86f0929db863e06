// Copyright 2026-present the nigmrf authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "nigmrf/kernels/kernels.hpp"


#if defined(__AVX2__) && defined(__FMA__)
#include <immintrin.h>
#define NIGMRF_BUILD_AVX2 1
#endif

namespace nigmrf::kernels {

#ifdef NIGMRF_BUILD_AVX2

namespace {

constexpr int kMaxChannels = 16;

// Four voxels per lane group; the tail falls back to the scalar reference.
void quadform_avx2(const PlanarView& x, std::size_t begin, std::size_t end, const double* L,
                   const double* loc, const double* g, double* qf, double* cross) {
  const int d = x.d;
  __m256d r[kMaxChannels];
  std::size_t i = begin;
  for (; i + 4 <= end; i += 4) {
    for (int c = 0; c < d; ++c)
      r[c] = _mm256_sub_pd(_mm256_loadu_pd(x.channel(c) + i), _mm256_set1_pd(loc[c]));
    __m256d q = _mm256_setzero_pd();
    __m256d cr = _mm256_setzero_pd();
    for (int j = 0; j < d; ++j) {
      __m256d y = _mm256_setzero_pd();
      for (int m = j; m < d; ++m) y = _mm256_fmadd_pd(_mm256_set1_pd(L[m + j * d]), r[m], y);
      q = _mm256_fmadd_pd(y, y, q);
      if (g) cr = _mm256_fmadd_pd(y, _mm256_set1_pd(g[j]), cr);
    }
    _mm256_storeu_pd(qf + (i - begin), q);
    if (g) _mm256_storeu_pd(cross + (i - begin), cr);
  }
  if (i < end) scalar_kernels().quadform(x, i, end, L, loc, g, qf + (i - begin), g ? cross + (i - begin) : nullptr);
}

double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

void moments_avx2(const PlanarView& x, std::size_t begin, std::size_t end, const double* w,
                  const double* center, double* s0, double* s1, double* s2) {
  const int d = x.d;
  __m256d r[kMaxChannels];
  __m256d acc1[kMaxChannels];
  __m256d acc2[kMaxChannels * (kMaxChannels + 1) / 2];
  __m256d acc0 = _mm256_setzero_pd();
  for (int a = 0; a < d; ++a) acc1[a] = _mm256_setzero_pd();
  const int tri = d * (d + 1) / 2;
  for (int t = 0; t < tri; ++t) acc2[t] = _mm256_setzero_pd();

  std::size_t i = begin;
  for (; i + 4 <= end; i += 4) {
    const __m256d wi = _mm256_loadu_pd(w + i);
    for (int c = 0; c < d; ++c)
      r[c] = _mm256_sub_pd(_mm256_loadu_pd(x.channel(c) + i), _mm256_set1_pd(center[c]));
    acc0 = _mm256_add_pd(acc0, wi);
    int t = 0;
    for (int a = 0; a < d; ++a) {
      const __m256d wr = _mm256_mul_pd(wi, r[a]);
      acc1[a] = _mm256_add_pd(acc1[a], wr);
      for (int b = a; b < d; ++b, ++t) acc2[t] = _mm256_fmadd_pd(wr, r[b], acc2[t]);
    }
  }
  *s0 += hsum(acc0);
  int t = 0;
  for (int a = 0; a < d; ++a) {
    s1[a] += hsum(acc1[a]);
    for (int b = a; b < d; ++b, ++t) s2[a + b * d] += hsum(acc2[t]);
  }
  // Tail (and the lower-triangle mirror) through the reference path.
  scalar_kernels().weighted_moments(x, i, end, w, center, s0, s1, s2);
}

}  // namespace

const KernelTable& avx2_kernels() {
  static const KernelTable table{quadform_avx2, moments_avx2};
  return table;
}

#else

const KernelTable& avx2_kernels() { return scalar_kernels(); }

#endif

}  // namespace nigmrf::kernels
