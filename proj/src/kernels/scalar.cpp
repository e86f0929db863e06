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

#include <array>

namespace nigmrf::kernels {

namespace {

constexpr int kMaxChannels = 16;

void quadform_scalar(const PlanarView& x, std::size_t begin, std::size_t end, const double* L,
                     const double* loc, const double* g, double* qf, double* cross) {
  const int d = x.d;
  std::array<double, kMaxChannels> r{};
  for (std::size_t i = begin; i < end; ++i) {
    for (int c = 0; c < d; ++c) r[c] = x.channel(c)[i] - loc[c];
    double q = 0.0, cr = 0.0;
    for (int j = 0; j < d; ++j) {
      double y = 0.0;
      for (int m = j; m < d; ++m) y += L[m + j * d] * r[m];
      q += y * y;
      if (g) cr += y * g[j];
    }
    qf[i - begin] = q;
    if (g) cross[i - begin] = cr;
  }
}

void moments_scalar(const PlanarView& x, std::size_t begin, std::size_t end, const double* w,
                    const double* center, double* s0, double* s1, double* s2) {
  const int d = x.d;
  std::array<double, kMaxChannels> r{};
  for (std::size_t i = begin; i < end; ++i) {
    const double wi = w[i];
    if (wi == 0.0) continue;
    for (int c = 0; c < d; ++c) r[c] = x.channel(c)[i] - center[c];
    *s0 += wi;
    for (int a = 0; a < d; ++a) {
      const double wr = wi * r[a];
      s1[a] += wr;
      for (int b = a; b < d; ++b) s2[a + b * d] += wr * r[b];
    }
  }
  for (int a = 0; a < d; ++a)
    for (int b = a + 1; b < d; ++b) s2[b + a * d] = s2[a + b * d];
}

}  // namespace

const KernelTable& scalar_kernels() {
  static const KernelTable table{quadform_scalar, moments_scalar};
  return table;
}

}  // namespace nigmrf::kernels
