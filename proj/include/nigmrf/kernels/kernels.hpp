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

#pragma once

// Data-parallel voxel loops shared by the likelihood table, the gradient and the
// Q function. Each kernel has a scalar reference and an AVX2 variant with the same
// contract; the active variant is picked once at startup from CPUID and can be
// overridden (tests compare the two).

#include <cstddef>
#include <string_view>

namespace nigmrf::kernels {

enum class Isa { kScalar, kAvx2 };

// Channel-planar view of n voxels with d channels: channel c occupies
// data[c * stride, c * stride + n).
struct PlanarView {
  int d = 0;
  std::size_t n = 0;
  std::size_t stride = 0;
  const double* data = nullptr;

  const double* channel(int c) const { return data + static_cast<std::size_t>(c) * stride; }
};

// For voxels [begin, end): y = L^T (x - loc) with L lower triangular (column-major,
// leading dimension d). Writes qf[i - begin] = |y|^2 and, when g is non-null,
// cross[i - begin] = y . g.
using QuadformFn = void (*)(const PlanarView& x, std::size_t begin, std::size_t end, const double* L,
                            const double* loc, const double* g, double* qf, double* cross);

// For voxels [begin, end) with weights w (indexed like the voxels) and r = x - center:
// s0 += sum w, s1 += sum w r (d), s2 += sum w r r^T (d x d, column-major, full).
using MomentsFn = void (*)(const PlanarView& x, std::size_t begin, std::size_t end, const double* w,
                           const double* center, double* s0, double* s1, double* s2);

struct KernelTable {
  QuadformFn quadform;
  MomentsFn weighted_moments;
};

const KernelTable& scalar_kernels();
const KernelTable& avx2_kernels();

bool cpu_has_avx2();

// Kernels currently in use.
const KernelTable& active();
Isa active_isa();
std::string_view isa_name(Isa isa);

// Forces a variant; returns false (and changes nothing) if the CPU lacks it.
bool force_isa(Isa isa);

}  // namespace nigmrf::kernels
