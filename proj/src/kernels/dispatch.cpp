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

#include <atomic>

namespace nigmrf::kernels {

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(__i386__)
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

namespace {

std::atomic<Isa>& selected() {
  static std::atomic<Isa> isa{cpu_has_avx2() ? Isa::kAvx2 : Isa::kScalar};
  return isa;
}

}  // namespace

const KernelTable& active() {
  return selected().load(std::memory_order_relaxed) == Isa::kAvx2 ? avx2_kernels() : scalar_kernels();
}

Isa active_isa() { return selected().load(std::memory_order_relaxed); }

std::string_view isa_name(Isa isa) { return isa == Isa::kAvx2 ? "avx2" : "scalar"; }

bool force_isa(Isa isa) {
  if (isa == Isa::kAvx2 && !cpu_has_avx2()) return false;
  selected().store(isa, std::memory_order_relaxed);
  return true;
}

}  // namespace nigmrf::kernels
