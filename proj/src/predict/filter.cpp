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

#include <algorithm>
#include <string>
#include <vector>

#include "nigmrf/error.hpp"
#include "nigmrf/parallel.hpp"
#include "nigmrf/predict.hpp"

namespace nigmrf {

FilterKernel parse_filter_kernel(std::string_view name) {
  if (name == "plus") return FilterKernel::kPlus;
  if (name == "square") return FilterKernel::kSquare;
  throw UsageError("unknown median filter kernel '" + std::string(name) + "' (expected plus or square)");
}

VolumeGrid median_filter(const VolumeGrid& volume, FilterKernel kernel, int channel) {
  if (channel < 0 || channel >= volume.channels) throw UsageError("median filter: channel out of range");
  std::vector<std::pair<int, int>> offsets;
  if (kernel == FilterKernel::kPlus) {
    offsets = {{0, 0}, {-1, 0}, {1, 0}, {0, -1}, {0, 1}};
  } else {
    for (int dy = -2; dy <= 2; ++dy)
      for (int dx = -2; dx <= 2; ++dx) offsets.emplace_back(dx, dy);
  }
  const Dims& dm = volume.dims;
  VolumeGrid out = volume;
  parallel_for(static_cast<std::size_t>(dm.nz), [&](std::size_t zz) {
    const int z = static_cast<int>(zz);
    std::vector<float> vals;
    vals.reserve(offsets.size());
    for (int y = 0; y < dm.ny; ++y)
      for (int x = 0; x < dm.nx; ++x) {
        const std::size_t v = dm.index(x, y, z);
        if (!volume.in_mask(v)) continue;
        vals.clear();
        for (const auto& [dx, dy] : offsets) {
          const int xx = x + dx, yy = y + dy;
          if (xx < 0 || yy < 0 || xx >= dm.nx || yy >= dm.ny) continue;
          const std::size_t u = dm.index(xx, yy, z);
          if (volume.in_mask(u)) vals.push_back(volume.value(u, channel));
        }
        const std::size_t mid = (vals.size() - 1) / 2;
        std::nth_element(vals.begin(), vals.begin() + mid, vals.end());
        out.value(v, channel) = vals[mid];
      }
  });
  return out;
}

}  // namespace nigmrf
