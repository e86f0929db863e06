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
#include <limits>
#include <string>

#include "nigmrf/error.hpp"
#include "nigmrf/volume.hpp"

namespace nigmrf {

namespace {
constexpr std::uint32_t kNoSite = std::numeric_limits<std::uint32_t>::max();
}

SiteGraph SiteGraph::from_mask(const Dims& dims, std::span<const std::uint8_t> mask, std::uint32_t subject) {
  if (mask.size() != dims.count()) throw DataError("mask size does not match dimensions");
  SiteGraph g;
  std::vector<std::uint32_t> site_of(dims.count(), kNoSite);
  for (std::size_t v = 0; v < dims.count(); ++v)
    if (mask[v]) {
      site_of[v] = static_cast<std::uint32_t>(g.n++);
      g.voxel.push_back(v);
    }
  g.subject.assign(g.n, subject);
  g.color.resize(g.n);
  g.offsets.reserve(g.n + 1);
  g.offsets.push_back(0);
  g.neighbors.reserve(6 * g.n);
  for (std::size_t i = 0; i < g.n; ++i) {
    const std::size_t v = g.voxel[i];
    const int x = static_cast<int>(v % dims.nx);
    const int y = static_cast<int>((v / dims.nx) % dims.ny);
    const int z = static_cast<int>(v / (static_cast<std::size_t>(dims.nx) * dims.ny));
    g.color[i] = static_cast<std::uint8_t>((x + y + z) & 1);
    (g.color[i] ? g.white : g.black).push_back(static_cast<std::uint32_t>(i));
    const int shifts[6][3] = {{-1, 0, 0}, {1, 0, 0}, {0, -1, 0}, {0, 1, 0}, {0, 0, -1}, {0, 0, 1}};
    for (const auto& s : shifts) {
      const int xx = x + s[0], yy = y + s[1], zz = z + s[2];
      if (xx < 0 || yy < 0 || zz < 0 || xx >= dims.nx || yy >= dims.ny || zz >= dims.nz) continue;
      const std::uint32_t j = site_of[dims.index(xx, yy, zz)];
      if (j != kNoSite) g.neighbors.push_back(j);
    }
    g.offsets.push_back(static_cast<std::uint32_t>(g.neighbors.size()));
  }
  return g;
}

SiteGraph SiteGraph::concat(std::span<const SiteGraph> parts) {
  SiteGraph g;
  g.offsets.push_back(0);
  for (const SiteGraph& p : parts) {
    const auto base = static_cast<std::uint32_t>(g.n);
    const auto edge_base = static_cast<std::uint32_t>(g.neighbors.size());
    for (std::uint32_t j : p.neighbors) g.neighbors.push_back(base + j);
    for (std::size_t i = 1; i < p.offsets.size(); ++i) g.offsets.push_back(edge_base + p.offsets[i]);
    g.color.insert(g.color.end(), p.color.begin(), p.color.end());
    for (std::uint32_t i : p.black) g.black.push_back(base + i);
    for (std::uint32_t i : p.white) g.white.push_back(base + i);
    g.voxel.insert(g.voxel.end(), p.voxel.begin(), p.voxel.end());
    g.subject.insert(g.subject.end(), p.subject.begin(), p.subject.end());
    g.n += p.n;
  }
  return g;
}

std::vector<double> SiteData::point(std::size_t i) const {
  std::vector<double> x(d);
  for (int c = 0; c < d; ++c) x[c] = at(c, i);
  return x;
}

SiteData gather_sites(const VolumeGrid& grid, const SiteGraph& graph, std::span<const int> channels) {
  const VolumeGrid* one[] = {&grid};
  return gather_sites(one, graph, channels);
}

SiteData gather_sites(std::span<const VolumeGrid* const> grids, const SiteGraph& graph, std::span<const int> channels) {
  SiteData s;
  s.d = static_cast<int>(channels.size());
  s.n = graph.n;
  s.values.resize(static_cast<std::size_t>(s.d) * s.n);
  for (std::size_t i = 0; i < graph.n; ++i) {
    const std::uint32_t subj = graph.subject[i];
    if (subj >= grids.size()) throw UsageError("site graph refers to a missing volume");
    const VolumeGrid& g = *grids[subj];
    for (int c = 0; c < s.d; ++c) {
      if (channels[c] < 0 || channels[c] >= g.channels)
        throw UsageError("channel index " + std::to_string(channels[c]) + " out of range");
      s.at(c, i) = g.value(graph.voxel[i], channels[c]);
    }
  }
  return s;
}

VolumeGrid scatter_sites(const VolumeGrid& like, const SiteGraph& graph, std::uint32_t subject,
                         std::span<const double> site_values, float fill) {
  VolumeGrid out(like.dims, 1);
  out.voxel_size = like.voxel_size;
  out.mask = like.mask;
  std::fill(out.data.begin(), out.data.end(), fill);
  for (std::size_t i = 0; i < graph.n; ++i)
    if (graph.subject[i] == subject) out.data[graph.voxel[i]] = static_cast<float>(site_values[i]);
  return out;
}

}  // namespace nigmrf
