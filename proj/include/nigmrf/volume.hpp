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

// Masked 3D voxel lattices, the VOLM file format, and the in-mask site graph used by
// the sampler and the estimator.

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "nigmrf/kernels/kernels.hpp"

namespace nigmrf {

struct Dims {
  int nx = 0;
  int ny = 0;
  int nz = 0;

  std::size_t count() const { return static_cast<std::size_t>(nx) * ny * nz; }
  std::size_t index(int x, int y, int z) const {
    return static_cast<std::size_t>(x) + static_cast<std::size_t>(nx) * (y + static_cast<std::size_t>(ny) * z);
  }
  bool operator==(const Dims&) const = default;
};

// Target (A) and predictor (B) channel roles. Stored with the model, not the volume.
struct ChannelSplit {
  std::vector<int> target;
  std::vector<int> predictors;

  bool empty() const { return target.empty() && predictors.empty(); }
  bool operator==(const ChannelSplit&) const = default;
};

// Throws UsageError unless target and predictors partition 0..channels-1, both non-empty.
void validate(const ChannelSplit& split, int channels);

struct VolumeGrid {
  Dims dims;
  int channels = 1;
  std::array<float, 3> voxel_size{1.0f, 1.0f, 1.0f};
  std::vector<std::uint8_t> mask;  // 0/1 per voxel
  std::vector<float> data;         // voxel-major: data[voxel * channels + c]

  VolumeGrid() = default;
  VolumeGrid(Dims dims, int channels);

  float value(std::size_t voxel, int c) const { return data[voxel * channels + c]; }
  float& value(std::size_t voxel, int c) { return data[voxel * channels + c]; }
  bool in_mask(std::size_t voxel) const { return mask[voxel] != 0; }
  std::size_t in_mask_count() const;

  bool operator==(const VolumeGrid&) const = default;
};

// Throws DataError on shape mismatches or non-finite in-mask values.
void validate(const VolumeGrid& grid);

VolumeGrid load_volume(const std::string& path);
void save_volume(const VolumeGrid& grid, const std::string& path);
std::vector<std::uint8_t> encode_volume(const VolumeGrid& grid);
VolumeGrid decode_volume(std::span<const std::uint8_t> bytes);

// Copy of the grid restricted to channel subset (in the given order).
VolumeGrid select_channels(const VolumeGrid& grid, std::span<const int> channels);

// Copy of the grid whose mask is cleared outside the axial slices [z_begin, z_end).
VolumeGrid restrict_slices(const VolumeGrid& grid, int z_begin, int z_end);

// First-order (6-neighbor) graph over in-mask voxels of one or more lattices.
// Sites are numbered in voxel order, lattice by lattice; neighbors never cross
// lattices or leave the mask.
struct SiteGraph {
  std::size_t n = 0;
  std::vector<std::uint32_t> offsets;    // n + 1
  std::vector<std::uint32_t> neighbors;  // CSR adjacency
  std::vector<std::uint8_t> color;       // (x + y + z) mod 2
  std::vector<std::uint32_t> black;      // sites with color 0
  std::vector<std::uint32_t> white;      // sites with color 1
  std::vector<std::uint64_t> voxel;      // voxel index within its lattice
  std::vector<std::uint32_t> subject;    // lattice index

  std::span<const std::uint32_t> neighbors_of(std::size_t i) const {
    return {neighbors.data() + offsets[i], neighbors.data() + offsets[i + 1]};
  }
  int degree(std::size_t i) const { return static_cast<int>(offsets[i + 1] - offsets[i]); }

  static SiteGraph from_mask(const Dims& dims, std::span<const std::uint8_t> mask, std::uint32_t subject = 0);
  static SiteGraph concat(std::span<const SiteGraph> parts);
};

// Channel-planar copy of in-mask voxel values, as the compute kernels expect.
struct SiteData {
  int d = 0;
  std::size_t n = 0;
  std::vector<double> values;  // values[c * n + i]

  double at(int c, std::size_t i) const { return values[static_cast<std::size_t>(c) * n + i]; }
  double& at(int c, std::size_t i) { return values[static_cast<std::size_t>(c) * n + i]; }
  const double* channel(int c) const { return values.data() + static_cast<std::size_t>(c) * n; }
  kernels::PlanarView view() const { return {d, n, n, values.data()}; }
  std::vector<double> point(std::size_t i) const;
};

SiteData gather_sites(const VolumeGrid& grid, const SiteGraph& graph, std::span<const int> channels);
SiteData gather_sites(std::span<const VolumeGrid* const> grids, const SiteGraph& graph, std::span<const int> channels);

// Builds a one-channel volume shaped like the template with values written at the
// sites of the given lattice; out-of-mask voxels get fill.
VolumeGrid scatter_sites(const VolumeGrid& like, const SiteGraph& graph, std::uint32_t subject,
                         std::span<const double> site_values, float fill = 0.0f);

}  // namespace nigmrf
