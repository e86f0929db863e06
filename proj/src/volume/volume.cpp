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
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include "nigmrf/error.hpp"
#include "nigmrf/volume.hpp"

namespace nigmrf {

namespace {

constexpr char kMagic[4] = {'V', 'O', 'L', 'M'};
constexpr std::uint16_t kVersion = 1;
constexpr std::size_t kHeaderBytes = 4 + 2 + 3 * 4 + 2 + 3 * 4;

static_assert(std::endian::native == std::endian::little, "VOLM I/O assumes a little-endian host");

class Writer {
 public:
  explicit Writer(std::vector<std::uint8_t>& out) : out_(out) {}

  template <class T>
  void put(T v) {
    const auto* p = reinterpret_cast<const std::uint8_t*>(&v);
    out_.insert(out_.end(), p, p + sizeof(T));
  }
  void bytes(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    out_.insert(out_.end(), b, b + n);
  }

 private:
  std::vector<std::uint8_t>& out_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> in) : in_(in) {}

  template <class T>
  T get() {
    T v;
    bytes(&v, sizeof(T));
    return v;
  }
  void bytes(void* p, std::size_t n) {
    if (n > in_.size() - pos_) throw FormatError("VOLM: truncated file");
    std::memcpy(p, in_.data() + pos_, n);
    pos_ += n;
  }
  std::size_t remaining() const { return in_.size() - pos_; }

 private:
  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

}  // namespace

void validate(const ChannelSplit& split, int channels) {
  if (split.target.empty() || split.predictors.empty())
    throw UsageError("channel split needs at least one target and one predictor channel");
  std::vector<int> seen(channels, 0);
  for (const auto* part : {&split.target, &split.predictors})
    for (int c : *part) {
      if (c < 0 || c >= channels) throw UsageError("channel split refers to channel " + std::to_string(c) +
                                                   " but the data has " + std::to_string(channels));
      if (seen[c]++) throw UsageError("channel " + std::to_string(c) + " appears twice in the channel split");
    }
  if (static_cast<int>(split.target.size() + split.predictors.size()) != channels)
    throw UsageError("channel split does not cover all " + std::to_string(channels) + " channels");
}

VolumeGrid::VolumeGrid(Dims d, int ch) : dims(d), channels(ch), mask(d.count(), 1), data(d.count() * ch, 0.0f) {}

std::size_t VolumeGrid::in_mask_count() const {
  return static_cast<std::size_t>(std::count_if(mask.begin(), mask.end(), [](std::uint8_t m) { return m != 0; }));
}

void validate(const VolumeGrid& grid) {
  if (grid.dims.nx <= 0 || grid.dims.ny <= 0 || grid.dims.nz <= 0) throw DataError("volume dimensions must be positive");
  if (grid.channels < 1) throw DataError("volume needs at least one channel");
  if (grid.mask.size() != grid.dims.count()) throw DataError("mask size does not match volume dimensions");
  if (grid.data.size() != grid.dims.count() * grid.channels) throw DataError("data size does not match volume shape");
  for (std::size_t v = 0; v < grid.dims.count(); ++v) {
    if (!grid.mask[v]) continue;
    for (int c = 0; c < grid.channels; ++c)
      if (!std::isfinite(grid.value(v, c)))
        throw DataError("non-finite value at in-mask voxel " + std::to_string(v) + ", channel " + std::to_string(c));
  }
}

std::vector<std::uint8_t> encode_volume(const VolumeGrid& grid) {
  validate(grid);
  std::vector<std::uint8_t> out;
  out.reserve(kHeaderBytes + grid.mask.size() + grid.data.size() * sizeof(float));
  Writer w(out);
  w.bytes(kMagic, 4);
  w.put<std::uint16_t>(kVersion);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(grid.dims.nx));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(grid.dims.ny));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(grid.dims.nz));
  w.put<std::uint16_t>(static_cast<std::uint16_t>(grid.channels));
  for (float s : grid.voxel_size) w.put<float>(s);
  for (std::uint8_t m : grid.mask) w.put<std::uint8_t>(m ? 1 : 0);
  w.bytes(grid.data.data(), grid.data.size() * sizeof(float));
  return out;
}

VolumeGrid decode_volume(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  char magic[4];
  r.bytes(magic, 4);
  if (std::memcmp(magic, kMagic, 4) != 0) throw FormatError("VOLM: bad magic");
  const auto version = r.get<std::uint16_t>();
  if (version != kVersion) throw FormatError("VOLM: unsupported version " + std::to_string(version));
  VolumeGrid g;
  g.dims.nx = static_cast<int>(r.get<std::uint32_t>());
  g.dims.ny = static_cast<int>(r.get<std::uint32_t>());
  g.dims.nz = static_cast<int>(r.get<std::uint32_t>());
  g.channels = r.get<std::uint16_t>();
  if (g.dims.nx <= 0 || g.dims.ny <= 0 || g.dims.nz <= 0 || g.channels < 1)
    throw FormatError("VOLM: invalid dimensions");
  for (float& s : g.voxel_size) s = r.get<float>();
  const std::size_t n = g.dims.count();
  if (r.remaining() < n) throw FormatError("VOLM: truncated mask");
  g.mask.resize(n);
  r.bytes(g.mask.data(), n);
  for (std::uint8_t m : g.mask)
    if (m > 1) throw FormatError("VOLM: mask bytes must be 0 or 1");
  const std::size_t payload = n * g.channels * sizeof(float);
  if (r.remaining() != payload)
    throw FormatError(r.remaining() < payload ? "VOLM: truncated data" : "VOLM: trailing bytes after data");
  g.data.resize(n * g.channels);
  r.bytes(g.data.data(), payload);
  validate(g);
  return g;
}

VolumeGrid load_volume(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open volume file '" + path + "'");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return decode_volume(bytes);
  } catch (const FormatError& e) {
    throw FormatError(std::string(e.what()) + " (" + path + ")");
  }
}

void save_volume(const VolumeGrid& grid, const std::string& path) {
  const std::vector<std::uint8_t> bytes = encode_volume(grid);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write volume file '" + path + "'");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for '" + path + "'");
}

VolumeGrid select_channels(const VolumeGrid& grid, std::span<const int> channels) {
  VolumeGrid out(grid.dims, static_cast<int>(channels.size()));
  out.voxel_size = grid.voxel_size;
  out.mask = grid.mask;
  for (int c : channels)
    if (c < 0 || c >= grid.channels) throw UsageError("channel index " + std::to_string(c) + " out of range");
  for (std::size_t v = 0; v < grid.dims.count(); ++v)
    for (std::size_t j = 0; j < channels.size(); ++j) out.value(v, static_cast<int>(j)) = grid.value(v, channels[j]);
  return out;
}

VolumeGrid restrict_slices(const VolumeGrid& grid, int z_begin, int z_end) {
  if (z_begin < 0 || z_end > grid.dims.nz || z_begin >= z_end)
    throw UsageError("slice range [" + std::to_string(z_begin) + ", " + std::to_string(z_end) + ") is empty or out of bounds");
  VolumeGrid out = grid;
  for (int z = 0; z < grid.dims.nz; ++z) {
    if (z >= z_begin && z < z_end) continue;
    for (int y = 0; y < grid.dims.ny; ++y)
      for (int x = 0; x < grid.dims.nx; ++x) out.mask[grid.dims.index(x, y, z)] = 0;
  }
  return out;
}

}  // namespace nigmrf
