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
#include <cmath>
#include <cstring>
#include <fstream>
#include <set>

#include "doctest.h"
#include "nigmrf/error.hpp"
#include "nigmrf/model.hpp"
#include "nigmrf/synth.hpp"
#include "nigmrf/volume.hpp"
#include "support.hpp"

using namespace nigmrf;

namespace {

VolumeGrid random_grid(Dims dims, int channels, std::uint64_t seed, double keep = 0.8) {
  VolumeGrid g(dims, channels);
  g.voxel_size = {0.5f, 1.25f, 2.0f};
  Rng rng(seed);
  for (auto& m : g.mask) m = rng.uniform() < keep ? 1 : 0;
  for (float& v : g.data) v = static_cast<float>(100.0 * rng.normal());
  return g;
}

std::vector<std::uint8_t> read_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

constexpr std::size_t kHeaderBytes = 4 + 2 + 3 * 4 + 2 + 3 * 4;

MixtureModel two_class_model(double beta) {
  MixtureModel m = make_model(Family::kGaussian, true, 2, 1);
  m.classes[0].loc(0) = -3.0;
  m.classes[1].loc(0) = 3.0;
  m.mrf.beta = beta;
  return m;
}

double same_label_fraction(const SynthResult& r) {
  std::size_t same = 0, total = 0;
  for (std::size_t i = 0; i < r.graph.n; ++i)
    for (auto j : r.graph.neighbors_of(i)) {
      ++total;
      same += r.labels.z[i] == r.labels.z[j];
    }
  return double(same) / total;
}

}  // namespace

TEST_CASE("save then load is the identity") {
  const auto dir = test::temp_dir("volume_rt");
  const VolumeGrid g = random_grid({4, 4, 4}, 5, 1);
  const std::string path = (dir / "g.volm").string();
  save_volume(g, path);
  const VolumeGrid back = load_volume(path);
  CHECK(back.dims == g.dims);
  CHECK(back.channels == g.channels);
  CHECK(back.voxel_size == g.voxel_size);
  CHECK(back.mask == g.mask);
  CHECK(back.data == g.data);
  save_volume(back, (dir / "h.volm").string());
  CHECK(read_bytes(path) == read_bytes((dir / "h.volm").string()));
}

TEST_CASE("encoding is deterministic and sized per the layout") {
  const VolumeGrid g = random_grid({2, 2, 2}, 3, 2);
  const auto a = encode_volume(g), b = encode_volume(g);
  CHECK(a == b);
  CHECK(a.size() == kHeaderBytes + 8 + 8 * 3 * 4);
  CHECK(std::memcmp(a.data(), "VOLM", 4) == 0);
  CHECK(a[4] == 1);
  CHECK(a[5] == 0);
  CHECK(a[6] == 2);  // nx, little-endian u32
  CHECK(a[18] == 3);  // channels
  // First payload value is voxel 0, channel 0.
  float first;
  std::memcpy(&first, a.data() + kHeaderBytes + 8, 4);
  CHECK(first == g.value(0, 0));
  float second;
  std::memcpy(&second, a.data() + kHeaderBytes + 8 + 4, 4);
  CHECK(second == g.value(0, 1));
}

TEST_CASE("all-false mask round-trips") {
  VolumeGrid g = random_grid({3, 2, 2}, 2, 3);
  std::fill(g.mask.begin(), g.mask.end(), 0);
  g.data[0] = std::nanf("");  // out-of-mask values are never checked
  const VolumeGrid back = decode_volume(encode_volume(g));
  CHECK(back.in_mask_count() == 0);
  CHECK(SiteGraph::from_mask(back.dims, back.mask).n == 0);
}

TEST_CASE("malformed files are rejected") {
  const VolumeGrid g = random_grid({3, 3, 3}, 2, 4);
  auto bytes = encode_volume(g);
  SUBCASE("magic") {
    std::memcpy(bytes.data(), "XXXX", 4);
    CHECK_THROWS_AS(decode_volume(bytes), FormatError);
  }
  SUBCASE("version") {
    bytes[4] = 2;
    CHECK_THROWS_AS(decode_volume(bytes), FormatError);
  }
  SUBCASE("truncation") {
    bytes.pop_back();
    CHECK_THROWS_AS(decode_volume(bytes), FormatError);
    bytes.resize(10);
    CHECK_THROWS_AS(decode_volume(bytes), FormatError);
  }
  SUBCASE("trailing bytes") {
    bytes.push_back(0);
    CHECK_THROWS_AS(decode_volume(bytes), FormatError);
  }
  SUBCASE("mask byte") {
    bytes[kHeaderBytes] = 7;
    CHECK_THROWS_AS(decode_volume(bytes), FormatError);
  }
  SUBCASE("non-finite in-mask value") {
    VolumeGrid bad = g;
    std::size_t v = 0;
    while (!bad.in_mask(v)) ++v;
    bad.value(v, 1) = std::numeric_limits<float>::infinity();
    std::vector<std::uint8_t> raw;
    CHECK_THROWS_AS(raw = encode_volume(bad), DataError);
  }
  SUBCASE("file paths") {
    CHECK_THROWS_AS(load_volume("/nonexistent/dir/x.volm"), IoError);
    CHECK_THROWS_AS(save_volume(g, "/nonexistent/dir/x.volm"), IoError);
    const auto dir = test::temp_dir("volume_bad");
    std::ofstream((dir / "bad.volm").string()) << "XXXXnonsense";
    CHECK_THROWS_AS(load_volume((dir / "bad.volm").string()), FormatError);
  }
}

TEST_CASE("large volume in-mask count equals the mask popcount") {
  const Dims dims{192, 192, 192};
  VolumeGrid g(dims, 5);
  g.mask = ellipsoid_mask(dims);
  for (std::size_t v = 0; v < dims.count(); v += 97) g.value(v, v % 5) = static_cast<float>(v % 1000);
  const auto dir = test::temp_dir("volume_big");
  const std::string path = (dir / "big.volm").string();
  save_volume(g, path);
  const auto bytes = read_bytes(path);
  const std::size_t popcount =
      static_cast<std::size_t>(std::count(bytes.begin() + kHeaderBytes, bytes.begin() + kHeaderBytes + dims.count(), 1));
  const VolumeGrid back = load_volume(path);
  CHECK(back.in_mask_count() == popcount);
  CHECK(back.data == g.data);
  std::filesystem::remove_all(dir);
}

TEST_CASE("site graph is symmetric and bipartite for masks with holes") {
  for (std::uint64_t seed : {1, 2, 3}) {
    const VolumeGrid g = random_grid({7, 6, 5}, 1, seed, 0.6);
    const SiteGraph graph = SiteGraph::from_mask(g.dims, g.mask);
    CHECK(graph.n == g.in_mask_count());
    CHECK(graph.black.size() + graph.white.size() == graph.n);
    std::set<std::pair<std::uint32_t, std::uint32_t>> edges;
    for (std::size_t i = 0; i < graph.n; ++i) {
      CHECK(graph.degree(i) <= 6);
      for (auto j : graph.neighbors_of(i)) {
        edges.insert({static_cast<std::uint32_t>(i), j});
        CHECK(graph.color[i] != graph.color[j]);
        CHECK(g.in_mask(graph.voxel[j]));
      }
    }
    for (auto [i, j] : edges) CHECK(edges.count({j, i}) == 1);
    // Every in-mask axis neighbor is present.
    std::vector<std::int64_t> site_of(g.dims.count(), -1);
    for (std::size_t i = 0; i < graph.n; ++i) site_of[graph.voxel[i]] = static_cast<std::int64_t>(i);
    std::size_t expected = 0;
    for (int z = 0; z < g.dims.nz; ++z)
      for (int y = 0; y < g.dims.ny; ++y)
        for (int x = 0; x < g.dims.nx; ++x) {
          const auto v = g.dims.index(x, y, z);
          if (!g.in_mask(v)) continue;
          CHECK(graph.color[site_of[v]] == (x + y + z) % 2);
          if (x + 1 < g.dims.nx && g.in_mask(g.dims.index(x + 1, y, z))) expected += 2;
          if (y + 1 < g.dims.ny && g.in_mask(g.dims.index(x, y + 1, z))) expected += 2;
          if (z + 1 < g.dims.nz && g.in_mask(g.dims.index(x, y, z + 1))) expected += 2;
        }
    CHECK(edges.size() == expected);
  }
}

TEST_CASE("concatenated graphs keep subjects apart") {
  const VolumeGrid a = random_grid({3, 3, 3}, 2, 5), b = random_grid({4, 2, 3}, 2, 6);
  const SiteGraph ga = SiteGraph::from_mask(a.dims, a.mask, 0), gb = SiteGraph::from_mask(b.dims, b.mask, 1);
  const SiteGraph parts[] = {ga, gb};
  const SiteGraph all = SiteGraph::concat(parts);
  CHECK(all.n == ga.n + gb.n);
  for (std::size_t i = 0; i < all.n; ++i)
    for (auto j : all.neighbors_of(i)) CHECK(all.subject[i] == all.subject[j]);
  const VolumeGrid* grids[] = {&a, &b};
  const int ch[] = {1, 0};
  const SiteData data = gather_sites(grids, all, ch);
  CHECK(data.d == 2);
  CHECK(data.at(0, ga.n) == b.value(gb.voxel[0], 1));
  CHECK(data.at(1, 0) == a.value(ga.voxel[0], 0));
}

TEST_CASE("gather and scatter are inverse on the mask") {
  const VolumeGrid g = random_grid({5, 4, 3}, 3, 7);
  const SiteGraph graph = SiteGraph::from_mask(g.dims, g.mask);
  const int ch[] = {2};
  const SiteData s = gather_sites(g, graph, ch);
  const VolumeGrid out = scatter_sites(g, graph, 0, s.values, -5.0f);
  CHECK(out.channels == 1);
  for (std::size_t v = 0; v < g.dims.count(); ++v)
    CHECK(out.value(v, 0) == (g.in_mask(v) ? g.value(v, 2) : -5.0f));
  const auto p = s.point(3);
  CHECK(p.size() == 1);
  CHECK(p[0] == s.at(0, 3));
}

TEST_CASE("channel selection and slice restriction") {
  const VolumeGrid g = random_grid({3, 3, 6}, 4, 8, 1.0);
  const int ch[] = {3, 1};
  const VolumeGrid s = select_channels(g, ch);
  CHECK(s.channels == 2);
  CHECK(s.value(10, 0) == g.value(10, 3));
  const int bad[] = {4};
  CHECK_THROWS_AS(select_channels(g, bad), UsageError);
  const VolumeGrid r = restrict_slices(g, 2, 4);
  CHECK(r.in_mask_count() == 18);
  CHECK_THROWS_AS(restrict_slices(g, 4, 4), UsageError);
  CHECK_THROWS_AS(restrict_slices(g, 0, 7), UsageError);
}

TEST_CASE("channel split validation") {
  CHECK_NOTHROW(validate(ChannelSplit{{0}, {1, 2}}, 3));
  CHECK_THROWS_AS(validate(ChannelSplit{{}, {0, 1}}, 2), UsageError);
  CHECK_THROWS_AS(validate(ChannelSplit{{0}, {0, 1}}, 2), UsageError);
  CHECK_THROWS_AS(validate(ChannelSplit{{0}, {1}}, 3), UsageError);
  CHECK_THROWS_AS(validate(ChannelSplit{{0}, {3}}, 3), UsageError);
}

TEST_CASE("synthetic labels without coupling are balanced and independent") {
  const Dims dims{32, 32, 32};
  const SynthResult r = synth_generate(two_class_model(0.0), dims, {}, 17);
  const double n = double(r.graph.n);
  double ones = 0;
  for (int z : r.labels.z) ones += z;
  const double se = std::sqrt(0.25 / n);
  CHECK(std::abs(ones / n - 0.5) < 3.0 * se);
  // Joint frequency of (label_i, label_j) over x-neighbor pairs factorizes.
  double pairs = 0, both = 0, left = 0, right = 0;
  for (int z = 0; z < dims.nz; ++z)
    for (int y = 0; y < dims.ny; ++y)
      for (int x = 0; x + 1 < dims.nx; ++x) {
        const int a = r.labels.z[dims.index(x, y, z)], b = r.labels.z[dims.index(x + 1, y, z)];
        pairs += 1;
        both += a * b;
        left += a;
        right += b;
      }
  const double p11 = both / pairs, pa = left / pairs, pb = right / pairs;
  CHECK(std::abs(p11 - pa * pb) < 3.0 * std::sqrt(p11 * (1 - p11) / pairs) + 3.0 * se);
}

TEST_CASE("attractive coupling increases same-label neighbors") {
  const Dims dims{32, 32, 32};
  const double f0 = same_label_fraction(synth_generate(two_class_model(0.0), dims, {}, 3));
  const double f1 = same_label_fraction(synth_generate(two_class_model(-1.5), dims, {}, 3));
  CHECK(f1 > f0);
  CHECK(f1 > 0.8);
}

TEST_CASE("single Gaussian class moments") {
  MixtureModel m = make_model(Family::kGaussian, false, 1, 2);
  m.classes[0].loc << 1.0, -2.0;
  m.classes[0].prec_factor << 0.8, 0.0, 0.5, 1.5;
  const SynthResult r = synth_generate(m, {32, 32, 32}, {}, 4);
  const Mat cov = m.classes[0].precision().inverse();
  const double n = double(r.graph.n);
  for (int c = 0; c < 2; ++c) {
    double s = 0, s2 = 0;
    for (std::size_t v = 0; v < r.volume.dims.count(); ++v) {
      s += r.volume.value(v, c);
      s2 += double(r.volume.value(v, c)) * r.volume.value(v, c);
    }
    const double mean = s / n, var = s2 / n - mean * mean;
    CHECK(std::abs(mean - m.classes[0].loc(c)) < 3.0 * std::sqrt(cov(c, c) / n));
    CHECK(std::abs(var - cov(c, c)) < 3.0 * cov(c, c) * std::sqrt(2.0 / n));
  }
  double cross = 0, m0 = 0, m1 = 0;
  for (std::size_t v = 0; v < r.volume.dims.count(); ++v) {
    m0 += r.volume.value(v, 0);
    m1 += r.volume.value(v, 1);
    cross += double(r.volume.value(v, 0)) * r.volume.value(v, 1);
  }
  const double c01 = cross / n - (m0 / n) * (m1 / n);
  const double se01 = std::sqrt((cov(0, 0) * cov(1, 1) + cov(0, 1) * cov(0, 1)) / n);
  CHECK(std::abs(c01 - cov(0, 1)) < 3.0 * se01);
}

TEST_CASE("synthetic generation is reproducible and validated") {
  const Dims dims{10, 9, 8};
  const auto mask = ellipsoid_mask(dims);
  MixtureModel m = two_class_model(-0.7);
  m.family = Family::kNig;
  m.classes[0].skew(0) = 0.5;
  const SynthResult a = synth_generate(m, dims, mask, 99, 20), b = synth_generate(m, dims, mask, 99, 20);
  CHECK(encode_volume(a.volume) == encode_volume(b.volume));
  CHECK(a.labels.z == b.labels.z);
  const SynthResult c = synth_generate(m, dims, mask, 100, 20);
  CHECK(encode_volume(a.volume) != encode_volume(c.volume));
  const VolumeGrid lv = labels_to_volume(a.volume, a.graph, a.labels);
  for (std::size_t v = 0; v < dims.count(); ++v) {
    if (a.volume.in_mask(v)) {
      CHECK(lv.value(v, 0) >= 1.0f);
      CHECK(lv.value(v, 0) <= 2.0f);
    } else {
      CHECK(lv.value(v, 0) == 0.0f);
    }
  }
  MixtureModel bad = m;
  bad.classes[1].prec_factor(0, 0) = -1.0;
  CHECK_THROWS_AS(synth_generate(bad, dims, mask, 1), ParameterError);
  bad = m;
  bad.classes.clear();
  bad.mrf.alpha.resize(0);
  CHECK_THROWS_AS(synth_generate(bad, dims, mask, 1), ParameterError);
}
