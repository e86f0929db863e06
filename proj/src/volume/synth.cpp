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

#include <cmath>

#include "nigmrf/error.hpp"
#include "nigmrf/parallel.hpp"
#include "nigmrf/rng.hpp"
#include "nigmrf/synth.hpp"

namespace nigmrf {

namespace {
constexpr std::uint64_t kPriorStream = 0x7072696f72ULL;
constexpr std::uint64_t kValueStream = 0x76616c7565ULL;
}  // namespace

SynthResult synth_generate(const MixtureModel& model, const Dims& dims, std::span<const std::uint8_t> mask,
                           std::uint64_t seed, int burn_in) {
  validate(model);
  if (dims.nx <= 0 || dims.ny <= 0 || dims.nz <= 0) throw ParameterError("lattice dimensions must be positive");
  if (burn_in < 0) throw ParameterError("burn-in must be non-negative");
  SynthResult out;
  out.volume = VolumeGrid(dims, model.channels);
  if (!mask.empty()) {
    if (mask.size() != dims.count()) throw ParameterError("mask size does not match the lattice");
    for (std::size_t v = 0; v < dims.count(); ++v) out.volume.mask[v] = mask[v] ? 1 : 0;
  }
  out.graph = SiteGraph::from_mask(dims, out.volume.mask);

  LikelihoodTable flat;
  flat.K = model.K();
  flat.n = out.graph.n;
  flat.logf.assign(flat.n * flat.K, 0.0);
  MrfParams prior = model.mrf;
  if (!model.spatial) prior.beta = 0.0;
  out.labels = sample_pointwise(out.graph, flat, prior, seed, kPriorStream);
  if (prior.beta != 0.0)
    for (int t = 0; t < burn_in; ++t) gibbs_sweep(out.labels, out.graph, flat, prior, seed, kPriorStream, t);

  parallel_for(out.graph.n, [&](std::size_t i) {
    Rng rng({seed, kValueStream, i});
    const int k = out.labels.z[i];
    const Vec x = model.family == Family::kGaussian ? gauss_sample(model.gauss_class(k), rng)
                                                    : nig_sample(model.classes[k], rng);
    const std::size_t v = out.graph.voxel[i];
    for (int c = 0; c < model.channels; ++c) out.volume.value(v, c) = static_cast<float>(x(c));
  });
  return out;
}

std::vector<std::uint8_t> ellipsoid_mask(const Dims& dims) {
  std::vector<std::uint8_t> mask(dims.count(), 0);
  const double cx = 0.5 * (dims.nx - 1), cy = 0.5 * (dims.ny - 1), cz = 0.5 * (dims.nz - 1);
  const double rx = 0.5 * dims.nx, ry = 0.5 * dims.ny, rz = 0.5 * dims.nz;
  for (int z = 0; z < dims.nz; ++z)
    for (int y = 0; y < dims.ny; ++y)
      for (int x = 0; x < dims.nx; ++x) {
        const double u = (x - cx) / rx, v = (y - cy) / ry, w = (z - cz) / rz;
        if (u * u + v * v + w * w <= 1.0) mask[dims.index(x, y, z)] = 1;
      }
  return mask;
}

VolumeGrid labels_to_volume(const VolumeGrid& like, const SiteGraph& graph, const LabelField& labels) {
  std::vector<double> vals(graph.n);
  for (std::size_t i = 0; i < graph.n; ++i) vals[i] = labels.z[i] + 1;
  return scatter_sites(like, graph, 0, vals, 0.0f);
}

}  // namespace nigmrf
