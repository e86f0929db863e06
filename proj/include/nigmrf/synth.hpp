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

// Synthetic lattices drawn from a known MixtureModel: labels from the Potts prior by
// checkerboard Gibbs sweeps, voxel values from the labeled class distributions.

#include <cstdint>
#include <span>

#include "nigmrf/model.hpp"
#include "nigmrf/mrf.hpp"
#include "nigmrf/volume.hpp"

namespace nigmrf {

struct SynthResult {
  VolumeGrid volume;
  LabelField labels;
  SiteGraph graph;
};

// An empty mask means every voxel is in the analysis region.
SynthResult synth_generate(const MixtureModel& model, const Dims& dims, std::span<const std::uint8_t> mask,
                           std::uint64_t seed, int burn_in = 200);

// Ellipsoid inscribed in the lattice, a rough stand-in for a head outline.
std::vector<std::uint8_t> ellipsoid_mask(const Dims& dims);

// One-channel volume with labels 1..K at the sites and 0 elsewhere.
VolumeGrid labels_to_volume(const VolumeGrid& like, const SiteGraph& graph, const LabelField& labels);

}  // namespace nigmrf
