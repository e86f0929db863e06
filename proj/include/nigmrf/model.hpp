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

// MixtureModel: K class distributions (Gaussian or NIG), the Potts prior and the
// channel roles, plus its YAML model file.

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nigmrf/dists.hpp"
#include "nigmrf/mrf.hpp"
#include "nigmrf/volume.hpp"

namespace nigmrf {

enum class Family { kGaussian, kNig };

std::string_view family_name(Family f);
Family parse_family(std::string_view name);  // "gaussian" | "nig"

struct FitInfo {
  std::uint64_t seed = 0;
  int iterations = 0;
  double final_q = std::numeric_limits<double>::quiet_NaN();
  bool converged = false;
};

struct MixtureModel {
  Family family = Family::kGaussian;
  bool spatial = false;
  int channels = 0;
  ChannelSplit split;
  // Gaussian classes use loc as the mean and prec_factor; skew is zero and kurt unused.
  std::vector<NigClassParams> classes;
  MrfParams mrf;
  FitInfo fit;

  int K() const { return static_cast<int>(classes.size()); }
  int dim() const { return channels; }

  GaussClassParams gauss_class(int k) const;
  double class_logpdf(int k, std::span<const double> x) const;

  // Class marginals over the given channels; the split is dropped.
  MixtureModel marginal(std::span<const int> keep) const;
  // Law of the target channels of class k given predictor values.
  GhConditional class_conditional(int k, std::span<const double> x_predictors) const;

  // Non-spatial class probabilities softmax(-alpha).
  Vec prior() const;
};

// Throws ParameterError (or UsageError for a bad split) on violated invariants.
void validate(const MixtureModel& m);

// Builds a model of the given family with K default classes: zero locations,
// identity precision factors, zero skew, kurt 1, alpha = 0, beta = 0.
MixtureModel make_model(Family family, bool spatial, int K, int channels);

// log f_k(x_i) for every site of data (whose channels must match the model).
LikelihoodTable likelihood_table(const MixtureModel& m, const SiteData& data);

// Writes log f(x_i) of one class into out[0..n).
void class_log_density(const NigClassParams& p, Family family, const SiteData& data, double* out);

std::string model_to_yaml(const MixtureModel& m);
MixtureModel model_from_yaml(const std::string& text);
void save_model(const MixtureModel& m, const std::string& path);
MixtureModel load_model(const std::string& path);

// Shortest decimal representation that parses back to the same double.
std::string format_double(double v);

}  // namespace nigmrf
