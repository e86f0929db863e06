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

// Prediction of the target channels from the predictor channels: posterior class
// probabilities under the predictor marginal, per-class conditional laws, and the
// mixture mean, standard deviation, median and CRPS*. Also the slice-wise median
// filter and error metrics.

#include <cstdint>
#include <limits>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "nigmrf/model.hpp"
#include "nigmrf/mrf.hpp"
#include "nigmrf/rng.hpp"
#include "nigmrf/volume.hpp"

namespace nigmrf {

struct PredictOptions {
  int sweeps = 1000;            // J for spatial models
  double burn_fraction = 0.1;   // leading share of the sweeps discarded
  int median_draws = 500;       // M
  int crps_pairs = 100;         // mixing-variable pairs per class for NIG CRPS*
  std::uint64_t seed = 0;
  bool want_median = true;
};

// Site-level predictions; per-target arrays are indexed [a * n + i].
struct Prediction {
  int targets = 0;
  std::size_t n = 0;
  std::vector<double> mean;
  std::vector<double> std;
  std::vector<double> median;  // empty unless requested
  std::vector<double> crps;    // empty unless truth was given
  PosteriorField posterior;
};

// Posterior class probabilities from the predictor channels only (class marginals
// over the predictors). `predictors` holds exactly the model's predictor channels,
// in split order.
PosteriorField predictive_posteriors(const MixtureModel& m, const SiteGraph& graph, const SiteData& predictors,
                                     const PredictOptions& opts);

// Full prediction. When truth (the target channels, in split order) is given the
// CRPS* map is filled.
Prediction predict(const MixtureModel& m, const SiteGraph& graph, const SiteData& predictors,
                   const PredictOptions& opts, const SiteData* truth = nullptr);

// Mixture moments at one site from posterior probabilities and class conditionals.
Vec mixture_mean(std::span<const double> probs, std::span<const GhConditional> conds);
Mat mixture_cov(std::span<const double> probs, std::span<const GhConditional> conds);

// Thin wrappers that run the full pipeline and return one map ([a * n + i]).
std::vector<double> predict_mean(const MixtureModel& m, const SiteGraph& graph, const SiteData& predictors,
                                 const PredictOptions& opts);
std::vector<double> predict_variance(const MixtureModel& m, const SiteGraph& graph, const SiteData& predictors,
                                     const PredictOptions& opts);
std::vector<double> predict_median(const MixtureModel& m, const SiteGraph& graph, const SiteData& predictors,
                                   const PredictOptions& opts);

// ---- CRPS* (negatively oriented, E|Y - x| - E|Y - Y'| / 2) ----

// One scalar class component: Y | V ~ N(loc + skew V, var V) with V from gig, or
// N(loc, var) when gaussian.
struct ScalarComponent {
  double loc = 0.0;
  double skew = 0.0;
  double var = 1.0;
  GigParams gig;
  bool gaussian = true;
};

// Marginal of target channel a of a class conditional.
ScalarComponent scalar_component(const GhConditional& c, int a);

double crps_gaussian_mixture(std::span<const double> probs, std::span<const ScalarComponent> comps, double x);

// Conditional closed form given n mixing-variable draws per class (variance reduced).
double crps_nig_mixture(std::span<const double> probs, std::span<const ScalarComponent> comps, double x, int n,
                        Rng& rng);

// Plain Monte Carlo with n independent pairs (Y, Y'), for comparison.
double crps_naive_mixture(std::span<const double> probs, std::span<const ScalarComponent> comps, double x, int n,
                          Rng& rng);

// ---- median filter ----

enum class FilterKernel { kPlus, kSquare };  // 4-neighbor cross + center, or 5x5 square

FilterKernel parse_filter_kernel(std::string_view name);

// Per axial slice, every in-mask voxel of the channel becomes the median of the
// in-mask kernel members (itself included); lower middle for even counts.
// Out-of-mask voxels are copied unchanged.
VolumeGrid median_filter(const VolumeGrid& volume, FilterKernel kernel, int channel = 0);

// ---- metrics ----

struct MetricsBin {
  double low = 0.0;
  double high = 0.0;
  std::size_t n = 0;
  double mae = 0.0;
  double rmse = 0.0;
  double me = 0.0;
  double density = 0.0;  // n / (N * bin_width)
};

struct MetricsReport {
  std::size_t n = 0;
  double mae = 0.0;
  double rmse = 0.0;
  double mean_error = 0.0;
  double mean_crps = std::numeric_limits<double>::quiet_NaN();
  std::vector<MetricsBin> bins;
};

// Errors pred - truth over the sites; bins keyed by the predicted value.
MetricsReport compute_metrics(std::span<const double> pred, std::span<const double> truth, double bin_width,
                              std::span<const double> crps = {});

// Same on volumes: channel 0 of each over the mask.
MetricsReport compute_metrics(const VolumeGrid& pred, const VolumeGrid& truth, double bin_width,
                              const VolumeGrid* crps = nullptr);

// CSV with header metric,value,bin_low,bin_high,n.
void write_metrics_csv(const MetricsReport& r, std::ostream& os);

}  // namespace nigmrf
