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

// Monte Carlo EM-gradient estimation of spatial mixture models: unconstrained
// parameter packing, analytic gradients, approximate Hessian, positive-definite
// scaling, conditional line search, initialization and model selection.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "nigmrf/model.hpp"
#include "nigmrf/mrf.hpp"
#include "nigmrf/volume.hpp"

namespace nigmrf {

// ---- parameter packing ----
//
// Per class: location (d), precision factor lower triangle in row order with the
// diagonal as its log (d(d+1)/2); NIG adds skew (d) and log kurt. The MRF block is
// alpha[1..K-1] followed by beta when spatial.

int class_param_count(Family family, int d);
int mrf_param_count(int K, bool spatial);

Vec pack_class(const NigClassParams& p, Family family);
NigClassParams unpack_class(const Vec& theta, Family family, int d);
Vec pack_mrf(const MrfParams& m, bool spatial);
MrfParams unpack_mrf(const Vec& theta, int K, bool spatial, double frozen_beta = 0.0);

Vec pack_model(const MixtureModel& m);
MixtureModel unpack_model(const Vec& theta, const MixtureModel& like);

// ---- data term ----

// sum_i w_i log f(x_i) for one class.
double class_q(const NigClassParams& p, Family family, const SiteData& data, std::span<const double> w);

// Gradient of class_q with respect to pack_class(p); optionally also returns the value.
Vec class_gradient(const NigClassParams& p, Family family, const SiteData& data, std::span<const double> w,
                   double* value = nullptr);

// Jacobian of class_gradient by central differences, symmetrized.
Mat class_hessian(const NigClassParams& p, Family family, const SiteData& data, std::span<const double> w);

// Column k of the site-major posterior table.
std::vector<double> class_weights(const PosteriorField& post, int k);

// The retained label statistics of post, or the non-spatial equivalent built in scratch.
const MrfSampleStats& label_stats(const PosteriorField& post, MrfSampleStats& scratch);

// Gradient of sum_i sum_k probs_ik log f_k(x_i) over all class blocks (K * class size).
Vec data_term_gradient(const MixtureModel& m, const SiteData& data, const PosteriorField& post);

// Block-diagonal approximate Hessian over the full packed vector: class blocks from
// the weighted data term, the MRF block from the expected log-pseudolikelihood.
Mat approx_hessian(const MixtureModel& m, const SiteData& data, const PosteriorField& post);

// Q(candidate | current) = data term with the current posteriors plus the expected
// log-pseudolikelihood over the retained label statistics.
double q_function(const MixtureModel& candidate, const PosteriorField& post, const SiteData& data);

// ---- scaling and line search ----

enum class ScalingTier { kNewton = 1, kDiagonal = 2, kShifted = 3 };

struct Scaling {
  Mat S;
  ScalingTier tier = ScalingTier::kNewton;
};

// S = -H^{-1} when H is negative definite; otherwise S = -diag(H); if that has
// non-positive entries they are replaced by 1e-6 * max|diag H| (or 1 for H = 0).
Scaling condition_scaling(const Mat& H);

struct LineSearchResult {
  double step = 1.0;
  double q = 0.0;
  int halvings = 0;
  bool ok = true;
};

// Backtracking from step 1, halving until q_at(step) >= q0; gives up after
// max_halvings halvings (ok = false, step = 0).
LineSearchResult line_search(double q0, const std::function<double(double)>& q_at, int max_halvings = 30);

// ---- fitting ----

struct FitOptions {
  int samples = 10;           // J retained Gibbs sweeps per iteration
  int burn_in = 50;           // sweeps before the first iteration's samples
  int max_iters = 500;
  double step_tol = 1e-5;     // on |step * direction|_inf / max(1, |theta|_inf)
  double q_tol = 0.0;         // stop when the Q gain per site falls below this
  int max_halvings = 30;
  std::uint64_t seed = 0;
  int restart = 0;            // recorded in the trace only
  bool standardize = true;
};

struct TraceRow {
  int restart = 0;
  int iteration = 0;
  double q_before = 0.0;
  double q_after = 0.0;
  double loglik = 0.0;        // observed-data log-likelihood at the iterate (non-spatial), else NaN
  double grad_norm = 0.0;
  double step = 0.0;
  double mrf_step = 0.0;
  int tier = 1;
  double wall_ms = 0.0;
};

struct FitResult {
  MixtureModel model;
  std::vector<TraceRow> trace;
  bool converged = false;
  std::string termination;    // "converged", "max_iters", "line_search", "non_finite"
};

// Training data for one fit: a site graph over one or more lattices and all channels.
struct TrainingSet {
  SiteGraph graph;
  SiteData data;
};

TrainingSet make_training_set(std::span<const VolumeGrid* const> grids);

FitResult em_gradient_fit(const TrainingSet& train, const MixtureModel& init, const FitOptions& opts);

// Standard errors of each class location from the inverse of the negative class
// Hessian at m, weighted by posteriors estimated with po. Throws NumericError when
// a block is not negative definite.
std::vector<Vec> location_std_errors(const MixtureModel& m, const TrainingSet& train, const PosteriorOptions& po);

// ---- initialization ----

enum class InitStrategy { kRandom, kKmeans, kHierarchical, kFromModel, kConstant };

InitStrategy parse_init_strategy(std::string_view name);

struct InitOptions {
  Family family = Family::kGaussian;
  bool spatial = false;
  int K = 2;
  std::uint64_t seed = 0;
  int subsample = 2000;       // points used by the clustering starts
  double kurt = 50.0;         // kurt of NIG classes lifted from a Gaussian start
  const MixtureModel* from = nullptr;  // for kFromModel
};

MixtureModel initialize(const SiteData& data, InitStrategy strategy, const InitOptions& opts);

// Conditional-mean MAE of the target channels on the training data; the selection score.
double training_mae(const MixtureModel& m, const TrainingSet& train, int samples, std::uint64_t seed);

// Index of the candidate with the lowest training MAE; ties go to the higher final Q,
// then the lower index.
int select_model(std::span<const MixtureModel> candidates, const TrainingSet& train, int samples, std::uint64_t seed);

}  // namespace nigmrf
