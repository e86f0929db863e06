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
#include <string>

#include "nigmrf/error.hpp"
#include "nigmrf/parallel.hpp"
#include "nigmrf/predict.hpp"

namespace nigmrf {

namespace {

constexpr std::uint64_t kPosteriorStream = 0x7072656469637400ULL;
constexpr std::uint64_t kMedianStream = 1;
constexpr std::uint64_t kCrpsStream = 2;

void check_inputs(const MixtureModel& m, const SiteGraph& graph, const SiteData& predictors) {
  if (m.split.empty()) throw UsageError("model has no channel split; cannot predict");
  if (predictors.d != static_cast<int>(m.split.predictors.size()))
    throw UsageError("predictor data has " + std::to_string(predictors.d) + " channels, model expects " +
                     std::to_string(m.split.predictors.size()));
  if (predictors.n != graph.n) throw UsageError("predictor data does not match the site graph");
}

int draw_class(std::span<const double> probs, double u) {
  double c = 0.0;
  const int K = static_cast<int>(probs.size());
  for (int k = 0; k < K - 1; ++k) {
    c += probs[k];
    if (u < c) return k;
  }
  return K - 1;
}

double median_of(std::vector<double>& v) {
  const std::size_t h = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + h, v.end());
  const double hi = v[h];
  if (v.size() % 2) return hi;
  const double lo = *std::max_element(v.begin(), v.begin() + h);
  return 0.5 * (lo + hi);
}

}  // namespace

PosteriorField predictive_posteriors(const MixtureModel& m, const SiteGraph& graph, const SiteData& predictors,
                                     const PredictOptions& opts) {
  check_inputs(m, graph, predictors);
  if (opts.sweeps < 1) throw UsageError("prediction needs at least one sweep");
  const MixtureModel marginal = m.marginal(m.split.predictors);
  const LikelihoodTable table = likelihood_table(marginal, predictors);
  PosteriorOptions po;
  po.spatial = m.spatial;
  po.burn_in = static_cast<int>(std::floor(opts.sweeps * opts.burn_fraction));
  po.samples = std::max(1, opts.sweeps - po.burn_in);
  po.seed = opts.seed;
  po.stream = kPosteriorStream;
  po.keep_stats = false;
  return estimate_posteriors(graph, table, m.mrf, po);
}

Vec mixture_mean(std::span<const double> probs, std::span<const GhConditional> conds) {
  Vec mean = Vec::Zero(conds[0].dim());
  for (std::size_t k = 0; k < conds.size(); ++k)
    if (probs[k] > 0.0) mean += probs[k] * conds[k].mean();
  return mean;
}

Mat mixture_cov(std::span<const double> probs, std::span<const GhConditional> conds) {
  const int a = conds[0].dim();
  Mat second = Mat::Zero(a, a);
  Vec mean = Vec::Zero(a);
  for (std::size_t k = 0; k < conds.size(); ++k) {
    if (probs[k] <= 0.0) continue;
    const Vec mk = conds[k].mean();
    second += probs[k] * (conds[k].cov() + mk * mk.transpose());
    mean += probs[k] * mk;
  }
  return symmetrize(second - mean * mean.transpose());
}

Prediction predict(const MixtureModel& m, const SiteGraph& graph, const SiteData& predictors,
                   const PredictOptions& opts, const SiteData* truth) {
  validate(m);
  check_inputs(m, graph, predictors);
  const int A = static_cast<int>(m.split.target.size());
  if (truth && (truth->d != A || truth->n != graph.n)) throw UsageError("truth data does not match the target channels");
  if (opts.want_median && opts.median_draws < 2) throw UsageError("median prediction needs at least two draws");

  Prediction out;
  out.targets = A;
  out.n = graph.n;
  out.posterior = predictive_posteriors(m, graph, predictors, opts);
  out.mean.assign(A * graph.n, 0.0);
  out.std.assign(A * graph.n, 0.0);
  if (opts.want_median) out.median.assign(A * graph.n, 0.0);
  if (truth) out.crps.assign(A * graph.n, 0.0);

  const int K = m.K();
  const std::size_t n = graph.n;
  parallel_for(n, [&](std::size_t i) {
    const std::vector<double> xb = predictors.point(i);
    std::vector<GhConditional> conds;
    conds.reserve(K);
    for (int k = 0; k < K; ++k) conds.push_back(m.class_conditional(k, xb));
    const std::span<const double> probs(out.posterior.row(i), K);
    const Vec mean = mixture_mean(probs, conds);
    const Mat cov = mixture_cov(probs, conds);
    for (int a = 0; a < A; ++a) {
      out.mean[a * n + i] = mean(a);
      out.std[a * n + i] = std::sqrt(std::max(0.0, cov(a, a)));
    }
    if (opts.want_median) {
      Rng rng({opts.seed, kMedianStream, i});
      std::vector<std::vector<double>> draws(A, std::vector<double>(opts.median_draws));
      for (int s = 0; s < opts.median_draws; ++s) {
        const Vec y = conds[draw_class(probs, rng.uniform())].sample(rng);
        for (int a = 0; a < A; ++a) draws[a][s] = y(a);
      }
      for (int a = 0; a < A; ++a) out.median[a * n + i] = median_of(draws[a]);
    }
    if (truth) {
      for (int a = 0; a < A; ++a) {
        std::vector<ScalarComponent> comps;
        comps.reserve(K);
        for (int k = 0; k < K; ++k) comps.push_back(scalar_component(conds[k], a));
        const double x = truth->at(a, i);
        if (m.family == Family::kGaussian) {
          out.crps[a * n + i] = crps_gaussian_mixture(probs, comps, x);
        } else {
          Rng rng({opts.seed, kCrpsStream, i, static_cast<std::uint64_t>(a)});
          out.crps[a * n + i] = crps_nig_mixture(probs, comps, x, opts.crps_pairs, rng);
        }
      }
    }
  });
  return out;
}

std::vector<double> predict_mean(const MixtureModel& m, const SiteGraph& graph, const SiteData& predictors,
                                 const PredictOptions& opts) {
  PredictOptions o = opts;
  o.want_median = false;
  return predict(m, graph, predictors, o).mean;
}

std::vector<double> predict_variance(const MixtureModel& m, const SiteGraph& graph, const SiteData& predictors,
                                     const PredictOptions& opts) {
  PredictOptions o = opts;
  o.want_median = false;
  std::vector<double> v = predict(m, graph, predictors, o).std;
  for (double& x : v) x *= x;
  return v;
}

std::vector<double> predict_median(const MixtureModel& m, const SiteGraph& graph, const SiteData& predictors,
                                   const PredictOptions& opts) {
  PredictOptions o = opts;
  o.want_median = true;
  return predict(m, graph, predictors, o).median;
}

}  // namespace nigmrf
