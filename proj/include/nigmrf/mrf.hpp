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

// Potts prior over latent class labels, checkerboard Gibbs sampling of the label
// field given per-site class log-likelihoods, and Rao-Blackwellized posteriors.
//
// Labels are 0-based in memory (class 0 is the reference class with alpha = 0);
// files store them 1-based.

#include <cstdint>
#include <span>
#include <vector>

#include "nigmrf/linalg.hpp"
#include "nigmrf/volume.hpp"

namespace nigmrf {

struct MrfParams {
  Vec alpha;  // alpha[0] == 0
  double beta = 0.0;

  int K() const { return static_cast<int>(alpha.size()); }
};

void validate(const MrfParams& m);

struct LabelField {
  int K = 0;
  std::vector<std::int32_t> z;  // one label per site
};

// Per-site class log-likelihoods, site-major: logf[i * K + k].
struct LikelihoodTable {
  int K = 0;
  std::size_t n = 0;
  std::vector<double> logf;

  const double* row(std::size_t i) const { return logf.data() + i * K; }
  double* row(std::size_t i) { return logf.data() + i * K; }
};

// P(Z_i = k | Z_{N_i}) from the labels of the neighbors.
Vec potts_conditional(const MrfParams& m, std::span<const int> neighbor_labels);

// Same, from per-class neighbor counts; writes K unnormalized log weights
// -alpha_k - beta * counts[k].
void potts_log_weights(const MrfParams& m, const std::uint8_t* counts, double* out);

// -sum_i (alpha_{z_i} + beta/2 * #{j in N_i : z_j = z_i}); the partition function is omitted.
double potts_log_density_unnorm(const SiteGraph& graph, const LabelField& z, const MrfParams& m);

// Neighbor label counts of site i, written to counts[0..K).
void neighbor_counts(const SiteGraph& graph, const LabelField& z, std::size_t i, std::uint8_t* counts);

// One sweep: all black sites, then all white sites, each drawn from its exact full
// conditional. The uniform for site i is keyed by (seed, stream, sweep, i), so the
// result does not depend on the thread count.
void gibbs_sweep(LabelField& z, const SiteGraph& graph, const LikelihoodTable& table, const MrfParams& m,
                 std::uint64_t seed, std::uint64_t stream, std::uint64_t sweep);

// Labels drawn independently from the beta = 0 posterior; used to start chains.
LabelField sample_pointwise(const SiteGraph& graph, const LikelihoodTable& table, const MrfParams& m,
                            std::uint64_t seed, std::uint64_t stream);

// Per retained label state s, site i and class k: neighbor counts n_{sik} and the
// class weights r_{sik} that stand in for the indicator 1[z_i = k]. Sample weights
// w_s sum to 1. A non-spatial model is one state with zero counts and r = posteriors.
struct MrfSampleStats {
  int K = 0;
  std::size_t n = 0;
  std::vector<double> sample_weight;
  std::vector<std::uint8_t> counts;  // [(s * n + i) * K + k]
  std::vector<double> resp;          // [(s * n + i) * K + k]

  int samples() const { return static_cast<int>(sample_weight.size()); }
};

struct PosteriorField {
  int K = 0;
  std::size_t n = 0;
  std::vector<double> probs;  // [i * K + k]
  int sample_count = 0;
  LabelField final_labels;
  MrfSampleStats stats;       // filled when requested

  const double* row(std::size_t i) const { return probs.data() + i * K; }
};

struct PosteriorOptions {
  bool spatial = true;
  int samples = 10;          // J
  int burn_in = 0;           // sweeps discarded before the first retained state
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;  // e.g. the EM iteration
  bool keep_stats = false;
};

// Rao-Blackwellized posterior class probabilities averaged over J retained sweeps:
// probs_i = (1/J) sum_s P(Z_i = k | x, z^s_{-i}). Without a warm start the chain
// starts from sample_pointwise. Non-spatial models use the exact pointwise posterior.
PosteriorField estimate_posteriors(const SiteGraph& graph, const LikelihoodTable& table, const MrfParams& m,
                                   const PosteriorOptions& opts, const LabelField* warm_start = nullptr);

// Exact pointwise posterior (beta = 0 conditional) for every site.
std::vector<double> pointwise_posteriors(const LikelihoodTable& table, const MrfParams& m);

// sum_i log sum_k softmax(-alpha)_k f_k(x_i); the observed-data log-likelihood of a
// non-spatial mixture.
double mixture_loglik(const LikelihoodTable& table, const MrfParams& m);

// Expected log-pseudolikelihood sum_s w_s sum_i sum_k r_{sik} log P(Z_i = k | n_{si}).
double mrf_q(const MrfSampleStats& stats, const MrfParams& m);

// Gradient and Hessian of mrf_q over the free MRF parameters
// (alpha[1..K-1], then beta when spatial).
Vec mrf_gradient(const MrfSampleStats& stats, const MrfParams& m, bool spatial);
Mat mrf_hessian(const MrfSampleStats& stats, const MrfParams& m, bool spatial);

MrfSampleStats nonspatial_stats(const PosteriorField& post);

}  // namespace nigmrf
