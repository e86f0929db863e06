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

#include "nigmrf/error.hpp"
#include "nigmrf/mrf.hpp"
#include "nigmrf/parallel.hpp"
#include "nigmrf/rng.hpp"

namespace nigmrf {

namespace {

constexpr int kMaxClasses = 64;

// Full conditional of site i given its neighbors' current labels, normalized in place.
void site_conditional(const SiteGraph& graph, const LabelField& z, const LikelihoodTable& table, const MrfParams& m,
                      std::size_t i, std::uint8_t* counts, double* w) {
  const int K = table.K;
  neighbor_counts(graph, z, i, counts);
  potts_log_weights(m, counts, w);
  const double* lf = table.row(i);
  double mx = -INFINITY;
  for (int k = 0; k < K; ++k) {
    w[k] += lf[k];
    mx = std::max(mx, w[k]);
  }
  double s = 0.0;
  for (int k = 0; k < K; ++k) {
    w[k] = std::exp(w[k] - mx);
    s += w[k];
  }
  for (int k = 0; k < K; ++k) {
    w[k] /= s;
    if (w[k] < 1e-300) w[k] = 0.0;
  }
}

int draw(const double* p, int K, double u) {
  double c = 0.0;
  for (int k = 0; k < K - 1; ++k) {
    c += p[k];
    if (u < c) return k;
  }
  return K - 1;
}

void check_shapes(const SiteGraph& graph, const LikelihoodTable& table, const MrfParams& m) {
  if (table.n != graph.n) throw UsageError("likelihood table does not match the site graph");
  if (table.K != m.K()) throw UsageError("likelihood table and MRF disagree on the class count");
}

}  // namespace

void gibbs_sweep(LabelField& z, const SiteGraph& graph, const LikelihoodTable& table, const MrfParams& m,
                 std::uint64_t seed, std::uint64_t stream, std::uint64_t sweep) {
  check_shapes(graph, table, m);
  const int K = table.K;
  for (const auto* color : {&graph.black, &graph.white}) {
    parallel_for(color->size(), [&](std::size_t t) {
      const std::size_t i = (*color)[t];
      std::uint8_t counts[kMaxClasses];
      double w[kMaxClasses];
      site_conditional(graph, z, table, m, i, counts, w);
      z.z[i] = draw(w, K, counter_uniform({seed, stream, sweep, i}));
    });
  }
}

LabelField sample_pointwise(const SiteGraph& graph, const LikelihoodTable& table, const MrfParams& m,
                            std::uint64_t seed, std::uint64_t stream) {
  check_shapes(graph, table, m);
  const std::vector<double> probs = pointwise_posteriors(table, m);
  LabelField z;
  z.K = table.K;
  z.z.resize(graph.n);
  // Sweep index ~0 keeps these draws apart from every sampler sweep.
  parallel_for(graph.n, [&](std::size_t i) {
    z.z[i] = draw(probs.data() + i * table.K, table.K, counter_uniform({seed, stream, ~std::uint64_t{0}, i}));
  });
  return z;
}

PosteriorField estimate_posteriors(const SiteGraph& graph, const LikelihoodTable& table, const MrfParams& m,
                                   const PosteriorOptions& opts, const LabelField* warm_start) {
  check_shapes(graph, table, m);
  if (opts.samples < 1) throw UsageError("posterior estimation needs at least one retained sample");
  const int K = table.K;
  PosteriorField post;
  post.K = K;
  post.n = graph.n;

  if (!opts.spatial) {
    post.probs = pointwise_posteriors(table, m);
    post.sample_count = 1;
    if (warm_start) post.final_labels = *warm_start;
    if (opts.keep_stats) post.stats = nonspatial_stats(post);
    return post;
  }

  LabelField z;
  if (warm_start && warm_start->z.size() == graph.n && warm_start->K == K)
    z = *warm_start;
  else
    z = sample_pointwise(graph, table, m, opts.seed, opts.stream);

  for (int t = 0; t < opts.burn_in; ++t) gibbs_sweep(z, graph, table, m, opts.seed, opts.stream, t);

  const int J = opts.samples;
  post.probs.assign(graph.n * K, 0.0);
  post.sample_count = J;
  if (opts.keep_stats) {
    post.stats.K = K;
    post.stats.n = graph.n;
    post.stats.sample_weight.assign(J, 1.0 / J);
    post.stats.counts.resize(static_cast<std::size_t>(J) * graph.n * K);
    post.stats.resp.resize(static_cast<std::size_t>(J) * graph.n * K);
  }
  for (int s = 0; s < J; ++s) {
    gibbs_sweep(z, graph, table, m, opts.seed, opts.stream, static_cast<std::uint64_t>(opts.burn_in) + s);
    // Rao-Blackwellization: every site's conditional given the retained state.
    parallel_for(graph.n, [&](std::size_t i) {
      std::uint8_t counts[kMaxClasses];
      double w[kMaxClasses];
      site_conditional(graph, z, table, m, i, counts, w);
      double* acc = post.probs.data() + i * K;
      for (int k = 0; k < K; ++k) acc[k] += w[k];
      if (opts.keep_stats) {
        const std::size_t off = (static_cast<std::size_t>(s) * graph.n + i) * K;
        std::copy(counts, counts + K, post.stats.counts.begin() + off);
        std::copy(w, w + K, post.stats.resp.begin() + off);
      }
    });
  }
  const double inv = 1.0 / J;
  for (double& p : post.probs) p *= inv;
  post.final_labels = std::move(z);
  return post;
}

}  // namespace nigmrf
