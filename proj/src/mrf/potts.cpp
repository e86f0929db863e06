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
#include "nigmrf/mrf.hpp"
#include "nigmrf/parallel.hpp"

namespace nigmrf {

namespace {

constexpr int kMaxClasses = 64;

// In-place softmax of K log weights; returns log of the normalizer.
double softmax_inplace(double* w, int K) {
  const double mx = *std::max_element(w, w + K);
  double s = 0.0;
  for (int k = 0; k < K; ++k) {
    w[k] = std::exp(w[k] - mx);
    s += w[k];
  }
  for (int k = 0; k < K; ++k) w[k] /= s;
  return mx + std::log(s);
}

}  // namespace

void validate(const MrfParams& m) {
  if (m.K() < 1) throw ParameterError("MRF: need at least one class");
  if (m.K() > kMaxClasses) throw ParameterError("MRF: at most " + std::to_string(kMaxClasses) + " classes");
  if (m.alpha(0) != 0.0) throw ParameterError("MRF: alpha of the first class must be exactly 0");
  if (!m.alpha.allFinite() || !std::isfinite(m.beta)) throw ParameterError("MRF: non-finite potentials");
}

void potts_log_weights(const MrfParams& m, const std::uint8_t* counts, double* out) {
  for (int k = 0; k < m.K(); ++k) out[k] = -m.alpha(k) - m.beta * counts[k];
}

Vec potts_conditional(const MrfParams& m, std::span<const int> neighbor_labels) {
  std::uint8_t counts[kMaxClasses] = {};
  for (int l : neighbor_labels) {
    if (l < 0 || l >= m.K()) throw UsageError("neighbor label out of range");
    ++counts[l];
  }
  Vec p(m.K());
  potts_log_weights(m, counts, p.data());
  softmax_inplace(p.data(), m.K());
  return p;
}

void neighbor_counts(const SiteGraph& graph, const LabelField& z, std::size_t i, std::uint8_t* counts) {
  std::fill(counts, counts + z.K, std::uint8_t{0});
  for (std::uint32_t j : graph.neighbors_of(i)) ++counts[z.z[j]];
}

double potts_log_density_unnorm(const SiteGraph& graph, const LabelField& z, const MrfParams& m) {
  double s = 0.0;
  for (std::size_t i = 0; i < graph.n; ++i) {
    int same = 0;
    for (std::uint32_t j : graph.neighbors_of(i)) same += z.z[j] == z.z[i];
    s -= m.alpha(z.z[i]) + 0.5 * m.beta * same;
  }
  return s;
}

std::vector<double> pointwise_posteriors(const LikelihoodTable& table, const MrfParams& m) {
  const int K = table.K;
  std::vector<double> probs(table.logf.size());
  parallel_for(table.n, [&](std::size_t i) {
    double* w = probs.data() + i * K;
    for (int k = 0; k < K; ++k) w[k] = table.row(i)[k] - m.alpha(k);
    softmax_inplace(w, K);
    for (int k = 0; k < K; ++k)
      if (w[k] < 1e-300) w[k] = 0.0;
  });
  return probs;
}

double mixture_loglik(const LikelihoodTable& table, const MrfParams& m) {
  const int K = table.K;
  Vec log_prior = -m.alpha;
  const double mx = log_prior.maxCoeff();
  log_prior.array() -= mx + std::log((log_prior.array() - mx).exp().sum());
  return chunked_reduce(
      table.n, 0.0,
      [&](std::size_t b, std::size_t e) {
        double s = 0.0;
        double w[kMaxClasses];
        for (std::size_t i = b; i < e; ++i) {
          for (int k = 0; k < K; ++k) w[k] = table.row(i)[k] + log_prior(k);
          s += softmax_inplace(w, K);
        }
        return s;
      },
      [](double a, double b) { return a + b; });
}

MrfSampleStats nonspatial_stats(const PosteriorField& post) {
  MrfSampleStats st;
  st.K = post.K;
  st.n = post.n;
  st.sample_weight = {1.0};
  st.counts.assign(post.probs.size(), 0);
  st.resp = post.probs;
  return st;
}

namespace {

int free_count(int K, bool spatial) { return K - 1 + (spatial ? 1 : 0); }

// Accumulates value, gradient and negative covariance (Hessian) contributions of
// one chunk of (sample, site) pairs.
struct MrfAccum {
  double value = 0.0;
  Vec grad;
  Mat hess;
};

MrfAccum accumulate(const MrfSampleStats& st, const MrfParams& m, bool spatial, bool want_grad, bool want_hess) {
  const int K = st.K;
  const int P = free_count(K, spatial);
  const std::size_t total = static_cast<std::size_t>(st.samples()) * st.n;
  MrfAccum init;
  init.grad = Vec::Zero(P);
  init.hess = Mat::Zero(want_hess ? P : 0, want_hess ? P : 0);
  return chunked_reduce(
      total, init,
      [&](std::size_t b, std::size_t e) {
        MrfAccum acc = init;
        double lw[kMaxClasses];
        for (std::size_t t = b; t < e; ++t) {
          const double ws = st.sample_weight[t / st.n];
          const std::uint8_t* cnt = st.counts.data() + t * K;
          const double* r = st.resp.data() + t * K;
          potts_log_weights(m, cnt, lw);
          const double mx = *std::max_element(lw, lw + K);
          double z = 0.0;
          for (int k = 0; k < K; ++k) z += std::exp(lw[k] - mx);
          const double log_norm = mx + std::log(z);
          double rsum = 0.0, val = 0.0;
          for (int k = 0; k < K; ++k) {
            rsum += r[k];
            if (r[k] != 0.0) val += r[k] * (lw[k] - log_norm);
          }
          acc.value += ws * val;
          if (!want_grad && !want_hess) continue;
          double pi[kMaxClasses];
          double e_n = 0.0, r_n = 0.0;
          for (int k = 0; k < K; ++k) {
            pi[k] = std::exp(lw[k] - log_norm);
            e_n += pi[k] * cnt[k];
            r_n += r[k] * cnt[k];
          }
          // Features phi(k) = (-e_k for alpha_2..K, -n_k for beta).
          if (want_grad) {
            for (int k = 1; k < K; ++k) acc.grad(k - 1) += ws * (-r[k] + rsum * pi[k]);
            if (spatial) acc.grad(K - 1) += ws * (-r_n + rsum * e_n);
          }
          if (want_hess) {
            for (int k = 1; k < K; ++k) {
              for (int l = 1; l < K; ++l) acc.hess(k - 1, l - 1) -= ws * rsum * ((k == l ? pi[k] : 0.0) - pi[k] * pi[l]);
              if (spatial) {
                const double c = pi[k] * (cnt[k] - e_n);
                acc.hess(k - 1, K - 1) -= ws * rsum * c;
                acc.hess(K - 1, k - 1) -= ws * rsum * c;
              }
            }
            if (spatial) {
              double var = 0.0;
              for (int k = 0; k < K; ++k) var += pi[k] * (cnt[k] - e_n) * (cnt[k] - e_n);
              acc.hess(K - 1, K - 1) -= ws * rsum * var;
            }
          }
        }
        return acc;
      },
      [](MrfAccum a, const MrfAccum& b) {
        a.value += b.value;
        a.grad += b.grad;
        if (a.hess.size()) a.hess += b.hess;
        return a;
      });
}

}  // namespace

double mrf_q(const MrfSampleStats& stats, const MrfParams& m) {
  const double v = accumulate(stats, m, false, false, false).value;
  if (!std::isfinite(v)) throw NumericError("MRF Q value is not finite");
  return v;
}

Vec mrf_gradient(const MrfSampleStats& stats, const MrfParams& m, bool spatial) {
  Vec g = accumulate(stats, m, spatial, true, false).grad;
  if (!g.allFinite()) throw NumericError("MRF gradient is not finite");
  return g;
}

Mat mrf_hessian(const MrfSampleStats& stats, const MrfParams& m, bool spatial) {
  Mat h = accumulate(stats, m, spatial, false, true).hess;
  if (!h.allFinite()) throw NumericError("MRF Hessian is not finite");
  return symmetrize(h);
}

}  // namespace nigmrf
