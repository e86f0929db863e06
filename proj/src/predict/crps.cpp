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
#include <vector>

#include "nigmrf/dists.hpp"
#include "nigmrf/error.hpp"
#include "nigmrf/predict.hpp"

namespace nigmrf {

namespace {

void check(std::span<const double> probs, std::span<const ScalarComponent> comps) {
  if (probs.size() != comps.size() || comps.empty()) throw UsageError("CRPS: probabilities and components differ in length");
}

double draw_mixing(const ScalarComponent& c, Rng& rng) { return c.gaussian ? 1.0 : gig_sample(c.gig, rng); }

}  // namespace

ScalarComponent scalar_component(const GhConditional& c, int a) {
  const Mat sigma = spd_inverse(c.prec_factor * c.prec_factor.transpose(), "conditional covariance");
  ScalarComponent s;
  s.loc = c.loc_tilde(a);
  s.skew = c.skew_tilde(a);
  s.var = sigma(a, a);
  s.gig = c.gig;
  s.gaussian = c.gaussian;
  return s;
}

double crps_gaussian_mixture(std::span<const double> probs, std::span<const ScalarComponent> comps, double x) {
  check(probs, comps);
  const std::size_t K = comps.size();
  double e_x = 0.0, e_pair = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    if (!comps[k].gaussian) throw UsageError("closed-form CRPS needs Gaussian components");
    if (probs[k] <= 0.0) continue;
    e_x += probs[k] * folded_normal_mean(comps[k].loc - x, comps[k].var);
    for (std::size_t l = 0; l < K; ++l)
      if (probs[l] > 0.0)
        e_pair += probs[k] * probs[l] * folded_normal_mean(comps[k].loc - comps[l].loc, comps[k].var + comps[l].var);
  }
  return std::max(0.0, e_x - 0.5 * e_pair);
}

double crps_nig_mixture(std::span<const double> probs, std::span<const ScalarComponent> comps, double x, int n,
                        Rng& rng) {
  check(probs, comps);
  if (n < 1) throw UsageError("CRPS: need at least one draw per class");
  const std::size_t K = comps.size();
  // Two independent sets of mixing draws per class: V (first) and V' (second).
  std::vector<double> v(2 * K * n, 1.0);
  for (std::size_t k = 0; k < K; ++k)
    if (probs[k] > 0.0)
      for (int j = 0; j < 2 * n; ++j) v[k * 2 * n + j] = draw_mixing(comps[k], rng);
  auto first = [&](std::size_t k, int j) { return v[k * 2 * n + j]; };
  auto second = [&](std::size_t k, int j) { return v[k * 2 * n + n + j]; };

  double e_x = 0.0, e_pair = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    if (probs[k] <= 0.0) continue;
    const ScalarComponent& ck = comps[k];
    double s = 0.0;
    for (int j = 0; j < 2 * n; ++j) {
      const double vk = v[k * 2 * n + j];
      s += folded_normal_mean(ck.loc + ck.skew * vk - x, ck.var * vk);
    }
    e_x += probs[k] * s / (2.0 * n);
    for (std::size_t l = 0; l < K; ++l) {
      if (probs[l] <= 0.0) continue;
      const ScalarComponent& cl = comps[l];
      double t = 0.0;
      for (int j = 0; j < n; ++j) {
        const double vk = first(k, j), vl = second(l, j);
        t += folded_normal_mean(ck.loc - cl.loc + ck.skew * vk - cl.skew * vl, ck.var * vk + cl.var * vl);
      }
      e_pair += probs[k] * probs[l] * t / n;
    }
  }
  return std::max(0.0, e_x - 0.5 * e_pair);
}

double crps_naive_mixture(std::span<const double> probs, std::span<const ScalarComponent> comps, double x, int n,
                          Rng& rng) {
  check(probs, comps);
  if (n < 1) throw UsageError("CRPS: need at least one draw");
  auto draw = [&]() {
    double u = rng.uniform(), c = 0.0;
    std::size_t k = 0;
    for (; k + 1 < comps.size(); ++k) {
      c += probs[k];
      if (u < c) break;
    }
    const ScalarComponent& ck = comps[k];
    const double vk = draw_mixing(ck, rng);
    return ck.loc + ck.skew * vk + std::sqrt(ck.var * vk) * rng.normal();
  };
  double e_x = 0.0, e_pair = 0.0;
  for (int j = 0; j < n; ++j) {
    const double y = draw(), y2 = draw();
    e_x += std::abs(y - x);
    e_pair += std::abs(y - y2);
  }
  return (e_x - 0.5 * e_pair) / n;
}

}  // namespace nigmrf
