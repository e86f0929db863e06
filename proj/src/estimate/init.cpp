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
#include <limits>
#include <numeric>
#include <set>
#include <string>

#include "nigmrf/error.hpp"
#include "nigmrf/estimate.hpp"
#include "nigmrf/predict.hpp"
#include "nigmrf/rng.hpp"

namespace nigmrf {

namespace {

struct Cloud {
  int d = 0;
  std::vector<Vec> points;
};

Vec global_mean(const SiteData& x) {
  Vec m = Vec::Zero(x.d);
  for (int c = 0; c < x.d; ++c) {
    const double* v = x.channel(c);
    m(c) = std::accumulate(v, v + x.n, 0.0) / x.n;
  }
  return m;
}

Mat global_cov(const SiteData& x, const Vec& mean) {
  Mat s = Mat::Zero(x.d, x.d);
  Vec r(x.d);
  for (std::size_t i = 0; i < x.n; ++i) {
    for (int c = 0; c < x.d; ++c) r(c) = x.at(c, i) - mean(c);
    s.noalias() += r * r.transpose();
  }
  return s / std::max<std::size_t>(1, x.n - 1);
}

Vec point(const SiteData& x, std::size_t i) {
  Vec p(x.d);
  for (int c = 0; c < x.d; ++c) p(c) = x.at(c, i);
  return p;
}

void require_distinct(const SiteData& x, int K) {
  std::set<std::vector<double>> seen;
  for (std::size_t i = 0; i < x.n && static_cast<int>(seen.size()) < K; ++i) seen.insert(x.point(i));
  if (static_cast<int>(seen.size()) < K)
    throw ParameterError("K = " + std::to_string(K) + " exceeds the number of distinct data points");
}

Cloud subsample(const SiteData& x, int count, Rng& rng) {
  Cloud c;
  c.d = x.d;
  std::vector<std::size_t> idx(x.n);
  std::iota(idx.begin(), idx.end(), 0);
  const std::size_t m = std::min<std::size_t>(x.n, static_cast<std::size_t>(std::max(count, 1)));
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.uniform() * (x.n - i));
    std::swap(idx[i], idx[std::min(j, x.n - 1)]);
    c.points.push_back(point(x, idx[i]));
  }
  return c;
}

// Mahalanobis-free distances on per-channel standardized coordinates.
double dist2(const Vec& a, const Vec& b, const Vec& inv_scale) { return (a - b).cwiseProduct(inv_scale).squaredNorm(); }

std::vector<Vec> kmeans(const Cloud& cloud, int K, const Vec& inv_scale, Rng& rng) {
  const auto& pts = cloud.points;
  std::vector<Vec> centers;
  centers.push_back(pts[static_cast<std::size_t>(rng.uniform() * pts.size()) % pts.size()]);
  std::vector<double> d2(pts.size(), std::numeric_limits<double>::infinity());
  while (static_cast<int>(centers.size()) < K) {
    double total = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      d2[i] = std::min(d2[i], dist2(pts[i], centers.back(), inv_scale));
      total += d2[i];
    }
    double u = rng.uniform() * total;
    std::size_t pick = pts.size() - 1;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      u -= d2[i];
      if (u <= 0.0 && d2[i] > 0.0) {
        pick = i;
        break;
      }
    }
    centers.push_back(pts[pick]);
  }
  std::vector<int> assign(pts.size(), -1);
  for (int iter = 0; iter < 100; ++iter) {
    bool changed = false;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      int best = 0;
      double bd = dist2(pts[i], centers[0], inv_scale);
      for (int k = 1; k < K; ++k) {
        const double dd = dist2(pts[i], centers[k], inv_scale);
        if (dd < bd) {
          bd = dd;
          best = k;
        }
      }
      if (assign[i] != best) {
        assign[i] = best;
        changed = true;
      }
    }
    std::vector<Vec> sum(K, Vec::Zero(cloud.d));
    std::vector<int> cnt(K, 0);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      sum[assign[i]] += pts[i];
      ++cnt[assign[i]];
    }
    for (int k = 0; k < K; ++k)
      if (cnt[k] > 0) centers[k] = sum[k] / cnt[k];
    if (!changed) break;
  }
  return centers;
}

// Ward agglomeration on the cloud, cut at K clusters; returns the centroids.
std::vector<Vec> ward(const Cloud& cloud, int K, const Vec& inv_scale) {
  const std::size_t n = cloud.points.size();
  std::vector<Vec> cent;
  std::vector<double> size(n, 1.0);
  std::vector<bool> alive(n, true);
  for (const Vec& p : cloud.points) cent.push_back(p.cwiseProduct(inv_scale));
  std::size_t clusters = n;
  while (clusters > static_cast<std::size_t>(K)) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t bi = 0, bj = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!alive[i]) continue;
      for (std::size_t j = i + 1; j < n; ++j) {
        if (!alive[j]) continue;
        const double cost = size[i] * size[j] / (size[i] + size[j]) * (cent[i] - cent[j]).squaredNorm();
        if (cost < best) {
          best = cost;
          bi = i;
          bj = j;
        }
      }
    }
    cent[bi] = (size[bi] * cent[bi] + size[bj] * cent[bj]) / (size[bi] + size[bj]);
    size[bi] += size[bj];
    alive[bj] = false;
    --clusters;
  }
  std::vector<Vec> out;
  for (std::size_t i = 0; i < n; ++i)
    if (alive[i]) out.push_back(cent[i].cwiseQuotient(inv_scale));
  return out;
}

// Hard-assigns every site to the nearest center and turns the clusters into classes.
MixtureModel model_from_centers(const SiteData& x, const std::vector<Vec>& centers, const Vec& inv_scale,
                                const Mat& fallback_cov, const InitOptions& opts) {
  const int K = opts.K;
  const int d = x.d;
  std::vector<Vec> sum(K, Vec::Zero(d));
  std::vector<Mat> sq(K, Mat::Zero(d, d));
  std::vector<double> cnt(K, 0.0);
  for (std::size_t i = 0; i < x.n; ++i) {
    const Vec p = point(x, i);
    int best = 0;
    double bd = dist2(p, centers[0], inv_scale);
    for (int k = 1; k < K; ++k) {
      const double dd = dist2(p, centers[k], inv_scale);
      if (dd < bd) {
        bd = dd;
        best = k;
      }
    }
    sum[best] += p;
    sq[best].noalias() += p * p.transpose();
    cnt[best] += 1.0;
  }
  MixtureModel m = make_model(opts.family, opts.spatial, K, d);
  const double total = static_cast<double>(x.n);
  for (int k = 0; k < K; ++k) {
    Vec mean = centers[k];
    Mat cov = fallback_cov;
    if (cnt[k] > d + 1) {
      mean = sum[k] / cnt[k];
      cov = (sq[k] - cnt[k] * mean * mean.transpose()) / (cnt[k] - 1.0);
    }
    cov += 1e-6 * fallback_cov.diagonal().asDiagonal();
    Mat prec = spd_inverse(symmetrize(cov), "cluster covariance");
    if (opts.family == Family::kNig) prec *= std::sqrt(opts.kurt / 2.0);
    m.classes[k].loc = mean;
    m.classes[k].prec_factor = spd_factor(prec, "cluster precision");
    m.classes[k].kurt = opts.kurt;
    const double share = std::max(cnt[k], 1.0) / total;
    const double share0 = std::max(cnt[0], 1.0) / total;
    m.mrf.alpha(k) = k == 0 ? 0.0 : std::log(share0 / share);
  }
  return m;
}

}  // namespace

InitStrategy parse_init_strategy(std::string_view name) {
  if (name == "random") return InitStrategy::kRandom;
  if (name == "kmeans") return InitStrategy::kKmeans;
  if (name == "hierarchical") return InitStrategy::kHierarchical;
  if (name == "from-model") return InitStrategy::kFromModel;
  if (name == "constant") return InitStrategy::kConstant;
  throw UsageError("unknown init strategy '" + std::string(name) + "'");
}

MixtureModel initialize(const SiteData& x, InitStrategy strategy, const InitOptions& opts) {
  if (opts.K < 1) throw ParameterError("K must be at least 1");
  if (!(opts.kurt > 0.0)) throw ParameterError("initial kurt must be positive");
  const int d = x.d;

  if (strategy == InitStrategy::kFromModel) {
    if (!opts.from) throw UsageError("from-model initialization needs a source model");
    const MixtureModel& src = *opts.from;
    validate(src);
    if (src.channels != d) throw UsageError("source model channels do not match the data");
    MixtureModel m = src;
    m.family = opts.family;
    m.spatial = opts.spatial;
    m.fit = {};
    if (!opts.spatial) m.mrf.beta = 0.0;
    if (src.family == Family::kGaussian && opts.family == Family::kNig) {
      // Cov of NIG with zero skew is E[V] Q^{-1} = sqrt(kurt/2) Q^{-1}.
      const double f = std::pow(opts.kurt / 2.0, 0.25);
      for (auto& c : m.classes) {
        c.prec_factor *= f;
        c.skew = Vec::Zero(d);
        c.kurt = opts.kurt;
      }
    } else if (opts.family == Family::kGaussian) {
      for (auto& c : m.classes) {
        c.skew = Vec::Zero(d);
        c.kurt = 1.0;
      }
    }
    return m;
  }

  if (x.n == 0) throw UsageError("initialization needs data");
  require_distinct(x, opts.K);

  if (strategy == InitStrategy::kConstant) {
    MixtureModel m = make_model(opts.family, opts.spatial, opts.K, d);
    // Locations at evenly spaced quantiles of the first channel, so classes differ.
    std::vector<std::size_t> order(x.n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x.at(0, a) < x.at(0, b); });
    for (int k = 0; k < opts.K; ++k) {
      const std::size_t r = static_cast<std::size_t>((k + 0.5) / opts.K * (x.n - 1));
      m.classes[k].loc = point(x, order[r]);
      m.classes[k].kurt = opts.family == Family::kNig ? opts.kurt : 1.0;
    }
    return m;
  }

  Rng rng({opts.seed, 0x696e6974ULL});
  const Vec mean = global_mean(x);
  Mat cov = global_cov(x, mean);
  for (int c = 0; c < d; ++c)
    if (!(cov(c, c) > 0.0)) cov(c, c) = 1.0;
  const Vec inv_scale = cov.diagonal().cwiseSqrt().cwiseInverse();

  if (strategy == InitStrategy::kRandom) {
    MixtureModel m = make_model(opts.family, opts.spatial, opts.K, d);
    Mat prec = spd_inverse(cov, "data covariance") * std::pow(static_cast<double>(opts.K), 2.0 / d);
    if (opts.family == Family::kNig) prec *= std::sqrt(opts.kurt / 2.0);
    const Mat L = spd_factor(prec, "initial precision");
    for (int k = 0; k < opts.K; ++k) {
      const std::size_t i = std::min<std::size_t>(x.n - 1, static_cast<std::size_t>(rng.uniform() * x.n));
      m.classes[k].loc = point(x, i);
      m.classes[k].prec_factor = L;
      m.classes[k].kurt = opts.family == Family::kNig ? opts.kurt : 1.0;
    }
    return m;
  }

  const int budget = strategy == InitStrategy::kHierarchical ? std::min(opts.subsample, 600) : opts.subsample;
  Cloud cloud = subsample(x, std::max(budget, opts.K), rng);
  std::vector<Vec> centers = strategy == InitStrategy::kKmeans ? kmeans(cloud, opts.K, inv_scale, rng)
                                                               : ward(cloud, opts.K, inv_scale);
  return model_from_centers(x, centers, inv_scale, cov, opts);
}

double training_mae(const MixtureModel& m, const TrainingSet& train, int samples, std::uint64_t seed) {
  if (m.split.empty()) throw UsageError("model selection needs a channel split");
  const SiteData predictors = [&] {
    SiteData s;
    s.d = static_cast<int>(m.split.predictors.size());
    s.n = train.data.n;
    s.values.resize(s.d * s.n);
    for (int c = 0; c < s.d; ++c)
      std::copy(train.data.channel(m.split.predictors[c]), train.data.channel(m.split.predictors[c]) + s.n,
                s.values.begin() + c * s.n);
    return s;
  }();
  PredictOptions po;
  po.sweeps = samples;
  po.seed = seed;
  po.want_median = false;
  const std::vector<double> mean = predict_mean(m, train.graph, predictors, po);
  double s = 0.0;
  const std::size_t n = train.data.n;
  for (std::size_t a = 0; a < m.split.target.size(); ++a)
    for (std::size_t i = 0; i < n; ++i) s += std::abs(mean[a * n + i] - train.data.at(m.split.target[a], i));
  return s / (n * m.split.target.size());
}

int select_model(std::span<const MixtureModel> candidates, const TrainingSet& train, int samples, std::uint64_t seed) {
  if (candidates.empty()) throw UsageError("model selection needs at least one candidate");
  int best = 0;
  double best_mae = training_mae(candidates[0], train, samples, seed);
  for (int c = 1; c < static_cast<int>(candidates.size()); ++c) {
    const double mae = training_mae(candidates[c], train, samples, seed);
    const double q = candidates[c].fit.final_q, bq = candidates[best].fit.final_q;
    if (mae < best_mae || (mae == best_mae && q > bq)) {
      best = c;
      best_mae = mae;
    }
  }
  return best;
}

}  // namespace nigmrf
