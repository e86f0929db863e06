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

#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "nigmrf/error.hpp"
#include "nigmrf/estimate.hpp"

namespace nigmrf {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
// Largest per-block move (infinity norm) in standardized unconstrained coordinates.
constexpr double kMaxStep = 1.0;

// Tiers 2 and 3 give a PD diagonal stand-in for -H; its inverse keeps the step in parameter units.
Vec direction(const Scaling& sc, const Vec& g) {
  if (sc.tier == ScalingTier::kNewton) return sc.S * g;
  return g.cwiseQuotient(sc.S.diagonal());
}

Vec capped(Vec dir) {
  const double m = dir.size() ? dir.cwiseAbs().maxCoeff() : 0.0;
  if (m > kMaxStep) dir *= kMaxStep / m;
  return dir;
}

struct Standardizer {
  Vec center;
  Vec scale;

  double log_scale_sum() const { return scale.array().log().sum(); }

  SiteData apply(const SiteData& x) const {
    SiteData out = x;
    for (int c = 0; c < x.d; ++c)
      for (std::size_t i = 0; i < x.n; ++i) out.at(c, i) = (x.at(c, i) - center(c)) / scale(c);
    return out;
  }

  MixtureModel to_standard(const MixtureModel& m) const {
    MixtureModel out = m;
    for (auto& c : out.classes) {
      c.loc = (c.loc - center).cwiseQuotient(scale);
      c.skew = c.skew.cwiseQuotient(scale);
      c.prec_factor = scale.asDiagonal() * c.prec_factor;
    }
    return out;
  }

  MixtureModel to_original(const MixtureModel& m) const {
    MixtureModel out = m;
    for (auto& c : out.classes) {
      c.loc = center + scale.cwiseProduct(c.loc);
      c.skew = scale.cwiseProduct(c.skew);
      c.prec_factor = scale.cwiseInverse().asDiagonal() * c.prec_factor;
    }
    return out;
  }
};

Standardizer make_standardizer(const SiteData& x, bool enabled) {
  Standardizer s;
  s.center = Vec::Zero(x.d);
  s.scale = Vec::Ones(x.d);
  if (!enabled || x.n < 2) return s;
  for (int c = 0; c < x.d; ++c) {
    const double* v = x.channel(c);
    const double mean = std::accumulate(v, v + x.n, 0.0) / x.n;
    double ss = 0.0;
    for (std::size_t i = 0; i < x.n; ++i) ss += (v[i] - mean) * (v[i] - mean);
    const double sd = std::sqrt(ss / (x.n - 1));
    s.center(c) = mean;
    s.scale(c) = sd > 0.0 ? sd : 1.0;
  }
  return s;
}

// Q value of the class blocks only (data term), -inf if the candidate is unusable.
double data_q(const MixtureModel& m, const PosteriorField& post, const SiteData& data) {
  try {
    double q = 0.0;
    for (int k = 0; k < m.K(); ++k) q += class_q(m.classes[k], m.family, data, class_weights(post, k));
    return q;
  } catch (const Error&) {
    return -INFINITY;
  }
}

double safe_mrf_q(const MrfSampleStats& st, const MrfParams& m) {
  try {
    return mrf_q(st, m);
  } catch (const Error&) {
    return -INFINITY;
  }
}

}  // namespace

TrainingSet make_training_set(std::span<const VolumeGrid* const> grids) {
  if (grids.empty()) throw UsageError("training needs at least one volume");
  const int d = grids[0]->channels;
  std::vector<SiteGraph> parts;
  for (std::size_t s = 0; s < grids.size(); ++s) {
    if (grids[s]->channels != d) throw UsageError("training volumes disagree on the channel count");
    parts.push_back(SiteGraph::from_mask(grids[s]->dims, grids[s]->mask, static_cast<std::uint32_t>(s)));
  }
  TrainingSet t;
  t.graph = SiteGraph::concat(parts);
  std::vector<int> all(d);
  std::iota(all.begin(), all.end(), 0);
  t.data = gather_sites(grids, t.graph, all);
  if (t.graph.n == 0) throw UsageError("training volumes have no in-mask voxels");
  return t;
}

FitResult em_gradient_fit(const TrainingSet& train, const MixtureModel& init, const FitOptions& opts) {
  validate(init);
  if (train.data.d != init.channels) throw UsageError("training data channels do not match the model");
  if (opts.samples < 1 || opts.max_iters < 0) throw UsageError("invalid fit options");

  const Standardizer st = make_standardizer(train.data, opts.standardize);
  const SiteData data = st.apply(train.data);
  const double n_sites = static_cast<double>(data.n);
  const double q_shift = n_sites * st.log_scale_sum();  // Q in original units = standardized - shift

  MixtureModel model = st.to_standard(init);
  const int K = model.K();
  const int cs = class_param_count(model.family, model.channels);
  const int ms = mrf_param_count(K, model.spatial);

  FitResult result;
  result.termination = "max_iters";
  LabelField labels;
  double last_q = kNaN;
  int iters_done = 0;

  for (int it = 0; it < opts.max_iters; ++it) {
    const auto t0 = std::chrono::steady_clock::now();
    TraceRow row;
    row.restart = opts.restart;
    row.iteration = it + 1;

    LikelihoodTable table;
    try {
      table = likelihood_table(model, data);
    } catch (const NumericError&) {
      result.termination = "non_finite";
      break;
    }
    PosteriorOptions po;
    po.spatial = model.spatial;
    po.samples = opts.samples;
    po.burn_in = (it == 0 || labels.z.empty()) ? opts.burn_in : 0;
    po.seed = opts.seed;
    po.stream = static_cast<std::uint64_t>(it);
    po.keep_stats = true;
    const PosteriorField post = estimate_posteriors(train.graph, table, model.mrf, po, labels.z.empty() ? nullptr : &labels);
    if (model.spatial) labels = post.final_labels;
    row.loglik = model.spatial ? kNaN : mixture_loglik(table, model.mrf) - q_shift;
    const MrfSampleStats& stats = post.stats;

    // Search directions, one conditioned block per class and one for the MRF.
    Vec theta_mix(K * cs), dir_mix(K * cs), grad(K * cs + ms);
    int tier = 1;
    for (int k = 0; k < K; ++k) {
      const std::vector<double> w = class_weights(post, k);
      const Vec th = pack_class(model.classes[k], model.family);
      Vec g;
      Scaling sc;
      try {
        g = class_gradient(model.classes[k], model.family, data, w);
        sc = condition_scaling(class_hessian(model.classes[k], model.family, data, w));
      } catch (const NumericError&) {
        result.termination = "non_finite";
        break;
      }
      tier = std::max(tier, static_cast<int>(sc.tier));
      theta_mix.segment(k * cs, cs) = th;
      dir_mix.segment(k * cs, cs) = capped(direction(sc, g));
      grad.segment(k * cs, cs) = g;
    }
    if (result.termination == "non_finite") break;
    Vec theta_mrf = pack_mrf(model.mrf, model.spatial), dir_mrf = Vec::Zero(ms);
    if (ms > 0) {
      const Vec g = mrf_gradient(stats, model.mrf, model.spatial);
      const Scaling sc = condition_scaling(mrf_hessian(stats, model.mrf, model.spatial));
      tier = std::max(tier, static_cast<int>(sc.tier));
      dir_mrf = capped(direction(sc, g));
      grad.tail(ms) = g;
    }
    row.tier = tier;
    row.grad_norm = grad.norm();
    if (!dir_mix.allFinite() || !dir_mrf.allFinite()) {
      result.termination = "non_finite";
      break;
    }

    auto mix_at = [&](double step) {
      MixtureModel cand = model;
      for (int k = 0; k < K; ++k)
        cand.classes[k] = unpack_class(theta_mix.segment(k * cs, cs) + step * dir_mix.segment(k * cs, cs),
                                       model.family, model.channels);
      return cand;
    };
    auto mrf_at = [&](double step) { return unpack_mrf(theta_mrf + step * dir_mrf, K, model.spatial, model.mrf.beta); };

    const double q_data0 = data_q(model, post, data);
    const double q_mrf0 = safe_mrf_q(stats, model.mrf);
    const double q0 = q_data0 + q_mrf0;

    // MRF block: full Newton step, halved until its part of Q does not decrease.
    double mrf_step = 0.0, q_mrf1 = q_mrf0;
    if (ms > 0) {
      const LineSearchResult lm =
          line_search(q_mrf0, [&](double s) { return safe_mrf_q(stats, mrf_at(s)); }, opts.max_halvings);
      if (lm.ok) {
        mrf_step = lm.step;
        q_mrf1 = lm.q;
      }
    }
    auto search_mix = [&](double q_mrf) {
      return line_search(q0, [&](double s) { return data_q(mix_at(s), post, data) + q_mrf; }, opts.max_halvings);
    };
    LineSearchResult ls = search_mix(q_mrf1);
    if (!ls.ok && mrf_step > 0.0) {
      mrf_step *= 0.5;
      q_mrf1 = safe_mrf_q(stats, mrf_at(mrf_step));
      if (!(q_mrf1 >= q_mrf0)) {
        mrf_step = 0.0;
        q_mrf1 = q_mrf0;
      }
      ls = search_mix(q_mrf1);
    }
    if (!ls.ok) {
      result.termination = "line_search";
      break;
    }

    const double scale = std::max(1.0, theta_mix.cwiseAbs().maxCoeff());
    const double rel_step = dir_mix.size() ? ls.step * dir_mix.cwiseAbs().maxCoeff() / scale : 0.0;
    model = mix_at(ls.step);
    model.mrf = mrf_at(mrf_step);

    row.q_before = q0 - q_shift;
    row.q_after = ls.q - q_shift;
    row.step = ls.step;
    row.mrf_step = mrf_step;
    row.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    result.trace.push_back(row);
    last_q = row.q_after;
    iters_done = it + 1;

    const bool small_step = rel_step < opts.step_tol && (ms == 0 || mrf_step * dir_mrf.cwiseAbs().maxCoeff() <
                                                                        opts.step_tol * std::max(1.0, theta_mrf.cwiseAbs().maxCoeff()));
    const bool small_gain = opts.q_tol > 0.0 && (ls.q - q0) / n_sites < opts.q_tol;
    if (small_step || small_gain) {
      result.converged = true;
      result.termination = "converged";
      break;
    }
  }

  result.model = st.to_original(model);
  result.model.fit.seed = opts.seed;
  result.model.fit.iterations = iters_done;
  result.model.fit.final_q = last_q;
  result.model.fit.converged = result.converged;
  return result;
}

std::vector<Vec> location_std_errors(const MixtureModel& m, const TrainingSet& train, const PosteriorOptions& po) {
  validate(m);
  if (train.data.d != m.channels) throw UsageError("training data channels do not match the model");
  const LikelihoodTable table = likelihood_table(m, train.data);
  PosteriorOptions opts = po;
  opts.spatial = m.spatial;
  const PosteriorField post = estimate_posteriors(train.graph, table, m.mrf, opts);
  std::vector<Vec> out;
  for (int k = 0; k < m.K(); ++k) {
    const Mat info = -class_hessian(m.classes[k], m.family, train.data, class_weights(post, k));
    const Eigen::LLT<Mat> llt(info);
    if (llt.info() != Eigen::Success) throw NumericError("class " + std::to_string(k) + ": information not positive definite");
    const Mat cov = llt.solve(Mat::Identity(info.rows(), info.cols()));
    out.push_back(cov.diagonal().head(m.channels).cwiseSqrt());
  }
  return out;
}

}  // namespace nigmrf
