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

#include <cmath>
#include <numbers>
#include <string>

#include "nigmrf/bessel.hpp"
#include "nigmrf/error.hpp"
#include "nigmrf/estimate.hpp"
#include "nigmrf/parallel.hpp"

namespace nigmrf {

namespace {

struct Moments {
  double s0 = 0.0;
  Vec s1;
  Mat s2;
};

Moments weighted_moments(const SiteData& data, const double* w, const Vec& center) {
  const int d = data.d;
  Moments init;
  init.s1 = Vec::Zero(d);
  init.s2 = Mat::Zero(d, d);
  const kernels::PlanarView view = data.view();
  const auto& kt = kernels::active();
  return chunked_reduce(
      data.n, init,
      [&](std::size_t b, std::size_t e) {
        Moments m = init;
        kt.weighted_moments(view, b, e, w, center.data(), &m.s0, m.s1.data(), m.s2.data());
        return m;
      },
      [](Moments a, const Moments& b) {
        a.s0 += b.s0;
        a.s1 += b.s1;
        a.s2 += b.s2;
        return a;
      });
}

double weighted_sum(std::span<const double> w, const std::vector<double>& x) {
  return chunked_reduce(
      w.size(), 0.0,
      [&](std::size_t b, std::size_t e) {
        double s = 0.0;
        for (std::size_t i = b; i < e; ++i)
          if (w[i] != 0.0) s += w[i] * x[i];
        return s;
      },
      [](double a, double b) { return a + b; });
}

void check_weights(const SiteData& data, std::span<const double> w) {
  if (w.size() != data.n) throw UsageError("weight vector does not match the number of sites");
}

// Per-site posterior moments of the mixing variable, E[V | x_i] and E[1/V | x_i].
void nig_mixing_moments(const NigClassParams& p, const SiteData& data, double* logf, double* ev, double* eiv) {
  const int d = data.d;
  const Mat L = p.prec_factor;
  const Vec g = L.transpose() * p.skew;
  const double a = g.squaredNorm() + 2.0;
  const double nu = -0.5 * (d + 1);
  const double mu1 = -nu - 1.0;
  const double c0 = 0.5 * std::log(p.kurt) + log_det_from_factor(L) * 0.5 -
                    0.5 * (d + 1) * std::log(2.0 * std::numbers::pi) + std::sqrt(2.0 * p.kurt) + std::log(2.0) -
                    0.5 * nu * std::log(a);
  const kernels::PlanarView view = data.view();
  const auto& kt = kernels::active();
  for_each_chunk(data.n, [&](std::size_t, std::size_t b, std::size_t e) {
    std::vector<double> qf(e - b), cross(e - b);
    kt.quadform(view, b, e, L.data(), p.loc.data(), g.data(), qf.data(), cross.data());
    for (std::size_t i = b; i < e; ++i) {
      const double bb = qf[i - b] + p.kurt;
      const double z = std::sqrt(a * bb);
      const BesselLogPair pr = bessel_k_log_pair(mu1, z);
      // K_{nu+1} / K_nu = K_{|nu|-1} / K_{|nu|}.
      const double ratio = 1.0 / pr.ratio;
      logf[i] = c0 + cross[i - b] + pr.log_k + std::log(pr.ratio) + 0.5 * nu * std::log(bb);
      const double s = std::sqrt(bb / a);
      ev[i] = s * ratio;
      eiv[i] = (ratio - 2.0 * nu / z) / s;
    }
  });
}

}  // namespace

const MrfSampleStats& label_stats(const PosteriorField& post, MrfSampleStats& scratch) {
  if (post.stats.samples() > 0) return post.stats;
  scratch = nonspatial_stats(post);
  return scratch;
}

double class_q(const NigClassParams& p, Family family, const SiteData& data, std::span<const double> w) {
  check_weights(data, w);
  std::vector<double> logf(data.n);
  class_log_density(p, family, data, logf.data());
  const double v = weighted_sum(w, logf);
  if (!std::isfinite(v)) throw NumericError("class Q value is not finite");
  return v;
}

Vec class_gradient(const NigClassParams& p, Family family, const SiteData& data, std::span<const double> w,
                   double* value) {
  check_weights(data, w);
  const int d = data.d;
  const Mat& L = p.prec_factor;
  const Mat Q = L * L.transpose();
  const Mat sigma = spd_inverse(Q, "class precision");
  Mat M;  // d log f / dQ, symmetric
  Vec g_loc, g_skew;
  double g_logkurt = 0.0;

  if (family == Family::kGaussian) {
    const Moments mo = weighted_moments(data, w.data(), p.loc);
    g_loc = Q * mo.s1;
    M = 0.5 * mo.s0 * sigma - 0.5 * mo.s2;
    if (value) {
      std::vector<double> logf(data.n);
      class_log_density(p, family, data, logf.data());
      *value = weighted_sum(w, logf);
    }
  } else {
    std::vector<double> logf(data.n), ev(data.n), eiv(data.n), wiv(data.n);
    nig_mixing_moments(p, data, logf.data(), ev.data(), eiv.data());
    for (std::size_t i = 0; i < data.n; ++i) wiv[i] = w[i] * eiv[i];
    const Moments mw = weighted_moments(data, w.data(), p.loc);
    const Moments miv = weighted_moments(data, wiv.data(), p.loc);
    const double w_v = weighted_sum(w, ev);
    const Vec qg = Q * p.skew;
    g_loc = Q * miv.s1 - qg * mw.s0;
    g_skew = Q * mw.s1 - qg * w_v;
    const double kurt = p.kurt;
    g_logkurt = kurt * (mw.s0 * (0.5 / kurt + 1.0 / std::sqrt(2.0 * kurt)) - 0.5 * miv.s0);
    const Mat cross = p.skew * mw.s1.transpose();
    M = 0.5 * mw.s0 * sigma + 0.5 * (cross + cross.transpose()) - 0.5 * w_v * p.skew * p.skew.transpose() -
        0.5 * miv.s2;
    if (value) *value = weighted_sum(w, logf);
  }

  const Mat gL = 2.0 * M * L;
  Vec g(class_param_count(family, d));
  int o = 0;
  for (int i = 0; i < d; ++i) g(o++) = g_loc(i);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j <= i; ++j) g(o++) = i == j ? gL(i, i) * L(i, i) : gL(i, j);
  if (family == Family::kNig) {
    for (int i = 0; i < d; ++i) g(o++) = g_skew(i);
    g(o++) = g_logkurt;
  }
  if (!g.allFinite()) throw NumericError("non-finite gradient");
  return g;
}

Mat class_hessian(const NigClassParams& p, Family family, const SiteData& data, std::span<const double> w) {
  const int d = data.d;
  const Vec theta = pack_class(p, family);
  const int P = static_cast<int>(theta.size());
  Mat H(P, P);
  for (int j = 0; j < P; ++j) {
    const double h = 1e-4 * std::max(1.0, std::abs(theta(j)));
    Vec tp = theta, tm = theta;
    tp(j) += h;
    tm(j) -= h;
    const Vec gp = class_gradient(unpack_class(tp, family, d), family, data, w);
    const Vec gm = class_gradient(unpack_class(tm, family, d), family, data, w);
    H.col(j) = (gp - gm) / (2.0 * h);
  }
  return symmetrize(H);
}

std::vector<double> class_weights(const PosteriorField& post, int k) {
  std::vector<double> w(post.n);
  for (std::size_t i = 0; i < post.n; ++i) w[i] = post.probs[i * post.K + k];
  return w;
}

Vec data_term_gradient(const MixtureModel& m, const SiteData& data, const PosteriorField& post) {
  const int cs = class_param_count(m.family, m.channels);
  Vec g(m.K() * cs);
  for (int k = 0; k < m.K(); ++k) {
    try {
      g.segment(k * cs, cs) = class_gradient(m.classes[k], m.family, data, class_weights(post, k));
    } catch (const NumericError& e) {
      throw NumericError("class " + std::to_string(k + 1) + ": " + e.what());
    }
  }
  return g;
}

Mat approx_hessian(const MixtureModel& m, const SiteData& data, const PosteriorField& post) {
  const int cs = class_param_count(m.family, m.channels);
  const int ms = mrf_param_count(m.K(), m.spatial);
  Mat H = Mat::Zero(m.K() * cs + ms, m.K() * cs + ms);
  for (int k = 0; k < m.K(); ++k)
    H.block(k * cs, k * cs, cs, cs) = class_hessian(m.classes[k], m.family, data, class_weights(post, k));
  if (ms > 0) {
    MrfSampleStats local;
    H.bottomRightCorner(ms, ms) = mrf_hessian(label_stats(post, local), m.mrf, m.spatial);
  }
  if (!H.allFinite()) throw NumericError("non-finite approximate Hessian");
  return H;
}

double q_function(const MixtureModel& candidate, const PosteriorField& post, const SiteData& data) {
  double q = 0.0;
  for (int k = 0; k < candidate.K(); ++k) q += class_q(candidate.classes[k], candidate.family, data, class_weights(post, k));
  MrfSampleStats local;
  return q + mrf_q(label_stats(post, local), candidate.mrf);
}

}  // namespace nigmrf
