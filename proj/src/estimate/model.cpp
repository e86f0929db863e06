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
#include "nigmrf/model.hpp"
#include "nigmrf/parallel.hpp"

namespace nigmrf {

std::string_view family_name(Family f) { return f == Family::kGaussian ? "gaussian" : "nig"; }

Family parse_family(std::string_view name) {
  if (name == "gaussian") return Family::kGaussian;
  if (name == "nig") return Family::kNig;
  throw UsageError("unknown family '" + std::string(name) + "' (expected gaussian or nig)");
}

GaussClassParams MixtureModel::gauss_class(int k) const {
  GaussClassParams g;
  g.mean = classes[k].loc;
  g.prec_factor = classes[k].prec_factor;
  return g;
}

double MixtureModel::class_logpdf(int k, std::span<const double> x) const {
  return family == Family::kGaussian ? gauss_logpdf(gauss_class(k), x) : nig_logpdf(classes[k], x);
}

MixtureModel MixtureModel::marginal(std::span<const int> keep) const {
  MixtureModel out = *this;
  out.channels = static_cast<int>(keep.size());
  out.split = {};
  for (int k = 0; k < K(); ++k) {
    if (family == Family::kGaussian) {
      const GaussClassParams g = gauss_marginal(gauss_class(k), keep);
      out.classes[k].loc = g.mean;
      out.classes[k].prec_factor = g.prec_factor;
      out.classes[k].skew = Vec::Zero(out.channels);
    } else {
      out.classes[k] = nig_marginal(classes[k], keep);
    }
  }
  return out;
}

GhConditional MixtureModel::class_conditional(int k, std::span<const double> x_predictors) const {
  if (family == Family::kGaussian)
    return gauss_conditional(gauss_class(k), split.target, split.predictors, x_predictors);
  return nig_conditional(classes[k], split.target, split.predictors, x_predictors);
}

Vec MixtureModel::prior() const {
  Vec p = -mrf.alpha;
  p.array() -= p.maxCoeff();
  p = p.array().exp();
  return p / p.sum();
}

void validate(const MixtureModel& m) {
  if (m.K() < 1) throw ParameterError("model needs at least one class");
  if (m.channels < 1) throw ParameterError("model needs at least one channel");
  if (m.mrf.K() != m.K()) throw ParameterError("MRF potentials do not match the class count");
  validate(m.mrf);
  if (!m.spatial && m.mrf.beta != 0.0) throw ParameterError("non-spatial model must have beta = 0");
  for (int k = 0; k < m.K(); ++k) {
    const NigClassParams& c = m.classes[k];
    if (c.dim() != m.channels) throw ParameterError("class " + std::to_string(k + 1) + " has the wrong dimension");
    try {
      if (m.family == Family::kGaussian) {
        validate(m.gauss_class(k));
        if (c.skew.size() != m.channels || c.skew.squaredNorm() != 0.0)
          throw ParameterError("Gaussian class must have zero skew");
      } else {
        validate(c);
      }
    } catch (const ParameterError& e) {
      throw ParameterError("class " + std::to_string(k + 1) + ": " + e.what());
    }
  }
  if (!m.split.empty()) validate(m.split, m.channels);
}

MixtureModel make_model(Family family, bool spatial, int K, int channels) {
  if (K < 1) throw ParameterError("K must be at least 1");
  MixtureModel m;
  m.family = family;
  m.spatial = spatial;
  m.channels = channels;
  m.classes.resize(K);
  for (auto& c : m.classes) {
    c.loc = Vec::Zero(channels);
    c.prec_factor = Mat::Identity(channels, channels);
    c.skew = Vec::Zero(channels);
    c.kurt = 1.0;
  }
  m.mrf.alpha = Vec::Zero(K);
  m.mrf.beta = 0.0;
  return m;
}

void class_log_density(const NigClassParams& p, Family family, const SiteData& data, double* out) {
  const int d = data.d;
  if (p.dim() != d) throw UsageError("class dimension does not match the data channels");
  const double log_det = log_det_from_factor(p.prec_factor);
  const double log2pi = std::log(2.0 * std::numbers::pi);
  const Mat L = p.prec_factor;  // column-major copy
  const kernels::PlanarView view = data.view();
  const auto& kt = kernels::active();
  if (family == Family::kGaussian) {
    const double c0 = 0.5 * log_det - 0.5 * d * log2pi;
    for_each_chunk(data.n, [&](std::size_t, std::size_t b, std::size_t e) {
      kt.quadform(view, b, e, L.data(), p.loc.data(), nullptr, out + b, nullptr);
      for (std::size_t i = b; i < e; ++i) out[i] = c0 - 0.5 * out[i];
    });
    return;
  }
  const Vec g = p.prec_factor.transpose() * p.skew;
  const double a = g.squaredNorm() + 2.0;
  const double nu = -0.5 * (d + 1);
  const double mu1 = -nu - 1.0;  // |nu| - 1 >= 0
  const double c0 = 0.5 * std::log(p.kurt) + 0.5 * log_det - 0.5 * (d + 1) * log2pi + std::sqrt(2.0 * p.kurt) +
                    std::log(2.0) - 0.5 * nu * std::log(a);
  for_each_chunk(data.n, [&](std::size_t, std::size_t b, std::size_t e) {
    std::vector<double> cross(e - b);
    kt.quadform(view, b, e, L.data(), p.loc.data(), g.data(), out + b, cross.data());
    for (std::size_t i = b; i < e; ++i) {
      const double bb = out[i] + p.kurt;
      const BesselLogPair pr = bessel_k_log_pair(mu1, std::sqrt(a * bb));
      out[i] = c0 + cross[i - b] + pr.log_k + std::log(pr.ratio) + 0.5 * nu * std::log(bb);
    }
  });
}

LikelihoodTable likelihood_table(const MixtureModel& m, const SiteData& data) {
  if (data.d != m.channels) throw UsageError("data has " + std::to_string(data.d) + " channels, model expects " +
                                             std::to_string(m.channels));
  LikelihoodTable t;
  t.K = m.K();
  t.n = data.n;
  t.logf.resize(data.n * t.K);
  std::vector<double> col(data.n);
  for (int k = 0; k < t.K; ++k) {
    class_log_density(m.classes[k], m.family, data, col.data());
    for (std::size_t i = 0; i < data.n; ++i) {
      if (!std::isfinite(col[i]))
        throw NumericError("non-finite log-density for class " + std::to_string(k + 1) + " at site " +
                           std::to_string(i));
      t.logf[i * t.K + k] = col[i];
    }
  }
  return t;
}

}  // namespace nigmrf
