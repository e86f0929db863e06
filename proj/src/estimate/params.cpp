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
#include <string>

#include "nigmrf/error.hpp"
#include "nigmrf/estimate.hpp"

namespace nigmrf {

int class_param_count(Family family, int d) {
  const int base = d + d * (d + 1) / 2;
  return family == Family::kGaussian ? base : base + d + 1;
}

int mrf_param_count(int K, bool spatial) { return K - 1 + (spatial ? 1 : 0); }

Vec pack_class(const NigClassParams& p, Family family) {
  const int d = p.dim();
  Vec t(class_param_count(family, d));
  int o = 0;
  for (int i = 0; i < d; ++i) t(o++) = p.loc(i);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j <= i; ++j) t(o++) = i == j ? std::log(p.prec_factor(i, i)) : p.prec_factor(i, j);
  if (family == Family::kNig) {
    for (int i = 0; i < d; ++i) t(o++) = p.skew(i);
    t(o++) = std::log(p.kurt);
  }
  return t;
}

NigClassParams unpack_class(const Vec& t, Family family, int d) {
  if (t.size() != class_param_count(family, d)) throw UsageError("class parameter vector has the wrong length");
  NigClassParams p;
  p.loc.resize(d);
  p.prec_factor = Mat::Zero(d, d);
  p.skew = Vec::Zero(d);
  p.kurt = 1.0;
  int o = 0;
  for (int i = 0; i < d; ++i) p.loc(i) = t(o++);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j <= i; ++j) p.prec_factor(i, j) = i == j ? std::exp(t(o++)) : t(o++);
  if (family == Family::kNig) {
    for (int i = 0; i < d; ++i) p.skew(i) = t(o++);
    p.kurt = std::exp(t(o++));
  }
  return p;
}

Vec pack_mrf(const MrfParams& m, bool spatial) {
  Vec t(mrf_param_count(m.K(), spatial));
  for (int k = 1; k < m.K(); ++k) t(k - 1) = m.alpha(k);
  if (spatial) t(m.K() - 1) = m.beta;
  return t;
}

MrfParams unpack_mrf(const Vec& t, int K, bool spatial, double frozen_beta) {
  if (t.size() != mrf_param_count(K, spatial)) throw UsageError("MRF parameter vector has the wrong length");
  MrfParams m;
  m.alpha = Vec::Zero(K);
  for (int k = 1; k < K; ++k) m.alpha(k) = t(k - 1);
  m.beta = spatial ? t(K - 1) : frozen_beta;
  return m;
}

Vec pack_model(const MixtureModel& m) {
  const int cs = class_param_count(m.family, m.channels);
  Vec t(m.K() * cs + mrf_param_count(m.K(), m.spatial));
  for (int k = 0; k < m.K(); ++k) t.segment(k * cs, cs) = pack_class(m.classes[k], m.family);
  t.tail(mrf_param_count(m.K(), m.spatial)) = pack_mrf(m.mrf, m.spatial);
  return t;
}

MixtureModel unpack_model(const Vec& t, const MixtureModel& like) {
  const int cs = class_param_count(like.family, like.channels);
  const int ms = mrf_param_count(like.K(), like.spatial);
  if (t.size() != like.K() * cs + ms) throw UsageError("model parameter vector has the wrong length");
  MixtureModel m = like;
  for (int k = 0; k < like.K(); ++k) m.classes[k] = unpack_class(t.segment(k * cs, cs), like.family, like.channels);
  m.mrf = unpack_mrf(t.tail(ms), like.K(), like.spatial, 0.0);
  return m;
}

}  // namespace nigmrf
