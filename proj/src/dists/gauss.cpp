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

#include "nigmrf/dists.hpp"
#include "nigmrf/error.hpp"

namespace nigmrf {

void validate(const GaussClassParams& p) {
  const int d = p.dim();
  if (d < 1) throw ParameterError("Gaussian: dimension must be at least 1");
  if (!p.mean.allFinite()) throw ParameterError("Gaussian: non-finite mean");
  if (p.prec_factor.rows() != d || p.prec_factor.cols() != d)
    throw ParameterError("Gaussian: precision factor has wrong shape");
  if (!p.prec_factor.allFinite()) throw ParameterError("Gaussian: non-finite precision factor");
  for (int j = 0; j < d; ++j)
    if (!(p.prec_factor(j, j) > 0.0)) throw ParameterError("Gaussian: precision factor diagonal must be positive");
}

double gauss_logpdf(const GaussClassParams& p, std::span<const double> x) {
  const int d = p.dim();
  if (static_cast<int>(x.size()) != d) throw DataError("point dimension does not match the distribution");
  for (double v : x)
    if (!std::isfinite(v)) throw DataError("non-finite value in density argument");
  const Vec y = p.prec_factor.transpose() * (Eigen::Map<const Vec>(x.data(), d) - p.mean);
  return 0.5 * log_det_from_factor(p.prec_factor) - 0.5 * d * std::log(2.0 * std::numbers::pi) -
         0.5 * y.squaredNorm();
}

Vec gauss_sample(const GaussClassParams& p, Rng& rng) {
  Vec z(p.dim());
  for (int i = 0; i < p.dim(); ++i) z(i) = rng.normal();
  return p.mean + solve_upper_t(p.prec_factor, z);
}

GaussClassParams gauss_marginal(const GaussClassParams& p, std::span<const int> keep) {
  validate(p);
  if (keep.empty()) throw UsageError("Gaussian marginal: empty index set");
  for (int k : keep)
    if (k < 0 || k >= p.dim()) throw UsageError("Gaussian marginal: channel index out of range");
  const Mat sigma = spd_inverse(p.precision(), "Gaussian marginal");
  GaussClassParams out;
  out.mean = select(p.mean, keep);
  out.prec_factor = spd_factor(spd_inverse(select_block(sigma, keep, keep), "Gaussian marginal block"),
                               "Gaussian marginal");
  return out;
}

GhConditional gauss_conditional(const GaussClassParams& p, std::span<const int> target, std::span<const int> given,
                                std::span<const double> x_given) {
  validate(p);
  if (target.empty() || given.empty() || x_given.size() != given.size())
    throw UsageError("Gaussian conditional: invalid split");
  const Mat q = p.precision();
  const Mat q_aa = select_block(q, target, target);
  const Eigen::LLT<Mat> llt(q_aa);
  if (llt.info() != Eigen::Success) throw NumericError("Gaussian conditional: precision block is singular");
  const Vec r_b = Eigen::Map<const Vec>(x_given.data(), x_given.size()) - select(p.mean, given);
  GhConditional c;
  c.loc_tilde = select(p.mean, target) - llt.solve(select_block(q, target, given) * r_b);
  c.skew_tilde = Vec::Zero(target.size());
  c.prec_factor = llt.matrixL();
  c.gaussian = true;
  return c;
}

double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double folded_normal_mean(double mu, double var) {
  if (!(var > 0.0)) return std::abs(mu);
  const double s = std::sqrt(var);
  return 2.0 * s * normal_pdf(mu / s) + mu * std::erf(mu / (s * std::numbers::sqrt2));
}

}  // namespace nigmrf
