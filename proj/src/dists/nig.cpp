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
#include <numbers>
#include <string>
#include <vector>

#include "nigmrf/bessel.hpp"
#include "nigmrf/dists.hpp"
#include "nigmrf/error.hpp"

namespace nigmrf {

namespace {

const double kLog2Pi = std::log(2.0 * std::numbers::pi);

void check_factor(const Mat& L, int d, const char* who) {
  if (L.rows() != d || L.cols() != d) throw ParameterError(std::string(who) + ": precision factor has wrong shape");
  for (int j = 0; j < d; ++j) {
    if (!(L(j, j) > 0.0) || !std::isfinite(L(j, j)))
      throw ParameterError(std::string(who) + ": precision factor diagonal must be positive");
    for (int i = 0; i < d; ++i)
      if (!std::isfinite(L(i, j))) throw ParameterError(std::string(who) + ": non-finite precision factor");
  }
}

void check_point(std::span<const double> x, int d) {
  if (static_cast<int>(x.size()) != d) throw DataError("point dimension does not match the distribution");
  for (double v : x)
    if (!std::isfinite(v)) throw DataError("non-finite value in density argument");
}

}  // namespace

void validate(const NigClassParams& p) {
  const int d = p.dim();
  if (d < 1) throw ParameterError("NIG: dimension must be at least 1");
  if (p.skew.size() != d) throw ParameterError("NIG: skew has wrong length");
  if (!p.loc.allFinite() || !p.skew.allFinite()) throw ParameterError("NIG: non-finite location or skew");
  if (!(p.kurt > 0.0) || !std::isfinite(p.kurt)) throw ParameterError("NIG: kurtosis parameter must be positive");
  check_factor(p.prec_factor, d, "NIG");
}

double nig_logpdf(const NigClassParams& p, std::span<const double> x) {
  const int d = p.dim();
  check_point(x, d);
  const Vec r = Eigen::Map<const Vec>(x.data(), d) - p.loc;
  const Vec y = p.prec_factor.transpose() * r;
  const Vec g = p.prec_factor.transpose() * p.skew;
  const double a = g.squaredNorm() + 2.0;
  const double b = y.squaredNorm() + p.kurt;
  const double nu = -0.5 * (d + 1);
  return 0.5 * std::log(p.kurt) + 0.5 * log_det_from_factor(p.prec_factor) - 0.5 * (d + 1) * kLog2Pi + y.dot(g) +
         std::sqrt(2.0 * p.kurt) + std::log(2.0) + log_bessel_k(nu, std::sqrt(a * b)) +
         0.5 * nu * (std::log(b) - std::log(a));
}

Vec nig_sample(const NigClassParams& p, Rng& rng) {
  validate(p);
  const int d = p.dim();
  const double v = ig_sample(p.kurt, rng);
  Vec z(d);
  for (int i = 0; i < d; ++i) z(i) = rng.normal();
  return p.loc + p.skew * v + std::sqrt(v) * solve_upper_t(p.prec_factor, z);
}

NigClassParams nig_marginal(const NigClassParams& p, std::span<const int> keep) {
  validate(p);
  const int d = p.dim();
  if (keep.empty() || static_cast<int>(keep.size()) > d) throw UsageError("NIG marginal: invalid index set");
  for (int k : keep)
    if (k < 0 || k >= d) throw UsageError("NIG marginal: channel index out of range");
  const Mat sigma = spd_inverse(p.precision(), "NIG marginal");
  NigClassParams out;
  out.loc = select(p.loc, keep);
  out.skew = select(p.skew, keep);
  out.kurt = p.kurt;
  out.prec_factor = spd_factor(spd_inverse(select_block(sigma, keep, keep), "NIG marginal block"), "NIG marginal");
  return out;
}

GhConditional nig_conditional(const NigClassParams& p, std::span<const int> target, std::span<const int> given,
                              std::span<const double> x_given) {
  validate(p);
  if (target.empty() || given.empty() || x_given.size() != given.size())
    throw UsageError("NIG conditional: invalid split");
  for (double v : x_given)
    if (!std::isfinite(v)) throw DataError("NIG conditional: non-finite conditioning value");
  const Mat q = p.precision();
  const Mat q_aa = select_block(q, target, target);
  const Mat q_ab = select_block(q, target, given);
  const Eigen::LLT<Mat> llt(q_aa);
  if (llt.info() != Eigen::Success) throw NumericError("NIG conditional: precision block is singular");
  const Mat reg = llt.solve(q_ab);  // (Q^{AA})^{-1} Q^{AB}

  const Vec r_b = Eigen::Map<const Vec>(x_given.data(), x_given.size()) - select(p.loc, given);
  const Vec skew_b = select(p.skew, given);
  // (Sigma^{BB})^{-1} is the Schur complement Q^{BB} - Q^{BA} (Q^{AA})^{-1} Q^{AB}.
  const Mat prec_b = symmetrize(select_block(q, given, given) - q_ab.transpose() * reg);

  GhConditional c;
  c.loc_tilde = select(p.loc, target) - reg * r_b;
  c.skew_tilde = select(p.skew, target) + reg * skew_b;
  c.prec_factor = llt.matrixL();
  c.gig.order = -0.5 * (static_cast<double>(given.size()) + 1.0);
  c.gig.a = skew_b.dot(prec_b * skew_b) + 2.0;
  c.gig.b = r_b.dot(prec_b * r_b) + p.kurt;
  c.gaussian = false;
  return c;
}

double gh_logpdf(const Vec& loc, const Mat& prec_factor, const Vec& skew, const GigParams& gig, const Vec& x) {
  validate(gig);
  const int d = static_cast<int>(loc.size());
  check_point(std::span<const double>(x.data(), x.size()), d);
  const Vec y = prec_factor.transpose() * (x - loc);
  const Vec g = prec_factor.transpose() * skew;
  const double nu2 = gig.order - 0.5 * d;
  const double a2 = gig.a + g.squaredNorm();
  const double b2 = gig.b + y.squaredNorm();
  return 0.5 * log_det_from_factor(prec_factor) - 0.5 * d * kLog2Pi + 0.5 * gig.order * std::log(gig.a / gig.b) -
         log_bessel_k(gig.order, std::sqrt(gig.a * gig.b)) + y.dot(g) + log_bessel_k(nu2, std::sqrt(a2 * b2)) +
         0.5 * nu2 * std::log(b2 / a2);
}

double GhConditional::mixing_mean() const { return gaussian ? 1.0 : gig_moments(gig).mean; }

double GhConditional::mixing_variance() const {
  if (gaussian) return 0.0;
  const GigMoments m = gig_moments(gig);
  return std::max(0.0, m.second_moment - m.mean * m.mean);
}

Vec GhConditional::mean() const { return loc_tilde + skew_tilde * mixing_mean(); }

Mat GhConditional::cov() const {
  const Mat sigma = spd_inverse(prec_factor * prec_factor.transpose(), "conditional covariance");
  return symmetrize(sigma * mixing_mean() + skew_tilde * skew_tilde.transpose() * mixing_variance());
}

double GhConditional::logpdf(const Vec& x) const {
  if (!gaussian) return gh_logpdf(loc_tilde, prec_factor, skew_tilde, gig, x);
  const int d = dim();
  const Vec y = prec_factor.transpose() * (x - loc_tilde);
  return 0.5 * log_det_from_factor(prec_factor) - 0.5 * d * kLog2Pi - 0.5 * y.squaredNorm();
}

Vec GhConditional::sample(Rng& rng) const {
  const double v = gaussian ? 1.0 : gig_sample(gig, rng);
  Vec z(dim());
  for (int i = 0; i < dim(); ++i) z(i) = rng.normal();
  return loc_tilde + skew_tilde * v + std::sqrt(v) * solve_upper_t(prec_factor, z);
}

}  // namespace nigmrf
