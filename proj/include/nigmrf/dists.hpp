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

#pragma once

// Gaussian, inverse Gaussian (IG), generalized inverse Gaussian (GIG), normal
// inverse Gaussian (NIG) and generalized hyperbolic (GH) distributions.
//
// Conventions:
//  * GIG(nu, a, b) has density (a/b)^{nu/2} x^{nu-1} exp(-(a x + b / x) / 2) / (2 K_nu(sqrt(ab))).
//  * NIG(loc, Q, skew, kurt) is the normal variance-mean mixture
//      X = loc + skew V + sqrt(V) Q^{-1/2} Z,  V ~ IG(mean sqrt(kurt/2), shape kurt),
//    i.e. V ~ GIG(-1/2, 2, kurt). Q is the precision-like matrix, stored as its lower
//    Cholesky factor.
//  * GH(loc, Q, skew, GIG(nu, a, b)) is the same mixture with a general GIG mixing law.

#include <span>
#include <vector>

#include "nigmrf/linalg.hpp"
#include "nigmrf/rng.hpp"

namespace nigmrf {

struct GigParams {
  double order = -0.5;  // nu
  double a = 1.0;
  double b = 1.0;
};

struct GigMoments {
  double mean;
  double second_moment;
  double mean_inverse;  // E[1/X]
};

void validate(const GigParams& p);
GigMoments gig_moments(const GigParams& p);
double gig_logpdf(const GigParams& p, double x);
double gig_sample(const GigParams& p, Rng& rng);

// IG with shape kurt and mean sqrt(kurt/2); the mixing law of the NIG family.
double ig_sample(double kurt, Rng& rng);

struct GaussClassParams {
  Vec mean;
  Mat prec_factor;  // lower triangular L, Q = L L^T

  int dim() const { return static_cast<int>(mean.size()); }
  Mat precision() const { return prec_factor * prec_factor.transpose(); }
};

struct NigClassParams {
  Vec loc;
  Mat prec_factor;  // lower triangular L, Q = L L^T
  Vec skew;
  double kurt = 1.0;

  int dim() const { return static_cast<int>(loc.size()); }
  Mat precision() const { return prec_factor * prec_factor.transpose(); }
};

// Law of X^A given X^B = x^B for an NIG (or GH) vector: GH(loc_tilde, prec_AA,
// skew_tilde, gig). Gaussian conditionals use the same type with skew 0 and a
// degenerate mixing law (see is_gaussian).
struct GhConditional {
  Vec loc_tilde;
  Vec skew_tilde;
  Mat prec_factor;  // lower factor of the conditional precision (Q^{AA})
  GigParams gig;
  bool gaussian = false;  // mixing variable fixed at 1

  int dim() const { return static_cast<int>(loc_tilde.size()); }
  Vec mean() const;
  Mat cov() const;
  double logpdf(const Vec& x) const;
  Vec sample(Rng& rng) const;
  // Mixing-variable moments (E[V], Var[V]); (1, 0) for the Gaussian case.
  double mixing_mean() const;
  double mixing_variance() const;
};

void validate(const NigClassParams& p);
void validate(const GaussClassParams& p);

double nig_logpdf(const NigClassParams& p, std::span<const double> x);
Vec nig_sample(const NigClassParams& p, Rng& rng);
NigClassParams nig_marginal(const NigClassParams& p, std::span<const int> keep);
GhConditional nig_conditional(const NigClassParams& p, std::span<const int> target, std::span<const int> given,
                              std::span<const double> x_given);

double gauss_logpdf(const GaussClassParams& p, std::span<const double> x);
Vec gauss_sample(const GaussClassParams& p, Rng& rng);
GaussClassParams gauss_marginal(const GaussClassParams& p, std::span<const int> keep);
GhConditional gauss_conditional(const GaussClassParams& p, std::span<const int> target, std::span<const int> given,
                                std::span<const double> x_given);

// Density of GH(loc, L L^T, skew, gig) at x.
double gh_logpdf(const Vec& loc, const Mat& prec_factor, const Vec& skew, const GigParams& gig, const Vec& x);

// Normal helpers.
double normal_pdf(double x);
double normal_cdf(double x);
// E|Y| for Y ~ N(mu, var) (folded normal mean).
double folded_normal_mean(double mu, double var);

}  // namespace nigmrf
