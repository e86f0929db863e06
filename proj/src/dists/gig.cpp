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

#include "nigmrf/bessel.hpp"
#include "nigmrf/dists.hpp"
#include "nigmrf/error.hpp"

namespace nigmrf {

void validate(const GigParams& p) {
  if (!(p.a > 0.0) || !(p.b > 0.0) || !std::isfinite(p.a) || !std::isfinite(p.b) || !std::isfinite(p.order))
    throw ParameterError("GIG parameters require a > 0, b > 0 and finite order");
}

GigMoments gig_moments(const GigParams& p) {
  validate(p);
  const double z = std::sqrt(p.a * p.b);
  const double ratio = bessel_k_ratio(p.order, z);
  const double scale = std::sqrt(p.b / p.a);
  GigMoments m;
  m.mean = scale * ratio;
  // K_{nu+2} = K_nu + 2 (nu + 1) / z K_{nu+1}
  m.second_moment = (p.b / p.a) * (1.0 + 2.0 * (p.order + 1.0) / z * ratio);
  m.mean_inverse = (ratio - 2.0 * p.order / z) / scale;
  return m;
}

double gig_logpdf(const GigParams& p, double x) {
  validate(p);
  if (!(x > 0.0)) return -INFINITY;
  const double z = std::sqrt(p.a * p.b);
  return 0.5 * p.order * std::log(p.a / p.b) + (p.order - 1.0) * std::log(x) - std::log(2.0) -
         log_bessel_k(p.order, z) - 0.5 * (p.a * x + p.b / x);
}

namespace {

// Draw from the standardized density h(y) ~ y^{lambda-1} exp(-omega/2 (y + 1/y)),
// lambda >= 0.

double log_h(double lambda, double omega, double y) {
  return (lambda - 1.0) * std::log(y) - 0.5 * omega * (y + 1.0 / y);
}

// Ratio-of-uniforms with mode shift; bounding rectangle from the roots of the cubic
// that locates the extrema of (y - m) sqrt(h(y)).
double sample_rou_shift(double lambda, double omega, Rng& rng) {
  const double lm1 = lambda - 1.0;
  const double m = (lm1 + std::sqrt(lm1 * lm1 + omega * omega)) / omega;
  const double lhm = log_h(lambda, omega, m);
  const double a = -(2.0 * (lambda + 1.0) / omega + m);
  const double b = 2.0 * lm1 * m / omega - 1.0;
  const double p = b - a * a / 3.0;
  const double q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + m;
  double arg = -0.5 * q * std::sqrt(-27.0 / (p * p * p));
  arg = std::clamp(arg, -1.0, 1.0);
  const double phi = std::acos(arg);
  const double rad = std::sqrt(-4.0 * p / 3.0);
  const double y_minus = rad * std::cos(phi / 3.0 + 4.0 * std::numbers::pi / 3.0) - a / 3.0;
  const double y_plus = rad * std::cos(phi / 3.0) - a / 3.0;
  const double v_plus = (y_plus - m) * std::exp(0.5 * (log_h(lambda, omega, y_plus) - lhm));
  const double v_minus = y_minus > 0.0 ? (y_minus - m) * std::exp(0.5 * (log_h(lambda, omega, y_minus) - lhm)) : -m;
  for (;;) {
    const double u = rng.uniform();
    const double v = v_minus + rng.uniform() * (v_plus - v_minus);
    const double y = v / u + m;
    if (y <= 0.0) continue;
    if (2.0 * std::log(u) <= log_h(lambda, omega, y) - lhm) return y;
  }
}

// Rejection from a three-piece dominating density (constant, power, exponential),
// valid for 0 <= lambda < 1; efficient when omega is small.
double sample_small_lambda(double lambda, double omega, Rng& rng) {
  const double s = std::sqrt((1.0 - lambda) * (1.0 - lambda) + omega * omega);
  const double m = omega / (1.0 - lambda + s);
  const double x0 = omega / (1.0 - lambda);
  const double xstar = std::max(x0, 2.0 / omega);
  const double k1 = std::exp(log_h(lambda, omega, m));
  const double area1 = k1 * x0;
  double k2 = 0.0, area2 = 0.0;
  if (x0 < 2.0 / omega) {
    k2 = std::exp(-omega);
    area2 = lambda > 0.0 ? k2 * (std::pow(2.0 / omega, lambda) - std::pow(x0, lambda)) / lambda
                         : k2 * std::log(2.0 / (omega * omega));
  }
  const double k3 = std::pow(xstar, lambda - 1.0);
  const double area3 = 2.0 * k3 * std::exp(-xstar * omega / 2.0) / omega;
  const double total = area1 + area2 + area3;
  for (;;) {
    const double u = rng.uniform();
    double v = rng.uniform() * total;
    double y, hy;
    if (v <= area1) {
      y = x0 * v / area1;
      hy = k1;
    } else if (v <= area1 + area2) {
      v -= area1;
      y = lambda > 0.0 ? std::pow(std::pow(x0, lambda) + v * lambda / k2, 1.0 / lambda) : omega * std::exp(v * std::exp(omega));
      hy = k2 * std::pow(y, lambda - 1.0);
    } else {
      v -= area1 + area2;
      y = xstar - 2.0 / omega * std::log1p(-v * omega / (2.0 * k3) * std::exp(xstar * omega / 2.0));
      hy = k3 * std::exp(-y * omega / 2.0);
    }
    if (y <= 0.0 || !std::isfinite(y)) continue;
    if (u * hy <= std::exp(log_h(lambda, omega, y))) return y;
  }
}

}  // namespace

double gig_sample(const GigParams& p, Rng& rng) {
  validate(p);
  const double lambda = std::abs(p.order);
  const double omega = std::sqrt(p.a * p.b);
  const double y = (lambda >= 1.0 || omega > 1.0) ? sample_rou_shift(lambda, omega, rng)
                                                  : sample_small_lambda(lambda, omega, rng);
  const double scale = std::sqrt(p.b / p.a);
  // GIG(nu, a, b) with nu < 0 is the reciprocal of GIG(-nu, b, a).
  return p.order >= 0.0 ? scale * y : scale / y;
}

double ig_sample(double kurt, Rng& rng) {
  if (!(kurt > 0.0) || !std::isfinite(kurt)) throw ParameterError("IG kurtosis parameter must be positive");
  // Transformation with multiple roots: chi-square root, then pick a root by a
  // uniform acceptance step.
  const double mu = std::sqrt(kurt / 2.0);
  const double shape = kurt;
  const double n = rng.normal();
  const double y = n * n;
  const double x = mu + mu * mu * y / (2.0 * shape) -
                   (mu / (2.0 * shape)) * std::sqrt(4.0 * mu * shape * y + mu * mu * y * y);
  if (rng.uniform() <= mu / (mu + x)) return x;
  return mu * mu / x;
}

}  // namespace nigmrf
