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

#include "nigmrf/bessel.hpp"

#include <cmath>
#include <numbers>

#include "nigmrf/error.hpp"

namespace nigmrf {

namespace {

constexpr double kEps = 1e-16;
constexpr int kMaxIter = 10000;

// Gamma-function combinations for Temme's series, |mu| <= 1/2:
//   gam1 = (1/G(1-mu) - 1/G(1+mu)) / (2 mu),  gam2 = (1/G(1-mu) + 1/G(1+mu)) / 2.
void temme_gammas(double mu, double& gam1, double& gam2, double& gampl, double& gammi) {
  gampl = 1.0 / std::tgamma(1.0 + mu);
  gammi = 1.0 / std::tgamma(1.0 - mu);
  gam2 = 0.5 * (gammi + gampl);
  if (std::abs(mu) < 1e-3) {
    // Odd part of the Taylor series of 1/G(1+x) removes the cancellation.
    const double m2 = mu * mu;
    gam1 = -(0.5772156649015329 + m2 * (-0.0420026350340952 + m2 * (-0.0421977345555443 + m2 * 0.0072189432466630)));
  } else {
    gam1 = (gammi - gampl) / (2.0 * mu);
  }
}

// log K_mu(z) and K_{mu+1}/K_mu for |mu| <= 1/2.
BesselLogPair base_pair(double mu, double z) {
  const double mu2 = mu * mu;
  if (z < 2.0) {
    const double x2 = 0.5 * z;
    const double pimu = std::numbers::pi * mu;
    const double fact = std::abs(pimu) < kEps ? 1.0 : pimu / std::sin(pimu);
    double d = -std::log(x2);
    double e = mu * d;
    const double fact2 = std::abs(e) < kEps ? 1.0 : std::sinh(e) / e;
    double gam1, gam2, gampl, gammi;
    temme_gammas(mu, gam1, gam2, gampl, gammi);
    double ff = fact * (gam1 * std::cosh(e) + gam2 * fact2 * d);
    double sum = ff;
    e = std::exp(e);
    double p = 0.5 * e / gampl;
    double q = 0.5 / (e * gammi);
    double c = 1.0;
    d = x2 * x2;
    double sum1 = p;
    for (int i = 1; i <= kMaxIter; ++i) {
      ff = (i * ff + p + q) / (i * static_cast<double>(i) - mu2);
      c *= d / i;
      p /= (i - mu);
      q /= (i + mu);
      const double del = c * ff;
      sum += del;
      sum1 += c * (p - i * ff);
      if (std::abs(del) < std::abs(sum) * kEps) break;
    }
    return {std::log(sum), sum1 * (2.0 / z) / sum};
  }
  // Steed's continued fraction CF2 with Temme's normalization; works on e^z K.
  double b = 2.0 * (1.0 + z);
  double d = 1.0 / b;
  double h = d, delh = d;
  double q1 = 0.0, q2 = 1.0;
  const double a1 = 0.25 - mu2;
  double q = a1, c = a1;
  double a = -a1;
  double s = 1.0 + q * delh;
  for (int i = 2; i <= kMaxIter; ++i) {
    a -= 2 * (i - 1);
    c = -a * c / i;
    const double qnew = (q1 - b * q2) / a;
    q1 = q2;
    q2 = qnew;
    q += c * qnew;
    b += 2.0;
    d = 1.0 / (b + a * d);
    delh = (b * d - 1.0) * delh;
    h += delh;
    const double dels = q * delh;
    s += dels;
    if (std::abs(dels / s) < kEps) break;
  }
  h = a1 * h;
  const double log_k = 0.5 * std::log(std::numbers::pi / (2.0 * z)) - z - std::log(s);
  return {log_k, (mu + z + 0.5 - h) / z};
}

// Half-integer orders n + 1/2 have a terminating series; n <= 8 and moderate z keep
// the polynomial well scaled.
bool half_integer_pair(double nu, double z, BesselLogPair& out) {
  const double twice = 2.0 * nu;
  const double rounded = std::round(twice);
  if (std::abs(twice - rounded) > 1e-14) return false;
  const long odd = static_cast<long>(rounded);
  if (odd % 2 == 0) return false;
  const int n = static_cast<int>((odd - 1) / 2);
  if (n > 8 || z < 1e-3) return false;
  // s_n = sum_k (n+k)! / (k! (n-k)!) (2z)^-k ; K_{n+1/2} = sqrt(pi/2z) e^-z s_n.
  auto series = [z](int order) {
    double term = 1.0, sum = 1.0;
    for (int k = 0; k < order; ++k) {
      term *= static_cast<double>((order + k + 1) * (order - k)) / ((k + 1) * 2.0 * z);
      sum += term;
    }
    return sum;
  };
  const double sn = series(n);
  const double sn1 = series(n + 1);
  out.log_k = 0.5 * std::log(std::numbers::pi / (2.0 * z)) - z + std::log(sn);
  out.ratio = sn1 / sn;
  return true;
}

}  // namespace

BesselLogPair bessel_k_log_pair(double nu, double z) {
  if (!(z > 0.0) || !std::isfinite(z)) throw NumericError("bessel_k: argument must be positive and finite");
  nu = std::abs(nu);
  BesselLogPair fast;
  if (half_integer_pair(nu, z, fast)) return fast;
  const double n = std::floor(nu + 0.5);
  const double mu = nu - n;
  BesselLogPair p = base_pair(mu, z);
  // Upward recurrence on the ratio r_m = K_{m+1}/K_m: r_{m+1} = 2(m+1)/z + 1/r_m.
  double m = mu;
  for (int step = 0; step < static_cast<int>(n); ++step) {
    p.log_k += std::log(p.ratio);
    m += 1.0;
    p.ratio = 2.0 * m / z + 1.0 / p.ratio;
  }
  return p;
}

double log_bessel_k(double nu, double z) { return bessel_k_log_pair(nu, z).log_k; }

double bessel_k_ratio(double nu, double z) {
  if (nu >= 0.0) return bessel_k_log_pair(nu, z).ratio;
  if (nu <= -1.0) {
    // K_{nu+1}/K_nu = K_{|nu|-1}/K_{|nu|} = 1 / ratio(|nu|-1).
    return 1.0 / bessel_k_log_pair(-nu - 1.0, z).ratio;
  }
  return std::exp(log_bessel_k(nu + 1.0, z) - log_bessel_k(-nu, z));
}

double dlog_bessel_k(double nu, double z) { return nu / z - bessel_k_ratio(nu, z); }

}  // namespace nigmrf
