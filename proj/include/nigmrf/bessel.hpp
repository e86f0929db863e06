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

// Modified Bessel function of the second kind, evaluated in log space.
//
// All routines accept any real order (K_{-nu} = K_nu) and z > 0. Values stay finite
// for z well beyond 700, where K_nu itself underflows.

namespace nigmrf {

struct BesselLogPair {
  double log_k;  // log K_nu(z)
  double ratio;  // K_{nu+1}(z) / K_nu(z)
};

// log K_nu(z) together with the ratio K_{nu+1}/K_nu for nu >= 0.
BesselLogPair bessel_k_log_pair(double nu, double z);

double log_bessel_k(double nu, double z);

// K_{nu+1}(z) / K_nu(z) for any real nu.
double bessel_k_ratio(double nu, double z);

// d/dz log K_nu(z) = nu / z - K_{nu+1}/K_nu.
double dlog_bessel_k(double nu, double z);

}  // namespace nigmrf
