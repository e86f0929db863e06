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

#include <span>

#include <Eigen/Dense>

namespace nigmrf {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Inverse of a symmetric positive-definite matrix; throws NumericError when the
// Cholesky factorization fails.
Mat spd_inverse(const Mat& m, const char* what);

// Lower Cholesky factor of an SPD matrix; throws NumericError on failure.
Mat spd_factor(const Mat& m, const char* what);

// Rows/columns picked by index lists.
Mat select_block(const Mat& m, std::span<const int> rows, std::span<const int> cols);
Vec select(const Vec& v, std::span<const int> idx);

// Solves L^T w = z for lower-triangular L (a draw with covariance (L L^T)^{-1} when z is standard normal).
Vec solve_upper_t(const Mat& lower, const Vec& z);

double log_det_from_factor(const Mat& lower);

inline Mat symmetrize(const Mat& m) { return 0.5 * (m + m.transpose()); }

}  // namespace nigmrf
