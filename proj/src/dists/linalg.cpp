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

#include "nigmrf/linalg.hpp"

#include <cmath>
#include <string>

#include "nigmrf/error.hpp"

namespace nigmrf {

Mat spd_factor(const Mat& m, const char* what) {
  Eigen::LLT<Mat> llt(m);
  if (llt.info() != Eigen::Success || !llt.matrixL().toDenseMatrix().allFinite())
    throw NumericError(std::string(what) + ": matrix is not positive definite");
  return llt.matrixL();
}

Mat spd_inverse(const Mat& m, const char* what) {
  Eigen::LLT<Mat> llt(m);
  if (llt.info() != Eigen::Success) throw NumericError(std::string(what) + ": matrix is not positive definite");
  Mat inv = llt.solve(Mat::Identity(m.rows(), m.cols()));
  if (!inv.allFinite()) throw NumericError(std::string(what) + ": inverse is not finite");
  return symmetrize(inv);
}

Mat select_block(const Mat& m, std::span<const int> rows, std::span<const int> cols) {
  Mat out(rows.size(), cols.size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < cols.size(); ++j) out(i, j) = m(rows[i], cols[j]);
  return out;
}

Vec select(const Vec& v, std::span<const int> idx) {
  Vec out(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) out(i) = v(idx[i]);
  return out;
}

Vec solve_upper_t(const Mat& lower, const Vec& z) {
  return lower.transpose().triangularView<Eigen::Upper>().solve(z);
}

double log_det_from_factor(const Mat& lower) {
  double s = 0.0;
  for (Eigen::Index j = 0; j < lower.rows(); ++j) s += std::log(lower(j, j));
  return 2.0 * s;
}

}  // namespace nigmrf
