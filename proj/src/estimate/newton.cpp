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

#include "nigmrf/estimate.hpp"

namespace nigmrf {

Scaling condition_scaling(const Mat& H) {
  const Eigen::Index n = H.rows();
  Scaling out;
  const Mat neg = -symmetrize(H);
  Eigen::LLT<Mat> llt(neg);
  if (llt.info() == Eigen::Success) {
    Mat S = llt.solve(Mat::Identity(n, n));
    if (S.allFinite()) {
      out.S = symmetrize(S);
      out.tier = ScalingTier::kNewton;
      return out;
    }
  }
  Vec diag = neg.diagonal();
  out.S = Mat::Zero(n, n);
  if ((diag.array() > 0.0).all()) {
    out.S.diagonal() = diag;
    out.tier = ScalingTier::kDiagonal;
    return out;
  }
  const double scale = H.diagonal().cwiseAbs().maxCoeff();
  const double eps = scale > 0.0 ? 1e-6 * scale : 1.0;
  for (Eigen::Index j = 0; j < n; ++j)
    if (!(diag(j) > 0.0)) diag(j) = eps;
  out.S.diagonal() = diag;
  out.tier = ScalingTier::kShifted;
  return out;
}

LineSearchResult line_search(double q0, const std::function<double(double)>& q_at, int max_halvings) {
  LineSearchResult r;
  double step = 1.0;
  for (int h = 0; h <= max_halvings; ++h) {
    const double q = q_at(step);
    if (std::isfinite(q) && q >= q0) {
      r.step = step;
      r.q = q;
      r.halvings = h;
      r.ok = true;
      return r;
    }
    step *= 0.5;
  }
  r.step = 0.0;
  r.q = q0;
  r.halvings = max_halvings;
  r.ok = false;
  return r;
}

}  // namespace nigmrf
