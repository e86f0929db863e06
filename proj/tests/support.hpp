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

#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include "nigmrf/dists.hpp"
#include "nigmrf/model.hpp"
#include "nigmrf/rng.hpp"

namespace nigmrf::test {

struct SampleStats {
  double mean = 0.0;
  double var = 0.0;
  double se() const { return std::sqrt(var / n); }
  std::size_t n = 0;
};

inline SampleStats sample_stats(const std::vector<double>& x) {
  SampleStats s;
  s.n = x.size();
  for (double v : x) s.mean += v;
  s.mean /= x.size();
  for (double v : x) s.var += (v - s.mean) * (v - s.mean);
  s.var /= (x.size() - 1);
  return s;
}

inline bool within_rel(double a, double b, double rel, double abs_floor = 0.0) {
  return std::abs(a - b) <= rel * std::max(std::abs(a), std::abs(b)) + abs_floor;
}

inline Mat random_lower(int d, Rng& rng, double diag_lo = 0.5, double diag_hi = 1.5, double off = 0.4) {
  Mat L = Mat::Zero(d, d);
  for (int i = 0; i < d; ++i) {
    L(i, i) = diag_lo + (diag_hi - diag_lo) * rng.uniform();
    for (int j = 0; j < i; ++j) L(i, j) = off * (2.0 * rng.uniform() - 1.0);
  }
  return L;
}

inline Vec random_vec(int d, Rng& rng, double scale = 1.0) {
  Vec v(d);
  for (int i = 0; i < d; ++i) v(i) = scale * (2.0 * rng.uniform() - 1.0);
  return v;
}

inline NigClassParams random_nig(int d, Rng& rng) {
  NigClassParams p;
  p.loc = random_vec(d, rng, 2.0);
  p.prec_factor = random_lower(d, rng);
  p.skew = random_vec(d, rng, 0.8);
  p.kurt = 0.5 + 4.0 * rng.uniform();
  return p;
}

inline std::filesystem::path temp_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("nigmrf_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace nigmrf::test
