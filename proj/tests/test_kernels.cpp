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

#include <vector>

#include "doctest.h"
#include "nigmrf/kernels/kernels.hpp"
#include "nigmrf/rng.hpp"
#include "support.hpp"

using namespace nigmrf;

namespace {

struct Fixture {
  int d;
  std::size_t n;
  std::vector<double> x, L, loc, g, w;

  Fixture(int dim, std::size_t count, std::uint64_t seed) : d(dim), n(count) {
    Rng rng(seed);
    x.resize(d * n);
    for (double& v : x) v = 3.0 * rng.normal();
    L.assign(d * d, 0.0);
    for (int j = 0; j < d; ++j)
      for (int i = j; i < d; ++i) L[i + j * d] = i == j ? 0.5 + rng.uniform() : 0.3 * rng.normal();
    for (int c = 0; c < d; ++c) {
      loc.push_back(rng.normal());
      g.push_back(rng.normal());
    }
    for (std::size_t i = 0; i < n; ++i) w.push_back(i % 7 == 3 ? 0.0 : rng.uniform());
  }
  kernels::PlanarView view() const { return {d, n, n, x.data()}; }
};

}  // namespace

TEST_CASE("avx2 quadform matches the scalar reference") {
  if (!kernels::cpu_has_avx2()) return;
  const auto& s = kernels::scalar_kernels();
  const auto& v = kernels::avx2_kernels();
  for (int d = 1; d <= 7; ++d)
    for (std::size_t n : {1, 3, 4, 5, 17, 64, 1001}) {
      Fixture f(d, n, 100 * d + n);
      for (std::size_t begin : {std::size_t{0}, n / 3}) {
        const std::size_t m = n - begin;
        std::vector<double> q1(m), c1(m), q2(m), c2(m);
        s.quadform(f.view(), begin, n, f.L.data(), f.loc.data(), f.g.data(), q1.data(), c1.data());
        v.quadform(f.view(), begin, n, f.L.data(), f.loc.data(), f.g.data(), q2.data(), c2.data());
        for (std::size_t i = 0; i < m; ++i) {
          CHECK(test::within_rel(q1[i], q2[i], 1e-12, 1e-12));
          CHECK(test::within_rel(c1[i], c2[i], 1e-12, 1e-12));
        }
        std::vector<double> q3(m);
        v.quadform(f.view(), begin, n, f.L.data(), f.loc.data(), nullptr, q3.data(), nullptr);
        for (std::size_t i = 0; i < m; ++i) CHECK(test::within_rel(q1[i], q3[i], 1e-12, 1e-12));
      }
    }
}

TEST_CASE("avx2 weighted moments match the scalar reference") {
  if (!kernels::cpu_has_avx2()) return;
  const auto& s = kernels::scalar_kernels();
  const auto& v = kernels::avx2_kernels();
  for (int d = 1; d <= 7; ++d)
    for (std::size_t n : {1, 4, 6, 33, 2048, 2051}) {
      Fixture f(d, n, 7 * d + n);
      double s0a = 0.0, s0b = 0.0;
      std::vector<double> s1a(d, 0.0), s1b(d, 0.0), s2a(d * d, 0.0), s2b(d * d, 0.0);
      s.weighted_moments(f.view(), 0, n, f.w.data(), f.loc.data(), &s0a, s1a.data(), s2a.data());
      v.weighted_moments(f.view(), 0, n, f.w.data(), f.loc.data(), &s0b, s1b.data(), s2b.data());
      CHECK(test::within_rel(s0a, s0b, 1e-12, 1e-12));
      for (int a = 0; a < d; ++a) CHECK(test::within_rel(s1a[a], s1b[a], 1e-11, 1e-11));
      for (int a = 0; a < d * d; ++a) CHECK(test::within_rel(s2a[a], s2b[a], 1e-11, 1e-11));
      for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) CHECK(s2b[a + b * d] == s2b[b + a * d]);
    }
}

TEST_CASE("scalar quadform against a direct evaluation") {
  Fixture f(3, 10, 42);
  std::vector<double> q(10), c(10);
  kernels::scalar_kernels().quadform(f.view(), 0, 10, f.L.data(), f.loc.data(), f.g.data(), q.data(), c.data());
  for (std::size_t i = 0; i < 10; ++i) {
    double r[3], y[3], qq = 0.0, cc = 0.0;
    for (int k = 0; k < 3; ++k) r[k] = f.x[k * 10 + i] - f.loc[k];
    for (int j = 0; j < 3; ++j) {
      y[j] = 0.0;
      for (int m = 0; m < 3; ++m) y[j] += f.L[m + j * 3] * r[m];
      qq += y[j] * y[j];
      cc += y[j] * f.g[j];
    }
    CHECK(q[i] == doctest::Approx(qq).epsilon(1e-14));
    CHECK(c[i] == doctest::Approx(cc).epsilon(1e-14));
  }
}

TEST_CASE("dispatch can be forced and restored") {
  const kernels::Isa before = kernels::active_isa();
  CHECK(kernels::force_isa(kernels::Isa::kScalar));
  CHECK(kernels::active_isa() == kernels::Isa::kScalar);
  CHECK(kernels::isa_name(kernels::Isa::kScalar) == "scalar");
  if (kernels::cpu_has_avx2()) {
    CHECK(kernels::force_isa(kernels::Isa::kAvx2));
    CHECK(kernels::active_isa() == kernels::Isa::kAvx2);
  }
  kernels::force_isa(before);
}
