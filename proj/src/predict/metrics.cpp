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
#include <map>

#include "nigmrf/error.hpp"
#include "nigmrf/predict.hpp"

namespace nigmrf {

MetricsReport compute_metrics(std::span<const double> pred, std::span<const double> truth, double bin_width,
                              std::span<const double> crps) {
  if (pred.size() != truth.size()) throw UsageError("metrics: prediction and truth differ in length");
  if (pred.empty()) throw UsageError("metrics: no voxels to evaluate");
  if (!(bin_width > 0.0)) throw UsageError("metrics: bin width must be positive");
  if (!crps.empty() && crps.size() != pred.size()) throw UsageError("metrics: CRPS map differs in length");

  struct Acc {
    std::size_t n = 0;
    double abs = 0.0, sq = 0.0, sum = 0.0;
  };
  Acc all;
  std::map<long long, Acc> bins;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double e = pred[i] - truth[i];
    for (Acc* a : {&all, &bins[static_cast<long long>(std::floor(pred[i] / bin_width))]}) {
      ++a->n;
      a->abs += std::abs(e);
      a->sq += e * e;
      a->sum += e;
    }
  }
  MetricsReport r;
  r.n = all.n;
  r.mae = all.abs / all.n;
  r.rmse = std::sqrt(all.sq / all.n);
  r.mean_error = all.sum / all.n;
  if (!crps.empty()) {
    double s = 0.0;
    for (double c : crps) s += c;
    r.mean_crps = s / crps.size();
  }
  for (const auto& [idx, a] : bins) {
    MetricsBin b;
    b.low = idx * bin_width;
    b.high = b.low + bin_width;
    b.n = a.n;
    b.mae = a.abs / a.n;
    b.rmse = std::sqrt(a.sq / a.n);
    b.me = a.sum / a.n;
    b.density = static_cast<double>(a.n) / (static_cast<double>(all.n) * bin_width);
    r.bins.push_back(b);
  }
  return r;
}

MetricsReport compute_metrics(const VolumeGrid& pred, const VolumeGrid& truth, double bin_width, const VolumeGrid* crps) {
  if (!(pred.dims == truth.dims) || (crps && !(crps->dims == pred.dims)))
    throw UsageError("metrics: volumes have different dimensions");
  std::vector<double> p, t, c;
  for (std::size_t v = 0; v < pred.dims.count(); ++v) {
    if (!pred.in_mask(v)) continue;
    p.push_back(pred.value(v, 0));
    t.push_back(truth.value(v, 0));
    if (crps) c.push_back(crps->value(v, 0));
  }
  return compute_metrics(p, t, bin_width, c);
}

void write_metrics_csv(const MetricsReport& r, std::ostream& os) {
  os << "metric,value,bin_low,bin_high,n\n";
  auto scalar = [&](const char* name, double v) { os << name << ',' << format_double(v) << ",,," << r.n << '\n'; };
  scalar("mae", r.mae);
  scalar("rmse", r.rmse);
  scalar("mean_error", r.mean_error);
  if (!std::isnan(r.mean_crps)) scalar("mean_crps", r.mean_crps);
  for (const MetricsBin& b : r.bins) {
    const std::string tail = ',' + format_double(b.low) + ',' + format_double(b.high) + ',' + std::to_string(b.n) + '\n';
    os << "bin_mae," << format_double(b.mae) << tail;
    os << "bin_rmse," << format_double(b.rmse) << tail;
    os << "bin_mean_error," << format_double(b.me) << tail;
    os << "bin_density," << format_double(b.density) << tail;
  }
}

}  // namespace nigmrf
