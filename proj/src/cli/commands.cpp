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
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <tuple>

#include "nigmrf/cli.hpp"
#include "nigmrf/error.hpp"
#include "nigmrf/parallel.hpp"
#include "nigmrf/rng.hpp"
#include "nigmrf/synth.hpp"

namespace nigmrf::cli {

namespace fs = std::filesystem;

namespace {

// Stream tags for seed derivation.
constexpr std::uint64_t kRandomTag = 1, kKmeansTag = 2, kHierTag = 3, kFitTag = 7, kSelectTag = 9;
constexpr std::uint64_t kSubjectTag = 11, kFoldTag = 13, kPredictTag = 17;

bool operator==(const StartPlan& a, const StartPlan& b) {
  return a.random == b.random && a.kmeans == b.kmeans && a.hierarchical == b.hierarchical &&
         a.constant == b.constant && a.gmm == b.gmm && a.model == b.model;
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream os(p);
  if (!os) throw IoError("cannot write '" + p.string() + "'");
  return os;
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir + "': " + ec.message());
}

std::string fmt(double v) { return std::isnan(v) ? "" : format_double(v); }

// Constant start on the standardized scale, mapped back to data units.
MixtureModel standardized_constant(const SiteData& x, InitOptions io) {
  Vec center = Vec::Zero(x.d), scale = Vec::Ones(x.d);
  SiteData z = x;
  for (int c = 0; c < x.d; ++c) {
    double m = 0.0, s = 0.0;
    for (std::size_t i = 0; i < x.n; ++i) m += x.at(c, i);
    m /= x.n;
    for (std::size_t i = 0; i < x.n; ++i) s += (x.at(c, i) - m) * (x.at(c, i) - m);
    s = std::sqrt(s / x.n);
    center(c) = m;
    scale(c) = s > 0.0 ? s : 1.0;
    for (std::size_t i = 0; i < x.n; ++i) z.at(c, i) = (x.at(c, i) - m) / scale(c);
  }
  io.kurt = 1.0;
  MixtureModel m = initialize(z, InitStrategy::kConstant, io);
  for (auto& cl : m.classes) {
    cl.loc = center + scale.cwiseProduct(cl.loc);
    cl.prec_factor = scale.cwiseInverse().asDiagonal() * cl.prec_factor;
    cl.skew = scale.cwiseProduct(cl.skew);
  }
  return m;
}

MixtureModel lift(const MixtureModel& src, const SiteData& x, const FitSettings& s) {
  if (src.K() != s.K) throw UsageError("start model has K = " + std::to_string(src.K()) + ", expected " + std::to_string(s.K));
  InitOptions io;
  io.family = s.family;
  io.spatial = s.spatial;
  io.K = s.K;
  io.kurt = s.init_kurt;
  io.from = &src;
  return initialize(x, InitStrategy::kFromModel, io);
}

VolumeGrid load_input(const std::string& path, const std::optional<SliceRange>& slices) {
  VolumeGrid g = load_volume(path);
  if (slices) {
    if (slices->end > g.dims.nz) throw UsageError("slice range exceeds the " + std::to_string(g.dims.nz) + " slices of '" + path + "'");
    g = restrict_slices(g, slices->begin, slices->end);
  }
  if (g.in_mask_count() == 0) throw UsageError("'" + path + "' has no voxels in the analysis region");
  return g;
}

void check_split(const ChannelSplit& split, int channels, const std::string& what) {
  try {
    validate(split, channels);
  } catch (const UsageError& e) {
    throw UsageError(what + ": " + e.what());
  }
}

VolumeGrid planar_to_volume(const VolumeGrid& like, const SiteGraph& graph, const std::vector<double>& v, int channels) {
  VolumeGrid out(like.dims, channels);
  out.voxel_size = like.voxel_size;
  out.mask = like.mask;
  const std::size_t n = graph.n;
  for (int a = 0; a < channels; ++a)
    for (std::size_t i = 0; i < n; ++i) out.value(graph.voxel[i], a) = static_cast<float>(v[a * n + i]);
  return out;
}

std::vector<double> channel_sites(const VolumeGrid& g, const SiteGraph& graph, int c) {
  std::vector<double> v(graph.n);
  for (std::size_t i = 0; i < graph.n; ++i) v[i] = g.value(graph.voxel[i], c);
  return v;
}

struct Maps {
  VolumeGrid mean, std, median, crps, mean_filtered, median_filtered;
  std::vector<Evaluation> evaluations;
};

// Prediction maps for one volume; predictors and truth are given as site data.
Maps make_maps(const MixtureModel& m, const VolumeGrid& like, const SiteGraph& graph, const SiteData& predictors,
               const SiteData* truth, const PredictSettings& s, std::uint64_t seed) {
  PredictOptions po = s.options;
  po.seed = seed;
  const Prediction p = predict(m, graph, predictors, po, truth);
  const int A = p.targets;
  Maps out;
  out.mean = planar_to_volume(like, graph, p.mean, A);
  out.std = planar_to_volume(like, graph, p.std, A);
  if (!p.median.empty()) out.median = planar_to_volume(like, graph, p.median, A);
  if (!p.crps.empty()) out.crps = planar_to_volume(like, graph, p.crps, A);
  auto filtered = [&](const VolumeGrid& g) {
    VolumeGrid f = g;
    for (int a = 0; a < A; ++a) {
      const VolumeGrid fa = median_filter(f, s.kernel, a);
      f = fa;
    }
    return f;
  };
  if (s.filter) {
    out.mean_filtered = filtered(out.mean);
    if (!p.median.empty()) out.median_filtered = filtered(out.median);
  }
  if (truth) {
    const std::size_t n = graph.n;
    for (int a = 0; a < A; ++a) {
      const std::string suffix = A > 1 ? ".t" + std::to_string(a) : "";
      const std::span<const double> t(truth->channel(a), n), crps(p.crps.data() + a * n, n);
      auto add = [&](const std::string& name, const VolumeGrid& map) {
        if (map.data.empty()) return;
        const std::vector<double> v = channel_sites(map, graph, a);
        out.evaluations.push_back({name + suffix, compute_metrics(v, t, s.bin_width, crps)});
      };
      add("mean", out.mean);
      add("median", out.median);
      add("mean_filtered", out.mean_filtered);
      add("median_filtered", out.median_filtered);
    }
  }
  return out;
}

SiteData sites_of(const VolumeGrid& g, const SiteGraph& graph, const std::vector<int>& channels) {
  return gather_sites(g, graph, channels);
}

void write_volume(const VolumeGrid& g, const fs::path& p) {
  if (!g.data.empty()) save_volume(g, p.string());
}

int cmd_simulate(const Config& cfg, std::ostream& log) {
  const SimulateConfig& c = cfg.simulate;
  validate(c.model);
  ensure_dir(cfg.out);
  const std::vector<std::uint8_t> mask = c.mask == "ellipsoid" ? ellipsoid_mask(c.dims) : std::vector<std::uint8_t>{};
  for (int s = 0; s < c.subjects; ++s) {
    const SynthResult r = synth_generate(c.model, c.dims, mask, stream_key({cfg.seed, kSubjectTag, static_cast<std::uint64_t>(s)}), c.burn_in);
    const std::string tag = c.subjects == 1 ? "" : "_" + std::to_string(s + 1);
    save_volume(r.volume, (fs::path(cfg.out) / ("volume" + tag + ".volm")).string());
    save_volume(labels_to_volume(r.volume, r.graph, r.labels), (fs::path(cfg.out) / ("labels" + tag + ".volm")).string());
    log << "simulate: subject " << s + 1 << ": " << r.graph.n << " voxels\n";
  }
  save_model(c.model, (fs::path(cfg.out) / "model.yaml").string());
  return kExitOk;
}

int cmd_fit(const Config& cfg, std::ostream& log) {
  const FitConfig& c = cfg.fit;
  std::vector<VolumeGrid> grids;
  for (const std::string& p : c.training) grids.push_back(load_input(p, c.slices));
  std::vector<const VolumeGrid*> ptrs;
  for (const auto& g : grids) {
    if (g.channels != grids[0].channels) throw UsageError("training volumes have different channel counts");
    ptrs.push_back(&g);
  }
  check_split(c.split, grids[0].channels, "fit.split");
  const TrainingSet train = make_training_set(ptrs);
  ensure_dir(cfg.out);
  const FitRun run = fit_with_restarts(train, c.split, c.settings, cfg.seed);
  {
    std::ofstream os = open_out(fs::path(cfg.out) / "trace.csv");
    write_trace_csv(run.trace, os);
  }
  {
    std::ofstream os = open_out(fs::path(cfg.out) / "starts.csv");
    write_starts_csv(run.starts, os);
  }
  if (!run.ok) throw NumericError("fit: every start ended in a numeric failure; see trace.csv");
  save_model(run.model, (fs::path(cfg.out) / "model.yaml").string());
  for (const StartRecord& s : run.starts)
    if (s.selected)
      log << "fit: selected start " << s.index << " (" << s.strategy << ", " << s.termination << ", " << s.iterations
          << " iterations, training MAE " << s.training_mae << ")\n";
  return kExitOk;
}

int cmd_predict(const Config& cfg, std::ostream& log) {
  const PredictConfig& c = cfg.predict;
  const MixtureModel m = load_model(c.model);
  if (m.split.empty()) throw UsageError("predict: model file has no channel split");
  const VolumeGrid vol = load_input(c.volume, c.slices);
  if (c.truth_channel && *c.truth_channel >= vol.channels)
    throw UsageError("predict.truth_channel " + std::to_string(*c.truth_channel) + " exceeds the volume's channels");
  std::vector<int> pred_channels;
  if (vol.channels == m.channels) {
    pred_channels = m.split.predictors;
  } else {
    for (int ch = 0; ch < vol.channels; ++ch)
      if (!c.truth_channel || ch != *c.truth_channel) pred_channels.push_back(ch);
  }
  if (pred_channels.size() != m.split.predictors.size())
    throw UsageError("predict: volume has " + std::to_string(vol.channels) + " channels but the model's split needs " +
                     std::to_string(m.split.predictors.size()) + " predictor channels");
  if (c.truth_channel && m.split.target.size() != 1) throw UsageError("predict.truth_channel needs a single target channel");
  const SiteGraph graph = SiteGraph::from_mask(vol.dims, vol.mask);
  const SiteData predictors = sites_of(vol, graph, pred_channels);
  SiteData truth;
  if (c.truth_channel) truth = sites_of(vol, graph, {*c.truth_channel});
  ensure_dir(cfg.out);
  const Maps maps = make_maps(m, vol, graph, predictors, c.truth_channel ? &truth : nullptr, c.settings,
                              stream_key({cfg.seed, kPredictTag}));
  const fs::path out(cfg.out);
  write_volume(maps.mean, out / "pred_mean.volm");
  write_volume(maps.std, out / "pred_std.volm");
  write_volume(maps.median, out / "pred_median.volm");
  write_volume(maps.crps, out / "pred_crps.volm");
  write_volume(maps.mean_filtered, out / "pred_mean_filtered.volm");
  write_volume(maps.median_filtered, out / "pred_median_filtered.volm");
  for (const Evaluation& e : maps.evaluations) {
    const std::string name = e.predictor == "mean" ? "metrics.csv" : "metrics_" + e.predictor + ".csv";
    std::ofstream os = open_out(out / name);
    write_metrics_csv(e.report, os);
    log << "predict: " << e.predictor << " MAE " << e.report.mae << " RMSE " << e.report.rmse << "\n";
  }
  return kExitOk;
}

int cmd_evaluate(const Config& cfg, std::ostream& log) {
  const EvaluateConfig& c = cfg.evaluate;
  const VolumeGrid pred = load_volume(c.prediction);
  const VolumeGrid truth_all = load_volume(c.truth);
  if (c.truth_channel >= truth_all.channels) throw UsageError("evaluate.truth_channel exceeds the truth volume's channels");
  const int ch[] = {c.truth_channel};
  VolumeGrid truth = select_channels(truth_all, ch);
  if (!(pred.dims == truth.dims)) throw UsageError("evaluate: prediction and truth have different dimensions");
  truth.mask = pred.mask;
  std::optional<VolumeGrid> crps;
  if (!c.crps.empty()) crps = load_volume(c.crps);
  const MetricsReport r = compute_metrics(pred, truth, c.bin_width, crps ? &*crps : nullptr);
  ensure_dir(cfg.out);
  std::ofstream os = open_out(fs::path(cfg.out) / "metrics.csv");
  write_metrics_csv(r, os);
  log << "evaluate: MAE " << r.mae << " RMSE " << r.rmse << " ME " << r.mean_error << "\n";
  return kExitOk;
}

int cmd_crossval(const Config& cfg, std::ostream& log) {
  ensure_dir(cfg.out);
  const CrossvalResult r = run_crossval(cfg.crossval, cfg.seed, &log);
  {
    std::ofstream os = open_out(fs::path(cfg.out) / "crossval.csv");
    write_crossval_csv(r, os);
  }
  const fs::path bins = fs::path(cfg.out) / "crossval_bins";
  ensure_dir(bins.string());
  for (const FoldRow& row : r.rows) {
    if (row.fold == 0 || !row.ok) continue;
    std::ofstream os = open_out(bins / (row.model + "_K" + std::to_string(row.K) + "_fold" + std::to_string(row.fold) + "_" +
                                        row.predictor + ".csv"));
    write_metrics_csv(row.report, os);
  }
  return r.failed ? kExitPartial : kExitOk;
}

}  // namespace

StartPlan resolve_starts(const StartPlan& plan, Family family, bool spatial) {
  const bool plain = family == Family::kGaussian && !spatial;
  StartPlan p = plan;
  auto pick = [](int v, int fallback) { return v >= 0 ? v : fallback; };
  p.random = pick(plan.random, plain ? 15 : 0);
  p.kmeans = pick(plan.kmeans, plain ? 1 : 0);
  p.hierarchical = pick(plan.hierarchical, plain ? 1 : 0);
  p.constant = pick(plan.constant, plain ? 0 : 1);
  p.gmm = pick(plan.gmm, plain ? 0 : 1);
  return p;
}

FitRun fit_with_restarts(const TrainingSet& train, const ChannelSplit& split, const FitSettings& s, std::uint64_t seed,
                         const FitRun* gmm) {
  check_split(split, train.data.d, "channel split");
  const StartPlan plan = resolve_starts(s.starts, s.family, s.spatial);
  InitOptions io;
  io.family = s.family;
  io.spatial = s.spatial;
  io.K = s.K;
  io.kurt = s.init_kurt;

  std::vector<std::pair<std::string, MixtureModel>> inits;
  auto add = [&](const std::string& name, InitStrategy strategy, std::uint64_t tag, int count) {
    for (int r = 0; r < count; ++r) {
      io.seed = stream_key({seed, tag, static_cast<std::uint64_t>(r)});
      inits.emplace_back(name, initialize(train.data, strategy, io));
    }
  };
  add("random", InitStrategy::kRandom, kRandomTag, plan.random);
  add("kmeans", InitStrategy::kKmeans, kKmeansTag, plan.kmeans);
  add("hierarchical", InitStrategy::kHierarchical, kHierTag, plan.hierarchical);
  for (int r = 0; r < plan.constant; ++r) inits.emplace_back("constant", standardized_constant(train.data, io));
  if (plan.gmm > 0) {
    FitRun own;
    if (!gmm) {
      FitSettings g = s;
      g.family = Family::kGaussian;
      g.spatial = false;
      g.starts = s.gmm_starts;
      own = fit_with_restarts(train, split, g, seed);
      gmm = &own;
    }
    if (gmm->ok) inits.emplace_back("gmm", lift(gmm->model, train.data, s));
  }
  if (!plan.model.empty()) inits.emplace_back("model", lift(load_model(plan.model), train.data, s));
  if (inits.empty()) throw UsageError("the start plan has no starts");

  FitRun run;
  std::vector<MixtureModel> candidates;
  std::vector<int> candidate_start;
  for (std::size_t i = 0; i < inits.size(); ++i) {
    StartRecord rec;
    rec.index = static_cast<int>(i) + 1;
    rec.strategy = inits[i].first;
    rec.seed = stream_key({seed, kFitTag, i});
    MixtureModel init = inits[i].second;
    init.split = split;
    FitOptions fo = s.options;
    fo.seed = rec.seed;
    fo.restart = rec.index;
    try {
      FitResult fr = em_gradient_fit(train, init, fo);
      rec.termination = fr.termination;
      rec.iterations = static_cast<int>(fr.trace.size());
      rec.final_q = fr.model.fit.final_q;
      run.trace.insert(run.trace.end(), fr.trace.begin(), fr.trace.end());
      if (fr.termination != "non_finite" && !fr.trace.empty()) {
        candidates.push_back(std::move(fr.model));
        candidate_start.push_back(static_cast<int>(run.starts.size()));
      }
    } catch (const NumericError&) {
      rec.termination = "non_finite";
    } catch (const ParameterError&) {
      rec.termination = "non_finite";
    }
    rec.training_mae = std::numeric_limits<double>::quiet_NaN();
    run.starts.push_back(rec);
  }
  if (candidates.empty()) return run;
  const std::uint64_t sel_seed = stream_key({seed, kSelectTag});
  for (std::size_t c = 0; c < candidates.size(); ++c)
    run.starts[candidate_start[c]].training_mae = training_mae(candidates[c], train, s.select_sweeps, sel_seed);
  const int best = select_model(candidates, train, s.select_sweeps, sel_seed);
  run.starts[candidate_start[best]].selected = true;
  run.model = candidates[best];
  run.ok = true;
  return run;
}

std::vector<Evaluation> evaluate_prediction(const MixtureModel& m, const VolumeGrid& volume, const PredictSettings& s,
                                            std::uint64_t seed) {
  check_split(m.split, volume.channels, "volume channels");
  const SiteGraph graph = SiteGraph::from_mask(volume.dims, volume.mask);
  const SiteData predictors = sites_of(volume, graph, m.split.predictors);
  const SiteData truth = sites_of(volume, graph, m.split.target);
  return make_maps(m, volume, graph, predictors, &truth, s, seed).evaluations;
}

CrossvalResult run_crossval(const CrossvalConfig& cfg, std::uint64_t seed, std::ostream* log) {
  std::vector<VolumeGrid> subjects;
  for (const std::string& p : cfg.subjects) subjects.push_back(load_input(p, cfg.slices));
  for (const auto& g : subjects)
    if (g.channels != subjects[0].channels) throw UsageError("crossval: subjects have different channel counts");
  check_split(cfg.split, subjects[0].channels, "crossval.split");
  if (cfg.models.empty() || cfg.K.empty()) throw UsageError("crossval: empty model grid");

  CrossvalResult res;
  const int S = static_cast<int>(subjects.size());
  // Per-model, per-K, per-predictor accumulators for the aggregate rows.
  struct Agg {
    int folds = 0, ok = 0;
    std::size_t n = 0;
    double mae = 0, rmse = 0, me = 0, crps = 0;
  };
  std::map<std::tuple<std::string, int, std::string>, Agg> agg;
  std::vector<std::tuple<std::string, int, std::string>> order;

  for (int K : cfg.K) {
    for (int f = 0; f < S; ++f) {
      std::vector<const VolumeGrid*> rest;
      for (int t = 0; t < S; ++t)
        if (t != f) rest.push_back(&subjects[t]);
      const TrainingSet train = make_training_set(rest);
      const std::uint64_t fold_seed = stream_key({seed, kFoldTag, static_cast<std::uint64_t>(K), static_cast<std::uint64_t>(f)});
      FitSettings gs = cfg.fit;
      gs.family = Family::kGaussian;
      gs.spatial = false;
      gs.K = K;
      gs.starts = cfg.fit.gmm_starts;
      std::optional<FitRun> gmm;
      auto gmm_fit = [&]() -> const FitRun& {
        if (!gmm) gmm = fit_with_restarts(train, cfg.split, gs, fold_seed);
        return *gmm;
      };
      for (const ModelSpec& spec : cfg.models) {
        FitSettings s = cfg.fit;
        s.family = spec.family;
        s.spatial = spec.spatial;
        s.K = K;
        std::vector<Evaluation> evals;
        bool ok = true;
        std::string why;
        try {
          FitRun run;
          const bool plain = spec.family == Family::kGaussian && !spec.spatial;
          if (plain && resolve_starts(s.starts, s.family, false) == resolve_starts(gs.starts, gs.family, false)) {
            run = gmm_fit();
          } else {
            const StartPlan plan = resolve_starts(s.starts, s.family, s.spatial);
            run = fit_with_restarts(train, cfg.split, s, fold_seed, plan.gmm > 0 ? &gmm_fit() : nullptr);
          }
          if (!run.ok) throw NumericError("every start failed");
          evals = evaluate_prediction(run.model, subjects[f], cfg.predict,
                                      stream_key({seed, kPredictTag, static_cast<std::uint64_t>(K), static_cast<std::uint64_t>(f)}));
        } catch (const UsageError&) {
          throw;
        } catch (const Error& e) {
          ok = false;
          why = e.what();
        }
        if (!ok) {
          ++res.failed;
          FoldRow row{spec.name, K, f + 1, "mean", false, {}};
          row.report.mae = row.report.rmse = row.report.mean_error = std::numeric_limits<double>::quiet_NaN();
          res.rows.push_back(row);
          if (log) *log << "crossval: " << spec.name << " K=" << K << " fold " << f + 1 << " failed: " << why << "\n";
          auto key = std::make_tuple(spec.name, K, std::string("mean"));
          if (!agg.count(key)) order.push_back(key);
          ++agg[key].folds;
          continue;
        }
        for (const Evaluation& e : evals) {
          res.rows.push_back({spec.name, K, f + 1, e.predictor, true, e.report});
          auto key = std::make_tuple(spec.name, K, e.predictor);
          if (!agg.count(key)) order.push_back(key);
          Agg& a = agg[key];
          ++a.folds;
          ++a.ok;
          a.n += e.report.n;
          a.mae += e.report.mae;
          a.rmse += e.report.rmse;
          a.me += e.report.mean_error;
          a.crps += e.report.mean_crps;
        }
        if (log && !evals.empty())
          *log << "crossval: " << spec.name << " K=" << K << " fold " << f + 1 << " MAE " << evals[0].report.mae << "\n";
      }
    }
  }
  for (const auto& key : order) {
    const Agg& a = agg[key];
    FoldRow row{std::get<0>(key), std::get<1>(key), 0, std::get<2>(key), a.ok == a.folds && a.ok > 0, {}};
    row.report.n = a.n;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    row.report.mae = a.ok ? a.mae / a.ok : nan;
    row.report.rmse = a.ok ? a.rmse / a.ok : nan;
    row.report.mean_error = a.ok ? a.me / a.ok : nan;
    row.report.mean_crps = a.ok ? a.crps / a.ok : nan;
    res.rows.push_back(row);
  }
  return res;
}

void write_trace_csv(const std::vector<TraceRow>& trace, std::ostream& os) {
  os << "restart,iteration,q_before,q_after,loglik,grad_norm,step,mrf_step,tier,wall_ms\n";
  for (const TraceRow& r : trace)
    os << r.restart << ',' << r.iteration << ',' << fmt(r.q_before) << ',' << fmt(r.q_after) << ',' << fmt(r.loglik) << ','
       << fmt(r.grad_norm) << ',' << fmt(r.step) << ',' << fmt(r.mrf_step) << ',' << r.tier << ',' << fmt(r.wall_ms) << '\n';
}

void write_starts_csv(const std::vector<StartRecord>& starts, std::ostream& os) {
  os << "start,strategy,seed,termination,iterations,final_q,training_mae,selected\n";
  for (const StartRecord& s : starts)
    os << s.index << ',' << s.strategy << ',' << s.seed << ',' << s.termination << ',' << s.iterations << ','
       << fmt(s.final_q) << ',' << fmt(s.training_mae) << ',' << (s.selected ? 1 : 0) << '\n';
}

void write_crossval_csv(const CrossvalResult& r, std::ostream& os) {
  os << "model,K,fold,predictor,status,n,mae,rmse,mean_error,mean_crps\n";
  for (const FoldRow& row : r.rows)
    os << row.model << ',' << row.K << ',' << (row.fold ? std::to_string(row.fold) : std::string("all")) << ','
       << row.predictor << ',' << (row.ok ? "ok" : "failed") << ',' << row.report.n << ',' << fmt(row.report.mae) << ','
       << fmt(row.report.rmse) << ',' << fmt(row.report.mean_error) << ',' << fmt(row.report.mean_crps) << '\n';
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const NumericError*>(&e)) return kExitNumeric;
  if (dynamic_cast<const Error*>(&e)) return kExitUsage;
  return kExitNumeric;
}

int run_command(const Config& cfg, std::ostream& log) {
  if (cfg.threads > 0) set_num_threads(cfg.threads);
  switch (cfg.command) {
    case Command::kSimulate: return cmd_simulate(cfg, log);
    case Command::kFit: return cmd_fit(cfg, log);
    case Command::kPredict: return cmd_predict(cfg, log);
    case Command::kEvaluate: return cmd_evaluate(cfg, log);
    case Command::kCrossval: return cmd_crossval(cfg, log);
  }
  return kExitUsage;
}

}  // namespace nigmrf::cli
