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

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "nigmrf/cli.hpp"
#include "nigmrf/error.hpp"

namespace nigmrf::cli {

namespace fs = std::filesystem;

namespace {

constexpr int kMaxK = 64;

std::string where(const YAML::Node& n) {
  const YAML::Mark m = n.Mark();
  return m.line >= 0 ? " (line " + std::to_string(m.line + 1) + ")" : "";
}

[[noreturn]] void fail(const YAML::Node& n, const std::string& msg) { throw UsageError("config: " + msg + where(n)); }

void check_keys(const YAML::Node& map, const std::set<std::string>& allowed, const std::string& ctx) {
  if (!map.IsMap()) fail(map, "'" + ctx + "' must be a mapping");
  for (const auto& kv : map) {
    const std::string key = kv.first.as<std::string>();
    if (!allowed.count(key)) fail(kv.first, "unknown key '" + key + "' in " + ctx);
  }
}

YAML::Node need(const YAML::Node& map, const std::string& key, const std::string& ctx) {
  const YAML::Node n = map[key];
  if (!n) fail(map, "missing key '" + key + "' in " + ctx);
  return n;
}

template <class T>
T as(const YAML::Node& n, const std::string& what) {
  if (!n.IsScalar()) fail(n, what + " must be a single value");
  try {
    return n.as<T>();
  } catch (const YAML::Exception&) {
    fail(n, "bad value '" + n.Scalar() + "' for " + what);
  }
}

template <class T>
void opt(const YAML::Node& map, const std::string& key, const std::string& ctx, T& out) {
  if (const YAML::Node n = map[key]) out = as<T>(n, ctx + "." + key);
}

int int_at_least(const YAML::Node& map, const std::string& key, const std::string& ctx, int current, int lo) {
  int v = current;
  opt(map, key, ctx, v);
  if (map[key] && v < lo) fail(map[key], ctx + "." + key + " must be at least " + std::to_string(lo));
  return v;
}

double positive(const YAML::Node& map, const std::string& key, const std::string& ctx, double current) {
  double v = current;
  opt(map, key, ctx, v);
  if (map[key] && !(v > 0.0)) fail(map[key], ctx + "." + key + " must be positive");
  return v;
}

std::vector<int> int_list(const YAML::Node& n, const std::string& what) {
  if (!n.IsSequence()) fail(n, what + " must be a list of integers");
  std::vector<int> v;
  for (const auto& e : n) v.push_back(as<int>(e, what));
  return v;
}

struct Paths {
  fs::path base;
  std::string resolve(const std::string& p) const {
    const fs::path q(p);
    return (q.is_absolute() ? q : base / q).lexically_normal().string();
  }
};

std::string input_path(const YAML::Node& n, const std::string& what, const Paths& paths, bool check) {
  const std::string p = paths.resolve(as<std::string>(n, what));
  if (check && !fs::is_regular_file(p)) fail(n, what + ": no such file '" + p + "'");
  return p;
}

std::vector<std::string> path_list(const YAML::Node& n, const std::string& what, const Paths& paths, bool check) {
  std::vector<std::string> out;
  if (n.IsScalar()) {
    out.push_back(input_path(n, what, paths, check));
  } else if (n.IsSequence()) {
    for (const auto& e : n) out.push_back(input_path(e, what, paths, check));
  } else {
    fail(n, what + " must be a path or a list of paths");
  }
  if (out.empty()) fail(n, what + " is empty");
  return out;
}

Family family_of(const YAML::Node& n, const std::string& what) {
  try {
    return parse_family(as<std::string>(n, what));
  } catch (const UsageError&) {
    fail(n, what + " must be gaussian or nig");
  }
}

int K_of(const YAML::Node& n, const std::string& what) {
  const int K = as<int>(n, what);
  if (K < 1 || K > kMaxK) fail(n, what + " must be in [1, " + std::to_string(kMaxK) + "]");
  return K;
}

ChannelSplit split_of(const YAML::Node& n, const std::string& ctx) {
  check_keys(n, {"target", "predictors"}, ctx + ".split");
  ChannelSplit s;
  s.target = int_list(need(n, "target", ctx + ".split"), ctx + ".split.target");
  s.predictors = int_list(need(n, "predictors", ctx + ".split"), ctx + ".split.predictors");
  if (s.target.empty() || s.predictors.empty()) fail(n, ctx + ".split needs target and predictor channels");
  std::set<int> seen;
  for (int c : s.target) seen.insert(c);
  for (int c : s.predictors) seen.insert(c);
  for (int c : seen)
    if (c < 0) fail(n, ctx + ".split channels must be non-negative");
  if (seen.size() != s.target.size() + s.predictors.size()) fail(n, ctx + ".split lists a channel twice");
  return s;
}

SliceRange slices_of(const YAML::Node& n, const std::string& what) {
  const std::vector<int> v = int_list(n, what);
  if (v.size() != 2 || v[0] < 0 || v[1] <= v[0]) fail(n, what + " must be [begin, end) with 0 <= begin < end");
  return {v[0], v[1]};
}

StartPlan starts_of(const YAML::Node& n, const std::string& ctx, const Paths& paths, bool check, bool allow_lift) {
  std::set<std::string> keys = {"random", "kmeans", "hierarchical", "constant"};
  if (allow_lift) keys.insert({"gmm", "model"});
  check_keys(n, keys, ctx);
  StartPlan p;
  p.random = int_at_least(n, "random", ctx, p.random, 0);
  p.kmeans = int_at_least(n, "kmeans", ctx, p.kmeans, 0);
  p.hierarchical = int_at_least(n, "hierarchical", ctx, p.hierarchical, 0);
  p.constant = int_at_least(n, "constant", ctx, p.constant, 0);
  if (allow_lift) {
    p.gmm = int_at_least(n, "gmm", ctx, p.gmm, 0);
    if (n["gmm"] && p.gmm > 1) fail(n["gmm"], ctx + ".gmm must be 0 or 1");
    if (n["model"]) p.model = input_path(n["model"], ctx + ".model", paths, check);
  }
  return p;
}

const std::set<std::string> kFitOptionKeys = {"samples",   "burn_in", "max_iters",     "step_tol",  "q_tol",
                                              "max_halvings", "standardize", "select_sweeps", "init_kurt", "starts",
                                              "gmm_starts"};

void fit_options_of(const YAML::Node& n, const std::string& ctx, FitSettings& s, const Paths& paths, bool check) {
  FitOptions& o = s.options;
  o.samples = int_at_least(n, "samples", ctx, o.samples, 1);
  o.burn_in = int_at_least(n, "burn_in", ctx, o.burn_in, 0);
  o.max_iters = int_at_least(n, "max_iters", ctx, o.max_iters, 1);
  o.max_halvings = int_at_least(n, "max_halvings", ctx, o.max_halvings, 1);
  o.step_tol = positive(n, "step_tol", ctx, o.step_tol);
  opt(n, "q_tol", ctx, o.q_tol);
  if (n["q_tol"] && o.q_tol < 0.0) fail(n["q_tol"], ctx + ".q_tol must be non-negative");
  opt(n, "standardize", ctx, o.standardize);
  s.select_sweeps = int_at_least(n, "select_sweeps", ctx, s.select_sweeps, 1);
  s.init_kurt = positive(n, "init_kurt", ctx, s.init_kurt);
  if (n["starts"]) s.starts = starts_of(n["starts"], ctx + ".starts", paths, check, true);
  if (n["gmm_starts"]) s.gmm_starts = starts_of(n["gmm_starts"], ctx + ".gmm_starts", paths, check, false);
}

const std::set<std::string> kPredictOptionKeys = {"sweeps", "burn_fraction", "median_draws", "crps_pairs",
                                                  "median", "filter",        "bin_width"};

void predict_options_of(const YAML::Node& n, const std::string& ctx, PredictSettings& s) {
  PredictOptions& o = s.options;
  o.sweeps = int_at_least(n, "sweeps", ctx, o.sweeps, 1);
  opt(n, "burn_fraction", ctx, o.burn_fraction);
  if (n["burn_fraction"] && !(o.burn_fraction >= 0.0 && o.burn_fraction < 1.0))
    fail(n["burn_fraction"], ctx + ".burn_fraction must be in [0, 1)");
  o.median_draws = int_at_least(n, "median_draws", ctx, o.median_draws, 2);
  o.crps_pairs = int_at_least(n, "crps_pairs", ctx, o.crps_pairs, 1);
  opt(n, "median", ctx, o.want_median);
  s.bin_width = positive(n, "bin_width", ctx, s.bin_width);
  if (const YAML::Node f = n["filter"]) {
    check_keys(f, {"enabled", "kernel"}, ctx + ".filter");
    opt(f, "enabled", ctx + ".filter", s.filter);
    if (f["kernel"]) {
      try {
        s.kernel = parse_filter_kernel(as<std::string>(f["kernel"], ctx + ".filter.kernel"));
      } catch (const UsageError&) {
        fail(f["kernel"], ctx + ".filter.kernel must be plus or square");
      }
    }
  }
}

std::set<std::string> with(std::set<std::string> a, const std::set<std::string>& b) {
  a.insert(b.begin(), b.end());
  return a;
}

MixtureModel model_node(const YAML::Node& n, const std::string& what, const Paths& paths, bool check) {
  if (n.IsScalar()) {
    const std::string p = input_path(n, what, paths, check);
    if (!check) return {};
    try {
      return load_model(p);
    } catch (const Error& e) {
      fail(n, what + ": " + e.what());
    }
  }
  if (!n.IsMap()) fail(n, what + " must be a model file path or an inline model");
  YAML::Emitter em;
  em << n;
  try {
    return model_from_yaml(em.c_str());
  } catch (const Error& e) {
    // Inline line numbers are relative to the nested block; report the block start.
    fail(n, what + ": " + e.what());
  }
}

void parse_simulate(const YAML::Node& n, SimulateConfig& c, const Paths& paths, bool check) {
  const std::string ctx = "simulate";
  check_keys(n, {"model", "dims", "mask", "subjects", "burn_in"}, ctx);
  c.model = model_node(need(n, "model", ctx), ctx + ".model", paths, check);
  if (const YAML::Node d = n["dims"]) {
    const std::vector<int> v = int_list(d, ctx + ".dims");
    if (v.size() != 3 || v[0] < 1 || v[1] < 1 || v[2] < 1) fail(d, ctx + ".dims must be three positive sizes");
    c.dims = {v[0], v[1], v[2]};
  }
  opt(n, "mask", ctx, c.mask);
  if (c.mask != "full" && c.mask != "ellipsoid") fail(n["mask"], ctx + ".mask must be full or ellipsoid");
  c.subjects = int_at_least(n, "subjects", ctx, c.subjects, 1);
  c.burn_in = int_at_least(n, "burn_in", ctx, c.burn_in, 0);
}

void parse_fit(const YAML::Node& n, FitConfig& c, const Paths& paths, bool check) {
  const std::string ctx = "fit";
  check_keys(n, with({"training", "split", "slices", "family", "spatial", "K"}, kFitOptionKeys), ctx);
  c.training = path_list(need(n, "training", ctx), ctx + ".training", paths, check);
  c.split = split_of(need(n, "split", ctx), ctx);
  if (n["slices"]) c.slices = slices_of(n["slices"], ctx + ".slices");
  if (n["family"]) c.settings.family = family_of(n["family"], ctx + ".family");
  opt(n, "spatial", ctx, c.settings.spatial);
  if (n["K"]) c.settings.K = K_of(n["K"], ctx + ".K");
  fit_options_of(n, ctx, c.settings, paths, check);
}

void parse_predict(const YAML::Node& n, PredictConfig& c, const Paths& paths, bool check) {
  const std::string ctx = "predict";
  check_keys(n, with({"model", "volume", "truth_channel", "slices"}, kPredictOptionKeys), ctx);
  c.model = input_path(need(n, "model", ctx), ctx + ".model", paths, check);
  c.volume = input_path(need(n, "volume", ctx), ctx + ".volume", paths, check);
  if (n["truth_channel"]) {
    c.truth_channel = as<int>(n["truth_channel"], ctx + ".truth_channel");
    if (*c.truth_channel < 0) fail(n["truth_channel"], ctx + ".truth_channel must be non-negative");
  }
  if (n["slices"]) c.slices = slices_of(n["slices"], ctx + ".slices");
  predict_options_of(n, ctx, c.settings);
}

void parse_evaluate(const YAML::Node& n, EvaluateConfig& c, const Paths& paths, bool check) {
  const std::string ctx = "evaluate";
  check_keys(n, {"prediction", "truth", "truth_channel", "crps", "bin_width"}, ctx);
  c.prediction = input_path(need(n, "prediction", ctx), ctx + ".prediction", paths, check);
  c.truth = input_path(need(n, "truth", ctx), ctx + ".truth", paths, check);
  c.truth_channel = int_at_least(n, "truth_channel", ctx, c.truth_channel, 0);
  if (n["crps"]) c.crps = input_path(n["crps"], ctx + ".crps", paths, check);
  c.bin_width = positive(n, "bin_width", ctx, c.bin_width);
}

void parse_crossval(const YAML::Node& n, CrossvalConfig& c, const Paths& paths, bool check) {
  const std::string ctx = "crossval";
  check_keys(n, {"subjects", "split", "slices", "models", "K", "fit", "predict"}, ctx);
  const YAML::Node subjects = need(n, "subjects", ctx);
  c.subjects = path_list(subjects, ctx + ".subjects", paths, check);
  if (c.subjects.size() < 2) fail(subjects, ctx + ".subjects needs at least two volumes");
  c.split = split_of(need(n, "split", ctx), ctx);
  if (n["slices"]) c.slices = slices_of(n["slices"], ctx + ".slices");
  if (const YAML::Node models = n["models"]) {
    if (!models.IsSequence() || models.size() == 0) fail(models, ctx + ".models must be a non-empty list");
    std::set<std::string> names;
    for (const auto& m : models) {
      ModelSpec s;
      if (m.IsScalar()) {
        // Shorthand for the four standard models.
        s.name = as<std::string>(m, ctx + ".models entry");
        if (s.name == "gmm" || s.name == "gmms") s.family = Family::kGaussian;
        else if (s.name == "nig" || s.name == "nigs") s.family = Family::kNig;
        else fail(m, ctx + ".models: unknown model '" + s.name + "' (gmm, gmms, nig, nigs or a mapping)");
        s.spatial = s.name.back() == 's';
      } else {
        check_keys(m, {"name", "family", "spatial"}, ctx + ".models entry");
        s.name = as<std::string>(need(m, "name", ctx + ".models entry"), ctx + ".models.name");
        s.family = family_of(need(m, "family", ctx + ".models entry"), ctx + ".models.family");
        opt(m, "spatial", ctx + ".models", s.spatial);
      }
      if (s.name.empty() || s.name.find_first_of(",/\\ \t") != std::string::npos)
        fail(m, ctx + ".models.name must be a plain word");
      if (!names.insert(s.name).second) fail(m, ctx + ".models repeats the name '" + s.name + "'");
      c.models.push_back(s);
    }
  } else {
    c.models = {{"gmm", Family::kGaussian, false},
                {"gmms", Family::kGaussian, true},
                {"nig", Family::kNig, false},
                {"nigs", Family::kNig, true}};
  }
  c.K = {c.fit.K};
  if (const YAML::Node k = n["K"]) {
    c.K.clear();
    if (k.IsScalar()) {
      c.K.push_back(K_of(k, ctx + ".K"));
    } else if (k.IsSequence()) {
      for (const auto& e : k) c.K.push_back(K_of(e, ctx + ".K"));
      if (c.K.empty()) fail(k, ctx + ".K is empty");
    } else {
      check_keys(k, {"from", "to"}, ctx + ".K");
      const int lo = K_of(need(k, "from", ctx + ".K"), ctx + ".K.from"), hi = K_of(need(k, "to", ctx + ".K"), ctx + ".K.to");
      if (hi < lo) fail(k, ctx + ".K.to must not be below K.from");
      for (int K = lo; K <= hi; ++K) c.K.push_back(K);
    }
  }
  if (const YAML::Node f = n["fit"]) {
    check_keys(f, kFitOptionKeys, ctx + ".fit");
    fit_options_of(f, ctx + ".fit", c.fit, paths, check);
  }
  if (const YAML::Node p = n["predict"]) {
    check_keys(p, kPredictOptionKeys, ctx + ".predict");
    predict_options_of(p, ctx + ".predict", c.predict);
  }
}

}  // namespace

Command parse_command(std::string_view name) {
  if (name == "simulate") return Command::kSimulate;
  if (name == "fit") return Command::kFit;
  if (name == "predict") return Command::kPredict;
  if (name == "evaluate") return Command::kEvaluate;
  if (name == "crossval") return Command::kCrossval;
  throw UsageError("unknown command '" + std::string(name) + "'");
}

std::string_view command_name(Command c) {
  switch (c) {
    case Command::kSimulate: return "simulate";
    case Command::kFit: return "fit";
    case Command::kPredict: return "predict";
    case Command::kEvaluate: return "evaluate";
    case Command::kCrossval: return "crossval";
  }
  return "";
}

Config parse_config(const std::string& text, Command command, const std::string& base_dir) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw UsageError("config: " + e.msg + " (line " + std::to_string(e.mark.line + 1) + ")");
  }
  if (!root || root.IsNull()) throw UsageError("config: document is empty");
  check_keys(root, {"seed", "out", "threads", "simulate", "fit", "predict", "evaluate", "crossval"}, "top level");

  const Paths paths{fs::path(base_dir)};
  Config c;
  c.command = command;
  opt(root, "seed", "top level", c.seed);
  if (root["out"]) c.out = paths.resolve(as<std::string>(root["out"], "out"));
  else c.out = paths.resolve(".");
  c.threads = int_at_least(root, "threads", "top level", c.threads, 0);

  const std::string section(command_name(command));
  if (!root[section]) fail(root, "missing section '" + section + "' for the " + section + " command");
  // Every section present is checked for unknown keys; only the active one must
  // reference existing files.
  auto run = [&](const char* name, auto&& parser, auto& target) {
    if (root[name]) parser(root[name], target, paths, section == name);
  };
  run("simulate", parse_simulate, c.simulate);
  run("fit", parse_fit, c.fit);
  run("predict", parse_predict, c.predict);
  run("evaluate", parse_evaluate, c.evaluate);
  run("crossval", parse_crossval, c.crossval);
  return c;
}

Config load_config(const std::string& path, Command command) {
  std::ifstream in(path);
  if (!in) throw UsageError("config: cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  fs::path base = fs::path(path).parent_path();
  if (base.empty()) base = ".";
  return parse_config(ss.str(), command, base.string());
}

}  // namespace nigmrf::cli
