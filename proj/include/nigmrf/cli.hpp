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

// Command-line pipeline: configuration documents, the simulate / fit / predict /
// evaluate / crossval commands, and the restart-and-select fitting protocol they
// share. The grammar of the configuration file is documented in docs/config.md.

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "nigmrf/estimate.hpp"
#include "nigmrf/model.hpp"
#include "nigmrf/predict.hpp"
#include "nigmrf/volume.hpp"

namespace nigmrf::cli {

enum class Command { kSimulate, kFit, kPredict, kEvaluate, kCrossval };

Command parse_command(std::string_view name);
std::string_view command_name(Command c);

// Exit codes.
constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitPartial = 4;

// Start counts per initialization strategy. Negative means "use the family default".
struct StartPlan {
  int random = -1;
  int kmeans = -1;
  int hierarchical = -1;
  int constant = -1;
  int gmm = -1;            // starts lifted from a preliminary non-spatial Gaussian fit (0 or 1)
  std::string model;       // optional extra start read from a model file
};

struct FitSettings {
  Family family = Family::kGaussian;
  bool spatial = false;
  int K = 2;
  FitOptions options;
  StartPlan starts;
  StartPlan gmm_starts;     // for the preliminary Gaussian fit
  int select_sweeps = 100;  // Gibbs sweeps behind the training-MAE selection score (spatial)
  double init_kurt = 50.0;
};

// Defaults for one family: plain Gaussian mixtures get 15 random starts plus one
// k-means and one hierarchical start; the other families start from the best
// Gaussian fit and from constant values.
StartPlan resolve_starts(const StartPlan& plan, Family family, bool spatial);

struct PredictSettings {
  PredictOptions options;
  bool filter = false;
  FilterKernel kernel = FilterKernel::kPlus;
  double bin_width = 50.0;
};

struct ModelSpec {
  std::string name;
  Family family = Family::kGaussian;
  bool spatial = false;
};

struct SliceRange {
  int begin = 0;
  int end = 0;
};

struct SimulateConfig {
  MixtureModel model;
  Dims dims{16, 16, 16};
  std::string mask = "full";  // full | ellipsoid
  int subjects = 1;
  int burn_in = 200;
};

struct FitConfig {
  std::vector<std::string> training;
  ChannelSplit split;
  std::optional<SliceRange> slices;
  FitSettings settings;
};

struct PredictConfig {
  std::string model;
  std::string volume;
  std::optional<int> truth_channel;  // channel of the volume holding the target
  std::optional<SliceRange> slices;
  PredictSettings settings;
};

struct EvaluateConfig {
  std::string prediction;
  std::string truth;
  int truth_channel = 0;
  std::string crps;
  double bin_width = 50.0;
};

struct CrossvalConfig {
  std::vector<std::string> subjects;
  ChannelSplit split;
  std::optional<SliceRange> slices;
  std::vector<ModelSpec> models;
  std::vector<int> K;
  FitSettings fit;           // family, spatial and K are taken from the model grid
  PredictSettings predict;
};

struct Config {
  Command command = Command::kFit;
  std::uint64_t seed = 0;
  std::string out = ".";
  int threads = 0;
  SimulateConfig simulate;
  FitConfig fit;
  PredictConfig predict;
  EvaluateConfig evaluate;
  CrossvalConfig crossval;
};

// Parses a configuration document for the given command. Relative paths are taken
// against base_dir. Unknown keys, malformed values and missing input files raise
// UsageError naming the key and line.
Config parse_config(const std::string& text, Command command, const std::string& base_dir = ".");
Config load_config(const std::string& path, Command command);

// ---- fitting protocol ----

struct StartRecord {
  int index = 0;
  std::string strategy;
  std::uint64_t seed = 0;
  std::string termination;
  int iterations = 0;
  double final_q = 0.0;
  double training_mae = 0.0;
  bool selected = false;
};

struct FitRun {
  MixtureModel model;
  std::vector<TraceRow> trace;
  std::vector<StartRecord> starts;
  bool ok = false;            // at least one start finished without a numeric failure
};

// Runs every start of the plan from seed-derived streams and keeps the start with
// the lowest training MAE. A supplied Gaussian fit replaces the preliminary fit.
FitRun fit_with_restarts(const TrainingSet& train, const ChannelSplit& split, const FitSettings& settings,
                         std::uint64_t seed, const FitRun* gmm = nullptr);

// Target map, prediction maps and metrics for one held-out volume.
struct Evaluation {
  std::string predictor;  // mean | median | mean_filtered | median_filtered
  MetricsReport report;
};

std::vector<Evaluation> evaluate_prediction(const MixtureModel& m, const VolumeGrid& volume, const PredictSettings& s,
                                            std::uint64_t seed);

struct FoldRow {
  std::string model;
  int K = 0;
  int fold = 0;               // 1-based held-out subject; 0 for the aggregate row
  std::string predictor;
  bool ok = true;
  MetricsReport report;
};

struct CrossvalResult {
  std::vector<FoldRow> rows;  // per fold, followed by one aggregate row per model, K and predictor
  int failed = 0;
};

CrossvalResult run_crossval(const CrossvalConfig& cfg, std::uint64_t seed, std::ostream* log = nullptr);

// ---- commands ----

// Runs one command, writing its outputs under cfg.out. Returns an exit code; library
// errors propagate as exceptions.
int run_command(const Config& cfg, std::ostream& log);

// Maps an exception to the documented exit code.
int exit_code_for(const std::exception& e);

// Output helpers.
void write_trace_csv(const std::vector<TraceRow>& trace, std::ostream& os);
void write_starts_csv(const std::vector<StartRecord>& starts, std::ostream& os);
void write_crossval_csv(const CrossvalResult& r, std::ostream& os);

}  // namespace nigmrf::cli
