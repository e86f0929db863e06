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

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "nigmrf/error.hpp"
#include "nigmrf/model.hpp"

namespace nigmrf {

namespace {

constexpr int kFormatVersion = 1;

std::string seq(const Vec& v) {
  std::string s = "[";
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) s += ", ";
    s += format_double(v(i));
  }
  return s + "]";
}

std::string seq(const std::vector<int>& v) {
  std::string s = "[";
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ", ";
    s += std::to_string(v[i]);
  }
  return s + "]";
}

std::string where(const YAML::Node& n) {
  const YAML::Mark m = n.Mark();
  return m.line >= 0 ? " (line " + std::to_string(m.line + 1) + ")" : "";
}

void check_keys(const YAML::Node& map, const std::set<std::string>& allowed, const std::string& ctx) {
  if (!map.IsMap()) throw FormatError("model file: '" + ctx + "' must be a mapping" + where(map));
  for (const auto& kv : map) {
    const std::string key = kv.first.as<std::string>();
    if (!allowed.count(key)) throw FormatError("model file: unknown key '" + key + "' in " + ctx + where(kv.first));
  }
}

YAML::Node need(const YAML::Node& map, const char* key, const std::string& ctx) {
  YAML::Node n = map[key];
  if (!n) throw FormatError("model file: missing key '" + std::string(key) + "' in " + ctx + where(map));
  return n;
}

template <class T>
T scalar(const YAML::Node& n, const std::string& what) {
  try {
    return n.as<T>();
  } catch (const YAML::Exception&) {
    throw FormatError("model file: bad value for " + what + where(n));
  }
}

Vec vec(const YAML::Node& n, int size, const std::string& what) {
  if (!n.IsSequence() || static_cast<int>(n.size()) != size)
    throw FormatError("model file: " + what + " must be a list of " + std::to_string(size) + " numbers" + where(n));
  Vec v(size);
  for (int i = 0; i < size; ++i) v(i) = scalar<double>(n[i], what);
  return v;
}

std::vector<int> ints(const YAML::Node& n, const std::string& what) {
  if (!n.IsSequence()) throw FormatError("model file: " + what + " must be a list" + where(n));
  std::vector<int> v;
  for (const auto& e : n) v.push_back(scalar<int>(e, what));
  return v;
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return ".nan";
  if (std::isinf(v)) return v > 0 ? ".inf" : "-.inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string model_to_yaml(const MixtureModel& m) {
  validate(m);
  const bool nig = m.family == Family::kNig;
  std::ostringstream os;
  os << "format: nigmrf-model\n";
  os << "version: " << kFormatVersion << "\n";
  os << "family: " << family_name(m.family) << "\n";
  os << "spatial: " << (m.spatial ? "true" : "false") << "\n";
  os << "K: " << m.K() << "\n";
  os << "channels: " << m.channels << "\n";
  if (!m.split.empty()) {
    os << "split:\n";
    os << "  target: " << seq(m.split.target) << "\n";
    os << "  predictors: " << seq(m.split.predictors) << "\n";
  }
  os << "mrf:\n";
  os << "  alpha: " << seq(m.mrf.alpha) << "\n";
  os << "  beta: " << format_double(m.mrf.beta) << "\n";
  os << "classes:\n";
  for (const NigClassParams& c : m.classes) {
    os << "  - " << (nig ? "loc" : "mean") << ": " << seq(c.loc) << "\n";
    os << "    prec_factor:\n";
    for (int i = 0; i < m.channels; ++i) os << "      - " << seq(Vec(c.prec_factor.row(i).head(i + 1).transpose())) << "\n";
    if (nig) {
      os << "    skew: " << seq(c.skew) << "\n";
      os << "    kurt: " << format_double(c.kurt) << "\n";
    }
  }
  os << "fit:\n";
  os << "  seed: " << m.fit.seed << "\n";
  os << "  iterations: " << m.fit.iterations << "\n";
  os << "  final_q: " << format_double(m.fit.final_q) << "\n";
  os << "  converged: " << (m.fit.converged ? "true" : "false") << "\n";
  return os.str();
}

MixtureModel model_from_yaml(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw FormatError(std::string("model file: ") + e.what());
  }
  check_keys(root, {"format", "version", "family", "spatial", "K", "channels", "split", "mrf", "classes", "fit"}, "top level");
  if (scalar<std::string>(need(root, "format", "top level"), "format") != "nigmrf-model")
    throw FormatError("model file: format must be 'nigmrf-model'");
  const int version = scalar<int>(need(root, "version", "top level"), "version");
  if (version != kFormatVersion) throw FormatError("model file: unsupported version " + std::to_string(version));

  MixtureModel m;
  try {
    m.family = parse_family(scalar<std::string>(need(root, "family", "top level"), "family"));
  } catch (const UsageError& e) {
    throw FormatError(std::string("model file: ") + e.what());
  }
  const bool nig = m.family == Family::kNig;
  m.spatial = scalar<bool>(need(root, "spatial", "top level"), "spatial");
  const int K = scalar<int>(need(root, "K", "top level"), "K");
  m.channels = scalar<int>(need(root, "channels", "top level"), "channels");
  if (K < 1 || m.channels < 1) throw FormatError("model file: K and channels must be positive");
  const int d = m.channels;

  if (const YAML::Node split = root["split"]) {
    check_keys(split, {"target", "predictors"}, "split");
    m.split.target = ints(need(split, "target", "split"), "split.target");
    m.split.predictors = ints(need(split, "predictors", "split"), "split.predictors");
  }

  const YAML::Node mrf = need(root, "mrf", "top level");
  check_keys(mrf, {"alpha", "beta"}, "mrf");
  m.mrf.alpha = vec(need(mrf, "alpha", "mrf"), K, "mrf.alpha");
  m.mrf.beta = scalar<double>(need(mrf, "beta", "mrf"), "mrf.beta");

  const YAML::Node classes = need(root, "classes", "top level");
  if (!classes.IsSequence() || static_cast<int>(classes.size()) != K)
    throw FormatError("model file: classes must list " + std::to_string(K) + " entries" + where(classes));
  for (int k = 0; k < K; ++k) {
    const YAML::Node c = classes[k];
    const std::string ctx = "class " + std::to_string(k + 1);
    if (nig)
      check_keys(c, {"loc", "prec_factor", "skew", "kurt"}, ctx);
    else
      check_keys(c, {"mean", "prec_factor"}, ctx);
    NigClassParams p;
    p.loc = vec(need(c, nig ? "loc" : "mean", ctx), d, ctx + " location");
    const YAML::Node rows = need(c, "prec_factor", ctx);
    if (!rows.IsSequence() || static_cast<int>(rows.size()) != d)
      throw FormatError("model file: " + ctx + " prec_factor must have " + std::to_string(d) + " rows" + where(rows));
    p.prec_factor = Mat::Zero(d, d);
    for (int i = 0; i < d; ++i) p.prec_factor.row(i).head(i + 1) = vec(rows[i], i + 1, ctx + " prec_factor row").transpose();
    if (nig) {
      p.skew = vec(need(c, "skew", ctx), d, ctx + " skew");
      p.kurt = scalar<double>(need(c, "kurt", ctx), ctx + " kurt");
    } else {
      p.skew = Vec::Zero(d);
      p.kurt = 1.0;
    }
    m.classes.push_back(std::move(p));
  }

  if (const YAML::Node fit = root["fit"]) {
    check_keys(fit, {"seed", "iterations", "final_q", "converged"}, "fit");
    if (fit["seed"]) m.fit.seed = scalar<std::uint64_t>(fit["seed"], "fit.seed");
    if (fit["iterations"]) m.fit.iterations = scalar<int>(fit["iterations"], "fit.iterations");
    if (fit["final_q"]) m.fit.final_q = scalar<double>(fit["final_q"], "fit.final_q");
    if (fit["converged"]) m.fit.converged = scalar<bool>(fit["converged"], "fit.converged");
  }
  try {
    validate(m);
  } catch (const Error& e) {
    throw FormatError(std::string("model file: ") + e.what());
  }
  return m;
}

void save_model(const MixtureModel& m, const std::string& path) {
  const std::string text = model_to_yaml(m);
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write model file '" + path + "'");
  out << text;
  if (!out) throw IoError("write failed for '" + path + "'");
}

MixtureModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open model file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return model_from_yaml(ss.str());
}

}  // namespace nigmrf
