//
// qfipmp - Copyright 2026 The qfipmp Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "config.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace qfipmp::cli {

namespace {

[[noreturn]] void fail(const YAML::Mark& mark, const std::string& message) {
  if (mark.is_null()) throw ConfigError(message);
  throw ConfigError("line " + std::to_string(mark.line + 1) + ": " + message);
}

template <class T>
T convert(const YAML::Node& node, const std::string& where, const char* type) {
  try {
    return node.as<T>();
  } catch (const YAML::BadConversion&) {
    fail(node.Mark(), where + " must be " + type);
  }
}

// One mapping section with a fixed key set.
class Section {
 public:
  Section(const YAML::Node& root, std::string name, std::set<std::string> keys)
      : name_(std::move(name)), node_(root[name_]) {
    if (!node_ || node_.IsNull()) return;
    if (!node_.IsMap()) fail(node_.Mark(), "section '" + name_ + "' must be a mapping");
    for (const auto& kv : node_) {
      const auto key = kv.first.as<std::string>();
      if (!keys.count(key)) {
        fail(kv.first.Mark(), "unknown key '" + key + "' in section '" + name_ + "'");
      }
    }
  }

  // Leaves `out` untouched when the key is absent.
  template <class T>
  bool read(const char* key, T& out, const char* type) {
    const YAML::Node n = child(key);
    if (!n) return false;
    out = convert<T>(n, where(key), type);
    return true;
  }

  bool read(const char* key, double& out) {
    if (!read<double>(key, out, "a number")) return false;
    if (!std::isfinite(out)) fail(child(key).Mark(), where(key) + " must be finite");
    return true;
  }
  bool read(const char* key, int& out) { return read<int>(key, out, "an integer"); }
  bool read(const char* key, std::uint64_t& out) {
    return read<std::uint64_t>(key, out, "a non-negative integer");
  }
  bool read(const char* key, std::string& out) { return read<std::string>(key, out, "a string"); }

  bool read(const char* key, std::vector<double>& out) {
    const YAML::Node n = child(key);
    if (!n) return false;
    if (!n.IsSequence()) fail(n.Mark(), where(key) + " must be a list of numbers");
    out.clear();
    for (const auto& item : n) {
      out.push_back(convert<double>(item, where(key), "a list of numbers"));
      if (!std::isfinite(out.back())) fail(item.Mark(), where(key) + " entries must be finite");
    }
    return true;
  }
  bool read(const char* key, std::vector<std::string>& out) {
    const YAML::Node n = child(key);
    if (!n) return false;
    if (!n.IsSequence()) fail(n.Mark(), where(key) + " must be a list of strings");
    out.clear();
    for (const auto& item : n) out.push_back(convert<std::string>(item, where(key), "a list of strings"));
    return true;
  }

  void require(bool ok, const char* key, const std::string& message) const {
    if (ok) return;
    const YAML::Node n = child(key);
    fail(n ? n.Mark() : YAML::Mark::null_mark(), where(key) + " " + message);
  }

 private:
  [[nodiscard]] YAML::Node child(const char* key) const {
    if (!node_ || !node_.IsMap()) return YAML::Node(YAML::NodeType::Undefined);
    return node_[key];
  }
  [[nodiscard]] std::string where(const char* key) const { return name_ + "." + key; }

  std::string name_;
  YAML::Node node_;
};

std::string number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string number_list(const std::vector<double>& values) {
  std::string out = "[";
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ", ";
    out += number(values[i]);
  }
  return out + "]";
}

// Strings are emitted double-quoted so that values like "none" or "1e3" stay
// strings on the way back in.
std::string quoted(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string_view to_string(InitialState s) {
  return s == InitialState::Hl ? "hl" : "coherent_x";
}

std::string_view to_string(OptimizerMode m) {
  return m == OptimizerMode::Singular ? "singular" : "gradient";
}

ExperimentConfig parse_config(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    fail(e.mark, e.msg);
  }
  if (root.IsNull()) return {};
  if (!root.IsMap()) fail(root.Mark(), "config must be a mapping of sections");
  const std::set<std::string> sections = {"model", "run", "optimizer", "cost", "output"};
  for (const auto& kv : root) {
    const auto key = kv.first.as<std::string>();
    if (!sections.count(key)) fail(kv.first.Mark(), "unknown section '" + key + "'");
  }

  ExperimentConfig c;

  Section model(root, "model", {"n_spins", "chi", "omega", "channel", "gamma"});
  model.read("n_spins", c.model.n_spins);
  model.require(c.model.n_spins >= 1 && c.model.n_spins <= kMaxSpins, "n_spins",
                "must lie in 1.." + std::to_string(kMaxSpins));
  model.read("chi", c.model.chi);
  model.read("omega", c.model.omega);
  std::string channel = std::string(to_string(c.model.channel.kind));
  model.read("channel", channel);
  try {
    c.model.channel.kind = parse_channel_kind(channel);
  } catch (const std::invalid_argument&) {
    model.require(false, "channel", "must be one of none, depolarization, dephasing, flipping");
  }
  model.read("gamma", c.model.channel.gamma);
  model.require(c.model.channel.gamma >= 0.0, "gamma", "must be >= 0");

  Section run(root, "run",
              {"T", "segments", "substeps", "u0", "control", "T_list", "segments_per_time",
               "initial_state"});
  run.read("T", c.run.duration);
  run.require(c.run.duration > 0.0, "T", "must be > 0");
  run.read("segments", c.run.segments);
  run.require(c.run.segments >= 1, "segments", "must be >= 1");
  run.read("substeps", c.run.substeps);
  run.require(c.run.substeps >= 0, "substeps", "must be >= 0");
  run.read("u0", c.run.u0);
  run.read("control", c.run.control);
  run.require(c.run.control.empty() ||
                  c.run.control.size() == static_cast<std::size_t>(c.run.segments),
              "control", "must have exactly run.segments entries");
  run.read("T_list", c.run.durations);
  run.require(std::all_of(c.run.durations.begin(), c.run.durations.end(),
                          [](double t) { return t > 0.0; }),
              "T_list", "entries must be > 0");
  run.read("segments_per_time", c.run.segments_per_time);
  run.require(c.run.segments_per_time > 0.0, "segments_per_time", "must be > 0");
  std::string state = std::string(to_string(c.run.initial_state));
  run.read("initial_state", state);
  run.require(state == "coherent_x" || state == "hl", "initial_state",
              "must be coherent_x or hl");
  c.run.initial_state = state == "hl" ? InitialState::Hl : InitialState::CoherentX;

  Section opt(root, "optimizer",
              {"mode", "max_iters", "learning_rate", "backtrack", "tol_grad", "restarts", "seed",
               "u_max", "threads", "alpha", "singular_iters"});
  std::string mode = std::string(to_string(c.optimizer.mode));
  opt.read("mode", mode);
  opt.require(mode == "gradient" || mode == "singular", "mode", "must be gradient or singular");
  c.optimizer.mode = mode == "singular" ? OptimizerMode::Singular : OptimizerMode::Gradient;
  opt.read("max_iters", c.optimizer.max_iters);
  opt.require(c.optimizer.max_iters >= 0, "max_iters", "must be >= 0");
  opt.read("learning_rate", c.optimizer.learning_rate);
  opt.require(c.optimizer.learning_rate > 0.0, "learning_rate", "must be > 0");
  opt.read("backtrack", c.optimizer.backtrack);
  opt.require(c.optimizer.backtrack > 0.0 && c.optimizer.backtrack < 1.0, "backtrack",
              "must lie in (0, 1)");
  opt.read("tol_grad", c.optimizer.tol_grad);
  opt.require(c.optimizer.tol_grad >= 0.0, "tol_grad", "must be >= 0");
  opt.read("restarts", c.optimizer.restarts);
  opt.require(c.optimizer.restarts >= 1, "restarts", "must be >= 1");
  opt.read("seed", c.optimizer.seed);
  opt.read("u_max", c.optimizer.u_max);
  opt.require(c.optimizer.u_max >= 0.0, "u_max", "must be >= 0 (0 means unconstrained)");
  opt.read("threads", c.optimizer.threads);
  opt.require(c.optimizer.threads >= 1, "threads", "must be >= 1");
  opt.read("alpha", c.optimizer.alpha);
  opt.require(c.optimizer.alpha >= 0.0 && c.optimizer.alpha <= 1.0, "alpha",
              "must lie in [0, 1]");
  opt.read("singular_iters", c.optimizer.singular_iters);
  opt.require(c.optimizer.singular_iters >= 0, "singular_iters", "must be >= 0");

  Section cost(root, "cost", {"kind", "phi"});
  std::string kind = c.cost.kind == CostKind::Cfi ? "cfi" : "qfi";
  cost.read("kind", kind);
  cost.require(kind == "qfi" || kind == "cfi", "kind", "must be qfi or cfi");
  c.cost.kind = kind == "cfi" ? CostKind::Cfi : CostKind::Qfi;
  cost.read("phi", c.cost.phi);

  Section out(root, "output", {"directory", "formats"});
  out.read("directory", c.output.directory);
  out.require(!c.output.directory.empty(), "directory", "must not be empty");
  out.read("formats", c.output.formats);
  out.require(std::all_of(c.output.formats.begin(), c.output.formats.end(),
                          [](const std::string& f) { return f == "csv" || f == "json"; }),
              "formats", "entries must be csv or json");
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string serialize_config(const ExperimentConfig& c) {
  std::ostringstream o;
  o << "model:\n"
    << "  n_spins: " << c.model.n_spins << "\n"
    << "  chi: " << number(c.model.chi) << "\n"
    << "  omega: " << number(c.model.omega) << "\n"
    << "  channel: " << quoted(std::string(to_string(c.model.channel.kind))) << "\n"
    << "  gamma: " << number(c.model.channel.gamma) << "\n";
  o << "run:\n"
    << "  T: " << number(c.run.duration) << "\n"
    << "  segments: " << c.run.segments << "\n"
    << "  substeps: " << c.run.substeps << "\n"
    << "  u0: " << number(c.run.u0) << "\n"
    << "  control: " << number_list(c.run.control) << "\n"
    << "  T_list: " << number_list(c.run.durations) << "\n"
    << "  segments_per_time: " << number(c.run.segments_per_time) << "\n"
    << "  initial_state: " << quoted(std::string(to_string(c.run.initial_state))) << "\n";
  o << "optimizer:\n"
    << "  mode: " << quoted(std::string(to_string(c.optimizer.mode))) << "\n"
    << "  max_iters: " << c.optimizer.max_iters << "\n"
    << "  learning_rate: " << number(c.optimizer.learning_rate) << "\n"
    << "  backtrack: " << number(c.optimizer.backtrack) << "\n"
    << "  tol_grad: " << number(c.optimizer.tol_grad) << "\n"
    << "  restarts: " << c.optimizer.restarts << "\n"
    << "  seed: " << c.optimizer.seed << "\n"
    << "  u_max: " << number(c.optimizer.u_max) << "\n"
    << "  threads: " << c.optimizer.threads << "\n"
    << "  alpha: " << number(c.optimizer.alpha) << "\n"
    << "  singular_iters: " << c.optimizer.singular_iters << "\n";
  o << "cost:\n"
    << "  kind: " << quoted(c.cost.kind == CostKind::Cfi ? "cfi" : "qfi") << "\n"
    << "  phi: " << number(c.cost.phi) << "\n";
  o << "output:\n"
    << "  directory: " << quoted(c.output.directory) << "\n"
    << "  formats: [";
  for (std::size_t i = 0; i < c.output.formats.size(); ++i) {
    o << (i ? ", " : "") << quoted(c.output.formats[i]);
  }
  o << "]\n";
  return o.str();
}

OptimizerConfig optimizer_config(const ExperimentConfig& c) {
  OptimizerConfig cfg;
  cfg.max_iters = c.optimizer.max_iters;
  cfg.learning_rate = c.optimizer.learning_rate;
  cfg.backtrack = c.optimizer.backtrack;
  cfg.tol_grad = c.optimizer.tol_grad;
  cfg.restarts = c.optimizer.restarts;
  cfg.seed = c.optimizer.seed;
  cfg.cost = c.cost;
  cfg.u_max = c.optimizer.u_max;
  cfg.substeps = c.run.substeps;
  cfg.threads = c.optimizer.threads;
  return cfg;
}

SelfConsistencyConfig self_consistency_config(const ExperimentConfig& c) {
  SelfConsistencyConfig cfg;
  cfg.alpha = c.optimizer.alpha;
  cfg.min_alpha = c.optimizer.alpha / 64.0;
  cfg.max_iters = c.optimizer.singular_iters;
  cfg.cost = c.cost;
  cfg.substeps = c.run.substeps;
  return cfg;
}

Operator initial_state(const ExperimentConfig& c) {
  return c.run.initial_state == InitialState::Hl ? hl_state_density(c.model.n_spins)
                                                 : coherent_x_state(c.model.n_spins);
}

ControlProtocol control_protocol(const ExperimentConfig& c) {
  ControlProtocol p = ControlProtocol::constant(c.run.duration, c.run.segments, c.run.u0);
  if (!c.run.control.empty()) p.values = c.run.control;
  return p;
}

}  // namespace qfipmp::cli
