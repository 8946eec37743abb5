#include "gridcurio/harness/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "gridcurio/errors.hpp"
#include "gridcurio/gridworld/env.hpp"

namespace gridcurio {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

long parse_long(const std::string& key, const std::string& v) {
  long out = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) throw ConfigError(key + ": expected an integer, got '" + v + "'");
  return out;
}

int parse_int(const std::string& key, const std::string& v) { return static_cast<int>(parse_long(key, v)); }

std::uint64_t parse_u64(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) {
    throw ConfigError(key + ": expected a non-negative integer, got '" + v + "'");
  }
  return out;
}

double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used == v.size()) return d;
  } catch (const std::exception&) {
  }
  throw ConfigError(key + ": expected a number, got '" + v + "'");
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(key + ": expected true or false, got '" + v + "'");
}

std::string fmt_double(double d) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", d);
  return buf;
}

struct Entry {
  std::string value;
  int line = 0;
};

using Setter = std::function<void(ExperimentConfig&, const std::string& key, const std::string& value)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"env.n_rooms", [](auto& c, auto& k, auto& v) { c.env.n_rooms = parse_int(k, v); }},
      {"env.room_size", [](auto& c, auto& k, auto& v) { c.env.room_size = parse_int(k, v); }},
      {"env.n_rows", [](auto& c, auto& k, auto& v) { c.env.n_rows = parse_int(k, v); }},
      {"env.max_steps", [](auto& c, auto& k, auto& v) { c.env.max_steps = parse_int(k, v); }},
      {"env.grid_size", [](auto& c, auto& k, auto& v) { c.env.grid_size = parse_int(k, v); }},
      {"env.tile_size", [](auto& c, auto& k, auto& v) { c.env.tile_size = parse_int(k, v); }},
      {"env.seed", [](auto& c, auto& k, auto& v) { c.env.seed = parse_u64(k, v); }},
      {"intrinsic.method",
       [](auto& c, auto& k, auto& v) {
         if (v == "none") c.intrinsic.method = IntrinsicMethod::None;
         else if (v == "ride") c.intrinsic.method = IntrinsicMethod::Ride;
         else if (v == "embedding_novelty") c.intrinsic.method = IntrinsicMethod::EmbeddingNovelty;
         else throw ConfigError(k + ": expected none, ride or embedding_novelty");
       }},
      {"intrinsic.beta", [](auto& c, auto& k, auto& v) { c.intrinsic.beta = parse_double(k, v); }},
      {"intrinsic.episodic", [](auto& c, auto& k, auto& v) { c.intrinsic.episodic_enabled = parse_bool(k, v); }},
      {"intrinsic.view",
       [](auto& c, auto& k, auto& v) {
         if (v == "partial") c.intrinsic.input_view = InputView::Partial;
         else if (v == "full") c.intrinsic.input_view = InputView::Full;
         else throw ConfigError(k + ": expected partial or full");
       }},
      {"intrinsic.format",
       [](auto& c, auto& k, auto& v) {
         if (v == "encoded") c.intrinsic.input_format = InputFormat::Encoded;
         else if (v == "rgb") c.intrinsic.input_format = InputFormat::Rgb;
         else throw ConfigError(k + ": expected encoded or rgb");
       }},
      {"intrinsic.provider",
       [](auto& c, auto& k, auto& v) {
         if (v == "frozen_random") c.intrinsic.provider = ProviderKind::FrozenRandom;
         else if (v == "remote_service") c.intrinsic.provider = ProviderKind::RemoteService;
         else throw ConfigError(k + ": expected frozen_random or remote_service");
       }},
      {"intrinsic.embedding_dim", [](auto& c, auto& k, auto& v) { c.intrinsic.embedding_dim = parse_int(k, v); }},
      {"intrinsic.endpoint", [](auto& c, auto&, auto& v) { c.intrinsic.endpoint = v; }},
      {"ppo.gamma", [](auto& c, auto& k, auto& v) { c.ppo.gamma = parse_double(k, v); }},
      {"ppo.gae_lambda", [](auto& c, auto& k, auto& v) { c.ppo.gae_lambda = parse_double(k, v); }},
      {"ppo.clip_epsilon", [](auto& c, auto& k, auto& v) { c.ppo.clip_epsilon = parse_double(k, v); }},
      {"ppo.epochs", [](auto& c, auto& k, auto& v) { c.ppo.epochs = parse_int(k, v); }},
      {"ppo.n_envs", [](auto& c, auto& k, auto& v) { c.ppo.n_envs = parse_int(k, v); }},
      {"ppo.rollout_len", [](auto& c, auto& k, auto& v) { c.ppo.rollout_len = parse_int(k, v); }},
      {"ppo.learning_rate", [](auto& c, auto& k, auto& v) { c.ppo.learning_rate = parse_double(k, v); }},
      {"ppo.entropy_coef", [](auto& c, auto& k, auto& v) { c.ppo.entropy_coef = parse_double(k, v); }},
      {"ppo.value_coef", [](auto& c, auto& k, auto& v) { c.ppo.value_coef = parse_double(k, v); }},
      {"ppo.max_grad_norm", [](auto& c, auto& k, auto& v) { c.ppo.max_grad_norm = parse_double(k, v); }},
      {"ppo.minibatch_count", [](auto& c, auto& k, auto& v) { c.ppo.minibatch_count = parse_int(k, v); }},
      {"run.name", [](auto& c, auto&, auto& v) { c.run.name = v; }},
      {"run.total_steps", [](auto& c, auto& k, auto& v) { c.run.total_steps = parse_long(k, v); }},
      {"run.seeds",
       [](auto& c, auto& k, auto& v) {
         c.run.seeds.clear();
         std::stringstream ss(v);
         std::string item;
         while (std::getline(ss, item, ',')) c.run.seeds.push_back(parse_u64(k, trim(item)));
       }},
      {"run.convergence_window", [](auto& c, auto& k, auto& v) { c.run.convergence_window = parse_int(k, v); }},
      {"run.convergence_threshold",
       [](auto& c, auto& k, auto& v) { c.run.convergence_threshold = parse_double(k, v); }},
      {"run.metrics_every", [](auto& c, auto& k, auto& v) { c.run.metrics_every = parse_long(k, v); }},
      {"run.output_dir", [](auto& c, auto&, auto& v) { c.run.output_dir = v; }},
      {"run.early_stop_steps", [](auto& c, auto& k, auto& v) { c.run.early_stop_steps = parse_long(k, v); }},
      {"run.optimal_return", [](auto& c, auto& k, auto& v) { c.run.optimal_return = parse_double(k, v); }},
  };
  return table;
}

ExperimentConfig build(std::map<std::string, Entry> entries) {
  ExperimentConfig c;
  const auto id = entries.find("env.id");
  if (id == entries.end()) throw ConfigError("env.id: missing");
  try {
    const std::uint64_t keep_seed = c.env.seed;
    c.env = parse_env_id(id->second.value);
    c.env.seed = keep_seed;
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("env.id: ") + e.what());
  }
  entries.erase(id);

  const bool format_given = entries.count("intrinsic.format") > 0;
  for (const auto& [key, entry] : entries) {
    const auto it = setters().find(key);
    if (it == setters().end()) {
      throw ConfigError(key + ": unknown key" + (entry.line > 0 ? " (line " + std::to_string(entry.line) + ")" : ""));
    }
    it->second(c, key, entry.value);
  }
  if (!format_given) {
    c.intrinsic.input_format =
        c.intrinsic.method == IntrinsicMethod::EmbeddingNovelty ? InputFormat::Rgb : InputFormat::Encoded;
  }
  validate(c);
  return c;
}

void apply_overrides(std::map<std::string, Entry>& entries, const std::vector<std::string>& overrides) {
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos) throw ConfigError("override '" + o + "': expected key=value");
    entries[trim(o.substr(0, eq))] = {trim(o.substr(eq + 1)), 0};
  }
}

}  // namespace

std::string to_string(IntrinsicMethod m) {
  switch (m) {
    case IntrinsicMethod::Ride: return "ride";
    case IntrinsicMethod::EmbeddingNovelty: return "embedding_novelty";
    default: return "none";
  }
}

ExperimentConfig parse_config(const std::string& text, const std::vector<std::string>& overrides) {
  std::map<std::string, Entry> entries;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(raw.substr(0, raw.find('#')));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError("expected 'key = value'", line_no);
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw ParseError("empty key", line_no);
    if (entries.count(key)) throw ParseError("duplicate key '" + key + "'", line_no);
    entries[key] = {trim(line.substr(eq + 1)), line_no};
  }
  apply_overrides(entries, overrides);
  return build(std::move(entries));
}

ExperimentConfig load_config(const std::string& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), overrides);
}

std::string config_to_text(const ExperimentConfig& c) {
  std::ostringstream o;
  o << "env.id = " << env_id(c.env) << "\n";
  o << "env.max_steps = " << c.env.max_steps << "\n";
  o << "env.grid_size = " << c.env.grid_size << "\n";
  o << "env.tile_size = " << c.env.tile_size << "\n";
  o << "env.seed = " << c.env.seed << "\n";
  o << "intrinsic.method = " << to_string(c.intrinsic.method) << "\n";
  o << "intrinsic.beta = " << fmt_double(c.intrinsic.beta) << "\n";
  o << "intrinsic.episodic = " << (c.intrinsic.episodic_enabled ? "true" : "false") << "\n";
  o << "intrinsic.view = " << (c.intrinsic.input_view == InputView::Full ? "full" : "partial") << "\n";
  o << "intrinsic.format = " << (c.intrinsic.input_format == InputFormat::Rgb ? "rgb" : "encoded") << "\n";
  o << "intrinsic.provider = "
    << (c.intrinsic.provider == ProviderKind::RemoteService ? "remote_service" : "frozen_random") << "\n";
  o << "intrinsic.embedding_dim = " << c.intrinsic.embedding_dim << "\n";
  if (!c.intrinsic.endpoint.empty()) o << "intrinsic.endpoint = " << c.intrinsic.endpoint << "\n";
  o << "ppo.gamma = " << fmt_double(c.ppo.gamma) << "\n";
  o << "ppo.gae_lambda = " << fmt_double(c.ppo.gae_lambda) << "\n";
  o << "ppo.clip_epsilon = " << fmt_double(c.ppo.clip_epsilon) << "\n";
  o << "ppo.epochs = " << c.ppo.epochs << "\n";
  o << "ppo.n_envs = " << c.ppo.n_envs << "\n";
  o << "ppo.rollout_len = " << c.ppo.rollout_len << "\n";
  o << "ppo.learning_rate = " << fmt_double(c.ppo.learning_rate) << "\n";
  o << "ppo.entropy_coef = " << fmt_double(c.ppo.entropy_coef) << "\n";
  o << "ppo.value_coef = " << fmt_double(c.ppo.value_coef) << "\n";
  o << "ppo.max_grad_norm = " << fmt_double(c.ppo.max_grad_norm) << "\n";
  o << "ppo.minibatch_count = " << c.ppo.minibatch_count << "\n";
  o << "run.name = " << c.run.name << "\n";
  o << "run.total_steps = " << c.run.total_steps << "\n";
  o << "run.seeds = ";
  for (std::size_t k = 0; k < c.run.seeds.size(); ++k) o << (k ? "," : "") << c.run.seeds[k];
  o << "\n";
  o << "run.convergence_window = " << c.run.convergence_window << "\n";
  o << "run.convergence_threshold = " << fmt_double(c.run.convergence_threshold) << "\n";
  o << "run.metrics_every = " << c.run.metrics_every << "\n";
  o << "run.output_dir = " << c.run.output_dir << "\n";
  o << "run.early_stop_steps = " << c.run.early_stop_steps << "\n";
  o << "run.optimal_return = " << fmt_double(c.run.optimal_return) << "\n";
  return o.str();
}

void validate(const ExperimentConfig& c) {
  validate(c.env);
  validate(c.intrinsic);
  validate(c.ppo);
  if (c.run.total_steps <= 0 || c.run.total_steps % c.ppo.batch_size() != 0) {
    throw ConfigError("run.total_steps: must be a positive multiple of ppo.n_envs * ppo.rollout_len");
  }
  if (c.run.seeds.empty()) throw ConfigError("run.seeds: at least one seed required");
  if (c.run.convergence_window < 1) throw ConfigError("run.convergence_window: must be >= 1");
  if (!(c.run.convergence_threshold > 0.0)) throw ConfigError("run.convergence_threshold: must be positive");
  if (c.run.metrics_every < 1) throw ConfigError("run.metrics_every: must be >= 1");
  if (c.run.name.empty() || c.run.name.find('/') != std::string::npos) {
    throw ConfigError("run.name: must be a non-empty path component");
  }
  if (c.run.optimal_return < 0.0 || c.run.optimal_return > 1.0) {
    throw ConfigError("run.optimal_return: must be in [0, 1]");
  }
}

}  // namespace gridcurio
