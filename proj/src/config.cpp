#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "sacl/harness.hpp"

namespace sacl {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string join(const std::vector<std::string>& parts) {
  std::string out = "invalid configuration:";
  for (const auto& p : parts) out += "\n  - " + p;
  return out;
}

template <typename T>
bool parse_number(const std::string& text, T& out) {
  const auto* last = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), last, out);
  return ec == std::errc() && ptr == last;
}

bool parse_bool(const std::string& text, bool& out) {
  if (text == "true" || text == "1" || text == "yes") return out = true, true;
  if (text == "false" || text == "0" || text == "no") return out = false, true;
  return false;
}

// "0,1,2" or "0-9" or a mix of both.
bool parse_seeds(const std::string& text, std::vector<std::uint64_t>& out) {
  out.clear();
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) return false;
    if (const auto dash = item.find('-'); dash != std::string::npos) {
      std::uint64_t lo = 0, hi = 0;
      if (!parse_number(trim(item.substr(0, dash)), lo) ||
          !parse_number(trim(item.substr(dash + 1)), hi) || hi < lo) {
        return false;
      }
      for (auto s = lo; s <= hi; ++s) out.push_back(s);
    } else {
      std::uint64_t s = 0;
      if (!parse_number(item, s)) return false;
      out.push_back(s);
    }
  }
  return !out.empty();
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> problems)
    : std::invalid_argument(join(problems)), problems_(std::move(problems)) {}

Method parse_method(const std::string& name) {
  if (name == "sacl") return Method::kSacl;
  if (name == "self_play") return Method::kSelfPlay;
  if (name == "full_access_order") return Method::kFullAccessOrder;
  throw std::invalid_argument("unknown method '" + name + "'");
}

std::string to_string(Method m) {
  switch (m) {
    case Method::kSacl: return "sacl";
    case Method::kSelfPlay: return "self_play";
    case Method::kFullAccessOrder: return "full_access_order";
  }
  return "sacl";
}

GameSpec EnvConfig::build() const {
  if (name == "rps") return make_rps(rps);
  if (name == "grid_pursuit") return make_grid_pursuit(grid);
  throw std::invalid_argument("unknown env '" + name + "'");
}

long long default_eval_every(const std::string& env) { return env == "grid_pursuit" ? 1000 : 100; }

void validate(const RunConfig& cfg) {
  std::vector<std::string> problems;
  auto check = [&](auto&& fn) {
    try {
      fn();
    } catch (const std::invalid_argument& e) {
      problems.emplace_back(e.what());
    }
  };
  check([&] { (void)cfg.env.build(); });
  check([&] { cfg.learner.validate(); });
  check([&] { cfg.curriculum.validate(); });
  if (cfg.seeds.empty()) problems.emplace_back("seeds: at least one seed is required");
  if (cfg.sample_budget <= 0) problems.emplace_back("sample_budget must be positive");
  if (cfg.eval_every <= 0) problems.emplace_back("eval_every must be positive");
  if (!(cfg.convergence_threshold > 0.0)) problems.emplace_back("convergence_threshold must be positive");
  if (cfg.method == Method::kFullAccessOrder) {
    check([&] {
      if (!backward_order(cfg.env.build())) {
        throw std::invalid_argument("full_access_order needs an acyclic game");
      }
    });
  }
  if (!problems.empty()) throw ConfigError(std::move(problems));
}

RunConfig parse_run_config(std::istream& in) {
  RunConfig cfg;
  std::vector<std::string> problems;
  bool eval_every_set = false;

  using Setter = std::function<bool(const std::string&)>;
  auto num = [](auto& field) -> Setter {
    return [&field](const std::string& v) { return parse_number(v, field); };
  };
  auto flag = [](bool& field) -> Setter {
    return [&field](const std::string& v) { return parse_bool(v, field); };
  };
  const std::map<std::string, Setter> setters = {
      {"env", [&](const std::string& v) { cfg.env.name = v; return v == "rps" || v == "grid_pursuit"; }},
      {"n", num(cfg.env.rps.rounds)},
      {"width", num(cfg.env.grid.width)},
      {"height", num(cfg.env.grid.height)},
      {"horizon", num(cfg.env.grid.horizon)},
      {"capture_reward", num(cfg.env.grid.capture_reward)},
      {"method",
       [&](const std::string& v) {
         try {
           cfg.method = parse_method(v);
           return true;
         } catch (const std::invalid_argument&) {
           return false;
         }
       }},
      {"lr", num(cfg.learner.lr)},
      {"lr_schedule",
       [&](const std::string& v) {
         if (v == "constant") cfg.learner.schedule = LrSchedule::kConstant;
         else if (v == "visit_count") cfg.learner.schedule = LrSchedule::kVisitCount;
         else if (v == "multiplicative") cfg.learner.schedule = LrSchedule::kMultiplicative;
         else return false;
         return true;
       }},
      {"lr_decay", num(cfg.learner.lr_decay)},
      {"epsilon", num(cfg.learner.epsilon)},
      {"batch_size", num(cfg.learner.batch_size)},
      {"init_scale", num(cfg.learner.init_scale)},
      {"init_kind",
       [&](const std::string& v) {
         if (v == "symmetric") cfg.learner.init_kind = InitKind::kSymmetric;
         else if (v == "optimistic") cfg.learner.init_kind = InitKind::kOptimistic;
         else return false;
         return true;
       }},
      {"p", num(cfg.curriculum.sampler.p)},
      {"capacity_k", num(cfg.curriculum.capacity)},
      {"alpha_bias", num(cfg.curriculum.metric.alpha_bias)},
      {"variant",
       [&](const std::string& v) {
         try {
           cfg.curriculum.metric.variant = parse_metric_variant(v);
           return true;
         } catch (const std::invalid_argument&) {
           return false;
         }
       }},
      {"ensemble_size", num(cfg.curriculum.metric.ensemble_size)},
      {"bias_parse",
       [&](const std::string& v) {
         if (v == "square_of_mean") cfg.curriculum.metric.bias_parse = BiasParse::kSquareOfMean;
         else if (v == "mean_of_squares") cfg.curriculum.metric.bias_parse = BiasParse::kMeanOfSquares;
         else return false;
         return true;
       }},
      {"episodes_per_epoch", num(cfg.curriculum.episodes_per_epoch)},
      {"max_episode_steps", num(cfg.curriculum.max_episode_steps)},
      {"prune",
       [&](const std::string& v) {
         if (v == "fps") cfg.curriculum.prune = PruneMethod::kFps;
         else if (v == "random") cfg.curriculum.prune = PruneMethod::kRandom;
         else return false;
         return true;
       }},
      {"seeds", [&](const std::string& v) { return parse_seeds(v, cfg.seeds); }},
      {"sample_budget", num(cfg.sample_budget)},
      {"eval_every", [&](const std::string& v) { eval_every_set = true; return parse_number(v, cfg.eval_every); }},
      {"convergence_threshold", num(cfg.convergence_threshold)},
      {"stop_on_convergence", flag(cfg.stop_on_convergence)},
      {"track_exploitability", flag(cfg.track_exploitability)},
  };

  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = "line " + std::to_string(lineno) + ": ";
    if (eq == std::string::npos) {
      problems.push_back(where + "expected key = value");
      continue;
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto it = setters.find(key);
    if (it == setters.end()) {
      problems.push_back(where + "unknown key '" + key + "'");
    } else if (!it->second(value)) {
      problems.push_back(where + "bad value '" + value + "' for " + key);
    }
  }
  if (!eval_every_set) cfg.eval_every = default_eval_every(cfg.env.name);
  if (!problems.empty()) throw ConfigError(std::move(problems));
  validate(cfg);
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError({"cannot open config file " + path});
  return parse_run_config(in);
}

}  // namespace sacl
