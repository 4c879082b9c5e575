#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "sacl/curriculum.hpp"
#include "sacl/environments.hpp"
#include "sacl/learner.hpp"

namespace sacl {

enum class Method { kSacl, kSelfPlay, kFullAccessOrder };

Method parse_method(const std::string& name);
std::string to_string(Method m);

struct EnvConfig {
  std::string name = "rps";
  RpsParams rps;
  GridPursuitParams grid;

  GameSpec build() const;
};

struct RunConfig {
  EnvConfig env;
  Method method = Method::kSacl;
  LearnerConfig learner;
  CurriculumConfig curriculum;
  std::vector<std::uint64_t> seeds{0};
  long long sample_budget = 100000;
  long long eval_every = 100;
  double convergence_threshold = 1e-2;
  bool stop_on_convergence = true;
  bool track_exploitability = true;
};

/// Every problem found while reading or validating a configuration.
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(std::vector<std::string> problems);
  const std::vector<std::string>& problems() const { return problems_; }

 private:
  std::vector<std::string> problems_;
};

/// Default eval_every for an environment: 100 samples on rps, 1000 on grid pursuit.
long long default_eval_every(const std::string& env);

void validate(const RunConfig& cfg);

/// Flat `key = value` text, `#` starts a comment. Unknown keys and malformed
/// values are reported together in one ConfigError.
RunConfig parse_run_config(std::istream& in);
RunConfig load_run_config(const std::string& path);

struct RecordRow {
  std::uint64_t seed = 0;
  Method method = Method::kSacl;
  std::string env;
  long long samples_consumed = 0;
  double q_error = 0.0;
  double exploitability = 0.0;
  int buffer_size = 0;
  double wall_clock = 0.0;
};

struct ExperimentRecord {
  std::vector<RecordRow> rows;

  /// Rows of a single seed, in order.
  ExperimentRecord for_seed(std::uint64_t seed) const;
};

struct RunResult {
  ExperimentRecord record;
  /// Learner tables at the end of each seed's run, in seed order.
  std::vector<QTable> final_q;
};

RunResult run_experiment_full(const RunConfig& cfg);
ExperimentRecord run_experiment(const RunConfig& cfg);

/// First samples_consumed with q_error below `threshold`, nullopt if none.
std::optional<long long> samples_to_converge(const ExperimentRecord& record, double threshold);

inline constexpr const char* kRecordCsvHeader =
    "seed,method,env,samples_consumed,q_error,exploitability,buffer_size,wall_clock";

void write_record_csv(std::ostream& out, const ExperimentRecord& record,
                      bool include_wall_clock = true);

struct Fig2Options {
  long long self_play_budget = 2000000;
  long long curriculum_budget = 200000;
  long long eval_every = 10;
  double threshold = 1e-2;
  double init_scale = 1e-3;
  int episodes_per_epoch = 1;
  std::uint64_t base_seed = 0;
};

/// Shared learner and curriculum settings for the rps(n) comparison.
RunConfig fig2_config(int n, Method method, const Fig2Options& opts, int seeds);

struct Fig2Row {
  int n = 0;
  Method method = Method::kSelfPlay;
  double mean_samples = 0.0;
  double stderr_samples = 0.0;
  int seeds = 0;
  int censored = 0;
  std::vector<std::optional<long long>> per_seed;
};

std::vector<Fig2Row> replicate_fig2(int n_max, int seeds, const Fig2Options& opts = {});

inline constexpr const char* kFig2CsvHeader = "n,method,mean_samples,stderr,seeds,censored";

void write_fig2_csv(std::ostream& out, const std::vector<Fig2Row>& rows);

struct CoverageResult {
  double mean = 0.0;
  double stderr_mean = 0.0;
  std::vector<long long> per_seed;
};

/// Environment steps until every state of rps(n) has been visited, resetting
/// each episode to the newest visited state and playing uniformly.
CoverageResult coverage_experiment(int n, int seeds, std::uint64_t base_seed = 0);

/// Episodes of uniform play on rps(1) until all nine joint actions occurred.
CoverageResult joint_action_coverage(int seeds, std::uint64_t base_seed = 0);

}  // namespace sacl
