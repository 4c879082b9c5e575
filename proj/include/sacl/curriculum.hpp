#pragma once

#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "sacl/game.hpp"
#include "sacl/learner.hpp"
#include "sacl/rng.hpp"
#include "sacl/values.hpp"

namespace sacl {

enum class MetricVariant { kFull, kUniform, kBiasOnly, kVarianceOnly, kTdError };

/// How the checkpoint-difference term is aggregated over the ensemble.
enum class BiasParse {
  kSquareOfMean,  // (E[V - V'])^2, the bias half of the bias/variance split
  kMeanOfSquares  // E[(V - V')^2]
};

MetricVariant parse_metric_variant(std::string_view name);
std::string_view to_string(MetricVariant v);

struct MetricConfig {
  double alpha_bias = 1.0;
  MetricVariant variant = MetricVariant::kFull;
  int ensemble_size = 1;
  BiasParse bias_parse = BiasParse::kSquareOfMean;

  void validate() const;
};

/// One-step context for the TD-error metric.
struct TdContext {
  double reward1 = 0.0;
  State next_state = kTerminal;
  double discount = 1.0;
};

/// Sampling priority of state `s`:
///
///   full           alpha * (E_m[V_m(s) - V'_m(s)])^2 + Var_m[V_m(s)]
///   bias_only      the first term alone
///   variance_only  the second term alone
///   uniform        1
///   td_error       |r + gamma V(s') - V(s)| with V player 1's mean value
///
/// Means and the population variance run over the signed ensemble rows in
/// fixed order, so the result does not depend on evaluation order.
double compute_weight(State s, const ValueEnsemble& ens, const MetricConfig& cfg,
                      const std::optional<TdContext>& td = std::nullopt);

struct BufferEntry {
  State state = 0;
  Eigen::VectorXd features;
  double weight = 0.0;
};

/// Particle approximation of the visited state space.
struct WeightedStateBuffer {
  std::vector<BufferEntry> entries;
  int capacity = 64;

  int size() const { return static_cast<int>(entries.size()); }
  bool empty() const { return entries.empty(); }
  double total_weight() const;
};

/// Union with `states`; a state already present takes the newer weight.
WeightedStateBuffer buffer_insert(WeightedStateBuffer buf,
                                  std::span<const std::pair<State, double>> states,
                                  const GameSpec& game);

/// Greedy farthest point sampling down to `k` entries. Seeds with the
/// largest weight, then repeatedly adds the entry whose Euclidean distance to
/// the selected set is largest; ties go to the lowest state index. The
/// selection is deterministic, so `rng` is not consumed.
WeightedStateBuffer fps_prune(WeightedStateBuffer buf, int k, Rng& rng);

/// Uniformly random k-subset, the baseline FPS is compared against.
WeightedStateBuffer random_prune(WeightedStateBuffer buf, int k, Rng& rng);

struct SamplerConfig {
  double p = 0.7;
};

struct SubgameDraw {
  State state = 0;
  bool from_buffer = false;
};

/// With probability p draws a buffered state proportionally to weight,
/// otherwise (or when the buffer holds no weight) draws from the game's
/// initial distribution.
SubgameDraw sample_subgame(const WeightedStateBuffer& buf, const GameSpec& game,
                           const SamplerConfig& cfg, Rng& rng);

enum class PruneMethod { kFps, kRandom };

struct CurriculumConfig {
  MetricConfig metric;
  SamplerConfig sampler;
  int capacity = 64;
  int episodes_per_epoch = 4;
  int max_episode_steps = 1000;
  PruneMethod prune = PruneMethod::kFps;

  void validate() const;
};

/// A run's trainable state: `ensemble_size` learner replicas trained on the
/// same samples (replica 0 drives exploration) and the state buffer.
struct CurriculumState {
  std::vector<MinimaxQLearner> learners;
  WeightedStateBuffer buffer;

  static CurriculumState create(const GameSpec& game, const LearnerConfig& lcfg,
                                const CurriculumConfig& ccfg, std::uint64_t seed);
  const MinimaxQLearner& primary() const { return learners.front(); }
  std::vector<ValueTable> values() const;
};

struct EpochStats {
  long long samples = 0;
  int episodes = 0;
  int episodes_from_buffer = 0;
  int buffer_size = 0;
  std::vector<std::vector<Transition>> trajectories;
};

/// One round of the curriculum loop: checkpoint values, roll out
/// `episodes_per_epoch` episodes from sample_subgame starts, train every
/// replica, weight the visited states, insert them and prune over capacity.
EpochStats curriculum_epoch(CurriculumState& state, const GameSpec& game,
                            const CurriculumConfig& cfg, Rng& rng);

/// Baseline epoch: the same collection and training with every episode
/// started from the initial distribution; the buffer is left untouched.
EpochStats self_play_epoch(CurriculumState& state, const GameSpec& game,
                           const CurriculumConfig& cfg, Rng& rng);

/// Collection and training with every episode started at `start`.
EpochStats fixed_start_epoch(CurriculumState& state, const GameSpec& game,
                             const CurriculumConfig& cfg, State start, Rng& rng);

}  // namespace sacl
