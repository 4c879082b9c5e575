#pragma once

#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "sacl/evaluation.hpp"
#include "sacl/game.hpp"
#include "sacl/rng.hpp"
#include "sacl/values.hpp"

namespace sacl {

enum class InitKind {
  kSymmetric,  // U[-scale, scale]
  kOptimistic  // U[0, scale]
};

/// Tabular Q-functions for both players, each indexed (a1, a2) per state,
/// plus per-(s, a) visit counts driving the learning-rate schedule.
struct QTable {
  std::vector<Eigen::MatrixXd> q1;
  std::vector<Eigen::MatrixXd> q2;
  std::vector<Eigen::MatrixXi> visits;

  static QTable zeros(const GameSpec& game);
  /// Independent uniform entries of the given kind; scale 0 gives zeros().
  static QTable random(const GameSpec& game, double scale, Rng& rng,
                       InitKind kind = InitKind::kSymmetric);

  int state_count() const { return static_cast<int>(q1.size()); }
  const std::vector<Eigen::MatrixXd>& of(int player) const { return player == 1 ? q1 : q2; }
  std::vector<Eigen::MatrixXd>& of(int player) { return player == 1 ? q1 : q2; }
};

enum class LrSchedule {
  kConstant,      // lr
  kVisitCount,    // lr / (1 + visits(s, a))
  kMultiplicative // lr * lr_decay^visits(s, a)
};

struct LearnerConfig {
  double lr = 1.0;
  LrSchedule schedule = LrSchedule::kVisitCount;
  double lr_decay = 1.0;
  double epsilon = 1.0;
  int batch_size = 64;
  /// Width of the uniform initialization; 0 starts from zero Q-values.
  double init_scale = 0.0;
  InitKind init_kind = InitKind::kSymmetric;

  /// Throws std::invalid_argument on out-of-range fields.
  void validate() const;
  double rate(int visits) const;
};

/// Minimax-Q learner over a fixed game. Stage-game solutions are memoized
/// per (player, state) and recomputed only after that state's Q-row changes.
class MinimaxQLearner {
 public:
  MinimaxQLearner(const GameSpec& game, LearnerConfig cfg, QTable q);
  MinimaxQLearner(const GameSpec& game, LearnerConfig cfg, Rng& init_rng);

  /// Applies the minimax-Q backup to each sample in order:
  /// Q_i(s,a) <- (1 - lr) Q_i(s,a) + lr (r_i + gamma val_i(s')), val_i = 0 past
  /// the terminal.
  void update(std::span<const Transition> batch);

  const MatrixSolution<double>& stage(int player, State s) const;
  double value(int player, State s) const { return stage(player, s).value; }

  /// Values for every state, refreshed from the memo.
  ValueTable values() const;

  /// epsilon * uniform + (1 - epsilon) * maximin strategy, per state and player.
  Policy exploration_policy() const;

  const QTable& q() const { return q_; }
  const LearnerConfig& config() const { return cfg_; }
  const GameSpec& game() const { return *game_; }
  long long stage_solves() const { return solves_; }

 private:
  const GameSpec* game_;
  LearnerConfig cfg_;
  QTable q_;
  mutable std::vector<std::optional<MatrixSolution<double>>> memo1_;
  mutable std::vector<std::optional<MatrixSolution<double>>> memo2_;
  mutable long long solves_ = 0;
};

QTable minimax_q_update(const GameSpec& game, const QTable& q, std::span<const Transition> batch,
                        const LearnerConfig& cfg);

Policy exploration_policy(const GameSpec& game, const QTable& q, const LearnerConfig& cfg);

ValueTable values_from_q(const QTable& q);

/// max over players, states and joint actions of |Q_i - Q*_i|.
double q_error(const QTable& q, const NESolution& oracle);

/// The same maximum restricted to the entries of one state.
double local_q_error(const QTable& q, const NESolution& oracle, State s);

}  // namespace sacl
