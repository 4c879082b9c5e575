#include "sacl/learner.hpp"

#include <cmath>
#include <stdexcept>

namespace sacl {

QTable QTable::zeros(const GameSpec& game) {
  QTable t;
  t.q1.assign(game.state_count, Eigen::MatrixXd::Zero(game.actions1, game.actions2));
  t.q2 = t.q1;
  t.visits.assign(game.state_count, Eigen::MatrixXi::Zero(game.actions1, game.actions2));
  return t;
}

QTable QTable::random(const GameSpec& game, double scale, Rng& rng, InitKind kind) {
  QTable t = zeros(game);
  if (scale == 0.0) return t;
  for (auto* table : {&t.q1, &t.q2}) {
    for (auto& m : *table) {
      for (Eigen::Index j = 0; j < m.cols(); ++j) {
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
          const double u = rng.uniform();
          m(i, j) = kind == InitKind::kSymmetric ? scale * (2.0 * u - 1.0) : scale * u;
        }
      }
    }
  }
  return t;
}

void LearnerConfig::validate() const {
  if (!(lr >= 0.0 && lr <= 1.0)) throw std::invalid_argument("learner: lr must lie in [0, 1]");
  if (!(lr_decay > 0.0 && lr_decay <= 1.0)) {
    throw std::invalid_argument("learner: lr_decay must lie in (0, 1]");
  }
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) {
    throw std::invalid_argument("learner: epsilon must lie in [0, 1]");
  }
  if (batch_size < 1) throw std::invalid_argument("learner: batch_size must be positive");
  if (!(init_scale >= 0.0) || !std::isfinite(init_scale)) {
    throw std::invalid_argument("learner: init_scale must be finite and non-negative");
  }
}

double LearnerConfig::rate(int visits) const {
  switch (schedule) {
    case LrSchedule::kConstant: return lr;
    case LrSchedule::kVisitCount: return lr / (1.0 + visits);
    case LrSchedule::kMultiplicative: return lr * std::pow(lr_decay, visits);
  }
  return lr;
}

MinimaxQLearner::MinimaxQLearner(const GameSpec& game, LearnerConfig cfg, QTable q)
    : game_(&game), cfg_(cfg), q_(std::move(q)) {
  cfg_.validate();
  if (q_.state_count() != game.state_count) {
    throw std::invalid_argument("learner: Q-table does not match the game");
  }
  memo1_.resize(game.state_count);
  memo2_.resize(game.state_count);
}

MinimaxQLearner::MinimaxQLearner(const GameSpec& game, LearnerConfig cfg, Rng& init_rng)
    : MinimaxQLearner(game, cfg, QTable::random(game, cfg.init_scale, init_rng, cfg.init_kind)) {}

const MatrixSolution<double>& MinimaxQLearner::stage(int player, State s) const {
  auto& slot = (player == 1 ? memo1_ : memo2_)[s];
  if (!slot) {
    slot = solve_stage(q_.of(player)[s], player);
    ++solves_;
  }
  return *slot;
}

void MinimaxQLearner::update(std::span<const Transition> batch) {
  for (const Transition& t : batch) {
    const State s = t.state;
    if (!game_->valid_state(s)) throw std::invalid_argument("learner: invalid transition state");
    int& count = q_.visits[s](t.action.a1, t.action.a2);
    const double rate = cfg_.rate(count);
    ++count;
    for (int player = 1; player <= 2; ++player) {
      const double next_value = t.terminal ? 0.0 : value(player, t.next_state);
      double& entry = q_.of(player)[s](t.action.a1, t.action.a2);
      const double target = t.reward(player) + game_->discount * next_value;
      const double updated = (1.0 - rate) * entry + rate * target;
      // Memo keyed on content: an unchanged entry keeps the cached solution.
      if (updated != entry) {
        entry = updated;
        (player == 1 ? memo1_ : memo2_)[s].reset();
      }
    }
  }
}

ValueTable MinimaxQLearner::values() const {
  ValueTable v = ValueTable::zeros(game_->state_count);
  for (State s = 0; s < game_->state_count; ++s) {
    v.v1(s) = value(1, s);
    v.v2(s) = value(2, s);
  }
  return v;
}

Policy MinimaxQLearner::exploration_policy() const {
  Policy pi = Policy::uniform(*game_);
  const double eps = cfg_.epsilon;
  if (eps == 1.0) return pi;
  for (State s = 0; s < game_->state_count; ++s) {
    pi.player1.row(s) = eps * pi.player1.row(s) + (1.0 - eps) * stage(1, s).row_strategy.transpose();
    pi.player2.row(s) = eps * pi.player2.row(s) + (1.0 - eps) * stage(2, s).row_strategy.transpose();
  }
  return pi;
}

QTable minimax_q_update(const GameSpec& game, const QTable& q, std::span<const Transition> batch,
                        const LearnerConfig& cfg) {
  MinimaxQLearner learner(game, cfg, q);
  learner.update(batch);
  return learner.q();
}

Policy exploration_policy(const GameSpec& game, const QTable& q, const LearnerConfig& cfg) {
  return MinimaxQLearner(game, cfg, q).exploration_policy();
}

ValueTable values_from_q(const QTable& q) {
  const int S = q.state_count();
  ValueTable v = ValueTable::zeros(S);
  for (State s = 0; s < S; ++s) {
    v.v1(s) = solve_stage(q.q1[s], 1).value;
    v.v2(s) = solve_stage(q.q2[s], 2).value;
  }
  return v;
}

double local_q_error(const QTable& q, const NESolution& oracle, State s) {
  if (s < 0 || s >= q.state_count() || q.state_count() != static_cast<int>(oracle.q1.size())) {
    throw std::invalid_argument("q_error: Q-table and oracle shapes differ");
  }
  const auto& a = q.q1[s];
  if (a.rows() != oracle.q1[s].rows() || a.cols() != oracle.q1[s].cols()) {
    throw std::invalid_argument("q_error: Q-table and oracle shapes differ");
  }
  return std::max((q.q1[s] - oracle.q1[s]).cwiseAbs().maxCoeff(),
                  (q.q2[s] - oracle.q2[s]).cwiseAbs().maxCoeff());
}

double q_error(const QTable& q, const NESolution& oracle) {
  if (q.state_count() != static_cast<int>(oracle.q1.size())) {
    throw std::invalid_argument("q_error: Q-table and oracle shapes differ");
  }
  double worst = 0.0;
  for (State s = 0; s < q.state_count(); ++s) worst = std::max(worst, local_q_error(q, oracle, s));
  return worst;
}

}  // namespace sacl
