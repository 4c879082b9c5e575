#include "sacl/game.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace sacl {

namespace {

constexpr double kSumTol = 1e-12;

[[noreturn]] void fail(const std::string& what) { throw std::invalid_argument(what); }

void check_distribution(const Eigen::Ref<const Eigen::VectorXd>& p, const std::string& what) {
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (!std::isfinite(p(i)) || p(i) < 0.0) fail(what + ": negative or non-finite entry");
  }
  if (std::abs(p.sum() - 1.0) > kSumTol) {
    std::ostringstream os;
    os << what << ": sums to " << p.sum();
    fail(os.str());
  }
}

}  // namespace

void validate(const GameSpec& game) {
  if (game.state_count <= 0) fail("game: state_count must be positive");
  if (game.actions1 <= 0 || game.actions2 <= 0) fail("game: action counts must be positive");
  if (!(game.discount > 0.0 && game.discount <= 1.0)) fail("game: discount must lie in (0, 1]");
  if (game.horizon && *game.horizon <= 0) fail("game: horizon must be positive");
  const auto S = static_cast<std::size_t>(game.state_count);
  if (game.transitions.size() != S || game.reward1.size() != S) {
    fail("game: transition/reward tables do not cover every state");
  }
  if (game.initial_dist.size() != game.state_count) fail("game: initial_dist has wrong size");
  check_distribution(game.initial_dist, "game: initial_dist");
  if (game.features.rows() != game.state_count || game.features.cols() < 1) {
    fail("game: features must have one row per state");
  }
  if ((game.features.array() < 0.0).any() || (game.features.array() > 1.0).any()) {
    fail("game: features must be normalized to [0, 1]");
  }
  for (State s = 0; s < game.state_count; ++s) {
    const auto& r = game.reward1[s];
    if (r.rows() != game.actions1 || r.cols() != game.actions2) fail("game: reward shape mismatch");
    if (!r.allFinite()) fail("game: non-finite reward");
    if (game.transitions[s].size() != static_cast<std::size_t>(game.joint_count())) {
      fail("game: transition row count mismatch");
    }
    for (const auto& row : game.transitions[s]) {
      double sum = 0.0;
      for (const auto& succ : row) {
        if (succ.next != kTerminal && !game.valid_state(succ.next)) fail("game: invalid successor");
        if (!(succ.prob >= 0.0)) fail("game: negative transition probability");
        sum += succ.prob;
      }
      if (std::abs(sum - 1.0) > kSumTol) {
        std::ostringstream os;
        os << "game: transition row at state " << s << " sums to " << sum;
        fail(os.str());
      }
    }
  }
}

GameSpec subgame_of(const GameSpec& game, State s0) {
  if (!game.valid_state(s0)) {
    std::ostringstream os;
    os << "subgame_of: state " << s0 << " is not a non-terminal state of " << game.name;
    fail(os.str());
  }
  GameSpec sub = game;
  sub.initial_dist = Eigen::VectorXd::Zero(game.state_count);
  sub.initial_dist(s0) = 1.0;
  return sub;
}

Policy Policy::uniform(const GameSpec& game) {
  return {Eigen::MatrixXd::Constant(game.state_count, game.actions1, 1.0 / game.actions1),
          Eigen::MatrixXd::Constant(game.state_count, game.actions2, 1.0 / game.actions2)};
}

void validate(const Policy& policy, const GameSpec& game) {
  if (policy.player1.rows() != game.state_count || policy.player1.cols() != game.actions1 ||
      policy.player2.rows() != game.state_count || policy.player2.cols() != game.actions2) {
    fail("policy: shape does not match game");
  }
  for (State s = 0; s < game.state_count; ++s) {
    check_distribution(policy.player1.row(s).transpose(), "policy: player 1 row");
    check_distribution(policy.player2.row(s).transpose(), "policy: player 2 row");
  }
}

Eigen::MatrixXd constant_strategy(const GameSpec& game, int player, Action action) {
  const int actions = player == 1 ? game.actions1 : game.actions2;
  if (action < 0 || action >= actions) fail("constant_strategy: action out of range");
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(game.state_count, actions);
  m.col(action).setOnes();
  return m;
}

State sample_initial(const GameSpec& game, Rng& rng) {
  return rng.categorical(game.initial_dist);
}

State sample_next(const GameSpec& game, State s, JointAction a, Rng& rng) {
  const auto& row = game.successors(s, a);
  if (row.size() == 1) return row.front().next;
  const double u = rng.uniform();
  double acc = 0.0;
  for (const auto& succ : row) {
    acc += succ.prob;
    if (u < acc) return succ.next;
  }
  // Rounding left u above the accumulated mass; take the last positive entry.
  for (auto it = row.rbegin(); it != row.rend(); ++it) {
    if (it->prob > 0.0) return it->next;
  }
  return kTerminal;
}

std::vector<Transition> rollout(const GameSpec& game, const Policy& policy, State s0, Rng& rng,
                                int max_steps) {
  if (!game.valid_state(s0)) fail("rollout: invalid start state");
  if (max_steps < 1) fail("rollout: max_steps must be at least 1");
  const int limit = game.horizon ? std::min(max_steps, *game.horizon) : max_steps;
  std::vector<Transition> trajectory;
  State s = s0;
  for (int step = 0; step < limit; ++step) {
    const JointAction a{rng.categorical(policy.player1.row(s)),
                        rng.categorical(policy.player2.row(s))};
    const State next = sample_next(game, s, a, rng);
    const double r = game.reward1[s](a.a1, a.a2);
    if (!std::isfinite(r)) fail("rollout: non-finite reward");
    trajectory.push_back({s, a, r, next, next == kTerminal});
    assert(trajectory.back().reward(1) + trajectory.back().reward(2) == 0.0);
    if (next == kTerminal) break;
    s = next;
  }
  return trajectory;
}

std::optional<BackwardOrder> backward_order(const GameSpec& game) {
  const int S = game.state_count;
  // Kahn's algorithm on the reversed graph: a state is ready once every
  // successor has been placed.
  std::vector<std::vector<State>> predecessors(S);
  std::vector<int> pending(S, 0);
  for (State s = 0; s < S; ++s) {
    std::vector<State> succ;
    for (const auto& row : game.transitions[s]) {
      for (const auto& t : row) {
        if (t.prob > 0.0 && t.next != kTerminal) succ.push_back(t.next);
      }
    }
    std::sort(succ.begin(), succ.end());
    succ.erase(std::unique(succ.begin(), succ.end()), succ.end());
    pending[s] = static_cast<int>(succ.size());
    for (State n : succ) predecessors[n].push_back(s);
  }
  BackwardOrder out;
  out.layer.assign(S, 1);
  std::vector<State> frontier;
  for (State s = 0; s < S; ++s) {
    if (pending[s] == 0) frontier.push_back(s);
  }
  for (std::size_t head = 0; head < frontier.size(); ++head) {
    const State s = frontier[head];
    out.order.push_back(s);
    out.layer_count = std::max(out.layer_count, out.layer[s]);
    for (State p : predecessors[s]) {
      out.layer[p] = std::max(out.layer[p], out.layer[s] + 1);
      if (--pending[p] == 0) frontier.push_back(p);
    }
  }
  if (static_cast<int>(out.order.size()) != S) return std::nullopt;
  return out;
}

}  // namespace sacl
