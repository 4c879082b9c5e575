#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "sacl/rng.hpp"

namespace sacl {

using State = int;
using Action = int;

/// Sentinel next-state for the absorbing terminal.
inline constexpr State kTerminal = -1;

struct JointAction {
  Action a1 = 0;
  Action a2 = 0;
  friend bool operator==(const JointAction&, const JointAction&) = default;
};

struct Successor {
  State next = kTerminal;
  double prob = 0.0;
};

/// Enumerable two-player zero-sum Markov game. Only player 1's reward is
/// stored; player 2 receives its negation.
///
/// `transitions[s][a1 * A2 + a2]` is a sparse distribution over successors,
/// `reward1[s](a1, a2)` the stage reward, `features.row(s)` the state's
/// coordinates in [0, 1]^d used for buffer distances.
struct GameSpec {
  std::string name;
  int state_count = 0;
  int actions1 = 0;
  int actions2 = 0;
  std::vector<std::vector<std::vector<Successor>>> transitions;
  std::vector<Eigen::MatrixXd> reward1;
  double discount = 1.0;
  Eigen::VectorXd initial_dist;
  Eigen::MatrixXd features;
  std::optional<int> horizon;

  int joint_index(JointAction a) const { return a.a1 * actions2 + a.a2; }
  JointAction joint_action(int index) const {
    return {index / actions2, index % actions2};
  }
  int joint_count() const { return actions1 * actions2; }
  bool valid_state(State s) const { return s >= 0 && s < state_count; }

  const std::vector<Successor>& successors(State s, JointAction a) const {
    return transitions[s][joint_index(a)];
  }
};

/// Throws std::invalid_argument describing the first violated invariant.
void validate(const GameSpec& game);

/// Same game with the initial distribution replaced by a point mass on `s0`.
GameSpec subgame_of(const GameSpec& game, State s0);

/// Per-player state-conditioned mixed strategies; row s of each matrix is a
/// distribution over that player's actions.
struct Policy {
  Eigen::MatrixXd player1;
  Eigen::MatrixXd player2;

  static Policy uniform(const GameSpec& game);
  const Eigen::MatrixXd& of(int player) const { return player == 1 ? player1 : player2; }
  Eigen::MatrixXd& of(int player) { return player == 1 ? player1 : player2; }
};

void validate(const Policy& policy, const GameSpec& game);

/// Point mass on `action` for the given player at every state.
Eigen::MatrixXd constant_strategy(const GameSpec& game, int player, Action action);

struct Transition {
  State state = 0;
  JointAction action;
  double reward1 = 0.0;
  State next_state = kTerminal;
  bool terminal = true;

  double reward(int player) const { return player == 1 ? reward1 : -reward1; }
};

State sample_initial(const GameSpec& game, Rng& rng);

State sample_next(const GameSpec& game, State s, JointAction a, Rng& rng);

/// Plays `policy` from `s0` until the terminal, the game horizon or
/// `max_steps` transitions, whichever comes first.
std::vector<Transition> rollout(const GameSpec& game, const Policy& policy, State s0,
                                Rng& rng, int max_steps);

/// Reverse topological order of the non-terminal states (states whose
/// successors are all already listed come first), or nullopt if the
/// transition graph has a cycle. The second member gives each state's layer:
/// the longest path, in steps, to the terminal.
struct BackwardOrder {
  std::vector<State> order;
  std::vector<int> layer;
  int layer_count = 0;
};
std::optional<BackwardOrder> backward_order(const GameSpec& game);

}  // namespace sacl
