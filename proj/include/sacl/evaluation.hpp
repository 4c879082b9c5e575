#pragma once

#include <vector>

#include <Eigen/Core>

#include "sacl/game.hpp"
#include "sacl/matrix_game.hpp"
#include "sacl/rng.hpp"
#include "sacl/values.hpp"

namespace sacl {

/// Maximin solution of player `player`'s stage matrix. `q` is indexed
/// (a1, a2) for both players; player 2's matrix is solved transposed so it
/// acts as the maximizing row player.
MatrixSolution<double> solve_stage(const Eigen::MatrixXd& q, int player);

/// Exact equilibrium of a zero-sum Markov game.
struct NESolution {
  Eigen::VectorXd v1;
  Eigen::VectorXd v2;
  std::vector<Eigen::MatrixXd> q1;
  std::vector<Eigen::MatrixXd> q2;
  Policy policy;
  /// Sup-norm change of the last backup; zero for an exact backward sweep.
  double residual = 0.0;
  bool converged = true;
  /// Backward layers for acyclic games, Jacobi iterations otherwise.
  int sweeps = 0;
  std::vector<double> residual_history;

  const Eigen::VectorXd& v(int player) const { return player == 1 ? v1 : v2; }
  const std::vector<Eigen::MatrixXd>& q(int player) const { return player == 1 ? q1 : q2; }
};

inline constexpr double kDefaultNeTolerance = 1e-10;
inline constexpr int kDefaultNeMaxIters = 100000;

/// Shapley value iteration. Acyclic games are solved exactly by one backward
/// pass in reverse topological order; cyclic games iterate Jacobi backups
/// until the sup-norm change drops below `tol`. Failure to converge sets
/// `converged = false` and keeps the last iterate.
NESolution solve_ne(const GameSpec& game, double tol = kDefaultNeTolerance,
                    int max_iters = kDefaultNeMaxIters);

/// Largest violation of Q = R + gamma E[V'] and V = maximin(Q) over every
/// player, state and joint action.
double ne_residual(const GameSpec& game, const NESolution& sol);

/// Expected one-step backup of `v` for player `player`: R_i(s,a) + gamma E[v(s')].
Eigen::MatrixXd backup(const GameSpec& game, State s, const Eigen::VectorXd& v, int player);

struct BestResponseResult {
  /// Deterministic reply, one-hot per state.
  Eigen::MatrixXd strategy;
  Eigen::VectorXd state_values;
  /// Expectation of state_values under the initial distribution.
  double value = 0.0;
};

/// Exact best response of `player` against the other component of `joint`,
/// by dynamic programming on the induced single-agent MDP.
BestResponseResult best_response(const GameSpec& game, const Policy& joint, int player);

struct ExploitabilityReport {
  double br_value_1 = 0.0;
  double br_value_2 = 0.0;
  double total = 0.0;
  Eigen::MatrixXd br_policy_1;
  Eigen::MatrixXd br_policy_2;
};

ExploitabilityReport exploitability(const GameSpec& game, const Policy& joint);

/// Player 1's expected return from each state under `joint`.
Eigen::VectorXd evaluate_policy(const GameSpec& game, const Policy& joint);

struct MatchupResult {
  double mean = 0.0;
  double exact = 0.0;
  int episodes = 0;
};

/// Head-to-head: player 1 of `p1` against player 2 of `p2`, from the
/// initial distribution. Reports the Monte-Carlo mean and the exact value.
MatchupResult evaluate_matchup(const GameSpec& game, const Policy& p1, const Policy& p2,
                               int episodes, Rng& rng);

/// Squared distance to the equilibrium value averaged over the signed
/// ensemble members; with one learner this is 1/2 sum_i (V*_i - V_i)^2.
double oracle_weight(State s, const Eigen::MatrixXd& signed_current, const NESolution& oracle);

}  // namespace sacl
