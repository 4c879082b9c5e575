#include "sacl/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sacl {

namespace {

constexpr double kPolicyEvalTol = 1e-13;
constexpr int kPolicyEvalMaxIters = 100000;

double expected_next(const GameSpec& game, State s, JointAction a, const Eigen::VectorXd& v) {
  double acc = 0.0;
  for (const auto& succ : game.successors(s, a)) {
    if (succ.next != kTerminal) acc += succ.prob * v(succ.next);
  }
  return acc;
}

// Runs `update(s, v_old) -> new value` either once in backward order (exact
// for acyclic games) or as Jacobi sweeps until the change drops below tol.
template <typename Update>
Eigen::VectorXd solve_fixed_point(const GameSpec& game, Update&& update, double tol,
                                  int max_iters) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(game.state_count);
  if (const auto order = backward_order(game)) {
    for (State s : order->order) v(s) = update(s, v);
    return v;
  }
  for (int it = 0; it < max_iters; ++it) {
    Eigen::VectorXd next(game.state_count);
    for (State s = 0; s < game.state_count; ++s) next(s) = update(s, v);
    const double change = (next - v).cwiseAbs().maxCoeff();
    v = std::move(next);
    if (change < tol) break;
  }
  return v;
}

}  // namespace

MatrixSolution<double> solve_stage(const Eigen::MatrixXd& q, int player) {
  return player == 1 ? solve_zero_sum(q) : solve_zero_sum(q.transpose());
}

Eigen::MatrixXd backup(const GameSpec& game, State s, const Eigen::VectorXd& v, int player) {
  const double sign = player == 1 ? 1.0 : -1.0;
  Eigen::MatrixXd q(game.actions1, game.actions2);
  for (int a1 = 0; a1 < game.actions1; ++a1) {
    for (int a2 = 0; a2 < game.actions2; ++a2) {
      q(a1, a2) = sign * game.reward1[s](a1, a2) +
                  game.discount * expected_next(game, s, {a1, a2}, v);
    }
  }
  return q;
}

NESolution solve_ne(const GameSpec& game, double tol, int max_iters) {
  if (!(tol > 0.0)) throw std::invalid_argument("solve_ne: tol must be positive");
  const int S = game.state_count;
  NESolution sol;
  sol.v1 = Eigen::VectorXd::Zero(S);
  sol.v2 = Eigen::VectorXd::Zero(S);
  sol.q1.assign(S, Eigen::MatrixXd::Zero(game.actions1, game.actions2));
  sol.q2.assign(S, Eigen::MatrixXd::Zero(game.actions1, game.actions2));
  sol.policy.player1.resize(S, game.actions1);
  sol.policy.player2.resize(S, game.actions2);

  auto finish_state = [&](State s) {
    sol.q1[s] = backup(game, s, sol.v1, 1);
    sol.q2[s] = backup(game, s, sol.v2, 2);
    const auto m1 = solve_stage(sol.q1[s], 1);
    const auto m2 = solve_stage(sol.q2[s], 2);
    sol.v1(s) = m1.value;
    sol.v2(s) = m2.value;
    sol.policy.player1.row(s) = m1.row_strategy.transpose();
    sol.policy.player2.row(s) = m2.row_strategy.transpose();
  };

  if (const auto order = backward_order(game)) {
    for (State s : order->order) finish_state(s);
    sol.sweeps = order->layer_count;
    sol.residual = 0.0;
    sol.converged = true;
    return sol;
  }

  sol.converged = false;
  for (int it = 0; it < max_iters; ++it) {
    Eigen::VectorXd n1(S), n2(S);
    for (State s = 0; s < S; ++s) {
      n1(s) = solve_stage(backup(game, s, sol.v1, 1), 1).value;
      n2(s) = solve_stage(backup(game, s, sol.v2, 2), 2).value;
    }
    const double change = std::max((n1 - sol.v1).cwiseAbs().maxCoeff(),
                                   (n2 - sol.v2).cwiseAbs().maxCoeff());
    sol.v1 = std::move(n1);
    sol.v2 = std::move(n2);
    sol.residual = change;
    sol.residual_history.push_back(change);
    sol.sweeps = it + 1;
    if (change < tol) {
      sol.converged = true;
      break;
    }
  }
  // Q-values and strategies from the final iterate; values stay as iterated.
  const Eigen::VectorXd v1 = sol.v1, v2 = sol.v2;
  for (State s = 0; s < S; ++s) {
    sol.q1[s] = backup(game, s, v1, 1);
    sol.q2[s] = backup(game, s, v2, 2);
    sol.policy.player1.row(s) = solve_stage(sol.q1[s], 1).row_strategy.transpose();
    sol.policy.player2.row(s) = solve_stage(sol.q2[s], 2).row_strategy.transpose();
  }
  return sol;
}

double ne_residual(const GameSpec& game, const NESolution& sol) {
  double worst = 0.0;
  for (int player = 1; player <= 2; ++player) {
    for (State s = 0; s < game.state_count; ++s) {
      const Eigen::MatrixXd expected = backup(game, s, sol.v(player), player);
      worst = std::max(worst, (expected - sol.q(player)[s]).cwiseAbs().maxCoeff());
      worst = std::max(worst, std::abs(solve_stage(sol.q(player)[s], player).value -
                                       sol.v(player)(s)));
    }
  }
  return worst;
}

BestResponseResult best_response(const GameSpec& game, const Policy& joint, int player) {
  if (player != 1 && player != 2) throw std::invalid_argument("best_response: player must be 1 or 2");
  validate(joint, game);
  const int own = player == 1 ? game.actions1 : game.actions2;
  const int other = player == 1 ? game.actions2 : game.actions1;
  const Eigen::MatrixXd& opp = joint.of(player == 1 ? 2 : 1);
  const double sign = player == 1 ? 1.0 : -1.0;

  // Action values of the induced MDP at state s under current estimates v.
  auto action_values = [&](State s, const Eigen::VectorXd& v) {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(own);
    for (int a = 0; a < own; ++a) {
      for (int b = 0; b < other; ++b) {
        const double pb = opp(s, b);
        if (pb == 0.0) continue;
        const JointAction ja = player == 1 ? JointAction{a, b} : JointAction{b, a};
        out(a) += pb * (sign * game.reward1[s](ja.a1, ja.a2) +
                        game.discount * expected_next(game, s, ja, v));
      }
    }
    return out;
  };

  BestResponseResult result;
  result.state_values = solve_fixed_point(
      game, [&](State s, const Eigen::VectorXd& v) { return action_values(s, v).maxCoeff(); },
      kPolicyEvalTol, kPolicyEvalMaxIters);
  result.strategy = Eigen::MatrixXd::Zero(game.state_count, own);
  for (State s = 0; s < game.state_count; ++s) {
    const Eigen::VectorXd values = action_values(s, result.state_values);
    const double best = values.maxCoeff();
    const double slack = 1e-12 * std::max(1.0, std::abs(best));
    int choice = 0;
    while (values(choice) < best - slack) ++choice;
    result.strategy(s, choice) = 1.0;
  }
  result.value = game.initial_dist.dot(result.state_values);
  return result;
}

ExploitabilityReport exploitability(const GameSpec& game, const Policy& joint) {
  ExploitabilityReport report;
  auto br1 = best_response(game, joint, 1);
  auto br2 = best_response(game, joint, 2);
  report.br_value_1 = br1.value;
  report.br_value_2 = br2.value;
  report.total = br1.value + br2.value;
  report.br_policy_1 = std::move(br1.strategy);
  report.br_policy_2 = std::move(br2.strategy);
  return report;
}

Eigen::VectorXd evaluate_policy(const GameSpec& game, const Policy& joint) {
  validate(joint, game);
  auto update = [&](State s, const Eigen::VectorXd& v) {
    double acc = 0.0;
    for (int a1 = 0; a1 < game.actions1; ++a1) {
      const double p1 = joint.player1(s, a1);
      if (p1 == 0.0) continue;
      for (int a2 = 0; a2 < game.actions2; ++a2) {
        const double p = p1 * joint.player2(s, a2);
        if (p == 0.0) continue;
        acc += p * (game.reward1[s](a1, a2) + game.discount * expected_next(game, s, {a1, a2}, v));
      }
    }
    return acc;
  };
  return solve_fixed_point(game, update, kPolicyEvalTol, kPolicyEvalMaxIters);
}

MatchupResult evaluate_matchup(const GameSpec& game, const Policy& p1, const Policy& p2,
                               int episodes, Rng& rng) {
  if (episodes < 1) throw std::invalid_argument("evaluate_matchup: episodes must be positive");
  const Policy joint{p1.player1, p2.player2};
  MatchupResult out;
  out.episodes = episodes;
  out.exact = game.initial_dist.dot(evaluate_policy(game, joint));
  const int max_steps = game.horizon ? *game.horizon : 10000;
  double total = 0.0;
  for (int e = 0; e < episodes; ++e) {
    const State s0 = sample_initial(game, rng);
    double ret = 0.0, scale = 1.0;
    for (const auto& t : rollout(game, joint, s0, rng, max_steps)) {
      ret += scale * t.reward1;
      scale *= game.discount;
    }
    total += ret;
  }
  out.mean = total / episodes;
  return out;
}

double oracle_weight(State s, const Eigen::MatrixXd& signed_current, const NESolution& oracle) {
  if (s < 0 || s >= signed_current.cols() || s >= oracle.v1.size()) {
    throw std::invalid_argument("oracle_weight: state out of range");
  }
  return (oracle.v1(s) - signed_current.col(s).array()).square().mean();
}

}  // namespace sacl
