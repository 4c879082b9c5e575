#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "sacl/environments.hpp"
#include "sacl/evaluation.hpp"
#include "test_util.hpp"

using namespace sacl;

namespace {

Policy random_policy(const GameSpec& g, Rng& rng) {
  Policy p{Eigen::MatrixXd(g.state_count, g.actions1), Eigen::MatrixXd(g.state_count, g.actions2)};
  for (auto* m : {&p.player1, &p.player2}) {
    for (Eigen::Index s = 0; s < m->rows(); ++s) {
      for (Eigen::Index a = 0; a < m->cols(); ++a) (*m)(s, a) = rng.uniform() + 1e-3;
      m->row(s) /= m->row(s).sum();
    }
  }
  return p;
}

// (1 - eps) * pi + eps * (pure action 0), applied to both players.
Policy perturb(const GameSpec& g, const Policy& pi, double eps) {
  Policy out = pi;
  out.player1 = (1.0 - eps) * pi.player1 + eps * constant_strategy(g, 1, 0);
  out.player2 = (1.0 - eps) * pi.player2 + eps * constant_strategy(g, 2, 0);
  return out;
}

}  // namespace

TEST_SUITE("evaluation") {
  TEST_CASE("rps(2) equilibrium values") {
    const NESolution ne = solve_ne(make_rps({2}));
    CHECK(std::abs(ne.v1(0) - 1.0 / 9.0) < 1e-9);
    CHECK(std::abs(ne.v1(1) - 1.0 / 3.0) < 1e-9);
    CHECK(ne.converged);
    CHECK(ne.residual == 0.0);
    CHECK(ne.sweeps == 2);
  }

  TEST_CASE("all-zero rewards give zero values and Q-values") {
    Rng rng(1);
    GameSpec g = testutil::random_cyclic_game(3, 2, 2, 0.9, rng);
    for (auto& r : g.reward1) r.setZero();
    const NESolution ne = solve_ne(g);
    CHECK(ne.v1.cwiseAbs().maxCoeff() == 0.0);
    CHECK(ne.v2.cwiseAbs().maxCoeff() == 0.0);
    for (const auto& q : ne.q1) CHECK(q.cwiseAbs().maxCoeff() == 0.0);
  }

  TEST_CASE("2x2 grid pursuit, H=2: values match the game tree") {
    const GridPursuitParams p{2, 2, 2, 1.0};
    const GameSpec g = make_grid_pursuit(p);
    const GridPursuitLayout layout(p);
    const NESolution ne = solve_ne(g);
    oracle::PursuitTree tree(2, 2, 2, 1.0);
    for (State s = 0; s < g.state_count; ++s) {
      const PursuitState st = layout.decode(s);
      CHECK(std::abs(ne.v1(s) - tree.value(st.predator.x, st.predator.y, st.prey.x, st.prey.y, st.t)) < 1e-9);
    }
  }

  TEST_CASE("equilibrium consistency: V1 = -V2, Bellman and maximin residuals") {
    Rng rng(2);
    for (const GameSpec& g : {make_rps({4}), make_grid_pursuit({3, 3, 4, 1.0}),
                              testutil::random_cyclic_game(5, 3, 2, 0.9, rng)}) {
      const NESolution ne = solve_ne(g);
      CHECK(ne.converged);
      CHECK((ne.v1 + ne.v2).cwiseAbs().maxCoeff() < 1e-9);
      CHECK(ne_residual(g, ne) < 1e-8);
      CHECK_NOTHROW(validate(ne.policy, g));
    }
  }

  TEST_CASE("property: Shapley contraction on a random cyclic game") {
    Rng rng(3);
    const double gamma = 0.9;
    const GameSpec g = testutil::random_cyclic_game(6, 3, 3, gamma, rng);
    const NESolution ne = solve_ne(g, 1e-12);
    REQUIRE(ne.converged);
    REQUIRE(ne.residual_history.size() > 3);
    for (std::size_t i = 1; i < ne.residual_history.size(); ++i) {
      CHECK(ne.residual_history[i] <= (gamma + 1e-12) * ne.residual_history[i - 1] + 1e-15);
    }
    CHECK(ne.residual < 1e-12);
    CHECK(ne_residual(g, ne) < 1e-10);
  }

  TEST_CASE("non-convergence is reported") {
    Rng rng(4);
    const GameSpec g = testutil::random_cyclic_game(4, 2, 2, 0.99, rng);
    const NESolution ne = solve_ne(g, 1e-10, 3);
    CHECK_FALSE(ne.converged);
    CHECK(ne.sweeps == 3);
    CHECK(ne.residual > 1e-10);
    CHECK_THROWS_AS(solve_ne(g, 0.0), std::invalid_argument);
  }

  TEST_CASE("player 2's own solve gives the negated values") {
    Rng rng(5);
    const GameSpec g = testutil::random_cyclic_game(4, 3, 3, 0.8, rng);
    const NESolution ne = solve_ne(g);
    for (State s = 0; s < g.state_count; ++s) {
      CHECK(std::abs(solve_stage(ne.q2[s], 2).value + ne.v1(s)) < 1e-9);
    }
  }

  TEST_CASE("best responses in rps(1)") {
    const GameSpec g = make_rps({1});
    const Policy u = Policy::uniform(g);
    SUBCASE("against uniform every reply earns one third") {
      const auto br = best_response(g, u, 1);
      CHECK(std::abs(br.value - 1.0 / 3.0) < 1e-12);
      CHECK(br.strategy.row(0).sum() == 1.0);
    }
    SUBCASE("against always-rock the reply is paper, value 1") {
      const Policy rock{u.player1, constant_strategy(g, 2, kRock)};
      const auto br = best_response(g, rock, 1);
      CHECK(br.value == doctest::Approx(1.0).epsilon(1e-15));
      CHECK(br.strategy(0, kPaper) == 1.0);
    }
    SUBCASE("against the equilibrium the reply earns the equilibrium value") {
      const NESolution ne = solve_ne(g);
      CHECK(std::abs(best_response(g, ne.policy, 1).value - ne.v1(0)) < 1e-8);
      CHECK(std::abs(best_response(g, ne.policy, 2).value - ne.v2(0)) < 1e-8);
    }
    CHECK_THROWS_AS(best_response(g, u, 3), std::invalid_argument);
  }

  TEST_CASE("exploitability calibration") {
    const GameSpec g = make_rps({1});
    const NESolution ne = solve_ne(g);
    CHECK(std::abs(exploitability(g, ne.policy).total) < 1e-8);

    const Policy mixed{Policy::uniform(g).player1, constant_strategy(g, 2, kRock)};
    const auto rep = exploitability(g, mixed);
    CHECK(std::abs(rep.br_value_1 - 1.0) < 1e-12);
    CHECK(std::abs(rep.br_value_2 + 1.0 / 3.0) < 1e-12);
    CHECK(std::abs(rep.total - 2.0 / 3.0) < 1e-8);
    CHECK(rep.br_policy_1(0, kPaper) == 1.0);
  }

  TEST_CASE("property: exploitability is non-negative and vanishes only at equilibrium") {
    Rng rng(6);
    for (const GameSpec& g : {make_rps({1}), make_rps({3}), make_grid_pursuit({3, 3, 2, 1.0}),
                              testutil::random_cyclic_game(4, 2, 3, 0.9, rng)}) {
      const NESolution ne = solve_ne(g);
      CHECK(std::abs(exploitability(g, ne.policy).total) < 1e-8);
      CHECK(exploitability(g, perturb(g, ne.policy, 0.1)).total > 1e-6);
      for (int t = 0; t < 20; ++t) CHECK(exploitability(g, random_policy(g, rng)).total >= -1e-9);
    }
  }

  TEST_CASE("oracle weight") {
    const GameSpec g = make_rps({1});
    const NESolution ne = solve_ne(g);
    const ValueTable zero = ValueTable::zeros(1);
    const ValueTable exact{ne.v1, ne.v2};
    CHECK(oracle_weight(0, ValueEnsemble::signed_rows({&exact, 1}), ne) == 0.0);
    CHECK(std::abs(oracle_weight(0, ValueEnsemble::signed_rows({&zero, 1}), ne) - 1.0 / 9.0) < 1e-15);
    CHECK_THROWS_AS(oracle_weight(1, ValueEnsemble::signed_rows({&zero, 1}), ne), std::invalid_argument);

    // Bias squared plus variance of X = V* - member equals the mean of X^2.
    Rng rng(7);
    for (int t = 0; t < 1000; ++t) {
      Eigen::MatrixXd members(4, 1);
      for (int m = 0; m < 4; ++m) members(m, 0) = 2.0 * rng.uniform() - 1.0;
      const Eigen::ArrayXd x = ne.v1(0) - members.col(0).array();
      const double decomposed = x.mean() * x.mean() + (x - x.mean()).square().mean();
      CHECK(std::abs(oracle_weight(0, members, ne) - decomposed) < 1e-12);
    }
  }

  TEST_CASE("matchups") {
    const GameSpec g = make_rps({1});
    const NESolution ne = solve_ne(g);
    Rng rng(8);
    SUBCASE("equilibrium against equilibrium") {
      const auto r = evaluate_matchup(g, ne.policy, ne.policy, 20000, rng);
      CHECK(std::abs(r.exact - 1.0 / 3.0) < 1e-12);
      CHECK(std::abs(r.mean - 1.0 / 3.0) < 4.0 * testutil::binomial_sigma(1.0 / 3.0, 20000));
      CHECK(r.episodes == 20000);
    }
    SUBCASE("uniform against always-rock") {
      const Policy u = Policy::uniform(g);
      const Policy rock{u.player1, constant_strategy(g, 2, kRock)};
      CHECK(std::abs(evaluate_matchup(g, u, rock, 100, rng).exact - 1.0 / 3.0) < 1e-12);
    }
    SUBCASE("deterministic game and policies: sample mean equals the exact value") {
      const GameSpec r3 = make_rps({3});
      const Policy win{constant_strategy(r3, 1, kPaper), constant_strategy(r3, 2, kRock)};
      const auto r = evaluate_matchup(r3, win, win, 50, rng);
      CHECK(r.mean == r.exact);
      CHECK(r.exact == 1.0);
    }
    CHECK_THROWS_AS(evaluate_matchup(g, ne.policy, ne.policy, 0, rng), std::invalid_argument);
  }

  TEST_CASE("evaluate_policy on a discounted cycle") {
    // Single state, reward 1 then stay with probability 1/2: V = 1 / (1 - 0.45).
    GameSpec g = testutil::blank_game(1, 1, 1, 0.9);
    g.transitions[0][0] = {{0, 0.5}, {kTerminal, 0.5}};
    g.reward1[0](0, 0) = 1.0;
    const Eigen::VectorXd v = evaluate_policy(g, Policy::uniform(g));
    CHECK(std::abs(v(0) - 1.0 / (1.0 - 0.45)) < 1e-10);
  }
}
