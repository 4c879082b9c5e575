#include <cmath>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "sacl/environments.hpp"
#include "sacl/evaluation.hpp"
#include "sacl/learner.hpp"
#include "test_util.hpp"

using namespace sacl;

namespace {

Transition terminal_step(State s, int a1, int a2, double r) {
  return Transition{s, {a1, a2}, r, kTerminal, true};
}

QTable oracle_table(const GameSpec& g, const NESolution& ne) {
  QTable q = QTable::zeros(g);
  q.q1 = ne.q1;
  q.q2 = ne.q2;
  return q;
}

LearnerConfig constant_lr(double lr, double eps = 1.0) {
  LearnerConfig cfg;
  cfg.lr = lr;
  cfg.schedule = LrSchedule::kConstant;
  cfg.epsilon = eps;
  cfg.batch_size = 1;
  return cfg;
}

}  // namespace

TEST_SUITE("learner") {
  TEST_CASE("zero learning rate leaves the table unchanged") {
    const GameSpec g = make_rps({2});
    Rng rng(1);
    const QTable q = QTable::random(g, 0.5, rng);
    const std::vector<Transition> batch = {terminal_step(1, 1, 0, 1.0), Transition{0, {1, 0}, 0.0, 1, false}};
    const QTable out = minimax_q_update(g, q, batch, constant_lr(0.0));
    for (State s = 0; s < 2; ++s) {
      CHECK(out.q1[s] == q.q1[s]);
      CHECK(out.q2[s] == q.q2[s]);
    }
    CHECK(out.visits[1](1, 0) == 1);
  }

  TEST_CASE("unit learning rate on a terminal transition writes the reward") {
    const GameSpec g = make_rps({1});
    Rng rng(2);
    const QTable q = QTable::random(g, 0.5, rng);
    const Transition t = terminal_step(0, 2, 1, 1.0);
    const QTable out = minimax_q_update(g, q, std::span<const Transition>(&t, 1), constant_lr(1.0));
    CHECK(out.q1[0](2, 1) == 1.0);
    CHECK(out.q2[0](2, 1) == -1.0);
    CHECK(out.q1[0](0, 0) == q.q1[0](0, 0));
  }

  TEST_CASE("rps(1): one pass over the nine joint actions gives stage value 1/3") {
    const GameSpec g = make_rps({1});
    std::vector<Transition> batch;
    for (int a1 = 0; a1 < 3; ++a1) {
      for (int a2 = 0; a2 < 3; ++a2) batch.push_back(terminal_step(0, a1, a2, g.reward1[0](a1, a2)));
    }
    MinimaxQLearner learner(g, constant_lr(1.0), QTable::zeros(g));
    learner.update(batch);
    CHECK(std::abs(learner.value(1, 0) - 1.0 / 3.0) < 1e-12);
    CHECK(std::abs(learner.value(2, 0) + 1.0 / 3.0) < 1e-12);
    CHECK(q_error(learner.q(), solve_ne(g)) == 0.0);
  }

  TEST_CASE("non-terminal backups bootstrap from the successor's stage value") {
    const GameSpec g = make_rps({2});
    const NESolution ne = solve_ne(g);
    QTable q = QTable::zeros(g);
    q.q1[1] = ne.q1[1];
    q.q2[1] = ne.q2[1];
    MinimaxQLearner learner(g, constant_lr(0.5), q);
    const Transition t{0, {kPaper, kRock}, 0.0, 1, false};
    learner.update(std::span<const Transition>(&t, 1));
    CHECK(std::abs(learner.q().q1[0](kPaper, kRock) - 0.5 / 3.0) < 1e-12);
    CHECK(std::abs(learner.q().q2[0](kPaper, kRock) + 0.5 / 3.0) < 1e-12);
  }

  TEST_CASE("learning-rate schedules") {
    LearnerConfig cfg;
    cfg.lr = 0.8;
    cfg.schedule = LrSchedule::kVisitCount;
    CHECK(cfg.rate(0) == 0.8);
    CHECK(cfg.rate(3) == doctest::Approx(0.2));
    cfg.schedule = LrSchedule::kMultiplicative;
    cfg.lr_decay = 0.5;
    CHECK(cfg.rate(2) == doctest::Approx(0.2));
    cfg.schedule = LrSchedule::kConstant;
    CHECK(cfg.rate(100) == 0.8);
  }

  TEST_CASE("config validation") {
    auto bad = [](auto mutate) {
      LearnerConfig cfg;
      mutate(cfg);
      return cfg;
    };
    CHECK_THROWS_AS(bad([](LearnerConfig& c) { c.lr = 1.5; }).validate(), std::invalid_argument);
    CHECK_THROWS_AS(bad([](LearnerConfig& c) { c.lr = std::nan(""); }).validate(), std::invalid_argument);
    CHECK_THROWS_AS(bad([](LearnerConfig& c) { c.epsilon = -0.1; }).validate(), std::invalid_argument);
    CHECK_THROWS_AS(bad([](LearnerConfig& c) { c.lr_decay = 0.0; }).validate(), std::invalid_argument);
    CHECK_THROWS_AS(bad([](LearnerConfig& c) { c.batch_size = 0; }).validate(), std::invalid_argument);
    CHECK_THROWS_AS(bad([](LearnerConfig& c) { c.init_scale = -1.0; }).validate(), std::invalid_argument);
    CHECK_NOTHROW(LearnerConfig{}.validate());
    const GameSpec g = make_rps({2});
    CHECK_THROWS_AS(MinimaxQLearner(g, LearnerConfig{}, QTable::zeros(make_rps({3}))), std::invalid_argument);
  }

  TEST_CASE("initialization ranges") {
    const GameSpec g = make_rps({3});
    Rng a(3), b(3);
    const QTable sym = QTable::random(g, 0.25, a, InitKind::kSymmetric);
    const QTable opt = QTable::random(g, 0.25, b, InitKind::kOptimistic);
    double sym_min = 0.0;
    for (State s = 0; s < 3; ++s) {
      for (const auto* m : {&sym.q1[s], &sym.q2[s]}) {
        CHECK(m->cwiseAbs().maxCoeff() <= 0.25);
        sym_min = std::min(sym_min, m->minCoeff());
      }
      for (const auto* m : {&opt.q1[s], &opt.q2[s]}) {
        CHECK(m->minCoeff() >= 0.0);
        CHECK(m->maxCoeff() <= 0.25);
      }
      // Same draws, mapped to the two ranges.
      CHECK((opt.q1[s] * 2.0 - Eigen::MatrixXd::Constant(3, 3, 0.25)).isApprox(sym.q1[s], 1e-12));
    }
    CHECK(sym_min < 0.0);
    Rng c(4);
    const QTable zero = QTable::random(g, 0.0, c);
    CHECK(zero.q1[0].isZero(0.0));
  }

  TEST_CASE("exploration policy") {
    const GameSpec g = make_rps({1});
    const NESolution ne = solve_ne(g);
    const QTable converged = oracle_table(g, ne);

    SUBCASE("epsilon 1 is uniform everywhere") {
      Rng rng(5);
      const Policy pi = exploration_policy(g, QTable::random(g, 1.0, rng), constant_lr(1.0, 1.0));
      CHECK(pi.player1.isApprox(Policy::uniform(g).player1));
      CHECK(pi.player2.isApprox(Policy::uniform(g).player2));
    }
    SUBCASE("epsilon 0 on converged rps(1) plays the uniform maximin strategy") {
      const Policy pi = exploration_policy(g, converged, constant_lr(1.0, 0.0));
      for (int a = 0; a < 3; ++a) {
        CHECK(std::abs(pi.player1(0, a) - 1.0 / 3.0) < 1e-9);
        CHECK(std::abs(pi.player2(0, a) - 1.0 / 3.0) < 1e-9);
      }
    }
    SUBCASE("epsilon 0.5 mixes uniform and maximin; sampled frequencies within 3 sigma") {
      // Stage matrix with a pure maximin at Paper: half-mix gives (1/6, 2/3, 1/6).
      QTable q = QTable::zeros(g);
      q.q1[0] << 0, 0, 0, 1, 1, 1, 0, 0, 0;
      q.q2[0] = -q.q1[0];
      const Policy pi = exploration_policy(g, q, constant_lr(1.0, 0.5));
      const Eigen::Vector3d expect(1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0);
      REQUIRE(pi.player1.row(0).transpose().isApprox(expect, 1e-12));
      Rng rng(6);
      const int draws = 10000;
      Eigen::Vector3d counts = Eigen::Vector3d::Zero();
      for (int i = 0; i < draws; ++i) counts(rng.categorical(pi.player1.row(0)))++;
      for (int a = 0; a < 3; ++a) {
        CHECK(std::abs(counts(a) / draws - expect(a)) < 3.0 * testutil::binomial_sigma(expect(a), draws));
      }
    }
  }

  TEST_CASE("values_from_q") {
    const GameSpec g = make_rps({1});
    const ValueTable zero = values_from_q(QTable::zeros(g));
    CHECK(zero.v1.isZero(0.0));
    CHECK(zero.v2.isZero(0.0));
    const ValueTable star = values_from_q(oracle_table(g, solve_ne(g)));
    CHECK(std::abs(star.v1(0) - 1.0 / 3.0) < 1e-12);
    CHECK(std::abs(star.v2(0) + 1.0 / 3.0) < 1e-12);

    Rng rng(7);
    Rng gen(8);
    const GameSpec big = testutil::random_cyclic_game(30, 4, 3, 0.9, gen);
    const QTable q = QTable::random(big, 1.0, rng);
    const ValueTable v = values_from_q(q);
    for (State s = 0; s < 30; ++s) {
      CHECK(std::abs(v.v1(s) - oracle::solve_by_supports(q.q1[s]).value) < 1e-9);
      const Eigen::MatrixXd p2 = q.q2[s].transpose();
      CHECK(std::abs(v.v2(s) - oracle::solve_by_supports(p2).value) < 1e-9);
    }
  }

  TEST_CASE("q_error") {
    const GameSpec g = make_rps({2});
    const NESolution ne = solve_ne(g);
    CHECK(q_error(oracle_table(g, ne), ne) == 0.0);
    CHECK(std::abs(q_error(QTable::zeros(g), ne) - 1.0) < 1e-12);
    CHECK_THROWS_AS(q_error(QTable::zeros(make_rps({3})), ne), std::invalid_argument);

    // Moving one entry toward its oracle value never raises the max-norm error.
    Rng rng(9);
    QTable q = QTable::random(g, 1.0, rng);
    double err = q_error(q, ne);
    for (int t = 0; t < 500; ++t) {
      const State s = rng.uniform_int(2);
      const int a1 = rng.uniform_int(3), a2 = rng.uniform_int(3);
      auto& table = rng.bernoulli(0.5) ? q.q1 : q.q2;
      const auto& target = &table == &q.q1 ? ne.q1 : ne.q2;
      table[s](a1, a2) += rng.uniform() * (target[s](a1, a2) - table[s](a1, a2));
      const double next = q_error(q, ne);
      CHECK(next <= err);
      err = next;
    }
  }

  TEST_CASE("property: the equilibrium Q-values are a fixed point of every backup") {
    Rng gen(10);
    const GameSpec g = testutil::random_cyclic_game(4, 2, 3, 0.8, gen);
    const NESolution ne = solve_ne(g, 1e-13);
    MinimaxQLearner learner(g, constant_lr(1.0), oracle_table(g, ne));
    // Expected backups under the exact kernel reproduce Q*.
    for (State s = 0; s < g.state_count; ++s) {
      for (int player = 1; player <= 2; ++player) {
        const Eigen::MatrixXd b = backup(g, s, learner.values().of(player), player);
        CHECK((b - ne.q(player)[s]).cwiseAbs().maxCoeff() < 1e-10);
      }
    }
    const auto v = learner.values();
    CHECK((v.v1 - ne.v1).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((v.v1 + v.v2).cwiseAbs().maxCoeff() < 1e-10);
  }

  TEST_CASE("property: both players receive mirrored updates") {
    // Starting from Q2 = -Q1 the tables stay mirrored for any batch.
    Rng gen(11);
    const GameSpec g = testutil::random_cyclic_game(5, 3, 3, 0.9, gen);
    Rng rng(12);
    QTable q = QTable::random(g, 1.0, rng);
    for (State s = 0; s < g.state_count; ++s) q.q2[s] = -q.q1[s];
    LearnerConfig cfg = constant_lr(0.3);
    MinimaxQLearner learner(g, cfg, q);
    const Policy u = Policy::uniform(g);
    for (int e = 0; e < 200; ++e) learner.update(rollout(g, u, sample_initial(g, rng), rng, 30));
    for (State s = 0; s < g.state_count; ++s) {
      CHECK((learner.q().q1[s] + learner.q().q2[s]).cwiseAbs().maxCoeff() < 1e-12);
      CHECK(std::abs(learner.value(1, s) + learner.value(2, s)) < 1e-9);
    }
  }

  TEST_CASE("property: rps(2) converges under visit-count decay and uniform exploration") {
    const GameSpec g = make_rps({2});
    const NESolution ne = solve_ne(g);
    LearnerConfig cfg;
    cfg.lr = 1.0;
    cfg.schedule = LrSchedule::kVisitCount;
    cfg.epsilon = 1.0;
    MinimaxQLearner learner(g, cfg, QTable::zeros(g));
    Rng rng(13);
    const Policy u = learner.exploration_policy();
    for (int e = 0; e < 5000; ++e) learner.update(rollout(g, u, 0, rng, 10));
    CHECK(q_error(learner.q(), ne) < 1e-2);
  }

  TEST_CASE("stage solutions are memoized until the state's entries change") {
    const GameSpec g = make_rps({2});
    MinimaxQLearner learner(g, constant_lr(1.0), QTable::zeros(g));
    learner.values();
    CHECK(learner.stage_solves() == 4);
    learner.values();
    CHECK(learner.stage_solves() == 4);
    // Writing the same value keeps the memo; a new value invalidates one state.
    const Transition same = terminal_step(1, 0, 0, 0.0);
    learner.update(std::span<const Transition>(&same, 1));
    learner.values();
    CHECK(learner.stage_solves() == 4);
    const Transition win = terminal_step(1, kPaper, kRock, 1.0);
    learner.update(std::span<const Transition>(&win, 1));
    learner.values();
    CHECK(learner.stage_solves() == 6);
    // Player 2 simply avoids Rock, so the stage value stays 0.
    CHECK(std::abs(learner.value(1, 1)) < 1e-12);
  }
}
