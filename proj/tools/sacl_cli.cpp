// Command-line front end: training runs, the rps(n) sample-complexity
// comparison, coverage counts, exact equilibria and exploitability reports.

#include <fstream>
#include <iostream>
#include <iterator>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "sacl/environments.hpp"
#include "sacl/evaluation.hpp"
#include "sacl/harness.hpp"
#include "sacl/matrix_game.hpp"

using nlohmann::json;

namespace {

json to_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

json strategy_json(const Eigen::MatrixXd& m) {
  json out = json::object();
  for (Eigen::Index s = 0; s < m.rows(); ++s) {
    out[std::to_string(s)] = to_json(m.row(s).transpose());
  }
  return out;
}

json policy_json(const sacl::Policy& p) {
  return {{"player1", strategy_json(p.player1)}, {"player2", strategy_json(p.player2)}};
}

// Accepts {"player1": {"0": [...]}, "player2": {...}}, with either an object
// keyed by state index or a plain array of rows per player.
sacl::Policy read_policy(const std::string& path, const sacl::GameSpec& game) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open policy file " + path);
  const json doc = json::parse(in);
  sacl::Policy pi{Eigen::MatrixXd::Zero(game.state_count, game.actions1),
                  Eigen::MatrixXd::Zero(game.state_count, game.actions2)};
  for (int player = 1; player <= 2; ++player) {
    const std::string key = "player" + std::to_string(player);
    if (!doc.contains(key)) throw std::runtime_error("policy file lacks '" + key + "'");
    const json& rows = doc.at(key);
    Eigen::MatrixXd& m = pi.of(player);
    auto fill = [&](int s, const json& row) {
      if (s < 0 || s >= game.state_count) throw std::runtime_error("policy state out of range");
      if (static_cast<Eigen::Index>(row.size()) != m.cols()) {
        throw std::runtime_error("policy row has wrong number of actions");
      }
      for (Eigen::Index a = 0; a < m.cols(); ++a) m(s, a) = row.at(a).get<double>();
    };
    if (rows.is_array()) {
      for (int s = 0; s < static_cast<int>(rows.size()); ++s) fill(s, rows.at(s));
    } else {
      for (const auto& [k, row] : rows.items()) fill(std::stoi(k), row);
    }
  }
  sacl::validate(pi, game);
  return pi;
}

Eigen::MatrixXd read_matrix(std::istream& in) {
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::vector<double> row{std::istream_iterator<double>(ls), std::istream_iterator<double>()};
    if (!ls.eof()) throw std::runtime_error("solve-matrix: non-numeric entry in '" + line + "'");
    if (!row.empty()) rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::runtime_error("solve-matrix: empty matrix");
  Eigen::MatrixXd m(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows.front().size()) throw std::runtime_error("solve-matrix: ragged rows");
    for (std::size_t j = 0; j < rows[i].size(); ++j) m(i, j) = rows[i][j];
  }
  return m;
}

struct EnvOptions {
  std::string env = "rps";
  int n = 4;
  int width = 3;
  int height = 3;
  int horizon = 4;
  double capture_reward = 1.0;

  void add(CLI::App* app) {
    app->add_option("--env", env, "rps or grid_pursuit")->check(CLI::IsMember({"rps", "grid_pursuit"}));
    app->add_option("--n", n, "rps rounds");
    app->add_option("--width", width, "grid width");
    app->add_option("--height", height, "grid height");
    app->add_option("--horizon", horizon, "grid horizon");
    app->add_option("--capture-reward", capture_reward, "grid capture reward");
  }
  sacl::GameSpec build() const {
    sacl::EnvConfig cfg;
    cfg.name = env;
    cfg.rps.rounds = n;
    cfg.grid = {width, height, horizon, capture_reward};
    return cfg.build();
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Subgame curriculum learning laboratory for zero-sum Markov games"};
  app.require_subcommand(1);

  auto* train = app.add_subcommand("train", "run an experiment from a config file, CSV to stdout or --out");
  std::string config_path, train_out, policy_out;
  train->add_option("--config", config_path, "key = value config file")->required();
  train->add_option("--out", train_out, "CSV output path");
  train->add_option("--policy-out", policy_out, "write the first seed's greedy policy as JSON");

  auto* fig2 = app.add_subcommand("replicate-fig2", "samples to learn rps(n) equilibrium Q-values");
  int n_max = 8, fig2_seeds = 10;
  std::string fig2_out;
  sacl::Fig2Options fig2_opts;
  fig2->add_option("--n-max", n_max)->check(CLI::Range(1, 10));
  fig2->add_option("--seeds", fig2_seeds)->check(CLI::PositiveNumber);
  fig2->add_option("--out", fig2_out, "CSV output path");
  fig2->add_option("--self-play-budget", fig2_opts.self_play_budget);
  fig2->add_option("--curriculum-budget", fig2_opts.curriculum_budget);
  fig2->add_option("--init-scale", fig2_opts.init_scale);
  fig2->add_option("--episodes-per-epoch", fig2_opts.episodes_per_epoch);
  fig2->add_option("--base-seed", fig2_opts.base_seed);

  auto* coverage = app.add_subcommand("coverage", "steps to visit every rps(n) state");
  int cov_n = 10, cov_seeds = 200;
  bool joint = false;
  coverage->add_option("--n", cov_n)->check(CLI::Range(2, 1000));
  coverage->add_option("--seeds", cov_seeds)->check(CLI::PositiveNumber);
  coverage->add_flag("--joint-actions", joint, "episodes of rps(1) to see all nine joint actions");

  auto* ne = app.add_subcommand("ne-solve", "exact equilibrium by value iteration, JSON report");
  EnvOptions ne_env;
  ne_env.add(ne);

  auto* expl = app.add_subcommand("exploitability", "exact exploitability of a policy file");
  EnvOptions expl_env;
  std::string policy_path;
  expl_env.add(expl);
  expl->add_option("--policy", policy_path, "JSON policy file")->required();

  auto* matrix = app.add_subcommand("solve-matrix", "solve a zero-sum matrix game");
  std::string matrix_path = "-";
  matrix->add_option("file", matrix_path, "whitespace-delimited matrix, '-' for stdin");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train) {
      const sacl::RunConfig cfg = sacl::load_run_config(config_path);
      const sacl::RunResult result = sacl::run_experiment_full(cfg);
      if (train_out.empty()) {
        sacl::write_record_csv(std::cout, result.record);
      } else {
        std::ofstream out(train_out);
        sacl::write_record_csv(out, result.record);
      }
      if (!policy_out.empty()) {
        const sacl::GameSpec game = cfg.env.build();
        sacl::MinimaxQLearner learner(game, cfg.learner, result.final_q.front());
        sacl::Policy greedy{Eigen::MatrixXd(game.state_count, game.actions1),
                            Eigen::MatrixXd(game.state_count, game.actions2)};
        for (int s = 0; s < game.state_count; ++s) {
          greedy.player1.row(s) = learner.stage(1, s).row_strategy.transpose();
          greedy.player2.row(s) = learner.stage(2, s).row_strategy.transpose();
        }
        std::ofstream(policy_out) << policy_json(greedy).dump(2) << '\n';
      }
    } else if (*fig2) {
      const auto rows = sacl::replicate_fig2(n_max, fig2_seeds, fig2_opts);
      if (fig2_out.empty()) {
        sacl::write_fig2_csv(std::cout, rows);
      } else {
        std::ofstream out(fig2_out);
        sacl::write_fig2_csv(out, rows);
      }
      for (const auto& r : rows) {
        if (r.censored > 0) {
          std::cerr << "warning: n=" << r.n << " " << sacl::to_string(r.method) << ": " << r.censored
                    << " seed(s) hit the sample budget and are excluded from the mean\n";
        }
      }
    } else if (*coverage) {
      const auto res = joint ? sacl::joint_action_coverage(cov_seeds)
                             : sacl::coverage_experiment(cov_n, cov_seeds);
      json out = {{"mean", res.mean}, {"stderr", res.stderr_mean}, {"seeds", res.per_seed.size()}};
      if (joint) out["quantity"] = "episodes_to_cover_joint_actions";
      else {
        out["quantity"] = "steps_to_cover_states";
        out["n"] = cov_n;
      }
      std::cout << out.dump(2) << '\n';
    } else if (*ne) {
      const sacl::GameSpec game = ne_env.build();
      const sacl::NESolution sol = sacl::solve_ne(game);
      json q1 = json::array();
      for (const auto& q : sol.q1) {
        json m = json::array();
        for (Eigen::Index i = 0; i < q.rows(); ++i) m.push_back(to_json(q.row(i).transpose()));
        q1.push_back(m);
      }
      const json out = {{"game", game.name},
                        {"initial_value", game.initial_dist.dot(sol.v1)},
                        {"v_star_1", to_json(sol.v1)},
                        {"v_star_2", to_json(sol.v2)},
                        {"q_star_1", q1},
                        {"policy", policy_json(sol.policy)},
                        {"residual", sol.residual},
                        {"converged", sol.converged},
                        {"sweeps", sol.sweeps}};
      std::cout << out.dump(2) << '\n';
    } else if (*expl) {
      const sacl::GameSpec game = expl_env.build();
      const sacl::Policy pi = read_policy(policy_path, game);
      const auto rep = sacl::exploitability(game, pi);
      const json out = {{"game", game.name},
                        {"br_value_1", rep.br_value_1},
                        {"br_value_2", rep.br_value_2},
                        {"total", rep.total},
                        {"br_policies", {{"player1", strategy_json(rep.br_policy_1)},
                                         {"player2", strategy_json(rep.br_policy_2)}}}};
      std::cout << out.dump(2) << '\n';
    } else if (*matrix) {
      Eigen::MatrixXd m;
      if (matrix_path == "-") {
        m = read_matrix(std::cin);
      } else {
        std::ifstream in(matrix_path);
        if (!in) throw std::runtime_error("cannot open " + matrix_path);
        m = read_matrix(in);
      }
      const auto sol = sacl::solve_zero_sum(m);
      const json out = {{"value", sol.value},
                        {"row_strategy", to_json(sol.row_strategy)},
                        {"col_strategy", to_json(sol.col_strategy)}};
      std::cout << out.dump(2) << '\n';
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
