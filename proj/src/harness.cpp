#include "sacl/harness.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

#include "sacl/evaluation.hpp"

namespace sacl {

namespace {

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

// Greedy (epsilon = 0) maximin policy of the learner's current Q-values.
Policy greedy_policy(const MinimaxQLearner& learner) {
  const GameSpec& game = learner.game();
  Policy pi{Eigen::MatrixXd(game.state_count, game.actions1),
            Eigen::MatrixXd(game.state_count, game.actions2)};
  for (State s = 0; s < game.state_count; ++s) {
    pi.player1.row(s) = learner.stage(1, s).row_strategy.transpose();
    pi.player2.row(s) = learner.stage(2, s).row_strategy.transpose();
  }
  return pi;
}

struct SeedRun {
  std::vector<RecordRow> rows;
  QTable final_q;
};

SeedRun run_seed(const RunConfig& cfg, const GameSpec& game, const NESolution& oracle,
                 const std::vector<State>& schedule, std::uint64_t seed) {
  using Clock = std::chrono::steady_clock;
  const auto t0 = Clock::now();
  CurriculumState state = CurriculumState::create(game, cfg.learner, cfg.curriculum, seed);
  Rng rng(mix_seed(seed, 1));

  SeedRun out;
  long long samples = 0;
  std::size_t next_stage = 0;
  auto record = [&] {
    RecordRow row;
    row.seed = seed;
    row.method = cfg.method;
    row.env = game.name;
    row.samples_consumed = samples;
    row.q_error = q_error(state.primary().q(), oracle);
    row.exploitability =
        cfg.track_exploitability ? exploitability(game, greedy_policy(state.primary())).total : 0.0;
    row.buffer_size = state.buffer.size();
    row.wall_clock = std::chrono::duration<double>(Clock::now() - t0).count();
    out.rows.push_back(row);
    return row.q_error;
  };

  bool converged = record() < cfg.convergence_threshold;
  long long next_eval = cfg.eval_every;
  while (!(converged && cfg.stop_on_convergence) && samples < cfg.sample_budget) {
    EpochStats stats;
    switch (cfg.method) {
      case Method::kSacl:
        stats = curriculum_epoch(state, game, cfg.curriculum, rng);
        break;
      case Method::kSelfPlay:
        stats = self_play_epoch(state, game, cfg.curriculum, rng);
        break;
      case Method::kFullAccessOrder:
        // Move down the backward schedule once the current subgame's own
        // entries are learned; afterwards fall back to the initial distribution.
        while (next_stage < schedule.size() &&
               local_q_error(state.primary().q(), oracle, schedule[next_stage]) <
                   cfg.convergence_threshold) {
          ++next_stage;
        }
        stats = next_stage < schedule.size()
                    ? fixed_start_epoch(state, game, cfg.curriculum, schedule[next_stage], rng)
                    : self_play_epoch(state, game, cfg.curriculum, rng);
        break;
    }
    samples += stats.samples;
    if (samples >= next_eval || samples >= cfg.sample_budget) {
      converged = record() < cfg.convergence_threshold;
      next_eval = (samples / cfg.eval_every + 1) * cfg.eval_every;
    }
  }
  out.final_q = state.primary().q();
  return out;
}

double mean_of(const std::vector<double>& xs) {
  double acc = 0.0;
  for (double x : xs) acc += x;
  return xs.empty() ? 0.0 : acc / static_cast<double>(xs.size());
}

double stderr_of(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0.0;
  const double m = mean_of(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1) / static_cast<double>(xs.size()));
}

}  // namespace

ExperimentRecord ExperimentRecord::for_seed(std::uint64_t seed) const {
  ExperimentRecord out;
  for (const auto& r : rows) {
    if (r.seed == seed) out.rows.push_back(r);
  }
  return out;
}

RunResult run_experiment_full(const RunConfig& cfg) {
  validate(cfg);
  const GameSpec game = cfg.env.build();
  const NESolution oracle = solve_ne(game);
  std::vector<State> schedule;
  if (cfg.method == Method::kFullAccessOrder) schedule = backward_order(game)->order;

  RunResult result;
  for (std::uint64_t seed : cfg.seeds) {
    SeedRun run = run_seed(cfg, game, oracle, schedule, seed);
    result.record.rows.insert(result.record.rows.end(), run.rows.begin(), run.rows.end());
    result.final_q.push_back(std::move(run.final_q));
  }
  return result;
}

ExperimentRecord run_experiment(const RunConfig& cfg) { return run_experiment_full(cfg).record; }

std::optional<long long> samples_to_converge(const ExperimentRecord& record, double threshold) {
  if (record.rows.empty()) throw std::invalid_argument("samples_to_converge: empty record");
  for (const auto& r : record.rows) {
    if (r.q_error < threshold) return r.samples_consumed;
  }
  return std::nullopt;
}

void write_record_csv(std::ostream& out, const ExperimentRecord& record, bool include_wall_clock) {
  std::string header = kRecordCsvHeader;
  if (!include_wall_clock) header.resize(header.rfind(','));
  out << header << '\n';
  for (const auto& r : record.rows) {
    out << r.seed << ',' << to_string(r.method) << ',' << '"' << r.env << '"' << ','
        << r.samples_consumed << ',' << format_double(r.q_error) << ','
        << format_double(r.exploitability) << ',' << r.buffer_size;
    if (include_wall_clock) out << ',' << format_double(r.wall_clock);
    out << '\n';
  }
}

RunConfig fig2_config(int n, Method method, const Fig2Options& opts, int seeds) {
  RunConfig cfg;
  cfg.env.name = "rps";
  cfg.env.rps.rounds = n;
  cfg.method = method;
  // Deterministic transitions: a unit learning rate makes one visit exact
  // once the successor is learned. Exploration is uniform throughout.
  // Non-negative initial noise keeps V1 + V2 > 0 until every entry of a state
  // has been backed up, so unlearned states never carry zero weight.
  cfg.learner.lr = 1.0;
  cfg.learner.schedule = LrSchedule::kConstant;
  cfg.learner.epsilon = 1.0;
  cfg.learner.batch_size = 1;
  cfg.learner.init_scale = opts.init_scale;
  cfg.learner.init_kind = InitKind::kOptimistic;
  cfg.curriculum.metric.variant = MetricVariant::kFull;
  cfg.curriculum.metric.alpha_bias = 1.0;
  cfg.curriculum.sampler.p = 0.7;
  cfg.curriculum.capacity = 64;
  cfg.curriculum.episodes_per_epoch = opts.episodes_per_epoch;
  cfg.seeds.clear();
  for (int s = 0; s < seeds; ++s) cfg.seeds.push_back(opts.base_seed + static_cast<std::uint64_t>(s));
  cfg.sample_budget = method == Method::kSelfPlay ? opts.self_play_budget : opts.curriculum_budget;
  cfg.eval_every = opts.eval_every;
  cfg.convergence_threshold = opts.threshold;
  cfg.track_exploitability = false;
  return cfg;
}

std::vector<Fig2Row> replicate_fig2(int n_max, int seeds, const Fig2Options& opts) {
  if (n_max < 1 || n_max > 10) throw std::invalid_argument("replicate_fig2: n_max must lie in [1, 10]");
  if (seeds < 1) throw std::invalid_argument("replicate_fig2: seeds must be positive");
  std::vector<Fig2Row> rows;
  for (int n = 1; n <= n_max; ++n) {
    for (Method method : {Method::kSelfPlay, Method::kSacl, Method::kFullAccessOrder}) {
      const RunConfig cfg = fig2_config(n, method, opts, seeds);
      const ExperimentRecord record = run_experiment(cfg);
      Fig2Row row;
      row.n = n;
      row.method = method;
      std::vector<double> converged;
      for (std::uint64_t seed : cfg.seeds) {
        const auto hit = samples_to_converge(record.for_seed(seed), cfg.convergence_threshold);
        row.per_seed.push_back(hit);
        if (hit) converged.push_back(static_cast<double>(*hit));
        else ++row.censored;
      }
      row.seeds = static_cast<int>(converged.size());
      row.mean_samples = converged.empty() ? std::nan("") : mean_of(converged);
      row.stderr_samples = converged.empty() ? std::nan("") : stderr_of(converged);
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

void write_fig2_csv(std::ostream& out, const std::vector<Fig2Row>& rows) {
  out << kFig2CsvHeader << '\n';
  for (const auto& r : rows) {
    out << r.n << ',' << to_string(r.method) << ',' << format_double(r.mean_samples) << ','
        << format_double(r.stderr_samples) << ',' << r.seeds << ',' << r.censored << '\n';
  }
}

CoverageResult coverage_experiment(int n, int seeds, std::uint64_t base_seed) {
  if (n < 2) throw std::invalid_argument("coverage_experiment: n must be at least 2");
  if (seeds < 1) throw std::invalid_argument("coverage_experiment: seeds must be positive");
  const GameSpec game = make_rps({n});
  const Policy uniform = Policy::uniform(game);
  CoverageResult result;
  std::vector<double> counts;
  for (int k = 0; k < seeds; ++k) {
    Rng rng(mix_seed(base_seed + static_cast<std::uint64_t>(k), 7));
    // The buffer starts empty, so the first reset comes from the initial
    // distribution; afterwards every reset goes to the newest visited state.
    WeightedStateBuffer buffer;
    State newest = sample_initial(game, rng);
    std::vector<bool> visited(n, false);
    visited[newest] = true;
    int remaining = n - 1;
    long long steps = 0;
    while (remaining > 0) {
      for (const auto& t : rollout(game, uniform, newest, rng, n)) {
        ++steps;
        if (t.terminal || visited[t.next_state]) continue;
        visited[t.next_state] = true;
        --remaining;
        const std::pair<State, double> fresh{t.next_state, 1.0};
        buffer = buffer_insert(std::move(buffer), {&fresh, 1}, game);
        newest = buffer.entries.back().state;
        if (remaining == 0) break;
      }
    }
    result.per_seed.push_back(steps);
    counts.push_back(static_cast<double>(steps));
  }
  result.mean = mean_of(counts);
  result.stderr_mean = stderr_of(counts);
  return result;
}

CoverageResult joint_action_coverage(int seeds, std::uint64_t base_seed) {
  if (seeds < 1) throw std::invalid_argument("joint_action_coverage: seeds must be positive");
  const GameSpec game = make_rps({1});
  const Policy uniform = Policy::uniform(game);
  CoverageResult result;
  std::vector<double> counts;
  for (int k = 0; k < seeds; ++k) {
    Rng rng(mix_seed(base_seed + static_cast<std::uint64_t>(k), 11));
    std::vector<bool> seen(game.joint_count(), false);
    int remaining = game.joint_count();
    long long episodes = 0;
    while (remaining > 0) {
      ++episodes;
      for (const auto& t : rollout(game, uniform, sample_initial(game, rng), rng, 1)) {
        const int j = game.joint_index(t.action);
        if (!seen[j]) {
          seen[j] = true;
          --remaining;
        }
      }
    }
    result.per_seed.push_back(episodes);
    counts.push_back(static_cast<double>(episodes));
  }
  result.mean = mean_of(counts);
  result.stderr_mean = stderr_of(counts);
  return result;
}

}  // namespace sacl
