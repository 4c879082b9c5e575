#include "sacl/curriculum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <unordered_map>

namespace sacl {

MetricVariant parse_metric_variant(std::string_view name) {
  if (name == "full") return MetricVariant::kFull;
  if (name == "uniform") return MetricVariant::kUniform;
  if (name == "bias_only") return MetricVariant::kBiasOnly;
  if (name == "variance_only") return MetricVariant::kVarianceOnly;
  if (name == "td_error") return MetricVariant::kTdError;
  throw std::invalid_argument("unknown metric variant '" + std::string(name) + "'");
}

std::string_view to_string(MetricVariant v) {
  switch (v) {
    case MetricVariant::kFull: return "full";
    case MetricVariant::kUniform: return "uniform";
    case MetricVariant::kBiasOnly: return "bias_only";
    case MetricVariant::kVarianceOnly: return "variance_only";
    case MetricVariant::kTdError: return "td_error";
  }
  return "full";
}

void MetricConfig::validate() const {
  if (!(alpha_bias >= 0.0) || !std::isfinite(alpha_bias)) {
    throw std::invalid_argument("metric: alpha_bias must be finite and non-negative");
  }
  if (ensemble_size < 1) throw std::invalid_argument("metric: ensemble_size must be at least 1");
}

double compute_weight(State s, const ValueEnsemble& ens, const MetricConfig& cfg,
                      const std::optional<TdContext>& td) {
  if (s < 0 || s >= ens.current.cols() || ens.current.rows() == 0) {
    throw std::invalid_argument("compute_weight: state not covered by the ensemble");
  }
  const Eigen::VectorXd cur = ens.current.col(s);

  auto bias = [&] {
    const Eigen::VectorXd diff = cur - ens.previous.col(s);
    const double b = cfg.bias_parse == BiasParse::kSquareOfMean ? std::pow(diff.mean(), 2)
                                                                : diff.array().square().mean();
    return cfg.alpha_bias * b;
  };
  auto variance = [&] { return (cur.array() - cur.mean()).square().mean(); };

  switch (cfg.variant) {
    case MetricVariant::kUniform: return 1.0;
    case MetricVariant::kFull: return bias() + variance();
    case MetricVariant::kBiasOnly: return bias();
    case MetricVariant::kVarianceOnly: return variance();
    case MetricVariant::kTdError: {
      if (!td) throw std::invalid_argument("compute_weight: td_error needs a transition");
      // Even rows are the replicas' own V1.
      auto v1_mean = [&](State x) {
        double acc = 0.0;
        for (Eigen::Index m = 0; m < ens.current.rows(); m += 2) acc += ens.current(m, x);
        return acc / static_cast<double>((ens.current.rows() + 1) / 2);
      };
      const double next = td->next_state == kTerminal ? 0.0 : v1_mean(td->next_state);
      return std::abs(td->reward1 + td->discount * next - v1_mean(s));
    }
  }
  return 0.0;
}

double WeightedStateBuffer::total_weight() const {
  double total = 0.0;
  for (const auto& e : entries) total += e.weight;
  return total;
}

WeightedStateBuffer buffer_insert(WeightedStateBuffer buf,
                                  std::span<const std::pair<State, double>> states,
                                  const GameSpec& game) {
  std::unordered_map<State, std::size_t> where;
  for (std::size_t i = 0; i < buf.entries.size(); ++i) where.emplace(buf.entries[i].state, i);
  for (const auto& [s, w] : states) {
    if (!game.valid_state(s)) throw std::invalid_argument("buffer_insert: invalid state");
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw std::invalid_argument("buffer_insert: weights must be finite and non-negative");
    }
    if (auto it = where.find(s); it != where.end()) {
      buf.entries[it->second].weight = w;
      continue;
    }
    where.emplace(s, buf.entries.size());
    buf.entries.push_back({s, game.features.row(s).transpose(), w});
  }
  return buf;
}

WeightedStateBuffer fps_prune(WeightedStateBuffer buf, int k, Rng& /*rng*/) {
  if (k < 1) throw std::invalid_argument("fps_prune: k must be at least 1");
  const int n = buf.size();
  if (n <= k) return buf;
  for (const auto& e : buf.entries) {
    if ((e.features.array() < 0.0).any() || (e.features.array() > 1.0).any()) {
      throw std::invalid_argument("fps_prune: features must be normalized to [0, 1]");
    }
  }
  // a is preferred over b on equal keys when it has the lower state index.
  auto better = [&](int a, double ka, int b, double kb) {
    return ka > kb || (ka == kb && buf.entries[a].state < buf.entries[b].state);
  };

  std::vector<bool> taken(n, false);
  std::vector<double> dist(n, std::numeric_limits<double>::infinity());
  std::vector<int> chosen;
  chosen.reserve(k);

  int seed = 0;
  for (int i = 1; i < n; ++i) {
    if (better(i, buf.entries[i].weight, seed, buf.entries[seed].weight)) seed = i;
  }
  int next = seed;
  while (static_cast<int>(chosen.size()) < k) {
    chosen.push_back(next);
    taken[next] = true;
    const auto& f = buf.entries[next].features;
    int best = -1;
    for (int i = 0; i < n; ++i) {
      if (taken[i]) continue;
      dist[i] = std::min(dist[i], (buf.entries[i].features - f).norm());
      if (best < 0 || better(i, dist[i], best, dist[best])) best = i;
    }
    next = best;
  }

  WeightedStateBuffer out;
  out.capacity = buf.capacity;
  out.entries.reserve(k);
  for (int i : chosen) out.entries.push_back(std::move(buf.entries[i]));
  return out;
}

WeightedStateBuffer random_prune(WeightedStateBuffer buf, int k, Rng& rng) {
  if (k < 1) throw std::invalid_argument("random_prune: k must be at least 1");
  const int n = buf.size();
  if (n <= k) return buf;
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  // Partial Fisher-Yates.
  for (int i = 0; i < k; ++i) std::swap(idx[i], idx[i + rng.uniform_int(n - i)]);
  WeightedStateBuffer out;
  out.capacity = buf.capacity;
  for (int i = 0; i < k; ++i) out.entries.push_back(std::move(buf.entries[idx[i]]));
  return out;
}

SubgameDraw sample_subgame(const WeightedStateBuffer& buf, const GameSpec& game,
                           const SamplerConfig& cfg, Rng& rng) {
  if (cfg.p > 0.0 && buf.total_weight() > 0.0 && rng.bernoulli(cfg.p)) {
    Eigen::VectorXd w(buf.size());
    for (int i = 0; i < buf.size(); ++i) w(i) = buf.entries[i].weight;
    return {buf.entries[rng.categorical(w)].state, true};
  }
  return {sample_initial(game, rng), false};
}

void CurriculumConfig::validate() const {
  metric.validate();
  if (!(sampler.p >= 0.0 && sampler.p <= 1.0)) throw std::invalid_argument("sampler: p must lie in [0, 1]");
  if (capacity < 1) throw std::invalid_argument("curriculum: capacity_k must be at least 1");
  if (episodes_per_epoch < 1) throw std::invalid_argument("curriculum: episodes_per_epoch must be positive");
  if (max_episode_steps < 1) throw std::invalid_argument("curriculum: max_episode_steps must be positive");
}

CurriculumState CurriculumState::create(const GameSpec& game, const LearnerConfig& lcfg,
                                        const CurriculumConfig& ccfg, std::uint64_t seed) {
  ccfg.validate();
  CurriculumState st;
  for (int m = 0; m < ccfg.metric.ensemble_size; ++m) {
    Rng init(mix_seed(seed, 1000 + static_cast<std::uint64_t>(m)));
    st.learners.emplace_back(game, lcfg, init);
  }
  st.buffer.capacity = ccfg.capacity;
  return st;
}

std::vector<ValueTable> CurriculumState::values() const {
  std::vector<ValueTable> out;
  out.reserve(learners.size());
  for (const auto& l : learners) out.push_back(l.values());
  return out;
}

namespace {

// Rolls out episodes from `choose(rng)` starts, feeding samples to every
// replica in chunks of batch_size and refreshing the exploration policy
// after each chunk.
template <typename Choose>
EpochStats collect_and_train(CurriculumState& state, const GameSpec& game,
                             const CurriculumConfig& cfg, Rng& rng, Choose&& choose) {
  EpochStats stats;
  const int batch_size = state.primary().config().batch_size;
  Policy policy = state.primary().exploration_policy();
  std::vector<Transition> pending;
  auto train = [&] {
    if (pending.empty()) return;
    for (auto& learner : state.learners) learner.update(pending);
    pending.clear();
    policy = state.primary().exploration_policy();
  };
  for (int e = 0; e < cfg.episodes_per_epoch; ++e) {
    const SubgameDraw start = choose(rng);
    if (start.from_buffer) ++stats.episodes_from_buffer;
    auto traj = rollout(game, policy, start.state, rng, cfg.max_episode_steps);
    stats.samples += static_cast<long long>(traj.size());
    ++stats.episodes;
    for (const auto& t : traj) {
      pending.push_back(t);
      if (static_cast<int>(pending.size()) >= batch_size) train();
    }
    stats.trajectories.push_back(std::move(traj));
  }
  train();
  return stats;
}

}  // namespace

EpochStats curriculum_epoch(CurriculumState& state, const GameSpec& game,
                            const CurriculumConfig& cfg, Rng& rng) {
  const std::vector<ValueTable> previous = state.values();
  EpochStats stats = collect_and_train(state, game, cfg, rng, [&](Rng& r) {
    return sample_subgame(state.buffer, game, cfg.sampler, r);
  });

  const ValueEnsemble ens = ValueEnsemble::from_tables(state.values(), previous);
  std::vector<std::pair<State, double>> weighted;
  std::unordered_map<State, std::size_t> slot;
  for (const auto& traj : stats.trajectories) {
    for (const auto& t : traj) {
      const bool seen = slot.count(t.state) > 0;
      if (seen && cfg.metric.variant != MetricVariant::kTdError) continue;
      std::optional<TdContext> td;
      if (cfg.metric.variant == MetricVariant::kTdError) {
        td = TdContext{t.reward1, t.terminal ? kTerminal : t.next_state, game.discount};
      }
      const double w = compute_weight(t.state, ens, cfg.metric, td);
      if (seen) {
        weighted[slot[t.state]].second = w;
      } else {
        slot.emplace(t.state, weighted.size());
        weighted.emplace_back(t.state, w);
      }
    }
  }
  state.buffer = buffer_insert(std::move(state.buffer), weighted, game);
  if (state.buffer.size() > cfg.capacity) {
    state.buffer = cfg.prune == PruneMethod::kFps
                       ? fps_prune(std::move(state.buffer), cfg.capacity, rng)
                       : random_prune(std::move(state.buffer), cfg.capacity, rng);
  }
  stats.buffer_size = state.buffer.size();
  return stats;
}

EpochStats self_play_epoch(CurriculumState& state, const GameSpec& game,
                           const CurriculumConfig& cfg, Rng& rng) {
  EpochStats stats = collect_and_train(state, game, cfg, rng, [&](Rng& r) {
    return SubgameDraw{sample_initial(game, r), false};
  });
  stats.buffer_size = state.buffer.size();
  return stats;
}

EpochStats fixed_start_epoch(CurriculumState& state, const GameSpec& game,
                             const CurriculumConfig& cfg, State start, Rng& rng) {
  if (!game.valid_state(start)) throw std::invalid_argument("fixed_start_epoch: invalid state");
  EpochStats stats = collect_and_train(state, game, cfg, rng,
                                       [&](Rng&) { return SubgameDraw{start, true}; });
  stats.buffer_size = state.buffer.size();
  return stats;
}

}  // namespace sacl
