#include "sacl/environments.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace sacl {

GameSpec make_rps(const RpsParams& params) {
  const int n = params.rounds;
  if (n < 1) throw std::invalid_argument("make_rps: rounds must be at least 1");

  GameSpec g;
  g.name = "rps(" + std::to_string(n) + ")";
  g.state_count = n;
  g.actions1 = 3;
  g.actions2 = 3;
  g.discount = 1.0;
  g.horizon = n;
  g.initial_dist = Eigen::VectorXd::Zero(n);
  g.initial_dist(0) = 1.0;
  g.features.resize(n, 1);
  g.transitions.resize(n);
  g.reward1.resize(n);
  for (State k = 0; k < n; ++k) {
    g.features(k, 0) = n == 1 ? 0.0 : static_cast<double>(k) / (n - 1);
    g.reward1[k] = Eigen::MatrixXd::Zero(3, 3);
    auto& rows = g.transitions[k];
    rows.resize(9);
    for (int a1 = 0; a1 < 3; ++a1) {
      for (int a2 = 0; a2 < 3; ++a2) {
        const bool win = rps_beats(a1, a2);
        const bool last = k == n - 1;
        rows[g.joint_index({a1, a2})] = {{win && !last ? k + 1 : kTerminal, 1.0}};
        if (win && last) g.reward1[k](a1, a2) = 1.0;
      }
    }
  }
  return g;
}

GridPursuitLayout::GridPursuitLayout(const GridPursuitParams& params) : params_(params) {
  if (params.width < 2 || params.height < 2) {
    throw std::invalid_argument("grid_pursuit: width and height must be at least 2");
  }
  if (params.horizon < 1) throw std::invalid_argument("grid_pursuit: horizon must be at least 1");
  if (!std::isfinite(params.capture_reward)) {
    throw std::invalid_argument("grid_pursuit: capture_reward must be finite");
  }
  cells_ = params.width * params.height;
  const long long count = static_cast<long long>(cells_) * (cells_ - 1) * params.horizon;
  if (count > kMaxGridStates) {
    throw std::invalid_argument("grid_pursuit: " + std::to_string(count) +
                                " states exceeds the tabular limit of " +
                                std::to_string(kMaxGridStates));
  }
  state_count_ = static_cast<int>(count);
}

State GridPursuitLayout::index(const PursuitState& st) const {
  const int pred = st.predator.y * params_.width + st.predator.x;
  const int prey = st.prey.y * params_.width + st.prey.x;
  if (pred == prey) throw std::invalid_argument("grid_pursuit: collocated agents are not a state");
  const int pair = pred * (cells_ - 1) + (prey < pred ? prey : prey - 1);
  return st.t * cells_ * (cells_ - 1) + pair;
}

PursuitState GridPursuitLayout::decode(State s) const {
  const int per_step = cells_ * (cells_ - 1);
  const int t = s / per_step;
  const int pair = s % per_step;
  const int pred = pair / (cells_ - 1);
  int prey = pair % (cells_ - 1);
  if (prey >= pred) ++prey;
  return {{pred % params_.width, pred / params_.width},
          {prey % params_.width, prey / params_.width},
          t};
}

Cell GridPursuitLayout::move(Cell c, int move) const {
  switch (static_cast<Move>(move)) {
    case Move::kStay: break;
    case Move::kUp: c.y = std::max(0, c.y - 1); break;
    case Move::kDown: c.y = std::min(params_.height - 1, c.y + 1); break;
    case Move::kLeft: c.x = std::max(0, c.x - 1); break;
    case Move::kRight: c.x = std::min(params_.width - 1, c.x + 1); break;
  }
  return c;
}

GameSpec make_grid_pursuit(const GridPursuitParams& params) {
  const GridPursuitLayout layout(params);
  const int S = layout.state_count();
  const int H = params.horizon;
  const int per_step = S / H;

  GameSpec g;
  g.name = "grid_pursuit(" + std::to_string(params.width) + "x" +
           std::to_string(params.height) + ",H=" + std::to_string(H) + ")";
  g.state_count = S;
  g.actions1 = kMoveCount;
  g.actions2 = kMoveCount;
  g.discount = 1.0;
  g.horizon = H;
  g.initial_dist = Eigen::VectorXd::Zero(S);
  g.initial_dist.head(per_step).setConstant(1.0 / per_step);
  g.features.resize(S, 5);
  g.transitions.resize(S);
  g.reward1.resize(S);

  const double wx = params.width - 1;
  const double wy = params.height - 1;
  for (State s = 0; s < S; ++s) {
    const PursuitState st = layout.decode(s);
    g.features.row(s) << st.predator.x / wx, st.predator.y / wy, st.prey.x / wx,
        st.prey.y / wy, H == 1 ? 0.0 : static_cast<double>(st.t) / (H - 1);
    g.reward1[s] = Eigen::MatrixXd::Zero(kMoveCount, kMoveCount);
    auto& rows = g.transitions[s];
    rows.resize(kMoveCount * kMoveCount);
    for (int a1 = 0; a1 < kMoveCount; ++a1) {
      for (int a2 = 0; a2 < kMoveCount; ++a2) {
        const Cell pred = layout.move(st.predator, a1);
        const Cell prey = layout.move(st.prey, a2);
        const bool swapped = pred == st.prey && prey == st.predator;
        State next = kTerminal;
        if (pred == prey || swapped) {
          g.reward1[s](a1, a2) = params.capture_reward;
        } else if (st.t + 1 < H) {
          next = layout.index({pred, prey, st.t + 1});
        }
        rows[g.joint_index({a1, a2})] = {{next, 1.0}};
      }
    }
  }
  return g;
}

}  // namespace sacl
