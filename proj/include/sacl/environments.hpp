#pragma once

#include "sacl/game.hpp"

namespace sacl {

/// Iterated rock-paper-scissors: up to `rounds` rounds; player 1 must win
/// every round to collect reward 1, any draw or loss ends the game with 0.
struct RpsParams {
  int rounds = 1;
};

/// Actions are 0 = rock, 1 = paper, 2 = scissors.
inline constexpr int kRock = 0;
inline constexpr int kPaper = 1;
inline constexpr int kScissors = 2;

/// True when `a1` beats `a2`.
inline bool rps_beats(int a1, int a2) { return (a1 - a2 + 3) % 3 == 1; }

GameSpec make_rps(const RpsParams& params);

/// Simultaneous-move pursuit on a width x height grid. Player 1 is the
/// predator and is paid `capture_reward` on capture; the episode ends
/// uncaptured after `horizon` joint moves.
struct GridPursuitParams {
  int width = 3;
  int height = 3;
  int horizon = 4;
  double capture_reward = 1.0;
};

enum class Move : int { kStay = 0, kUp = 1, kDown = 2, kLeft = 3, kRight = 4 };
inline constexpr int kMoveCount = 5;

struct Cell {
  int x = 0;
  int y = 0;
  friend bool operator==(const Cell&, const Cell&) = default;
};

struct PursuitState {
  Cell predator;
  Cell prey;
  int t = 0;
};

/// Maps between state indices and grid configurations. Indices enumerate
/// (t, predator, prey) lexicographically, skipping collocated pairs, which
/// are captures and never persist as states.
class GridPursuitLayout {
 public:
  explicit GridPursuitLayout(const GridPursuitParams& params);

  int state_count() const { return state_count_; }
  State index(const PursuitState& st) const;
  PursuitState decode(State s) const;
  Cell move(Cell c, int move) const;
  const GridPursuitParams& params() const { return params_; }

 private:
  GridPursuitParams params_;
  int cells_ = 0;
  int state_count_ = 0;
};

inline constexpr int kMaxGridStates = 100000;

GameSpec make_grid_pursuit(const GridPursuitParams& params);

}  // namespace sacl
