#pragma once

#include <span>
#include <stdexcept>

#include <Eigen/Core>

#include "sacl/game.hpp"

namespace sacl {

/// Per-player state values, each in that player's own payoff.
struct ValueTable {
  Eigen::VectorXd v1;
  Eigen::VectorXd v2;

  static ValueTable zeros(int states) {
    return {Eigen::VectorXd::Zero(states), Eigen::VectorXd::Zero(states)};
  }
  const Eigen::VectorXd& of(int player) const { return player == 1 ? v1 : v2; }
};

/// Signed value estimates stacked as rows: member 2m is learner m's V1 and
/// member 2m+1 is learner m's -V2, so every row estimates player 1's value.
/// `previous` holds the checkpoint taken before the latest training step.
struct ValueEnsemble {
  Eigen::MatrixXd current;
  Eigen::MatrixXd previous;

  int members() const { return static_cast<int>(current.rows()); }

  static Eigen::MatrixXd signed_rows(std::span<const ValueTable> tables) {
    if (tables.empty()) throw std::invalid_argument("ValueEnsemble: no value tables");
    const auto states = tables.front().v1.size();
    Eigen::MatrixXd rows(2 * static_cast<Eigen::Index>(tables.size()), states);
    for (std::size_t m = 0; m < tables.size(); ++m) {
      if (tables[m].v1.size() != states || tables[m].v2.size() != states) {
        throw std::invalid_argument("ValueEnsemble: value tables differ in size");
      }
      rows.row(2 * m) = tables[m].v1.transpose();
      rows.row(2 * m + 1) = -tables[m].v2.transpose();
    }
    return rows;
  }

  static ValueEnsemble from_tables(std::span<const ValueTable> current,
                                   std::span<const ValueTable> previous) {
    ValueEnsemble e{signed_rows(current), signed_rows(previous)};
    if (e.current.rows() != e.previous.rows() || e.current.cols() != e.previous.cols()) {
      throw std::invalid_argument("ValueEnsemble: checkpoint shape mismatch");
    }
    return e;
  }
};

}  // namespace sacl
