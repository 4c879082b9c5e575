#pragma once

#include <cmath>
#include <stdexcept>
#include <type_traits>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <Eigen/LU>

namespace sacl {

/// Equilibrium of a two-player zero-sum matrix game from the row player's
/// point of view: `value` is the row player's maximin payoff.
template <typename Scalar>
struct MatrixSolution {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  Scalar value = Scalar(0);
  Vector row_strategy;
  Vector col_strategy;
  int pivots = 0;
};

enum class Side { kRow, kCol };

template <typename Scalar>
struct BestResponse {
  Scalar value;
  int action;
};

namespace detail {

template <typename Scalar>
constexpr Scalar pivot_tolerance() {
  return Scalar(1e-10);
}

// Tableau arithmetic runs in extended precision for double payoffs.
template <typename Scalar>
using WorkScalar = std::conditional_t<std::is_same_v<Scalar, double>, long double, Scalar>;

template <typename Scalar>
void normalize_strategy(Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& p) {
  p = p.cwiseMax(Scalar(0));
  const Scalar total = p.sum();
  if (total > Scalar(0)) p /= total;
}

}  // namespace detail

/// Solves max_x min_y x' A y for the payoff matrix A (row player maximizes).
///
/// The payoffs are shifted to B = A - min(A) + 1 so every entry is at least
/// one, then the column player's LP
///
///     maximize 1'y  subject to  B y <= 1,  y >= 0
///
/// is solved with a dense tableau simplex. The slack basis is feasible, so no
/// phase one is needed. If z is the optimum, the game value of B is 1/z, the
/// column strategy is y/z and the row strategy is the slack duals divided by z.
///
/// The entering column has the most negative reduced cost; among rows with
/// exactly equal ratios the largest pivot element leaves, which keeps tiny
/// pivots out of degenerate vertices. After a run of degenerate pivots the
/// solver switches permanently to Bland's rule (lowest index), which cannot
/// cycle. At optimality the tableau is rebuilt from the original constraints
/// and the final basis, and pivoting resumes if round-off hid an improving
/// column. The shift depends only on max-min differences, so adding a
/// constant to A reproduces the same pivot path.
template <typename Derived>
MatrixSolution<typename Derived::Scalar> solve_zero_sum(const Eigen::MatrixBase<Derived>& payoff) {
  using Out = typename Derived::Scalar;
  using Scalar = detail::WorkScalar<Out>;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  const Eigen::Index m = payoff.rows();
  const Eigen::Index n = payoff.cols();
  if (m < 1 || n < 1) throw std::invalid_argument("solve_zero_sum: empty payoff matrix");
  if (!payoff.allFinite()) throw std::invalid_argument("solve_zero_sum: non-finite payoff entry");

  const Scalar shift = Scalar(1) - Scalar(payoff.minCoeff());
  const Scalar tol = detail::pivot_tolerance<Scalar>();

  // Rows 0..m-1 are constraints, row m is the objective (minimize -1'y).
  // Columns 0..n-1 are y, n..n+m-1 slacks, n+m the right-hand side.
  Matrix tableau = Matrix::Zero(m + 1, n + m + 1);
  tableau.topLeftCorner(m, n) = payoff.template cast<Scalar>().array() + shift;
  tableau.block(0, n, m, m).setIdentity();
  tableau.col(n + m).head(m).setOnes();
  tableau.row(m).head(n).setConstant(Scalar(-1));

  const Matrix initial = tableau;

  std::vector<Eigen::Index> basis(static_cast<std::size_t>(m));
  for (Eigen::Index i = 0; i < m; ++i) basis[i] = n + i;

  MatrixSolution<Out> out;
  const Eigen::Index rhs = n + m;
  const int degenerate_limit = static_cast<int>(2 * (m + n));
  int degenerate_run = 0;
  bool bland = false;

  // Pivots until no column improves; returns the number of pivots made.
  auto optimize = [&] {
    int made = 0;
    for (;;) {
      Eigen::Index entering = -1;
      for (Eigen::Index j = 0; j < n + m; ++j) {
        if (!(tableau(m, j) < -tol)) continue;
        if (entering < 0 || (!bland && tableau(m, j) < tableau(m, entering))) entering = j;
        if (bland) break;
      }
      if (entering < 0) return made;

      Eigen::Index leaving = -1;
      Scalar best_ratio = Scalar(0);
      for (Eigen::Index i = 0; i < m; ++i) {
        const Scalar a = tableau(i, entering);
        if (a <= tol) continue;
        const Scalar ratio = std::max(tableau(i, rhs), Scalar(0)) / a;
        if (leaving < 0 || ratio < best_ratio) {
          leaving = i;
          best_ratio = ratio;
        } else if (ratio == best_ratio) {
          const bool prefer = bland ? basis[i] < basis[leaving] : a > tableau(leaving, entering);
          if (prefer) leaving = i;
        }
      }
      // The feasible region is bounded (B > 0), so a pivot row always exists.
      if (leaving < 0) throw std::logic_error("solve_zero_sum: unbounded LP");
      if (tableau(leaving, rhs) <= tol) {
        if (++degenerate_run > degenerate_limit) bland = true;
      } else {
        degenerate_run = 0;
      }

      tableau.row(leaving) /= tableau(leaving, entering);
      for (Eigen::Index i = 0; i <= m; ++i) {
        if (i == leaving) continue;
        const Scalar factor = tableau(i, entering);
        if (factor != Scalar(0)) tableau.row(i) -= factor * tableau.row(leaving);
      }
      basis[leaving] = entering;
      ++made;
    }
  };

  auto reinvert = [&] {
    Matrix basic(m, m);
    Vector cost(m);
    for (Eigen::Index i = 0; i < m; ++i) {
      basic.col(i) = initial.col(basis[i]).head(m);
      cost(i) = initial(m, basis[i]);
    }
    const Eigen::FullPivLU<Matrix> lu(basic);
    if (!lu.isInvertible()) return false;
    tableau.topRows(m) = lu.solve(initial.topRows(m));
    tableau.row(m) = initial.row(m) - cost.transpose() * tableau.topRows(m);
    for (Eigen::Index i = 0; i < m; ++i) tableau.col(basis[i]).setUnit(i);
    return true;
  };

  out.pivots = optimize();
  for (int round = 0; round < 4 && out.pivots > 0 && reinvert(); ++round) {
    const int more = optimize();
    if (more == 0) break;
    out.pivots += more;
  }

  Vector y = Vector::Zero(n);
  for (Eigen::Index i = 0; i < m; ++i) {
    if (basis[i] < n) y(basis[i]) = tableau(i, rhs);
  }
  Vector x = tableau.row(m).segment(n, m).transpose();
  const Scalar z = tableau(m, rhs);

  out.value = static_cast<Out>(Scalar(1) / z - shift);
  out.col_strategy = y.template cast<Out>();
  out.row_strategy = x.template cast<Out>();
  detail::normalize_strategy(out.col_strategy);
  detail::normalize_strategy(out.row_strategy);
  return out;
}

/// Best pure reply to a fixed opponent mixture. For Side::kRow the opponent
/// is the column player and the reply maximizes A y; for Side::kCol the reply
/// maximizes the column player's payoff -x'A. Ties go to the lowest index.
template <typename Derived, typename VecDerived>
BestResponse<typename Derived::Scalar> best_response_value(
    const Eigen::MatrixBase<Derived>& payoff, const Eigen::MatrixBase<VecDerived>& opponent,
    Side side) {
  using Scalar = typename Derived::Scalar;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  Vector payoffs;
  if (side == Side::kRow) {
    if (opponent.size() != payoff.cols()) {
      throw std::invalid_argument("best_response_value: opponent has wrong dimension");
    }
    payoffs = payoff * opponent.derived().template cast<Scalar>();
  } else {
    if (opponent.size() != payoff.rows()) {
      throw std::invalid_argument("best_response_value: opponent has wrong dimension");
    }
    payoffs = -(payoff.transpose() * opponent.derived().template cast<Scalar>());
  }
  const Scalar best = payoffs.maxCoeff();
  const Scalar slack = Scalar(1e-12) * std::max(Scalar(1), std::abs(best));
  for (Eigen::Index i = 0; i < payoffs.size(); ++i) {
    if (payoffs(i) >= best - slack) return {best, static_cast<int>(i)};
  }
  return {best, 0};
}

}  // namespace sacl
