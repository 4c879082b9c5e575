#pragma once

// Reference computations used only by the tests. Nothing here calls into the
// library's solvers: matrix games are solved by enumerating square supports,
// and tree values come from direct recursion over game rules.

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <stdexcept>
#include <tuple>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

struct MatrixValue {
  double value = 0.0;
  Eigen::VectorXd row;
  Eigen::VectorXd col;
};

namespace detail {

inline std::vector<std::vector<int>> subsets_of_size(int n, int k) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur;
  std::function<void(int)> rec = [&](int start) {
    if (static_cast<int>(cur.size()) == k) {
      out.push_back(cur);
      return;
    }
    for (int i = start; i < n; ++i) {
      cur.push_back(i);
      rec(i + 1);
      cur.pop_back();
    }
  };
  rec(0);
  return out;
}

// Solves [M' -1; 1' 0] [x; v] = [0; 1] for the indifference system of the
// player whose strategy is x. Returns false when singular.
inline bool indifference(const Eigen::MatrixXd& m, Eigen::VectorXd& x, double& v) {
  const Eigen::Index k = m.rows();
  Eigen::MatrixXd sys = Eigen::MatrixXd::Zero(k + 1, k + 1);
  sys.topLeftCorner(k, k) = m.transpose();
  sys.topRightCorner(k, 1).setConstant(-1.0);
  sys.bottomLeftCorner(1, k).setOnes();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(k + 1);
  rhs(k) = 1.0;
  const Eigen::FullPivLU<Eigen::MatrixXd> lu(sys);
  if (!lu.isInvertible()) return false;
  const Eigen::VectorXd sol = lu.solve(rhs);
  x = sol.head(k);
  v = sol(k);
  return true;
}

}  // namespace detail

/// Value of max_x min_y x'Ay by enumerating every square k x k sub-matrix:
/// every matrix game has an extreme equilibrium whose supports index a
/// nonsingular square kernel with both players indifferent on it.
inline MatrixValue solve_by_supports(const Eigen::MatrixXd& a, double eps = 1e-9) {
  const int m = static_cast<int>(a.rows());
  const int n = static_cast<int>(a.cols());
  for (int k = 1; k <= std::min(m, n); ++k) {
    for (const auto& rows : detail::subsets_of_size(m, k)) {
      for (const auto& cols : detail::subsets_of_size(n, k)) {
        Eigen::MatrixXd sub(k, k);
        for (int i = 0; i < k; ++i) {
          for (int j = 0; j < k; ++j) sub(i, j) = a(rows[i], cols[j]);
        }
        Eigen::VectorXd xs, ys;
        double vx = 0.0, vy = 0.0;
        if (!detail::indifference(sub, xs, vx)) continue;
        if (!detail::indifference(sub.transpose(), ys, vy)) continue;
        if ((xs.array() < -eps).any() || (ys.array() < -eps).any()) continue;
        Eigen::VectorXd x = Eigen::VectorXd::Zero(m), y = Eigen::VectorXd::Zero(n);
        for (int i = 0; i < k; ++i) x(rows[i]) = std::max(0.0, xs(i));
        for (int j = 0; j < k; ++j) y(cols[j]) = std::max(0.0, ys(j));
        x /= x.sum();
        y /= y.sum();
        const double lo = (x.transpose() * a).minCoeff();
        const double hi = (a * y).maxCoeff();
        if (hi - lo <= eps * std::max(1.0, a.cwiseAbs().maxCoeff())) {
          return {0.5 * (lo + hi), x, y};
        }
      }
    }
  }
  throw std::logic_error("solve_by_supports: no equilibrium kernel found");
}

/// V*(s_k) of rps(n) by recursion over rounds: a win advances, anything
/// else ends the game with nothing.
inline double rps_value(int n, int k) {
  const double win = k == n - 1 ? 1.0 : rps_value(n, k + 1);
  Eigen::MatrixXd stage = Eigen::MatrixXd::Zero(3, 3);
  // Rows are player 1's rock/paper/scissors; paper beats rock.
  stage(1, 0) = win;
  stage(2, 1) = win;
  stage(0, 2) = win;
  return solve_by_supports(stage).value;
}

/// Game-tree minimax for grid pursuit from explicit coordinates.
class PursuitTree {
 public:
  PursuitTree(int width, int height, int horizon, double capture)
      : w_(width), h_(height), horizon_(horizon), capture_(capture) {}

  double value(int px, int py, int qx, int qy, int t) {
    const auto key = std::make_tuple(px, py, qx, qy, t);
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    static constexpr int dx[5] = {0, 1, -1, 0, 0};
    static constexpr int dy[5] = {0, 0, 0, 1, -1};
    Eigen::MatrixXd stage(5, 5);
    for (int i = 0; i < 5; ++i) {
      for (int j = 0; j < 5; ++j) {
        const int npx = std::clamp(px + dx[i], 0, w_ - 1), npy = std::clamp(py + dy[i], 0, h_ - 1);
        const int nqx = std::clamp(qx + dx[j], 0, w_ - 1), nqy = std::clamp(qy + dy[j], 0, h_ - 1);
        const bool meet = npx == nqx && npy == nqy;
        const bool swap = npx == qx && npy == qy && nqx == px && nqy == py;
        if (meet || swap) stage(i, j) = capture_;
        else if (t + 1 == horizon_) stage(i, j) = 0.0;
        else stage(i, j) = value(npx, npy, nqx, nqy, t + 1);
      }
    }
    const double v = solve_by_supports(stage).value;
    memo_.emplace(key, v);
    return v;
  }

 private:
  int w_, h_, horizon_;
  double capture_;
  std::map<std::tuple<int, int, int, int, int>, double> memo_;
};

}  // namespace oracle
