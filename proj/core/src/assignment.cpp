#include "covalign/assignment.hpp"

#include <cmath>
#include <deque>
#include <limits>
#include <vector>

#include "covalign/error.hpp"

namespace covalign {

namespace {

struct DualSolution {
  std::vector<int> row_to_col;
  std::vector<double> u;  // row potentials
  std::vector<double> v;  // column potentials
};

// Min-cost assignment by successive shortest augmenting paths. Potentials
// satisfy cost(i,j) − u[i] − v[j] ≥ 0 with equality on matched pairs.
DualSolution hungarian_min(const Matrix& cost) {
  const int n = static_cast<int>(cost.rows());
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<int> owner(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);

  for (int i = 1; i <= n; ++i) {
    owner[0] = i;
    int j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const int i0 = owner[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[owner[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (owner[j0] != 0);
    do {
      const int j1 = way[j0];
      owner[j0] = owner[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  DualSolution out;
  out.row_to_col.assign(n, -1);
  out.u.assign(u.begin() + 1, u.end());
  out.v.assign(v.begin() + 1, v.end());
  for (int j = 1; j <= n; ++j) out.row_to_col[owner[j] - 1] = j - 1;
  return out;
}

// Rewrites an optimal matching into the lexicographically smallest perfect
// matching of the equality subgraph. Row i is fixed to the smallest tight
// column reachable by an alternating cycle through unfixed rows.
void canonicalize(const Matrix& cost, const DualSolution& duals, double tol,
                  std::vector<int>& row_to_col) {
  const int n = static_cast<int>(row_to_col.size());
  std::vector<int> col_to_row(n);
  for (int i = 0; i < n; ++i) col_to_row[row_to_col[i]] = i;

  auto tight = [&](int i, int j) { return cost(i, j) - duals.u[i] - duals.v[j] <= tol; };

  std::vector<char> col_fixed(n, 0);
  std::vector<int> parent_row(n);
  std::vector<char> visited(n);

  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (col_fixed[j] || !tight(i, j)) continue;
      if (row_to_col[i] == j) break;

      // Row i takes j, so j's owner must move. Search for an alternating path
      // of tight edges among unfixed rows that ends on the column i releases.
      const int freed = row_to_col[i];
      const int start = col_to_row[j];
      std::fill(visited.begin(), visited.end(), 0);
      std::deque<int> queue{start};
      visited[start] = 1;
      visited[i] = 1;
      parent_row[start] = -1;
      int end_row = -1;
      while (!queue.empty() && end_row < 0) {
        const int r = queue.front();
        queue.pop_front();
        for (int c = 0; c < n; ++c) {
          if (col_fixed[c] || c == j || !tight(r, c)) continue;
          if (c == freed) {
            end_row = r;
            break;
          }
          const int next = col_to_row[c];
          if (visited[next]) continue;
          visited[next] = 1;
          parent_row[next] = r;  // r takes next's column
          queue.push_back(next);
        }
      }
      if (end_row < 0) continue;

      int take = freed;
      for (int r = end_row; r >= 0; r = parent_row[r]) {
        const int released = row_to_col[r];
        row_to_col[r] = take;
        col_to_row[take] = r;
        take = released;
      }
      row_to_col[i] = j;
      col_to_row[j] = i;
      break;
    }
    col_fixed[row_to_col[i]] = 1;
  }
}

}  // namespace

AssignmentResult lap_max(const Matrix& scores) {
  if (scores.rows() != scores.cols() || scores.rows() == 0) {
    throw Error(ErrorKind::DimensionMismatch, "lap_max needs a non-empty square matrix");
  }
  if (!scores.allFinite()) {
    throw Error(ErrorKind::NonFinite, "lap_max scores contain non-finite entries");
  }
  const Matrix cost = -scores;
  DualSolution duals = hungarian_min(cost);
  const double tol = 1e-11 * (1.0 + scores.cwiseAbs().maxCoeff());
  std::vector<int> assignment = duals.row_to_col;
  canonicalize(cost, duals, tol, assignment);

  double value = 0.0;
  for (std::size_t i = 0; i < assignment.size(); ++i) {
    value += scores(static_cast<Eigen::Index>(i), assignment[i]);
  }
  return {Permutation(std::move(assignment)), value};
}

}  // namespace covalign
