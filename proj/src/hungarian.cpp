#include <cmath>
#include <limits>

#include "crossrec/training.hpp"

namespace crossrec {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Minimum-cost assignment of n rows to m >= n columns (potentials method).
// Returns row -> column.
std::vector<std::size_t> solve_min_cost(
    const std::vector<std::vector<double>>& a) {
  const int n = (int)a.size();
  const int m = (int)a[0].size();
  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
  std::vector<int> p(m + 1, 0), way(m + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(m + 1, kInf);
    std::vector<char> used(m + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      int j1 = -1;
      double delta = kInf;
      for (int j = 1; j <= m; ++j)
        if (!used[j]) {
          const double cur = a[i0 - 1][j - 1] - u[i0] - v[j];
          if (cur < minv[j]) {
            minv[j] = cur;
            way[j] = j0;
          }
          if (minv[j] < delta) {
            delta = minv[j];
            j1 = j;
          }
        }
      for (int j = 0; j <= m; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<std::size_t> ans(n, 0);
  for (int j = 1; j <= m; ++j)
    if (p[j] != 0) ans[p[j] - 1] = (std::size_t)(j - 1);
  return ans;
}

double assignment_value(const std::vector<std::vector<double>>& a,
                        const std::vector<std::size_t>& asg) {
  double s = 0.0;
  for (std::size_t i = 0; i < asg.size(); ++i) s += a[i][asg[i]];
  return s;
}

}  // namespace

std::vector<std::size_t> hungarian_match(const Tensor& sim) {
  const std::size_t k = sim.rows(), K = sim.cols();
  if (k == 0) return {};
  if (k > K)
    throw ShapeError("hungarian_match: more rows (" + std::to_string(k) +
                     ") than columns (" + std::to_string(K) + ")");
  std::vector<std::vector<double>> cost(k, std::vector<double>(K));
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < K; ++j) cost[i][j] = -sim.at(i, j);
  const double best = assignment_value(cost, solve_min_cost(cost));
  // pin rows in order to the smallest column that keeps the value optimal
  constexpr double kBig = 1e6;
  constexpr double kTol = 1e-9;
  std::vector<std::size_t> fixed(k, K);
  std::vector<char> taken(K, 0);
  auto pinned = cost;
  for (std::size_t r = 0; r < k; ++r) {
    for (std::size_t c = 0; c < K; ++c) {
      if (taken[c]) continue;
      auto trial = pinned;
      for (std::size_t j = 0; j < K; ++j)
        if (j != c) trial[r][j] = kBig;
      if (assignment_value(trial, solve_min_cost(trial)) <= best + kTol) {
        fixed[r] = c;
        taken[c] = 1;
        pinned = trial;
        break;
      }
    }
  }
  return fixed;
}

}  // namespace crossrec
