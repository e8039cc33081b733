#include <algorithm>
#include <cmath>
#include <limits>

#include "mpc/error.hpp"
#include "mpc/geometry.hpp"

namespace mpc::geometry {

std::vector<std::uint32_t> hungarian(std::span<const double> cost, std::size_t n) {
  if (cost.size() != n * n) throw SizeError("hungarian: cost matrix is not n x n");
  constexpr double kInf = std::numeric_limits<double>::infinity();
  // 1-based potentials; column 0 is the virtual source.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<std::size_t> owner(n + 1, 0), way(n + 1, 0);
  std::vector<bool> used(n + 1);
  for (std::size_t row = 1; row <= n; ++row) {
    owner[0] = row;
    std::size_t col0 = 0;
    std::fill(minv.begin(), minv.end(), kInf);
    std::fill(used.begin(), used.end(), false);
    do {
      used[col0] = true;
      const std::size_t r0 = owner[col0];
      double delta = kInf;
      std::size_t col1 = 0;
      for (std::size_t col = 1; col <= n; ++col) {
        if (used[col]) continue;
        const double cur = cost[(r0 - 1) * n + (col - 1)] - u[r0] - v[col];
        if (cur < minv[col]) {
          minv[col] = cur;
          way[col] = col0;
        }
        if (minv[col] < delta) {
          delta = minv[col];
          col1 = col;
        }
      }
      for (std::size_t col = 0; col <= n; ++col) {
        if (used[col]) {
          u[owner[col]] += delta;
          v[col] -= delta;
        } else {
          minv[col] -= delta;
        }
      }
      col0 = col1;
    } while (owner[col0] != 0);
    do {
      const std::size_t col1 = way[col0];
      owner[col0] = owner[col1];
      col0 = col1;
    } while (col0 != 0);
  }
  std::vector<std::uint32_t> assign(n);
  for (std::size_t col = 1; col <= n; ++col) assign[owner[col] - 1] = static_cast<std::uint32_t>(col - 1);
  return assign;
}

std::vector<std::uint32_t> auction(std::span<const double> cost, std::size_t n, double final_epsilon) {
  if (cost.size() != n * n) throw SizeError("auction: cost matrix is not n x n");
  if (!(final_epsilon > 0.0)) throw NumericError("auction: epsilon must be positive");
  constexpr std::uint32_t kNone = std::numeric_limits<std::uint32_t>::max();
  const double max_cost = *std::max_element(cost.begin(), cost.end());
  std::vector<double> price(n, 0.0);
  std::vector<std::uint32_t> person_of(n, kNone), object_of(n, kNone);

  double eps = std::max(max_cost / 4.0, final_epsilon);
  for (;;) {
    std::fill(person_of.begin(), person_of.end(), kNone);
    std::fill(object_of.begin(), object_of.end(), kNone);
    std::vector<std::uint32_t> queue(n);
    for (std::size_t i = 0; i < n; ++i) queue[i] = static_cast<std::uint32_t>(n - 1 - i);
    while (!queue.empty()) {
      const std::uint32_t person = queue.back();
      queue.pop_back();
      // Benefit is -cost; find best and second best net value.
      double best = -std::numeric_limits<double>::infinity(), second = best;
      std::uint32_t best_obj = 0;
      for (std::size_t j = 0; j < n; ++j) {
        const double value = -cost[person * n + j] - price[j];
        if (value > best) {
          second = best;
          best = value;
          best_obj = static_cast<std::uint32_t>(j);
        } else if (value > second) {
          second = value;
        }
      }
      if (n == 1) second = best;
      price[best_obj] += best - second + eps;
      if (person_of[best_obj] != kNone) {
        object_of[person_of[best_obj]] = kNone;
        queue.push_back(person_of[best_obj]);
      }
      person_of[best_obj] = person;
      object_of[person] = best_obj;
    }
    if (eps <= final_epsilon) break;
    eps = std::max(eps / 5.0, final_epsilon);
  }
  return object_of;
}

}  // namespace mpc::geometry
