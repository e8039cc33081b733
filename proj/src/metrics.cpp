#include "mpc/metrics.hpp"

#include <limits>
#include <string>

#include "mpc/error.hpp"

namespace mpc::metrics {

using geometry::PointCloud;

double mmd(std::span<const PointCloud> test_set, std::span<const PointCloud> completions) {
  if (test_set.empty() || completions.empty()) throw SizeError("mmd: empty test or completion set");
  double total = 0.0;
  for (const PointCloud& t : test_set) {
    double best = std::numeric_limits<double>::infinity();
    for (const PointCloud& c : completions) best = std::min(best, geometry::chamfer(t, c));
    total += best;
  }
  return total / static_cast<double>(test_set.size());
}

double tmd(std::span<const PointCloud> completions) {
  const std::size_t k = completions.size();
  if (k < 2) throw SizeError("tmd: need at least 2 completions, got " + std::to_string(k));
  // Chamfer is symmetric, so each unordered pair is evaluated once.
  std::vector<double> row_sum(k, 0.0);
  for (std::size_t j = 0; j < k; ++j) {
    for (std::size_t l = j + 1; l < k; ++l) {
      const double d = geometry::chamfer(completions[j], completions[l]);
      row_sum[j] += d;
      row_sum[l] += d;
    }
  }
  double total = 0.0;
  for (double s : row_sum) total += s / static_cast<double>(k - 1);
  return total;
}

double uhd_metric(const PointCloud& partial, std::span<const PointCloud> completions) {
  if (completions.empty()) throw SizeError("uhd_metric: no completions");
  double total = 0.0;
  for (const PointCloud& c : completions) total += geometry::uhd(partial, c);
  return total / static_cast<double>(completions.size());
}

}  // namespace mpc::metrics
