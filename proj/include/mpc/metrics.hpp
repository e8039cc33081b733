#pragma once

#include <span>
#include <vector>

#include "mpc/geometry.hpp"

namespace mpc::metrics {

// Reported values are raw metrics times these factors.
inline constexpr double kMmdScale = 1e3;
inline constexpr double kTmdScale = 1e2;
inline constexpr double kUhdScale = 1e2;

// Mean over test shapes of the smallest Chamfer distance to any completion.
double mmd(std::span<const geometry::PointCloud> test_set, std::span<const geometry::PointCloud> completions);

// Sum over the K completions of their mean Chamfer distance to the other K-1.
double tmd(std::span<const geometry::PointCloud> completions);

// Mean unidirectional Hausdorff distance from the partial to each completion.
double uhd_metric(const geometry::PointCloud& partial, std::span<const geometry::PointCloud> completions);

}  // namespace mpc::metrics
