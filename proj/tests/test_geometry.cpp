#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "mpc/error.hpp"
#include "mpc/geometry.hpp"
#include "oracles.hpp"

namespace mpc::geometry {
namespace {

using testing::random_cloud;

TEST(Knn, OrderingIsForcedByDistance) {
  PointCloud q({{0, 0, 0}});
  PointCloud r({{1, 0, 0}, {2, 0, 0}});
  auto nn = knn(q, r, 2);
  EXPECT_EQ(nn.indices, (std::vector<std::uint32_t>{0, 1}));
}

TEST(Knn, SelfIsNearest) {
  auto c = random_cloud(200, 3);
  auto nn = knn(c, c, 1);
  for (std::size_t i = 0; i < c.size(); ++i) EXPECT_EQ(nn.indices[i], i);
}

TEST(Knn, TiesBreakByLowerIndex) {
  PointCloud r({{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}});
  auto nn = knn(PointCloud({{0, 0, 0}}), r, 3);
  EXPECT_EQ(nn.indices, (std::vector<std::uint32_t>{0, 1, 2}));
}

TEST(Knn, MatchesExhaustiveScan) {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const std::size_t n = 10 + seed % 55;
    const std::size_t k = 1 + seed % 7;
    auto ref = random_cloud(n, seed);
    auto query = random_cloud(9, seed + 1000);
    auto nn = knn(query, ref, k);
    for (std::size_t qi = 0; qi < query.size(); ++qi) {
      std::vector<std::pair<double, std::uint32_t>> all;
      for (std::uint32_t j = 0; j < n; ++j) all.push_back({testing::dist2(query[qi], ref[j]), j});
      std::sort(all.begin(), all.end());
      for (std::size_t j = 0; j < k; ++j) EXPECT_EQ(nn.row(qi)[j], all[j].second);
    }
  }
}

TEST(Knn, KdTreePathMatchesExhaustiveScanOnLargeClouds) {
  auto ref = random_cloud(3000, 5);
  auto query = random_cloud(50, 6);
  auto nn = knn(query, ref, 20);
  for (std::size_t qi = 0; qi < query.size(); ++qi) {
    std::vector<std::pair<double, std::uint32_t>> all;
    for (std::uint32_t j = 0; j < ref.size(); ++j) all.push_back({testing::dist2(query[qi], ref[j]), j});
    std::partial_sort(all.begin(), all.begin() + 20, all.end());
    for (std::size_t j = 0; j < 20; ++j) EXPECT_EQ(nn.row(qi)[j], all[j].second);
  }
}

TEST(Knn, KdTreeHandlesDuplicatePoints) {
  std::vector<Vec3> pts(500, Vec3{0.5, 0.5, 0.5});
  pts[123] = {0.4, 0.5, 0.5};
  PointCloud ref(pts);
  auto nn = knn(PointCloud({{0.5, 0.5, 0.5}}), ref, 5);
  EXPECT_EQ(nn.indices, (std::vector<std::uint32_t>{0, 1, 2, 3, 4}));
}

TEST(Knn, RejectsOversizedK) { EXPECT_THROW(knn(random_cloud(3, 1), random_cloud(3, 2), 4), SizeError); }

TEST(DownsampleHalf, TwoPointsGiveOneMember) {
  PointCloud c({{0, 0, 0}, {1, 2, 3}});
  auto d = downsample_half(c);
  ASSERT_EQ(d.size(), 1u);
  EXPECT_TRUE(d[0] == c[0] || d[0] == c[1]);
}

TEST(DownsampleHalf, HalvesAndSelectsMembers) {
  auto c = random_cloud(1024, 9);
  auto idx = downsample_half_indices(c);
  ASSERT_EQ(idx.size(), 512u);
  EXPECT_EQ(std::set<std::size_t>(idx.begin(), idx.end()).size(), 512u);
  for (std::size_t i : idx) EXPECT_LT(i, c.size());
  for (int level = 0; level < 3; ++level) {
    c = downsample_half(c);
    EXPECT_EQ(c.size(), 512u >> level);
  }
}

TEST(DownsampleHalf, OddCountsFloor) { EXPECT_EQ(downsample_half(random_cloud(7, 1)).size(), 3u); }

TEST(DownsampleHalf, RejectsTinyClouds) { EXPECT_THROW(downsample_half(random_cloud(1, 1)), SizeError); }

TEST(DownsampleHalf, CoincidentPointsStayCoincident) {
  PointCloud c(std::vector<Vec3>(64, Vec3{0.25, -0.5, 1.0}));
  auto d = downsample_half(c);
  ASSERT_EQ(d.size(), 32u);
  for (const Vec3& p : d.points()) EXPECT_EQ(p, (Vec3{0.25, -0.5, 1.0}));
}

TEST(DownsampleHalf, CoordinateSetIgnoresInputOrder) {
  auto c = random_cloud(256, 17);
  std::vector<Vec3> rev(c.points().rbegin(), c.points().rend());
  auto a = downsample_half(c).points();
  auto b = downsample_half(PointCloud(rev)).points();
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  EXPECT_EQ(a, b);
}

double min_pairwise(const std::vector<Vec3>& pts) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j) best = std::min(best, std::sqrt(testing::dist2(pts[i], pts[j])));
  return best;
}

TEST(DownsampleHalf, CubeCornersSpreadAtLeastAsWellAsGreedyFps) {
  std::vector<Vec3> corners;
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y)
      for (int z = 0; z < 2; ++z) corners.push_back({double(x), double(y), double(z)});
  const double ours = min_pairwise(downsample_half(PointCloud(corners)).points());

  // Oracle: every greedy FPS run (each start) over all 4-subsets' candidates,
  // plus the exhaustive optimum as an upper bound.
  double greedy_best = 0.0;
  for (std::size_t start = 0; start < 8; ++start) {
    std::vector<std::size_t> chosen{start};
    while (chosen.size() < 4) {
      std::size_t arg = 0;
      double far = -1;
      for (std::size_t i = 0; i < 8; ++i) {
        if (std::find(chosen.begin(), chosen.end(), i) != chosen.end()) continue;
        double d = std::numeric_limits<double>::infinity();
        for (std::size_t c : chosen) d = std::min(d, testing::dist2(corners[i], corners[c]));
        if (d > far) {
          far = d;
          arg = i;
        }
      }
      chosen.push_back(arg);
    }
    std::vector<Vec3> sub;
    for (std::size_t c : chosen) sub.push_back(corners[c]);
    greedy_best = std::max(greedy_best, min_pairwise(sub));
  }
  double optimum = 0.0;
  for (int mask = 0; mask < 256; ++mask) {
    if (__builtin_popcount(mask) != 4) continue;
    std::vector<Vec3> sub;
    for (int i = 0; i < 8; ++i)
      if (mask & (1 << i)) sub.push_back(corners[i]);
    optimum = std::max(optimum, min_pairwise(sub));
  }
  EXPECT_GE(ours, greedy_best - 1e-12);
  EXPECT_LE(ours, optimum + 1e-12);
}

TEST(Chamfer, HandValues) {
  PointCloud p({{0, 0, 0}});
  PointCloud q({{1, 0, 0}});
  EXPECT_DOUBLE_EQ(chamfer(p, p), 0.0);
  EXPECT_DOUBLE_EQ(chamfer(p, q), 2.0);
  EXPECT_DOUBLE_EQ(chamfer(PointCloud({{0, 0, 0}, {2, 0, 0}}), q), 2.0);
  EXPECT_THROW(chamfer(PointCloud(), q), SizeError);
}

TEST(Chamfer, SymmetricAndTranslationInvariant) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    auto p = random_cloud(30 + s, s), q = random_cloud(50, s + 100);
    EXPECT_DOUBLE_EQ(chamfer(p, q), chamfer(q, p));
    const Vec3 t{0.5, -0.25, 0.125};  // exact in binary: translation is exact
    EXPECT_NEAR(chamfer(p.translated(t), q.translated(t)), chamfer(p, q), 1e-12);
  }
}

TEST(Uhd, HandValues) {
  PointCloud p({{0, 0, 0}});
  EXPECT_DOUBLE_EQ(uhd(p, p), 0.0);
  EXPECT_DOUBLE_EQ(uhd(p, PointCloud({{3, 4, 0}})), 5.0);
  auto q = random_cloud(40, 4);
  std::vector<std::size_t> sub{1, 5, 7, 30};
  EXPECT_DOUBLE_EQ(uhd(q.select(sub), q), 0.0);
  EXPECT_GT(uhd(q, q.select(sub)), 0.0);
  EXPECT_THROW(uhd(p, PointCloud()), SizeError);
}

TEST(Emd, HandValues) {
  PointCloud p({{0, 0, 0}, {1, 0, 0}});
  PointCloud q({{0, 0, 0}, {2, 0, 0}});
  EXPECT_DOUBLE_EQ(emd(p, p), 0.0);
  EXPECT_DOUBLE_EQ(emd(p, q), 0.5);
  EXPECT_THROW(emd(p, PointCloud({{0, 0, 0}})), SizeError);
}

TEST(Emd, MatchesPermutationOracle) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    auto p = random_cloud(6, s), q = random_cloud(6, s + 77);
    EXPECT_LT(testing::rel_err(emd(p, q), testing::emd_oracle(p, q)), 1e-12);
  }
}

TEST(Emd, HungarianMatchIsABijection) {
  auto p = random_cloud(100, 1), q = random_cloud(100, 2);
  auto r = emd_match(p, q);
  EXPECT_TRUE(r.exact);
  std::set<std::uint32_t> used(r.match.begin(), r.match.end());
  EXPECT_EQ(used.size(), 100u);
}

TEST(Emd, AuctionIsWithinEpsilonOfExact) {
  auto p = random_cloud(60, 11), q = random_cloud(60, 12);
  std::vector<double> cost(60 * 60);
  for (std::size_t i = 0; i < 60; ++i)
    for (std::size_t j = 0; j < 60; ++j) cost[i * 60 + j] = std::sqrt(testing::dist2(p[i], q[j]));
  auto exact = hungarian(cost, 60);
  const double eps = 1e-3;
  auto approx = auction(cost, 60, eps);
  double a = 0, b = 0;
  for (std::size_t i = 0; i < 60; ++i) {
    a += cost[i * 60 + exact[i]];
    b += cost[i * 60 + approx[i]];
  }
  EXPECT_GE(b, a - 1e-9);
  EXPECT_LE(b, a + 60 * eps);
}

TEST(Emd, LargeCloudsUseFlaggedApproximation) {
  auto p = random_cloud(kEmdExactLimit + 1, 1), q = random_cloud(kEmdExactLimit + 1, 2);
  auto r = emd_match(p, q);
  EXPECT_FALSE(r.exact);
  EXPECT_GT(r.epsilon, 0.0);
  EXPECT_GT(r.value, 0.0);
}

TEST(Emd, TranslationInvariant) {
  auto p = random_cloud(20, 1), q = random_cloud(20, 2);
  const Vec3 t{1.5, 2.0, -0.75};
  EXPECT_NEAR(emd(p.translated(t), q.translated(t)), emd(p, q), 1e-12);
}

TEST(Hull, CubeWithInteriorPoints) {
  std::vector<Vec3> pts;
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y)
      for (int z = 0; z < 2; ++z) pts.push_back({double(x), double(y), double(z)});
  pts.push_back({0.5, 0.5, 0.5});
  pts.push_back({0.2, 0.3, 0.9});
  auto v = convex_hull_vertices(pts);
  for (int i = 0; i < 8; ++i) EXPECT_TRUE(v[i]);
  EXPECT_FALSE(v[8]);
  EXPECT_FALSE(v[9]);
}

TEST(Hull, SpherePointsAreAllVertices) {
  Rng rng(4);
  std::vector<Vec3> pts;
  for (int i = 0; i < 500; ++i) {
    Vec3 v{rng.normal(), rng.normal(), rng.normal()};
    double n = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
    pts.push_back({v[0] / n, v[1] / n, v[2] / n});
  }
  pts.push_back({0, 0, 0});
  auto v = convex_hull_vertices(pts);
  EXPECT_EQ(std::count(v.begin(), v.end() - 1, true), 500);
  EXPECT_FALSE(v.back());
}

}  // namespace
}  // namespace mpc::geometry
