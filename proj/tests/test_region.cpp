#include <gtest/gtest.h>

#include <capillary/oracles.hpp>

#include <cstdio>
#include <filesystem>

#include "fixtures.hpp"

using namespace capillary;

namespace {

VoxelRegion flatSheet(int n, int layers) {
  VoxelRegion r = VoxelRegion::halfSpaceBox(n, n, 1.0 / n);
  r.fillWhere([&](const Vec3& p) { return p.z() < static_cast<double>(layers) / n; });
  return r;
}

}  // namespace

TEST(RegionEnergy, Empty) {
  VoxelRegion r = VoxelRegion::ballGrid(16);
  RegionEnergy e = regionEnergy(r, {1, M_PI / 3});
  EXPECT_EQ(e.energy, 0);
  EXPECT_EQ(e.volume, 0);
  EXPECT_EQ(e.split.interiorPerimeter, 0);
  EXPECT_EQ(e.split.wallArea, 0);
}

TEST(RegionEnergy, WholeBall) {
  VoxelRegion r = VoxelRegion::ballGrid(128);
  r.fill(1);
  for (double theta : {M_PI / 3, 2.0}) {
    const double c = 1;
    double expect = std::cos(theta) * 4 * M_PI - c * 4 * M_PI / 3;
    EXPECT_NEAR(regionEnergy(r, {c, theta}).energy, expect, 0.03 * std::abs(expect)) << theta;
  }
}

TEST(RegionEnergy, HalfBall) {
  VoxelRegion r = VoxelRegion::ballGrid(64);
  r.fillWhere([](const Vec3& p) { return p.z() >= 0; });
  EXPECT_NEAR(regionEnergy(r, {0, M_PI / 2}).energy, M_PI, 0.03 * M_PI);
}

TEST(FlatDistance, Basics) {
  VoxelRegion a = VoxelRegion::ballGrid(16);
  a.fillWhere([](const Vec3& p) { return p.x() < 0.2; });
  EXPECT_EQ(flatDistance(a, a), 0);
  VoxelRegion b = a;
  int id = 0;
  while (!b.inside(id)) ++id;
  b.flip(id);
  EXPECT_DOUBLE_EQ(flatDistance(a, b), std::pow(a.spacing(), 3));
  VoxelRegion full = a, comp = a;
  full.fill(1);
  for (int k = 0; k < comp.size(); ++k) comp.set(k, 1 - a[k]);
  EXPECT_NEAR(flatDistance(a, comp), full.volume(), 1e-12);
  EXPECT_THROW(flatDistance(a, VoxelRegion::ballGrid(8)), Error);
}

TEST(EnergyDelta, MatchesFullRecompute) {
  VoxelRegion r = flatSheet(8, 3);
  const EnergyParams p{1, M_PI / 3};
  std::vector<int> cells{r.index(3, 3, 3), r.index(4, 3, 3), r.index(2, 5, 2)};
  std::vector<double> vals{1, 1, 0};
  double e0 = regionEnergy(r, p).energy;
  double d = energyDelta(r, cells, vals, p);
  VoxelRegion s = r;
  for (size_t k = 0; k < cells.size(); ++k) s.set(cells[k], vals[k]);
  EXPECT_NEAR(d, regionEnergy(s, p).energy - e0, 1e-12);
  EXPECT_EQ(r, flatSheet(8, 3));  // energyDelta restores the region
}

TEST(Replace, AlreadyMinimal) {
  VoxelRegion r = flatSheet(6, 3);
  const double h = r.spacing();
  std::vector<int> K{r.index(2, 2, 3), r.index(3, 2, 3), r.index(2, 3, 2)};
  ReplaceResult rr = replace(r, K, 0, 2 * h * h * h, {0, M_PI / 2});
  EXPECT_EQ(rr.region, r);
  EXPECT_TRUE(rr.trajectory.empty());
}

TEST(Replace, EmptyK) {
  VoxelRegion r = flatSheet(6, 3);
  ReplaceResult rr = replace(r, {}, 0, 1.0, {0, M_PI / 2});
  EXPECT_EQ(rr.region, r);
  EXPECT_EQ(rr.energy, rr.startEnergy);
}

TEST(Replace, FillsNotch) {
  VoxelRegion r = flatSheet(6, 3);
  const double h = r.spacing();
  // a wedge cut into the top layer of the filled slab
  std::vector<int> K{r.index(2, 2, 2), r.index(3, 2, 2), r.index(2, 3, 2), r.index(3, 3, 2), r.index(2, 2, 1)};
  for (int id : K) r.set(id, 0);
  ReplaceResult rr = replace(r, K, 0, 8 * h * h * h, {0, M_PI / 2});
  EXPECT_EQ(rr.region, flatSheet(6, 3));
  EXPECT_LE(rr.energy, rr.startEnergy - h * h);
  EXPECT_TRUE(verifyTrajectory(r, K, 8 * h * h * h, rr.trajectory, {0, M_PI / 2}));
}

TEST(Replace, DeltaBelowOneCell) {
  VoxelRegion r = flatSheet(6, 3);
  const double h = r.spacing();
  try {
    replace(r, {r.index(1, 1, 1)}, 0, 0.5 * h * h * h, {0, M_PI / 2});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InfeasibleConstraint);
  }
}

TEST(Replace, AgreesWithBruteForce) {
  for (const auto& f : fixtures::replaceFixtures(12, 5)) {
    BruteForceResult bf = bruteForceReplacement(f.region, f.K, f.delta, f.params);
    ReplaceResult rr = replace(f.region, f.K, 0, f.delta, f.params);
    EXPECT_NEAR(rr.energy, bf.energy, 1e-9);
    EXPECT_TRUE(verifyTrajectory(f.region, f.K, f.delta, rr.trajectory, f.params));
    EXPECT_TRUE(verifyTrajectory(f.region, f.K, f.delta, bf.path, f.params));
  }
}

TEST(BruteForce, SingleCellFlip) {
  VoxelRegion r = flatSheet(6, 3);
  const double h = r.spacing();
  int hole = r.index(3, 3, 1);
  r.set(hole, 0);
  BruteForceResult bf = bruteForceReplacement(r, {hole}, h * h * h, {0, M_PI / 2});
  EXPECT_EQ(bf.region, flatSheet(6, 3));
  EXPECT_LT(bf.energy, bf.startEnergy);
}

TEST(BruteForce, LargeDeltaIsUnconstrainedMinimum) {
  VoxelRegion r = flatSheet(6, 3);
  const EnergyParams p{1, M_PI / 3};
  std::vector<int> K{r.index(0, 0, 0), r.index(1, 1, 3), r.index(2, 1, 3), r.index(2, 2, 2), r.index(4, 4, 4),
                     r.index(5, 5, 0)};
  double best = INFINITY;
  for (int mask = 0; mask < (1 << K.size()); ++mask) {
    VoxelRegion s = r;
    for (size_t k = 0; k < K.size(); ++k)
      if (mask >> k & 1) s.flip(K[k]);
    best = std::min(best, regionEnergy(s, p).energy);
  }
  BruteForceResult bf = bruteForceReplacement(r, K, 100.0, p);
  EXPECT_NEAR(bf.energy, best, 1e-12);
  EXPECT_EQ(bf.reachable, 1 << K.size());
}

TEST(BruteForce, TooManyCells) {
  VoxelRegion r = flatSheet(6, 3);
  std::vector<int> K;
  for (int i = 0; i < 13; ++i) K.push_back(i);
  try {
    bruteForceReplacement(r, K, 1.0, {0, M_PI / 2});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::TooLarge);
  }
}

TEST(Capreg, RoundTrip) {
  VoxelRegion r = VoxelRegion::ballGrid(12);
  r.fillWhere([](const Vec3& p) { return p.x() + 0.3 * p.y() < 0.1; });
  std::string path = (std::filesystem::temp_directory_path() / "capillary_rt.capreg").string();
  writeCapreg(r, path);
  VoxelRegion s = readCapreg(path, AmbientDomain::unitBall());
  EXPECT_EQ(s, r);
  EXPECT_EQ(s.spacing(), r.spacing());
  std::remove(path.c_str());
}

TEST(Capreg, BadHeader) {
  std::string path = (std::filesystem::temp_directory_path() / "capillary_bad.capreg").string();
  {
    std::ofstream f(path);
    f << "CAPREG v2\n";
  }
  try {
    readCapreg(path, AmbientDomain::unitBall());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ConfigParse);
  }
  std::remove(path.c_str());
}
