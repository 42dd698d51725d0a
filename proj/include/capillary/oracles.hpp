#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <queue>
#include <vector>

#include "region.hpp"

namespace capillary {

// Spherical cap of radius R over the plane z = 0 meeting it at angle theta, in
// the orientation where <nu, etaBar> = cos(theta): the centre sits at height
// R cos(theta), so theta < pi/2 is more than a hemisphere.
struct CapOracle {
  double theta = M_PI / 2;
  double R = 1.0;

  double x() const { return std::cos(theta); }
  double area() const { return 2 * M_PI * R * R * (1 + x()); }
  double wetted() const { return M_PI * R * R * std::sin(theta) * std::sin(theta); }
  double volume() const { return M_PI * R * R * R / 3 * (1 + x()) * (1 + x()) * (2 - x()); }
  double meanCurvature() const { return 2 / R; }
  double centerHeight() const { return R * x(); }
  double boundaryRadius() const { return R * std::sin(theta); }
  double energyAt(double c) const { return area() + x() * wetted() - c * volume(); }
  // same functional on the cap centred at -R cos(theta), which meets the wall
  // at pi - theta under this orientation
  double complementEnergyAt(double c) const {
    double a = 2 * M_PI * R * R * (1 - x());
    double v = M_PI * R * R * R / 3 * (1 - x()) * (1 - x()) * (2 + x());
    return a + x() * wetted() - c * v;
  }
  // dE/dR at fixed theta
  double energySlope(double c) const {
    double s = std::sin(theta);
    return 2 * R * M_PI * (2 * (1 + x()) + x() * s * s) - 3 * c * R * R * M_PI / 3 * (1 + x()) * (1 + x()) * (2 - x());
  }
};

inline double capEnergy(double theta, double R, double c) {
  require(theta > 0 && theta < M_PI && R > 0, "cap needs theta in (0, pi) and R > 0");
  return CapOracle{theta, R}.energyAt(c);
}

struct BruteForceResult {
  double energy = 0.0;
  double startEnergy = 0.0;
  VoxelRegion region;
  std::vector<ReplaceStep> path;
  int reachable = 0;
};

// Exhaustive breadth-first search over every admissible chain from the start:
// states are K-supported flips, an edge changes at most delta / h^3 cells, and
// every state must keep energy <= E(start) + delta.
inline BruteForceResult bruteForceReplacement(const VoxelRegion& region, const std::vector<int>& Kin, double delta,
                                              const EnergyParams& p) {
  std::vector<int> K;
  for (int id : Kin)
    if (region.inside(id)) K.push_back(id);
  std::sort(K.begin(), K.end());
  K.erase(std::unique(K.begin(), K.end()), K.end());
  if (K.size() > 12) throw Error(ErrorCode::TooLarge, "exhaustive replacement is limited to 12 cells");
  const double h3 = std::pow(region.spacing(), 3);
  if (delta < h3 * (1 - 1e-12)) throw Error(ErrorCode::InfeasibleConstraint, "delta is below one cell volume");

  const int m = static_cast<int>(K.size());
  const uint32_t N = 1u << m;
  VoxelRegion base = region;
  base.threshold();
  BruteForceResult out;
  out.startEnergy = regionEnergy(base, p).energy;

  std::vector<double> E(N);
  E[0] = out.startEnergy;
  for (uint32_t s = 1; s < N; ++s) {
    std::vector<int> cells;
    std::vector<double> vals;
    for (int i = 0; i < m; ++i)
      if (s >> i & 1) {
        cells.push_back(K[i]);
        vals.push_back(base[K[i]] >= 0.5 ? 0.0 : 1.0);
      }
    E[s] = out.startEnergy + energyDelta(base, cells, vals, p);
  }
  const double cap = out.startEnergy + delta;
  const int kmax = std::min(m, static_cast<int>(std::floor(delta / h3 * (1 + 1e-12))));
  std::vector<uint32_t> diffs;
  for (uint32_t d = 1; d < N; ++d)
    if (std::popcount(d) <= kmax) diffs.push_back(d);

  std::vector<int32_t> parent(N, -2);
  parent[0] = -1;
  std::queue<uint32_t> q;
  q.push(0);
  uint32_t best = 0;
  while (!q.empty()) {
    uint32_t s = q.front();
    q.pop();
    ++out.reachable;
    if (E[s] < E[best] - 1e-12) best = s;
    for (uint32_t d : diffs) {
      uint32_t t = s ^ d;
      if (parent[t] != -2 || E[t] > cap + 1e-12) continue;
      parent[t] = static_cast<int32_t>(s);
      q.push(t);
    }
  }
  out.energy = E[best];
  out.region = base;
  std::vector<uint32_t> chain;
  for (int64_t s = best; s > 0; s = parent[s]) chain.push_back(static_cast<uint32_t>(s));
  std::reverse(chain.begin(), chain.end());
  uint32_t prev = 0;
  for (uint32_t s : chain) {
    ReplaceStep st;
    for (int i = 0; i < m; ++i)
      if ((s ^ prev) >> i & 1) st.cells.push_back(K[i]);
    st.energy = E[s];
    out.path.push_back(std::move(st));
    prev = s;
  }
  for (int i = 0; i < m; ++i)
    if (best >> i & 1) out.region.flip(K[i]);
  return out;
}

}  // namespace capillary
