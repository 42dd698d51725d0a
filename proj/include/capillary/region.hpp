#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <queue>
#include <random>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "ambient.hpp"
#include "energy.hpp"

namespace capillary {

// Isotropic 3x3x3 gradient: central difference along the axis, [1 2 1]/4
// smoothing across it. Its total variation over-reads diagonal interfaces by
// at most 3.4% relative to axis-aligned ones, so rescaling by kappa turns that
// into a symmetric +-1.7% band.
inline constexpr double kPerimeterScale = 2.0 / (1.0 + 1.03415);

struct PerimeterSplit {
  double interiorPerimeter = 0.0;
  double wallArea = 0.0;
};

struct RegionEnergy {
  double energy = 0.0;
  PerimeterSplit split;
  double volume = 0.0;
};

// Regular grid of cells over a box. For the half-space and the slab the box
// bottom lies on the wall z = 0 (and the slab top on z = height); every cell is
// inside M and the other box faces are treated as reflecting. For the ball the
// mask keeps cells whose centre lies inside.
class VoxelRegion {
 public:
  VoxelRegion() = default;
  VoxelRegion(const AmbientDomain& d, std::array<int, 3> dims, Vec3 origin, double h)
      : domain_(d), n_(dims), origin_(origin), h_(h) {
    require(dims[0] > 0 && dims[1] > 0 && dims[2] > 0 && h > 0, "grid dimensions and spacing must be positive");
    if (d.kind() != DomainKind::UnitBall)
      require(std::abs(origin.z()) < 1e-12, "half-space and slab grids start on the wall z = 0");
    if (d.kind() == DomainKind::Slab)
      require(std::abs(dims[2] * h - d.slabHeight()) < 1e-9, "slab grid must span the slab height");
    occ_.assign(size(), 0.0);
    mask_.assign(size(), 0);
    for (int k = 0; k < n_[2]; ++k)
      for (int j = 0; j < n_[1]; ++j)
        for (int i = 0; i < n_[0]; ++i) mask_[index(i, j, k)] = d.contains(center(i, j, k), 0.0) ? 1 : 0;
    buildAuxiliary();
  }

  // [-1,1]^3 with n cells per side.
  static VoxelRegion ballGrid(int n) {
    return VoxelRegion(AmbientDomain::unitBall(), {n, n, n}, Vec3(-1, -1, -1), 2.0 / n);
  }
  // [-w/2, w/2]^2 x [0, nz h] over the wall.
  static VoxelRegion halfSpaceBox(int nxy, int nz, double h) {
    double w = nxy * h;
    return VoxelRegion(AmbientDomain::halfSpace(), {nxy, nxy, nz}, Vec3(-w / 2, -w / 2, 0), h);
  }

  const AmbientDomain& domain() const { return domain_; }
  std::array<int, 3> dims() const { return n_; }
  const Vec3& origin() const { return origin_; }
  double spacing() const { return h_; }
  int size() const { return n_[0] * n_[1] * n_[2]; }
  int index(int i, int j, int k) const { return i + n_[0] * (j + n_[1] * k); }
  std::array<int, 3> coords(int id) const { return {id % n_[0], (id / n_[0]) % n_[1], id / (n_[0] * n_[1])}; }
  Vec3 center(int i, int j, int k) const { return origin_ + h_ * Vec3(i + 0.5, j + 0.5, k + 0.5); }
  Vec3 center(int id) const {
    auto c = coords(id);
    return center(c[0], c[1], c[2]);
  }

  bool inside(int id) const { return mask_[id] != 0; }
  double operator[](int id) const { return occ_[id]; }
  const std::vector<double>& occupancy() const { return occ_; }
  const std::vector<uint8_t>& domainMask() const { return mask_; }

  void set(int id, double v) {
    occ_[id] = mask_[id] ? std::clamp(v, 0.0, 1.0) : 0.0;
  }
  void flip(int id) {
    if (mask_[id]) occ_[id] = occ_[id] >= 0.5 ? 0.0 : 1.0;
  }
  void fill(double v) {
    for (int id = 0; id < size(); ++id) set(id, v);
  }
  template <class F>
  void fillWhere(F&& pred) {
    for (int id = 0; id < size(); ++id) set(id, pred(center(id)) ? 1.0 : 0.0);
  }
  void threshold() {
    for (auto& v : occ_) v = v >= 0.5 ? 1.0 : 0.0;
  }
  bool sameGrid(const VoxelRegion& o) const {
    return n_ == o.n_ && (origin_ - o.origin_).norm() < 1e-12 && std::abs(h_ - o.h_) < 1e-15 &&
           domain_.kind() == o.domain_.kind();
  }
  bool operator==(const VoxelRegion& o) const { return sameGrid(o) && occ_ == o.occ_; }

  double volume() const {
    double s = 0;
    for (double v : occ_) s += v;
    return s * h_ * h_ * h_;
  }

  // Wall facet weight of a cell: h^2 |<n_wall, e_k>| summed over its wall faces.
  double wallWeight(int id) const { return wallW_[id]; }
  double maskWallArea() const {
    double s = 0;
    for (int id = 0; id < size(); ++id) s += mask_[id] ? wallW_[id] : 0.0;
    return s;
  }

  // Occupancy seen by the gradient stencil: clamped at the box, and outside M
  // the value of the nearest inside cell, so the wall itself is never an interface.
  double sample(int i, int j, int k) const {
    int s = sourceCell(i, j, k);
    return s >= 0 ? occ_[s] : 0.0;
  }
  // The cell whose occupancy sample(i, j, k) reads, -1 for a constant zero.
  int sourceCell(int i, int j, int k) const {
    i = std::clamp(i, 0, n_[0] - 1);
    j = std::clamp(j, 0, n_[1] - 1);
    k = std::clamp(k, 0, n_[2] - 1);
    int id = index(i, j, k);
    return mask_[id] ? id : src_[id];
  }

  // Dimensionless gradient h * grad u at an inside cell.
  Vec3 stencilGradient(int i, int j, int k) const {
    static constexpr double w[3] = {0.25, 0.5, 0.25};
    Vec3 g = Vec3::Zero();
    for (int a = -1; a <= 1; ++a)
      for (int b = -1; b <= 1; ++b) {
        double wab = w[a + 1] * w[b + 1];
        g.x() += wab * (sample(i + 1, j + a, k + b) - sample(i - 1, j + a, k + b));
        g.y() += wab * (sample(i + a, j + 1, k + b) - sample(i + a, j - 1, k + b));
        g.z() += wab * (sample(i + a, j + b, k + 1) - sample(i + a, j + b, k - 1));
      }
    return 0.5 * g;
  }
  double cellPerimeter(int id) const {
    if (!mask_[id]) return 0.0;
    auto c = coords(id);
    return kPerimeterScale * h_ * h_ * stencilGradient(c[0], c[1], c[2]).norm();
  }

  // Inside cells whose stencil reads cell id (directly or through the extension).
  std::vector<int> dependents(int id) const {
    std::vector<int> out;
    auto addAround = [&](int q) {
      auto c = coords(q);
      for (int dk = -1; dk <= 1; ++dk)
        for (int dj = -1; dj <= 1; ++dj)
          for (int di = -1; di <= 1; ++di) {
            int i = c[0] + di, j = c[1] + dj, k = c[2] + dk;
            if (i < 0 || j < 0 || k < 0 || i >= n_[0] || j >= n_[1] || k >= n_[2]) continue;
            int r = index(i, j, k);
            if (mask_[r]) out.push_back(r);
          }
    };
    // clamped ghost reads of a box-face cell come from its own neighbours
    addAround(id);
    if (auto it = ext_.find(id); it != ext_.end())
      for (int q : it->second) addAround(q);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

 private:
  void buildAuxiliary() {
    src_.assign(size(), -1);
    ext_.clear();
    for (int id = 0; id < size(); ++id) {
      if (mask_[id]) continue;
      auto c = coords(id);
      Vec3 p = center(id);
      double best = INFINITY;
      for (int dk = -2; dk <= 2; ++dk)
        for (int dj = -2; dj <= 2; ++dj)
          for (int di = -2; di <= 2; ++di) {
            int i = c[0] + di, j = c[1] + dj, k = c[2] + dk;
            if (i < 0 || j < 0 || k < 0 || i >= n_[0] || j >= n_[1] || k >= n_[2]) continue;
            int r = index(i, j, k);
            if (!mask_[r]) continue;
            double dd = (center(r) - p).squaredNorm();
            if (dd < best - 1e-15) {
              best = dd;
              src_[id] = r;
            }
          }
      if (src_[id] >= 0) ext_[src_[id]].push_back(id);
    }
    wallW_.assign(size(), 0.0);
    const double a = h_ * h_;
    for (int id = 0; id < size(); ++id) {
      if (!mask_[id]) continue;
      auto c = coords(id);
      Vec3 p = center(id);
      for (int ax = 0; ax < 3; ++ax)
        for (int s = -1; s <= 1; s += 2) {
          std::array<int, 3> q = c;
          q[ax] += s;
          bool outBox = q[ax] < 0 || q[ax] >= n_[ax];
          Vec3 e = Vec3::Zero();
          e[ax] = s;
          Vec3 face = p + 0.5 * h_ * e;
          if (domain_.kind() == DomainKind::UnitBall) {
            if (outBox || !mask_[index(q[0], q[1], q[2])]) wallW_[id] += a * std::abs(face.normalized().dot(e));
          } else if (ax == 2 && outBox) {
            bool bottom = s < 0;
            bool top = s > 0 && domain_.kind() == DomainKind::Slab;
            if (bottom || top) wallW_[id] += a;
          }
        }
    }
  }

  AmbientDomain domain_ = AmbientDomain::halfSpace();
  std::array<int, 3> n_{0, 0, 0};
  Vec3 origin_ = Vec3::Zero();
  double h_ = 1.0;
  std::vector<double> occ_;
  std::vector<uint8_t> mask_;
  std::vector<int> src_;
  std::unordered_map<int, std::vector<int>> ext_;
  std::vector<double> wallW_;
};

inline double interiorPerimeter(const VoxelRegion& r) {
  double s = 0;
  for (int id = 0; id < r.size(); ++id) s += r.cellPerimeter(id);
  return s;
}

inline double wallAreaOf(const VoxelRegion& r) {
  double s = 0;
  for (int id = 0; id < r.size(); ++id) s += r[id] * r.wallWeight(id);
  return s;
}

inline double energyFromSplit(const PerimeterSplit& s, double volume, const EnergyParams& p) {
  return s.interiorPerimeter + std::cos(p.theta) * s.wallArea - p.c * volume;
}

inline RegionEnergy regionEnergy(const VoxelRegion& r, const EnergyParams& p) {
  p.validate();
  RegionEnergy e;
  e.split.interiorPerimeter = interiorPerimeter(r);
  e.split.wallArea = wallAreaOf(r);
  e.volume = r.volume();
  e.energy = energyFromSplit(e.split, e.volume, p);
  return e;
}

// Energy change from setting the listed cells to the listed values.
inline double energyDelta(VoxelRegion& r, const std::vector<int>& cells, const std::vector<double>& values,
                          const EnergyParams& p) {
  std::vector<int> dep;
  for (int id : cells) {
    auto d = r.dependents(id);
    dep.insert(dep.end(), d.begin(), d.end());
  }
  std::sort(dep.begin(), dep.end());
  dep.erase(std::unique(dep.begin(), dep.end()), dep.end());
  double before = 0, after = 0;
  for (int q : dep) before += r.cellPerimeter(q);
  std::vector<double> old(cells.size());
  double dWall = 0, dVol = 0;
  const double h3 = std::pow(r.spacing(), 3);
  for (size_t t = 0; t < cells.size(); ++t) {
    old[t] = r[cells[t]];
    r.set(cells[t], values[t]);
    dWall += (r[cells[t]] - old[t]) * r.wallWeight(cells[t]);
    dVol += (r[cells[t]] - old[t]) * h3;
  }
  for (int q : dep) after += r.cellPerimeter(q);
  for (size_t t = cells.size(); t-- > 0;) r.set(cells[t], old[t]);
  return (after - before) + std::cos(p.theta) * dWall - p.c * dVol;
}

inline double flatDistance(const VoxelRegion& a, const VoxelRegion& b) {
  if (!a.sameGrid(b)) throw Error(ErrorCode::GridMismatch, "regions live on different grids");
  double s = 0;
  for (int id = 0; id < a.size(); ++id) s += std::abs(a[id] - b[id]);
  return s * std::pow(a.spacing(), 3);
}

// ---- constrained replacement ----

struct ReplaceStep {
  std::vector<int> cells;  // cells flipped from the previous state
  double energy = 0.0;     // energy after the step
};

struct ReplaceResult {
  VoxelRegion region;
  double startEnergy = 0.0;
  double energy = 0.0;
  std::vector<ReplaceStep> trajectory;
  bool exhaustive = false;  // the whole admissible component was explored
  long expansions = 0;
};

// Replays a trajectory and checks: (a) only cells in K change, (b) each step
// moves at most delta in flat distance, (c) every state has energy at most
// start + delta.
inline bool verifyTrajectory(const VoxelRegion& start, const std::vector<int>& K, double delta,
                             const std::vector<ReplaceStep>& traj, const EnergyParams& p, double tol = 1e-9) {
  std::vector<char> inK(start.size(), 0);
  for (int id : K) inK[id] = 1;
  VoxelRegion x = start;
  double E0 = regionEnergy(x, p).energy;
  const double h3 = std::pow(start.spacing(), 3);
  for (auto& s : traj) {
    for (int id : s.cells)
      if (!inK[id] || !x.inside(id)) return false;
    if (s.cells.size() * h3 > delta * (1 + 1e-12)) return false;
    for (int id : s.cells) x.flip(id);
    double E = regionEnergy(x, p).energy;
    if (E > E0 + delta + tol) return false;
    if (std::abs(E - s.energy) > 1e-7 * std::max(1.0, std::abs(E))) return false;
  }
  return true;
}

struct ReplaceOptions {
  long budget = 200000;       // state expansions
  uint64_t seed = 1;
  double improveTol = 1e-12;  // a strictly better state must beat the start by this much
  long maxBatches = 5000;     // up to this many batch moves per state are enumerated outright
};

namespace detail {

inline void enumerateBatches(int m, int kmax, std::vector<std::vector<int>>& out) {
  std::vector<int> cur;
  auto rec = [&](auto&& self, int from) -> void {
    if (!cur.empty()) out.push_back(cur);
    if (static_cast<int>(cur.size()) == kmax) return;
    for (int i = from; i < m; ++i) {
      cur.push_back(i);
      self(self, i + 1);
      cur.pop_back();
    }
  };
  rec(rec, 0);
}

inline double binomSum(int m, int k) {
  double s = 0, c = 1;
  for (int j = 1; j <= k; ++j) {
    c = c * (m - j + 1) / j;
    s += c;
  }
  return s;
}

}  // namespace detail

// Best-first search over the admissible moves of the replacement problem. A
// move flips a batch of at most delta / h^3 cells of K, and every visited state
// keeps energy <= E(start) + delta. If the batches are few enough to enumerate
// and the budget covers the reachable component, the result is the exact
// constrained minimum. Otherwise the batches are single flips plus random pairs
// and the search is a heuristic.
inline ReplaceResult replace(const VoxelRegion& region, const std::vector<int>& Kin, double eps, double delta,
                             const EnergyParams& p, const ReplaceOptions& opts = {}) {
  (void)eps;
  const double h3 = std::pow(region.spacing(), 3);
  if (delta < h3 * (1 - 1e-12))
    throw Error(ErrorCode::InfeasibleConstraint, "delta is below one cell volume, no move is admissible");
  std::vector<int> K;
  for (int id : Kin)
    if (region.inside(id)) K.push_back(id);
  std::sort(K.begin(), K.end());
  K.erase(std::unique(K.begin(), K.end()), K.end());

  ReplaceResult res;
  res.region = region;
  res.region.threshold();
  res.startEnergy = res.energy = regionEnergy(res.region, p).energy;
  if (K.empty()) {
    res.exhaustive = true;
    return res;
  }

  const int m = static_cast<int>(K.size());
  const int kmax = std::min<int>(m, static_cast<int>(std::floor(delta / h3 * (1 + 1e-12))));
  const double cap = res.startEnergy + delta;
  bool full = detail::binomSum(m, kmax) <= opts.maxBatches;
  std::vector<std::vector<int>> batches;
  if (full) {
    detail::enumerateBatches(m, kmax, batches);
  } else {
    for (int i = 0; i < m; ++i) batches.push_back({i});
  }
  std::mt19937_64 rng(opts.seed);

  // states are bit vectors over K relative to the start
  using Key = std::vector<bool>;
  struct Node {
    double E;
    long parent;
    std::vector<int> move;
    Key key;
  };
  std::vector<Node> nodes;
  std::unordered_map<Key, long> seen;
  auto cmp = [&](long a, long b) {
    if (nodes[a].E != nodes[b].E) return nodes[a].E > nodes[b].E;
    return a > b;
  };
  std::priority_queue<long, std::vector<long>, decltype(cmp)> open(cmp);
  nodes.push_back({res.startEnergy, -1, {}, Key(m, false)});
  seen[nodes[0].key] = 0;
  open.push(0);
  long bestNode = 0;

  VoxelRegion x = res.region;
  Key cur(m, false);
  auto moveTo = [&](const Key& k) {
    for (int i = 0; i < m; ++i)
      if (cur[i] != k[i]) x.flip(K[i]);
    cur = k;
  };

  long exp = 0;
  bool exhausted = false;
  while (!open.empty()) {
    if (exp >= opts.budget) break;
    long ni = open.top();
    open.pop();
    ++exp;
    moveTo(nodes[ni].key);
    const double E = nodes[ni].E;
    auto tryBatch = [&](const std::vector<int>& b) {
      Key k = nodes[ni].key;
      for (int i : b) k[i] = !k[i];
      if (seen.count(k)) return;
      std::vector<int> cells;
      std::vector<double> vals;
      for (int i : b) {
        cells.push_back(K[i]);
        vals.push_back(x[K[i]] >= 0.5 ? 0.0 : 1.0);
      }
      double En = E + energyDelta(x, cells, vals, p);
      seen[k] = -1;
      if (En > cap + 1e-12) return;
      nodes.push_back({En, ni, b, k});
      long id = static_cast<long>(nodes.size()) - 1;
      seen[k] = id;
      open.push(id);
      if (En < nodes[bestNode].E - opts.improveTol) bestNode = id;
    };
    for (auto& b : batches) tryBatch(b);
    if (!full && kmax >= 2) {
      std::uniform_int_distribution<int> U(0, m - 1);
      for (int r = 0; r < m; ++r) {
        int a = U(rng), c = U(rng);
        if (a != c) tryBatch({a, c});
      }
    }
  }
  exhausted = open.empty();
  res.expansions = exp;
  res.exhaustive = full && exhausted;

  if (nodes[bestNode].E < res.startEnergy - opts.improveTol) {
    std::vector<long> path;
    for (long q = bestNode; q > 0; q = nodes[q].parent) path.push_back(q);
    std::reverse(path.begin(), path.end());
    for (long q : path) {
      ReplaceStep s;
      for (int i : nodes[q].move) s.cells.push_back(K[i]);
      for (int id : s.cells) res.region.flip(id);
      s.energy = regionEnergy(res.region, p).energy;
      res.trajectory.push_back(std::move(s));
    }
    res.energy = regionEnergy(res.region, p).energy;
  }
  return res;
}

// ---- CAPREG v1 ----

inline void writeCapreg(const VoxelRegion& r, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::InvalidArgument, "cannot write " + path);
  auto n = r.dims();
  char buf[96];
  f << "CAPREG v1\n" << n[0] << ' ' << n[1] << ' ' << n[2] << '\n';
  std::snprintf(buf, sizeof buf, "%.17g %.17g %.17g", r.origin().x(), r.origin().y(), r.origin().z());
  f << "origin " << buf << '\n';
  std::snprintf(buf, sizeof buf, "%.17g", r.spacing());
  f << "spacing " << buf << '\n';
  std::string bytes(r.size(), '\0');
  for (int id = 0; id < r.size(); ++id) bytes[id] = r[id] >= 0.5 ? 1 : 0;
  f.write(bytes.data(), bytes.size());
}

inline VoxelRegion readCapreg(const std::string& path, const AmbientDomain& d) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::InvalidArgument, "cannot read " + path);
  std::string line, tag;
  std::getline(f, line);
  if (line.rfind("CAPREG v1", 0) != 0) throw Error(ErrorCode::ConfigParse, "not a CAPREG v1 file");
  std::array<int, 3> n{};
  Vec3 o;
  double h = 0;
  std::getline(f, line);
  if (!(std::istringstream(line) >> n[0] >> n[1] >> n[2])) throw Error(ErrorCode::ConfigParse, "bad dimension line");
  std::getline(f, line);
  if (!(std::istringstream(line) >> tag >> o.x() >> o.y() >> o.z()) || tag != "origin")
    throw Error(ErrorCode::ConfigParse, "bad origin line");
  std::getline(f, line);
  if (!(std::istringstream(line) >> tag >> h) || tag != "spacing") throw Error(ErrorCode::ConfigParse, "bad spacing line");
  VoxelRegion r(d, n, o, h);
  std::string bytes(r.size(), '\0');
  f.read(bytes.data(), bytes.size());
  if (f.gcount() != static_cast<std::streamsize>(bytes.size())) throw Error(ErrorCode::ConfigParse, "truncated cell data");
  for (int id = 0; id < r.size(); ++id) r.set(id, bytes[id] ? 1.0 : 0.0);
  return r;
}

}  // namespace capillary
