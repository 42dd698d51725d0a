#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <thread>
#include <vector>

#include "oracles.hpp"
#include "region.hpp"
#include "solver.hpp"
#include "stability.hpp"

namespace capillary {

namespace detail {

inline void parallelFor(int n, int jobs, const std::function<void(int)>& f) {
  jobs = std::max(1, std::min(jobs, n));
  if (jobs == 1) {
    for (int i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::exception_ptr> errs(jobs);
  std::vector<std::thread> pool;
  for (int t = 0; t < jobs; ++t)
    pool.emplace_back([&, t] {
      try {
        for (int i = next++; i < n; i = next++) f(i);
      } catch (...) {
        errs[t] = std::current_exception();
      }
    });
  for (auto& th : pool) th.join();
  for (auto& e : errs)
    if (e) std::rethrow_exception(e);
}

struct StencilTap {
  int di, dj, dk;
  Vec3 c;
};

// coefficients of h * grad u on the 27 neighbours, as in stencilGradient
inline const std::vector<StencilTap>& stencilTaps() {
  static const std::vector<StencilTap> taps = [] {
    const double w[3] = {0.25, 0.5, 0.25};
    std::vector<StencilTap> t;
    for (int dk = -1; dk <= 1; ++dk)
      for (int dj = -1; dj <= 1; ++dj)
        for (int di = -1; di <= 1; ++di) {
          Vec3 c(0.5 * di * w[dj + 1] * w[dk + 1], 0.5 * dj * w[di + 1] * w[dk + 1], 0.5 * dk * w[di + 1] * w[dj + 1]);
          if (c.squaredNorm() > 0) t.push_back({di, dj, dk, c});
        }
    return t;
  }();
  return taps;
}

// Smoothed total-variation energy of a fractional occupancy, (sqrt(|g|^2+eps^2) - eps)
// in place of |g|, with its gradient with respect to every cell.
inline double relaxedEnergy(const VoxelRegion& r, const EnergyParams& p, double eps, std::vector<double>* grad) {
  const auto& taps = stencilTaps();
  const auto n = r.dims();
  const double a = kPerimeterScale * r.spacing() * r.spacing();
  const double h3 = std::pow(r.spacing(), 3);
  const double ct = std::cos(p.theta);
  if (grad) grad->assign(r.size(), 0.0);
  double E = 0;
  int src[26];
  for (int k = 0; k < n[2]; ++k)
    for (int j = 0; j < n[1]; ++j)
      for (int i = 0; i < n[0]; ++i) {
        int id = r.index(i, j, k);
        if (!r.inside(id)) continue;
        double u = r[id];
        E += (ct * r.wallWeight(id) - p.c * h3) * u;
        if (grad) (*grad)[id] += ct * r.wallWeight(id) - p.c * h3;
        Vec3 g = Vec3::Zero();
        bool flat = true;
        for (size_t t = 0; t < taps.size(); ++t) {
          src[t] = r.sourceCell(i + taps[t].di, j + taps[t].dj, k + taps[t].dk);
          double v = src[t] >= 0 ? r[src[t]] : 0.0;
          if (v != u) flat = false;
          g += v * taps[t].c;
        }
        if (flat) continue;
        double s = std::sqrt(g.squaredNorm() + eps * eps);
        E += a * (s - eps);
        if (!grad) continue;
        Vec3 nq = g / s;
        for (size_t t = 0; t < taps.size(); ++t)
          if (src[t] >= 0) (*grad)[src[t]] += a * nq.dot(taps[t].c);
      }
  return E;
}

// Projected steepest descent on the relaxed energy, then back to 0/1.
inline VoxelRegion relaxedDescent(const VoxelRegion& start, const EnergyParams& p, int steps, double eps = 0.05) {
  VoxelRegion u = start;
  const double scale = 1.0 / (kPerimeterScale * start.spacing() * start.spacing());
  std::vector<double> g;
  double E = relaxedEnergy(u, p, eps, &g);
  double tau = 0.5;
  for (int s = 0; s < steps; ++s) {
    bool moved = false;
    for (int tries = 0; tries < 8 && !moved; ++tries, tau *= 0.5) {
      VoxelRegion v = u;
      for (int id = 0; id < v.size(); ++id)
        if (v.inside(id) && g[id] != 0) v.set(id, u[id] - tau * scale * g[id]);
      double En = relaxedEnergy(v, p, eps, nullptr);
      if (En < E) {
        u = std::move(v);
        E = relaxedEnergy(u, p, eps, &g);
        moved = true;
      }
    }
    if (!moved) break;
    tau = std::min(0.5, tau * 4);
  }
  u.threshold();
  return u;
}

// Chamfer distance (3-4-5 weights, in cells) to the set of cells flagged in seed.
inline std::vector<double> chamferDistance(const VoxelRegion& g, const std::vector<char>& seed) {
  const auto n = g.dims();
  std::vector<double> d(g.size(), 1e30);
  for (int id = 0; id < g.size(); ++id)
    if (seed[id]) d[id] = 0;
  auto pass = [&](int dir) {
    int k0 = dir > 0 ? 0 : n[2] - 1, k1 = dir > 0 ? n[2] : -1;
    int j0 = dir > 0 ? 0 : n[1] - 1, j1 = dir > 0 ? n[1] : -1;
    int i0 = dir > 0 ? 0 : n[0] - 1, i1 = dir > 0 ? n[0] : -1;
    for (int k = k0; k != k1; k += dir)
      for (int j = j0; j != j1; j += dir)
        for (int i = i0; i != i1; i += dir) {
          int id = g.index(i, j, k);
          double best = d[id];
          for (int dk = -1; dk <= 0; ++dk)
            for (int dj = -1; dj <= 1; ++dj)
              for (int di = -1; di <= 1; ++di) {
                if (dk == 0 && (dj > 0 || (dj == 0 && di >= 0))) continue;
                int ii = i + dir * di, jj = j + dir * dj, kk = k + dir * dk;
                if (ii < 0 || jj < 0 || kk < 0 || ii >= n[0] || jj >= n[1] || kk >= n[2]) continue;
                int nz = std::abs(di) + std::abs(dj) + std::abs(dk);
                double w = nz == 1 ? 1.0 : nz == 2 ? 4.0 / 3.0 : 5.0 / 3.0;
                best = std::min(best, d[g.index(ii, jj, kk)] + w);
              }
          d[id] = best;
        }
  };
  pass(1);
  pass(-1);
  return d;
}

}  // namespace detail

struct Sweepout {
  std::vector<VoxelRegion> nodes;

  int size() const { return static_cast<int>(nodes.size()); }
  // largest jump of interior-interface mass between neighbouring nodes
  double fineness() const {
    double f = 0;
    for (int i = 0; i + 1 < size(); ++i)
      f = std::max(f, std::abs(interiorPerimeter(nodes[i + 1]) - interiorPerimeter(nodes[i])));
    return f;
  }
  std::vector<double> energies(const EnergyParams& p) const {
    std::vector<double> e;
    for (auto& r : nodes) e.push_back(regionEnergy(r, p).energy);
    return e;
  }
};

enum class HeightFunction { Height, WallPointDistance };

inline HeightFunction parseHeightFunction(const std::string& s) {
  if (s == "height" || s == "x3") return HeightFunction::Height;
  if (s == "wallpoint" || s == "radius") return HeightFunction::WallPointDistance;
  throw Error(ErrorCode::InvalidArgument, "unknown height function '" + s + "'");
}

// Sublevel sets of a Morse function at m equally spaced levels, from empty to M.
inline Sweepout sweepFromMorse(const VoxelRegion& grid, HeightFunction fn, int m) {
  require(m >= 3, "a sweepout needs at least one interior node");
  Vec3 pole = grid.domain().kind() == DomainKind::UnitBall
                  ? Vec3(0, 0, -1)
                  : Vec3(grid.origin().x() + 0.5 * grid.dims()[0] * grid.spacing(),
                         grid.origin().y() + 0.5 * grid.dims()[1] * grid.spacing(), 0);
  auto phi = [&](const Vec3& x) { return fn == HeightFunction::Height ? x.z() : (x - pole).norm(); };
  double lo = INFINITY, hi = -INFINITY;
  for (int id = 0; id < grid.size(); ++id)
    if (grid.inside(id)) {
      double v = phi(grid.center(id));
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  // levels at the centre of the value range; the ends are exactly empty and full
  double a = lo - 0.5 * grid.spacing(), b = hi + 0.5 * grid.spacing();
  Sweepout s;
  for (int k = 0; k < m; ++k) {
    VoxelRegion r = grid;
    double t = a + (b - a) * k / (m - 1);
    if (k == 0) r.fill(0.0);
    else if (k == m - 1) r.fill(1.0);
    else r.fillWhere([&](const Vec3& x) { return phi(x) < t; });
    s.nodes.push_back(std::move(r));
  }
  return s;
}

struct Width {
  double value = -INFINITY;
  int argmaxIndex = 0;
};

inline Width widthOf(const Sweepout& sweep, const EnergyParams& p) {
  require(sweep.size() >= 2, "sweepout has no nodes");
  Width w;
  auto e = sweep.energies(p);
  for (int i = 0; i < sweep.size(); ++i)
    if (e[i] > w.value) {
      w.value = e[i];
      w.argmaxIndex = i;
    }
  return w;
}

// The region a given flat distance from a towards b, switching the cells of
// the symmetric difference in order of their relative chamfer distance.
inline VoxelRegion interpolateRegions(const VoxelRegion& a, const VoxelRegion& b, double flat) {
  if (!a.sameGrid(b)) throw Error(ErrorCode::GridMismatch, "regions live on different grids");
  std::vector<char> s0(a.size(), 0), s1(a.size(), 0);
  std::vector<int> diff;
  for (int id = 0; id < a.size(); ++id) {
    if (!a.inside(id)) continue;
    bool ua = a[id] >= 0.5, ub = b[id] >= 0.5;
    if (ua != ub) diff.push_back(id);
    else (ua ? s1 : s0)[id] = 1;
  }
  const int want = static_cast<int>(std::lround(flat / std::pow(a.spacing(), 3)));
  if (want <= 0) return a;
  if (want >= static_cast<int>(diff.size())) return b;
  auto d0 = detail::chamferDistance(a, s0), d1 = detail::chamferDistance(a, s1);
  std::vector<std::pair<double, int>> order;
  for (int id : diff) {
    bool ub = b[id] >= 0.5;
    double da = ub ? d1[id] : d0[id], db = ub ? d0[id] : d1[id];
    order.push_back({da / (da + db + 1e-12), id});
  }
  std::sort(order.begin(), order.end());
  VoxelRegion r = a;
  for (int t = 0; t < want; ++t) r.flip(order[t].second);
  return r;
}

// Equal flat-distance spacing along the discrete path; endpoints untouched.
// A partial layer between two level sets can cost more than either, so with
// params given an interpolant above cap falls back to the nearer segment end.
inline Sweepout reparametrize(const Sweepout& s, const EnergyParams* p = nullptr, double cap = INFINITY) {
  const int m = s.size();
  std::vector<double> cum(m, 0.0);
  for (int i = 1; i < m; ++i) cum[i] = cum[i - 1] + flatDistance(s.nodes[i - 1], s.nodes[i]);
  Sweepout out;
  out.nodes.push_back(s.nodes.front());
  int seg = 0;
  for (int k = 1; k + 1 < m; ++k) {
    double target = cum.back() * k / (m - 1);
    while (seg + 2 < m && cum[seg + 1] <= target) ++seg;
    VoxelRegion r = interpolateRegions(s.nodes[seg], s.nodes[seg + 1], target - cum[seg]);
    if (p && regionEnergy(r, *p).energy > cap) {
      bool nearA = target - cum[seg] <= cum[seg + 1] - target;
      r = s.nodes[nearA ? seg : seg + 1];
    }
    out.nodes.push_back(std::move(r));
  }
  out.nodes.push_back(s.nodes.back());
  return out;
}

struct PullTightOptions {
  int innerSteps = 3;
  // energy drop per unit flat distance below which a node counts as near-stationary, in units of h
  double stationaryFactor = 10.0;
  int jobs = 1;
};

struct PullTightStats {
  int moved = 0;
  int fixed = 0;
  double threshold = 0.0;
};

inline Sweepout pullTight(const Sweepout& sweep, const EnergyParams& p, int iters, const PullTightOptions& opt = {},
                          PullTightStats* stats = nullptr) {
  require(iters >= 0, "iteration count must be non-negative");
  Sweepout s = sweep;
  if (s.size() < 3) return s;
  const double h = s.nodes[0].spacing();
  const double thr = opt.stationaryFactor * h;
  const double limit = 2 * sweep.fineness();
  PullTightStats st;
  st.threshold = thr;
  for (int it = 0; it < iters; ++it) {
    std::vector<VoxelRegion> trial(s.size());
    std::vector<double> gain(s.size(), 0.0);
    detail::parallelFor(s.size() - 2, opt.jobs, [&](int t) {
      int i = t + 1;
      trial[i] = detail::relaxedDescent(s.nodes[i], p, opt.innerSteps);
      double e0 = regionEnergy(s.nodes[i], p).energy, e1 = regionEnergy(trial[i], p).energy;
      double moved = flatDistance(s.nodes[i], trial[i]);
      gain[i] = moved > 0 ? (e0 - e1) / moved : 0.0;
    });
    for (int i = 1; i + 1 < s.size(); ++i) {
      if (!(gain[i] > thr)) {
        ++st.fixed;
        continue;
      }
      double pt = interiorPerimeter(trial[i]);
      if (std::abs(pt - interiorPerimeter(s.nodes[i - 1])) > limit ||
          std::abs(pt - interiorPerimeter(s.nodes[i + 1])) > limit) {
        ++st.fixed;
        continue;
      }
      s.nodes[i] = std::move(trial[i]);
      ++st.moved;
    }
  }
  if (stats) *stats = st;
  return s;
}

// Surface-net extraction of the 1/2 level set of the occupancy, smoothed by the
// [1 2 1]/4 filter, clipped to M with the cut snapped onto the wall.
inline CapillaryMesh extractInterface(const VoxelRegion& r, int smoothing = 2) {
  const auto n = r.dims();
  const int pad = 2;
  const int N[3] = {n[0] + 2 * pad, n[1] + 2 * pad, n[2] + 2 * pad};
  auto at = [&](int i, int j, int k) { return i + N[0] * (j + N[1] * k); };
  std::vector<double> f(N[0] * N[1] * N[2]);
  for (int k = 0; k < N[2]; ++k)
    for (int j = 0; j < N[1]; ++j)
      for (int i = 0; i < N[0]; ++i) f[at(i, j, k)] = r.sample(i - pad, j - pad, k - pad);
  for (int s = 0; s < smoothing; ++s)
    for (int ax = 0; ax < 3; ++ax) {
      std::vector<double> g = f;
      for (int k = 0; k < N[2]; ++k)
        for (int j = 0; j < N[1]; ++j)
          for (int i = 0; i < N[0]; ++i) {
            int c[3] = {i, j, k};
            int lo[3] = {i, j, k}, hi[3] = {i, j, k};
            lo[ax] = std::max(0, c[ax] - 1);
            hi[ax] = std::min(N[ax] - 1, c[ax] + 1);
            g[at(i, j, k)] = 0.25 * f[at(lo[0], lo[1], lo[2])] + 0.5 * f[at(i, j, k)] + 0.25 * f[at(hi[0], hi[1], hi[2])];
          }
      f = std::move(g);
    }
  const double iso = 0.5, h = r.spacing();
  auto pos = [&](int i, int j, int k) -> Vec3 { return r.origin() + h * Vec3(i - pad + 0.5, j - pad + 0.5, k - pad + 0.5); };

  // one vertex per dual cube with a sign change: mean of its edge crossings
  std::map<int, int> cubeVertex;
  std::vector<Vec3> verts;
  auto cubeId = [&](int i, int j, int k) -> int {
    if (i < 0 || j < 0 || k < 0 || i >= N[0] - 1 || j >= N[1] - 1 || k >= N[2] - 1) return -1;
    int key = at(i, j, k);
    if (auto it = cubeVertex.find(key); it != cubeVertex.end()) return it->second;
    Vec3 sum = Vec3::Zero();
    int cnt = 0;
    for (int e = 0; e < 8; ++e)
      for (int ax = 0; ax < 3; ++ax) {
        int c[3] = {i + (e & 1), j + (e >> 1 & 1), k + (e >> 2 & 1)};
        if (c[ax] != (ax == 0 ? i : ax == 1 ? j : k)) continue;
        int d[3] = {c[0], c[1], c[2]};
        ++d[ax];
        double fa = f[at(c[0], c[1], c[2])] - iso, fb = f[at(d[0], d[1], d[2])] - iso;
        if ((fa >= 0) == (fb >= 0)) continue;
        double t = fa / (fa - fb);
        sum += (1 - t) * pos(c[0], c[1], c[2]) + t * pos(d[0], d[1], d[2]);
        ++cnt;
      }
    if (cnt == 0) return -1;
    verts.push_back(sum / cnt);
    cubeVertex[key] = static_cast<int>(verts.size()) - 1;
    return cubeVertex[key];
  };
  std::vector<Tri> tris;
  for (int k = 0; k < N[2]; ++k)
    for (int j = 0; j < N[1]; ++j)
      for (int i = 0; i < N[0]; ++i)
        for (int ax = 0; ax < 3; ++ax) {
          int c[3] = {i, j, k};
          if (c[ax] + 1 >= N[ax]) continue;
          int d[3] = {i, j, k};
          ++d[ax];
          double fa = f[at(i, j, k)] - iso, fb = f[at(d[0], d[1], d[2])] - iso;
          if ((fa >= 0) == (fb >= 0)) continue;
          int u = (ax + 1) % 3, w = (ax + 2) % 3;
          int q[4];
          bool ok = true;
          const int du[4] = {-1, 0, 0, -1}, dw[4] = {-1, -1, 0, 0};
          for (int s = 0; s < 4; ++s) {
            int e[3] = {i, j, k};
            e[u] += du[s];
            e[w] += dw[s];
            q[s] = cubeId(e[0], e[1], e[2]);
            ok = ok && q[s] >= 0;
          }
          if (!ok) continue;
          // counter-clockwise about +ax; flip when the inside is on the far side
          if (fa < 0) std::swap(q[1], q[3]);
          if ((verts[q[0]] - verts[q[2]]).squaredNorm() <= (verts[q[1]] - verts[q[3]]).squaredNorm()) {
            tris.push_back({q[0], q[1], q[2]});
            tris.push_back({q[0], q[2], q[3]});
          } else {
            tris.push_back({q[0], q[1], q[3]});
            tris.push_back({q[1], q[2], q[3]});
          }
        }

  // clip to M: snap near-wall vertices, then cut the straddling triangles
  const AmbientDomain& dom = r.domain();
  std::vector<double> sd(verts.size());
  for (size_t v = 0; v < verts.size(); ++v) {
    sd[v] = dom.signedDistance(verts[v]);
    if (std::abs(sd[v]) < 0.25 * h) {
      verts[v] = dom.projectToWall(dom.nearestWall(verts[v]), verts[v]);
      sd[v] = 0;
    }
  }
  std::map<std::pair<int, int>, int> cut;
  auto crossing = [&](int a, int b) {
    if (sd[a] == 0) return a;
    if (sd[b] == 0) return b;
    auto key = std::minmax(a, b);
    if (auto it = cut.find(key); it != cut.end()) return it->second;
    double t = sd[a] / (sd[a] - sd[b]);
    Vec3 x = (1 - t) * verts[a] + t * verts[b];
    x = dom.projectToWall(dom.nearestWall(x), x);
    verts.push_back(x);
    sd.push_back(0);
    cut[key] = static_cast<int>(verts.size()) - 1;
    return cut[key];
  };
  std::vector<Tri> kept;
  for (Tri t : tris) {
    int in = 0;
    for (int k = 0; k < 3; ++k) in += sd[t[k]] <= 0;
    int out = 3 - in;
    bool anyNeg = sd[t[0]] < 0 || sd[t[1]] < 0 || sd[t[2]] < 0;
    if (!anyNeg) continue;
    if (out == 0) {
      kept.push_back(t);
      continue;
    }
    // rotate so that the lone vertex (inside for out == 2, outside for out == 1) comes first
    for (int rot = 0; rot < 3; ++rot) {
      bool lone = out == 2 ? sd[t[0]] <= 0 : sd[t[0]] > 0;
      if (lone) break;
      t = {t[1], t[2], t[0]};
    }
    if (out == 2) {
      kept.push_back({t[0], crossing(t[0], t[1]), crossing(t[0], t[2])});
    } else {
      int p1 = crossing(t[1], t[0]), p2 = crossing(t[2], t[0]);
      kept.push_back({p1, t[1], t[2]});
      kept.push_back({p1, t[2], p2});
    }
  }

  // largest connected piece, compacted
  const int nv = static_cast<int>(verts.size());
  std::vector<int> parent(nv);
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int x) { return parent[x] == x ? x : parent[x] = find(parent[x]); };
  for (auto& t : kept) {
    parent[find(t[1])] = find(t[0]);
    parent[find(t[2])] = find(t[0]);
  }
  std::map<int, int> count;
  for (auto& t : kept) ++count[find(t[0])];
  int best = -1, bestCount = 0;
  for (auto [root, c] : count)
    if (c > bestCount) {
      best = root;
      bestCount = c;
    }
  if (best < 0) throw Error(ErrorCode::MeshDegenerated, "region has no interior interface");
  std::vector<int> remap(nv, -1);
  std::vector<Vec3> outV;
  std::vector<Tri> outT;
  for (auto& t : kept) {
    if (find(t[0]) != best) continue;
    Tri nt;
    for (int k = 0; k < 3; ++k) {
      if (remap[t[k]] < 0) {
        remap[t[k]] = static_cast<int>(outV.size());
        outV.push_back(verts[t[k]]);
      }
      nt[k] = remap[t[k]];
    }
    if (nt[0] != nt[1] && nt[1] != nt[2] && nt[0] != nt[2]) outT.push_back(nt);
  }
  return makeMesh(std::move(outV), std::move(outT), dom);
}

struct MountainPassOptions {
  int outerIters = 40;
  int innerSteps = 3;
  bool reparam = true;
  double tol = 1e-4;  // relative width decrease over the stall window
  int stallWindow = 10;
  int pullTightIters = 1;
  double collapseMargin = 0.02;
  int jobs = 1;
  bool extract = true;
  int relaxIters = 300;
  double relaxTol = 1e-4;
  int relaxPatience = 50;  // the critical surface is a saddle: keep the least-gradient iterate
  int spectrumModes = 4;
};

struct HistoryEntry {
  int iter = 0;
  double width = 0.0;
  int argmax = 0;
};

struct MinMaxReport {
  double width = 0.0;
  int argmaxIndex = 0;
  VoxelRegion criticalRegion;
  Sweepout sweep;
  CapillaryMesh extractedMesh;
  ResidualReport residuals;
  std::vector<HistoryEntry> history;
  double stationaryThreshold = 0.0;
  int fixedNodes = 0;
  int morseIndex = -1;
  double lambda1 = 0.0;
  double endEnergy = 0.0;  // max(E(empty), E(M))
};

inline MinMaxReport mountainPass(const Sweepout& start, const EnergyParams& p, const MountainPassOptions& opt = {}) {
  p.validate();
  require(start.size() >= 3, "a sweepout needs at least one interior node");
  MinMaxReport rep;
  double eM = regionEnergy(start.nodes.back(), p).energy;
  double e0 = regionEnergy(start.nodes.front(), p).energy;
  rep.endEnergy = std::max(e0, eM);
  Width w = widthOf(start, p);
  const double margin = opt.collapseMargin * std::abs(w.value);
  if (!(w.value > rep.endEnergy + margin))
    throw Error(ErrorCode::TrivialSweepout, "sweepout width " + std::to_string(w.value) +
                                                " does not exceed the endpoint energy " + std::to_string(rep.endEnergy));
  Sweepout cur = start;
  rep.history.push_back({0, w.value, w.argmaxIndex});
  PullTightOptions pto;
  pto.innerSteps = opt.innerSteps;
  pto.jobs = opt.jobs;
  for (int it = 1; it <= opt.outerIters; ++it) {
    Sweepout next = cur;
    detail::parallelFor(next.size() - 2, opt.jobs, [&](int t) {
      int i = t + 1;
      VoxelRegion d = detail::relaxedDescent(next.nodes[i], p, opt.innerSteps);
      if (regionEnergy(d, p).energy <= regionEnergy(next.nodes[i], p).energy) next.nodes[i] = std::move(d);
    });
    if (opt.reparam) next = reparametrize(next, &p, w.value);
    PullTightStats st;
    next = pullTight(next, p, opt.pullTightIters, pto, &st);
    rep.stationaryThreshold = st.threshold;
    rep.fixedNodes = st.fixed;
    Width wn = widthOf(next, p);
    if (wn.value <= w.value) {
      cur = std::move(next);
      w = wn;
    }
    rep.history.push_back({it, w.value, w.argmaxIndex});
    log::info("mountain pass " + std::to_string(it) + " width " + std::to_string(w.value));
    if (w.value <= rep.endEnergy + margin)
      throw Error(ErrorCode::WidthCollapse, "width fell to the endpoint energy; the sweepout lost its class");
    if (it >= opt.stallWindow) {
      double before = rep.history[it - opt.stallWindow].width;
      if (before - w.value < opt.tol * std::abs(before)) break;
    }
  }
  rep.width = w.value;
  rep.argmaxIndex = w.argmaxIndex;
  rep.sweep = cur;
  rep.criticalRegion = cur.nodes[w.argmaxIndex];
  if (!opt.extract) return rep;

  const AmbientDomain& dom = rep.criticalRegion.domain();
  CapillaryMesh mesh = extractInterface(rep.criticalRegion);
  RelaxOptions ro;
  ro.maxIter = opt.relaxIters;
  ro.tolGrad = opt.relaxTol;
  ro.saddlePatience = opt.relaxPatience;
  SolveReport sr = relax(mesh, dom, p, ro);
  rep.extractedMesh = sr.finalMesh;
  rep.residuals = sr.residuals;
  if (opt.spectrumModes > 0) {
    JacobiForm J = jacobiForm(rep.extractedMesh, dom, p);
    SpectrumReport spec = spectrum(J, opt.spectrumModes);
    rep.morseIndex = spec.morseIndex;
    rep.lambda1 = spec.eigenvalues.empty() ? 0.0 : spec.eigenvalues[0];
  }
  return rep;
}

struct SmallVolumeResult {
  double deltaEmp = 0.0;
  double V0Emp = 0.0;
  int samples = 0;
  double capSlope = 0.0;  // log energy against log volume on analytic small caps
};

struct SmallVolumeOptions {
  uint64_t seed = 7;
  int gridCells = 32;
};

namespace detail {

inline VoxelRegion smallVolumeGrid(const AmbientDomain& d, int n) {
  switch (d.kind()) {
    case DomainKind::UnitBall: return VoxelRegion::ballGrid(n);
    case DomainKind::HalfSpace: return VoxelRegion::halfSpaceBox(n, n / 2, 1.0 / n);
    case DomainKind::Slab: {
      int nz = n / 2;
      double h = d.slabHeight() / nz;
      return VoxelRegion(d, {n, n, nz}, Vec3(-0.5 * n * h, -0.5 * n * h, 0), h);
    }
  }
  return VoxelRegion::ballGrid(n);
}

}  // namespace detail

// Random connected clusters below 5% of the grid's volume of M; the largest delta
// with energy > delta * vol^(2/3) over all of them.
inline SmallVolumeResult smallVolumeBound(const AmbientDomain& d, const EnergyParams& p, int samples,
                                          const SmallVolumeOptions& opt = {}) {
  require(samples >= 100, "small-volume sampling needs at least 100 samples");
  p.validate();
  VoxelRegion grid = detail::smallVolumeGrid(d, opt.gridCells);
  VoxelRegion full = grid;
  full.fill(1.0);
  SmallVolumeResult out;
  out.V0Emp = 0.05 * full.volume();
  const double h3 = std::pow(grid.spacing(), 3);
  const int maxCells = std::max(2, static_cast<int>(out.V0Emp / h3) - 1);
  std::vector<int> inside;
  for (int id = 0; id < grid.size(); ++id)
    if (grid.inside(id)) inside.push_back(id);
  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> U(0, 1);
  const auto n = grid.dims();
  out.deltaEmp = INFINITY;
  for (int s = 0; s < samples; ++s) {
    int target = std::max(1, static_cast<int>(std::exp(U(rng) * std::log(static_cast<double>(maxCells)))));
    int seed = inside[rng() % inside.size()];
    // half the seeds start on the wall
    if (s % 2 == 0) {
      for (int tries = 0; tries < 64; ++tries) {
        int c = inside[rng() % inside.size()];
        if (grid.wallWeight(c) > 0) {
          seed = c;
          break;
        }
      }
    }
    VoxelRegion r = grid;
    std::vector<int> frontier{seed};
    r.set(seed, 1.0);
    int have = 1;
    for (long tries = 0; have < target && tries < 200L * target; ++tries) {
      int pick = frontier[rng() % frontier.size()];
      auto c = r.coords(pick);
      int ax = static_cast<int>(rng() % 3), sg = (rng() & 1) ? 1 : -1;
      c[ax] += sg;
      if (c[ax] < 0 || c[ax] >= n[ax]) continue;
      int q = r.index(c[0], c[1], c[2]);
      if (!r.inside(q) || r[q] >= 0.5) continue;
      r.set(q, 1.0);
      frontier.push_back(q);
      ++have;
    }
    double v = r.volume();
    if (v >= out.V0Emp) continue;
    double e = regionEnergy(r, p).energy;
    out.deltaEmp = std::min(out.deltaEmp, e / std::pow(v, 2.0 / 3.0));
    ++out.samples;
  }
  // analytic flat-wall caps at the contact angle, radii 1e-3 .. 1e-2
  std::vector<double> lx, ly;
  for (int k = 0; k <= 20; ++k) {
    double R = 1e-3 * std::pow(10.0, k / 20.0);
    CapOracle cap{p.theta, R};
    lx.push_back(std::log(cap.volume()));
    ly.push_back(std::log(cap.energyAt(p.c)));
  }
  double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / lx.size();
  double my = std::accumulate(ly.begin(), ly.end(), 0.0) / ly.size();
  double sxy = 0, sxx = 0;
  for (size_t k = 0; k < lx.size(); ++k) {
    sxy += (lx[k] - mx) * (ly[k] - my);
    sxx += (lx[k] - mx) * (lx[k] - mx);
  }
  out.capSlope = sxy / sxx;
  return out;
}

}  // namespace capillary
