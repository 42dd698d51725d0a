#pragma once


#include <algorithm>
#include <cmath>
#include <vector>

#include "density.hpp"
#include "energy.hpp"
#include "log.hpp"

namespace capillary {

struct RelaxOptions {
  int maxIter = 2000;
  double tolGrad = 1e-6;
  enum class StepRule { Armijo } stepRule = StepRule::Armijo;
  enum class VolumeMode { Auto, Free, Multiplier } volumeMode = VolumeMode::Auto;
  int saddlePatience = 400;  // free mode: iterations without a new least gradient
  double sigma = 0.5;
  double c1 = 1e-4;
  int smoothEvery = 10;
  std::vector<char> pinned;  // extra pinned vertices; free cut vertices are always pinned
};

struct ResidualReport {
  double maxMeanCurvatureResidual = 0.0;
  double maxAngleResidual = 0.0;
  std::vector<DensityProbe> probes;
  bool monotone = true;

  std::vector<DensityClass> classes() const {
    std::vector<DensityClass> c;
    for (auto& p : probes) c.push_back(p.cls);
    return c;
  }
};

struct SolveReport {
  CapillaryMesh finalMesh;
  int iterations = 0;
  double finalEnergy = 0.0;
  double gradientNorm = 0.0;
  ResidualReport residuals;
  bool converged = false;
  std::vector<double> energyHistory;
  double minSheetDistance = INFINITY;
  bool multiplierMode = false;
  int volumeRetargets = 0;
  bool escapedSaddle = false;
  double escapeEnergy = 0.0;  // energy when the free flow was stopped
};

inline double maxMeanCurvatureResidual(const CapillaryMesh& m, double c) {
  double r = 0.0;
  for (int i = 0; i < m.vertexCount(); ++i) {
    if (m.topo->topoBoundary[i] || m.topo->vertexTris[i].empty()) continue;
    r = std::max(r, std::abs(cotanMeanCurvature(m, i) - c));
  }
  return r;
}

inline ResidualReport residuals(const CapillaryMesh& m, const AmbientDomain& d, const EnergyParams& p,
                                const std::vector<Vec3>& probePoints = {}) {
  ResidualReport r;
  r.maxMeanCurvatureResidual = maxMeanCurvatureResidual(m, p.c);
  r.maxAngleResidual = contactAngles(m, d).maxResidual(p.theta);
  for (auto& q : probePoints) {
    r.probes.push_back(densityProbe(m, d, p, q));
    r.monotone = r.monotone && r.probes.back().monotone;
  }
  return r;
}

namespace detail {

inline std::vector<char> pinnedMask(const CapillaryMesh& m, const std::vector<char>& extra) {
  std::vector<char> pin(m.vertexCount(), 0);
  for (int i = 0; i < m.vertexCount(); ++i) {
    pin[i] = m.isFreeVertex(i) || (i < static_cast<int>(extra.size()) && extra[i]);
    if (m.topo->vertexTris[i].empty()) pin[i] = 1;
  }
  return pin;
}

inline void reproject(CapillaryMesh& m, const AmbientDomain& d) {
  for (int i = 0; i < m.vertexCount(); ++i)
    if (m.wall[i] >= 0) m.vertices[i] = d.projectToWall(m.wall[i], m.vertices[i]);
}

inline void flipEdge(CapillaryMesh& m, int f0, int f1, int a, int b) {
  // Triangles (a, b, c) and (b, a, e) become (c, e, b) and (e, c, a).
  auto other = [](const Tri& t, int u, int v) {
    for (int w : t)
      if (w != u && w != v) return w;
    return -1;
  };
  int c = other(m.triangles[f0], a, b), e = other(m.triangles[f1], a, b);
  m.triangles[f0] = {c, e, b};
  m.triangles[f1] = {e, c, a};
}

// Delaunay-style flips of interior edges opposite very small angles.
inline bool repairByFlips(CapillaryMesh& m, const AmbientDomain& d, double minAngle) {
  bool changed = false;
  for (int pass = 0; pass < 5; ++pass) {
    std::map<std::pair<int, int>, int> owner;
    for (int f = 0; f < m.triangleCount(); ++f)
      for (int k = 0; k < 3; ++k) owner[{m.triangles[f][k], m.triangles[f][(k + 1) % 3]}] = f;
    bool any = false;
    for (int f = 0; f < m.triangleCount() && !any; ++f)
      for (int k = 0; k < 3 && !any; ++k) {
        const Tri t = m.triangles[f];
        int a = t[k], b = t[(k + 1) % 3], o = t[(k + 2) % 3];
        double ang = std::atan2((m.vertices[a] - m.vertices[o]).cross(m.vertices[b] - m.vertices[o]).norm(),
                                (m.vertices[a] - m.vertices[o]).dot(m.vertices[b] - m.vertices[o]));
        if (ang < M_PI * 0.75) continue;
        auto it = owner.find({b, a});
        if (it == owner.end()) continue;
        flipEdge(m, f, it->second, a, b);
        any = changed = true;
      }
    if (!any) break;
    finalize(m, d);
  }
  if (changed) finalize(m, d);
  return minTriangleAngle(m) >= minAngle;
}

// Moves vertices toward their neighbour average within the tangent plane.
inline CapillaryMesh tangentialSmooth(const CapillaryMesh& m, const AmbientDomain& d, const std::vector<char>& pin,
                                      double lambda) {
  CapillaryMesh out = m;
  for (int i = 0; i < m.vertexCount(); ++i) {
    if (pin[i]) continue;
    const auto& nb = m.topo->neighbors[i];
    if (nb.empty()) continue;
    Vec3 avg = Vec3::Zero();
    int cnt = 0;
    for (int j : nb) {
      if (m.wall[i] >= 0 && m.wall[j] < 0) continue;
      avg += m.vertices[j];
      ++cnt;
    }
    if (cnt == 0) continue;
    Vec3 delta = lambda * (avg / cnt - m.vertices[i]);
    if (m.wall[i] >= 0) {
      Vec3 tgt = (m.vertices[m.topo->next[i]] - m.vertices[m.topo->prev[i]]).normalized();
      delta = delta.dot(tgt) * tgt;
    } else {
      Vec3 n = vertexAreaNormal(m, i).normalized();
      delta -= delta.dot(n) * n;
    }
    out.vertices[i] += delta;
  }
  reproject(out, d);
  return out;
}

inline double minSheetDistance(const CapillaryMesh& m) {
  // Smallest distance between vertices that are at least three rings apart.
  double best = INFINITY;
  const double h = meanEdgeLength(m);
  for (int i = 0; i < m.vertexCount(); ++i) {
    auto near = ring(m, i, 3);
    for (int j = i + 1; j < m.vertexCount(); ++j) {
      double dist = (m.vertices[i] - m.vertices[j]).norm();
      if (dist > 2 * h || dist >= best) continue;
      if (std::find(near.begin(), near.end(), j) != near.end()) continue;
      best = dist;
    }
  }
  return best;
}

}  // namespace detail

inline GradientField volumeGradient(const CapillaryMesh& m, const AmbientDomain& d) {
  EnergyParams unit{-1.0, M_PI / 2};
  // d/dx of (area - (-1) vol) minus the area part leaves the volume gradient.
  GradientField gv = energyGradient(m, d, unit);
  GradientField ga = energyGradient(m, d, EnergyParams{0.0, M_PI / 2});
  for (size_t i = 0; i < gv.size(); ++i) gv[i] -= ga[i];
  return gv;
}

// Gradient descent with Armijo backtracking on the discrete capillary energy;
// wall vertices slide on the wall and are re-projected every step.
//
// VolumeMode::Free is plain descent. Against a critical point that is a
// saddle (every free cap with c > 0 is a maximum along dilation) it flows
// away, and the iterate of least gradient is returned with escapedSaddle set.
// VolumeMode::Multiplier descends at fixed volume and retargets the volume
// until the Lagrange multiplier equals c, which converges to such caps.
inline SolveReport relax(const CapillaryMesh& input, const AmbientDomain& d, const EnergyParams& p,
                         const RelaxOptions& opts) {
  p.validate();
  require(opts.tolGrad > 0, "tolGrad must be positive");
  SolveReport rep;
  CapillaryMesh x = input;
  detail::reproject(x, d);
  std::vector<char> pin = detail::pinnedMask(x, opts.pinned);
  const double h = meanEdgeLength(x);

  bool closed = !x.empty();
  for (int lw : x.topo->loopWall) closed = closed && lw >= 0;
  bool multiplier = opts.volumeMode == RelaxOptions::VolumeMode::Multiplier ||
                    (opts.volumeMode == RelaxOptions::VolumeMode::Auto && p.c != 0.0 && closed);
  rep.multiplierMode = multiplier;

  auto masked = [&](GradientField g) {
    for (int i = 0; i < x.vertexCount(); ++i)
      if (pin[i]) g[i].setZero();
    return g;
  };
  auto volumeOf = [&](const CapillaryMesh& m) { return evalMeasures<double>(m.vertices, m, d, false).volume; };
  // Newton steps along the volume gradient back onto vol = target.
  auto restoreVolume = [&](CapillaryMesh& m, double target) {
    for (int k = 0; k < 3; ++k) {
      double V = volumeOf(m);
      if (std::abs(V - target) <= 1e-14 * std::max(1.0, std::abs(target))) break;
      GradientField gv = masked(volumeGradient(m, d));
      double nn = pairing(gv, gv);
      if (nn <= 0) break;
      for (int i = 0; i < m.vertexCount(); ++i) m.vertices[i] += (target - V) / nn * gv[i];
      detail::reproject(m, d);
    }
  };

  double Vt = multiplier ? volumeOf(x) : 0.0;
  double E = capillaryEnergy(x, d, p);
  rep.energyHistory.push_back(E);
  GradientField g = masked(energyGradient(x, d, p));
  double bestG = INFINITY;
  CapillaryMesh best = x;
  double bestE = E;
  int sinceBest = 0;

  int it = 0;
  for (; it < opts.maxIter; ++it) {
    const double gn = maxNorm(g);
    if (gn < bestG) {
      bestG = gn;
      best = x;
      bestE = E;
      sinceBest = 0;
    } else if (++sinceBest > opts.saddlePatience && !multiplier) {
      rep.escapedSaddle = true;
      break;
    }
    GradientField dir = g;
    double mu = 0.0, muPart = 0.0;
    GradientField gv;
    if (multiplier) {
      gv = masked(volumeGradient(x, d));
      mu = pairing(g, gv) / pairing(gv, gv);
      for (int i = 0; i < x.vertexCount(); ++i) dir[i] = g[i] - mu * gv[i];
      muPart = std::abs(mu) * maxNorm(gv);
    }
    // a small gradient that is still mostly multiplier mismatch is not done yet
    if (gn <= opts.tolGrad && !(multiplier && muPart > 0.1 * opts.tolGrad && p.c != 0.0)) {
      rep.converged = true;
      break;
    }

    if (multiplier) {
      // Once mostly the multiplier mismatch is left, move the volume target:
      // with H ~ vol^(-1/3), vol (lambda / c)^3 is the secant guess.
      if ((maxNorm(dir) < 0.25 * gn || gn <= opts.tolGrad) && p.c != 0.0) {
        double lambda = p.c + mu;
        double ratio = std::clamp(std::pow(lambda / p.c, 3.0), 0.8, 1.25);
        Vt *= ratio;
        restoreVolume(x, Vt);
        E = capillaryEnergy(x, d, p);
        g = masked(energyGradient(x, d, p));
        ++rep.volumeRetargets;
        rep.energyHistory.push_back(E);
        continue;
      }
    }
    const double slope = pairing(g, dir);
    if (!(slope > 0)) break;
    double t = h / std::max(1.0, maxNorm(g));

    bool accepted = false;
    CapillaryMesh trial = x;
    double Et = E;
    for (int bt = 0; bt < 60; ++bt) {
      for (int i = 0; i < x.vertexCount(); ++i) trial.vertices[i] = x.vertices[i] - t * dir[i];
      detail::reproject(trial, d);
      if (multiplier) restoreVolume(trial, Vt);
      Et = capillaryEnergy(trial, d, p);
      if (Et <= E - opts.c1 * t * slope && Et < E) {
        accepted = true;
        break;
      }
      t *= opts.sigma;
    }
    if (!accepted) break;

    if (minTriangleAngle(trial) < 0.5 * M_PI / 180) {
      if (!detail::repairByFlips(trial, d, 0.5 * M_PI / 180))
        throw Error(ErrorCode::MeshDegenerated, "minimum triangle angle fell below 0.5 degrees");
      pin = detail::pinnedMask(trial, opts.pinned);
      Et = capillaryEnergy(trial, d, p);
    }
    x = std::move(trial);
    E = Et;

    if (opts.smoothEvery > 0 && (it + 1) % opts.smoothEvery == 0) {
      auto s = detail::tangentialSmooth(x, d, pin, 0.3);
      if (multiplier) restoreVolume(s, Vt);
      double Es = capillaryEnergy(s, d, p);
      if (Es < E) {
        x = std::move(s);
        E = Es;
      }
    }
    rep.energyHistory.push_back(E);
    g = masked(energyGradient(x, d, p));
    if (log::level() >= log::Level::Debug && it % 100 == 0)
      log::debug("it " + std::to_string(it) + " E " + std::to_string(E) + " |g| " + std::to_string(maxNorm(g)) +
                 " t " + std::to_string(t) + " minAngle " + std::to_string(minTriangleAngle(x) * 180 / M_PI));
  }
  rep.iterations = it;
  if (rep.escapedSaddle) {
    rep.escapeEnergy = E;
    x = best;
    E = bestE;
    g = masked(energyGradient(x, d, p));
  }
  rep.gradientNorm = maxNorm(g);
  rep.converged = rep.gradientNorm <= opts.tolGrad;
  rep.finalEnergy = E;
  rep.residuals = residuals(x, d, p);
  rep.finalMesh = std::move(x);
  log::debug("relax: " + std::to_string(rep.iterations) + " iterations, |g| = " + std::to_string(rep.gradientNorm));
  return rep;
}

}  // namespace capillary
