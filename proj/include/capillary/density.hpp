#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <optional>
#include <utility>
#include <vector>

#include "energy.hpp"

namespace capillary {

enum class DensityClass { HalfPlane, TwoSheets, TouchingLow, TouchingHigh, DoubleTouch, DoubleTouchHigh };

inline const char* densityClassName(DensityClass c) {
  switch (c) {
    case DensityClass::HalfPlane: return "halfPlane";
    case DensityClass::TwoSheets: return "twoSheets";
    case DensityClass::TouchingLow: return "touchingLow";
    case DensityClass::TouchingHigh: return "touchingHigh";
    case DensityClass::DoubleTouch: return "doubleTouch";
    case DensityClass::DoubleTouchHigh: return "doubleTouchHigh";
  }
  return "?";
}

inline double densityClassValue(DensityClass c, double theta) {
  const double ct = std::cos(theta);
  switch (c) {
    case DensityClass::HalfPlane: return 0.5 * (1 + ct);
    case DensityClass::TwoSheets: return 1.0;
    case DensityClass::TouchingLow: return 1.0;
    case DensityClass::TouchingHigh: return 1.0 + ct;
    case DensityClass::DoubleTouch: return 2.0;
    case DensityClass::DoubleTouchHigh: return 2.0 + ct;
  }
  return 0.0;
}

struct DensityProbe {
  Vec3 point;
  std::vector<std::pair<double, double>> scan;  // (rho, weighted ratio)
  double extrapolated = 0.0;
  DensityClass cls = DensityClass::HalfPlane;
  double classValue = 0.0;
  bool onBoundaryCurve = false;
  bool monotone = true;
};

struct DensityOptions {
  double rhoMin = 0.0;  // 0 selects 2 h
  double rhoMax = 0.0;  // 0 selects 0.3 diam
  int samples = 16;
  // Planar wetted polygon replacing the one bounded by the mesh boundary,
  // counter-clockwise about etaBar. Used by synthetic touching fixtures.
  std::optional<std::vector<Vec3>> wettedPolygon;
};

namespace detail {

// Signed area of triangle (0, a, b) intersected with the disk |x| <= r.
inline double triangleDiskArea(const Eigen::Vector2d& a, const Eigen::Vector2d& b, double r) {
  auto cross = [](const Eigen::Vector2d& u, const Eigen::Vector2d& v) { return u.x() * v.y() - u.y() * v.x(); };
  Eigen::Vector2d dvec = b - a;
  double A = dvec.squaredNorm(), B = a.dot(dvec), C = a.squaredNorm() - r * r;
  std::vector<double> ts{0.0};
  double disc = B * B - A * C;
  if (A > 0 && disc > 0) {
    double s = std::sqrt(disc);
    for (double t : {(-B - s) / A, (-B + s) / A})
      if (t > 0 && t < 1) ts.push_back(t);
  }
  ts.push_back(1.0);
  double area = 0.0;
  for (size_t k = 0; k + 1 < ts.size(); ++k) {
    Eigen::Vector2d p = a + ts[k] * dvec, q = a + ts[k + 1] * dvec;
    Eigen::Vector2d mid = 0.5 * (p + q);
    if (mid.squaredNorm() <= r * r) area += 0.5 * cross(p, q);
    else area += 0.5 * r * r * std::atan2(cross(p, q), p.dot(q));
  }
  return area;
}

inline double meshAreaInBall(const CapillaryMesh& m, const Vec3& p, double rho) {
  double total = 0.0;
  for (const auto& t : m.triangles) {
    const Vec3 &a = m.vertices[t[0]], &b = m.vertices[t[1]], &c = m.vertices[t[2]];
    Vec3 n = (b - a).cross(c - a);
    double ln = n.norm();
    if (ln <= 0) continue;
    n /= ln;
    double dist = (p - a).dot(n);
    if (std::abs(dist) >= rho) continue;
    Vec3 q = p - dist * n;
    double r = std::sqrt(rho * rho - dist * dist);
    Vec3 g = (a + b + c) / 3.0;
    double reach = std::max({(a - g).norm(), (b - g).norm(), (c - g).norm()});
    if ((g - q).norm() > r + reach) continue;
    Vec3 u = (b - a).normalized(), v = n.cross(u);
    auto loc = [&](const Vec3& x) { return Eigen::Vector2d((x - q).dot(u), (x - q).dot(v)); };
    Eigen::Vector2d A2 = loc(a), B2 = loc(b), C2 = loc(c);
    total += triangleDiskArea(A2, B2, r) + triangleDiskArea(B2, C2, r) + triangleDiskArea(C2, A2, r);
  }
  return total;
}

// Area of the part of a planar polygon (counter-clockwise about n) in the disk of radius rho about p.
inline double polygonDiskArea(const std::vector<Vec3>& poly, const Vec3& p, const Vec3& n, double rho) {
  Vec3 u = anyPerpendicular(n), v = n.cross(u);
  double s = 0.0;
  for (size_t k = 0; k < poly.size(); ++k) {
    const Vec3 &a = poly[k], &b = poly[(k + 1) % poly.size()];
    s += triangleDiskArea({(a - p).dot(u), (a - p).dot(v)}, {(b - p).dot(u), (b - p).dot(v)}, rho);
  }
  return s;
}

inline double wettedAreaInBall(const CapillaryMesh& m, const AmbientDomain& d, const Vec3& p, double rho,
                               const DensityOptions& opt) {
  int w = d.nearestWall(p);
  if (opt.wettedPolygon) return polygonDiskArea(*opt.wettedPolygon, p, d.wallNormal(w, p), rho);
  const auto& topo = *m.topo;
  if (d.planarWalls()) {
    Vec3 n = d.wallNormal(w, p);
    Vec3 u = anyPerpendicular(n), v = n.cross(u);
    double s = 0.0;
    for (size_t li = 0; li < topo.loops.size(); ++li) {
      const auto& loop = topo.loops[li];
      for (size_t k = 0; k < loop.size(); ++k) {
        int a = loop[k], b = loop[(k + 1) % loop.size()];
        if (m.wall[a] != w || m.wall[b] != w) continue;
        const Vec3 &A = m.vertices[a], &B = m.vertices[b];
        // Loops run clockwise about etaBar around the wetted region.
        s -= triangleDiskArea({(A - p).dot(u), (A - p).dot(v)}, {(B - p).dot(u), (B - p).dot(v)}, rho);
      }
    }
    return s;
  }
  // Curved wall: polar quadrature over the spherical cap B_rho(p) on the unit sphere.
  double W = measures(m, d).wettedArea;
  Vec3 e3 = p.normalized(), e1 = anyPerpendicular(e3), e2 = e3.cross(e1);
  const double psiMax = 2 * std::asin(std::min(1.0, rho / 2));
  const int npsi = 32, nphi = 64;
  double s = 0.0;
  for (int i = 0; i < npsi; ++i) {
    double psi = (i + 0.5) * psiMax / npsi;
    for (int j = 0; j < nphi; ++j) {
      double phi = (j + 0.5) * 2 * M_PI / nphi;
      Vec3 x = std::cos(psi) * e3 + std::sin(psi) * (std::cos(phi) * e1 + std::sin(phi) * e2);
      double fan = 0.0;
      for (size_t li = 0; li < topo.loops.size(); ++li) {
        if (topo.loopWall[li] < 0) continue;
        const auto& loop = topo.loops[li];
        for (size_t k = 0; k < loop.size(); ++k)
          fan -= solidAngle<double>(x, m.vertices[loop[k]], m.vertices[loop[(k + 1) % loop.size()]]);
      }
      // The fan from x equals W inside the wetted region and W - 4 pi outside.
      if (fan > W - 2 * M_PI) s += std::sin(psi);
    }
  }
  return s * (psiMax / npsi) * (2 * M_PI / nphi);
}

inline double distanceToWallCurve(const CapillaryMesh& m, const Vec3& p) {
  double best = INFINITY;
  for (int i = 0; i < m.vertexCount(); ++i) {
    if (m.wall[i] < 0) continue;
    int j = m.topo->next[i];
    const Vec3 &a = m.vertices[i], &b = m.vertices[j];
    Vec3 e = b - a;
    double t = std::clamp((p - a).dot(e) / std::max(e.squaredNorm(), 1e-300), 0.0, 1.0);
    best = std::min(best, (a + t * e - p).norm());
  }
  return best;
}

}  // namespace detail

inline double weightedDensityRatio(const CapillaryMesh& m, const AmbientDomain& d, const EnergyParams& par,
                                   const Vec3& p, double rho, const DensityOptions& opt = {}) {
  double a = detail::meshAreaInBall(m, p, rho);
  double w = detail::wettedAreaInBall(m, d, p, rho, opt);
  return (a + std::cos(par.theta) * w) / (M_PI * rho * rho);
}

// Density ratio scan at a wall point: monotonicity of exp(delta rho) ratio
// with delta = 4 (|c| + max|II|), and the rho -> 0 class by linear extrapolation.
inline DensityProbe densityProbe(const CapillaryMesh& m, const AmbientDomain& d, const EnergyParams& par,
                                 const Vec3& p, const DensityOptions& opt = {}) {
  DensityProbe out;
  out.point = p;
  const double h = meanEdgeLength(m);
  const double rmin = opt.rhoMin > 0 ? opt.rhoMin : 2 * h;
  const double rmax = opt.rhoMax > 0 ? opt.rhoMax : 0.3 * diameter(m);
  const double delta = 4 * (std::abs(par.c) + d.maxWallCurvature());
  const int n = std::max(opt.samples, 4);
  double prev = -INFINITY;
  for (int k = 0; k < n; ++k) {
    double rho = rmin * std::pow(rmax / rmin, static_cast<double>(k) / (n - 1));
    double r = weightedDensityRatio(m, d, par, p, rho, opt);
    out.scan.emplace_back(rho, r);
    double weighted = std::exp(delta * rho) * r;
    if (weighted < prev * (1 - 1e-9)) out.monotone = false;
    prev = std::max(prev, weighted);
  }
  // Linear fit in rho over the four smallest radii.
  Eigen::Matrix<double, 4, 2> X;
  Eigen::Vector4d y;
  for (int k = 0; k < 4; ++k) {
    X(k, 0) = 1.0;
    X(k, 1) = out.scan[k].first;
    y(k) = out.scan[k].second;
  }
  Eigen::Vector2d beta = X.colPivHouseholderQr().solve(y);
  out.extrapolated = beta(0);

  out.onBoundaryCurve = m.empty() ? false : detail::distanceToWallCurve(m, p) <= 0.5 * rmin;
  std::vector<DensityClass> cands;
  if (out.onBoundaryCurve) cands = {DensityClass::HalfPlane, DensityClass::TwoSheets};
  else cands = {DensityClass::TouchingLow, DensityClass::TouchingHigh, DensityClass::DoubleTouch, DensityClass::DoubleTouchHigh};
  double best = INFINITY;
  for (auto c : cands) {
    double dv = std::abs(densityClassValue(c, par.theta) - out.extrapolated);
    if (dv < best - 1e-12) {
      best = dv;
      out.cls = c;
    }
  }
  out.classValue = densityClassValue(out.cls, par.theta);
  return out;
}

}  // namespace capillary
