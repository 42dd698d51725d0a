#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "energy.hpp"
#include "mesh.hpp"

namespace capillary {

// Caps through the wall circle of radius s around a wall point p, in the flat
// half-space model. alpha is the angle between cap and wall measured inside
// the region they bound, so alpha = pi/2 is the half-sphere and smaller alpha
// gives flatter caps inside it.

inline double muUpperBound(double theta) { return theta / (M_PI / 2 - theta); }
inline double defaultMu(double theta) { return 0.25 * muUpperBound(theta); }

inline double barrierAlpha(double gamma, double mu) { return M_PI / 2 - (1 + mu) * (M_PI / 2 - gamma); }

struct Barrier {
  double s = 0.0;
  double gamma = M_PI / 2;
  double mu = 0.0;
  double alphaGamma = M_PI / 2;
  Vec3 p = Vec3::Zero();
  Vec3 center = Vec3::Zero();
  double radius = 0.0;
  double hBound = 0.0;

  double depth() const { return p.z() - center.z(); }
  // height of the cap above the wall at horizontal distance r < s from p
  double height(double r) const { return std::sqrt(std::max(0.0, radius * radius - r * r)) - depth(); }
  double apexHeight() const { return radius - depth(); }
};

inline void checkMu(double mu, double theta) {
  if (!(theta > 0 && theta < M_PI / 2))
    throw Error(ErrorCode::BadMu, "barrier family needs theta in (0, pi/2)");
  if (!(mu > 0 && mu < muUpperBound(theta)))
    throw Error(ErrorCode::BadMu, "mu = " + std::to_string(mu) + " outside (0, " + std::to_string(muUpperBound(theta)) + ")");
}

inline Barrier capBarrier(double s, double gamma, double mu, const Vec3& p, const EnergyParams& params) {
  checkMu(mu, params.theta);
  require(s > 0, "barrier radius must be positive");
  if (!(gamma >= params.theta - 1e-12 && gamma <= M_PI / 2 + 1e-12))
    throw Error(ErrorCode::InvalidArgument, "gamma must lie in [theta, pi/2]");
  require(std::abs(p.z()) < 1e-12, "barrier centre must be a wall point");
  Barrier b;
  b.s = s;
  b.gamma = std::clamp(gamma, params.theta, M_PI / 2);
  b.mu = mu;
  b.alphaGamma = barrierAlpha(b.gamma, mu);
  b.p = p;
  double sa = std::sin(b.alphaGamma);
  b.radius = s / sa;
  b.center = p - Vec3(0, 0, s * std::cos(b.alphaGamma) / sa);
  b.hBound = 2 / b.radius;
  return b;
}

struct BarrierReport {
  double minMeanCurvature = 0.0;
  double maxContactAngle = 0.0;
  bool foliationOrdered = false;
};

struct BarrierSampling {
  int boundary = 64;
  int radial = 64;
  int gammaSteps = 33;
};

inline BarrierReport barrierReport(const Barrier& b, const EnergyParams& params, const BarrierSampling& opt = {}) {
  BarrierReport rep;
  // sphere of radius R: both principal curvatures are 1/R everywhere
  rep.minMeanCurvature = 2 / b.radius;
  rep.maxContactAngle = 0.0;
  for (int k = 0; k < opt.boundary; ++k) {
    double phi = 2 * M_PI * k / opt.boundary;
    Vec3 q = b.p + b.s * Vec3(std::cos(phi), std::sin(phi), 0);
    Vec3 n = (q - b.center).normalized();
    double ang = std::acos(std::clamp(n.z(), -1.0, 1.0));
    rep.maxContactAngle = std::max(rep.maxContactAngle, ang);
  }
  // nested in gamma: the cap height at each radius grows with gamma
  rep.foliationOrdered = true;
  std::vector<double> prev;
  for (int g = 0; g < opt.gammaSteps; ++g) {
    double gamma = params.theta + (M_PI / 2 - params.theta) * g / (opt.gammaSteps - 1);
    Barrier c = capBarrier(b.s, gamma, b.mu, b.p, params);
    std::vector<double> hs(opt.radial);
    for (int i = 0; i < opt.radial; ++i) hs[i] = c.height(b.s * i / opt.radial);
    if (!prev.empty())
      for (int i = 0; i < opt.radial; ++i)
        if (!(hs[i] > prev[i])) rep.foliationOrdered = false;
    prev = std::move(hs);
  }
  return rep;
}

// Largest s with h(s, theta) > c + 0.1.
inline double barrierScale(const EnergyParams& params, double mu) {
  checkMu(mu, params.theta);
  return 2 * std::sin(barrierAlpha(params.theta, mu)) / (std::max(params.c, 0.0) + 0.1);
}

// Largest s0 whose half-sphere misses the theta-cap of radius s2.
inline double innerScale(double s2, double mu, const EnergyParams& params) {
  Barrier b = capBarrier(s2, params.theta, mu, Vec3::Zero(), params);
  auto misses = [&](double s0) {
    const int n = 256;
    for (int i = 0; i <= n; ++i) {
      double r = s2 * i / n;
      if (std::hypot(r, b.height(std::min(r, s2))) <= s0) return false;
    }
    return true;
  };
  double lo = 0, hi = s2;
  for (int it = 0; it < 60; ++it) {
    double mid = 0.5 * (lo + hi);
    (misses(mid) ? lo : hi) = mid;
  }
  return lo;
}

enum class ProbeVerdict { MeetsInteriorly, TangentOnWallOnly, Violation };

inline const char* probeVerdictName(ProbeVerdict v) {
  switch (v) {
    case ProbeVerdict::MeetsInteriorly: return "MeetsInteriorly";
    case ProbeVerdict::TangentOnWallOnly: return "TangentOnWallOnly";
    case ProbeVerdict::Violation: return "Violation";
  }
  return "?";
}

struct ProbeResult {
  ProbeVerdict verdict = ProbeVerdict::MeetsInteriorly;
  std::vector<Vec3> trace;
  Vec3 witness = Vec3::Zero();       // trace point where the sheet is not tangent to the wall
  double witnessTilt = 0.0;          // angle between sheet normal and wall normal there
  double gammaStar = 0.0;            // sliding cap that touches the sheet last
  Vec3 touchPoint = Vec3::Zero();
  bool insideThetaCap = false;       // sheet lies under the theta-cap already
  double sStar = 0.0;
  double s0 = 0.0;
};

struct ProbeOptions {
  double mu = -1;  // < 0: default
  double tangentTol = 0.05;
};

// gamma of the sliding cap on circle radius s2 passing through q
inline double gammaThrough(const Vec3& q, const Vec3& p, double s2, double mu) {
  Vec3 d = q - p;
  double r2 = d.x() * d.x() + d.y() * d.y(), z = d.z();
  double depth = (s2 * s2 - r2 - z * z) / (2 * z);
  double alpha = std::atan2(s2, depth);
  return M_PI / 2 - (M_PI / 2 - alpha) / (1 + mu);
}

inline ProbeResult annulusProbe(const CapillaryMesh& m, const Vec3& p, double s1, double s2, const EnergyParams& params,
                                const ProbeOptions& opt = {}) {
  double mu = opt.mu < 0 ? defaultMu(params.theta) : opt.mu;
  checkMu(mu, params.theta);
  ProbeResult out;
  out.sStar = barrierScale(params, mu);
  if (s2 >= out.sStar) throw Error(ErrorCode::OutOfScale, "outer radius is beyond the barrier scale");
  out.s0 = innerScale(s2, mu, params);
  require(s1 > 0 && s1 < out.s0, "inner radius must lie below the separation scale");

  const double tol = 1e-6 * s2;
  for (const Vec3& x : m.vertices) {
    double r = (x - p).norm();
    if (r < s1 - tol || r > s2 + tol || x.z() < -tol)
      throw Error(ErrorCode::InvalidArgument, "mesh leaves the annulus");
  }

  std::vector<Vec3> normals(m.vertexCount());
  for (int i = 0; i < m.vertexCount(); ++i) {
    normals[i] = vertexAreaNormal(m, i).normalized();
    if (m.topo->topoBoundary[i]) normals[i] = boundaryFitNormal(m, i, normals[i]);
  }
  // trace on the outer sphere: vertices on it and edge crossings
  std::vector<Vec3> tn;
  auto f = [&](int i) { return (m.vertices[i] - p).norm() - s2; };
  for (int i = 0; i < m.vertexCount(); ++i)
    if (std::abs(f(i)) <= tol) {
      out.trace.push_back(m.vertices[i]);
      tn.push_back(normals[i]);
    }
  for (const Tri& t : m.triangles)
    for (int k = 0; k < 3; ++k) {
      int a = t[k], b = t[(k + 1) % 3];
      if (a > b) continue;  // interior edges appear twice
      double fa = f(a), fb = f(b);
      if (std::abs(fa) <= tol || std::abs(fb) <= tol || (fa < 0) == (fb < 0)) continue;
      double w = fa / (fa - fb);
      out.trace.push_back((1 - w) * m.vertices[a] + w * m.vertices[b]);
      tn.push_back(((1 - w) * normals[a] + w * normals[b]).normalized());
    }

  bool interior = false, allTangent = true;
  for (size_t k = 0; k < out.trace.size(); ++k) {
    if (out.trace[k].z() > tol) {
      interior = true;
      break;
    }
    double tilt = std::acos(std::min(1.0, std::abs(tn[k].z())));
    if (tilt > opt.tangentTol && tilt > out.witnessTilt) {
      allTangent = false;
      out.witness = out.trace[k];
      out.witnessTilt = tilt;
    }
  }
  if (out.trace.empty()) throw Error(ErrorCode::InvalidArgument, "mesh does not reach the outer sphere");
  if (interior) {
    out.verdict = ProbeVerdict::MeetsInteriorly;
    return out;
  }
  if (allTangent) {
    out.verdict = ProbeVerdict::TangentOnWallOnly;
    return out;
  }
  out.verdict = ProbeVerdict::Violation;
  double best = -1e300;
  for (const Vec3& x : m.vertices) {
    if (x.z() <= tol) continue;
    double g = gammaThrough(x, p, s2, mu);
    if (g > best) {
      best = g;
      out.touchPoint = x;
    }
  }
  out.insideThetaCap = best < params.theta;
  out.gammaStar = std::clamp(best, params.theta, M_PI / 2);
  return out;
}

}  // namespace capillary
