#pragma once

#include <cmath>
#include <vector>

#include "mesh.hpp"

namespace capillary {

struct EnergyParams {
  double c = 0.0;
  double theta = M_PI / 2;

  void validate() const {
    if (!(theta > 0 && theta < M_PI) || std::sin(theta) <= 1e-6)
      throw Error(ErrorCode::InvalidArgument, "contact angle must lie in (0, pi) away from the endpoints");
  }
};

using GradientField = std::vector<Vec3>;

template <class T>
T energyFromTerms(const MeasureTerms<T>& t, const EnergyParams& p) {
  return t.area + T(std::cos(p.theta)) * t.wetted - T(p.c) * t.volume;
}

// area + cos(theta) wetted - c vol. Open patches (free cut edges) use the
// local wall and volume terms; they are meant to be pinned along the cut.
inline double capillaryEnergy(const CapillaryMesh& m, const AmbientDomain& d, const EnergyParams& p) {
  p.validate();
  if (m.empty()) return 0.0;
  return energyFromTerms(evalMeasures<double>(m.vertices, m, d, false), p);
}

inline void projectToWallTangent(const CapillaryMesh& m, const AmbientDomain& d, GradientField& g) {
  for (int i = 0; i < m.vertexCount(); ++i) {
    if (m.wall[i] < 0) continue;
    Vec3 n = d.wallNormal(m.wall[i], m.vertices[i]);
    g[i] -= g[i].dot(n) * n;
  }
}

// Hand-assembled gradient of the discrete energy; rows at wall vertices are
// projected onto the wall tangent plane.
inline GradientField energyGradient(const CapillaryMesh& m, const AmbientDomain& d, const EnergyParams& p) {
  p.validate();
  const double ct = std::cos(p.theta);
  GradientField g(m.vertexCount(), Vec3::Zero());
  if (m.empty()) return g;
  const auto& x = m.vertices;
  for (const auto& t : m.triangles) {
    for (int k = 0; k < 3; ++k) {
      int i = t[k];
      const Vec3& a = x[i];
      const Vec3& b = x[t[(k + 1) % 3]];
      const Vec3& c = x[t[(k + 2) % 3]];
      Vec3 n = (b - a).cross(c - a);
      double len = n.norm();
      if (len > 0) g[i] += 0.5 * (n / len).cross(c - b);
      g[i] -= p.c * b.cross(c) / 6.0;
    }
  }
  const auto& topo = *m.topo;
  for (size_t li = 0; li < topo.loops.size(); ++li) {
    const auto& loop = topo.loops[li];
    const size_t L = loop.size();
    if (d.planarWalls()) {
      for (size_t k = 0; k < L; ++k) {
        int a = loop[k], b = loop[(k + 1) % L];
        int w = m.wall[a];
        if (w < 0 || m.wall[b] != w) continue;
        Vec3 eta = d.wallNormal(w, x[a]);
        double coef = ct - p.c * d.wallSupport(w) / 3.0;
        g[a] += coef * (-0.5 * x[b].cross(eta));
        g[b] += coef * (-0.5 * eta.cross(x[a]));
      }
    } else {
      if (topo.loopWall[li] < 0) continue;
      Vec3 pd = loopVectorArea(m, loop).normalized();
      Eigen::Matrix<DualN<6>, 3, 1> P(DualN<6>(pd.x()), DualN<6>(pd.y()), DualN<6>(pd.z()));
      double coef = ct - p.c / 3.0;
      for (size_t k = 0; k < L; ++k) {
        int a = loop[k], b = loop[(k + 1) % L];
        Eigen::Matrix<DualN<6>, 3, 1> A, B;
        for (int j = 0; j < 3; ++j) {
          A(j) = DualN<6>(x[a](j), 6, j);
          B(j) = DualN<6>(x[b](j), 6, 3 + j);
        }
        auto om = solidAngle<DualN<6>>(P, A, B);
        // W = const - sum of fan solid angles.
        g[a] -= coef * om.derivatives().head<3>();
        g[b] -= coef * om.derivatives().tail<3>();
      }
    }
  }
  projectToWallTangent(m, d, g);
  return g;
}

// Directional derivative of the discrete energy along X, by forward-mode
// differentiation of the same evaluation capillaryEnergy performs.
inline double firstVariation(const CapillaryMesh& m, const AmbientDomain& d, const EnergyParams& p,
                             const std::vector<Vec3>& X) {
  p.validate();
  require(X.size() == m.vertices.size(), "variation field size mismatch");
  for (int i = 0; i < m.vertexCount(); ++i) {
    if (m.wall[i] < 0) continue;
    double nrm = std::abs(X[i].dot(d.wallNormal(m.wall[i], m.vertices[i])));
    if (nrm > 1e-8) throw Error(ErrorCode::NonTangentVariation, "variation leaves the wall at vertex " + std::to_string(i));
  }
  if (m.empty()) return 0.0;
  std::vector<Eigen::Matrix<Dual, 3, 1>> xd(m.vertexCount());
  for (int i = 0; i < m.vertexCount(); ++i)
    for (int j = 0; j < 3; ++j) xd[i](j) = Dual(m.vertices[i](j), Eigen::Matrix<double, 1, 1>(X[i](j)));
  Dual e = energyFromTerms(evalMeasures<Dual>(xd, m, d, false), p);
  return e.derivatives()(0);
}

inline double pairing(const GradientField& g, const std::vector<Vec3>& X) {
  double s = 0.0;
  for (size_t i = 0; i < g.size(); ++i) s += g[i].dot(X[i]);
  return s;
}

inline double maxNorm(const GradientField& g) {
  double s = 0.0;
  for (auto& v : g) s = std::max(s, v.norm());
  return s;
}

}  // namespace capillary
