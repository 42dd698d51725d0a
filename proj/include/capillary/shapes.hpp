#pragma once

#include <cmath>
#include <map>
#include <vector>

#include "mesh.hpp"

namespace capillary {

// Geodesic sphere from a subdivided icosahedron, outward oriented.
inline CapillaryMesh makeSphere(int level, double R, const Vec3& center, const AmbientDomain& d) {
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Vec3> v = {{-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0}, {0, -1, t}, {0, 1, t},
                         {0, -1, -t}, {0, 1, -t}, {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}};
  for (auto& p : v) p.normalize();
  std::vector<Tri> f = {{0, 11, 5}, {0, 5, 1}, {0, 1, 7}, {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4},
                        {11, 10, 2}, {10, 7, 6}, {7, 1, 8}, {3, 9, 4}, {3, 4, 2}, {3, 2, 6}, {3, 6, 8},
                        {3, 8, 9}, {4, 9, 5}, {2, 4, 11}, {6, 2, 10}, {8, 6, 7}, {9, 8, 1}};
  for (int l = 0; l < level; ++l) {
    std::map<std::pair<int, int>, int> mid;
    auto midpoint = [&](int a, int b) {
      auto key = std::minmax(a, b);
      auto it = mid.find(key);
      if (it != mid.end()) return it->second;
      v.push_back((v[a] + v[b]).normalized());
      return mid[key] = static_cast<int>(v.size()) - 1;
    };
    std::vector<Tri> nf;
    for (auto& tr : f) {
      int a = midpoint(tr[0], tr[1]), b = midpoint(tr[1], tr[2]), c = midpoint(tr[2], tr[0]);
      nf.push_back({tr[0], a, c});
      nf.push_back({tr[1], b, a});
      nf.push_back({tr[2], c, b});
      nf.push_back({a, b, c});
    }
    f = std::move(nf);
  }
  for (auto& p : v) p = center + R * p;
  return makeMesh(std::move(v), std::move(f), d);
}

// Equatorial disk of the unit ball, nu = +e3, boundary on the unit sphere.
inline CapillaryMesh makeFlatDiskInBall(int level) {
  std::vector<Eigen::Vector2d> pts;
  std::vector<Tri> tris;
  hexDisk(level, pts, tris);
  std::vector<Vec3> verts;
  for (auto& p : pts) {
    Vec3 x(p.x(), p.y(), 0.0);
    if (p.norm() > 1 - 1e-12) x.normalize();
    verts.push_back(x);
  }
  return makeMesh(std::move(verts), std::move(tris), AmbientDomain::unitBall());
}

// Flat disk of radius R in the plane x3 = z (a touching sheet when z = 0), nu = +e3.
inline CapillaryMesh makeFlatDisk(int level, double R, double z, const AmbientDomain& d) {
  std::vector<Eigen::Vector2d> pts;
  std::vector<Tri> tris;
  hexDisk(level, pts, tris);
  std::vector<Vec3> verts;
  for (auto& p : pts) verts.emplace_back(R * p.x(), R * p.y(), z);
  return makeMesh(std::move(verts), std::move(tris), d);
}

// Rectangle patch of the plane through the wall line {x1 = x3 = 0} leaving
// the wall in direction (cos beta, 0, sin beta). The outward normal is
// (sin beta, 0, -cos beta), so <nu, etaBar> = cos beta on the wall edge and
// the enclosed side wets {x1 < 0}. The three cut edges are free.
inline CapillaryMesh makeTiltedHalfPlane(double beta, double length, double width, int nu_, int nv_,
                                         const Vec3& shift = Vec3::Zero()) {
  Vec3 up(std::cos(beta), 0.0, std::sin(beta));  // in-plane direction leaving the wall
  std::vector<Vec3> verts;
  for (int j = 0; j <= nv_; ++j)
    for (int i = 0; i <= nu_; ++i) {
      double s = length * i / nu_;
      double y = -0.5 * width + width * j / nv_;
      verts.push_back(shift + s * up + Vec3(0, y, 0));
    }
  auto id = [nu_](int i, int j) { return j * (nu_ + 1) + i; };
  std::vector<Tri> tris;
  for (int j = 0; j < nv_; ++j)
    for (int i = 0; i < nu_; ++i) {
      int a = id(i, j), b = id(i + 1, j), c = id(i + 1, j + 1), e = id(i, j + 1);
      // e2 x up = (sin, 0, -cos) fixes the winding.
      if ((i + j) % 2 == 0) {
        tris.push_back({a, e, c});
        tris.push_back({a, c, b});
      } else {
        tris.push_back({a, e, b});
        tris.push_back({b, e, c});
      }
    }
  return makeMesh(std::move(verts), std::move(tris), AmbientDomain::halfSpace());
}

// Band of the catenoid r = a cosh((z + z0)/a), 0 <= z <= height, whose outward
// (away from the axis) normal meets the wall x3 = 0 with tanh(z0/a) = cos(theta).
// The top circle is a free cut edge.
inline CapillaryMesh makeCatenoidBand(double theta, double a, double height, int nz, int nphi) {
  const double z0 = a * std::atanh(std::cos(theta));
  // Uniform arclength spacing along the profile.
  auto arc = [&](double z) { return a * std::sinh((z + z0) / a) - a * std::sinh(z0 / a); };
  const double total = arc(height);
  auto zOfArc = [&](double s) { return a * std::asinh((s + a * std::sinh(z0 / a)) / a) - z0; };
  std::vector<Vec3> verts;
  for (int k = 0; k <= nz; ++k) {
    double z = k == 0 ? 0.0 : zOfArc(total * k / nz);
    double r = a * std::cosh((z + z0) / a);
    for (int j = 0; j < nphi; ++j) {
      double phi = 2 * M_PI * (j + 0.5 * (k % 2)) / nphi;
      verts.emplace_back(r * std::cos(phi), r * std::sin(phi), z);
    }
  }
  auto id = [nphi](int k, int j) { return k * nphi + ((j % nphi) + nphi) % nphi; };
  std::vector<Tri> tris;
  for (int k = 0; k < nz; ++k)
    for (int j = 0; j < nphi; ++j) {
      // Staggered rows: row k+1 is shifted by half a step when k is even.
      if (k % 2 == 0) {
        tris.push_back({id(k, j), id(k, j + 1), id(k + 1, j)});
        tris.push_back({id(k, j + 1), id(k + 1, j + 1), id(k + 1, j)});
      } else {
        tris.push_back({id(k, j), id(k, j + 1), id(k + 1, j + 1)});
        tris.push_back({id(k, j), id(k + 1, j + 1), id(k + 1, j)});
      }
    }
  return makeMesh(std::move(verts), std::move(tris), AmbientDomain::halfSpace());
}

}  // namespace capillary
