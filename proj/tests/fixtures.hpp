#pragma once

#include <capillary/density.hpp>
#include <capillary/oracles.hpp>
#include <capillary/region.hpp>
#include <capillary/shapes.hpp>
#include <capillary/solver.hpp>

#include <chrono>
#include <functional>
#include <random>

namespace fixtures {

using namespace capillary;

inline double seconds(const std::function<void()>& f) {
  auto t0 = std::chrono::steady_clock::now();
  f();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Cap with every vertex pushed radially off the centre by up to amp; wall
// vertices move within the wall.
inline CapillaryMesh perturbedCap(double theta, int level, double amp = 0.05, uint32_t seed = 7) {
  CapillaryMesh m = makeSphericalCap(theta, 1, level);
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> U(-1, 1);
  Vec3 c(0, 0, std::cos(theta));
  for (int i = 0; i < m.vertexCount(); ++i) {
    double s = 1 + amp * U(rng);
    if (m.wall[i] >= 0) m.vertices[i].head<2>() *= s;
    else m.vertices[i] = c + s * (m.vertices[i] - c);
  }
  return m;
}

// tolGrad = 0.8 h^4 on the unperturbed mesh of the same level
inline RelaxOptions capRelaxOptions(double theta, int level) {
  RelaxOptions o;
  o.maxIter = 20000;
  double h = meanEdgeLength(makeSphericalCap(theta, 1, level));
  o.tolGrad = 0.8 * h * h * h * h;
  return o;
}

inline SolveReport relaxedCap(double theta, int level) {
  return relax(perturbedCap(theta, level), AmbientDomain::halfSpace(), {2.0, theta}, capRelaxOptions(theta, level));
}

inline CapillaryMesh flipped(CapillaryMesh m, const AmbientDomain& d) {
  for (auto& t : m.triangles) std::swap(t[1], t[2]);
  finalize(m, d);
  return m;
}

inline CapillaryMesh merged(const CapillaryMesh& a, const CapillaryMesh& b, const AmbientDomain& d) {
  std::vector<Vec3> v = a.vertices;
  std::vector<Tri> t = a.triangles;
  const int off = a.vertexCount();
  v.insert(v.end(), b.vertices.begin(), b.vertices.end());
  for (Tri x : b.triangles) t.push_back({x[0] + off, x[1] + off, x[2] + off});
  return makeMesh(std::move(v), std::move(t), d);
}

// wall rectangle, counter-clockwise about etaBar = -e3
inline std::vector<Vec3> wallRect(double x0, double x1, double y0, double y1) {
  return {Vec3(x0, y0, 0), Vec3(x0, y1, 0), Vec3(x1, y1, 0), Vec3(x1, y0, 0)};
}

struct DensityFixture {
  std::string name;
  CapillaryMesh mesh;
  Vec3 probe;
  DensityOptions opts;
  double expected;
};

inline std::vector<DensityFixture> densityFixtures(double theta) {
  const AmbientDomain hs = AmbientDomain::halfSpace();
  std::vector<DensityFixture> out;
  DensityOptions o;
  o.rhoMin = 0.05;
  o.rhoMax = 0.4;
  {
    DensityFixture f{"halfPlane", makeTiltedHalfPlane(theta, 1.0, 2.0, 24, 48), Vec3::Zero(), o,
                     0.5 * (1 + std::cos(theta))};
    f.opts.wettedPolygon = wallRect(-2, 0, -1, 1);
    out.push_back(f);
  }
  {
    // two sheets leaving the same wall line and bounding a dry wedge
    CapillaryMesh a = makeTiltedHalfPlane(theta, 1.0, 2.0, 24, 48);
    CapillaryMesh b = flipped(makeTiltedHalfPlane(M_PI - theta, 1.0, 2.0, 24, 48), hs);
    DensityFixture f{"twoSheets", merged(a, b, hs), Vec3::Zero(), o, 1.0};
    f.opts.wettedPolygon = std::vector<Vec3>{};
    out.push_back(f);
  }
  {
    DensityFixture f{"touchingDry", makeFlatDisk(5, 1.0, 0.0, hs), Vec3::Zero(), o, 1.0};
    f.opts.wettedPolygon = std::vector<Vec3>{};
    out.push_back(f);
  }
  {
    DensityFixture f{"touchingWet", makeFlatDisk(5, 1.0, 0.0, hs), Vec3::Zero(), o, 1 + std::cos(theta)};
    f.opts.wettedPolygon = wallRect(-2, 2, -2, 2);
    out.push_back(f);
  }
  return out;
}

// ---- annulus fixtures around the wall point 0 ----

// Surface of revolution z = f(r) over r in [r0, r1].
inline CapillaryMesh revolution(const std::function<double(double)>& f, double r0, double r1, int nr, int nphi) {
  std::vector<Vec3> v;
  for (int k = 0; k <= nr; ++k) {
    double r = r0 + (r1 - r0) * k / nr;
    for (int j = 0; j < nphi; ++j) {
      double phi = 2 * M_PI * (j + 0.5 * (k % 2)) / nphi;
      v.emplace_back(r * std::cos(phi), r * std::sin(phi), f(r));
    }
  }
  auto id = [nphi](int k, int j) { return k * nphi + ((j % nphi) + nphi) % nphi; };
  std::vector<Tri> t;
  for (int k = 0; k < nr; ++k)
    for (int j = 0; j < nphi; ++j)
      if (k % 2 == 0) {
        t.push_back({id(k, j), id(k, j + 1), id(k + 1, j)});
        t.push_back({id(k, j + 1), id(k + 1, j + 1), id(k + 1, j)});
      } else {
        t.push_back({id(k, j), id(k, j + 1), id(k + 1, j + 1)});
        t.push_back({id(k, j), id(k + 1, j + 1), id(k + 1, j)});
      }
  return makeMesh(std::move(v), std::move(t), AmbientDomain::halfSpace());
}

// Half annulus s1 <= |x| <= s2 of the plane through the wall line along
// direction (cos az, sin az, 0), leaving the wall at angle beta.
inline CapillaryMesh annulusPlane(double beta, double az, double s1, double s2, int nr, int nphi) {
  Vec3 line(std::cos(az), std::sin(az), 0);
  Vec3 across(-std::sin(az), std::cos(az), 0);
  Vec3 up = std::cos(beta) * across + std::sin(beta) * Vec3::UnitZ();
  std::vector<Vec3> v;
  for (int k = 0; k <= nr; ++k) {
    double rho = s1 + (s2 - s1) * k / nr;
    for (int j = 0; j <= nphi; ++j) {
      double phi = M_PI * j / nphi;
      Vec3 x = rho * std::cos(phi) * line + rho * std::sin(phi) * up;
      if (j == 0 || j == nphi) x.z() = 0;
      v.push_back(x);
    }
  }
  auto id = [nphi](int k, int j) { return k * (nphi + 1) + j; };
  std::vector<Tri> t;
  for (int k = 0; k < nr; ++k)
    for (int j = 0; j < nphi; ++j) {
      t.push_back({id(k, j), id(k + 1, j), id(k + 1, j + 1)});
      t.push_back({id(k, j), id(k + 1, j + 1), id(k, j + 1)});
    }
  return makeMesh(std::move(v), std::move(t), AmbientDomain::halfSpace());
}

// sheet lying flat on the wall from rGlue outwards, rising inside
inline CapillaryMesh gluedSheet(double s2, int nr, int nphi) {
  const double rg = 0.8 * s2;
  auto f = [rg](double r) { return r < rg ? 50 * std::pow(rg - r, 3) : 0.0; };
  return revolution(f, 0.5 * s2, s2, nr, nphi);
}

// cone meeting the wall at angle theta exactly on the outer circle
inline CapillaryMesh wallConeSheet(double theta, double s2, double rIn, int nr, int nphi) {
  auto f = [theta, s2](double r) { return (s2 - r) * std::tan(theta); };
  CapillaryMesh m = revolution(f, rIn, s2, nr, nphi);
  for (int j = 0; j < nphi; ++j) m.vertices[nr * nphi + j].z() = 0;
  finalize(m, AmbientDomain::halfSpace());
  return m;
}

// ---- replacement fixtures ----

struct ReplaceFixture {
  VoxelRegion region;
  std::vector<int> K;
  double delta;
  EnergyParams params;
};

inline std::vector<ReplaceFixture> replaceFixtures(int count, uint32_t seed = 3) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> U(0, 1);
  std::vector<ReplaceFixture> out;
  for (int f = 0; f < count; ++f) {
    const double h = 1.0 / 6;
    VoxelRegion r = VoxelRegion::halfSpaceBox(6, 6, h);
    double a = U(rng) * 0.6 - 0.3, b = U(rng) * 0.6 - 0.3, z0 = 0.3 + 0.4 * U(rng);
    r.fillWhere([&](const Vec3& p) { return p.z() < z0 + a * p.x() + b * p.y(); });
    for (int id = 0; id < r.size(); ++id)
      if (U(rng) < 0.08) r.flip(id);
    std::vector<int> K;
    std::uniform_int_distribution<int> C(0, r.size() - 1);
    int ks = 1 + static_cast<int>(rng() % 12);
    while (static_cast<int>(K.size()) < ks) {
      int c = C(rng);
      if (std::find(K.begin(), K.end(), c) == K.end()) K.push_back(c);
    }
    double dl = std::vector<double>{1, 2, 3, 5, 40}[rng() % 5] * h * h * h;
    EnergyParams p{(rng() % 2) ? 1.0 : 0.0, (rng() % 2) ? M_PI / 3 : M_PI / 2};
    out.push_back({r, K, dl, p});
  }
  return out;
}

}  // namespace fixtures
