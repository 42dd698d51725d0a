#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "ambient.hpp"
#include "autodiff.hpp"

namespace capillary {

using Tri = std::array<int, 3>;

// Connectivity derived once per triangle list. Loops follow the orientation
// induced by the triangles, i.e. the right-hand rule with the normal nu.
struct Topology {
  int nv = 0;
  std::vector<std::vector<int>> vertexTris;
  std::vector<std::vector<int>> neighbors;
  std::vector<std::vector<int>> loops;
  std::vector<int> loopWall;         // wall index when every loop vertex is on that wall, else -1
  std::vector<char> topoBoundary;    // vertex on a boundary edge
  std::vector<int> prev, next;       // along the loop, -1 off the boundary
  std::vector<int> loopOf;
};

struct CapillaryMesh {
  std::vector<Vec3> vertices;
  std::vector<Tri> triangles;
  std::vector<int> wall;      // wall index of constrained boundary vertices, -1 otherwise
  std::vector<char> touching; // interior vertices lying on a wall
  std::shared_ptr<const Topology> topo;

  int vertexCount() const { return static_cast<int>(vertices.size()); }
  int triangleCount() const { return static_cast<int>(triangles.size()); }
  bool isBoundaryVertex(int v) const { return wall[v] >= 0; }
  // On the topological boundary but not on the wall: a cut edge of a patch.
  bool isFreeVertex(int v) const { return topo->topoBoundary[v] && wall[v] < 0; }
  bool empty() const { return triangles.empty(); }
};

inline std::shared_ptr<Topology> buildTopology(int nv, const std::vector<Tri>& tris) {
  auto t = std::make_shared<Topology>();
  t->nv = nv;
  t->vertexTris.assign(nv, {});
  t->neighbors.assign(nv, {});
  std::map<std::pair<int, int>, int> directed;
  for (int f = 0; f < static_cast<int>(tris.size()); ++f) {
    for (int k = 0; k < 3; ++k) {
      int a = tris[f][k], b = tris[f][(k + 1) % 3];
      t->vertexTris[a].push_back(f);
      auto key = std::make_pair(a, b);
      if (directed.count(key))
        throw Error(ErrorCode::MeshDegenerated, "inconsistent orientation or non-manifold edge");
      directed[key] = f;
    }
  }
  t->topoBoundary.assign(nv, 0);
  t->prev.assign(nv, -1);
  t->next.assign(nv, -1);
  t->loopOf.assign(nv, -1);
  for (auto& [e, f] : directed) {
    auto [a, b] = e;
    t->neighbors[a].push_back(b);
    t->neighbors[b].push_back(a);
    if (!directed.count({b, a})) {
      if (t->next[a] >= 0 || t->prev[b] >= 0)
        throw Error(ErrorCode::SelfIntersectingWall, "boundary vertex with two outgoing boundary edges");
      t->next[a] = b;
      t->prev[b] = a;
      t->topoBoundary[a] = t->topoBoundary[b] = 1;
    }
  }
  for (auto& nb : t->neighbors) {
    std::sort(nb.begin(), nb.end());
    nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
  }
  for (int v = 0; v < nv; ++v) {
    if (!t->topoBoundary[v] || t->loopOf[v] >= 0) continue;
    std::vector<int> loop;
    int u = v;
    while (u >= 0 && t->loopOf[u] < 0) {
      t->loopOf[u] = static_cast<int>(t->loops.size());
      loop.push_back(u);
      u = t->next[u];
    }
    if (u != v) throw Error(ErrorCode::NonClosedBoundary, "boundary loop does not close");
    t->loops.push_back(std::move(loop));
  }
  return t;
}

// Derives topology and wall flags. Boundary vertices within tol of a wall
// become wall constrained; interior vertices on a wall are touching points.
inline void finalize(CapillaryMesh& m, const AmbientDomain& d, double tol = 1e-9) {
  auto t = buildTopology(m.vertexCount(), m.triangles);
  m.wall.assign(m.vertexCount(), -1);
  m.touching.assign(m.vertexCount(), 0);
  for (int v = 0; v < m.vertexCount(); ++v) {
    int w = d.wallOf(m.vertices[v], tol);
    if (w < 0) continue;
    if (t->topoBoundary[v]) m.wall[v] = w;
    else m.touching[v] = 1;
  }
  t->loopWall.clear();
  for (auto& loop : t->loops) {
    int w = m.wall[loop[0]];
    for (int v : loop)
      if (m.wall[v] != w) w = -1;
    t->loopWall.push_back(w);
  }
  m.topo = t;
}

inline CapillaryMesh makeMesh(std::vector<Vec3> verts, std::vector<Tri> tris, const AmbientDomain& d) {
  CapillaryMesh m;
  m.vertices = std::move(verts);
  m.triangles = std::move(tris);
  finalize(m, d);
  return m;
}

inline Vec3 areaVector(const Vec3& a, const Vec3& b, const Vec3& c) { return 0.5 * (b - a).cross(c - a); }

inline Vec3 triAreaVector(const CapillaryMesh& m, int f) {
  const auto& t = m.triangles[f];
  return areaVector(m.vertices[t[0]], m.vertices[t[1]], m.vertices[t[2]]);
}

// One third of the incident triangle areas.
inline std::vector<double> vertexAreas(const CapillaryMesh& m) {
  std::vector<double> a(m.vertexCount(), 0.0);
  for (int f = 0; f < m.triangleCount(); ++f) {
    double s = triAreaVector(m, f).norm() / 3.0;
    for (int v : m.triangles[f]) a[v] += s;
  }
  return a;
}

// Area weighted vertex normal; also the direction of the volume gradient.
inline Vec3 vertexAreaNormal(const CapillaryMesh& m, int v) {
  Vec3 n = Vec3::Zero();
  for (int f : m.topo->vertexTris[v]) n += triAreaVector(m, f);
  return n;
}

inline double maxEdgeLength(const CapillaryMesh& m) {
  double h = 0.0;
  for (auto& t : m.triangles)
    for (int k = 0; k < 3; ++k) h = std::max(h, (m.vertices[t[k]] - m.vertices[t[(k + 1) % 3]]).norm());
  return h;
}

inline double meanEdgeLength(const CapillaryMesh& m) {
  double s = 0.0;
  for (auto& t : m.triangles)
    for (int k = 0; k < 3; ++k) s += (m.vertices[t[k]] - m.vertices[t[(k + 1) % 3]]).norm();
  return m.triangles.empty() ? 0.0 : s / (3.0 * m.triangles.size());
}

inline double minTriangleAngle(const CapillaryMesh& m) {
  double best = M_PI;
  for (auto& t : m.triangles)
    for (int k = 0; k < 3; ++k) {
      Vec3 e1 = m.vertices[t[(k + 1) % 3]] - m.vertices[t[k]];
      Vec3 e2 = m.vertices[t[(k + 2) % 3]] - m.vertices[t[k]];
      best = std::min(best, std::atan2(e1.cross(e2).norm(), e1.dot(e2)));
    }
  return best;
}

inline double diameter(const CapillaryMesh& m) {
  if (m.vertices.empty()) return 0.0;
  Vec3 lo = m.vertices[0], hi = m.vertices[0];
  for (auto& p : m.vertices) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  return (hi - lo).norm();
}

// k-ring of v, excluding v.
inline std::vector<int> ring(const CapillaryMesh& m, int v, int k) {
  std::vector<int> out, frontier{v};
  std::vector<int> seen{v};
  for (int r = 0; r < k; ++r) {
    std::vector<int> nf;
    for (int u : frontier)
      for (int w : m.topo->neighbors[u])
        if (std::find(seen.begin(), seen.end(), w) == seen.end()) {
          seen.push_back(w);
          nf.push_back(w);
          out.push_back(w);
        }
    frontier = std::move(nf);
  }
  return out;
}

// ---------------------------------------------------------------- measures

struct SurfaceMeasures {
  double area = 0.0;
  double wettedArea = 0.0;
  double volume = 0.0;
};

template <class T>
struct MeasureTerms {
  T area{0.0};
  T wetted{0.0};
  T volume{0.0};
};

template <class T>
T solidAngle(const Eigen::Matrix<T, 3, 1>& p, const Eigen::Matrix<T, 3, 1>& a, const Eigen::Matrix<T, 3, 1>& b) {
  using std::atan2;
  using std::sqrt;
  T lp = sqrt(p.squaredNorm()), la = sqrt(a.squaredNorm()), lb = sqrt(b.squaredNorm());
  T det = p.dot(a.cross(b));
  T den = lp * la * lb + p.dot(a) * lb + p.dot(b) * la + a.dot(b) * lp;
  return T(2.0) * atan2(det, den);
}

inline Vec3 loopVectorArea(const CapillaryMesh& m, const std::vector<int>& loop) {
  Vec3 va = Vec3::Zero();
  for (size_t i = 0; i < loop.size(); ++i)
    va += 0.5 * m.vertices[loop[i]].cross(m.vertices[loop[(i + 1) % loop.size()]]);
  return va;
}

// Discrete area, wetted area and enclosed volume for positions x (possibly a
// perturbed or dual-valued copy of m.vertices). With strict = false, open
// patches get the local (origin dependent) wall and volume terms, whose
// derivatives are still exact.
template <class T>
MeasureTerms<T> evalMeasures(const std::vector<Eigen::Matrix<T, 3, 1>>& x, const CapillaryMesh& m,
                             const AmbientDomain& d, bool strict) {
  using V = Eigen::Matrix<T, 3, 1>;
  using std::sqrt;
  MeasureTerms<T> r;
  for (const auto& t : m.triangles) {
    const V& a = x[t[0]];
    const V& b = x[t[1]];
    const V& c = x[t[2]];
    V n = (b - a).cross(c - a);
    r.area += T(0.5) * sqrt(n.squaredNorm());
    r.volume += a.dot(b.cross(c)) / T(6.0);
  }
  if (m.empty()) return r;
  const auto& topo = *m.topo;
  std::vector<T> wallW(d.wallCount(), T(0.0));
  T ballC(0.0);
  bool anyBallLoop = false;
  for (size_t li = 0; li < topo.loops.size(); ++li) {
    const auto& loop = topo.loops[li];
    int lw = topo.loopWall[li];
    if (lw < 0 && strict) throw Error(ErrorCode::NonClosedBoundary, "boundary loop leaves the wall");
    if (d.planarWalls()) {
      for (size_t i = 0; i < loop.size(); ++i) {
        int a = loop[i], b = loop[(i + 1) % loop.size()];
        int w = m.wall[a];
        if (w < 0 || m.wall[b] != w) continue;
        Vec3 nb = d.wallNormal(w, m.vertices[a]);
        V eta(T(nb.x()), T(nb.y()), T(nb.z()));
        wallW[w] -= T(0.5) * x[a].cross(x[b]).dot(eta);
      }
    } else {
      if (lw < 0) {
        bool touchesWall = false;
        for (int v : loop) touchesWall = touchesWall || m.wall[v] >= 0;
        if (touchesWall) throw Error(ErrorCode::NonClosedBoundary, "open wall curve on a curved wall");
        continue;
      }
      anyBallLoop = true;
      Vec3 va = loopVectorArea(m, loop);
      if (va.norm() < 1e-14) throw Error(ErrorCode::SelfIntersectingWall, "wall loop with zero vector area");
      Vec3 pd = va.normalized();
      V p(T(pd.x()), T(pd.y()), T(pd.z()));
      for (size_t i = 0; i < loop.size(); ++i) ballC += solidAngle<T>(p, x[loop[i]], x[loop[(i + 1) % loop.size()]]);
    }
  }
  if (anyBallLoop) {
    // W = -sum C (mod 4 pi), taken in [0, 4 pi).
    double cval = toDouble(ballC);
    double k = std::ceil(cval / (4.0 * M_PI) - 1e-12);
    T W = T(4.0 * M_PI * k) - ballC;
    if (toDouble(W) > 4.0 * M_PI - 1e-12) W -= T(4.0 * M_PI);
    wallW[0] = W;
  }
  for (int w = 0; w < d.wallCount(); ++w) {
    r.wetted += wallW[w];
    r.volume += T(d.wallSupport(w) / 3.0) * wallW[w];
  }
  return r;
}

inline SurfaceMeasures measures(const CapillaryMesh& m, const AmbientDomain& d) {
  if (m.empty()) return {};
  auto t = evalMeasures<double>(m.vertices, m, d, true);
  return {t.area, t.wetted, t.volume};
}

// --------------------------------------------------------------- curvature

struct VertexCurvature {
  Vec3 normal = Vec3::UnitZ();
  std::array<Vec3, 2> basis{Vec3::UnitX(), Vec3::UnitY()};
  double H = 0.0;       // cotangent estimate
  double Hfit = 0.0;    // trace of the fitted shape operator
  Mat2 A = Mat2::Zero();
  double A2 = 0.0;
  double lambda1 = 0.0, lambda2 = 0.0;

  double shapeForm(const Vec3& v) const {
    Eigen::Vector2d c(v.dot(basis[0]), v.dot(basis[1]));
    return c.dot(A * c);
  }
};

struct CurvatureField {
  std::vector<VertexCurvature> v;
};

inline double cotangent(const Vec3& a, const Vec3& b) { return a.dot(b) / a.cross(b).norm(); }

// Gradient of the discrete area at vertex i; equals the cotangent formula.
inline Vec3 areaGradientAt(const CapillaryMesh& m, int i) {
  Vec3 g = Vec3::Zero();
  for (int f : m.topo->vertexTris[i]) {
    const auto& t = m.triangles[f];
    int k = t[0] == i ? 0 : (t[1] == i ? 1 : 2);
    const Vec3& b = m.vertices[t[(k + 1) % 3]];
    const Vec3& c = m.vertices[t[(k + 2) % 3]];
    Vec3 n = (b - m.vertices[i]).cross(c - m.vertices[i]);
    double len = n.norm();
    if (len > 0) g += 0.5 * (n / len).cross(c - b);
  }
  return g;
}

// Cotangent-vector mean curvature, normalised so that a discrete critical
// point of area - c vol has H = c exactly in the interior.
inline double cotanMeanCurvature(const CapillaryMesh& m, int i, Vec3* nu = nullptr) {
  Vec3 n = vertexAreaNormal(m, i);
  double ln = n.norm();
  if (ln < 1e-300) throw Error(ErrorCode::DegenerateStar, "zero vertex normal");
  if (nu) *nu = n / ln;
  return areaGradientAt(m, i).dot(n / ln) / (ln / 3.0);
}

// Least-squares quadric z = a x^2 + b xy + c y^2 + d x + e y over the k-ring in
// the frame (t1, t2, nu). Returns the shape operator in an orthonormal basis of
// the fitted tangent plane, with the sign making the outward sphere positive.
inline bool fitQuadric(const std::vector<Vec3>& pts, const Vec3& o, const Vec3& nu, VertexCurvature& out) {
  Vec3 t1 = anyPerpendicular(nu), t2 = nu.cross(t1);
  const int n = static_cast<int>(pts.size());
  if (n < 5) return false;
  Eigen::MatrixXd M(n, 5);
  Eigen::VectorXd z(n);
  double scale = 0.0;
  for (auto& p : pts) scale = std::max(scale, (p - o).norm());
  if (scale <= 0) return false;
  for (int k = 0; k < n; ++k) {
    Vec3 q = (pts[k] - o) / scale;
    double x = q.dot(t1), y = q.dot(t2);
    M.row(k) << x * x, x * y, y * y, x, y;
    z(k) = q.dot(nu);
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(M);
  qr.setThreshold(1e-10);
  if (qr.rank() < 5) return false;
  Eigen::VectorXd s = qr.solve(z);
  double a = s(0) / scale, b = s(1) / scale, c = s(2) / scale, dx = s(3), dy = s(4);
  Eigen::Matrix2d I, II;
  I << 1 + dx * dx, dx * dy, dx * dy, 1 + dy * dy;
  double W = std::sqrt(1 + dx * dx + dy * dy);
  II << 2 * a, b, b, 2 * c;
  II /= -W;
  // Orthonormalise the coordinate tangents T1 = (1,0,dx), T2 = (0,1,dy).
  Eigen::Matrix<double, 3, 2> J;
  J.col(0) = t1 + dx * nu;
  J.col(1) = t2 + dy * nu;
  Eigen::Matrix2d L = I.llt().matrixL();
  Eigen::Matrix2d G = L.transpose().inverse();  // E = J G orthonormal
  Eigen::Matrix<double, 3, 2> E = J * G;
  out.basis = {E.col(0), E.col(1)};
  out.A = G.transpose() * II * G;
  out.A = 0.5 * (out.A + out.A.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(out.A);
  out.lambda1 = es.eigenvalues()(0);
  out.lambda2 = es.eigenvalues()(1);
  out.A2 = out.lambda1 * out.lambda1 + out.lambda2 * out.lambda2;
  out.Hfit = out.lambda1 + out.lambda2;
  return true;
}

inline CurvatureField curvatures(const CapillaryMesh& m) {
  CurvatureField cf;
  cf.v.resize(m.vertexCount());
  for (int i = 0; i < m.vertexCount(); ++i) {
    auto& vc = cf.v[i];
    if (m.topo->vertexTris[i].empty()) continue;
    vc.H = cotanMeanCurvature(m, i, &vc.normal);
    bool ok = false;
    for (int k = 2; k <= 4 && !ok; ++k) {
      auto nb = ring(m, i, k);
      if (nb.size() < 9 && k < 4) continue;
      std::vector<Vec3> pts;
      for (int u : nb) pts.push_back(m.vertices[u]);
      ok = fitQuadric(pts, m.vertices[i], vc.normal, vc);
    }
    if (!ok) throw Error(ErrorCode::DegenerateStar, "quadric fit is singular at vertex " + std::to_string(i));
  }
  return cf;
}

// ---------------------------------------------------------------- contact

struct VertexContact {
  int vertex = -1;
  Vec3 nu, eta, etaBar, nuBar, tangent;
  Vec3 nuAveraged;  // area-weighted one-sided star normal
  double contactAngle = 0.0;
  double edgeWeight = 0.0;  // half the adjacent boundary edge lengths
};

struct ContactData {
  std::vector<VertexContact> v;
  double maxResidual(double theta) const {
    double r = 0.0;
    for (auto& c : v) r = std::max(r, std::abs(c.nu.dot(c.etaBar) - std::cos(theta)));
    return r;
  }
};

// Normal of the quadric fitted over the one-sided 2-ring; second order at the
// boundary where the averaged star normal is only first order.
inline Vec3 boundaryFitNormal(const CapillaryMesh& m, int i, const Vec3& guess) {
  VertexCurvature vc;
  std::vector<Vec3> pts;
  for (int u : ring(m, i, 2)) pts.push_back(m.vertices[u]);
  if (!fitQuadric(pts, m.vertices[i], guess, vc)) return guess;
  Vec3 n = vc.basis[0].cross(vc.basis[1]).normalized();
  return n.dot(guess) < 0 ? Vec3(-n) : n;
}

inline ContactData contactAngles(const CapillaryMesh& m, const AmbientDomain& d) {
  ContactData cd;
  const auto& t = *m.topo;
  for (int i = 0; i < m.vertexCount(); ++i) {
    if (m.wall[i] < 0) continue;
    VertexContact c;
    c.vertex = i;
    c.nuAveraged = vertexAreaNormal(m, i).normalized();
    c.nu = boundaryFitNormal(m, i, c.nuAveraged);
    Vec3 pv = m.vertices[t.prev[i]], nx = m.vertices[t.next[i]];
    c.tangent = (nx - pv).normalized();
    c.etaBar = d.wallNormal(m.wall[i], m.vertices[i]);
    Vec3 eta = c.tangent.cross(c.nu);
    c.eta = (eta - eta.dot(c.nu) * c.nu).normalized();
    Vec3 nb = c.etaBar.cross(c.tangent);
    c.nuBar = (nb - nb.dot(c.etaBar) * c.etaBar).normalized();
    c.contactAngle = std::acos(std::clamp(c.nu.dot(c.etaBar), -1.0, 1.0));
    c.edgeWeight = 0.5 * ((nx - m.vertices[i]).norm() + (pv - m.vertices[i]).norm());
    cd.v.push_back(c);
  }
  return cd;
}

// ------------------------------------------------------------ constructors

// Triangulated hexagon of lattice radius n mapped radially onto the unit disk.
// Rings stay concentric circles; triangles are counter-clockwise seen from +z.
inline void hexDisk(int level, std::vector<Eigen::Vector2d>& pts, std::vector<Tri>& tris) {
  const int n = 1 << level;
  std::map<std::pair<int, int>, int> id;
  pts.clear();
  tris.clear();
  auto inside = [n](int q, int r) { return std::abs(q) <= n && std::abs(r) <= n && std::abs(q + r) <= n; };
  for (int q = -n; q <= n; ++q)
    for (int r = -n; r <= n; ++r) {
      if (!inside(q, r)) continue;
      id[{q, r}] = static_cast<int>(pts.size());
      Eigen::Vector2d x = (q * Eigen::Vector2d(1, 0) + r * Eigen::Vector2d(0.5, std::sqrt(3.0) / 2)) / n;
      int ring = std::max({std::abs(q), std::abs(r), std::abs(q + r)});
      double rad = static_cast<double>(ring) / n;
      double len = x.norm();
      pts.push_back(len > 0 ? Eigen::Vector2d(x / len * rad) : x);
    }
  for (int q = -n; q <= n; ++q)
    for (int r = -n; r <= n; ++r) {
      if (inside(q, r) && inside(q + 1, r) && inside(q, r + 1)) tris.push_back({id[{q, r}], id[{q + 1, r}], id[{q, r + 1}]});
      if (inside(q + 1, r) && inside(q + 1, r + 1) && inside(q, r + 1))
        tris.push_back({id[{q + 1, r}], id[{q + 1, r + 1}], id[{q, r + 1}]});
    }
}

// Capillary cap of radius R in the half-space: sphere centred at height
// R cos(theta) so that <nu, etaBar> = cos(theta) on the contact circle.
inline CapillaryMesh makeSphericalCap(double theta, double R, int level) {
  require(theta > 0 && theta < M_PI, "theta must lie in (0, pi)");
  require(R > 0 && level >= 0, "R > 0 and level >= 0 required");
  std::vector<Eigen::Vector2d> pts;
  std::vector<Tri> tris;
  hexDisk(level, pts, tris);
  const double psiMax = M_PI - theta;
  const Vec3 center(0, 0, R * std::cos(theta));
  std::vector<Vec3> verts;
  for (auto& p : pts) {
    double r = p.norm(), phi = std::atan2(p.y(), p.x());
    double psi = r * psiMax;
    Vec3 x = center + R * Vec3(std::sin(psi) * std::cos(phi), std::sin(psi) * std::sin(phi), std::cos(psi));
    if (r > 1 - 1e-12) x.z() = 0.0;
    verts.push_back(x);
  }
  return makeMesh(std::move(verts), std::move(tris), AmbientDomain::halfSpace());
}

// ---------------------------------------------------------------- OFF I/O

inline void writeOFF(const CapillaryMesh& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write " + path);
  out << "OFF\n" << m.vertexCount() << ' ' << m.triangleCount() << " 0\n";
  out << std::setprecision(17);
  for (auto& p : m.vertices) out << p.x() << ' ' << p.y() << ' ' << p.z() << '\n';
  for (auto& t : m.triangles) out << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
}

inline CapillaryMesh readOFF(const std::string& path, const AmbientDomain& d) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::InvalidArgument, "cannot read " + path);
  std::string magic;
  in >> magic;
  if (magic != "OFF") throw Error(ErrorCode::ConfigParse, path + " is not an OFF file");
  int nv = 0, nf = 0, ne = 0;
  in >> nv >> nf >> ne;
  std::vector<Vec3> verts(nv);
  for (auto& p : verts) in >> p.x() >> p.y() >> p.z();
  std::vector<Tri> tris(nf);
  for (auto& t : tris) {
    int k = 0;
    in >> k >> t[0] >> t[1] >> t[2];
    if (k != 3) throw Error(ErrorCode::ConfigParse, "only triangle faces are supported");
  }
  if (!in) throw Error(ErrorCode::ConfigParse, "truncated OFF file " + path);
  return makeMesh(std::move(verts), std::move(tris), d);
}

}  // namespace capillary
