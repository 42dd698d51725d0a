#pragma once

#include <boost/rational.hpp>

#include <cmath>
#include <optional>
#include <utility>
#include <vector>

#include "stability.hpp"

namespace capillary {

struct SSYInput {
  int n = 3;
  double theta = M_PI / 2;
  double q = 0.0;
  double a = 1.0;
  double b = 1.0;

  void validate() const {
    require(n >= 2 && n <= 5, "dimension must be 2..5");
    require(std::sin(theta) > 0 && theta > 0 && theta < M_PI, "theta must lie in (0, pi)");
    require(q >= 0 && a > 0 && b > 0, "need q >= 0 and a, b > 0");
  }
};

struct SSYConstants {
  double Ctheta = 1.0;
  double cNtheta = 0.0;
  double B = 0.0;
};

// (1 + |cos|)^3 / sin^2
inline double Ctheta(double theta) {
  double x = std::abs(std::cos(theta)), s = std::sin(theta);
  return (1 + x) * (1 + x) * (1 + x) / (s * s);
}
// (1 + |cos|)^2 / (1 - |cos|), the same number written the other way
inline double CthetaAlt(double theta) {
  double x = std::abs(std::cos(theta));
  double t = std::min(theta, M_PI - theta);
  double oneMinus = 2 * std::sin(t / 2) * std::sin(t / 2);  // 1 - |cos|, without cancellation
  return (1 + x) * (1 + x) / oneMinus;
}
inline double cNtheta(int n, double theta) {
  double s = std::sin(theta);
  return 3 * std::sqrt(n - 1.0) * std::abs(std::cos(theta)) / (s * s);
}

inline double ssyB(int n, double C, double cn, double q, double a, double b) {
  double k = 1 + a * cn + (3 + 2 * q) / 2 * cn / b;
  return 2.0 / n + 1 + 2 * q - (3 + 2 * q) / 2 * b * cn - k * (1 + q) * (1 + q) * C;
}

inline SSYConstants constants(const SSYInput& in) {
  in.validate();
  SSYConstants c;
  c.Ctheta = Ctheta(in.theta);
  c.cNtheta = cNtheta(in.n, in.theta);
  c.B = ssyB(in.n, c.Ctheta, c.cNtheta, in.q, in.a, in.b);
  return c;
}

// At theta = pi/2 every constant is rational for rational q, a, b: C = 1, c = 0.
using Rational = boost::rational<long long>;
inline Rational ssyBRightAngle(int n, Rational q, Rational a, Rational b) {
  require(n >= 2 && n <= 5, "dimension must be 2..5");
  (void)a;
  (void)b;
  Rational one(1);
  return Rational(2, n) + one + 2 * q - (one + q) * (one + q);
}

// Sufficient conditions for B > 0, as quadratics alpha + beta C + gamma C^2 > 0.
struct AngleCondition {
  double alpha = 0, beta = 0, gamma = 0;
  double operator()(double C) const { return alpha + beta * C + gamma * C * C; }
  double positiveRoot() const {
    double disc = beta * beta - 4 * alpha * gamma;
    return (-beta - std::sqrt(disc)) / (2 * gamma);
  }
};

inline AngleCondition angleCondition(int n) {
  const double r2 = std::sqrt(2.0), r3 = std::sqrt(3.0);
  switch (n) {
    case 3: return {5.0 / 3 + 3 * r2 / 2, r2 - 1, -5 * r2 / 2};
    case 4: return {1.5 + 3 * r3 / 2, r3 - 1, -5 * r3 / 2};
    case 5: return {32.0 / 5, 29.0 / 4, -27.0 / 2};
  }
  throw Error(ErrorCode::InvalidArgument, "no angle condition for n = " + std::to_string(n));
}

struct Witness {
  double q = 0, a = 1, b = 1, p = 2;
  double B = 0;
};

struct AdmissibleRange {
  std::pair<double, double> thetaInterval{0.0, M_PI};
  std::optional<double> cThreshold;  // C_theta bound for n >= 3
  Witness witness;
};

// theta in (0, pi/2] with C_theta(theta) = C, by bisection; C_theta decreases there.
inline double thetaForCtheta(double C) {
  require(C >= 1, "C_theta is at least 1");
  double lo = 1e-12, hi = M_PI / 2;
  for (int it = 0; it < 200 && hi - lo > 1e-16; ++it) {
    double mid = 0.5 * (lo + hi);
    (Ctheta(mid) > C ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// q over 0, 0.01, ..., 2 with a = b = 1 first, then a, b over a small grid;
// the witness needs B > 0 and 2p > n at the given angle.
inline std::optional<Witness> findWitness(int n, double theta) {
  const double C = Ctheta(theta), cn = cNtheta(n, theta);
  auto scan = [&](double a, double b) -> std::optional<Witness> {
    for (int k = 0; k <= 200; ++k) {
      double q = 0.01 * k;
      double p = 2 + q;
      if (!(2 * p > n)) continue;
      double B = ssyB(n, C, cn, q, a, b);
      if (B > 0) return Witness{q, a, b, p, B};
    }
    return std::nullopt;
  };
  if (auto w = scan(1, 1)) return w;
  for (double a : {0.25, 0.5, 1.0, 2.0, 4.0})
    for (double b : {0.25, 0.5, 1.0, 2.0, 4.0})
      if (auto w = scan(a, b)) return w;
  return std::nullopt;
}

inline AdmissibleRange admissibleRange(int n) {
  require(n >= 2 && n <= 5, "dimension must be 2..5");
  AdmissibleRange r;
  if (n == 2) {
    r.thetaInterval = {0.0, M_PI};
  } else {
    AngleCondition cond = angleCondition(n);
    double C = cond.positiveRoot();
    r.cThreshold = C;
    if (C <= 1) throw Error(ErrorCode::NoWitness, "printed condition excludes every angle");
    double t = thetaForCtheta(C);
    r.thetaInterval = {t, M_PI - t};
  }
  auto w = findWitness(n, M_PI / 2);
  if (!w) throw Error(ErrorCode::NoWitness, "no (q, a, b) with B > 0 and 2p > n");
  r.witness = *w;
  return r;
}

// ------------------------------------------------------------ identity checks

struct IdentityReport {
  double pdeResidualL2 = 0.0;
  double robinResidualL2 = 0.0;
  double curvIdentityResidualL2 = 0.0;
  bool curvBoundSatisfied = true;
  double curvBoundWorstRatio = 0.0;  // max |d_eta |A|^2| / (6 sqrt(n-1) |cot| |A|^3)
  double traceLHS = 0.0, traceRHS = 0.0;
  double almostStabLHS = 0.0, almostStabRHS = 0.0;
  std::vector<double> phi;
};

namespace detail {

// Tangential gradient at vertex i of a scalar field, from a quadratic fit over
// the 2-ring in the tangent plane of n.
inline Vec3 fittedGradient(const CapillaryMesh& m, int i, const Vec3& n, const std::vector<double>& s) {
  Vec3 t1 = anyPerpendicular(n), t2 = n.cross(t1);
  auto nb = ring(m, i, 2);
  std::vector<int> pts;
  for (int u : nb)
    if (u != i) pts.push_back(u);
  const int k = static_cast<int>(pts.size());
  if (k < 5) return Vec3::Zero();
  double scale = 0;
  for (int u : pts) scale = std::max(scale, (m.vertices[u] - m.vertices[i]).norm());
  Eigen::MatrixXd M(k, 5);
  Eigen::VectorXd r(k);
  for (int j = 0; j < k; ++j) {
    Vec3 d = (m.vertices[pts[j]] - m.vertices[i]) / scale;
    double x = d.dot(t1), y = d.dot(t2);
    M.row(j) << x, y, x * x, x * y, y * y;
    r(j) = s[pts[j]] - s[i];
  }
  Eigen::VectorXd c = M.colPivHouseholderQr().solve(r);
  return (c(0) * t1 + c(1) * t2) / scale;
}

// Cubic height-function jet over the k-ring, refitted once in the frame of its
// own normal so the first derivatives vanish; then dA = -(third derivatives).
struct CubicJet {
  bool ok = false;
  Vec3 normal;
  std::array<Vec3, 2> basis;
  Mat2 A;                 // shape operator, outward sphere positive
  std::array<Mat2, 2> dA;  // derivative of A along basis[0], basis[1]

  double form(const Vec3& v) const {
    Eigen::Vector2d c(v.dot(basis[0]), v.dot(basis[1]));
    return c.dot(A * c);
  }
  double normSq() const { return A.squaredNorm(); }
  // directional derivative of |A|^2
  double dNormSq(const Vec3& v) const {
    double a = v.dot(basis[0]), b = v.dot(basis[1]);
    Mat2 D = a * dA[0] + b * dA[1];
    return 2 * (A.array() * D.array()).sum();
  }
};

inline CubicJet cubicJet(const CapillaryMesh& m, int i, Vec3 n, int rings = 3) {
  CubicJet jet;
  std::vector<Vec3> pts;
  for (int u : ring(m, i, rings))
    if (u != i) pts.push_back(m.vertices[u] - m.vertices[i]);
  const int k = static_cast<int>(pts.size());
  if (k < 12) return jet;
  double scale = 0;
  for (auto& p : pts) scale = std::max(scale, p.norm());
  Eigen::VectorXd c;
  Vec3 t1, t2;
  for (int pass = 0; pass < 2; ++pass) {
    t1 = anyPerpendicular(n);
    t2 = n.cross(t1);
    Eigen::MatrixXd M(k, 9);
    Eigen::VectorXd z(k);
    for (int j = 0; j < k; ++j) {
      Vec3 q = pts[j] / scale;
      double x = q.dot(t1), y = q.dot(t2);
      M.row(j) << x, y, x * x, x * y, y * y, x * x * x, x * x * y, x * y * y, y * y * y;
      z(j) = q.dot(n);
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(M);
    if (qr.rank() < 9) return jet;
    c = qr.solve(z);
    if (pass == 0) n = (n - c(0) * t1 - c(1) * t2).normalized();
  }
  jet.ok = true;
  jet.normal = n;
  jet.basis = {t1, t2};
  double s2 = scale, s3 = scale * scale;
  Mat2 hess;
  hess << 2 * c(2), c(3), c(3), 2 * c(4);
  jet.A = -hess / s2;
  Mat2 hx, hy;
  hx << 6 * c(5), 2 * c(6), 2 * c(6), 2 * c(7);
  hy << 2 * c(6), 2 * c(7), 2 * c(7), 6 * c(8);
  jet.dA = {Mat2(-hx / s3), Mat2(-hy / s3)};
  return jet;
}

}  // namespace detail

// phi = 1 - w cos(theta) with w = <nu, etaBar>, the normal part of the
// translation along the wall normal; on a capillary minimal surface
// Delta phi + |A|^2 phi = |A|^2 inside and d_eta phi = q phi on the wall.
inline IdentityReport identityChecks(const CapillaryMesh& m, const AmbientDomain& d, const EnergyParams& p,
                                     const std::vector<double>& f) {
  p.validate();
  require(d.kind() == DomainKind::HalfSpace, "identity checks run in the half-space");
  require(static_cast<int>(f.size()) == m.vertexCount(), "test function needs one value per vertex");
  const double hres = maxMeanCurvatureResidual(m, 0.0);
  if (hres >= 0.05) throw Error(ErrorCode::NotMinimal, "mean curvature residual " + std::to_string(hres));

  const int nv = m.vertexCount();
  const double ct = std::cos(p.theta), st = std::sin(p.theta), cot = ct / st;
  const int dim = 2;
  auto cf = curvatures(m);
  auto contact = contactAngles(m, d);
  auto area = vertexAreas(m);
  const Vec3 etaBar = d.wallNormal(0, Vec3::Zero());

  std::vector<Vec3> nu(nv, Vec3::UnitZ());
  for (int i = 0; i < nv; ++i)
    if (!m.topo->vertexTris[i].empty()) nu[i] = vertexAreaNormal(m, i).normalized();
  for (auto& c : contact.v) nu[c.vertex] = c.nu;

  IdentityReport rep;
  rep.phi.assign(nv, 0.0);
  std::vector<double> A2(nv);
  for (int i = 0; i < nv; ++i) {
    rep.phi[i] = 1 - nu[i].dot(etaBar) * ct;
    A2[i] = cf.v[i].A2;
  }

  Eigen::SparseMatrix<double> L = cotanStiffness(m);
  Eigen::VectorXd ph = Eigen::Map<Eigen::VectorXd>(rep.phi.data(), nv);
  Eigen::VectorXd Lph = L * ph;
  // the equation is checked where the stencil does not reach the boundary
  std::vector<char> nearBoundary(nv, 0);
  for (int i = 0; i < nv; ++i)
    if (m.topo->topoBoundary[i]) {
      nearBoundary[i] = 1;
      for (int u : m.topo->neighbors[i]) nearBoundary[u] = 1;
    }
  double pde = 0;
  for (int i = 0; i < nv; ++i) {
    if (nearBoundary[i] || m.topo->vertexTris[i].empty()) continue;
    double lap = -Lph(i) / area[i];
    double r = lap + A2[i] * rep.phi[i] - A2[i];
    pde += area[i] * r * r;
  }
  rep.pdeResidualL2 = std::sqrt(pde);

  double rob = 0, curv = 0;
  for (auto& c : contact.v) {
    int i = c.vertex;
    // boundary curvature from the cubic jet; the one-sided quadric is only first order there
    auto jet = detail::cubicJet(m, i, c.nu);
    Mat2 A = jet.ok ? jet.A : cf.v[i].A;
    double Aee = jet.ok ? jet.form(c.eta) : cf.v[i].shapeForm(c.eta);
    double q = d.wallSecondForm(0, m.vertices[i], c.nuBar) / st - cot * Aee;
    Vec3 gphi = detail::fittedGradient(m, i, c.nu, rep.phi);
    double r = gphi.dot(c.eta) - q * rep.phi[i];
    rob += c.edgeWeight * r * r;

    double a2 = A.squaredNorm();
    double dA = jet.ok ? jet.dNormSq(c.eta) : detail::fittedGradient(m, i, c.nu, A2).dot(c.eta);
    Eigen::SelfAdjointEigenSolver<Mat2> es(0.5 * (A + A.transpose()));
    double l1 = es.eigenvalues()(0), l2 = es.eigenvalues()(1);
    double sum3 = l1 * l1 * l1 + l2 * l2 * l2;
    double predicted = -2 * cot * (2 * a2 * Aee - sum3);
    curv += c.edgeWeight * (dA - predicted) * (dA - predicted);
    double bound = 6 * std::sqrt(dim - 1.0) * std::abs(cot) * std::pow(a2, 1.5);
    double slack = 1e-10;
    if (std::abs(dA) > bound + slack) rep.curvBoundSatisfied = false;
    if (bound > 0) rep.curvBoundWorstRatio = std::max(rep.curvBoundWorstRatio, std::abs(dA) / bound);
  }
  rep.robinResidualL2 = std::sqrt(rob);
  rep.curvIdentityResidualL2 = std::sqrt(curv);

  // trace inequality for u = |f| and the almost-stability inequality for f
  for (auto& c : contact.v) rep.traceLHS += c.edgeWeight * std::abs(f[c.vertex]);
  double gradL1 = 0, gradL2 = 0, Hu = 0, Af = 0;
  for (const auto& t : m.triangles) {
    const Vec3 &a = m.vertices[t[0]], &b = m.vertices[t[1]], &cc = m.vertices[t[2]];
    Vec3 n = (b - a).cross(cc - a);
    double ar = 0.5 * n.norm();
    if (ar <= 0) continue;
    Vec3 nn = n.normalized();
    // gradient of the linear interpolant
    std::array<double, 3> fu{std::abs(f[t[0]]), std::abs(f[t[1]]), std::abs(f[t[2]])};
    std::array<double, 3> fv{f[t[0]], f[t[1]], f[t[2]]};
    auto grad = [&](const std::array<double, 3>& v) {
      Vec3 g = Vec3::Zero();
      const Vec3* P[3] = {&a, &b, &cc};
      for (int k = 0; k < 3; ++k) {
        Vec3 e = *P[(k + 2) % 3] - *P[(k + 1) % 3];
        g += v[k] * nn.cross(e) / (2 * ar);
      }
      return g;
    };
    gradL1 += ar * grad(fu).norm();
    gradL2 += ar * grad(fv).squaredNorm();
  }
  for (int i = 0; i < nv; ++i) {
    if (m.topo->vertexTris[i].empty()) continue;
    Hu += area[i] * std::abs(cotanMeanCurvature(m, i) * f[i]);
    Af += area[i] * A2[i] * f[i] * f[i];
  }
  rep.traceRHS = (gradL1 + Hu) / st;
  rep.almostStabLHS = Af;
  rep.almostStabRHS = CthetaAlt(p.theta) * gradL2;
  return rep;
}

}  // namespace capillary
