#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "solver.hpp"

namespace capillary {

// Second variation of the capillary energy on scalar normal speeds f:
//   Q(f) = int |grad f|^2 - |A|^2 f^2  -  oint q f^2,
//   q = II(nuBar, nuBar) / sin(theta) - cot(theta) A(eta, eta).
// Linear elements, lumped mass, lumped boundary mass. Vertices on a free
// (non-wall) boundary carry Dirichlet conditions and get no degree of freedom.
struct JacobiForm {
  Eigen::SparseMatrix<double> stiffness;  // dof x dof
  Eigen::VectorXd mass;                   // dof, lumped
  std::vector<int> dofVertex;             // dof -> vertex
  std::vector<int> vertexDof;             // vertex -> dof or -1
  std::vector<double> potential;          // |A|^2 per vertex
  std::vector<double> robinCoeff;         // q per vertex, 0 off the wall boundary
  std::vector<double> boundaryMass;       // lumped boundary length per vertex
  std::vector<int> boundaryVertices;
  double scale = 1.0;                     // mesh diameter
  bool critical = true;                   // residuals below 0.1 on assembly
  int vertexCount = 0;

  int dofs() const { return static_cast<int>(dofVertex.size()); }

  Eigen::VectorXd restrictToDofs(const std::vector<double>& f) const {
    Eigen::VectorXd x(dofs());
    for (int k = 0; k < dofs(); ++k) x(k) = f[dofVertex[k]];
    return x;
  }
  std::vector<double> extend(const Eigen::VectorXd& x) const {
    std::vector<double> f(vertexCount, 0.0);
    for (int k = 0; k < dofs(); ++k) f[dofVertex[k]] = x(k);
    return f;
  }
  double form(const std::vector<double>& f, const std::vector<double>& g) const {
    return restrictToDofs(f).dot(stiffness * restrictToDofs(g));
  }
  double massProduct(const std::vector<double>& f, const std::vector<double>& g) const {
    Eigen::VectorXd a = restrictToDofs(f), b = restrictToDofs(g);
    return (a.array() * mass.array() * b.array()).sum();
  }
  double rayleigh(const std::vector<double>& f) const { return form(f, f) / massProduct(f, f); }
};

inline Eigen::SparseMatrix<double> cotanStiffness(const CapillaryMesh& m) {
  std::vector<Eigen::Triplet<double>> trip;
  for (const auto& t : m.triangles)
    for (int k = 0; k < 3; ++k) {
      int i = t[k], j = t[(k + 1) % 3], o = t[(k + 2) % 3];
      double w = 0.5 * cotangent(m.vertices[i] - m.vertices[o], m.vertices[j] - m.vertices[o]);
      trip.emplace_back(i, j, -w);
      trip.emplace_back(j, i, -w);
      trip.emplace_back(i, i, w);
      trip.emplace_back(j, j, w);
    }
  Eigen::SparseMatrix<double> L(m.vertexCount(), m.vertexCount());
  L.setFromTriplets(trip.begin(), trip.end());
  return L;
}

inline JacobiForm jacobiForm(const CapillaryMesh& m, const AmbientDomain& d, const EnergyParams& p) {
  p.validate();
  require(!m.empty(), "jacobiForm needs a non-empty mesh");
  JacobiForm J;
  const int n = m.vertexCount();
  J.vertexCount = n;
  J.scale = diameter(m);
  J.vertexDof.assign(n, -1);
  for (int i = 0; i < n; ++i) {
    if (m.topo->vertexTris[i].empty() || m.isFreeVertex(i)) continue;
    J.vertexDof[i] = static_cast<int>(J.dofVertex.size());
    J.dofVertex.push_back(i);
  }

  double hres = maxMeanCurvatureResidual(m, p.c);
  auto contact = contactAngles(m, d);
  double ares = contact.maxResidual(p.theta);
  J.critical = hres <= 0.1 && ares <= 0.1;
  if (!J.critical)
    log::info("jacobiForm: NotCritical, H residual " + std::to_string(hres) + ", angle residual " +
              std::to_string(ares));

  auto cf = curvatures(m);
  auto area = vertexAreas(m);
  J.potential.assign(n, 0.0);
  for (int i = 0; i < n; ++i) J.potential[i] = cf.v[i].A2;

  J.robinCoeff.assign(n, 0.0);
  J.boundaryMass.assign(n, 0.0);
  const double st = std::sin(p.theta), cot = std::cos(p.theta) / st;
  for (auto& c : contact.v) {
    int i = c.vertex;
    double II = d.wallSecondForm(m.wall[i], m.vertices[i], c.nuBar);
    J.robinCoeff[i] = II / st - cot * cf.v[i].shapeForm(c.eta);
    J.boundaryMass[i] = c.edgeWeight;
    J.boundaryVertices.push_back(i);
  }

  Eigen::SparseMatrix<double> L = cotanStiffness(m);
  std::vector<Eigen::Triplet<double>> trip;
  for (int k = 0; k < L.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(L, k); it; ++it) {
      int a = J.vertexDof[it.row()], b = J.vertexDof[it.col()];
      if (a >= 0 && b >= 0) trip.emplace_back(a, b, it.value());
    }
  J.mass.resize(J.dofs());
  for (int k = 0; k < J.dofs(); ++k) {
    int i = J.dofVertex[k];
    J.mass(k) = area[i];
    trip.emplace_back(k, k, -area[i] * J.potential[i] - J.boundaryMass[i] * J.robinCoeff[i]);
  }
  J.stiffness.resize(J.dofs(), J.dofs());
  J.stiffness.setFromTriplets(trip.begin(), trip.end());
  J.stiffness = 0.5 * (Eigen::SparseMatrix<double>(J.stiffness.transpose()) + J.stiffness);
  return J;
}

// ------------------------------------------------------------------ spectrum

struct SpectrumOptions {
  enum class Mode { Unconstrained, VolumePreserving };
  Mode mode = Mode::Unconstrained;
  // extra per-vertex functions the variations must be mass-orthogonal to
  std::vector<std::vector<double>> constraints;
  int maxLanczos = 300;
  int restarts = 6;
  double residualTol = 1e-9;
  uint64_t seed = 11;
};

struct SpectrumReport {
  std::vector<double> eigenvalues;
  std::vector<std::vector<double>> eigenfunctions;  // per vertex, mass-orthonormal
  int morseIndex = 0;
  double indexTol = 0.0;
  double shift = 0.0;
  int lanczosSteps = 0;
  int cgIterations = 0;
  bool indexSaturated = false;  // every computed eigenvalue was negative
};

namespace detail {

struct CgBreakdown {
  double rayleigh;  // Rayleigh quotient of the offending direction, an upper bound on the bottom
};

// Symmetric operator in mass-scaled coordinates g = M^(1/2) f, restricted to
// the orthogonal complement of the constraint vectors.
struct ScaledOperator {
  const Eigen::SparseMatrix<double>* K;
  Eigen::VectorXd isq;  // M^(-1/2)
  Eigen::MatrixXd C;    // orthonormal constraint columns
  int cg = 0;

  int size() const { return static_cast<int>(isq.size()); }
  void project(Eigen::VectorXd& x) const {
    if (C.cols()) x -= C * (C.transpose() * x);
  }
  Eigen::VectorXd apply(const Eigen::VectorXd& x) const {
    Eigen::VectorXd y = x;
    project(y);
    Eigen::VectorXd z = isq.asDiagonal() * (*K * (isq.asDiagonal() * y));
    project(z);
    return z;
  }
  // (Op - sigma) x = b on the constrained subspace; throws on negative curvature.
  Eigen::VectorXd solveShifted(const Eigen::VectorXd& bin, double sigma) {
    Eigen::VectorXd b = bin;
    project(b);
    Eigen::VectorXd x = Eigen::VectorXd::Zero(size()), r = b, pdir = r;
    double rr = r.squaredNorm();
    const double stop = 1e-26 * std::max(1e-300, b.squaredNorm());
    for (int it = 0; it < 20 * size() + 100 && rr > stop; ++it) {
      Eigen::VectorXd Ap = apply(pdir) - sigma * pdir;
      project(Ap);
      double pAp = pdir.dot(Ap);
      if (!(pAp > 1e-14 * pdir.squaredNorm() * std::max(1.0, std::abs(sigma))))
        throw CgBreakdown{sigma + pAp / pdir.squaredNorm()};
      double a = rr / pAp;
      x += a * pdir;
      r -= a * Ap;
      double rn = r.squaredNorm();
      pdir = r + (rn / rr) * pdir;
      rr = rn;
      ++cg;
    }
    project(x);
    return x;
  }
};

inline Eigen::VectorXd randomUnit(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> N(0, 1);
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v(i) = N(rng);
  return v;
}

// A few plain Lanczos steps; the least Ritz value bounds the spectrum from above.
inline double roughLowest(const ScaledOperator& op, std::mt19937_64& rng, int steps) {
  int n = op.size();
  steps = std::min(steps, n);
  Eigen::MatrixXd V(n, steps);
  Eigen::VectorXd v = randomUnit(n, rng);
  op.project(v);
  v.normalize();
  std::vector<double> al, be;
  int m = 0;
  for (; m < steps; ++m) {
    V.col(m) = v;
    Eigen::VectorXd w = op.apply(v);
    al.push_back(v.dot(w));
    w -= V.leftCols(m + 1) * (V.leftCols(m + 1).transpose() * w);
    double b = w.norm();
    if (b < 1e-12) {
      ++m;
      break;
    }
    be.push_back(b);
    v = w / b;
  }
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, m);
  for (int i = 0; i < m; ++i) {
    T(i, i) = al[i];
    if (i + 1 < m) T(i, i + 1) = T(i + 1, i) = be[i];
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
  return es.eigenvalues()(0);
}

}  // namespace detail

// k smallest eigenpairs of stiffness f = lambda mass f by shift-invert Lanczos
// with full reorthogonalization and conjugate-gradient inner solves. CG needs
// the shifted operator positive, so the shift starts below a plain Lanczos
// estimate of the bottom and is lowered whenever CG meets negative curvature.
inline SpectrumReport spectrum(const JacobiForm& J, int k, const SpectrumOptions& opts = {}) {
  require(k >= 1, "spectrum needs k >= 1");
  detail::ScaledOperator op;
  op.K = &J.stiffness;
  op.isq = J.mass.array().rsqrt();
  const int n = J.dofs();

  std::vector<Eigen::VectorXd> cons;
  if (opts.mode == SpectrumOptions::Mode::VolumePreserving) cons.push_back(J.mass.array().sqrt());
  for (auto& f : opts.constraints) cons.push_back(J.mass.array().sqrt() * J.restrictToDofs(f).array());
  Eigen::MatrixXd C(n, 0);
  for (auto& c : cons) {
    Eigen::VectorXd v = c;
    if (C.cols()) v -= C * (C.transpose() * v);
    if (C.cols()) v -= C * (C.transpose() * v);
    double nv = v.norm();
    if (nv < 1e-10 * std::max(1e-300, c.norm())) continue;
    C.conservativeResize(n, C.cols() + 1);
    C.col(C.cols() - 1) = v / nv;
  }
  op.C = C;
  const int avail = n - static_cast<int>(C.cols());
  require(avail >= k, "fewer free directions than requested eigenpairs");

  std::mt19937_64 rng(opts.seed);
  SpectrumReport rep;
  const double unit = 1.0 / (J.scale * J.scale);
  double top = detail::roughLowest(op, rng, 80);
  double sigma = top - std::max(unit, 0.1 * std::abs(top));

  Eigen::VectorXd start = detail::randomUnit(n, rng);
  int restarts = 0;
  for (int attempt = 0; attempt < 60 && restarts <= opts.restarts; ++attempt) {
    try {
      const int mmax = std::min(avail, std::max(opts.maxLanczos, 4 * k + 20));
      Eigen::MatrixXd V(n, mmax);
      std::vector<double> al, be;
      Eigen::VectorXd v = start;
      op.project(v);
      v.normalize();
      Eigen::MatrixXd Y;
      Eigen::VectorXd lam;
      bool done = false;
      int m = 0;
      for (; m < mmax && !done; ++m) {
        V.col(m) = v;
        Eigen::VectorXd w = op.solveShifted(v, sigma);
        al.push_back(v.dot(w));
        for (int pass = 0; pass < 2; ++pass) w -= V.leftCols(m + 1) * (V.leftCols(m + 1).transpose() * w);
        op.project(w);
        double b = w.norm();
        bool invariant = b < 1e-12 * std::abs(al.back());
        int mm = m + 1;
        if ((mm >= k + 4 && mm % 5 == 0) || invariant || mm == mmax) {
          Eigen::MatrixXd T = Eigen::MatrixXd::Zero(mm, mm);
          for (int i = 0; i < mm; ++i) {
            T(i, i) = al[i];
            if (i + 1 < mm) T(i, i + 1) = T(i + 1, i) = be[i];
          }
          Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
          int kk = std::min(k, mm);
          // largest mu of the inverse are the smallest lambda
          Eigen::MatrixXd S = es.eigenvectors().rightCols(kk).rowwise().reverse();
          Y = V.leftCols(mm) * S;
          // Rayleigh-Ritz on the original operator inside span(Y)
          Eigen::MatrixXd G = Y.transpose() * [&] {
            Eigen::MatrixXd AY(n, kk);
            for (int j = 0; j < kk; ++j) AY.col(j) = op.apply(Y.col(j));
            return AY;
          }();
          Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> rr(0.5 * (G + G.transpose()));
          Y = Y * rr.eigenvectors();
          lam = rr.eigenvalues();
          bool ok = kk == k;
          for (int j = 0; j < kk && ok; ++j) {
            Eigen::VectorXd r = op.apply(Y.col(j)) - lam(j) * Y.col(j);
            ok = r.norm() <= opts.residualTol * std::max(unit, std::abs(lam(j)));
          }
          if (ok) done = true;
          if (invariant && !ok) break;
        }
        if (invariant) {
          ++m;
          break;
        }
        be.push_back(b);
        v = w / b;
      }
      rep.lanczosSteps += m;
      if (!done) {
        ++restarts;
        // explicit restart from the current best approximations
        if (Y.cols()) start = Y.rowwise().sum();
        else start = detail::randomUnit(n, rng);
        continue;
      }
      // lowest eigenvalue below the shift means CG was lucky; re-check strictly
      if (lam(0) <= sigma) throw detail::CgBreakdown{lam(0)};
      rep.shift = sigma;
      rep.cgIterations = op.cg;
      rep.indexTol = 1e-6 * unit;
      for (int j = 0; j < k; ++j) {
        Eigen::VectorXd g = Y.col(j);
        Eigen::VectorXd f = op.isq.asDiagonal() * g;
        rep.eigenvalues.push_back(lam(j));
        rep.eigenfunctions.push_back(J.extend(f));
        if (lam(j) < -rep.indexTol) ++rep.morseIndex;
      }
      rep.indexSaturated = rep.morseIndex == k;
      return rep;
    } catch (const detail::CgBreakdown& b) {
      sigma = std::min(sigma, b.rayleigh) - std::max(unit, 0.25 * std::abs(b.rayleigh));
      log::debug("spectrum: shift lowered to " + std::to_string(sigma));
    }
  }
  throw Error(ErrorCode::NoConvergence, "shift-invert Lanczos did not converge");
}

// Normal components of the horizontal translations; Jacobi fields of any
// capillary surface in the half-space or slab.
inline std::vector<std::vector<double>> translationFields(const CapillaryMesh& m) {
  std::vector<std::vector<double>> out(2, std::vector<double>(m.vertexCount(), 0.0));
  for (int i = 0; i < m.vertexCount(); ++i) {
    if (m.topo->vertexTris[i].empty()) continue;
    Vec3 nu = vertexAreaNormal(m, i).normalized();
    out[0][i] = nu.x();
    out[1][i] = nu.y();
  }
  return out;
}

// Second difference of the energy along the admissible straight-line variation
// with normal speed f: f nu inside, f (nu - cot(theta) eta) on the wall so the
// boundary slides within a planar wall.
inline double secondDifference(const CapillaryMesh& m, const AmbientDomain& d, const EnergyParams& p,
                               const std::vector<double>& f, double t) {
  auto contact = contactAngles(m, d);
  std::vector<Vec3> X(m.vertexCount(), Vec3::Zero());
  for (int i = 0; i < m.vertexCount(); ++i)
    if (!m.topo->vertexTris[i].empty() && !m.isFreeVertex(i)) X[i] = f[i] * vertexAreaNormal(m, i).normalized();
  const double cot = std::cos(p.theta) / std::sin(p.theta);
  for (auto& c : contact.v) {
    Vec3 v = f[c.vertex] * (c.nu - cot * c.eta);
    v -= v.dot(c.etaBar) * c.etaBar;
    X[c.vertex] = v;
  }
  auto shifted = [&](double s) {
    CapillaryMesh y = m;
    for (int i = 0; i < m.vertexCount(); ++i) y.vertices[i] += s * X[i];
    return capillaryEnergy(y, d, p);
  };
  return (shifted(t) + shifted(-t) - 2 * capillaryEnergy(m, d, p)) / (t * t);
}

}  // namespace capillary
