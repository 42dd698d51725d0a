#include <gtest/gtest.h>

#include <capillary/bernstein.hpp>
#include <capillary/shapes.hpp>

using namespace capillary;

TEST(Constants, RightAngleValues) {
  SSYConstants c = constants({3, M_PI / 2, 0, 1, 1});
  EXPECT_NEAR(c.Ctheta, 1, 1e-15);
  EXPECT_NEAR(c.cNtheta, 0, 1e-15);
  EXPECT_NEAR(c.B, 2.0 / 3, 1e-12);
  EXPECT_NEAR(constants({2, M_PI / 2, 0.3, 2, 0.5}).Ctheta, 1, 1e-15);
  EXPECT_EQ(ssyBRightAngle(3, 0, 1, 1), Rational(2, 3));
  EXPECT_EQ(ssyBRightAngle(2, Rational(1, 2), 1, 1), Rational(3, 4));
}

TEST(Constants, SqrtTwoTermsCancelAtOne) {
  EXPECT_NEAR(angleCondition(3)(1.0), 2.0 / 3, 1e-14);
}

TEST(Constants, CthetaFormsAgree) {
  for (int k = 1; k < 1000; ++k) {
    double t = M_PI * k / 1000;
    EXPECT_NEAR(Ctheta(t), CthetaAlt(t), 1e-12 * Ctheta(t)) << t;
  }
}

TEST(Constants, InvalidInput) {
  EXPECT_THROW(constants({1, 1, 0, 1, 1}), Error);
  EXPECT_THROW(constants({3, 0, 0, 1, 1}), Error);
  EXPECT_THROW(constants({3, 1, -1, 1, 1}), Error);
  EXPECT_THROW(admissibleRange(6), Error);
}

TEST(Admissible, PlanarCaseIsEveryAngle) {
  AdmissibleRange r = admissibleRange(2);
  EXPECT_EQ(r.thetaInterval.first, 0.0);
  EXPECT_EQ(r.thetaInterval.second, M_PI);
  EXPECT_FALSE(r.cThreshold.has_value());
  EXPECT_GT(r.witness.B, 0);
  EXPECT_GT(2 * r.witness.p, 2);
}

TEST(Admissible, FiveDimensionalThreshold) {
  AdmissibleRange r = admissibleRange(5);
  ASSERT_TRUE(r.cThreshold.has_value());
  double a = 13.5, b = -7.25, c = -6.4;
  EXPECT_NEAR(*r.cThreshold, (-b + std::sqrt(b * b - 4 * a * c)) / (2 * a), 1e-10);
  EXPECT_NEAR(*r.cThreshold, 1.0075, 1e-4);
  EXPECT_NEAR(r.thetaInterval.first + r.thetaInterval.second, M_PI, 1e-12);
  EXPECT_NEAR(Ctheta(r.thetaInterval.first), *r.cThreshold, 1e-9);
  EXPECT_LT(r.thetaInterval.first, M_PI / 2);
}

TEST(Admissible, ThetaForCthetaInverts) {
  for (double t : {0.3, 0.9, 1.4}) EXPECT_NEAR(thetaForCtheta(Ctheta(t)), t, 1e-10);
}

TEST(Identities, TiltedPlane) {
  for (double beta : {M_PI / 4, M_PI / 3, 2.0}) {
    CapillaryMesh m = makeTiltedHalfPlane(beta, 1, 1, 10, 10);
    std::vector<double> f(m.vertexCount(), 1.0);
    IdentityReport r = identityChecks(m, AmbientDomain::halfSpace(), {0, beta}, f);
    EXPECT_LE(r.pdeResidualL2, 1e-8);
    EXPECT_LE(r.robinResidualL2, 1e-8);
    EXPECT_LE(r.curvIdentityResidualL2, 1e-8);
    EXPECT_TRUE(r.curvBoundSatisfied);
    double s2 = std::sin(beta) * std::sin(beta);
    for (double p : r.phi) EXPECT_NEAR(p, s2, 1e-12);
    // the trace inequality needs u = 0 on the cut edges
    std::vector<double> u(m.vertexCount());
    for (int i = 0; i < m.vertexCount(); ++i) u[i] = m.isFreeVertex(i) ? 0.0 : 1.0;
    IdentityReport ru = identityChecks(m, AmbientDomain::halfSpace(), {0, beta}, u);
    EXPECT_GT(ru.traceLHS, 0);
    EXPECT_LE(ru.traceLHS, ru.traceRHS + 1e-12);
  }
}

TEST(Identities, FlatDiskAtRightAngle) {
  CapillaryMesh m = makeFlatDisk(3, 1, 0.5, AmbientDomain::halfSpace());
  std::vector<double> f(m.vertexCount(), 1.0);
  IdentityReport r = identityChecks(m, AmbientDomain::halfSpace(), {0, M_PI / 2}, f);
  for (double p : r.phi) EXPECT_NEAR(p, 1, 1e-12);
  EXPECT_LE(r.pdeResidualL2, 1e-12);
}

TEST(Identities, RejectsNonMinimal) {
  CapillaryMesh cap = makeSphericalCap(M_PI / 3, 1, 3);
  std::vector<double> f(cap.vertexCount(), 1.0);
  try {
    identityChecks(cap, AmbientDomain::halfSpace(), {0, M_PI / 3}, f);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotMinimal);
  }
}

TEST(Identities, RelaxedBandRefines) {
  const double theta = M_PI / 3;
  std::vector<double> pde;
  for (int nz : {16, 32}) {
    CapillaryMesh m = makeCatenoidBand(theta, 1, 0.5, nz, 4 * nz);
    RelaxOptions o;
    o.maxIter = 3000;
    o.smoothEvery = 0;
    double h = meanEdgeLength(m);
    o.tolGrad = 0.8 * h * h * h * h;
    SolveReport rr = relax(m, AmbientDomain::halfSpace(), {0, theta}, o);
    std::vector<double> f(m.vertexCount(), 1.0);
    IdentityReport r = identityChecks(rr.finalMesh, AmbientDomain::halfSpace(), {0, theta}, f);
    EXPECT_TRUE(r.curvBoundSatisfied);
    pde.push_back(r.pdeResidualL2);
  }
  EXPECT_GT(pde[0] / pde[1], 2);
}
