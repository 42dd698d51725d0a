#include <gtest/gtest.h>

#include "fixtures.hpp"

using namespace capillary;
using namespace fixtures;

TEST(Relax, ExactCapIsAlreadyCritical) {
  CapillaryMesh cap = makeSphericalCap(M_PI / 2, 1, 4);
  RelaxOptions o;
  double h = meanEdgeLength(cap);
  o.tolGrad = 20 * h * h;  // above the discretization gradient of the exact cap
  SolveReport r = relax(cap, AmbientDomain::halfSpace(), {2, M_PI / 2}, o);
  EXPECT_TRUE(r.converged);
  EXPECT_LE(r.iterations, 2);
  double moved = 0;
  for (int i = 0; i < cap.vertexCount(); ++i) moved = std::max(moved, (r.finalMesh.vertices[i] - cap.vertices[i]).norm());
  EXPECT_LE(moved, 1e-8);
}

TEST(Relax, PerturbedHemisphereRecoversYoungsLaw) {
  SolveReport r = relaxedCap(M_PI / 2, 4);
  EXPECT_TRUE(r.converged);
  EXPECT_TRUE(r.multiplierMode);
  EXPECT_LE(r.residuals.maxAngleResidual, 0.02);
  EXPECT_LE(r.residuals.maxMeanCurvatureResidual, 0.05);
  EXPECT_NEAR(r.finalEnergy, capEnergy(M_PI / 2, 1, 2), 0.02 * capEnergy(M_PI / 2, 1, 2));
}

TEST(Relax, EnergyDecreasesBetweenRetargets) {
  RelaxOptions o;
  o.maxIter = 300;
  o.volumeMode = RelaxOptions::VolumeMode::Free;
  SolveReport r = relax(perturbedCap(M_PI / 3, 3), AmbientDomain::halfSpace(), {2, M_PI / 3}, o);
  for (size_t k = 1; k < r.energyHistory.size(); ++k) EXPECT_LE(r.energyHistory[k], r.energyHistory[k - 1] + 1e-12);
}

TEST(Relax, DiskInBallFlowsAway) {
  // the equatorial disk is a saddle; a bump starts it sliding towards the wall
  // (run long enough and the sheet shrinks into the wall and the mesh degenerates)
  const AmbientDomain ball = AmbientDomain::unitBall();
  CapillaryMesh d = makeFlatDiskInBall(3);
  const EnergyParams p{0, M_PI / 2};
  double e0 = capillaryEnergy(d, ball, p);
  for (int i = 0; i < d.vertexCount(); ++i)
    if (!d.topo->topoBoundary[i]) d.vertices[i].z() += 0.05 * (1 - d.vertices[i].squaredNorm());
  RelaxOptions o;
  o.maxIter = 100;
  SolveReport r = relax(d, ball, p, o);
  EXPECT_LT(r.finalEnergy, e0 - 1e-3);
}

TEST(Relax, RejectsBadParams) {
  CapillaryMesh cap = makeSphericalCap(M_PI / 2, 1, 2);
  EXPECT_THROW(relax(cap, AmbientDomain::halfSpace(), {0, 0.0}, {}), Error);
  EXPECT_THROW(relax(cap, AmbientDomain::halfSpace(), {0, M_PI}, {}), Error);
}

TEST(Residuals, ExactPlaneHasHalfDensity) {
  CapillaryMesh m = makeTiltedHalfPlane(M_PI / 2, 1, 2, 24, 48);
  DensityOptions o;
  o.rhoMin = 0.05;
  o.rhoMax = 0.4;
  ResidualReport r = residuals(m, AmbientDomain::halfSpace(), {0, M_PI / 2});
  EXPECT_LE(r.maxMeanCurvatureResidual, 1e-12);
  EXPECT_LE(r.maxAngleResidual, 1e-12);
  DensityProbe pr = densityProbe(m, AmbientDomain::halfSpace(), {0, M_PI / 2}, Vec3::Zero(), o);
  EXPECT_EQ(pr.cls, DensityClass::HalfPlane);
  EXPECT_NEAR(pr.extrapolated, 0.5, 0.02);
}

TEST(Residuals, CapBoundaryDensity) {
  CapillaryMesh cap = makeSphericalCap(M_PI / 3, 1, 5);
  Vec3 q;
  for (int i = 0; i < cap.vertexCount(); ++i)
    if (cap.wall[i] >= 0) q = cap.vertices[i];
  ResidualReport r = residuals(cap, AmbientDomain::halfSpace(), {2, M_PI / 3}, {q});
  ASSERT_EQ(r.probes.size(), 1u);
  EXPECT_TRUE(r.probes[0].onBoundaryCurve);
  EXPECT_EQ(r.probes[0].cls, DensityClass::HalfPlane);
  EXPECT_NEAR(r.probes[0].extrapolated, 0.75, 0.05);
  EXPECT_TRUE(r.monotone);
}

TEST(Density, SyntheticFixtures) {
  for (double theta : {M_PI / 3, M_PI / 2})
    for (const DensityFixture& f : densityFixtures(theta)) {
      DensityProbe pr = densityProbe(f.mesh, AmbientDomain::halfSpace(), {0, theta}, f.probe, f.opts);
      EXPECT_NEAR(pr.extrapolated, f.expected, 0.05) << f.name << " theta " << theta;
      EXPECT_NEAR(pr.classValue, f.expected, 1e-12) << f.name;
    }
}

TEST(Density, ClassValues) {
  const double t = M_PI / 3;
  EXPECT_DOUBLE_EQ(densityClassValue(DensityClass::HalfPlane, t), 0.75);
  EXPECT_DOUBLE_EQ(densityClassValue(DensityClass::TouchingHigh, t), 1.5);
  EXPECT_DOUBLE_EQ(densityClassValue(DensityClass::DoubleTouchHigh, t), 2.5);
  EXPECT_STREQ(densityClassName(DensityClass::TwoSheets), "twoSheets");
}
