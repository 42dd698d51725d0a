#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <string>

#include "errors.hpp"

namespace capillary {

using Vec3 = Eigen::Vector3d;
using Mat2 = Eigen::Matrix2d;

enum class DomainKind { HalfSpace, UnitBall, Slab };

struct BoundaryFrame {
  Vec3 footpoint;
  Vec3 etaBar;
  std::array<Vec3, 2> tangentBasis;
  Mat2 II;
  double HwallMean = 0.0;
};

inline Vec3 anyPerpendicular(const Vec3& n) {
  Vec3 a = std::abs(n.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
  return (a - a.dot(n) * n).normalized();
}

// Flat container M in R^3. The wall normal etaBar points out of M and
// II(X,Y) = <D_X etaBar, Y>, so the unit sphere has II = identity.
class AmbientDomain {
 public:
  static AmbientDomain halfSpace() { return AmbientDomain(DomainKind::HalfSpace, 0.0); }
  static AmbientDomain unitBall() { return AmbientDomain(DomainKind::UnitBall, 0.0); }
  static AmbientDomain slab(double height) {
    require(height > 0.0, "slab height must be positive");
    return AmbientDomain(DomainKind::Slab, height);
  }

  DomainKind kind() const { return kind_; }
  double slabHeight() const { return height_; }
  int wallCount() const { return kind_ == DomainKind::Slab ? 2 : 1; }
  bool planarWalls() const { return kind_ != DomainKind::UnitBall; }

  std::string name() const {
    switch (kind_) {
      case DomainKind::HalfSpace: return "halfspace";
      case DomainKind::UnitBall: return "ball";
      case DomainKind::Slab: return "slab";
    }
    return "?";
  }

  // Positive outside M, negative inside.
  double signedDistance(const Vec3& p) const {
    switch (kind_) {
      case DomainKind::HalfSpace: return -p.z();
      case DomainKind::UnitBall: return p.norm() - 1.0;
      case DomainKind::Slab: return std::max(-p.z(), p.z() - height_);
    }
    return 0.0;
  }

  double wallDistance(int wall, const Vec3& p) const {
    if (kind_ == DomainKind::UnitBall) return std::abs(p.norm() - 1.0);
    if (kind_ == DomainKind::Slab && wall == 1) return std::abs(p.z() - height_);
    return std::abs(p.z());
  }

  bool contains(const Vec3& p, double tol = 1e-12) const { return signedDistance(p) <= tol; }

  int nearestWall(const Vec3& p) const {
    if (kind_ != DomainKind::Slab) return 0;
    return std::abs(p.z()) <= std::abs(p.z() - height_) ? 0 : 1;
  }

  // Wall index if p is within tol of some wall, else -1.
  int wallOf(const Vec3& p, double tol = 1e-9) const {
    int w = nearestWall(p);
    return wallDistance(w, p) <= tol ? w : -1;
  }

  Vec3 projectToWall(int wall, const Vec3& p) const {
    switch (kind_) {
      case DomainKind::HalfSpace: return {p.x(), p.y(), 0.0};
      case DomainKind::UnitBall: {
        double r = p.norm();
        if (r < 1e-14) throw Error(ErrorCode::AmbiguousProjection, "ball center has no unique footpoint");
        return p / r;
      }
      case DomainKind::Slab: return {p.x(), p.y(), wall == 1 ? height_ : 0.0};
    }
    return p;
  }

  // Outward unit normal of the wall, evaluated at (the radial direction of) p.
  Vec3 wallNormal(int wall, const Vec3& p) const {
    switch (kind_) {
      case DomainKind::HalfSpace: return -Vec3::UnitZ();
      case DomainKind::UnitBall: return p.normalized();
      case DomainKind::Slab: return wall == 1 ? Vec3::UnitZ() : Vec3(-Vec3::UnitZ());
    }
    return Vec3::Zero();
  }

  // <x, etaBar> on the wall; constant for every wall used here.
  double wallSupport(int wall) const {
    if (kind_ == DomainKind::UnitBall) return 1.0;
    if (kind_ == DomainKind::Slab && wall == 1) return height_;
    return 0.0;
  }

  // II(v, v) for a vector at the wall; v is projected to the tangent plane first.
  double wallSecondForm(int wall, const Vec3& p, const Vec3& v) const {
    if (kind_ != DomainKind::UnitBall) return 0.0;
    Vec3 n = wallNormal(wall, p);
    Vec3 t = v - v.dot(n) * n;
    return t.squaredNorm();
  }

  double maxWallCurvature() const { return kind_ == DomainKind::UnitBall ? 1.0 : 0.0; }

  double wallArea() const { return kind_ == DomainKind::UnitBall ? 4.0 * M_PI : INFINITY; }
  double volume() const { return kind_ == DomainKind::UnitBall ? 4.0 * M_PI / 3.0 : INFINITY; }

 private:
  AmbientDomain(DomainKind k, double h) : kind_(k), height_(h) {}
  DomainKind kind_;
  double height_;
};

inline BoundaryFrame projectAndFrame(const AmbientDomain& domain, const Vec3& p) {
  if (domain.kind() == DomainKind::UnitBall && p.norm() < 1e-12)
    throw Error(ErrorCode::AmbiguousProjection, "ball center is equidistant to the wall");
  if (domain.kind() == DomainKind::Slab &&
      std::abs(std::abs(p.z()) - std::abs(p.z() - domain.slabHeight())) < 1e-12)
    throw Error(ErrorCode::AmbiguousProjection, "slab midplane is equidistant to both walls");

  int w = domain.nearestWall(p);
  BoundaryFrame f;
  f.footpoint = domain.projectToWall(w, p);
  f.etaBar = domain.wallNormal(w, f.footpoint);
  f.tangentBasis[0] = anyPerpendicular(f.etaBar);
  f.tangentBasis[1] = f.etaBar.cross(f.tangentBasis[0]);
  f.II = domain.kind() == DomainKind::UnitBall ? Mat2(Mat2::Identity()) : Mat2(Mat2::Zero());
  f.HwallMean = f.II.trace();
  return f;
}

}  // namespace capillary
