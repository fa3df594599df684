#pragma once

#include "tfilm/grid.hpp"

namespace tfilm {

enum class CutoffKind {
  /// Radial kernel supported in B_2\B_1, identically one on B_{5/3}\B_{4/3}.
  AnnulusKernel,
  /// Radial cutoff identically one on B_1, supported in B_2.
  BallCutoff,
};

/// Radial C^3 cutoff built from the 7th-order smoothstep
/// S(s) = 35 s^4 - 84 s^5 + 70 s^6 - 20 s^7 on each transition band.
/// The scaled profile eta(x/r) satisfies
///   r^3 |D^3 eta| + r^2 |D^2 eta| + r |grad eta| + eta <= C
/// with the fixed constant reported by bound_constant().
class CutoffProfile {
 public:
  explicit CutoffProfile(CutoffKind kind) : kind_(kind) {}

  CutoffKind kind() const { return kind_; }

  // Profile and radial derivatives as functions of rho = |x| / r.
  double value(double rho) const;
  double d1(double rho) const;
  double d2(double rho) const;
  double d3(double rho) const;

  double support_inner() const { return kind_ == CutoffKind::AnnulusKernel ? 1.0 : 0.0; }
  double support_outer() const { return 2.0; }

  // Scaled-profile evaluation at displacement rel from the center, scale r.
  double value_at(Vec2 rel, double r) const;
  Vec2 gradient_at(Vec2 rel, double r) const;
  SymMat2 hessian_at(Vec2 rel, double r) const;
  SymTen3 third_at(Vec2 rel, double r) const;

  /// Smallest radius whose profile is quadrature-resolvable on spacing h
  /// (the varying band must span at least 8 cells).
  double min_resolvable_radius(double h) const { return 8.0 * h; }

  /// Throws RampUnresolvedError when r < min_resolvable_radius(h).
  void require_resolvable(double r, double h) const;

  /// Numerically evaluated C with r^3|D^3| + r^2|D^2| + r|D| + value <= C.
  double bound_constant() const;

  // The smoothstep and its derivatives on [0, 1] (clamped outside).
  static double smoothstep(double s);
  static double smoothstep_d1(double s);
  static double smoothstep_d2(double s);
  static double smoothstep_d3(double s);

 private:
  CutoffKind kind_;
};

}  // namespace tfilm
