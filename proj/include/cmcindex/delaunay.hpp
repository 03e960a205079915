#pragma once

#include <vector>

namespace cmcindex {

/// Unduloid profile with mean curvature 1, rotating about the x-axis.
///
/// The profile (x, r) is parametrized by the conformal coordinate t of the
/// surface of revolution (metric r^2 (dt^2 + dphi^2)) and by the angle theta
/// of its tangent with the axis:
///
///   x' = r cos(theta),  r' = r sin(theta),  theta' = cos(theta) - r.
///
/// F = r cos(theta) - r^2 / 2 is a first integral. The neck ratio
/// r_min / r_max lies in (0, 1); 1 is the cylinder and 0 a chain of spheres.
class DelaunayProfile {
 public:
  struct State {
    double x, r, theta;
  };

  explicit DelaunayProfile(double neck_ratio);

  double neck_ratio() const { return neck_ratio_; }
  double r_min() const { return r_min_; }
  double r_max() const { return r_max_; }
  double flux() const { return flux_; }
  /// Conformal period T of one lobe (neck to neck).
  double period() const { return period_; }
  /// Axial advance x(T) - x(0) over one lobe.
  double axial_period() const { return axial_period_; }

  State at(double t) const;
  static State derivative(const State& s);
  double flux(const State& s) const;

 private:
  static State rk4_step(const State& s, double dt);

  double neck_ratio_;
  double r_min_, r_max_, flux_;
  double period_ = 0.0, axial_period_ = 0.0;
  double spacing_ = 0.0;
  std::vector<State> checkpoints_;
};

}  // namespace cmcindex
