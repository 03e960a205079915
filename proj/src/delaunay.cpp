#include "cmcindex/delaunay.hpp"

#include "cmcindex/surfaces.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace cmcindex {

namespace {
constexpr double kMaxStep = 1e-3;
constexpr double kMaxTime = 1e3;
constexpr double kClosureTolerance = 1e-8;
}  // namespace

DelaunayProfile::State DelaunayProfile::derivative(const State& s) {
  return {s.r * std::cos(s.theta), s.r * std::sin(s.theta),
          std::cos(s.theta) - s.r};
}

DelaunayProfile::State DelaunayProfile::rk4_step(const State& s, double dt) {
  auto axpy = [](const State& a, double c, const State& d) {
    return State{a.x + c * d.x, a.r + c * d.r, a.theta + c * d.theta};
  };
  const State k1 = derivative(s);
  const State k2 = derivative(axpy(s, 0.5 * dt, k1));
  const State k3 = derivative(axpy(s, 0.5 * dt, k2));
  const State k4 = derivative(axpy(s, dt, k3));
  return {s.x + dt / 6.0 * (k1.x + 2.0 * k2.x + 2.0 * k3.x + k4.x),
          s.r + dt / 6.0 * (k1.r + 2.0 * k2.r + 2.0 * k3.r + k4.r),
          s.theta +
              dt / 6.0 * (k1.theta + 2.0 * k2.theta + 2.0 * k3.theta +
                          k4.theta)};
}

double DelaunayProfile::flux(const State& s) const {
  return s.r * std::cos(s.theta) - 0.5 * s.r * s.r;
}

DelaunayProfile::DelaunayProfile(double neck_ratio) : neck_ratio_(neck_ratio) {
  if (!(neck_ratio > 0.0 && neck_ratio < 1.0)) {
    throw PreconditionError("Delaunay neck ratio must lie in (0, 1)");
  }
  // Neck and bulge radii are the roots of r^2/2 - r + F = 0.
  r_max_ = 2.0 / (1.0 + neck_ratio);
  r_min_ = neck_ratio * r_max_;
  flux_ = r_min_ - 0.5 * r_min_ * r_min_;

  const State start{0.0, r_min_, 0.0};

  // Shoot from the neck until theta crosses zero upwards after the bulge.
  State s = start;
  double t = 0.0;
  bool passed_bulge = false;
  for (;;) {
    const State next = rk4_step(s, kMaxStep);
    if (next.theta < 0.0) passed_bulge = true;
    if (passed_bulge && s.theta < 0.0 && next.theta >= 0.0) {
      double tau = kMaxStep * s.theta / (s.theta - next.theta);
      for (int it = 0; it < 8; ++it) {
        const State probe = rk4_step(s, tau);
        tau -= probe.theta / derivative(probe).theta;
      }
      period_ = t + tau;
      break;
    }
    s = next;
    t += kMaxStep;
    if (t > kMaxTime || !std::isfinite(s.r) || s.r <= 0.0) {
      std::ostringstream msg;
      msg << "Delaunay shooting failed for neck ratio " << neck_ratio
          << ": no closing neck before t=" << t << " (r=" << s.r
          << ", theta=" << s.theta << ")";
      throw ConstructionError(msg.str());
    }
  }

  const int steps = static_cast<int>(std::ceil(period_ / kMaxStep));
  spacing_ = period_ / steps;
  checkpoints_.reserve(steps + 1);
  s = start;
  checkpoints_.push_back(s);
  for (int m = 0; m < steps; ++m) {
    s = rk4_step(s, spacing_);
    checkpoints_.push_back(s);
  }
  axial_period_ = s.x;

  const double closure = std::abs(s.r - r_min_) + std::abs(s.theta);
  const double drift = std::abs(flux(s) - flux_);
  if (closure > kClosureTolerance || drift > kClosureTolerance) {
    std::ostringstream msg;
    msg << "Delaunay profile does not close for neck ratio " << neck_ratio
        << ": closure residual " << closure << ", flux drift " << drift;
    throw ConstructionError(msg.str());
  }
}

DelaunayProfile::State DelaunayProfile::at(double t) const {
  const double lobes = std::floor(t / period_);
  const double local = t - lobes * period_;
  int m = static_cast<int>(local / spacing_);
  m = std::clamp(m, 0, static_cast<int>(checkpoints_.size()) - 2);
  State s = rk4_step(checkpoints_[m], local - m * spacing_);
  s.x += lobes * axial_period_;
  return s;
}

}  // namespace cmcindex
