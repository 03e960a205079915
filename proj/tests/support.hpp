#pragma once

#include "cmcindex/ambient.hpp"
#include "cmcindex/variations.hpp"

#include <cmath>

namespace testing {

using cmcindex::AmbientKind;
using cmcindex::AmbientSpace;
using cmcindex::Rng;
using cmcindex::Vec4;

inline double minkowski(const Vec4& a, const Vec4& b) {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2] - a[3] * b[3];
}

inline Vec4 random_vector(Rng& rng, int dim = 4) {
  Vec4 v = Vec4::Zero();
  for (int i = 0; i < dim; ++i) v[i] = rng.uniform(-1.0, 1.0);
  return v;
}

inline Vec4 random_point(const AmbientSpace& space, Rng& rng) {
  switch (space.kind()) {
    case AmbientKind::S3:
      return random_vector(rng).normalized();
    case AmbientKind::H3: {
      Vec4 p = random_vector(rng, 3);
      p[3] = std::sqrt(1.0 + p.head<3>().squaredNorm());
      return p;
    }
    case AmbientKind::FlatT3: {
      Vec4 p = random_vector(rng, 3);
      return (p.array().abs() * 0.999).matrix();
    }
    default:
      return 3.0 * random_vector(rng, 3);
  }
}

/// Tangent vector at p built from the defining equations of each model.
inline Vec4 random_tangent(const AmbientSpace& space, const Vec4& p, Rng& rng) {
  Vec4 v = random_vector(rng);
  switch (space.kind()) {
    case AmbientKind::S3:
      return v - v.dot(p) * p;
    case AmbientKind::H3:
      return v + minkowski(v, p) * p;
    default:
      v[3] = 0.0;
      return v;
  }
}

inline std::vector<AmbientSpace> model_spaces() {
  return {AmbientSpace::r3(), AmbientSpace::s3(), AmbientSpace::h3(),
          AmbientSpace::flat_t3()};
}

inline double rel_err(double a, double b) {
  return std::abs(a - b) / std::max(1.0, std::abs(b));
}

}  // namespace testing
