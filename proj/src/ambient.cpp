#include "cmcindex/ambient.hpp"

#include <cmath>
#include <numbers>

namespace cmcindex {

namespace {

constexpr double kPointTolerance = 1e-9;

double minkowski(const Vec4& a, const Vec4& b) {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2] - a[3] * b[3];
}

Vec4 unit(int i) {
  Vec4 e = Vec4::Zero();
  e[i] = 1.0;
  return e;
}

double det3(const Vec4& a, const Vec4& b, const Vec4& c) {
  return a.head<3>().dot(b.head<3>().cross(c.head<3>()));
}

double det4(const Vec4& a, const Vec4& b, const Vec4& c, const Vec4& d) {
  Eigen::Matrix4d m;
  m << a, b, c, d;
  return m.determinant();
}

}  // namespace

std::string_view to_string(AmbientKind kind) {
  switch (kind) {
    case AmbientKind::R3: return "R3";
    case AmbientKind::S3: return "S3";
    case AmbientKind::H3: return "H3";
    case AmbientKind::FlatT3: return "FlatT3";
    case AmbientKind::EmbeddedGeneric: return "EmbeddedGeneric";
  }
  return "unknown";
}

AmbientSpace AmbientSpace::r3() { return {AmbientKind::R3, 3, 0.0, 0.0}; }

// Unit sphere in R^4: principal curvatures of the embedding are all 1.
AmbientSpace AmbientSpace::s3() { return {AmbientKind::S3, 4, 1.0, 1.0}; }

AmbientSpace AmbientSpace::h3() {
  return {AmbientKind::H3, 4, -1.0, std::nullopt};
}

// [0,1)^3 embedded in R^6 as a product of three circles of length 1, each of
// curvature 2*pi.
AmbientSpace AmbientSpace::flat_t3() {
  return {AmbientKind::FlatT3, 6, 0.0, 2.0 * std::numbers::pi};
}

AmbientSpace AmbientSpace::generic(GenericModel model, int embedding_dimension,
                                   double curvature_parameter,
                                   std::optional<double> extrinsic_bound) {
  if (!model.metric || !model.riemann || !model.volume || !model.exp ||
      !model.tangent_basis) {
    throw PreconditionError("generic ambient model is missing a callable");
  }
  if (embedding_dimension < 3) {
    throw PreconditionError("embedding dimension must be at least 3");
  }
  AmbientSpace space(AmbientKind::EmbeddedGeneric, embedding_dimension,
                     curvature_parameter, extrinsic_bound);
  space.generic_ = std::make_shared<const GenericModel>(std::move(model));
  return space;
}

bool AmbientSpace::contains(const Vec4& p) const {
  if (!p.allFinite()) return false;
  switch (kind_) {
    case AmbientKind::R3:
    case AmbientKind::FlatT3:
      return p[3] == 0.0;
    case AmbientKind::S3:
      return std::abs(p.norm() - 1.0) < kPointTolerance;
    case AmbientKind::H3:
      return p[3] > 0.0 &&
             std::abs(minkowski(p, p) + 1.0) <
                 kPointTolerance * std::max(1.0, p[3] * p[3]);
    case AmbientKind::EmbeddedGeneric:
      return !generic_->contains || generic_->contains(p);
  }
  return false;
}

void AmbientSpace::check_point(const Vec4& p) const {
  if (!contains(p)) {
    throw DomainError("point is outside the domain of " +
                      std::string(to_string(kind_)));
  }
}

double AmbientSpace::metric(const Vec4& p, const Vec4& X,
                            const Vec4& Y) const {
  switch (kind_) {
    case AmbientKind::R3:
    case AmbientKind::FlatT3:
      return X.head<3>().dot(Y.head<3>());
    case AmbientKind::S3:
      check_point(p);
      return X.dot(Y);
    case AmbientKind::H3:
      check_point(p);
      return minkowski(X, Y);
    case AmbientKind::EmbeddedGeneric:
      return generic_->metric(p, X, Y);
  }
  return 0.0;
}

double AmbientSpace::norm(const Vec4& p, const Vec4& X) const {
  return std::sqrt(std::max(0.0, metric(p, X, X)));
}

double AmbientSpace::riemann(const Vec4& p, const Vec4& X, const Vec4& Y,
                             const Vec4& Z, const Vec4& W) const {
  if (kind_ == AmbientKind::EmbeddedGeneric) {
    return generic_->riemann(p, X, Y, Z, W);
  }
  if (kappa_ == 0.0) return 0.0;
  return kappa_ * (metric(p, X, W) * metric(p, Y, Z) -
                   metric(p, X, Z) * metric(p, Y, W));
}

double AmbientSpace::sectional(const Vec4& p, const Vec4& X,
                               const Vec4& Y) const {
  const double area2 = metric(p, X, X) * metric(p, Y, Y) -
                       metric(p, X, Y) * metric(p, X, Y);
  if (area2 <= 0.0) throw PreconditionError("degenerate plane");
  return riemann(p, X, Y, Y, X) / area2;
}

double AmbientSpace::ricci_normal(const Vec4& p, const Vec4& nu,
                                  const Vec4& e1, const Vec4& e2) const {
  return riemann(p, nu, e1, e1, nu) + riemann(p, nu, e2, e2, nu);
}

double AmbientSpace::ricci_normal(const Vec4& p, const Vec4& nu) const {
  check_point(p);
  if (std::abs(metric(p, nu, nu) - 1.0) > 1e-10) {
    throw PreconditionError("ricci_normal expects a unit vector");
  }
  std::array<Vec4, 2> completion;
  int found = 0;
  for (const Vec4& candidate : tangent_frame(p)) {
    Vec4 e = candidate - metric(p, candidate, nu) * nu;
    for (int j = 0; j < found; ++j) {
      e -= metric(p, e, completion[j]) * completion[j];
    }
    const double len = norm(p, e);
    if (len > 1e-6 && found < 2) completion[found++] = e / len;
  }
  return ricci_normal(p, nu, completion[0], completion[1]);
}

double AmbientSpace::volume_form(const Vec4& p, const Vec4& X, const Vec4& Y,
                                 const Vec4& Z) const {
  switch (kind_) {
    case AmbientKind::R3:
    case AmbientKind::FlatT3:
      return det3(X, Y, Z);
    case AmbientKind::S3:
      return det4(p, X, Y, Z);
    case AmbientKind::H3:
      return det4(X, Y, Z, p);
    case AmbientKind::EmbeddedGeneric:
      return generic_->volume(p, X, Y, Z);
  }
  return 0.0;
}

Vec4 AmbientSpace::exp_map(const Vec4& p, const Vec4& w, double t) const {
  check_point(p);
  if (kind_ == AmbientKind::EmbeddedGeneric) return generic_->exp(p, w, t);
  Vec4 q = geodesic(*this, p, w, t).point;
  if (kind_ == AmbientKind::FlatT3) {
    for (int i = 0; i < 3; ++i) q[i] -= std::floor(q[i]);
  }
  return q;
}

Vec4 AmbientSpace::project_tangent(const Vec4& p, const Vec4& W) const {
  switch (kind_) {
    case AmbientKind::R3:
    case AmbientKind::FlatT3: {
      Vec4 out = W;
      out[3] = 0.0;
      return out;
    }
    case AmbientKind::S3:
      return W - W.dot(p) * p;
    case AmbientKind::H3:
      return W + minkowski(W, p) * p;
    case AmbientKind::EmbeddedGeneric:
      break;
  }
  throw UnsupportedError("tangent projection needs a model space");
}

Vec4 AmbientSpace::project_tangent_derivative(const Vec4& p, const Vec4& dp,
                                              const Vec4& W,
                                              const Vec4& dW) const {
  switch (kind_) {
    case AmbientKind::R3:
    case AmbientKind::FlatT3: {
      Vec4 out = dW;
      out[3] = 0.0;
      return out;
    }
    case AmbientKind::S3:
      return dW - (dW.dot(p) + W.dot(dp)) * p - W.dot(p) * dp;
    case AmbientKind::H3:
      return dW + (minkowski(dW, p) + minkowski(W, dp)) * p +
             minkowski(W, p) * dp;
    case AmbientKind::EmbeddedGeneric:
      break;
  }
  throw UnsupportedError("tangent projection needs a model space");
}

std::array<Vec4, 3> AmbientSpace::tangent_frame(const Vec4& p) const {
  if (kind_ == AmbientKind::R3 || kind_ == AmbientKind::FlatT3) {
    return {unit(0), unit(1), unit(2)};
  }
  std::array<Vec4, 3> raw;
  if (kind_ == AmbientKind::EmbeddedGeneric) {
    raw = generic_->tangent_basis(p);
  }
  std::array<Vec4, 3> frame;
  int found = 0;
  for (int i = 0; i < 4 && found < 3; ++i) {
    Vec4 e = kind_ == AmbientKind::EmbeddedGeneric
                 ? (i < 3 ? raw[i] : Vec4::Zero().eval())
                 : project_tangent(p, unit(i));
    for (int j = 0; j < found; ++j) e -= metric(p, e, frame[j]) * frame[j];
    const double len = norm(p, e);
    if (len > 1e-6) frame[found++] = e / len;
  }
  if (found < 3) throw DomainError("could not build a tangent frame");
  return frame;
}

Vec4 AmbientSpace::oriented_normal(const Vec4& p, const Vec4& X,
                                   const Vec4& Y) const {
  Vec4 n = Vec4::Zero();
  switch (kind_) {
    case AmbientKind::R3:
    case AmbientKind::FlatT3:
      n.head<3>() = X.head<3>().cross(Y.head<3>());
      break;
    case AmbientKind::S3:
      for (int i = 0; i < 4; ++i) n[i] = det4(p, unit(i), X, Y);
      break;
    case AmbientKind::H3: {
      Vec4 c;
      for (int i = 0; i < 4; ++i) c[i] = det4(unit(i), X, Y, p);
      n = c;
      n[3] = -c[3];
      break;
    }
    case AmbientKind::EmbeddedGeneric: {
      for (const Vec4& candidate : tangent_frame(p)) {
        Vec4 e = candidate;
        const double xx = metric(p, X, X);
        const double xy = metric(p, X, Y);
        const double yy = metric(p, Y, Y);
        const double det = xx * yy - xy * xy;
        const double cx = (yy * metric(p, e, X) - xy * metric(p, e, Y)) / det;
        const double cy = (xx * metric(p, e, Y) - xy * metric(p, e, X)) / det;
        e -= cx * X + cy * Y;
        if (norm(p, e) > 1e-6) {
          n = e;
          break;
        }
      }
      if (volume_form(p, n, X, Y) < 0.0) n = -n;
      break;
    }
  }
  const double len = norm(p, n);
  if (!(len > 0.0)) throw DomainError("degenerate tangent plane");
  return n / len;
}

GeodesicJet geodesic(const AmbientSpace& space, const Vec4& p, const Vec4& w,
                     double t) {
  switch (space.kind()) {
    case AmbientKind::R3:
    case AmbientKind::FlatT3:
      return {p + t * w, w};
    case AmbientKind::S3: {
      const double r = std::sqrt(w.dot(w));
      const double c = std::cos(t * r);
      const double s = r * t < 1e-8 ? t : std::sin(t * r) / r;
      return {c * p + s * w, -r * r * s * p + c * w};
    }
    case AmbientKind::H3: {
      const double r = std::sqrt(std::max(0.0, minkowski(w, w)));
      const double c = std::cosh(t * r);
      const double s = r * t < 1e-8 ? t : std::sinh(t * r) / r;
      return {c * p + s * w, r * r * s * p + c * w};
    }
    case AmbientKind::EmbeddedGeneric:
      break;
  }
  throw UnsupportedError("closed-form geodesics need a model space");
}

Vec4 geodesic_variation(const AmbientSpace& space, const Vec4& p,
                        const Vec4& w, double t, const Vec4& dp,
                        const Vec4& dw) {
  switch (space.kind()) {
    case AmbientKind::R3:
    case AmbientKind::FlatT3:
      return dp + t * dw;
    case AmbientKind::S3:
    case AmbientKind::H3: {
      // q(s) = C(r(s)) p(s) + S(r(s)) w(s) with r^2 = <w,w>.
      const bool sphere = space.kind() == AmbientKind::S3;
      const double r2 = sphere ? w.dot(w) : minkowski(w, w);
      const double r = std::sqrt(std::max(0.0, r2));
      const double q = sphere ? w.dot(dw) : minkowski(w, dw);  // r dr
      const double tr = t * r;
      double c, s, ds_over_q;
      if (tr < 1e-4) {
        const double t2 = t * t;
        c = sphere ? 1.0 - 0.5 * tr * tr : 1.0 + 0.5 * tr * tr;
        s = sphere ? t * (1.0 - tr * tr / 6.0) : t * (1.0 + tr * tr / 6.0);
        ds_over_q = sphere ? -t * t2 / 3.0 * (1.0 - tr * tr / 10.0)
                           : t * t2 / 3.0 * (1.0 + tr * tr / 10.0);
      } else if (sphere) {
        c = std::cos(tr);
        s = std::sin(tr) / r;
        ds_over_q = (tr * std::cos(tr) - std::sin(tr)) / (r * r * r);
      } else {
        c = std::cosh(tr);
        s = std::sinh(tr) / r;
        ds_over_q = (tr * std::cosh(tr) - std::sinh(tr)) / (r * r * r);
      }
      // dC = -/+ t s q for the sphere / hyperboloid.
      const double dc = (sphere ? -1.0 : 1.0) * t * s * q;
      return c * dp + s * dw + dc * p + ds_over_q * q * w;
    }
    case AmbientKind::EmbeddedGeneric:
      break;
  }
  throw UnsupportedError("closed-form geodesics need a model space");
}

AmbientFunction AmbientFunction::constant(double c) {
  return {[c](const Vec4&) { return c; },
          [](const Vec4&) { return Vec4::Zero().eval(); }};
}

}  // namespace cmcindex
