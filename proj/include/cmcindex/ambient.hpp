#pragma once

#include <Eigen/Dense>

#include <array>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace cmcindex {

/// Ambient points and tangent vectors live in a fixed 4-component embedding
/// space: R3 and the flat torus use the first three slots, S3 is the unit
/// sphere in Euclidean R^4 and H3 the upper sheet of the hyperboloid in
/// Minkowski R^{3,1} (signature + + + -).
using Vec4 = Eigen::Vector4d;

class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class UnsupportedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class AmbientKind { R3, S3, H3, FlatT3, EmbeddedGeneric };

std::string_view to_string(AmbientKind kind);

/// User-supplied geometry for an ambient manifold that is not one of the
/// four model spaces. Every callable receives the base point first.
struct GenericModel {
  std::function<double(const Vec4&, const Vec4&, const Vec4&)> metric;
  std::function<double(const Vec4&, const Vec4&, const Vec4&, const Vec4&,
                       const Vec4&)>
      riemann;
  std::function<double(const Vec4&, const Vec4&, const Vec4&, const Vec4&)>
      volume;
  std::function<Vec4(const Vec4&, const Vec4&, double)> exp;
  /// Three vectors spanning T_pN (not necessarily orthonormal).
  std::function<std::array<Vec4, 3>(const Vec4&)> tangent_basis;
  std::function<bool(const Vec4&)> contains;
};

/// A model three-manifold N together with the data of an isometric embedding
/// N -> R^d (dimension and bound J on the embedding's second fundamental
/// form).
class AmbientSpace {
 public:
  static AmbientSpace r3();
  static AmbientSpace s3();
  static AmbientSpace h3();
  static AmbientSpace flat_t3();
  static AmbientSpace generic(GenericModel model, int embedding_dimension,
                              double curvature_parameter,
                              std::optional<double> extrinsic_bound);

  AmbientKind kind() const { return kind_; }
  int embedding_dimension() const { return dimension_; }
  /// Constant sectional curvature for the space forms.
  double curvature() const { return kappa_; }
  /// J, the sup-norm of the largest eigenvalue of II for N -> R^d. Empty
  /// when N has no bounded isometric Euclidean embedding (H3).
  std::optional<double> extrinsic_bound() const { return extrinsic_bound_; }
  bool is_space_form() const { return kind_ != AmbientKind::EmbeddedGeneric; }

  /// Throws DomainError if p is not a point of N.
  void check_point(const Vec4& p) const;
  bool contains(const Vec4& p) const;

  /// Throws DomainError when p is off the sphere or hyperboloid.
  double metric(const Vec4& p, const Vec4& X, const Vec4& Y) const;
  double norm(const Vec4& p, const Vec4& X) const;

  /// Rm(X,Y,Z,W) with the convention sec(X,Y) = Rm(X,Y,Y,X)/|X^Y|^2, so that
  /// the unit sphere has sec = +1.
  double riemann(const Vec4& p, const Vec4& X, const Vec4& Y, const Vec4& Z,
                 const Vec4& W) const;
  double sectional(const Vec4& p, const Vec4& X, const Vec4& Y) const;
  /// Ric(nu,nu) for a unit vector nu; throws PreconditionError otherwise.
  double ricci_normal(const Vec4& p, const Vec4& nu) const;
  /// Ric(nu,nu) summed over a caller-chosen orthonormal completion (E1,E2).
  double ricci_normal(const Vec4& p, const Vec4& nu, const Vec4& e1,
                      const Vec4& e2) const;

  double volume_form(const Vec4& p, const Vec4& X, const Vec4& Y,
                     const Vec4& Z) const;

  /// exp_p(t w). For the flat torus the result is reduced to [0,1)^3.
  Vec4 exp_map(const Vec4& p, const Vec4& w, double t) const;

  /// Orthogonal projection of an embedding-space vector onto T_pN.
  Vec4 project_tangent(const Vec4& p, const Vec4& W) const;
  /// d/ds [P(p(s)) W(s)] given p' = dp and W' = dW.
  Vec4 project_tangent_derivative(const Vec4& p, const Vec4& dp,
                                  const Vec4& W, const Vec4& dW) const;

  /// A basis of T_pN, orthonormal for the model spaces.
  std::array<Vec4, 3> tangent_frame(const Vec4& p) const;

  /// The unit normal n to the oriented plane span(X,Y) in T_pN with
  /// volume_form(n, X, Y) > 0.
  Vec4 oriented_normal(const Vec4& p, const Vec4& X, const Vec4& Y) const;

 private:
  AmbientSpace(AmbientKind kind, int dimension, double kappa,
               std::optional<double> J)
      : kind_(kind), dimension_(dimension), kappa_(kappa),
        extrinsic_bound_(J) {}

  AmbientKind kind_;
  int dimension_;
  double kappa_;
  std::optional<double> extrinsic_bound_;
  std::shared_ptr<const GenericModel> generic_;
};

/// Geodesic exp_p(t w) of a space form in embedding coordinates (no
/// reduction modulo the torus lattice), with its derivative along a curve
/// (p(s), w(s)) and its velocity in t. Used by the finite-difference oracle.
struct GeodesicJet {
  Vec4 point;
  Vec4 velocity;
};
GeodesicJet geodesic(const AmbientSpace& space, const Vec4& p, const Vec4& w,
                     double t);
Vec4 geodesic_variation(const AmbientSpace& space, const Vec4& p,
                        const Vec4& w, double t, const Vec4& dp,
                        const Vec4& dw);

/// Smooth function on N given through its embedding-space extension.
struct AmbientFunction {
  std::function<double(const Vec4&)> value;
  std::function<Vec4(const Vec4&)> gradient;  // Euclidean coordinate gradient

  static AmbientFunction constant(double c);
  double derivative(const Vec4& p, const Vec4& direction) const {
    return gradient(p).dot(direction);
  }
};

}  // namespace cmcindex
