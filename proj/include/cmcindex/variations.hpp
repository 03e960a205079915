#pragma once

#include "cmcindex/surfaces.hpp"

#include <complex>
#include <cstdint>
#include <random>
#include <vector>

#include <json.hpp>

namespace cmcindex {

using ComplexVec4 = Eigen::Matrix<std::complex<double>, 4, 1>;

/// Seeded generator with a platform-independent mapping to doubles.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  /// Uniform in [0, 1).
  double uniform() { return (engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  int integer(int lo, int hi) {
    return lo + static_cast<int>(uniform() * (hi - lo + 1));
  }

 private:
  std::mt19937_64 engine_;
};

/// A vector field along u in embedding coordinates together with its chart
/// partial derivatives.
struct VectorJet {
  Vec4 v = Vec4::Zero();
  Vec4 vx = Vec4::Zero();
  Vec4 vy = Vec4::Zero();
};

struct ScalarJet {
  double f = 0.0, fx = 0.0, fy = 0.0;
};

/// A section v of u*TN sampled at the nodes of a SampledSurface.
///
/// The `spec` JSON records how the field was generated so that it can be
/// rebuilt exactly with make_field().
class VariationField {
 public:
  VariationField() = default;
  VariationField(std::vector<VectorJet> jets, nlohmann::json spec)
      : jets_(std::move(jets)), spec_(std::move(spec)) {}

  static VariationField zero(const SampledSurface& s);

  int size() const { return static_cast<int>(jets_.size()); }
  const VectorJet& operator[](int k) const { return jets_[k]; }
  const std::vector<VectorJet>& jets() const { return jets_; }
  const nlohmann::json& spec() const { return spec_; }

  VariationField scaled(double c) const;
  double sup_norm(const SampledSurface& s) const;

 private:
  std::vector<VectorJet> jets_;
  nlohmann::json spec_;
};

/// Decomposition of v at one node: v = sigma + s with s = f nu and
/// sigma = a u_x + b u_y.
struct SplitPoint {
  double f = 0.0;       // <v, nu>
  double a = 0.0, b = 0.0;
  double fx = 0.0, fy = 0.0;  // chart derivatives of f
  Vec4 normal, tangential;
  Vec4 cov_x, cov_y;    // nabla_x v, nabla_y v
  /// sigma^{1,0} = conj(beta) u_z and sigma^{0,1} = beta u_zbar with
  /// beta = a - i b.
  ComplexVec4 sigma_10, sigma_01;
};

SplitPoint split(const SampledSurface& s, const VariationField& v, int k);

/// Normal part s = <v,nu> nu and tangential part sigma = v - s as fields.
VariationField normal_part(const SampledSurface& s, const VariationField& v);
VariationField tangential_part(const SampledSurface& s,
                               const VariationField& v);

// Field construction -------------------------------------------------------

/// Builds a field from its JSON description. Supported types:
///   {"type":"zero"}
///   {"type":"unit_normal"}
///   {"type":"ambient_trig","scale":w,"modes":[{"k":[..4],"amp":[..4],
///       "phase":p},...]}     v = P_N(V(u)), V_c(p) = sum amp_c cos(w k.p + p)
///   {"type":"normal_trig","scale":w,"modes":[{"k":[..4],"amp":a,
///       "phase":p},...]}     v = f(u) nu with f the scalar analogue
///   {"type":"chart_normal","modes":[{"m":i,"n":j,"amp":a,"phase":p},...]}
///       torus charts only: f = sum amp cos(2 pi (i x / P_x + j y / P_y) + p)
///   {"type":"tangential","a":a,"b":b}   v = a u_x + b u_y
///   {"type":"sum","terms":[...]}
VariationField make_field(const SampledSurface& s, const nlohmann::json& spec);

/// Frequency scale for ambient trigonometric fields: 2 pi on the flat torus
/// (so fields are lattice periodic), otherwise 1.
double ambient_frequency_scale(const AmbientSpace& space);

/// Random ambient trigonometric field description of the given degree.
nlohmann::json random_ambient_spec(const AmbientSpace& space, Rng& rng,
                                   int degree = 2, int modes = 4);
/// Random scalar description (type normal_trig).
nlohmann::json random_normal_spec(const AmbientSpace& space, Rng& rng,
                                  int degree = 2, int modes = 4);

/// Scalar jets of an ambient trigonometric function (normal_trig modes).
std::vector<ScalarJet> ambient_scalar(const SampledSurface& s,
                                      const nlohmann::json& spec);

// Variational formulas -----------------------------------------------------

double first_variation_area(const SampledSurface& s, const VariationField& v);
/// int <v, H nu> dSigma; with no function given, H is the constant cmc value.
double first_variation_volume(const SampledSurface& s, const VariationField& v,
                              const AmbientFunction* mean = nullptr);

double second_variation_area(const SampledSurface& s, const VariationField& v);
double second_variation_energy(const SampledSurface& s,
                               const VariationField& v);
/// The energy Hessian evaluated through complexified 4|nabla_z v|^2 and
/// 4 Rm(v, u_z, u_zbar, v).
double second_variation_energy_complex(const SampledSurface& s,
                                       const VariationField& v);
double second_variation_volume(const SampledSurface& s,
                               const VariationField& v,
                               const AmbientFunction* mean = nullptr);
double second_variation_area_h(const SampledSurface& s,
                               const VariationField& v);
double second_variation_energy_h(const SampledSurface& s,
                                 const VariationField& v);
/// int |nabla f|^2 - (|A|^2 + Ric(nu,nu)) f^2 dSigma with f = <v, nu>.
double jacobi_form(const SampledSurface& s, const VariationField& v);

struct DefectField {
  /// Tangentially projected defect; a multiple of u_zbar up to rounding.
  std::vector<ComplexVec4> eta;
  std::vector<double> eta_sq;  // |eta|^2, density against dx dy
  std::vector<double> mu_sq;   // |mu|^2 = 2 e^{-2 lambda} |eta|^2, against dSigma
  double eta_integral = 0.0;   // int |eta|^2 dx dy
  double mu_integral = 0.0;    // int |mu|^2 dSigma
};

DefectField conformal_defect(const SampledSurface& s, const VariationField& v);

struct IdentityResidual {
  double d2_area = 0.0;
  double d2_energy = 0.0;
  double defect = 0.0;  // 8 int |eta|^2 dx dy
  double absolute = 0.0;
  /// |d2A - d2E + 8 int|eta|^2| / max(|d2A|, |d2E|, 1)
  double relative = 0.0;
};

IdentityResidual comparison_identity_residual(const SampledSurface& s,
                                              const VariationField& v);

// Finite-difference oracle -------------------------------------------------

enum class Functional { Area, Energy, VolumeH, AreaH, EnergyH };

std::string_view to_string(Functional f);

/// 1e-3 / sup|v| scaled by the size of the surface.
double default_fd_step(const SampledSurface& s, const VariationField& v);

/// Second derivative at t = 0 of F(exp_u(t v)) by a five-point stencil with
/// one Richardson level over {step, step/2}. VolumeH differentiates the
/// first variation int H(U) omega(U_t, U_x, U_y) dx dy once instead.
/// step <= 0 selects default_fd_step.
double fd_second_variation(Functional functional, const SampledSurface& s,
                           const VariationField& v, double step = 0.0,
                           const AmbientFunction* mean = nullptr);

/// Enclosed-volume functional in R3 through the explicit primitive
/// alpha_h = (h/3)(x1 dx2^dx3 - x2 dx1^dx3 + x3 dx1^dx2).
double volume_r3(const SampledSurface& s, double h, double t = 0.0,
                 const VariationField* v = nullptr);
double fd_second_variation_volume_r3(const SampledSurface& s,
                                     const VariationField& v, double step = 0.0);

struct PeterPaulMargin {
  double cauchy_schwarz = 0.0;  // min over nodes of middle - left
  double peter_paul = 0.0;      // min over nodes of right - middle
};

/// Pointwise check of
///   |e^{-2l} h (w(v, D_x v, u_y) + w(v, u_x, D_y v))|
///     <= h (e^{-l}|D_x v||v| e^{-l}|u_y| + e^{-l}|D_y v||v| e^{-l}|u_x|)
///     <= eps h^2 |v|^2 + |nabla v|^2 / (2 eps).
PeterPaulMargin peter_paul_check(const SampledSurface& s,
                                 const VariationField& v, double eps);

}  // namespace cmcindex
