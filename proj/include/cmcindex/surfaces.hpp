#pragma once

#include "cmcindex/ambient.hpp"

#include <complex>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace cmcindex {

class BranchPointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConstructionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Topology { Sphere, Torus };

/// Quadrature grid on a conformal chart.
///
/// Torus grids are uniform and periodic in both directions, integrated with
/// the trapezoid rule. Sphere grids use the Mercator chart: x is the
/// periodic longitude and y is sampled at z = tanh(y) = Gauss-Legendre nodes
/// in (-1, 1), so the poles are never sampled. Node (i, j) has flat index
/// i + n_x * j.
class ParamGrid {
 public:
  static ParamGrid torus(int n_x, int n_y, double period_x, double period_y);
  static ParamGrid sphere(int n_x, int n_y);

  Topology topology() const { return topology_; }
  int n_x() const { return n_x_; }
  int n_y() const { return n_y_; }
  int size() const { return n_x_ * n_y_; }
  double period_x() const { return period_x_; }
  double period_y() const { return period_y_; }
  bool periodic_y() const { return topology_ == Topology::Torus; }

  double x(int i) const;
  double y(int j) const;
  /// Weight of node (i, j) for integrals against dx dy.
  double weight(int i, int j) const;
  /// Gauss-Legendre abscissae z_j (sphere grids only).
  const std::vector<double>& z_nodes() const { return z_; }

 private:
  ParamGrid() = default;
  Topology topology_ = Topology::Torus;
  int n_x_ = 0, n_y_ = 0;
  double period_x_ = 0.0, period_y_ = 0.0;
  std::vector<double> z_, z_weights_;
};

/// Gauss-Legendre nodes and weights on [-1, 1].
void gauss_legendre(int n, std::vector<double>& nodes,
                    std::vector<double>& weights);

/// Values and chart derivatives of u up to second order, in embedding
/// coordinates.
struct ChartJet {
  Vec4 u, ux, uy, uxx, uxy, uyy;
};

using ChartFunction = std::function<ChartJet(double x, double y)>;

/// A conformal immersion u: Sigma -> N given by an analytic chart.
class Immersion {
 public:
  struct Info {
    std::string name;
    Topology topology = Topology::Torus;
    double period_x = 0.0;  // chart periods (torus); sphere uses 2*pi in x
    double period_y = 0.0;
    int genus = 0;
    int branch_count = 0;
    double cmc = 0.0;  // h in H = h nu
    /// Embedding-space translation u(x + period_x, y) - u(x, y) (non-zero
    /// only for lifts of tori in the flat three-torus).
    Vec4 shift_x = Vec4::Zero();
  };

  Immersion(AmbientSpace ambient, ChartFunction chart, Info info)
      : ambient_(std::move(ambient)), chart_(std::move(chart)),
        info_(std::move(info)) {}

  const AmbientSpace& ambient() const { return ambient_; }
  const Info& info() const { return info_; }
  const std::string& name() const { return info_.name; }
  Topology topology() const { return info_.topology; }
  int genus() const { return info_.genus; }
  int branch_count() const { return info_.branch_count; }
  double cmc() const { return info_.cmc; }

  ChartJet evaluate(double x, double y) const { return chart_(x, y); }

  /// Grid matching this immersion's chart at n_x by n_y nodes.
  ParamGrid grid(int n_x, int n_y) const;

 private:
  AmbientSpace ambient_;
  ChartFunction chart_;
  Info info_;
};

/// Induced geometry at one quadrature node.
struct PointGeometry {
  double x = 0.0, y = 0.0;
  double weight = 0.0;  // dx dy quadrature weight
  ChartJet jet;
  Vec4 nu;
  double lambda = 0.0;   // conformal factor, e^{2 lambda} = |u_x|^2
  double e2l = 0.0;      // e^{2 lambda}
  double a_xx = 0.0, a_xy = 0.0, a_yy = 0.0;  // <u_ij, nu>
  double mean_curvature = 0.0;  // <H, nu> with H = tr A
  double norm_a_sq = 0.0;       // |A|^2
  double ricci_normal = 0.0;    // Ric_N(nu, nu)
  double conformality = 0.0;    // relative residual of |u_x|=|u_y|, u_x.u_y=0

  double area_weight() const { return weight * e2l; }
  /// Jacobi potential |A|^2 + Ric_N(nu, nu).
  double jacobi_potential() const { return norm_a_sq + ricci_normal; }
};

/// Geometry at (x, y); throws BranchPointError where |u_x| < 1e-14.
PointGeometry point_geometry(const Immersion& u, double x, double y,
                             double weight = 0.0);

/// An immersion sampled on a quadrature grid.
class SampledSurface {
 public:
  SampledSurface(std::shared_ptr<const Immersion> immersion, ParamGrid grid);

  const Immersion& immersion() const { return *immersion_; }
  std::shared_ptr<const Immersion> immersion_ptr() const { return immersion_; }
  const AmbientSpace& ambient() const { return immersion_->ambient(); }
  const ParamGrid& grid() const { return grid_; }
  const std::vector<PointGeometry>& points() const { return points_; }
  int size() const { return static_cast<int>(points_.size()); }
  const PointGeometry& operator[](int k) const { return points_[k]; }

  double max_conformality_residual() const;

 private:
  std::shared_ptr<const Immersion> immersion_;
  ParamGrid grid_;
  std::vector<PointGeometry> points_;
};

/// Second fundamental form data at a point.
struct SecondFormData {
  std::complex<double> a_zz;  // <A(u_z,u_z), nu>
  std::complex<double> a_zzbar;  // <A(u_z,u_zbar), nu>
  Vec4 mean_curvature_vector;
  double mean_curvature = 0.0;
  double norm_sq = 0.0;
};

double conformal_factor(const Immersion& u, double x, double y);
SecondFormData second_fundamental(const Immersion& u, double x, double y);
double area(const SampledSurface& s);
/// sup over the grid of |H - h nu|.
double cmc_residual(const SampledSurface& s);

/// Closed-form or asserted properties of a gallery member.
struct ReferenceData {
  std::optional<double> area;
  std::optional<double> cmc;
  std::optional<double> norm_a_sq;
  int genus = 0;
  int branch_count = 0;
  std::optional<int> index;
  std::optional<int> nullity;
  std::optional<int> index_plus_nullity;
  std::optional<int> index_lower_bound;
};

/// Parameters of a gallery request, e.g. delaunay_t3 with k=2, neck=0.3.
struct SurfaceDescriptor {
  std::string kind;
  std::map<std::string, double> params;
  std::optional<int> resolution;

  std::string id() const;
  static SurfaceDescriptor parse(const std::string& text);
  nlohmann::json to_json() const;
  static SurfaceDescriptor from_json(const nlohmann::json& j);
};

struct GallerySurface {
  SurfaceDescriptor descriptor;
  std::shared_ptr<const Immersion> immersion;
  ReferenceData reference;
  int default_resolution = 32;

  /// Grid at resolution N: sphere 2N x N, Clifford torus N x N, k-lobed
  /// Delaunay torus kN x N.
  ParamGrid grid(int resolution) const;
  ParamGrid grid() const { return grid(default_resolution); }
  SampledSurface sample(int resolution) const;
  SampledSurface sample() const { return sample(default_resolution); }
};

/// Known names: sphere_r3(rho), sphere_s3(rho), sphere_h3(rho),
/// clifford_torus, delaunay_t3(k, neck). Throws PreconditionError for
/// unknown names or parameters out of range, ConstructionError when the
/// Delaunay profile cannot be closed.
GallerySurface gallery(const SurfaceDescriptor& descriptor);
GallerySurface gallery(const std::string& text);
std::vector<std::string> gallery_names();

}  // namespace cmcindex
