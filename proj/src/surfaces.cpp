#include "cmcindex/surfaces.hpp"

#include "cmcindex/delaunay.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>
#include <sstream>

namespace cmcindex {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kMinNodes = 8;

std::string format_number(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace

// ---------------------------------------------------------------------------
// Grids

ParamGrid ParamGrid::torus(int n_x, int n_y, double period_x,
                           double period_y) {
  if (n_x < kMinNodes || n_y < kMinNodes) {
    throw PreconditionError("grids need at least 8 nodes per direction");
  }
  if (!(period_x > 0.0) || !(period_y > 0.0)) {
    throw PreconditionError("grid periods must be positive");
  }
  ParamGrid g;
  g.topology_ = Topology::Torus;
  g.n_x_ = n_x;
  g.n_y_ = n_y;
  g.period_x_ = period_x;
  g.period_y_ = period_y;
  return g;
}

ParamGrid ParamGrid::sphere(int n_x, int n_y) {
  if (n_x < kMinNodes || n_y < kMinNodes) {
    throw PreconditionError("grids need at least 8 nodes per direction");
  }
  ParamGrid g;
  g.topology_ = Topology::Sphere;
  g.n_x_ = n_x;
  g.n_y_ = n_y;
  g.period_x_ = 2.0 * kPi;
  g.period_y_ = 0.0;
  gauss_legendre(n_y, g.z_, g.z_weights_);
  return g;
}

double ParamGrid::x(int i) const { return period_x_ * i / n_x_; }

double ParamGrid::y(int j) const {
  if (topology_ == Topology::Torus) return period_y_ * j / n_y_;
  return std::atanh(z_[j]);
}

double ParamGrid::weight(int, int j) const {
  if (topology_ == Topology::Torus) {
    return period_x_ * period_y_ / (static_cast<double>(n_x_) * n_y_);
  }
  // dy = dz / (1 - z^2)
  return period_x_ / n_x_ * z_weights_[j] / (1.0 - z_[j] * z_[j]);
}

void gauss_legendre(int n, std::vector<double>& nodes,
                    std::vector<double>& weights) {
  if (n < 1) throw PreconditionError("Gauss-Legendre needs n >= 1");
  nodes.assign(n, 0.0);
  weights.assign(n, 0.0);
  for (int k = 0; k < (n + 1) / 2; ++k) {
    double z = std::cos(kPi * (k + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = z;
      for (int l = 2; l <= n; ++l) {
        const double p2 = ((2.0 * l - 1.0) * z * p1 - (l - 1.0) * p0) / l;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0;
      dp = n * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    // Recompute the derivative at the converged node.
    double p0 = 1.0, p1 = z;
    for (int l = 2; l <= n; ++l) {
      const double p2 = ((2.0 * l - 1.0) * z * p1 - (l - 1.0) * p0) / l;
      p0 = p1;
      p1 = p2;
    }
    dp = n == 1 ? 1.0 : n * (z * p1 - p0) / (z * z - 1.0);
    const double w = 2.0 / ((1.0 - z * z) * dp * dp);
    nodes[k] = -z;
    nodes[n - 1 - k] = z;
    weights[k] = w;
    weights[n - 1 - k] = w;
  }
  if (n % 2 == 1) nodes[n / 2] = 0.0;
}

ParamGrid Immersion::grid(int n_x, int n_y) const {
  if (info_.topology == Topology::Sphere) return ParamGrid::sphere(n_x, n_y);
  return ParamGrid::torus(n_x, n_y, info_.period_x, info_.period_y);
}

// ---------------------------------------------------------------------------
// Pointwise geometry

PointGeometry point_geometry(const Immersion& u, double x, double y,
                             double weight) {
  const AmbientSpace& space = u.ambient();
  PointGeometry g;
  g.x = x;
  g.y = y;
  g.weight = weight;
  g.jet = u.evaluate(x, y);
  const Vec4& p = g.jet.u;
  const double xx = space.metric(p, g.jet.ux, g.jet.ux);
  if (!(xx >= 1e-28)) {
    std::ostringstream msg;
    msg << "branch point of " << u.name() << " at (" << x << ", " << y << ")";
    throw BranchPointError(msg.str());
  }
  const double yy = space.metric(p, g.jet.uy, g.jet.uy);
  const double xy = space.metric(p, g.jet.ux, g.jet.uy);
  g.e2l = xx;
  g.lambda = 0.5 * std::log(xx);
  g.conformality = (std::abs(xx - yy) + 2.0 * std::abs(xy)) / xx;
  g.nu = space.oriented_normal(p, g.jet.ux, g.jet.uy);
  g.a_xx = space.metric(p, g.jet.uxx, g.nu);
  g.a_xy = space.metric(p, g.jet.uxy, g.nu);
  g.a_yy = space.metric(p, g.jet.uyy, g.nu);
  g.mean_curvature = (g.a_xx + g.a_yy) / xx;
  g.norm_a_sq =
      (g.a_xx * g.a_xx + 2.0 * g.a_xy * g.a_xy + g.a_yy * g.a_yy) / (xx * xx);
  const double len = std::sqrt(xx);
  g.ricci_normal =
      space.ricci_normal(p, g.nu, g.jet.ux / len, g.jet.uy / std::sqrt(yy));
  return g;
}

SampledSurface::SampledSurface(std::shared_ptr<const Immersion> immersion,
                               ParamGrid grid)
    : immersion_(std::move(immersion)), grid_(std::move(grid)) {
  points_.reserve(grid_.size());
  for (int j = 0; j < grid_.n_y(); ++j) {
    for (int i = 0; i < grid_.n_x(); ++i) {
      points_.push_back(point_geometry(*immersion_, grid_.x(i), grid_.y(j),
                                       grid_.weight(i, j)));
    }
  }
}

double SampledSurface::max_conformality_residual() const {
  double worst = 0.0;
  for (const auto& g : points_) worst = std::max(worst, g.conformality);
  return worst;
}

double conformal_factor(const Immersion& u, double x, double y) {
  return point_geometry(u, x, y).lambda;
}

SecondFormData second_fundamental(const Immersion& u, double x, double y) {
  const PointGeometry g = point_geometry(u, x, y);
  SecondFormData d;
  d.a_zz = 0.25 * std::complex<double>(g.a_xx - g.a_yy, -2.0 * g.a_xy);
  d.a_zzbar = 0.25 * (g.a_xx + g.a_yy);
  d.mean_curvature = g.mean_curvature;
  d.mean_curvature_vector = g.mean_curvature * g.nu;
  d.norm_sq = g.norm_a_sq;
  return d;
}

double area(const SampledSurface& s) {
  double total = 0.0;
  for (const auto& g : s.points()) total += g.area_weight();
  return total;
}

double cmc_residual(const SampledSurface& s) {
  const AmbientSpace& space = s.ambient();
  const double h = s.immersion().cmc();
  double worst = 0.0;
  for (const auto& g : s.points()) {
    const Vec4& p = g.jet.u;
    // Mean curvature vector as the normal part of the chart Laplacian.
    Vec4 w = space.project_tangent(p, g.jet.uxx + g.jet.uyy);
    w -= space.metric(p, w, g.jet.ux) / g.e2l * g.jet.ux;
    w -= space.metric(p, w, g.jet.uy) / g.e2l * g.jet.uy;
    const Vec4 diff = w / g.e2l - h * g.nu;
    worst = std::max(worst, std::sqrt(std::abs(space.metric(p, diff, diff))));
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Descriptors

std::string SurfaceDescriptor::id() const {
  std::string out = kind;
  char sep = ':';
  for (const auto& [key, value] : params) {
    out += sep;
    out += key + "=" + format_number(value);
    sep = ',';
  }
  return out;
}

SurfaceDescriptor SurfaceDescriptor::parse(const std::string& text) {
  SurfaceDescriptor d;
  std::string body;
  const auto colon = text.find(':');
  const auto paren = text.find('(');
  if (paren != std::string::npos && (colon == std::string::npos || paren < colon)) {
    if (text.back() != ')') {
      throw PreconditionError("unbalanced parentheses in '" + text + "'");
    }
    d.kind = text.substr(0, paren);
    body = text.substr(paren + 1, text.size() - paren - 2);
  } else if (colon != std::string::npos) {
    d.kind = text.substr(0, colon);
    body = text.substr(colon + 1);
  } else {
    d.kind = text;
  }
  if (d.kind.empty()) throw PreconditionError("empty surface name");
  std::stringstream ss(body);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos) {
      throw PreconditionError("expected key=value in '" + item + "'");
    }
    const std::string key = item.substr(0, eq);
    const std::string val = item.substr(eq + 1);
    double v = 0.0;
    auto res = std::from_chars(val.data(), val.data() + val.size(), v);
    if (res.ec != std::errc() || res.ptr != val.data() + val.size()) {
      throw PreconditionError("bad number '" + val + "' for " + key);
    }
    if (key == "resolution" || key == "N") {
      d.resolution = static_cast<int>(v);
    } else {
      d.params[key] = v;
    }
  }
  return d;
}

nlohmann::json SurfaceDescriptor::to_json() const {
  nlohmann::json j;
  j["kind"] = kind;
  j["params"] = nlohmann::json::object();
  for (const auto& [key, value] : params) j["params"][key] = value;
  if (resolution) j["resolution"] = *resolution;
  return j;
}

SurfaceDescriptor SurfaceDescriptor::from_json(const nlohmann::json& j) {
  if (j.is_string()) return parse(j.get<std::string>());
  if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string()) {
    throw PreconditionError("surface descriptor needs a string 'kind'");
  }
  SurfaceDescriptor d;
  d.kind = j["kind"].get<std::string>();
  if (j.contains("params")) {
    if (!j["params"].is_object()) {
      throw PreconditionError("surface 'params' must be an object");
    }
    for (const auto& [key, value] : j["params"].items()) {
      if (!value.is_number()) {
        throw PreconditionError("surface parameter " + key +
                                " must be a number");
      }
      d.params[key] = value.get<double>();
    }
  }
  if (j.contains("resolution")) {
    if (!j["resolution"].is_number_integer()) {
      throw PreconditionError("surface 'resolution' must be an integer");
    }
    d.resolution = j["resolution"].get<int>();
  }
  return d;
}

// ---------------------------------------------------------------------------
// Gallery

namespace {

struct SphereChart {
  // Unit sphere in Mercator coordinates, with the second component scaled
  // by o = +-1 to select the orientation.
  double o = 1.0;

  void operator()(double x, double y, Eigen::Vector3d& s, Eigen::Vector3d& sx,
                  Eigen::Vector3d& sy, Eigen::Vector3d& sxx,
                  Eigen::Vector3d& sxy, Eigen::Vector3d& syy) const {
    const double sech = 1.0 / std::cosh(y);
    const double th = std::tanh(y);
    const double c = std::cos(x), sn = std::sin(x);
    const double d2 = sech * (th * th - sech * sech);  // sech''
    s << sech * c, o * sech * sn, th;
    sx << -sech * sn, o * sech * c, 0.0;
    sy << -sech * th * c, -o * sech * th * sn, sech * sech;
    sxx << -sech * c, -o * sech * sn, 0.0;
    sxy << sech * th * sn, -o * sech * th * c, 0.0;
    syy << d2 * c, o * d2 * sn, -2.0 * sech * sech * th;
  }
};

Vec4 lift(const Eigen::Vector3d& v, double scale, double last = 0.0) {
  return Vec4(scale * v[0], scale * v[1], scale * v[2], last);
}

ChartFunction sphere_chart(AmbientKind kind, double rho, double o) {
  double scale = rho, height = 0.0;
  if (kind == AmbientKind::S3) {
    scale = std::sin(rho);
    height = std::cos(rho);
  } else if (kind == AmbientKind::H3) {
    scale = std::sinh(rho);
    height = std::cosh(rho);
  }
  return [scale, height, o](double x, double y) {
    Eigen::Vector3d s, sx, sy, sxx, sxy, syy;
    SphereChart{o}(x, y, s, sx, sy, sxx, sxy, syy);
    return ChartJet{lift(s, scale, height), lift(sx, scale), lift(sy, scale),
                    lift(sxx, scale), lift(sxy, scale), lift(syy, scale)};
  };
}

// Picks the chart orientation for which <H, nu> = h >= 0.
std::shared_ptr<const Immersion> oriented(
    const AmbientSpace& space, const std::function<ChartFunction(double)>& make,
    Immersion::Info info, double probe_x, double probe_y) {
  auto trial = std::make_shared<Immersion>(space, make(1.0), info);
  if (point_geometry(*trial, probe_x, probe_y).mean_curvature < 0.0) {
    trial = std::make_shared<Immersion>(space, make(-1.0), info);
  }
  return trial;
}

double require_param(const SurfaceDescriptor& d, const std::string& key) {
  auto it = d.params.find(key);
  if (it == d.params.end()) {
    throw PreconditionError(d.kind + " needs parameter " + key);
  }
  return it->second;
}

void check_keys(const SurfaceDescriptor& d,
                std::initializer_list<const char*> allowed) {
  for (const auto& [key, value] : d.params) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) {
      throw PreconditionError("unknown parameter '" + key + "' for " + d.kind);
    }
    if (!std::isfinite(value)) {
      throw PreconditionError("parameter " + key + " must be finite");
    }
  }
}

GallerySurface make_sphere(SurfaceDescriptor d, AmbientSpace space) {
  check_keys(d, {"rho"});
  d.params.emplace("rho", 1.0);
  const double rho = require_param(d, "rho");
  if (!(rho > 0.0)) throw PreconditionError("sphere radius must be positive");
  if (space.kind() == AmbientKind::S3 && !(rho < kPi)) {
    throw PreconditionError("geodesic radius in S3 must lie in (0, pi)");
  }

  GallerySurface g;
  g.descriptor = d;
  g.default_resolution = 32;
  ReferenceData& ref = g.reference;
  double radius = rho, h = 2.0 / rho;
  switch (space.kind()) {
    case AmbientKind::S3:
      radius = std::sin(rho);
      h = 2.0 * std::abs(std::cos(rho) / std::sin(rho));
      break;
    case AmbientKind::H3:
      radius = std::sinh(rho);
      h = 2.0 * std::cosh(rho) / std::sinh(rho);
      ref.index_plus_nullity = 4;
      break;
    default:
      break;
  }
  ref.area = 4.0 * kPi * radius * radius;
  ref.cmc = h;
  ref.norm_a_sq = 0.5 * h * h;
  ref.genus = 0;
  ref.branch_count = 0;
  // Jacobi eigenvalues (l(l+1) - 2) / radius^2.
  ref.index = 1;
  ref.nullity = 3;
  ref.index_plus_nullity = 4;

  Immersion::Info info;
  info.name = d.id();
  info.topology = Topology::Sphere;
  info.period_x = 2.0 * kPi;
  info.cmc = h;
  const AmbientKind kind = space.kind();
  g.immersion = oriented(
      space, [kind, rho](double o) { return sphere_chart(kind, rho, o); },
      info, 0.3, 0.2);
  return g;
}

GallerySurface make_clifford(SurfaceDescriptor d) {
  check_keys(d, {});
  GallerySurface g;
  g.descriptor = d;
  g.default_resolution = 48;
  ReferenceData& ref = g.reference;
  ref.area = 2.0 * kPi * kPi;
  ref.cmc = 0.0;
  ref.norm_a_sq = 2.0;
  ref.genus = 1;
  // Jacobi eigenvalues 2(j^2 + k^2) - 4 over the integer lattice.
  ref.index = 5;
  ref.nullity = 4;
  ref.index_plus_nullity = 9;

  Immersion::Info info;
  info.name = d.id();
  info.topology = Topology::Torus;
  info.period_x = 2.0 * kPi;
  info.period_y = 2.0 * kPi;
  info.genus = 1;
  info.cmc = 0.0;
  const double a = 1.0 / std::sqrt(2.0);
  g.immersion = std::make_shared<Immersion>(
      AmbientSpace::s3(),
      [a](double x, double y) {
        const double cx = std::cos(x), sx = std::sin(x);
        const double cy = std::cos(y), sy = std::sin(y);
        return ChartJet{a * Vec4(cx, sx, cy, sy), a * Vec4(-sx, cx, 0, 0),
                        a * Vec4(0, 0, -sy, cy),  a * Vec4(-cx, -sx, 0, 0),
                        Vec4::Zero(),             a * Vec4(0, 0, -cy, -sy)};
      },
      info);
  return g;
}

GallerySurface make_delaunay(SurfaceDescriptor d) {
  check_keys(d, {"k", "neck"});
  d.params.emplace("k", 1.0);
  d.params.emplace("neck", 0.3);
  const double kd = require_param(d, "k");
  const int k = static_cast<int>(kd);
  if (k < 1 || k != kd) {
    throw PreconditionError("delaunay_t3 lobe count k must be an integer >= 1");
  }
  const double neck = require_param(d, "neck");
  auto profile = std::make_shared<const DelaunayProfile>(neck);

  const double T = profile->period();
  const double c = 1.0 / (k * profile->axial_period());
  if (!(c * profile->r_max() < 0.5)) {
    std::ostringstream msg;
    msg << "Delaunay torus with neck ratio " << neck << " and k=" << k
        << " does not fit the unit cell: scaled bulge radius "
        << c * profile->r_max() << " >= 1/2";
    throw ConstructionError(msg.str());
  }

  GallerySurface g;
  g.descriptor = d;
  g.default_resolution = 24;
  ReferenceData& ref = g.reference;
  ref.cmc = k * profile->axial_period();
  ref.genus = 1;
  ref.index_lower_bound = 2 * k - 2;
  // Area of the surface of revolution, 2 pi int r^2 dt over k lobes, by
  // Simpson's rule on a fine profile sample.
  {
    const int m = 4000;
    double sum = 0.0;
    for (int i = 0; i <= m; ++i) {
      const double r = profile->at(T * i / m).r;
      const double w = (i == 0 || i == m) ? 1.0 : (i % 2 ? 4.0 : 2.0);
      sum += w * r * r;
    }
    ref.area = 2.0 * kPi * k * c * c * sum * T / (3.0 * m);
  }

  Immersion::Info info;
  info.name = d.id();
  info.topology = Topology::Torus;
  info.period_x = k * T;
  info.period_y = 2.0 * kPi;
  info.genus = 1;
  info.cmc = *ref.cmc;
  info.shift_x = Vec4(1.0, 0.0, 0.0, 0.0);

  auto make = [profile, c](double o) -> ChartFunction {
    return [profile, c, o](double t, double phi) {
      const auto s = profile->at(t);
      const auto ds = DelaunayProfile::derivative(s);
      const double ct = std::cos(s.theta), st = std::sin(s.theta);
      const double xpp = ds.r * ct - s.r * st * ds.theta;
      const double rpp = ds.r * st + s.r * ct * ds.theta;
      const double cp = std::cos(phi), sp = o * std::sin(phi);
      const Vec4 e(0.0, cp, sp, 0.0);
      const Vec4 e_phi(0.0, -sp * o, cp * o, 0.0);
      const Vec4 e_phiphi(0.0, -cp, -sp, 0.0);
      ChartJet j;
      j.u = Vec4(c * s.x, 0.5, 0.5, 0.0) + c * s.r * e;
      j.ux = Vec4(c * ds.x, 0.0, 0.0, 0.0) + c * ds.r * e;
      j.uy = c * s.r * e_phi;
      j.uxx = Vec4(c * xpp, 0.0, 0.0, 0.0) + c * rpp * e;
      j.uxy = c * ds.r * e_phi;
      j.uyy = c * s.r * e_phiphi;
      return j;
    };
  };
  g.immersion = oriented(AmbientSpace::flat_t3(), make, info, 0.1, 0.3);
  return g;
}

}  // namespace

ParamGrid GallerySurface::grid(int resolution) const {
  if (resolution < kMinNodes) {
    throw PreconditionError("resolution must be at least 8");
  }
  const auto& info = immersion->info();
  if (info.topology == Topology::Sphere) {
    return ParamGrid::sphere(2 * resolution, resolution);
  }
  if (descriptor.kind == "delaunay_t3") {
    const int k = static_cast<int>(descriptor.params.at("k"));
    return ParamGrid::torus(k * resolution, resolution, info.period_x,
                            info.period_y);
  }
  return ParamGrid::torus(resolution, resolution, info.period_x,
                          info.period_y);
}

SampledSurface GallerySurface::sample(int resolution) const {
  return SampledSurface(immersion, grid(resolution));
}

GallerySurface gallery(const SurfaceDescriptor& descriptor) {
  GallerySurface g;
  if (descriptor.kind == "sphere_r3") {
    g = make_sphere(descriptor, AmbientSpace::r3());
  } else if (descriptor.kind == "sphere_s3") {
    g = make_sphere(descriptor, AmbientSpace::s3());
  } else if (descriptor.kind == "sphere_h3") {
    g = make_sphere(descriptor, AmbientSpace::h3());
  } else if (descriptor.kind == "clifford_torus") {
    g = make_clifford(descriptor);
  } else if (descriptor.kind == "delaunay_t3") {
    g = make_delaunay(descriptor);
  } else {
    throw PreconditionError("unknown surface '" + descriptor.kind + "'");
  }
  if (descriptor.resolution) {
    if (*descriptor.resolution < kMinNodes) {
      throw PreconditionError("resolution must be at least 8");
    }
    g.default_resolution = *descriptor.resolution;
  }
  return g;
}

GallerySurface gallery(const std::string& text) {
  return gallery(SurfaceDescriptor::parse(text));
}

std::vector<std::string> gallery_names() {
  return {"clifford_torus", "delaunay_t3", "sphere_h3", "sphere_r3",
          "sphere_s3"};
}

}  // namespace cmcindex
