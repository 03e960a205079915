#include "cmcindex/variations.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace cmcindex {

namespace {

using cd = std::complex<double>;
using nlohmann::json;

void check_sizes(const SampledSurface& s, const VariationField& v) {
  if (v.size() != s.size()) {
    throw PreconditionError("variation field is sampled on a different grid");
  }
}

double hermitian(const AmbientSpace& space, const Vec4& p,
                 const ComplexVec4& a, const ComplexVec4& b) {
  // Real part of <a, conj(b)>; callers pass a == b for squared norms.
  const Vec4 ar = a.real(), ai = a.imag(), br = b.real(), bi = b.imag();
  return space.metric(p, ar, br) + space.metric(p, ai, bi);
}

cd complex_riemann(const AmbientSpace& space, const Vec4& p,
                   const ComplexVec4& x, const ComplexVec4& y,
                   const ComplexVec4& z, const ComplexVec4& w) {
  // Multilinear extension, expanded over real and imaginary parts.
  const std::array<Vec4, 2> X{x.real(), x.imag()}, Y{y.real(), y.imag()},
      Z{z.real(), z.imag()}, W{w.real(), w.imag()};
  const std::array<cd, 2> unit{cd(1.0, 0.0), cd(0.0, 1.0)};
  cd total = 0.0;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l) {
          const double r = space.riemann(p, X[i], Y[j], Z[k], W[l]);
          if (r != 0.0) total += unit[i] * unit[j] * unit[k] * unit[l] * r;
        }
  return total;
}

// Ambient derivative of nu along x and y (Weingarten).
void normal_derivatives(const PointGeometry& g, Vec4& nu_x, Vec4& nu_y) {
  nu_x = -(g.a_xx * g.jet.ux + g.a_xy * g.jet.uy) / g.e2l;
  nu_y = -(g.a_xy * g.jet.ux + g.a_yy * g.jet.uy) / g.e2l;
}

double trig_phase(const json& mode, const Vec4& p, double scale) {
  const auto& k = mode.at("k");
  double arg = mode.value("phase", 0.0);
  for (int c = 0; c < 4 && c < static_cast<int>(k.size()); ++c) {
    arg += scale * k[c].get<double>() * p[c];
  }
  return arg;
}

Vec4 trig_wave(const json& mode, double scale) {
  const auto& k = mode.at("k");
  Vec4 w = Vec4::Zero();
  for (int c = 0; c < 4 && c < static_cast<int>(k.size()); ++c) {
    w[c] = scale * k[c].get<double>();
  }
  return w;
}

VariationField ambient_trig_field(const SampledSurface& s, const json& spec) {
  const AmbientSpace& space = s.ambient();
  const double scale = spec.value("scale", ambient_frequency_scale(space));
  std::vector<VectorJet> jets(s.size());
  for (int n = 0; n < s.size(); ++n) {
    const auto& g = s[n];
    const Vec4& p = g.jet.u;
    Vec4 V = Vec4::Zero(), Vx = Vec4::Zero(), Vy = Vec4::Zero();
    for (const auto& mode : spec.at("modes")) {
      const double arg = trig_phase(mode, p, scale);
      const Vec4 wave = trig_wave(mode, scale);
      const double c = std::cos(arg), sn = std::sin(arg);
      const auto& amp = mode.at("amp");
      for (int comp = 0; comp < 4 && comp < static_cast<int>(amp.size());
           ++comp) {
        const double a = amp[comp].get<double>();
        V[comp] += a * c;
        Vx[comp] -= a * sn * wave.dot(g.jet.ux);
        Vy[comp] -= a * sn * wave.dot(g.jet.uy);
      }
    }
    jets[n].v = space.project_tangent(p, V);
    jets[n].vx = space.project_tangent_derivative(p, g.jet.ux, V, Vx);
    jets[n].vy = space.project_tangent_derivative(p, g.jet.uy, V, Vy);
  }
  return VariationField(std::move(jets), spec);
}

std::vector<ScalarJet> chart_scalar(const SampledSurface& s, const json& spec) {
  const ParamGrid& grid = s.grid();
  if (grid.topology() != Topology::Torus) {
    throw PreconditionError("chart_normal fields need a torus chart");
  }
  const double wx = 2.0 * std::numbers::pi / grid.period_x();
  const double wy = 2.0 * std::numbers::pi / grid.period_y();
  std::vector<ScalarJet> out(s.size());
  for (int n = 0; n < s.size(); ++n) {
    const auto& g = s[n];
    for (const auto& mode : spec.at("modes")) {
      const double m = mode.at("m").get<double>();
      const double k = mode.at("n").get<double>();
      const double a = mode.at("amp").get<double>();
      const double arg = wx * m * g.x + wy * k * g.y + mode.value("phase", 0.0);
      out[n].f += a * std::cos(arg);
      out[n].fx -= a * wx * m * std::sin(arg);
      out[n].fy -= a * wy * k * std::sin(arg);
    }
  }
  return out;
}

VariationField normal_from_scalar(const SampledSurface& s,
                                  const std::vector<ScalarJet>& f,
                                  const json& spec) {
  std::vector<VectorJet> jets(s.size());
  for (int n = 0; n < s.size(); ++n) {
    const auto& g = s[n];
    Vec4 nu_x, nu_y;
    normal_derivatives(g, nu_x, nu_y);
    jets[n].v = f[n].f * g.nu;
    jets[n].vx = f[n].fx * g.nu + f[n].f * nu_x;
    jets[n].vy = f[n].fy * g.nu + f[n].f * nu_y;
  }
  return VariationField(std::move(jets), spec);
}

VariationField tangential_field(const SampledSurface& s, const json& spec) {
  const double a = spec.value("a", 0.0), b = spec.value("b", 0.0);
  std::vector<VectorJet> jets(s.size());
  for (int n = 0; n < s.size(); ++n) {
    const auto& j = s[n].jet;
    jets[n].v = a * j.ux + b * j.uy;
    jets[n].vx = a * j.uxx + b * j.uxy;
    jets[n].vy = a * j.uxy + b * j.uyy;
  }
  return VariationField(std::move(jets), spec);
}

}  // namespace

// ---------------------------------------------------------------------------
// Fields

VariationField VariationField::zero(const SampledSurface& s) {
  return VariationField(std::vector<VectorJet>(s.size()),
                        json{{"type", "zero"}});
}

VariationField VariationField::scaled(double c) const {
  std::vector<VectorJet> out = jets_;
  for (auto& j : out) {
    j.v *= c;
    j.vx *= c;
    j.vy *= c;
  }
  return VariationField(std::move(out),
                        json{{"type", "scaled"}, {"factor", c}, {"of", spec_}});
}

double VariationField::sup_norm(const SampledSurface& s) const {
  check_sizes(s, *this);
  double worst = 0.0;
  for (int n = 0; n < size(); ++n) {
    worst = std::max(worst, s.ambient().norm(s[n].jet.u, jets_[n].v));
  }
  return worst;
}

SplitPoint split(const SampledSurface& s, const VariationField& v, int k) {
  const AmbientSpace& space = s.ambient();
  const PointGeometry& g = s[k];
  const VectorJet& j = v[k];
  const Vec4& p = g.jet.u;
  SplitPoint out;
  out.cov_x = space.project_tangent(p, j.vx);
  out.cov_y = space.project_tangent(p, j.vy);
  out.f = space.metric(p, j.v, g.nu);
  out.a = space.metric(p, j.v, g.jet.ux) / g.e2l;
  out.b = space.metric(p, j.v, g.jet.uy) / g.e2l;
  out.fx = space.metric(p, out.cov_x, g.nu) - (g.a_xx * out.a + g.a_xy * out.b);
  out.fy = space.metric(p, out.cov_y, g.nu) - (g.a_xy * out.a + g.a_yy * out.b);
  out.normal = out.f * g.nu;
  out.tangential = j.v - out.normal;
  const ComplexVec4 uz =
      0.5 * (g.jet.ux.cast<cd>() - cd(0.0, 1.0) * g.jet.uy.cast<cd>());
  const cd beta(out.a, -out.b);
  out.sigma_01 = beta * uz.conjugate();
  out.sigma_10 = std::conj(beta) * uz;
  return out;
}

VariationField normal_part(const SampledSurface& s, const VariationField& v) {
  check_sizes(s, v);
  std::vector<ScalarJet> f(s.size());
  for (int n = 0; n < s.size(); ++n) {
    const SplitPoint sp = split(s, v, n);
    f[n] = {sp.f, sp.fx, sp.fy};
  }
  return normal_from_scalar(s, f, json{{"type", "normal_part"}, {"of", v.spec()}});
}

VariationField tangential_part(const SampledSurface& s,
                               const VariationField& v) {
  const VariationField nrm = normal_part(s, v);
  std::vector<VectorJet> out = v.jets();
  for (int n = 0; n < s.size(); ++n) {
    out[n].v -= nrm[n].v;
    out[n].vx -= nrm[n].vx;
    out[n].vy -= nrm[n].vy;
  }
  return VariationField(std::move(out),
                        json{{"type", "tangential_part"}, {"of", v.spec()}});
}

double ambient_frequency_scale(const AmbientSpace& space) {
  return space.kind() == AmbientKind::FlatT3 ? 2.0 * std::numbers::pi : 1.0;
}

namespace {

json random_wave(Rng& rng, int degree, int components) {
  json k = json::array();
  int norm1 = 0;
  for (int c = 0; c < components; ++c) {
    const int kc = rng.integer(-degree, degree);
    norm1 += std::abs(kc);
    k.push_back(kc);
  }
  // Keep the total degree bounded so the field stays resolved.
  while (norm1 > degree) {
    for (auto& kc : k) {
      if (norm1 <= degree) break;
      int val = kc.get<int>();
      if (val != 0) {
        kc = val > 0 ? val - 1 : val + 1;
        --norm1;
      }
    }
  }
  while (static_cast<int>(k.size()) < 4) k.push_back(0);
  return k;
}

double round_to(double x, double q) { return std::round(x / q) * q; }

int wave_components(const AmbientSpace& space) {
  return space.kind() == AmbientKind::S3 || space.kind() == AmbientKind::H3
             ? 4
             : 3;
}

}  // namespace

json random_ambient_spec(const AmbientSpace& space, Rng& rng, int degree,
                         int modes) {
  json spec{{"type", "ambient_trig"},
            {"scale", ambient_frequency_scale(space)},
            {"modes", json::array()}};
  for (int m = 0; m < modes; ++m) {
    json mode;
    mode["k"] = random_wave(rng, degree, wave_components(space));
    json amp = json::array();
    for (int c = 0; c < 4; ++c) amp.push_back(round_to(rng.uniform(-1, 1), 1e-6));
    mode["amp"] = amp;
    mode["phase"] = round_to(rng.uniform(0, 2 * std::numbers::pi), 1e-6);
    spec["modes"].push_back(mode);
  }
  return spec;
}

json random_normal_spec(const AmbientSpace& space, Rng& rng, int degree,
                        int modes) {
  json spec{{"type", "normal_trig"},
            {"scale", ambient_frequency_scale(space)},
            {"modes", json::array()}};
  for (int m = 0; m < modes; ++m) {
    json mode;
    mode["k"] = random_wave(rng, degree, wave_components(space));
    mode["amp"] = round_to(rng.uniform(-1, 1), 1e-6);
    mode["phase"] = round_to(rng.uniform(0, 2 * std::numbers::pi), 1e-6);
    spec["modes"].push_back(mode);
  }
  return spec;
}

std::vector<ScalarJet> ambient_scalar(const SampledSurface& s,
                                      const json& spec) {
  const double scale = spec.value("scale", ambient_frequency_scale(s.ambient()));
  std::vector<ScalarJet> out(s.size());
  for (int n = 0; n < s.size(); ++n) {
    const auto& g = s[n];
    for (const auto& mode : spec.at("modes")) {
      const double arg = trig_phase(mode, g.jet.u, scale);
      const Vec4 wave = trig_wave(mode, scale);
      const double a = mode.at("amp").get<double>();
      out[n].f += a * std::cos(arg);
      out[n].fx -= a * std::sin(arg) * wave.dot(g.jet.ux);
      out[n].fy -= a * std::sin(arg) * wave.dot(g.jet.uy);
    }
  }
  return out;
}

VariationField make_field(const SampledSurface& s, const json& spec) {
  if (!spec.is_object() || !spec.contains("type")) {
    throw PreconditionError("field description needs a 'type'");
  }
  const std::string type = spec.at("type").get<std::string>();
  if (type == "zero") return VariationField::zero(s);
  if (type == "unit_normal") {
    return normal_from_scalar(s, std::vector<ScalarJet>(s.size(), {1, 0, 0}),
                              spec);
  }
  if (type == "ambient_trig") return ambient_trig_field(s, spec);
  if (type == "normal_trig") {
    return normal_from_scalar(s, ambient_scalar(s, spec), spec);
  }
  if (type == "chart_normal") {
    return normal_from_scalar(s, chart_scalar(s, spec), spec);
  }
  if (type == "tangential") return tangential_field(s, spec);
  if (type == "scaled") {
    VariationField inner = make_field(s, spec.at("of"));
    VariationField out = inner.scaled(spec.at("factor").get<double>());
    return VariationField(out.jets(), spec);
  }
  if (type == "sum") {
    std::vector<VectorJet> total(s.size());
    for (const auto& term : spec.at("terms")) {
      const VariationField f = make_field(s, term);
      for (int n = 0; n < s.size(); ++n) {
        total[n].v += f[n].v;
        total[n].vx += f[n].vx;
        total[n].vy += f[n].vy;
      }
    }
    return VariationField(std::move(total), spec);
  }
  if (type == "normal_part") return normal_part(s, make_field(s, spec.at("of")));
  if (type == "tangential_part") {
    return tangential_part(s, make_field(s, spec.at("of")));
  }
  throw PreconditionError("unknown field type '" + type + "'");
}

// ---------------------------------------------------------------------------
// First and second variations

double first_variation_area(const SampledSurface& s, const VariationField& v) {
  check_sizes(s, v);
  double total = 0.0;
  for (int n = 0; n < s.size(); ++n) {
    const auto& g = s[n];
    const double f = s.ambient().metric(g.jet.u, v[n].v, g.nu);
    total -= f * g.mean_curvature * g.area_weight();
  }
  return total;
}

double first_variation_volume(const SampledSurface& s, const VariationField& v,
                              const AmbientFunction* mean) {
  check_sizes(s, v);
  const double h = s.immersion().cmc();
  double total = 0.0;
  for (int n = 0; n < s.size(); ++n) {
    const auto& g = s[n];
    const double H = mean ? mean->value(g.jet.u) : h;
    const double f = s.ambient().metric(g.jet.u, v[n].v, g.nu);
    total += H * f * g.area_weight();
  }
  return total;
}

double second_variation_area(const SampledSurface& s, const VariationField& v) {
  check_sizes(s, v);
  double total = 0.0;
  for (int n = 0; n < s.size(); ++n) {
    const auto& g = s[n];
    const SplitPoint sp = split(s, v, n);
    const double h = g.mean_curvature;
    const double grad_sq = (sp.fx * sp.fx + sp.fy * sp.fy) / g.e2l;
    const double a_sigma = sp.a * sp.a * g.a_xx + 2.0 * sp.a * sp.b * g.a_xy +
                           sp.b * sp.b * g.a_yy;
    const double density = grad_sq - sp.f * sp.f * g.norm_a_sq -
                           sp.f * sp.f * g.ricci_normal +
                           sp.f * sp.f * h * h + a_sigma * h +
                           2.0 * (sp.a * sp.fx + sp.b * sp.fy) * h;
    total += density * g.area_weight();
  }
  return total;
}

double second_variation_energy(const SampledSurface& s,
                               const VariationField& v) {
  check_sizes(s, v);
  const AmbientSpace& space = s.ambient();
  double total = 0.0;
  for (int n = 0; n < s.size(); ++n) {
    const auto& g = s[n];
    const Vec4& p = g.jet.u;
    const Vec4 dx = space.project_tangent(p, v[n].vx);
    const Vec4 dy = space.project_tangent(p, v[n].vy);
    const Vec4& w = v[n].v;
    const double density = space.metric(p, dx, dx) + space.metric(p, dy, dy) -
                           space.riemann(p, w, g.jet.ux, g.jet.ux, w) -
                           space.riemann(p, w, g.jet.uy, g.jet.uy, w);
    total += density * g.weight;
  }
  return total;
}

double second_variation_energy_complex(const SampledSurface& s,
                                       const VariationField& v) {
  check_sizes(s, v);
  const AmbientSpace& space = s.ambient();
  const cd I(0.0, 1.0);
  double total = 0.0;
  for (int n = 0; n < s.size(); ++n) {
    const auto& g = s[n];
    const Vec4& p = g.jet.u;
    const ComplexVec4 dz =
        0.5 * (space.project_tangent(p, v[n].vx).cast<cd>() -
               I * space.project_tangent(p, v[n].vy).cast<cd>());
    const ComplexVec4 uz =
        0.5 * (g.jet.ux.cast<cd>() - I * g.jet.uy.cast<cd>());
    const ComplexVec4 w = v[n].v.cast<cd>();
    const cd curv = complex_riemann(space, p, w, uz, uz.conjugate(), w);
    const double density = 4.0 * hermitian(space, p, dz, dz) - 4.0 * curv.real();
    total += density * g.weight;
  }
  return total;
}

double second_variation_volume(const SampledSurface& s,
                               const VariationField& v,
                               const AmbientFunction* mean) {
  check_sizes(s, v);
  const double h_const = s.immersion().cmc();
  double total = 0.0;
  for (int n = 0; n < s.size(); ++n) {
    const auto& g = s[n];
    const SplitPoint sp = split(s, v, n);
    const double H = mean ? mean->value(g.jet.u) : h_const;
    const double dH = mean ? mean->derivative(g.jet.u, g.nu) : 0.0;
    const double a_sigma = sp.a * sp.a * g.a_xx + 2.0 * sp.a * sp.b * g.a_xy +
                           sp.b * sp.b * g.a_yy;
    const double density = -H * sp.f * sp.f * g.mean_curvature -
                           2.0 * H * (sp.a * sp.fx + sp.b * sp.fy) -
                           H * a_sigma + sp.f * sp.f * dH;
    total += density * g.area_weight();
  }
  return total;
}

double second_variation_area_h(const SampledSurface& s,
                               const VariationField& v) {
  return second_variation_area(s, v) + second_variation_volume(s, v);
}

double second_variation_energy_h(const SampledSurface& s,
                                 const VariationField& v) {
  return second_variation_energy(s, v) + second_variation_volume(s, v);
}

double jacobi_form(const SampledSurface& s, const VariationField& v) {
  check_sizes(s, v);
  double total = 0.0;
  for (int n = 0; n < s.size(); ++n) {
    const auto& g = s[n];
    const SplitPoint sp = split(s, v, n);
    const double density = (sp.fx * sp.fx + sp.fy * sp.fy) / g.e2l -
                           g.jacobi_potential() * sp.f * sp.f;
    total += density * g.area_weight();
  }
  return total;
}

// ---------------------------------------------------------------------------
// Conformal defect and the comparison identity

DefectField conformal_defect(const SampledSurface& s, const VariationField& v) {
  check_sizes(s, v);
  const AmbientSpace& space = s.ambient();
  const cd I(0.0, 1.0);
  DefectField out;
  out.eta.resize(s.size());
  out.eta_sq.resize(s.size());
  out.mu_sq.resize(s.size());
  for (int n = 0; n < s.size(); ++n) {
    const auto& g = s[n];
    const auto& j = g.jet;
    const Vec4& p = j.u;
    const VectorJet& w = v[n];
    auto m = [&](const Vec4& a, const Vec4& b) { return space.metric(p, a, b); };

    const double a = m(w.v, j.ux) / g.e2l;
    const double b = m(w.v, j.uy) / g.e2l;
    const double lx = 2.0 * m(j.uxx, j.ux) / g.e2l;
    const double ly = 2.0 * m(j.uxy, j.ux) / g.e2l;
    const double a_x = (m(w.vx, j.ux) + m(w.v, j.uxx)) / g.e2l - lx * a;
    const double a_y = (m(w.vy, j.ux) + m(w.v, j.uxy)) / g.e2l - ly * a;
    const double b_x = (m(w.vx, j.uy) + m(w.v, j.uxy)) / g.e2l - lx * b;
    const double b_y = (m(w.vy, j.uy) + m(w.v, j.uyy)) / g.e2l - ly * b;
    const cd beta(a, -b);
    const cd beta_x(a_x, -b_x), beta_y(a_y, -b_y);
    const cd beta_z = 0.5 * (beta_x - I * beta_y);

    const ComplexVec4 uz = 0.5 * (j.ux.cast<cd>() - I * j.uy.cast<cd>());
    const ComplexVec4 uzbar = uz.conjugate();
    // d/dz of sigma^{0,1} = beta u_zbar in embedding coordinates, then the
    // projection onto the tangent plane of the surface.
    const ComplexVec4 raw =
        beta_z * uzbar + beta * (0.25 * (j.uxx + j.uyy)).cast<cd>();
    const Vec4 rr = raw.real(), ri = raw.imag();
    auto tangential = [&](const Vec4& x) -> Vec4 {
      return (m(x, j.ux) * j.ux + m(x, j.uy) * j.uy) / g.e2l;
    };
    ComplexVec4 eta = tangential(rr).cast<cd>() + I * tangential(ri).cast<cd>();

    const double f = m(w.v, g.nu);
    const cd a_zz = 0.25 * cd(g.a_xx - g.a_yy, -2.0 * g.a_xy);
    eta -= (2.0 / g.e2l * f * a_zz) * uzbar;

    out.eta[n] = eta;
    out.eta_sq[n] = hermitian(space, p, eta, eta);
    out.mu_sq[n] = 2.0 / g.e2l * out.eta_sq[n];
    out.eta_integral += out.eta_sq[n] * g.weight;
    out.mu_integral += out.mu_sq[n] * g.area_weight();
  }
  return out;
}

IdentityResidual comparison_identity_residual(const SampledSurface& s,
                                              const VariationField& v) {
  IdentityResidual r;
  r.d2_area = second_variation_area(s, v);
  r.d2_energy = second_variation_energy(s, v);
  r.defect = 8.0 * conformal_defect(s, v).eta_integral;
  r.absolute = std::abs(r.d2_area - r.d2_energy + r.defect);
  r.relative = r.absolute /
               std::max({std::abs(r.d2_area), std::abs(r.d2_energy), 1.0});
  return r;
}

// ---------------------------------------------------------------------------
// Finite differences

std::string_view to_string(Functional f) {
  switch (f) {
    case Functional::Area: return "area";
    case Functional::Energy: return "energy";
    case Functional::VolumeH: return "volume_h";
    case Functional::AreaH: return "area_h";
    case Functional::EnergyH: return "energy_h";
  }
  return "unknown";
}

namespace {

struct Deformed {
  Vec4 point, velocity, dx, dy;
};

Deformed deform(const AmbientSpace& space, const PointGeometry& g,
                const VectorJet& w, double t) {
  const GeodesicJet geo = geodesic(space, g.jet.u, w.v, t);
  return {geo.point, geo.velocity,
          geodesic_variation(space, g.jet.u, w.v, t, g.jet.ux, w.vx),
          geodesic_variation(space, g.jet.u, w.v, t, g.jet.uy, w.vy)};
}

double area_at(const SampledSurface& s, const VariationField& v, double t) {
  const AmbientSpace& space = s.ambient();
  double total = 0.0;
  for (int n = 0; n < s.size(); ++n) {
    const Deformed d = deform(space, s[n], v[n], t);
    const double xx = space.metric(d.point, d.dx, d.dx);
    const double yy = space.metric(d.point, d.dy, d.dy);
    const double xy = space.metric(d.point, d.dx, d.dy);
    total += s[n].weight * std::sqrt(std::max(0.0, xx * yy - xy * xy));
  }
  return total;
}

double energy_at(const SampledSurface& s, const VariationField& v, double t) {
  const AmbientSpace& space = s.ambient();
  double total = 0.0;
  for (int n = 0; n < s.size(); ++n) {
    const Deformed d = deform(space, s[n], v[n], t);
    total += 0.5 * s[n].weight *
             (space.metric(d.point, d.dx, d.dx) +
              space.metric(d.point, d.dy, d.dy));
  }
  return total;
}

double volume_rate_at(const SampledSurface& s, const VariationField& v,
                      double t, const AmbientFunction* mean) {
  const AmbientSpace& space = s.ambient();
  const double h = s.immersion().cmc();
  double total = 0.0;
  for (int n = 0; n < s.size(); ++n) {
    const Deformed d = deform(space, s[n], v[n], t);
    const double H = mean ? mean->value(d.point) : h;
    total += s[n].weight * H *
             space.volume_form(d.point, d.velocity, d.dx, d.dy);
  }
  return total;
}

template <class F>
double second_difference(F&& f, double step) {
  auto d2 = [&](double h) {
    return (-f(2 * h) + 16.0 * f(h) - 30.0 * f(0.0) + 16.0 * f(-h) -
            f(-2 * h)) /
           (12.0 * h * h);
  };
  return (16.0 * d2(0.5 * step) - d2(step)) / 15.0;
}

template <class F>
double first_difference(F&& f, double step) {
  auto d1 = [&](double h) {
    return (-f(2 * h) + 8.0 * f(h) - 8.0 * f(-h) + f(-2 * h)) / (12.0 * h);
  };
  return (16.0 * d1(0.5 * step) - d1(step)) / 15.0;
}

}  // namespace

double default_fd_step(const SampledSurface& s, const VariationField& v) {
  const double sup = v.sup_norm(s);
  if (sup == 0.0) return 1e-3;
  const double size = std::sqrt(area(s) / (4.0 * std::numbers::pi));
  return 1e-3 * std::min(1.0, size) / sup;
}

double fd_second_variation(Functional functional, const SampledSurface& s,
                           const VariationField& v, double step,
                           const AmbientFunction* mean) {
  check_sizes(s, v);
  if (!std::isfinite(step)) throw PreconditionError("step must be finite");
  if (step <= 0.0) step = default_fd_step(s, v);
  auto area_f = [&](double t) { return area_at(s, v, t); };
  auto energy_f = [&](double t) { return energy_at(s, v, t); };
  auto volume_rate = [&](double t) { return volume_rate_at(s, v, t, mean); };
  double result = 0.0;
  switch (functional) {
    case Functional::Area:
      result = second_difference(area_f, step);
      break;
    case Functional::Energy:
      result = second_difference(energy_f, step);
      break;
    case Functional::VolumeH:
      result = first_difference(volume_rate, step);
      break;
    case Functional::AreaH:
      result = second_difference(area_f, step) +
               first_difference(volume_rate, step);
      break;
    case Functional::EnergyH:
      result = second_difference(energy_f, step) +
               first_difference(volume_rate, step);
      break;
  }
  if (!std::isfinite(result)) {
    throw DomainError("finite-difference variation left the ambient domain");
  }
  return result;
}

double volume_r3(const SampledSurface& s, double h, double t,
                 const VariationField* v) {
  if (s.ambient().kind() != AmbientKind::R3) {
    throw UnsupportedError("the explicit volume primitive is only for R3");
  }
  double total = 0.0;
  for (int n = 0; n < s.size(); ++n) {
    Vec4 p = s[n].jet.u, dx = s[n].jet.ux, dy = s[n].jet.uy;
    if (v) {
      p += t * (*v)[n].v;
      dx += t * (*v)[n].vx;
      dy += t * (*v)[n].vy;
    }
    total += s[n].weight * h / 3.0 *
             p.head<3>().dot(dx.head<3>().cross(dy.head<3>()));
  }
  return total;
}

double fd_second_variation_volume_r3(const SampledSurface& s,
                                     const VariationField& v, double step) {
  check_sizes(s, v);
  if (step <= 0.0) step = default_fd_step(s, v);
  const double h = s.immersion().cmc();
  return second_difference([&](double t) { return volume_r3(s, h, t, &v); },
                           step);
}

PeterPaulMargin peter_paul_check(const SampledSurface& s,
                                 const VariationField& v, double eps) {
  check_sizes(s, v);
  if (!(eps > 0.0)) throw PreconditionError("epsilon must be positive");
  const AmbientSpace& space = s.ambient();
  const double h = s.immersion().cmc();
  PeterPaulMargin out{std::numeric_limits<double>::infinity(),
                      std::numeric_limits<double>::infinity()};
  for (int n = 0; n < s.size(); ++n) {
    const auto& g = s[n];
    const Vec4& p = g.jet.u;
    const Vec4& w = v[n].v;
    const Vec4 dx = space.project_tangent(p, v[n].vx);
    const Vec4 dy = space.project_tangent(p, v[n].vy);
    const double left =
        std::abs(h / g.e2l *
                 (space.volume_form(p, w, dx, g.jet.uy) +
                  space.volume_form(p, w, g.jet.ux, dy)));
    const double nv = space.norm(p, w);
    const double ndx = space.norm(p, dx), ndy = space.norm(p, dy);
    const double middle = std::abs(h) / g.e2l *
                          (ndx * nv * space.norm(p, g.jet.uy) +
                           ndy * nv * space.norm(p, g.jet.ux));
    const double grad_sq = (ndx * ndx + ndy * ndy) / g.e2l;
    const double right = eps * h * h * nv * nv + grad_sq / (2.0 * eps);
    out.cauchy_schwarz = std::min(out.cauchy_schwarz, middle - left);
    out.peter_paul = std::min(out.peter_paul, right - middle);
  }
  return out;
}

}  // namespace cmcindex
