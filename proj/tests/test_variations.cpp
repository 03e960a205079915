#include "support.hpp"

#include "cmcindex/surfaces.hpp"
#include "cmcindex/variations.hpp"

#include <doctest.h>

#include <numbers>

using namespace cmcindex;
using nlohmann::json;
using testing::rel_err;

namespace {

constexpr double kPi = std::numbers::pi;

const char* const kMembers[] = {"sphere_r3", "sphere_s3", "sphere_h3",
                                "clifford_torus", "delaunay_t3"};

SampledSurface sample(const std::string& name) {
  const GallerySurface g = gallery(name);
  return g.sample();
}

std::vector<VariationField> random_fields(const SampledSurface& s, int count,
                                          std::uint64_t seed) {
  Rng rng(seed);
  std::vector<VariationField> out;
  for (int k = 0; k < count; ++k) {
    out.push_back(make_field(s, random_ambient_spec(s.ambient(), rng)));
  }
  return out;
}

double weighted_sum(const SampledSurface& s,
                    const std::function<double(int)>& density) {
  double total = 0.0;
  for (int n = 0; n < s.size(); ++n) total += density(n) * s[n].area_weight();
  return total;
}

}  // namespace

TEST_CASE("random generator is reproducible") {
  Rng a(42), b(42);
  for (int k = 0; k < 100; ++k) {
    const double x = a.uniform();
    CHECK(x == b.uniform());
    CHECK(x >= 0.0);
    CHECK(x < 1.0);
  }
  Rng c(1);
  for (int k = 0; k < 200; ++k) {
    const int v = c.integer(-2, 3);
    CHECK(v >= -2);
    CHECK(v <= 3);
  }
  Rng d(5), e(5);
  CHECK(random_ambient_spec(AmbientSpace::s3(), d) ==
        random_ambient_spec(AmbientSpace::s3(), e));
}

TEST_CASE("normal and tangential split") {
  for (const char* name : kMembers) {
    CAPTURE(name);
    const SampledSurface s = sample(name);
    const AmbientSpace& space = s.ambient();
    const VariationField v = random_fields(s, 1, 3).front();
    for (int n = 0; n < s.size(); n += 5) {
      const SplitPoint sp = split(s, v, n);
      const Vec4& p = s[n].jet.u;
      CHECK((sp.normal + sp.tangential - v[n].v).norm() < 1e-12);
      CHECK(std::abs(space.metric(p, sp.tangential, s[n].nu)) < 1e-12);
      CHECK(std::abs(space.metric(p, sp.normal, s[n].jet.ux)) < 1e-12);
      CHECK(std::abs(space.metric(p, sp.normal, s[n].jet.uy)) < 1e-12);
      const ComplexVec4 sum = sp.sigma_10 + sp.sigma_01;
      CHECK((sum.real() - sp.tangential).norm() < 1e-12);
      CHECK(sum.imag().norm() < 1e-12);
    }
  }
}

TEST_CASE("conformal defect examples") {
  const SampledSurface sphere = sample("sphere_r3");
  const DefectField zero = conformal_defect(sphere, VariationField::zero(sphere));
  CHECK(zero.eta_integral == 0.0);

  Rng rng(8);
  const VariationField normal =
      make_field(sphere, random_normal_spec(sphere.ambient(), rng));
  const DefectField d = conformal_defect(sphere, normal);
  for (double e : d.eta_sq) CHECK(e < 1e-20);

  const SampledSurface torus = sample("clifford_torus");
  const VariationField holo =
      make_field(torus, json{{"type", "tangential"}, {"a", 0.7}, {"b", -1.3}});
  const DefectField t = conformal_defect(torus, holo);
  CHECK(t.eta_integral < 1e-24);
}

TEST_CASE("two forms of the defect integral agree") {
  for (const char* name : kMembers) {
    CAPTURE(name);
    const SampledSurface s = sample(name);
    for (const auto& v : random_fields(s, 3, 21)) {
      const DefectField d = conformal_defect(s, v);
      CHECK(8 * d.eta_integral ==
            doctest::Approx(4 * d.mu_integral).epsilon(1e-10));
    }
  }
}

TEST_CASE("second variations on the round sphere") {
  for (double rho : {0.5, 1.0, 2.0}) {
    CAPTURE(rho);
    const GallerySurface g = gallery(SurfaceDescriptor{"sphere_r3", {{"rho", rho}}, {}});
    const SampledSurface s = g.sample();
    const VariationField nu = make_field(s, json{{"type", "unit_normal"}});
    const double h = 2.0 / rho;
    CHECK(second_variation_area(s, nu) == doctest::Approx(8 * kPi).epsilon(1e-10));
    CHECK(second_variation_volume(s, nu) ==
          doctest::Approx(-h * h * 4 * kPi * rho * rho).epsilon(1e-10));
    CHECK(second_variation_area_h(s, nu) == doctest::Approx(-8 * kPi).epsilon(1e-10));
    CHECK(first_variation_area(s, nu) == doctest::Approx(-8 * kPi * rho).epsilon(1e-12));
    CHECK(first_variation_volume(s, nu) == doctest::Approx(8 * kPi * rho).epsilon(1e-12));
    // Normal variations of an umbilic surface have no defect.
    CHECK(second_variation_area(s, nu) ==
          doctest::Approx(second_variation_energy(s, nu)).epsilon(1e-10));
  }
}

TEST_CASE("zero field gives zero everywhere") {
  for (const char* name : kMembers) {
    const SampledSurface s = sample(name);
    const VariationField z = VariationField::zero(s);
    CHECK(second_variation_area(s, z) == 0.0);
    CHECK(second_variation_energy(s, z) == 0.0);
    CHECK(second_variation_volume(s, z) == 0.0);
    CHECK(comparison_identity_residual(s, z).absolute == 0.0);
    CHECK(std::abs(fd_second_variation(Functional::Energy, s, z)) < 1e-7);
  }
}

TEST_CASE("volume second variation for normal fields") {
  for (const char* name : kMembers) {
    CAPTURE(name);
    const SampledSurface s = sample(name);
    Rng rng(4);
    const json spec = random_normal_spec(s.ambient(), rng);
    const VariationField v = make_field(s, spec);
    const std::vector<ScalarJet> f = ambient_scalar(s, spec);
    const double h = s.immersion().cmc();
    const double expected = weighted_sum(s, [&](int n) { return -h * h * f[n].f * f[n].f; });
    CHECK(rel_err(second_variation_volume(s, v), expected) < 1e-10);
  }
}

TEST_CASE("first variation vanishes for the constrained functional") {
  for (const char* name : kMembers) {
    CAPTURE(name);
    const SampledSurface s = sample(name);
    for (const auto& v : random_fields(s, 5, 31)) {
      const double sum = first_variation_area(s, v) + first_variation_volume(s, v);
      CHECK(std::abs(sum) < 1e-6 * v.sup_norm(s));
    }
  }
  const SampledSurface c = sample("clifford_torus");
  for (const auto& v : random_fields(c, 5, 32)) {
    CHECK(std::abs(first_variation_area(c, v)) < 1e-12);
  }
}

TEST_CASE("constrained second variation only sees the normal part") {
  for (const char* name : kMembers) {
    CAPTURE(name);
    const SampledSurface s = sample(name);
    const VariationField tangential =
        make_field(s, json{{"type", "tangential"}, {"a", 0.4}, {"b", 1.1}});
    CHECK(std::abs(second_variation_area_h(s, tangential)) < 1e-8);
    for (const auto& v : random_fields(s, 20, 41)) {
      const double full = second_variation_area_h(s, v);
      const double normal = second_variation_area_h(s, normal_part(s, v));
      CHECK(rel_err(full, normal) < 1e-8);
      CHECK(rel_err(jacobi_form(s, v), normal) < 1e-8);
    }
  }
}

TEST_CASE("comparison identity") {
  for (const char* name : kMembers) {
    CAPTURE(name);
    const SampledSurface s = sample(name);
    for (const auto& v : random_fields(s, 20, 51)) {
      const IdentityResidual r = comparison_identity_residual(s, v);
      CHECK(r.relative < 1e-6);
      CHECK(r.d2_area <= r.d2_energy + 1e-8 * std::max(1.0, std::abs(r.d2_energy)));
      CHECK(r.defect >= 0.0);
    }
  }
}

TEST_CASE("energy forms agree") {
  for (const char* name : kMembers) {
    CAPTURE(name);
    const SampledSurface s = sample(name);
    for (const auto& v : random_fields(s, 3, 61)) {
      CHECK(rel_err(second_variation_energy_complex(s, v),
                    second_variation_energy(s, v)) < 1e-10);
    }
  }
}

TEST_CASE("second variations are quadratic") {
  const SampledSurface s = sample("delaunay_t3");
  const VariationField v = random_fields(s, 1, 71).front();
  using Form = double (*)(const SampledSurface&, const VariationField&);
  const Form forms[] = {second_variation_area, second_variation_energy,
                        second_variation_area_h, second_variation_energy_h,
                        jacobi_form};
  for (Form form : forms) {
    const double base = form(s, v);
    for (double c : {-1.0, 2.0, 3.7}) {
      CHECK(form(s, v.scaled(c)) == doctest::Approx(c * c * base).epsilon(1e-12));
    }
  }
}

TEST_CASE("finite-difference oracle on closed forms") {
  const SampledSurface s = sample("sphere_r3");
  const VariationField nu = make_field(s, json{{"type", "unit_normal"}});
  CHECK(fd_second_variation(Functional::Area, s, nu) ==
        doctest::Approx(8 * kPi).epsilon(1e-6));
  // Enclosed volume through the explicit primitive, oriented so that its
  // first variation along nu is +h Area.
  const double h = 2.0;
  CHECK(std::abs(volume_r3(s, h)) == doctest::Approx(h * 4 * kPi / 3).epsilon(1e-12));
  const double t = 1e-4;
  const double dv = (volume_r3(s, h, t, &nu) - volume_r3(s, h, -t, &nu)) / (2 * t);
  CHECK(dv == doctest::Approx(h * 4 * kPi).epsilon(1e-6));
  CHECK(fd_second_variation_volume_r3(s, nu) ==
        doctest::Approx(second_variation_volume(s, nu)).epsilon(1e-6));
  CHECK(fd_second_variation(Functional::VolumeH, s, nu) ==
        doctest::Approx(second_variation_volume(s, nu)).epsilon(1e-6));
}

TEST_CASE("formulas agree with the finite-difference oracle") {
  const std::pair<Functional, double (*)(const SampledSurface&, const VariationField&)>
      pairs[] = {{Functional::Area, second_variation_area},
                 {Functional::Energy, second_variation_energy},
                 {Functional::AreaH, second_variation_area_h},
                 {Functional::EnergyH, second_variation_energy_h}};
  for (const char* name : kMembers) {
    CAPTURE(name);
    const SampledSurface s = sample(name);
    for (const auto& v : random_fields(s, 2, 81)) {
      for (const auto& [functional, formula] : pairs) {
        CAPTURE(to_string(functional));
        const double exact = formula(s, v);
        const double fd = fd_second_variation(functional, s, v);
        CHECK(std::abs(fd - exact) / std::max(1.0, std::abs(exact)) < 1e-4);
      }
      const double vol = second_variation_volume(s, v);
      const double fd = fd_second_variation(Functional::VolumeH, s, v);
      CHECK(std::abs(fd - vol) / std::max(1.0, std::abs(vol)) < 1e-4);
    }
  }
  const SampledSurface r3 = sample("sphere_r3:rho=1.3");
  for (const auto& v : random_fields(r3, 2, 82)) {
    const double vol = second_variation_volume(r3, v);
    CHECK(std::abs(fd_second_variation_volume_r3(r3, v) - vol) /
              std::max(1.0, std::abs(vol)) < 1e-4);
  }
}

TEST_CASE("Peter-Paul chain holds pointwise") {
  for (const char* name : kMembers) {
    CAPTURE(name);
    const SampledSurface s = sample(name);
    for (const auto& v : random_fields(s, 5, 91)) {
      for (double eps : {0.5, 1.0}) {
        const PeterPaulMargin m = peter_paul_check(s, v, eps);
        CHECK(m.cauchy_schwarz >= -1e-10);
        CHECK(m.peter_paul >= -1e-10);
      }
    }
  }
  const SampledSurface s = sample("sphere_r3");
  CHECK_THROWS_AS(peter_paul_check(s, VariationField::zero(s), 0.0), PreconditionError);
}

TEST_CASE("field descriptions") {
  const SampledSurface s = sample("sphere_s3");
  CHECK_THROWS_AS(make_field(s, json{{"type", "nonsense"}}), PreconditionError);
  CHECK_THROWS_AS(make_field(s, json::object()), PreconditionError);
  CHECK_THROWS_AS(make_field(s, json{{"type", "chart_normal"},
                                     {"modes", json::array()}}),
                  PreconditionError);
  const VariationField a = make_field(s, json{{"type", "unit_normal"}});
  const VariationField b = make_field(
      s, json{{"type", "sum"},
              {"terms", {json{{"type", "unit_normal"}},
                         json{{"type", "scaled"}, {"factor", -1.0},
                              {"of", json{{"type", "unit_normal"}}}}}}});
  CHECK(b.sup_norm(s) < 1e-15);
  CHECK(a.sup_norm(s) == doctest::Approx(1.0));
  // Fields sampled on another grid are rejected.
  const SampledSurface other = gallery("sphere_s3").sample(16);
  CHECK_THROWS_AS(second_variation_area(other, a), PreconditionError);
}
