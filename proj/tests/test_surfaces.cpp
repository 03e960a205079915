#include "cmcindex/delaunay.hpp"
#include "cmcindex/surfaces.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace cmcindex;

namespace {

constexpr double kPi = std::numbers::pi;

const char* const kMembers[] = {
    "sphere_r3",       "sphere_r3:rho=0.5", "sphere_s3",       "sphere_s3:rho=2",
    "sphere_h3",       "sphere_h3:rho=0.7", "clifford_torus",  "delaunay_t3",
    "delaunay_t3:k=2", "delaunay_t3:k=3"};

// Gaussian curvature -e^{-2 lambda} (lambda_xx + lambda_yy) from central
// differences of the conformal factor.
double gauss_curvature_fd(const Immersion& u, double x, double y) {
  const double h = 1e-3;
  auto lam = [&](double a, double b) { return conformal_factor(u, a, b); };
  const double lxx = (-lam(x + 2 * h, y) + 16 * lam(x + h, y) - 30 * lam(x, y) +
                      16 * lam(x - h, y) - lam(x - 2 * h, y)) / (12 * h * h);
  const double lyy = (-lam(x, y + 2 * h) + 16 * lam(x, y + h) - 30 * lam(x, y) +
                      16 * lam(x, y - h) - lam(x, y - 2 * h)) / (12 * h * h);
  return -std::exp(-2 * lam(x, y)) * (lxx + lyy);
}

}  // namespace

TEST_CASE("Gauss-Legendre integrates polynomials exactly") {
  for (int n : {4, 9, 16}) {
    std::vector<double> z, w;
    gauss_legendre(n, z, w);
    for (int k = 0; k <= 2 * n - 1; ++k) {
      double sum = 0.0;
      for (int j = 0; j < n; ++j) sum += w[j] * std::pow(z[j], k);
      const double exact = k % 2 ? 0.0 : 2.0 / (k + 1);
      CHECK(std::abs(sum - exact) < 1e-13);
    }
  }
}

TEST_CASE("grid layout and validation") {
  const ParamGrid t = ParamGrid::torus(12, 8, 2.0, 3.0);
  CHECK(t.size() == 96);
  CHECK(t.x(3) == doctest::Approx(0.5));
  CHECK(t.y(2) == doctest::Approx(0.75));
  CHECK(t.periodic_y());
  const ParamGrid s = ParamGrid::sphere(16, 8);
  CHECK_FALSE(s.periodic_y());
  CHECK(s.z_nodes().size() == 8u);
  CHECK_THROWS_AS(ParamGrid::torus(1, 1, 1.0, 1.0), PreconditionError);
  CHECK_THROWS_AS(ParamGrid::sphere(16, 4), PreconditionError);

  const GallerySurface g = gallery("clifford_torus");
  const SampledSurface ss = g.sample(8);
  const auto& grid = ss.grid();
  CHECK(ss[3 + grid.n_x() * 5].x == doctest::Approx(grid.x(3)));
  CHECK(ss[3 + grid.n_x() * 5].y == doctest::Approx(grid.y(5)));
}

TEST_CASE("conformal factor examples") {
  const GallerySurface s1 = gallery("sphere_r3");
  const GallerySurface s2 = gallery("sphere_r3:rho=2");
  const ChartJet j = s2.immersion->evaluate(0.4, 0.0);
  CHECK(conformal_factor(*s2.immersion, 0.4, 0.0) ==
        doctest::Approx(std::log(j.ux.norm())));
  CHECK(conformal_factor(*s2.immersion, 0.4, 0.0) ==
        doctest::Approx(std::log(2.0)));
  // Homothety shifts lambda by log c everywhere.
  for (double y : {-1.3, 0.2, 2.0}) {
    CHECK(conformal_factor(*s2.immersion, 1.0, y) -
              conformal_factor(*s1.immersion, 1.0, y) ==
          doctest::Approx(std::log(2.0)));
  }
  const GallerySurface c = gallery("clifford_torus");
  for (double x : {0.0, 1.0, 4.0}) {
    CHECK(conformal_factor(*c.immersion, x, 2.0 * x) ==
          doctest::Approx(0.5 * std::log(0.5)));
  }
}

TEST_CASE("branch points are reported") {
  Immersion::Info info;
  info.name = "collapsed";
  Immersion flat(AmbientSpace::r3(),
                 [](double, double) { return ChartJet{}; }, info);
  CHECK_THROWS_AS(point_geometry(flat, 0.1, 0.2), BranchPointError);
}

TEST_CASE("second fundamental form examples") {
  for (double rho : {0.5, 1.0, 3.0}) {
    const auto g = gallery(SurfaceDescriptor{"sphere_r3", {{"rho", rho}}, {}});
    const auto a = second_fundamental(*g.immersion, 0.7, -0.4);
    CHECK(a.norm_sq == doctest::Approx(2.0 / (rho * rho)));
    CHECK(std::abs(a.mean_curvature) == doctest::Approx(2.0 / rho));
    CHECK(std::abs(a.a_zz) < 1e-12 / (rho * rho));
  }
  const auto c = second_fundamental(*gallery("clifford_torus").immersion, 0.3, 1.9);
  CHECK(c.norm_sq == doctest::Approx(2.0));
  CHECK(c.mean_curvature_vector.norm() < 1e-12);
  for (double rho : {0.5, 1.0, 2.0}) {
    const auto g = gallery(SurfaceDescriptor{"sphere_h3", {{"rho", rho}}, {}});
    const auto a = second_fundamental(*g.immersion, 2.0, 0.5);
    const double coth = 1.0 / std::tanh(rho);
    CHECK(a.norm_sq == doctest::Approx(2.0 * coth * coth));
    CHECK(a.mean_curvature == doctest::Approx(2.0 * coth));
    CHECK(g.immersion->cmc() == doctest::Approx(2.0 * coth));
  }
}

TEST_CASE("pointwise identities on every gallery member") {
  for (const char* name : kMembers) {
    CAPTURE(name);
    const GallerySurface g = gallery(name);
    const SampledSurface s = g.sample(16);
    const AmbientSpace& space = s.ambient();
    CHECK(s.max_conformality_residual() < 1e-10);
    for (int k = 0; k < s.size(); k += 7) {
      const PointGeometry& p = s[k];
      const SecondFormData a = second_fundamental(s.immersion(), p.x, p.y);
      // A(u_z, u_zbar) = e^{2 lambda} H / 4.
      CHECK(std::abs(a.a_zzbar - 0.25 * p.e2l * a.mean_curvature) < 1e-8 * p.e2l);
      CHECK(a.norm_sq >= 0.5 * a.mean_curvature * a.mean_curvature - 1e-10);
      CHECK(std::abs(space.metric(p.jet.u, p.nu, p.nu) - 1.0) < 1e-12);
      CHECK(space.volume_form(p.jet.u, p.nu, p.jet.ux, p.jet.uy) > 0.0);
    }
  }
}

TEST_CASE("Gauss equation against the curvature of the induced metric") {
  for (const char* name : {"sphere_r3:rho=1.5", "sphere_s3", "sphere_h3",
                           "clifford_torus", "delaunay_t3"}) {
    CAPTURE(name);
    const GallerySurface g = gallery(name);
    const Immersion& u = *g.immersion;
    for (auto [x, y] : {std::pair{0.3, 0.2}, {1.7, -0.6}, {4.0, 1.1}}) {
      const auto a = second_fundamental(u, x, y);
      const double K = gauss_curvature_fd(u, x, y);
      const double rhs =
          2 * u.ambient().curvature() - 2 * K + a.mean_curvature * a.mean_curvature;
      CHECK(std::abs(a.norm_sq - rhs) < 1e-6 * std::max(1.0, a.norm_sq));
    }
  }
}

TEST_CASE("areas against closed forms") {
  auto area_of = [](const std::string& name, int n = 32) {
    return area(gallery(name).sample(n));
  };
  CHECK(area_of("sphere_r3") == doctest::Approx(4 * kPi).epsilon(1e-12));
  CHECK(area_of("sphere_r3:rho=2.5") == doctest::Approx(4 * kPi * 6.25).epsilon(1e-12));
  CHECK(area_of("sphere_s3:rho=0.8") ==
        doctest::Approx(4 * kPi * std::pow(std::sin(0.8), 2)).epsilon(1e-12));
  CHECK(area_of("sphere_h3:rho=1.2") ==
        doctest::Approx(4 * kPi * std::pow(std::sinh(1.2), 2)).epsilon(1e-12));
  CHECK(area_of("clifford_torus") == doctest::Approx(2 * kPi * kPi).epsilon(1e-12));
}

TEST_CASE("area quadrature converges under refinement") {
  const GallerySurface g = gallery("delaunay_t3:neck=0.2");
  const double exact = *g.reference.area;
  const double coarse = std::abs(area(g.sample(8)) - exact);
  const double fine = std::abs(area(g.sample(16)) - exact);
  const bool at_roundoff = coarse < 1e-13 * exact && fine < 1e-13 * exact;
  CHECK((at_roundoff || coarse >= 4.0 * fine));
  CHECK(fine < 1e-8 * exact);
}

TEST_CASE("CMC residuals") {
  CHECK(cmc_residual(gallery("sphere_r3:rho=0.7").sample(16)) < 1e-10);
  CHECK(cmc_residual(gallery("clifford_torus").sample(16)) < 1e-10);
  CHECK(cmc_residual(gallery("sphere_h3").sample(16)) < 1e-10);
  CHECK(cmc_residual(gallery("delaunay_t3").sample(16)) < 1e-6);
  CHECK(cmc_residual(gallery("delaunay_t3:k=2,neck=0.5").sample(16)) < 1e-6);
}

TEST_CASE("Delaunay profile") {
  for (double neck : {0.15, 0.3, 0.6, 0.9}) {
    CAPTURE(neck);
    const DelaunayProfile p(neck);
    CHECK(p.r_min() / p.r_max() == doctest::Approx(neck).epsilon(1e-12));
    const double f0 = p.flux(p.at(0.0));
    for (int k = 1; k <= 20; ++k) {
      CHECK(std::abs(p.flux(p.at(p.period() * k / 20.0)) - f0) < 1e-10);
    }
    const auto start = p.at(0.0), end = p.at(p.period());
    CHECK(std::abs(end.r - start.r) < 1e-8);
    CHECK(end.x - start.x == doctest::Approx(p.axial_period()));
  }
  CHECK_THROWS_AS(DelaunayProfile(0.0), PreconditionError);
  CHECK_THROWS_AS(DelaunayProfile(1.0), PreconditionError);
}

TEST_CASE("k-lobed Delaunay tori scale with k") {
  const GallerySurface g1 = gallery("delaunay_t3");
  const double a1 = area(g1.sample());
  const double h1 = g1.immersion->cmc();
  for (int k : {2, 3, 4}) {
    const GallerySurface gk = gallery("delaunay_t3:k=" + std::to_string(k));
    CHECK(area(gk.sample()) * k / a1 == doctest::Approx(1.0).epsilon(1e-4));
    CHECK(gk.immersion->cmc() / (k * h1) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(gk.reference.index_lower_bound == 2 * k - 2);
  }
}

TEST_CASE("reference data") {
  CHECK(gallery("sphere_h3").reference.index_plus_nullity == 4);
  const auto c = gallery("clifford_torus").reference;
  CHECK(c.index == 5);
  CHECK(c.nullity == 4);
  CHECK(c.genus == 1);
  CHECK(gallery("sphere_r3").reference.branch_count == 0);
}

TEST_CASE("descriptors") {
  const auto a = SurfaceDescriptor::parse("delaunay_t3(k=2,neck=0.3)");
  const auto b = SurfaceDescriptor::parse("delaunay_t3:neck=0.3,k=2");
  CHECK(a.id() == b.id());
  CHECK(a.id() == "delaunay_t3:k=2,neck=0.3");
  const auto r = SurfaceDescriptor::parse("sphere_r3:rho=2,resolution=16");
  CHECK(r.resolution == 16);
  CHECK(SurfaceDescriptor::from_json(r.to_json()).id() == r.id());
  CHECK(SurfaceDescriptor::from_json(r.to_json()).resolution == 16);
  CHECK(gallery("delaunay_t3").descriptor.id() == "delaunay_t3:k=1,neck=0.3");
  CHECK(gallery(r).default_resolution == 16);

  CHECK_THROWS_AS(SurfaceDescriptor::parse("sphere_r3:rho"), PreconditionError);
  CHECK_THROWS_AS(SurfaceDescriptor::parse("sphere_r3:rho=abc"), PreconditionError);
  CHECK_THROWS_AS(SurfaceDescriptor::parse("sphere_r3(rho=1"), PreconditionError);
}

TEST_CASE("gallery input validation") {
  CHECK_THROWS_AS(gallery("no_such_surface"), PreconditionError);
  CHECK_THROWS_AS(gallery("sphere_r3:rho=-1"), PreconditionError);
  CHECK_THROWS_AS(gallery("sphere_s3:rho=3.2"), PreconditionError);
  CHECK_THROWS_AS(gallery("sphere_r3:radius=1"), PreconditionError);
  CHECK_THROWS_AS(gallery("delaunay_t3:k=0"), PreconditionError);
  CHECK_THROWS_AS(gallery("delaunay_t3:k=1.5"), PreconditionError);
  CHECK_THROWS_AS(gallery("delaunay_t3:neck=1.2"), PreconditionError);
  CHECK_THROWS_AS(gallery("clifford_torus").sample(4), PreconditionError);
  CHECK(gallery_names().size() == 5u);
}
