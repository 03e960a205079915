// End-to-end acceptance run: one PASS/FAIL line per criterion, nonzero exit
// if any fails.

#include "cmcindex/bounds.hpp"
#include "cmcindex/report.hpp"
#include "cmcindex/spectral.hpp"
#include "cmcindex/variations.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

using namespace cmcindex;
using nlohmann::json;

namespace {

constexpr double kPi = std::numbers::pi;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      if (!pass) detail << "; ";
      detail << what;
      pass = false;
    }
  }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

const char* const kIdentitySurfaces[] = {"sphere_r3", "sphere_s3", "sphere_h3",
                                         "clifford_torus", "delaunay_t3"};

// 1. Comparison identity on five surfaces, 20 fields each, with refinement.
void comparison_identity(Outcome& out) {
  const auto start = Clock::now();
  RunConfig c;
  for (const char* id : kIdentitySurfaces) c.surfaces.push_back(SurfaceDescriptor::parse(id));
  c.variations = 20;
  c.refinement_levels = 1;
  const CommandOutput res = run_identity(c);
  const double elapsed = seconds_since(start);
  double worst = 0.0;
  int fields = 0;
  for (const auto& s : res.report["surfaces"]) {
    worst = std::max(worst, s["max_relative"].get<double>());
    for (const auto& v : s["variations"]) {
      ++fields;
      const auto rel = v["relative"].get<std::vector<double>>();
      out.require(rel.front() < 1e-6, s["surface"].get<std::string>() + " residual " + fmt(rel.front()));
      const bool floor = rel[0] < 1e-12 && rel[1] < 1e-12;
      out.require(floor || rel[0] >= 4 * rel[1],
                  s["surface"].get<std::string>() + " refinement " + fmt(rel[0]) + " -> " + fmt(rel[1]));
    }
  }
  out.require(res.report["surfaces"].size() == 5 && fields == 100, "expected 5 x 20 fields");
  out.require(res.pass, "report failed");
  out.require(elapsed < 60.0, "runtime " + fmt(elapsed) + " s");
  if (out.pass) {
    out.detail << fields << " fields, max relative residual " << fmt(worst) << ", "
               << fmt(elapsed) << " s";
  }
}

// 2. Second-variation formulas against finite differences.
void formula_vs_fd(Outcome& out) {
  const auto start = Clock::now();
  double worst = 0.0;
  for (const char* id : kIdentitySurfaces) {
    const SampledSurface s = gallery(id).sample();
    Rng rng(0x5eed + std::string(id).size());
    for (int k = 0; k < 10; ++k) {
      const VariationField v = make_field(s, random_ambient_spec(s.ambient(), rng));
      const std::pair<Functional, double> pairs[] = {
          {Functional::Area, second_variation_area(s, v)},
          {Functional::Energy, second_variation_energy(s, v)},
          {Functional::VolumeH, second_variation_volume(s, v)}};
      for (const auto& [f, exact] : pairs) {
        const double fd = fd_second_variation(f, s, v);
        // With h = 0 the volume term vanishes identically on both sides.
        const double rel = fd == exact ? 0.0 : std::abs(fd - exact) / std::abs(exact);
        worst = std::max(worst, rel);
        out.require(rel < 1e-4, std::string(id) + " " + std::string(to_string(f)) +
                                    " relative " + fmt(rel));
      }
    }
  }
  const SampledSurface sphere = gallery("sphere_r3").sample();
  const double nu = second_variation_area(sphere, make_field(sphere, json{{"type", "unit_normal"}}));
  out.require(std::abs(nu - 8 * kPi) < 1e-6, "sphere d2A[nu] = " + fmt(nu));
  const double elapsed = seconds_since(start);
  out.require(elapsed < 120.0, "runtime " + fmt(elapsed) + " s");
  if (out.pass) {
    out.detail << "max relative difference " << fmt(worst) << ", sphere d2A[nu] - 8pi = "
               << fmt(nu - 8 * kPi) << ", " << fmt(elapsed) << " s";
  }
}

// 3. Index and nullity of the model surfaces and accuracy of the spectrum.
void spectral_truth(Outcome& out) {
  const auto start = Clock::now();
  struct Expect {
    const char* id;
    std::vector<double> eigenvalues;  // exact lowest eigenvalues
  };
  // Round unit sphere: l(l+1) - 2. Clifford torus: 2(m^2+n^2) - 4.
  const Expect cases[] = {
      {"sphere_r3", {-2, 0, 0, 0, 4, 4, 4, 4, 4, 10, 10, 10, 10, 10, 10, 10}},
      {"clifford_torus", {-4, -2, -2, -2, -2, 0, 0, 0, 0, 4, 4, 4, 4, 6, 6, 6, 6, 6, 6, 6, 6}}};
  double worst = 0.0;
  for (const Expect& e : cases) {
    const GallerySurface g = gallery(e.id);
    const IndexReport rep = jacobi_index(g, g.default_resolution);
    if (std::string(e.id) == "sphere_r3") {
      out.require(rep.index == 1 && rep.nullity == 3, "sphere (i, n) = (" +
                  std::to_string(rep.index) + ", " + std::to_string(rep.nullity) + ")");
    } else {
      out.require(rep.index == 5 && rep.nullity == 4, "Clifford (i, n) = (" +
                  std::to_string(rep.index) + ", " + std::to_string(rep.nullity) + ")");
    }
    for (std::size_t k = 0; k < e.eigenvalues.size(); ++k) {
      const double lam = rep.spectrum.eigenvalues.at(k);
      const double exact = e.eigenvalues[k];
      const double err = exact == 0.0 ? std::abs(lam) : std::abs(lam - exact) / std::abs(exact);
      worst = std::max(worst, err);
      out.require(err < 0.01, std::string(e.id) + " eigenvalue " + std::to_string(k) + " = " + fmt(lam));
    }
  }
  const GallerySurface h3 = gallery("sphere_h3");
  const IndexReport rep = jacobi_index(h3, h3.default_resolution);
  out.require(rep.index + rep.nullity == 4, "H3 sphere i+n = " + std::to_string(rep.index + rep.nullity));
  const double elapsed = seconds_since(start);
  out.require(elapsed < 120.0, "runtime " + fmt(elapsed) + " s");
  if (out.pass) {
    out.detail << "sphere (1,3), Clifford (5,4), H3 sphere i+n=4, max eigenvalue error "
               << fmt(worst) << ", " << fmt(elapsed) << " s";
  }
}

// 4. i - 1 <= i_h <= i on the gallery.
void sandwich(Outcome& out) {
  int members = 0;
  for (const auto& d : default_surfaces(Command::Gallery)) {
    const GallerySurface g = gallery(d);
    const IndexReport rep = jacobi_index(g, g.default_resolution);
    ++members;
    out.require(rep.index - 1 <= rep.weak_index && rep.weak_index <= rep.index,
                g.descriptor.id() + ": i=" + std::to_string(rep.index) +
                    " i_h=" + std::to_string(rep.weak_index));
  }
  if (out.pass) out.detail << members << " gallery members";
}

// 5. The index bound on the gallery and Delaunay scaling.
void main_bound_check(Outcome& out) {
  const auto start = Clock::now();
  RunConfig c;
  const CommandOutput res = run_bounds(c);
  out.require(res.pass, "bounds report failed");
  for (const auto& s : res.report["surfaces"]) {
    const std::string id = s["surface"];
    const int i = s["index"], n = s["nullity"];
    if (s["bound"].is_number()) {
      const double bound = s["bound"];
      out.require(i + n <= bound, id + ": i+n=" + std::to_string(i + n) + " > " + fmt(bound));
    }
    if (id == "sphere_r3:rho=1") {
      out.require(i + n == 4 && std::abs(s["bound"].get<double>() - 960.0) < 1e-9,
                  "sphere bound " + s["bound"].dump());
    }
    if (id == "clifford_torus") {
      out.require(i + n == 9 && std::abs(s["bound"].get<double>() - (480 * kPi + 2)) < 1e-9,
                  "Clifford bound " + s["bound"].dump());
    }
  }
  const GallerySurface one = gallery("delaunay_t3:k=1");
  const double area1 = area(one.sample());
  const double h1 = one.immersion->cmc();
  double worst = 0.0;
  for (int k = 1; k <= 3; ++k) {
    const GallerySurface g = gallery("delaunay_t3:k=" + std::to_string(k));
    bool found = false;
    for (const auto& s : res.report["surfaces"]) {
      if (s["surface"] != g.descriptor.id()) continue;
      found = true;
      const int i = s["index"], n = s["nullity"];
      out.require(i >= 2 * k - 2, g.descriptor.id() + ": index " + std::to_string(i));
      out.require(s["bound"].is_number() && i + n <= s["bound"].get<double>(),
                  g.descriptor.id() + ": bound");
    }
    out.require(found, g.descriptor.id() + " missing from report");
    const double ra = area(g.sample()) * k / area1;
    const double rh = g.immersion->cmc() / (k * h1);
    worst = std::max({worst, std::abs(ra - 1), std::abs(rh - 1)});
    out.require(std::abs(ra - 1) <= 1e-3, "area ratio " + fmt(ra));
    out.require(std::abs(rh - 1) <= 1e-3, "h ratio " + fmt(rh));
  }
  const double elapsed = seconds_since(start);
  out.require(elapsed < 300.0, "runtime " + fmt(elapsed) + " s");
  if (out.pass) {
    out.detail << "sphere 4 <= 960, Clifford 9 <= 480pi+2, Delaunay k=1..3 scaling within "
               << fmt(worst) << ", " << fmt(elapsed) << " s";
  }
}

// 6. Constants and the topological correction.
void constants(Outcome& out) {
  const double f23 = delta_expression(2.3);
  out.require(f23 < 40.0, "f(2.3) = " + fmt(f23));
  const DeltaOptimum opt = optimize_delta();
  const double c = 3.0 / (2 * kPi) * opt.value;
  out.require(c <= 60.0 / kPi + 1e-10, "optimized constant " + fmt(c));
  out.require(topological_r(0, 0) == 0 && topological_r(1, 0) == 2 &&
                  topological_r(3, 1) == 10 && topological_r(2, 5) == 0,
              "r examples");
  for (int g = 0; g <= 50; ++g) {
    for (int b = 0; b <= 250; ++b) {
      int cases = 0;
      if (b <= 2 * g - 3) ++cases;
      if (2 * g - 2 <= b && b <= 4 * g - 4) ++cases;
      if (b >= 4 * g - 3) ++cases;
      const int r = topological_r(g, b);
      out.require(cases >= 1, "uncovered (" + std::to_string(g) + "," + std::to_string(b) + ")");
      out.require(r >= 0, "negative r");
      if (b > 0) out.require(r <= topological_r(g, b - 1), "r not monotone in b");
    }
    if (g >= 2) {
      out.require(topological_r(g, 2 * g - 3) == 2 * g && topological_r(g, 2 * g - 2) == 2 * g,
                  "boundary disagreement at g=" + std::to_string(g));
    }
  }
  if (out.pass) {
    out.detail << "f(2.3) = " << fmt(f23) << ", (3/2pi) f* = " << fmt(c)
               << " <= 60/pi, r exhaustive to g=50, b=250";
  }
}

// 7. Functional inequalities over seeded samples.
void inequalities(Outcome& out) {
  constexpr int kSamples = 50;
  constexpr double kSlack = -1e-6;
  double worst = std::numeric_limits<double>::infinity();
  auto record = [&](double m, const std::string& what) {
    worst = std::min(worst, m);
    out.require(m >= kSlack, what + " margin " + fmt(m));
  };
  for (const auto& d : default_surfaces(Command::Gallery)) {
    const GallerySurface g = gallery(d);
    const SampledSurface s = g.sample();
    const std::string id = g.descriptor.id();
    const auto J = s.ambient().extrinsic_bound();
    const double h = s.immersion().cmc();
    Rng rng(0xacce55 ^ std::hash<std::string>{}(id));
    for (int k = 0; k < kSamples; ++k) {
      const VariationField v = make_field(s, random_ambient_spec(s.ambient(), rng));
      for (double eps : {0.5, 1.0}) {
        const PeterPaulMargin m = peter_paul_check(s, v, eps);
        record(m.cauchy_schwarz, id + " Cauchy-Schwarz");
        record(m.peter_paul, id + " Peter-Paul");
      }
      const auto f = ambient_scalar(s, random_normal_spec(s.ambient(), rng, 3));
      record(interpolation_margin(s, f), id + " interpolation");
      if (J) record(mss_margin(s, f), id + " Sobolev");
    }
    EigensolveOptions opt;
    opt.vectors = false;
    const SpectralResult lap = eigensolve(assemble_laplacian(s), opt);
    const double a = area(s);
    for (int k = 0; k < kSamples; ++k) {
      const double t = std::exp(std::log(0.05) + rng.uniform() * std::log(100.0));
      const double c = 50.0 * rng.uniform();
      const int count = counting(lap, c);
      record(std::exp(c * t) * heat_trace(lap, t) - count, id + " counting");
      if (J) {
        const double delta = 0.1 + 9.9 * rng.uniform();
        record(heat_trace_upper(delta, t, a, h, *J) - heat_trace(lap, t), id + " heat trace");
      }
    }
  }
  if (out.pass) out.detail << "smallest margin " << fmt(worst);
}

// 8. Negative-curvature dichotomy.
void dichotomy(Outcome& out) {
  const SampledSurface s = gallery("sphere_h3").sample(16);
  const std::vector<double> a(s.size(), 2.0), ric(s.size(), -2.0);
  const DichotomyResult c2 = negative_curvature_classify(-1.0, 2.0, a, ric);
  out.require(c2.kind == Dichotomy::Case2 && c2.index == 0 && c2.nullity == 1,
              "synthetic umbilic data not Case2");
  // The Jacobi operator with |A|^2 + Ric = 0 is -Delta.
  const Eigen::VectorXd potential = Eigen::VectorXd::Zero(s.size());
  const SpectralResult res = index_nullity(assemble_jacobi(s, potential));
  out.require(res.index == 0 && res.nullity == 1,
              "assembled (i, n) = (" + std::to_string(res.index) + ", " +
                  std::to_string(res.nullity) + ")");
  out.require(negative_curvature_classify(-1.0, 2.1, a, ric).kind == Dichotomy::NotApplicable,
              "h^2 > 4|k| not NotApplicable");
  std::vector<double> na, nr;
  for (const auto& p : s.points()) {
    na.push_back(p.norm_a_sq);
    nr.push_back(p.ricci_normal);
  }
  out.require(negative_curvature_classify(s.ambient().curvature(), s.immersion().cmc(), na, nr).kind ==
                  Dichotomy::NotApplicable,
              "geodesic sphere in H3 not NotApplicable");
  const DichotomyResult c1 = negative_curvature_classify(-1.0, 1.0, a, ric);
  out.require(c1.kind == Dichotomy::Case1 && c1.energy_index_plus_nullity == 0,
              "h^2 < 4|k| not Case1");
  if (out.pass) out.detail << "Case2 -> (0,1), NotApplicable, Case1";
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// 9. Byte-identical output for a repeated run, with different thread counts.
void determinism(Outcome& out) {
  const auto root = std::filesystem::temp_directory_path() / "cmcindex-acceptance";
  std::filesystem::remove_all(root);
  int files = 0;
  for (Command cmd : {Command::Gallery, Command::Identity, Command::Spectrum, Command::Bounds}) {
    RunConfig c;
    c.seed = 7;
    c.svg = true;
    std::vector<std::filesystem::path> dirs;
    for (const char* threads : {"1", "4"}) {
      setenv("CMCINDEX_THREADS", threads, 1);
      const auto dir = root / (std::string(to_string(cmd)) + "-" + threads);
      write_outputs(run_command(cmd, c), dir);
      dirs.push_back(dir);
    }
    unsetenv("CMCINDEX_THREADS");
    for (const auto& entry : std::filesystem::directory_iterator(dirs[0])) {
      const auto name = entry.path().filename();
      ++files;
      out.require(std::filesystem::exists(dirs[1] / name) &&
                      read_file(entry.path()) == read_file(dirs[1] / name),
                  std::string(to_string(cmd)) + "/" + name.string() + " differs");
    }
    int second = 0;
    for ([[maybe_unused]] const auto& entry : std::filesystem::directory_iterator(dirs[1])) ++second;
    out.require(second == static_cast<int>(std::distance(
                              std::filesystem::directory_iterator(dirs[0]),
                              std::filesystem::directory_iterator{})),
                std::string(to_string(cmd)) + " file sets differ");
  }
  std::filesystem::remove_all(root);
  if (out.pass) out.detail << files << " files byte-identical across runs";
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<void(Outcome&)>> criteria[] = {
      {"comparison identity", comparison_identity},
      {"second variation formulas vs finite differences", formula_vs_fd},
      {"spectral ground truth", spectral_truth},
      {"weak index sandwich", sandwich},
      {"index bound", main_bound_check},
      {"constants and r(g,b)", constants},
      {"functional inequalities", inequalities},
      {"negative curvature dichotomy", dichotomy},
      {"determinism", determinism},
  };
  int failures = 0;
  int number = 0;
  for (const auto& [name, check] : criteria) {
    ++number;
    Outcome out;
    try {
      check(out);
    } catch (const std::exception& e) {
      out.require(false, std::string("exception: ") + e.what());
    }
    if (!out.pass) ++failures;
    std::printf("%s %d %s: %s\n", out.pass ? "PASS" : "FAIL", number, name,
                out.detail.str().c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
