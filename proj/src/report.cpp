#include "cmcindex/report.hpp"

#include "cmcindex/bounds.hpp"
#include "cmcindex/format.hpp"
#include "cmcindex/spectral.hpp"
#include "cmcindex/svg.hpp"
#include "cmcindex/variations.hpp"

#include <dlfcn.h>

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

namespace cmcindex {

namespace {

using nlohmann::json;

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Each surface gets its own stream so results do not depend on scheduling.
std::uint64_t surface_seed(std::uint64_t seed, const std::string& id) {
  return seed * 0x9e3779b97f4a7c15ULL ^ fnv1a(id);
}

// OpenBLAS may be the BLAS behind LAPACK; keep it single threaded so the
// surface-level pool is the only source of parallelism and sums are
// reproducible.
void pin_blas_threads() {
  static std::once_flag once;
  std::call_once(once, [] {
    using SetThreads = void (*)(int);
    if (void* sym = dlsym(RTLD_DEFAULT, "openblas_set_num_threads")) {
      reinterpret_cast<SetThreads>(sym)(1);
    }
  });
}

struct Prepared {
  std::string id;
  GallerySurface surface;
  int resolution = 0;
};

std::vector<Prepared> prepare(Command c, const RunConfig& config) {
  std::vector<SurfaceDescriptor> wanted =
      config.surfaces.empty() ? default_surfaces(c) : config.surfaces;
  std::vector<Prepared> out;
  for (const auto& d : wanted) {
    Prepared p;
    try {
      p.surface = gallery(d);
    } catch (const PreconditionError& e) {
      throw ConfigError(e.what());
    } catch (const ConstructionError& e) {
      throw ConfigError(e.what());
    }
    p.id = p.surface.descriptor.id();
    p.resolution = d.resolution ? *d.resolution
                                : config.resolution.value_or(
                                      p.surface.default_resolution);
    out.push_back(std::move(p));
  }
  std::sort(out.begin(), out.end(),
            [](const Prepared& a, const Prepared& b) { return a.id < b.id; });
  out.erase(std::unique(out.begin(), out.end(),
                        [](const Prepared& a, const Prepared& b) {
                          return a.id == b.id;
                        }),
            out.end());
  return out;
}

// Outcome of one surface task.
struct SurfaceResult {
  json report;
  std::string csv;  // rows for the summary CSV
  std::vector<std::pair<std::string, std::string>> files;
  std::vector<std::string> violations;
  std::string input_error;
};

template <class Task>
CommandOutput run_surfaces(Command c, const RunConfig& config,
                           const std::string& csv_name,
                           const std::string& csv_header, Task&& task) {
  pin_blas_threads();
  const std::vector<Prepared> surfaces = prepare(c, config);
  std::vector<SurfaceResult> results(surfaces.size());
  parallel_for(static_cast<int>(surfaces.size()), [&](int k) {
    SurfaceResult& r = results[k];
    try {
      task(surfaces[k], r);
    } catch (const PreconditionError& e) {
      r.input_error = e.what();
    } catch (const std::exception& e) {
      r.violations.push_back(surfaces[k].id + ": " + e.what());
      r.report["error"] = e.what();
    }
    r.report["surface"] = surfaces[k].id;
  });

  CommandOutput out;
  json list = json::array();
  json violations = json::array();
  std::string csv = csv_header;
  for (std::size_t k = 0; k < results.size(); ++k) {
    auto& r = results[k];
    if (!r.input_error.empty()) {
      out.config_error = true;
      r.report["input_error"] = r.input_error;
      violations.push_back(surfaces[k].id + ": " + r.input_error);
    }
    for (const auto& v : r.violations) violations.push_back(v);
    list.push_back(std::move(r.report));
    csv += r.csv;
    for (auto& f : r.files) out.files.push_back(std::move(f));
  }
  out.pass = violations.empty();
  out.files.insert(out.files.begin(), {csv_name, csv});

  json& rep = out.report;
  rep["schema_version"] = kSchemaVersion;
  rep["command"] = std::string(to_string(c));
  rep["config"] = config.to_json();
  rep["surfaces"] = std::move(list);
  rep["violations"] = std::move(violations);
  rep["pass"] = out.pass;
  return out;
}

json optional_json(const std::optional<int>& v) {
  return v ? json(*v) : json(nullptr);
}

std::string yes_no(bool b) { return b ? "true" : "false"; }

}  // namespace

std::string_view to_string(Command c) {
  switch (c) {
    case Command::Identity: return "identity";
    case Command::Spectrum: return "spectrum";
    case Command::Bounds: return "bounds";
    case Command::Gallery: return "gallery";
  }
  return "unknown";
}

Command parse_command(const std::string& name) {
  for (Command c : {Command::Identity, Command::Spectrum, Command::Bounds,
                    Command::Gallery}) {
    if (name == to_string(c)) return c;
  }
  throw ConfigError("unknown command '" + name + "'");
}

// ---------------------------------------------------------------------------
// Configuration

RunConfig RunConfig::from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("configuration must be a JSON object");
  static const std::vector<std::string> known{
      "surfaces", "resolution", "refinement_levels", "seed", "variations",
      "tolerances", "deltas", "r_table", "out", "svg"};
  for (const auto& [key, value] : j.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw ConfigError("unknown configuration key '" + key + "'");
    }
  }
  auto integer = [&](const json& v, const std::string& what, long lo,
                     long hi) -> long {
    if (!v.is_number_integer()) throw ConfigError(what + " must be an integer");
    const long x = v.get<long>();
    if (x < lo || x > hi) {
      throw ConfigError(what + " must lie in [" + std::to_string(lo) + ", " +
                        std::to_string(hi) + "]");
    }
    return x;
  };
  auto real = [&](const json& v, const std::string& what) {
    if (!v.is_number()) throw ConfigError(what + " must be a number");
    const double x = v.get<double>();
    if (!std::isfinite(x) || x < 0.0) {
      throw ConfigError(what + " must be finite and non-negative");
    }
    return x;
  };

  RunConfig c;
  if (j.contains("surfaces")) {
    const json& s = j["surfaces"];
    if (!s.is_array()) throw ConfigError("surfaces must be an array");
    for (const auto& item : s) {
      try {
        c.surfaces.push_back(SurfaceDescriptor::from_json(item));
      } catch (const PreconditionError& e) {
        throw ConfigError(e.what());
      }
    }
  }
  if (j.contains("resolution")) {
    c.resolution = static_cast<int>(integer(j["resolution"], "resolution", 8, 4096));
  }
  if (j.contains("refinement_levels")) {
    c.refinement_levels =
        static_cast<int>(integer(j["refinement_levels"], "refinement_levels", 0, 3));
  }
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned() && !j["seed"].is_number_integer()) {
      throw ConfigError("seed must be an integer");
    }
    if (!j["seed"].is_number_unsigned()) {
      throw ConfigError("seed must be non-negative");
    }
    c.seed = j["seed"].get<std::uint64_t>();
  }
  if (j.contains("variations")) {
    c.variations = static_cast<int>(integer(j["variations"], "variations", 0, 10000));
  }
  if (j.contains("tolerances")) {
    const json& t = j["tolerances"];
    if (!t.is_object()) throw ConfigError("tolerances must be an object");
    for (const auto& [key, value] : t.items()) {
      if (key == "identity") {
        c.tolerances.identity = real(value, "tolerances.identity");
      } else if (key == "refinement_ratio") {
        c.tolerances.refinement_ratio = real(value, "tolerances.refinement_ratio");
      } else if (key == "roundoff_floor") {
        c.tolerances.roundoff_floor = real(value, "tolerances.roundoff_floor");
      } else if (key == "inequality") {
        c.tolerances.inequality = real(value, "tolerances.inequality");
      } else {
        throw ConfigError("unknown tolerance '" + key + "'");
      }
    }
  }
  if (j.contains("deltas")) {
    const json& d = j["deltas"];
    if (!d.is_array() || d.empty()) {
      throw ConfigError("deltas must be a non-empty array");
    }
    c.deltas.clear();
    for (const auto& v : d) {
      const double x = real(v, "delta");
      if (!(x > 0.0)) throw ConfigError("delta must be positive");
      c.deltas.push_back(x);
    }
  }
  if (j.contains("r_table")) {
    const json& r = j["r_table"];
    if (!r.is_object()) throw ConfigError("r_table must be an object");
    for (const auto& [key, value] : r.items()) {
      if (key == "max_genus") {
        c.r_table_genus = static_cast<int>(integer(value, "r_table.max_genus", 0, 1000));
      } else if (key == "max_branch") {
        c.r_table_branch = static_cast<int>(integer(value, "r_table.max_branch", 0, 10000));
      } else {
        throw ConfigError("unknown r_table key '" + key + "'");
      }
    }
  }
  if (j.contains("out")) {
    if (!j["out"].is_string()) throw ConfigError("out must be a string");
    c.out = j["out"].get<std::string>();
  }
  if (j.contains("svg")) {
    if (!j["svg"].is_boolean()) throw ConfigError("svg must be a boolean");
    c.svg = j["svg"].get<bool>();
  }
  return c;
}

json RunConfig::to_json() const {
  json j;
  j["surfaces"] = json::array();
  for (const auto& s : surfaces) j["surfaces"].push_back(s.to_json());
  j["resolution"] = optional_json(resolution);
  j["refinement_levels"] = refinement_levels;
  j["seed"] = seed;
  j["variations"] = variations;
  j["tolerances"] = {{"identity", tolerances.identity},
                     {"refinement_ratio", tolerances.refinement_ratio},
                     {"roundoff_floor", tolerances.roundoff_floor},
                     {"inequality", tolerances.inequality}};
  j["deltas"] = deltas;
  j["r_table"] = {{"max_genus", r_table_genus}, {"max_branch", r_table_branch}};
  j["svg"] = svg;
  // The output directory is left out so reports written to different
  // places stay identical.
  return j;
}

std::vector<SurfaceDescriptor> default_surfaces(Command c) {
  std::vector<std::string> names{"sphere_r3", "sphere_s3", "sphere_h3",
                                 "clifford_torus", "delaunay_t3"};
  if (c != Command::Identity) {
    names.push_back("delaunay_t3:k=2");
    names.push_back("delaunay_t3:k=3");
  }
  std::vector<SurfaceDescriptor> out;
  for (const auto& n : names) out.push_back(SurfaceDescriptor::parse(n));
  return out;
}

// ---------------------------------------------------------------------------
// Commands

CommandOutput run_identity(const RunConfig& config) {
  const Tolerances tol = config.tolerances;
  return run_surfaces(
      Command::Identity, config, "identity.csv",
      "surface,variation,d2_area,d2_energy,defect,relative,relative_refined,"
      "pass\n",
      [&](const Prepared& p, SurfaceResult& r) {
        std::vector<SampledSurface> levels;
        for (int l = 0; l <= config.refinement_levels; ++l) {
          levels.push_back(p.surface.sample(p.resolution << l));
        }
        Rng rng(surface_seed(config.seed, p.id));
        const AmbientSpace& space = levels.front().ambient();
        json rows = json::array();
        double worst = 0.0;
        std::ostringstream csv;
        for (int v = 0; v < config.variations; ++v) {
          const json spec = random_ambient_spec(space, rng);
          std::vector<double> rel;
          IdentityResidual base;
          for (std::size_t l = 0; l < levels.size(); ++l) {
            const IdentityResidual res =
                comparison_identity_residual(levels[l], make_field(levels[l], spec));
            if (l == 0) base = res;
            rel.push_back(res.relative);
          }
          bool ok = base.relative < tol.identity;
          if (!ok) {
            std::ostringstream msg;
            msg << p.id << ": variation " << v << " residual "
                << format_double(base.relative, 6) << " exceeds "
                << format_double(tol.identity, 6);
            r.violations.push_back(msg.str());
          }
          bool refines = true;
          for (std::size_t l = 1; l < rel.size(); ++l) {
            const bool at_floor =
                rel[l - 1] < tol.roundoff_floor && rel[l] < tol.roundoff_floor;
            if (!at_floor && !(rel[l - 1] >= tol.refinement_ratio * rel[l])) {
              refines = false;
            }
          }
          if (!refines) {
            r.violations.push_back(p.id + ": variation " + std::to_string(v) +
                                   " residual does not decrease under refinement");
          }
          ok = ok && refines;
          worst = std::max(worst, base.relative);
          rows.push_back({{"variation", v},
                          {"field", spec},
                          {"d2_area", base.d2_area},
                          {"d2_energy", base.d2_energy},
                          {"defect", base.defect},
                          {"relative", rel},
                          {"pass", ok}});
          csv << csv_field(p.id) << ',' << v << ',' << format_double(base.d2_area) << ','
              << format_double(base.d2_energy) << ','
              << format_double(base.defect) << ','
              << format_double(base.relative, 6) << ','
              << format_double(rel.back(), 6) << ',' << yes_no(ok) << '\n';
        }
        r.csv = csv.str();
        r.report["resolution"] = p.resolution;
        r.report["refined_resolutions"] = json::array();
        for (int l = 1; l <= config.refinement_levels; ++l) {
          r.report["refined_resolutions"].push_back(p.resolution << l);
        }
        r.report["variations"] = std::move(rows);
        r.report["max_relative"] = worst;
        r.report["pass"] = r.violations.empty();
      });
}

namespace {

// Shared by spectrum and bounds: checks of the measured index against the
// surface's reference data.
void index_checks(const Prepared& p, const IndexReport& rep,
                  SurfaceResult& r) {
  const ReferenceData& ref = p.surface.reference;
  auto fail = [&](const std::string& what) {
    r.violations.push_back(p.id + ": " + what);
  };
  if (ref.index && rep.index != *ref.index) {
    fail("index " + std::to_string(rep.index) + " != reference " +
         std::to_string(*ref.index));
  }
  if (ref.nullity && rep.nullity != *ref.nullity) {
    fail("nullity " + std::to_string(rep.nullity) + " != reference " +
         std::to_string(*ref.nullity));
  }
  if (ref.index_plus_nullity &&
      rep.index + rep.nullity != *ref.index_plus_nullity) {
    fail("i + n = " + std::to_string(rep.index + rep.nullity) +
         " != reference " + std::to_string(*ref.index_plus_nullity));
  }
  if (ref.index_lower_bound && rep.index < *ref.index_lower_bound) {
    fail("index " + std::to_string(rep.index) + " below lower bound " +
         std::to_string(*ref.index_lower_bound));
  }
  if (rep.weak_index < rep.index - 1 || rep.weak_index > rep.index) {
    fail("weak index " + std::to_string(rep.weak_index) +
         " outside [i - 1, i]");
  }
}

json index_json(const IndexReport& rep) {
  return {{"index", rep.index},
          {"nullity", rep.nullity},
          {"weak_index", rep.weak_index},
          {"coarse_index", rep.coarse_index},
          {"coarse_nullity", rep.coarse_nullity},
          {"resolution", rep.resolution},
          {"coarse_resolution", rep.coarse_resolution},
          {"stable", rep.stable},
          {"null_tolerance", rep.null_tolerance},
          {"dimension", rep.spectrum.dimension},
          {"max_residual_ok", rep.spectrum.max_residual < 1e-8}};
}

}  // namespace

CommandOutput run_spectrum(const RunConfig& config) {
  return run_surfaces(
      Command::Spectrum, config, "spectrum.csv",
      "surface,i,n,i_h,coarse_i,coarse_n,stable,lowest,pass\n",
      [&](const Prepared& p, SurfaceResult& r) {
        const IndexReport rep = jacobi_index(p.surface, p.resolution);
        index_checks(p, rep, r);
        const bool pass = r.violations.empty();
        r.report = index_json(rep);
        const auto& ev = rep.spectrum.eigenvalues;
        const std::size_t shown = std::min<std::size_t>(ev.size(), 20);
        r.report["lowest_eigenvalues"] =
            std::vector<double>(ev.begin(), ev.begin() + shown);
        r.report["pass"] = pass;
        std::ostringstream csv;
        csv << csv_field(p.id) << ',' << rep.index << ',' << rep.nullity << ','
            << rep.weak_index << ',' << rep.coarse_index << ','
            << rep.coarse_nullity << ',' << yes_no(rep.stable) << ','
            << format_double(ev.empty() ? 0.0 : ev.front()) << ','
            << yes_no(pass) << '\n';
        r.csv = csv.str();
        const std::string name = "spectrum_" + slug(p.id);
        r.files.emplace_back(name + ".csv", spectrum_csv(rep.spectrum));
        if (config.svg) {
          r.files.emplace_back(name + ".svg", spectrum_svg(rep.spectrum, p.id));
        }
      });
}

CommandOutput run_bounds(const RunConfig& config) {
  const std::vector<double> t_grid = default_t_grid();
  CommandOutput out = run_surfaces(
      Command::Bounds, config, "bounds.csv", bounds_csv_header(),
      [&](const Prepared& p, SurfaceResult& r) {
        const IndexReport rep = jacobi_index(p.surface, p.resolution);
        index_checks(p, rep, r);
        const SampledSurface s = p.surface.sample(p.resolution);
        const AmbientSpace& space = s.ambient();

        BoundReport b;
        b.surface = p.id;
        b.ambient = std::string(to_string(space.kind()));
        b.genus = s.immersion().genus();
        b.branch_points = s.immersion().branch_count();
        b.h = s.immersion().cmc();
        b.J = space.extrinsic_bound();
        b.area = area(s);
        b.index = rep.index;
        b.nullity = rep.nullity;
        b.weak_index = rep.weak_index;
        b.stable = rep.stable;
        b.r = topological_r(b.genus, b.branch_points);
        b.index_lower_bound = p.surface.reference.index_lower_bound;
        const int measured = b.index + b.nullity;
        b.conjecture_gap = measured / ((1.0 + b.h * b.h) * b.area + b.genus);

        json extra;
        std::ostringstream heat_csv;
        if (b.J) {
          const double J = *b.J;
          const MainBound mb = main_bound(J, b.h, b.area, b.genus, b.branch_points);
          b.willmore = willmore_energy(J, b.h, b.area);
          b.bound = mb.headline;
          b.tight_bound = mb.optimized;
          b.margin = mb.headline - measured;
          if (measured > mb.headline) {
            r.violations.push_back(p.id + ": i + n exceeds the headline bound");
          }
          if (measured > mb.optimized) {
            r.violations.push_back(p.id + ": i + n exceeds the optimized bound");
          }
          extra["optimized_constant"] = mb.optimized_constant;
          extra["headline_constant"] = kHeadlineConstant;

          const SpectralResult lb = eigensolve(
              assemble_laplacian(s), EigensolveOptions{0, false, 0, std::nullopt});
          const ChainResult chain = energy_index_chain(lb, b.h, J, t_grid);
          b.chain = chain.value;
          extra["chain_argmin"] = chain.argmin;
          extra["chain_resolved"] = chain.resolved;
          if (measured > chain.value + b.r + config.tolerances.inequality) {
            r.violations.push_back(p.id + ": i + n exceeds chain value + r");
          }
          json heat = json::array();
          for (double delta : config.deltas) {
            const HeatTraceCheck hc =
                heat_trace_bound_check(lb, b.area, b.h, J, delta, t_grid);
            heat.push_back({{"delta", delta},
                            {"min_margin", hc.min_margin},
                            {"resolved", hc.resolved}});
            if (hc.min_margin < -config.tolerances.inequality) {
              r.violations.push_back(p.id + ": heat-trace bound violated for delta " +
                                     format_double(delta));
            }
            for (std::size_t k = 0; k < hc.t.size(); ++k) {
              heat_csv << csv_field(p.id) << ',' << format_double(delta) << ','
                       << format_double(hc.t[k]) << ','
                       << format_double(hc.trace[k]) << ','
                       << format_double(hc.bound[k]) << ','
                       << format_double(hc.margin[k]) << '\n';
            }
          }
          extra["heat_trace"] = std::move(heat);
          const double cm = counting_margin(
              lb, {0.0, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0, 50.0}, t_grid);
          extra["counting_margin"] = cm;
          if (cm < -config.tolerances.inequality) {
            r.violations.push_back(p.id + ": eigenvalue count exceeds e^{ct} h(t)");
          }
        }
        if (space.curvature() < 0.0) {
          std::vector<double> a2, ric;
          for (const auto& g : s.points()) {
            a2.push_back(g.norm_a_sq);
            ric.push_back(g.ricci_normal);
          }
          const DichotomyResult d =
              negative_curvature_classify(space.curvature(), b.h, a2, ric);
          b.dichotomy = d.kind;
          if (d.index && (*d.index != b.index || *d.nullity != b.nullity)) {
            r.violations.push_back(p.id + ": umbilic case (i, n) != (0, 1)");
          }
          if (d.energy_index_plus_nullity && measured > b.r) {
            r.violations.push_back(p.id + ": i + n exceeds r in the first case");
          }
        }
        b.pass = r.violations.empty();
        r.report = b.to_json();
        r.report["spectral"] = index_json(rep);
        r.report["details"] = std::move(extra);
        r.csv = bounds_csv_row(b);
        if (b.J) {
          r.files.emplace_back("heat_trace_" + slug(p.id) + ".csv",
                               "surface,delta,t,trace,bound,margin\n" +
                                   heat_csv.str());
        }
      });
  out.files.emplace_back("r_table.csv",
                         r_table_csv(config.r_table_genus, config.r_table_branch));
  return out;
}

CommandOutput run_gallery(const RunConfig& config) {
  return run_surfaces(
      Command::Gallery, config, "gallery.csv",
      "surface,ambient,g,b,resolution,h,J,area,area_reference,area_error,"
      "cmc_residual,conformality,pass\n",
      [&](const Prepared& p, SurfaceResult& r) {
        const SampledSurface s = p.surface.sample(p.resolution);
        const ReferenceData& ref = p.surface.reference;
        const double a = area(s);
        const double cmc = cmc_residual(s);
        const double conf = s.max_conformality_residual();
        const auto J = s.ambient().extrinsic_bound();
        std::optional<double> area_error;
        if (ref.area) area_error = std::abs(a - *ref.area) / *ref.area;
        if (cmc >= 1e-6) r.violations.push_back(p.id + ": CMC residual too large");
        if (conf >= 1e-10) r.violations.push_back(p.id + ": chart not conformal");
        if (area_error && *area_error >= 1e-6) {
          r.violations.push_back(p.id + ": area differs from the reference");
        }
        const bool pass = r.violations.empty();
        r.report = {{"ambient", std::string(to_string(s.ambient().kind()))},
                    {"descriptor", p.surface.descriptor.to_json()},
                    {"g", s.immersion().genus()},
                    {"b", s.immersion().branch_count()},
                    {"resolution", p.resolution},
                    {"nodes", s.size()},
                    {"h", s.immersion().cmc()},
                    {"J", J ? json(*J) : json("n/a")},
                    {"area", a},
                    {"area_reference", ref.area ? json(*ref.area) : json(nullptr)},
                    {"cmc_residual", cmc},
                    {"conformality", conf},
                    {"pass", pass}};
        if (J) r.report["willmore"] = willmore_energy(J, s.immersion().cmc(), a);
        std::ostringstream csv;
        csv << csv_field(p.id) << ',' << to_string(s.ambient().kind()) << ','
            << s.immersion().genus() << ',' << s.immersion().branch_count()
            << ',' << p.resolution << ',' << format_double(s.immersion().cmc())
            << ',' << (J ? format_double(*J) : "n/a") << ',' << format_double(a)
            << ',' << (ref.area ? format_double(*ref.area) : "n/a") << ','
            << (area_error ? format_double(*area_error, 3) : "n/a") << ','
            << format_double(cmc, 3) << ',' << format_double(conf, 3) << ','
            << yes_no(pass) << '\n';
        r.csv = csv.str();
      });
}

CommandOutput run_command(Command c, const RunConfig& config) {
  switch (c) {
    case Command::Identity: return run_identity(config);
    case Command::Spectrum: return run_spectrum(config);
    case Command::Bounds: return run_bounds(config);
    case Command::Gallery: return run_gallery(config);
  }
  throw ConfigError("unknown command");
}

void write_outputs(const CommandOutput& output,
                   const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto write = [&](const std::string& name, const std::string& text) {
    std::ofstream f(dir / name, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + (dir / name).string());
    f << text;
  };
  write("report.json", output.report.dump(2) + "\n");
  for (const auto& [name, text] : output.files) write(name, text);
}

// ---------------------------------------------------------------------------
// Threads

int thread_count(int tasks) {
  int n = static_cast<int>(std::thread::hardware_concurrency());
  if (const char* env = std::getenv("CMCINDEX_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) n = static_cast<int>(v);
  }
  return std::max(1, std::min(n, tasks));
}

void parallel_for(int n, const std::function<void(int)>& body) {
  if (n <= 0) return;
  const int workers = thread_count(n);
  if (workers == 1) {
    for (int k = 0; k < n; ++k) body(k);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto loop = [&] {
    for (int k = next++; k < n; k = next++) {
      try {
        body(k);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (int w = 1; w < workers; ++w) pool.emplace_back(loop);
  loop();
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

std::string slug(const std::string& id) {
  std::string out;
  for (char c : id) {
    const bool keep = std::isalnum(static_cast<unsigned char>(c)) || c == '.' ||
                      c == '-' || c == '_';
    out += keep ? c : '_';
  }
  return out;
}

}  // namespace cmcindex
