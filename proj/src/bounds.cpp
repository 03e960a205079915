#include "cmcindex/bounds.hpp"

#include "cmcindex/format.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace cmcindex {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kGolden = 0.6180339887498949;

template <class F>
double golden_section(F&& f, double lo, double hi, double tol) {
  double a = lo, b = hi;
  double c = b - kGolden * (b - a), d = a + kGolden * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kGolden * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kGolden * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

double floor_div2_neg(int b) {
  // [-b/2] with [x] the largest integer <= x.
  return std::floor(-b / 2.0);
}

std::string opt_number(const std::optional<double>& v) {
  return v ? format_double(*v) : "n/a";
}

}  // namespace

int topological_r(int g, int b) {
  if (g < 0 || b < 0) {
    throw PreconditionError("genus and branch count must be non-negative");
  }
  if (b <= 2 * g - 3) return 6 * g - 6 - 2 * b;
  if (2 * g - 2 <= b && b <= 4 * g - 4) {
    return 4 * g - 2 + 2 * static_cast<int>(floor_div2_neg(b));
  }
  if (b >= 4 * g - 3) return 0;
  throw std::logic_error("r(g, b): no case applies");
}

double delta_expression(double delta) {
  if (!(delta > 0.0)) throw PreconditionError("delta must be positive");
  const double a = delta * (1.0 + delta);
  // Evaluated in logarithms to stay finite for small delta.
  const double log_value = (2.0 + 4.0 / a) * std::log(a + 2.0) -
                           2.0 * std::log(delta) - (4.0 / a) * std::log(2.0);
  return std::exp(log_value);
}

double delta_profile(double delta, double s) {
  if (!(delta > 0.0) || !(s > 0.0)) {
    throw PreconditionError("delta and s must be positive");
  }
  const double a = delta * (1.0 + delta);
  const double ratio = std::exp((a + 2.0) * s) / std::expm1(a * s);
  return (1.0 + delta) * (1.0 + delta) * ratio * ratio;
}

DeltaOptimum optimize_delta(double tolerance) {
  DeltaOptimum out;
  out.delta = golden_section(delta_expression, 1e-6, 100.0, tolerance);
  out.value = delta_expression(out.delta);
  return out;
}

MainBound main_bound(double J, double h, double area, int genus,
                     int branch_points) {
  if (!std::isfinite(J) || !std::isfinite(h) || !std::isfinite(area)) {
    throw PreconditionError("bound inputs must be finite");
  }
  MainBound out;
  out.r = topological_r(genus, branch_points);
  const double energy = (4.0 * J * J + h * h) * area;
  out.headline = kHeadlineConstant * energy + out.r;
  out.optimized_constant = 3.0 / (2.0 * kPi) * optimize_delta().value;
  out.optimized = out.optimized_constant * energy + out.r;
  return out;
}

double willmore_energy(std::optional<double> J, double h, double area) {
  if (!J) {
    throw UnsupportedError(
        "Willmore-type energy needs a Euclidean embedding bound J");
  }
  return (h * h + 4.0 * (*J) * (*J)) * area;
}

double mss_margin(const SampledSurface& s, const std::vector<ScalarJet>& f) {
  const auto J = s.ambient().extrinsic_bound();
  if (!J) {
    throw UnsupportedError("Michael-Simon-Sobolev check needs a finite J");
  }
  if (static_cast<int>(f.size()) != s.size()) {
    throw PreconditionError("scalar field sampled on a different grid");
  }
  const double h = s.immersion().cmc();
  const double c = std::sqrt(h * h + 4.0 * (*J) * (*J));
  double l2 = 0.0, rhs = 0.0;
  for (int n = 0; n < s.size(); ++n) {
    const auto& g = s[n];
    const double grad = std::sqrt((f[n].fx * f[n].fx + f[n].fy * f[n].fy) / g.e2l);
    l2 += f[n].f * f[n].f * g.area_weight();
    rhs += (grad + c * std::abs(f[n].f)) * g.area_weight();
  }
  return rhs / std::sqrt(2.0 * kPi) - std::sqrt(l2);
}

double interpolation_margin(const SampledSurface& s,
                            const std::vector<ScalarJet>& f) {
  if (static_cast<int>(f.size()) != s.size()) {
    throw PreconditionError("scalar field sampled on a different grid");
  }
  double l1 = 0.0, l2 = 0.0, l4 = 0.0;
  for (int n = 0; n < s.size(); ++n) {
    const double w = s[n].area_weight();
    const double v = std::abs(f[n].f);
    l1 += v * w;
    l2 += v * v * w;
    l4 += v * v * v * v * w;
  }
  return std::sqrt(l4) * l1 - std::pow(l2, 1.5);
}

double heat_trace_upper(double delta, double t, double area, double h,
                        double J) {
  const double w = h * h + 4.0 * J * J;
  if (!(w > 0.0)) {
    throw UnsupportedError("heat-trace bound degenerates for h = J = 0");
  }
  if (!(delta > 0.0) || !(t > 0.0)) {
    throw PreconditionError("delta and t must be positive");
  }
  const double alpha = 0.5 * w;
  const double k = delta * (1.0 + delta) * alpha * t;
  const double ratio = 1.0 / -std::expm1(-k);  // e^k / (e^k - 1)
  return (1.0 + delta) * (1.0 + delta) / (2.0 * kPi) * area * w * ratio * ratio;
}

std::vector<double> default_t_grid() {
  std::vector<double> t(40);
  const double lo = std::log(0.05), hi = std::log(5.0);
  for (int i = 0; i < 40; ++i) t[i] = std::exp(lo + (hi - lo) * i / 39.0);
  return t;
}

HeatTraceCheck heat_trace_bound_check(const SpectralResult& laplacian,
                                      double area, double h, double J,
                                      double delta,
                                      const std::vector<double>& t_grid) {
  HeatTraceCheck out;
  out.min_margin = std::numeric_limits<double>::infinity();
  for (double t : t_grid) {
    const double trace = heat_trace(laplacian, t);
    const double bound = heat_trace_upper(delta, t, area, h, J);
    out.t.push_back(t);
    out.trace.push_back(trace);
    out.bound.push_back(bound);
    out.margin.push_back(bound - trace);
    out.min_margin = std::min(out.min_margin, bound - trace);
    out.resolved = out.resolved && heat_trace_resolved(laplacian, t);
  }
  return out;
}

ChainResult energy_index_chain(const SpectralResult& laplacian, double h,
                               double J, const std::vector<double>& t_grid) {
  const double rate = 4.0 * J * J + 2.0 * h * h;
  if (!(rate > 0.0)) {
    throw UnsupportedError("energy-index chain needs h^2 + 4J^2 > 0");
  }
  if (t_grid.empty()) throw PreconditionError("empty t grid");
  auto objective = [&](double t) {
    return std::exp(rate * t) * heat_trace(laplacian, t);
  };
  std::size_t best = 0;
  std::vector<double> values(t_grid.size());
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    values[i] = objective(t_grid[i]);
    if (values[i] < values[best]) best = i;
  }
  const double lo = t_grid[best > 0 ? best - 1 : 0];
  const double hi = t_grid[std::min(best + 1, t_grid.size() - 1)];
  ChainResult out;
  out.argmin = t_grid[best];
  double value = values[best];
  if (hi > lo) {
    const double t = golden_section(objective, lo, hi, 1e-10 * hi);
    if (objective(t) < value) {
      value = objective(t);
      out.argmin = t;
    }
  }
  out.value = 3.0 * value;
  out.resolved = heat_trace_resolved(laplacian, out.argmin);
  return out;
}

double counting_margin(const SpectralResult& laplacian,
                       const std::vector<double>& thresholds,
                       const std::vector<double>& t_grid) {
  double worst = std::numeric_limits<double>::infinity();
  for (double c : thresholds) {
    const int count = counting(laplacian, c);
    for (double t : t_grid) {
      worst = std::min(worst,
                       std::exp(c * t) * heat_trace(laplacian, t) - count);
    }
  }
  return worst;
}

std::string_view to_string(Dichotomy d) {
  switch (d) {
    case Dichotomy::NotApplicable: return "NotApplicable";
    case Dichotomy::Case1: return "Case1";
    case Dichotomy::Case2: return "Case2";
  }
  return "unknown";
}

DichotomyResult negative_curvature_classify(
    double kappa0, double h, const std::vector<double>& norm_a_sq,
    const std::vector<double>& ricci_normal) {
  if (!(kappa0 < 0.0)) {
    throw PreconditionError("the dichotomy needs a negative curvature bound");
  }
  const double k = std::abs(kappa0);
  const double tol = 1e-10 * std::max(1.0, 4.0 * k);
  DichotomyResult out;
  if (h * h > 4.0 * k + tol) {
    out.kind = Dichotomy::NotApplicable;
    return out;
  }
  bool umbilic = std::abs(h * h - 4.0 * k) <= tol && !norm_a_sq.empty() &&
                 norm_a_sq.size() == ricci_normal.size();
  for (std::size_t i = 0; umbilic && i < norm_a_sq.size(); ++i) {
    umbilic = std::abs(norm_a_sq[i] - 2.0 * k) <= tol &&
              std::abs(ricci_normal[i] + 2.0 * k) <= tol;
  }
  if (umbilic) {
    out.kind = Dichotomy::Case2;
    out.index = 0;
    out.nullity = 1;
  } else {
    out.kind = Dichotomy::Case1;
    out.energy_index_plus_nullity = 0;
  }
  return out;
}

nlohmann::json BoundReport::to_json() const {
  auto opt = [](const std::optional<double>& v) -> nlohmann::json {
    return v ? nlohmann::json(*v) : nlohmann::json("n/a");
  };
  nlohmann::json j;
  j["surface"] = surface;
  j["ambient"] = ambient;
  j["g"] = genus;
  j["b"] = branch_points;
  j["h"] = h;
  j["J"] = opt(J);
  j["area"] = area;
  j["willmore"] = opt(willmore);
  j["index"] = index;
  j["nullity"] = nullity;
  j["weak_index"] = weak_index;
  j["stable"] = stable;
  j["r"] = r;
  j["bound"] = opt(bound);
  j["tight_bound"] = opt(tight_bound);
  j["margin"] = opt(margin);
  j["chain"] = opt(chain);
  j["dichotomy"] = dichotomy ? std::string(to_string(*dichotomy)) : "n/a";
  j["conjecture_gap"] = conjecture_gap;
  if (index_lower_bound) j["index_lower_bound"] = *index_lower_bound;
  j["pass"] = pass;
  return j;
}

std::string bounds_csv_header() {
  return "surface,g,b,h,J,Area,W,i,n,i_h,r,bound,margin,pass,tight_bound,"
         "chain,dichotomy,stable,conjecture_gap\n";
}

std::string bounds_csv_row(const BoundReport& r) {
  std::ostringstream out;
  out << csv_field(r.surface) << ',' << r.genus << ',' << r.branch_points << ','
      << format_double(r.h) << ',' << opt_number(r.J) << ','
      << format_double(r.area) << ',' << opt_number(r.willmore) << ','
      << r.index << ',' << r.nullity << ',' << r.weak_index << ',' << r.r
      << ',' << opt_number(r.bound) << ',' << opt_number(r.margin) << ','
      << (r.pass ? "true" : "false") << ',' << opt_number(r.tight_bound)
      << ',' << opt_number(r.chain) << ','
      << (r.dichotomy ? std::string(to_string(*r.dichotomy)) : "n/a") << ','
      << (r.stable ? "true" : "false") << ','
      << format_double(r.conjecture_gap) << '\n';
  return out.str();
}

std::string r_table_csv(int max_genus, int max_branch) {
  std::ostringstream out;
  out << "g,b,r\n";
  for (int g = 0; g <= max_genus; ++g) {
    for (int b = 0; b <= max_branch; ++b) {
      out << g << ',' << b << ',' << topological_r(g, b) << '\n';
    }
  }
  return out.str();
}

}  // namespace cmcindex
