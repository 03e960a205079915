#pragma once

#include "cmcindex/spectral.hpp"
#include "cmcindex/variations.hpp"

#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace cmcindex {

/// Topological correction r(g, b) of the index transfer:
///   6g - 6 - 2b          if b <= 2g - 3
///   4g - 2 + 2[-b/2]     if 2g - 2 <= b <= 4g - 4   ([x] = floor)
///   0                    if b >= 4g - 3
int topological_r(int genus, int branch_points);

/// (a + 2)^{2 + 4/a} / (delta^2 2^{4/a}) with a = delta (1 + delta).
double delta_expression(double delta);

/// (1 + delta)^2 (e^{(a+2)s} / (e^{as} - 1))^2, whose infimum over s > 0 is
/// delta_expression(delta).
double delta_profile(double delta, double s);

struct DeltaOptimum {
  double delta = 0.0;
  double value = 0.0;
};

/// Golden-section minimization of delta_expression on (0, 100).
DeltaOptimum optimize_delta(double tolerance = 1e-10);

inline constexpr double kHeadlineConstant = 60.0 / std::numbers::pi;

struct MainBound {
  double headline = 0.0;   // (60/pi)(4J^2 + h^2) Area + r
  double optimized = 0.0;  // (3/(2 pi)) f* (4J^2 + h^2) Area + r
  double optimized_constant = 0.0;  // (3/(2 pi)) f*
  int r = 0;
};

MainBound main_bound(double J, double h, double area, int genus,
                     int branch_points);

/// (h^2 + 4J^2) Area; throws UnsupportedError without an embedding bound.
double willmore_energy(std::optional<double> J, double h, double area);

/// RHS - LHS of (int f^2)^{1/2} <= (2 pi)^{-1/2} int |grad f| + sqrt(h^2+4J^2)|f|.
double mss_margin(const SampledSurface& s, const std::vector<ScalarJet>& f);

/// ||f||_4^2 ||f||_1 - ||f||_2^3.
double interpolation_margin(const SampledSurface& s,
                            const std::vector<ScalarJet>& f);

/// The heat-trace bound (1+d)^2/(2 pi) Area (h^2+4J^2) (e^{ks}/(e^{ks}-1))^2
/// with k = d(1+d) and s = alpha t, alpha = (h^2 + 4J^2)/2.
double heat_trace_upper(double delta, double t, double area, double h,
                        double J);

struct HeatTraceCheck {
  std::vector<double> t;
  std::vector<double> trace;
  std::vector<double> bound;
  std::vector<double> margin;
  double min_margin = 0.0;
  bool resolved = true;  // every t passed the truncation test
};

/// 40 log-spaced points in [0.05, 5].
std::vector<double> default_t_grid();

HeatTraceCheck heat_trace_bound_check(const SpectralResult& laplacian,
                                      double area, double h, double J,
                                      double delta,
                                      const std::vector<double>& t_grid);

struct ChainResult {
  double value = 0.0;    // 3 inf_t e^{(4J^2+2h^2)t} h(t)
  double argmin = 0.0;
  bool resolved = true;
};

ChainResult energy_index_chain(const SpectralResult& laplacian, double h,
                               double J, const std::vector<double>& t_grid);

/// Smallest margin e^{ct} h(t) - #{lambda <= c} over the given pairs.
double counting_margin(const SpectralResult& laplacian,
                       const std::vector<double>& thresholds,
                       const std::vector<double>& t_grid);

enum class Dichotomy { NotApplicable, Case1, Case2 };
std::string_view to_string(Dichotomy d);

struct DichotomyResult {
  Dichotomy kind = Dichotomy::NotApplicable;
  /// What is known for the class: Case1 gives i_E + n_E = 0,
  /// Case2 gives (i, n) = (0, 1).
  std::optional<int> index, nullity;
  std::optional<int> energy_index_plus_nullity;
};

/// kappa0 < 0 is a certified upper bound on the sectional curvature.
DichotomyResult negative_curvature_classify(
    double kappa0, double h, const std::vector<double>& norm_a_sq,
    const std::vector<double>& ricci_normal);

struct BoundReport {
  std::string surface;
  std::string ambient;
  int genus = 0, branch_points = 0;
  double h = 0.0;
  std::optional<double> J;
  double area = 0.0;
  std::optional<double> willmore;
  int index = 0, nullity = 0, weak_index = 0;
  bool stable = true;
  int r = 0;
  std::optional<double> bound, tight_bound, margin;
  std::optional<double> chain;  // 3 inf e^{(4J^2+2h^2)t} h(t)
  /// Only classified in negatively curved ambients.
  std::optional<Dichotomy> dichotomy;
  double conjecture_gap = 0.0;  // (i + n) / ((1 + h^2) Area + g)
  std::optional<int> index_lower_bound;
  bool pass = true;

  nlohmann::json to_json() const;
};

std::string bounds_csv_header();
std::string bounds_csv_row(const BoundReport& r);

/// Rows g,b,r for 0 <= g <= max_genus, 0 <= b <= max_branch.
std::string r_table_csv(int max_genus, int max_branch);

}  // namespace cmcindex
