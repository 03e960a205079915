#pragma once

#include "cmcindex/surfaces.hpp"

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace cmcindex {

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class BasisKind {
  /// Nodal values on a doubly periodic grid with Fourier differentiation.
  FourierNodal,
  /// Real spherical harmonics of degree <= L in the Mercator chart.
  SphericalHarmonic,
};

std::string_view to_string(BasisKind kind);

/// Galerkin discretization of f -> int |grad f|^2 - q f^2 dSigma against
/// int f^2 dSigma. Coefficient vectors live in the basis; `nodal` maps them
/// to values at the grid nodes.
struct DiscreteOperator {
  BasisKind basis = BasisKind::FourierNodal;
  std::string surface;
  int resolution = 0;  // n_y of the grid
  int degree = 0;      // spherical harmonic degree L (sphere basis only)
  Eigen::MatrixXd stiffness;  // K
  Eigen::MatrixXd mass;       // M
  Eigen::VectorXd potential;  // q at the nodes
  Eigen::VectorXd constant;   // coefficients of f = 1
  Eigen::MatrixXd nodal;      // nodes x basis; empty means identity

  int dimension() const { return static_cast<int>(mass.rows()); }
  /// Coefficients of the function with the given nodal values (least
  /// squares against the area weights; exact for band-limited data).
  Eigen::VectorXd coefficients(const SampledSurface& s,
                               const Eigen::VectorXd& values) const;
  Eigen::VectorXd values(const Eigen::VectorXd& coefficients) const;
  nlohmann::json describe() const;
};

/// Largest supported number of unknowns for the dense solver.
inline constexpr int kMaxUnknowns = 5000;

/// Jacobi operator L = -Delta - (|A|^2 + Ric(nu,nu)); a potential override
/// (one value per node) replaces |A|^2 + Ric(nu,nu).
DiscreteOperator assemble_jacobi(
    const SampledSurface& s,
    const std::optional<Eigen::VectorXd>& potential_override = std::nullopt);
/// Laplace-Beltrami operator -Delta (zero potential).
DiscreteOperator assemble_laplacian(const SampledSurface& s);

/// Spectral second-derivative matrix on n equispaced points of a period.
Eigen::MatrixXd fourier_second_derivative(int n, double period);

struct SpectralResult {
  std::vector<double> eigenvalues;  // ascending
  Eigen::MatrixXd eigenvectors;     // M-orthonormal columns
  int dimension = 0;
  int resolution = 0;
  int reference_resolution = 0;
  double null_tolerance = 0.0;
  int index = 0;
  int nullity = 0;
  int positive = 0;  // dimension - index - nullity
  double max_residual = 0.0;  // max ||K phi - lambda M phi|| / ||K||
  bool complete = false;      // every non-positive eigenvalue was computed
};

struct EigensolveOptions {
  /// Number of lowest eigenpairs; 0 requests the full spectrum.
  int count = 0;
  bool vectors = true;
  /// Resolution at which the null tolerance takes its nominal value;
  /// 0 means the operator's own resolution.
  int reference_resolution = 0;
  /// Overrides the null tolerance rule when set.
  std::optional<double> null_tolerance;
};

/// Lowest eigenpairs of K phi = lambda M phi. The null tolerance is
/// 1e-3 max(1, |lambda_1|) (reference / resolution)^2.
SpectralResult eigensolve(const DiscreteOperator& op,
                          const EigensolveOptions& options = {});

/// Index and nullity with enough eigenvalues to be certain: the count is
/// grown until an eigenvalue above the null tolerance has been seen.
SpectralResult index_nullity(const DiscreteOperator& op,
                             int reference_resolution = 0);

/// Index of the form restricted to {f : 1^T M f = 0}.
int weak_index(const DiscreteOperator& op, double null_tolerance);

struct IndexReport {
  int index = 0, nullity = 0, weak_index = 0;
  int coarse_index = 0, coarse_nullity = 0;
  int resolution = 0, coarse_resolution = 0;
  bool stable = true;
  double null_tolerance = 0.0;
  SpectralResult spectrum;  // fine-resolution Jacobi spectrum
};

/// Jacobi index, nullity and weak index at `resolution`, with the
/// classification repeated at about 2/3 of it for the stability flag.
IndexReport jacobi_index(const GallerySurface& g, int resolution);

double heat_trace(const SpectralResult& res, double t);
/// True when e^{-lambda_max t} < 1e-12, i.e. the discarded tail is small.
bool heat_trace_resolved(const SpectralResult& res, double t);
int counting(const SpectralResult& res, double c);

/// CSV rows: index,eigenvalue,classification.
std::string spectrum_csv(const SpectralResult& res);

}  // namespace cmcindex
