#include "cmcindex/spectral.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace cmcindex {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double kPi = std::numbers::pi;

// Real spherical harmonics Y_lm(x, z) for l <= L, with their x-derivative
// and (1 - z^2) d/dz (the Mercator y-derivative), orthonormal on the unit
// sphere. Basis order: l major, m = -l..l.
struct HarmonicTable {
  MatrixXd value, dx, dy;
};

HarmonicTable harmonics(const ParamGrid& grid, int L) {
  const int nb = (L + 1) * (L + 1);
  HarmonicTable t{MatrixXd::Zero(grid.size(), nb),
                  MatrixXd::Zero(grid.size(), nb),
                  MatrixXd::Zero(grid.size(), nb)};
  // Normalized associated Legendre functions pbar[l][m] with
  // 2 pi int pbar^2 dz = 1.
  std::vector<std::vector<double>> p(L + 1, std::vector<double>(L + 1, 0.0));
  for (int j = 0; j < grid.n_y(); ++j) {
    const double z = grid.z_nodes()[j];
    const double sq = std::sqrt(1.0 - z * z);
    p[0][0] = std::sqrt(1.0 / (4.0 * kPi));
    for (int m = 1; m <= L; ++m) {
      p[m][m] = -std::sqrt((2.0 * m + 1.0) / (2.0 * m)) * sq * p[m - 1][m - 1];
    }
    for (int m = 0; m < L; ++m) {
      p[m + 1][m] = std::sqrt(2.0 * m + 3.0) * z * p[m][m];
    }
    for (int m = 0; m <= L; ++m) {
      for (int l = m + 2; l <= L; ++l) {
        const double a = std::sqrt((4.0 * l * l - 1.0) / (l * l - m * m));
        const double b = std::sqrt(((l - 1.0) * (l - 1.0) - m * m) /
                                   (4.0 * (l - 1.0) * (l - 1.0) - 1.0));
        p[l][m] = a * (z * p[l - 1][m] - b * p[l - 2][m]);
      }
    }
    for (int i = 0; i < grid.n_x(); ++i) {
      const double x = grid.x(i);
      const int node = i + grid.n_x() * j;
      for (int l = 0; l <= L; ++l) {
        for (int m = 0; m <= l; ++m) {
          // (1 - z^2) P' = l z P_l - sqrt((2l+1)(l^2-m^2)/(2l-1)) P_{l-1}
          double dp = l * z * p[l][m];
          if (l > m) {
            dp -= std::sqrt((2.0 * l + 1.0) * (l * l - m * m) / (2.0 * l - 1.0)) *
                  p[l - 1][m];
          }
          const int base = l * l + l;
          if (m == 0) {
            t.value(node, base) = p[l][0];
            t.dy(node, base) = dp;
            continue;
          }
          const double s2 = std::sqrt(2.0);
          const double c = std::cos(m * x), s = std::sin(m * x);
          t.value(node, base + m) = s2 * p[l][m] * c;
          t.dx(node, base + m) = -s2 * m * p[l][m] * s;
          t.dy(node, base + m) = s2 * dp * c;
          t.value(node, base - m) = s2 * p[l][m] * s;
          t.dx(node, base - m) = s2 * m * p[l][m] * c;
          t.dy(node, base - m) = s2 * dp * s;
        }
      }
    }
  }
  return t;
}

void check_finite_geometry(const SampledSurface& s) {
  for (const auto& g : s.points()) {
    if (!(g.e2l > 0.0) || !std::isfinite(g.e2l) ||
        !std::isfinite(g.jacobi_potential())) {
      throw DomainError("degenerate metric on " + s.immersion().name());
    }
  }
}

// Symmetric standard-form matrix L^{-1} K L^{-T} with M = L L^T.
MatrixXd reduce(const DiscreteOperator& op, Eigen::LLT<MatrixXd>& llt) {
  llt.compute(op.mass);
  if (llt.info() != Eigen::Success) {
    throw SolverError("mass matrix is not positive definite");
  }
  MatrixXd c = llt.matrixL().solve(op.stiffness);
  c = llt.matrixL().solve(c.transpose().eval());
  return 0.5 * (c + c.transpose());
}

// Eigenvalues (and optionally vectors) of a symmetric matrix. range 'A',
// 'I' (il..iu, 1-based) or 'V' ((vl, vu]).
int syevr(MatrixXd a, char jobz, char range, double vl, double vu, int il,
          int iu, std::vector<double>& w, MatrixXd* z) {
  const lapack_int n = static_cast<lapack_int>(a.rows());
  w.assign(std::max<lapack_int>(n, 1), 0.0);
  const lapack_int cols = range == 'I' ? iu - il + 1 : n;
  MatrixXd zz(jobz == 'V' ? n : 1, jobz == 'V' ? std::max<lapack_int>(cols, 1) : 1);
  std::vector<lapack_int> support(2 * std::max<lapack_int>(n, 1));
  lapack_int found = 0;
  const lapack_int info = LAPACKE_dsyevr(
      LAPACK_COL_MAJOR, jobz, range, 'L', n, a.data(), n, vl, vu, il, iu, 0.0,
      &found, w.data(), zz.data(), std::max<lapack_int>(zz.rows(), 1),
      support.data());
  if (info != 0) {
    std::ostringstream msg;
    msg << "symmetric eigensolver failed (info " << info << ")";
    throw SolverError(msg.str());
  }
  w.resize(found);
  if (z && jobz == 'V') *z = zz.leftCols(found);
  return static_cast<int>(found);
}

}  // namespace

std::string_view to_string(BasisKind kind) {
  return kind == BasisKind::FourierNodal ? "fourier_nodal"
                                         : "spherical_harmonic";
}

MatrixXd fourier_second_derivative(int n, double period) {
  // D2 = F^{-1} diag(-(2 pi m / P)^2) F over the modes |m| <= n/2, the
  // Nyquist mode (even n) kept as a cosine.
  MatrixXd d = MatrixXd::Zero(n, n);
  const double w = 2.0 * kPi / period;
  for (int k = 0; k < n; ++k) {
    double entry = 0.0;
    const double arg = 2.0 * kPi * k / n;
    for (int m = 1; m <= n / 2; ++m) {
      const double weight = (n % 2 == 0 && m == n / 2) ? 1.0 : 2.0;
      entry -= weight * (w * m) * (w * m) * std::cos(m * arg);
    }
    entry /= n;
    for (int i = 0; i < n; ++i) d(i, (i + k) % n) = entry;
  }
  return 0.5 * (d + d.transpose());
}

DiscreteOperator assemble_jacobi(const SampledSurface& s,
                                 const std::optional<VectorXd>& override_q) {
  check_finite_geometry(s);
  const ParamGrid& grid = s.grid();
  const int nodes = grid.size();
  if (override_q && override_q->size() != nodes) {
    throw PreconditionError("potential override has the wrong length");
  }
  DiscreteOperator op;
  op.surface = s.immersion().name();
  op.resolution = grid.n_y();
  op.potential.resize(nodes);
  VectorXd area_w(nodes), plain_w(nodes);
  for (int n = 0; n < nodes; ++n) {
    op.potential[n] = override_q ? (*override_q)[n] : s[n].jacobi_potential();
    area_w[n] = s[n].area_weight();
    plain_w[n] = s[n].weight;
  }

  if (grid.topology() == Topology::Torus) {
    if (nodes > kMaxUnknowns) {
      throw PreconditionError("grid exceeds the dense solver limit");
    }
    op.basis = BasisKind::FourierNodal;
    const int nx = grid.n_x(), ny = grid.n_y();
    const MatrixXd d2x = fourier_second_derivative(nx, grid.period_x());
    const MatrixXd d2y = fourier_second_derivative(ny, grid.period_y());
    // Flat weight is uniform on torus grids.
    const double w = plain_w[0];
    op.stiffness = MatrixXd::Zero(nodes, nodes);
    for (int j = 0; j < ny; ++j) {
      for (int i = 0; i < nx; ++i) {
        const int row = i + nx * j;
        for (int i2 = 0; i2 < nx; ++i2) op.stiffness(row, i2 + nx * j) -= w * d2x(i, i2);
        for (int j2 = 0; j2 < ny; ++j2) op.stiffness(row, i + nx * j2) -= w * d2y(j, j2);
      }
    }
    for (int n = 0; n < nodes; ++n) op.stiffness(n, n) -= op.potential[n] * area_w[n];
    op.mass = area_w.asDiagonal();
    op.constant = VectorXd::Ones(nodes);
    return op;
  }

  op.basis = BasisKind::SphericalHarmonic;
  const int L = std::min(grid.n_y() - 1, grid.n_x() / 2 - 1);
  if ((L + 1) * (L + 1) > kMaxUnknowns) {
    throw PreconditionError("harmonic degree exceeds the dense solver limit");
  }
  op.degree = L;
  const HarmonicTable t = harmonics(grid, L);
  op.stiffness = t.dx.transpose() * plain_w.asDiagonal() * t.dx +
                 t.dy.transpose() * plain_w.asDiagonal() * t.dy -
                 t.value.transpose() *
                     (op.potential.array() * area_w.array()).matrix().asDiagonal() *
                     t.value;
  op.mass = t.value.transpose() * area_w.asDiagonal() * t.value;
  op.stiffness = 0.5 * (op.stiffness + op.stiffness.transpose()).eval();
  op.mass = 0.5 * (op.mass + op.mass.transpose()).eval();
  op.constant = VectorXd::Zero(t.value.cols());
  op.constant[0] = std::sqrt(4.0 * kPi);
  op.nodal = t.value;
  return op;
}

DiscreteOperator assemble_laplacian(const SampledSurface& s) {
  return assemble_jacobi(s, VectorXd::Zero(s.size()));
}

VectorXd DiscreteOperator::coefficients(const SampledSurface& s,
                                        const VectorXd& values) const {
  if (nodal.size() == 0) return values;
  VectorXd w(s.size());
  for (int n = 0; n < s.size(); ++n) w[n] = s[n].area_weight();
  const MatrixXd normal = nodal.transpose() * w.asDiagonal() * nodal;
  return normal.llt().solve(nodal.transpose() * w.asDiagonal() * values);
}

VectorXd DiscreteOperator::values(const VectorXd& coefficients) const {
  if (nodal.size() == 0) return coefficients;
  return nodal * coefficients;
}

nlohmann::json DiscreteOperator::describe() const {
  nlohmann::json j;
  j["surface"] = surface;
  j["basis"] = std::string(to_string(basis));
  j["dimension"] = dimension();
  j["resolution"] = resolution;
  if (basis == BasisKind::SphericalHarmonic) j["degree"] = degree;
  j["potential_min"] = potential.size() ? potential.minCoeff() : 0.0;
  j["potential_max"] = potential.size() ? potential.maxCoeff() : 0.0;
  return j;
}

SpectralResult eigensolve(const DiscreteOperator& op,
                          const EigensolveOptions& options) {
  const int n = op.dimension();
  if (n < 1) throw PreconditionError("empty operator");
  if (n > kMaxUnknowns) {
    throw PreconditionError("operator exceeds the dense solver limit");
  }
  if (options.count < 0 || options.count > n) {
    throw PreconditionError("eigenpair count out of range");
  }
  const int count = options.count == 0 ? n : options.count;

  Eigen::LLT<MatrixXd> llt;
  const MatrixXd c = reduce(op, llt);
  std::vector<double> w;
  MatrixXd z;
  syevr(c, options.vectors ? 'V' : 'N', count == n ? 'A' : 'I', 0.0, 0.0, 1,
        count, w, options.vectors ? &z : nullptr);

  SpectralResult res;
  res.eigenvalues = w;
  res.dimension = n;
  res.resolution = op.resolution;
  res.reference_resolution =
      options.reference_resolution > 0 ? options.reference_resolution
                                       : op.resolution;
  if (options.vectors) {
    res.eigenvectors = llt.matrixU().solve(z);
    const double knorm = std::max(op.stiffness.norm(), 1e-300);
    for (int k = 0; k < res.eigenvectors.cols(); ++k) {
      auto col = res.eigenvectors.col(k);
      const double big = col.cwiseAbs().maxCoeff();
      for (int i = 0; i < col.size(); ++i) {
        if (std::abs(col[i]) > 1e-8 * big) {
          if (col[i] < 0.0) col *= -1.0;
          break;
        }
      }
      const double r =
          (op.stiffness * col - w[k] * (op.mass * col)).norm() / knorm;
      res.max_residual = std::max(res.max_residual, r);
    }
  }
  const double ratio =
      static_cast<double>(res.reference_resolution) / op.resolution;
  const double lowest = w.empty() ? 0.0 : w.front();
  res.null_tolerance = options.null_tolerance.value_or(
      1e-3 * std::max(1.0, std::abs(lowest)) * ratio * ratio);
  for (double lam : w) {
    if (lam < -res.null_tolerance) {
      ++res.index;
    } else if (lam <= res.null_tolerance) {
      ++res.nullity;
    }
  }
  res.complete = count == n || (!w.empty() && w.back() > res.null_tolerance);
  res.positive = n - res.index - res.nullity;
  return res;
}

SpectralResult index_nullity(const DiscreteOperator& op,
                             int reference_resolution) {
  int count = std::min(op.dimension(), 64);
  for (;;) {
    EigensolveOptions opt;
    opt.count = count;
    opt.reference_resolution = reference_resolution;
    SpectralResult res = eigensolve(op, opt);
    if (res.complete) return res;
    count = std::min(op.dimension(), 2 * count);
  }
}

int weak_index(const DiscreteOperator& op, double null_tolerance) {
  const int n = op.dimension();
  if (n < 2) return 0;
  Eigen::LLT<MatrixXd> llt;
  const MatrixXd c = reduce(op, llt);
  // Constants in the reduced coordinates: y = L^T 1.
  VectorXd y = llt.matrixU() * op.constant;
  y.normalize();
  // Householder reflector sending y to a multiple of e_1.
  VectorXd v = y;
  v[0] += (y[0] >= 0.0 ? 1.0 : -1.0);
  v.normalize();
  MatrixXd b = c - 2.0 * v * (v.transpose() * c);
  b = b - 2.0 * (b * v) * v.transpose();
  const MatrixXd reduced = 0.5 * (b.bottomRightCorner(n - 1, n - 1) +
                                  b.bottomRightCorner(n - 1, n - 1).transpose());
  std::vector<double> w;
  const double floor = -(reduced.norm() + 1.0);
  return syevr(reduced, 'N', 'V', floor, -null_tolerance, 0, 0, w, nullptr);
}

IndexReport jacobi_index(const GallerySurface& g, int resolution) {
  IndexReport rep;
  rep.resolution = resolution;
  int coarse = static_cast<int>(std::lround(2.0 * resolution / 3.0));
  coarse += coarse % 2;
  rep.coarse_resolution = std::max(coarse, 8);

  const SampledSurface fine = g.sample(resolution);
  const DiscreteOperator op = assemble_jacobi(fine);
  rep.spectrum = index_nullity(op, g.default_resolution);
  rep.index = rep.spectrum.index;
  rep.nullity = rep.spectrum.nullity;
  rep.null_tolerance = rep.spectrum.null_tolerance;
  rep.weak_index = weak_index(op, rep.null_tolerance);

  const SampledSurface rough = g.sample(rep.coarse_resolution);
  const SpectralResult cr =
      index_nullity(assemble_jacobi(rough), g.default_resolution);
  rep.coarse_index = cr.index;
  rep.coarse_nullity = cr.nullity;
  rep.stable = cr.index == rep.index && cr.nullity == rep.nullity;
  return rep;
}

double heat_trace(const SpectralResult& res, double t) {
  if (!(t > 0.0)) throw PreconditionError("heat trace needs t > 0");
  double total = 0.0;
  // Sum from the top so the small terms are accumulated first.
  for (auto it = res.eigenvalues.rbegin(); it != res.eigenvalues.rend(); ++it) {
    total += std::exp(-*it * t);
  }
  return total;
}

bool heat_trace_resolved(const SpectralResult& res, double t) {
  if (res.eigenvalues.empty()) return false;
  return std::exp(-res.eigenvalues.back() * t) < 1e-12;
}

int counting(const SpectralResult& res, double c) {
  return static_cast<int>(std::upper_bound(res.eigenvalues.begin(),
                                           res.eigenvalues.end(), c) -
                          res.eigenvalues.begin());
}

std::string spectrum_csv(const SpectralResult& res) {
  std::ostringstream out;
  out.precision(12);
  out << "index,eigenvalue,classification\n";
  for (std::size_t k = 0; k < res.eigenvalues.size(); ++k) {
    const double lam = res.eigenvalues[k];
    const char* cls = lam < -res.null_tolerance  ? "negative"
                      : lam <= res.null_tolerance ? "null"
                                                  : "positive";
    out << k << ',' << lam << ',' << cls << '\n';
  }
  return out.str();
}

}  // namespace cmcindex
