#include "covalign/gw_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "covalign/assignment.hpp"
#include "covalign/error.hpp"
#include "covalign/model.hpp"

namespace covalign {

Coupling Coupling::from_matrix(Matrix entries, double tol) {
  if (entries.rows() != entries.cols() || entries.rows() == 0) {
    throw Error(ErrorKind::DimensionMismatch, "coupling must be a non-empty square matrix");
  }
  if (!entries.allFinite() || entries.minCoeff() < 0.0) {
    throw Error(ErrorKind::InvalidArgument, "coupling entries must be finite and nonnegative");
  }
  Coupling c(std::move(entries));
  const double dev = c.marginal_deviation();
  if (dev > tol) {
    throw Error(ErrorKind::InvalidArgument,
                "coupling marginals deviate from 1 by " + std::to_string(dev));
  }
  return c;
}

Coupling Coupling::uniform(std::size_t d) {
  const auto n = static_cast<Eigen::Index>(d);
  return Coupling(Matrix::Constant(n, n, 1.0 / static_cast<double>(d)));
}

Coupling Coupling::from_permutation(const Permutation& pi) { return Coupling(pi.matrix()); }

double Coupling::marginal_deviation() const {
  const double rows = (entries_.rowwise().sum().array() - 1.0).abs().maxCoeff();
  const double cols = (entries_.colwise().sum().array() - 1.0).abs().maxCoeff();
  return std::max(rows, cols);
}

double GwOptions::resolved_epsilon(std::size_t d) const {
  if (epsilon) return *epsilon;
  const double dd = static_cast<double>(d);
  return 1.0 / (dd * dd);
}

namespace {

// out_i = −log Σ_j exp(K_ij + g_j), row-wise.
void row_potential(const Matrix& k, const Vector& g, Vector& out) {
  const Eigen::Index d = k.rows();
  Matrix shifted = k.rowwise() + g.transpose();
  const Vector top = shifted.rowwise().maxCoeff();
  shifted.colwise() -= top;
  const Vector sums = shifted.array().exp().rowwise().sum();
  for (Eigen::Index i = 0; i < d; ++i) out(i) = -(top(i) + std::log(sums(i)));
}

// out_j = −log Σ_i exp(K_ij + f_i), column-wise.
void col_potential(const Matrix& k, const Vector& f, Vector& out) {
  const Eigen::Index d = k.cols();
  Matrix shifted = k.colwise() + f;
  const Eigen::RowVectorXd top = shifted.colwise().maxCoeff();
  shifted.rowwise() -= top;
  const Eigen::RowVectorXd sums = shifted.array().exp().colwise().sum();
  for (Eigen::Index j = 0; j < d; ++j) out(j) = -(top(j) + std::log(sums(j)));
}

// Damped Newton steps on the dual. Plain sweeps contract slowly when the
// kernel is nearly a permutation; Newton converges quadratically there.
// Leaves (f, g) unchanged if no step improves the dual.
void newton_polish(const Matrix& k, Vector& f, Vector& g, double tol, int max_steps) {
  const Eigen::Index d = k.rows();
  for (int step = 0; step < max_steps; ++step) {
    const Matrix p = ((k.colwise() + f).rowwise() + g.transpose()).array().exp().matrix();
    const Vector r = p.rowwise().sum();
    const Vector c = p.colwise().sum().transpose();
    const Vector gf = Vector::Ones(d) - r;
    const Vector gg = Vector::Ones(d) - c;
    if (std::max(gf.cwiseAbs().maxCoeff(), gg.cwiseAbs().maxCoeff()) <= 0.1 * tol) return;
    if ((r.array() <= 0.0).any()) return;

    // The Schur complement on g is the graph Laplacian with weights
    // W_jk = Σ_i P_ij P_ik / r_i; building it from W avoids the cancellation
    // in diag(c) − Pᵀ diag(r)⁻¹ P. Its null space (constants) is pinned by a
    // rank-one term; the right-hand side is orthogonal to it.
    const Vector r_inv = r.cwiseInverse();
    Matrix schur = -(p.transpose() * r_inv.asDiagonal() * p);
    schur.diagonal().setZero();
    schur.diagonal() = -schur.rowwise().sum();
    schur.array() += c.mean() / static_cast<double>(d);
    const Vector rhs = gg - p.transpose() * r_inv.cwiseProduct(gf);
    // When some entries of P underflow the graph is nearly disconnected and
    // LDLT meets rounding-negative pivots; a spectral pseudo-inverse still
    // gives a usable step there.
    Eigen::LDLT<Matrix> ldlt(schur);
    Vector dg;
    if (ldlt.info() == Eigen::Success) {
      dg = ldlt.solve(rhs);
    } else {
      Eigen::SelfAdjointEigenSolver<Matrix> eig(schur);
      if (eig.info() != Eigen::Success) return;
      const Vector& lam = eig.eigenvalues();
      const double floor = lam.cwiseAbs().maxCoeff() * 1e-15 * static_cast<double>(d);
      Vector coef = eig.eigenvectors().transpose() * rhs;
      for (Eigen::Index i = 0; i < d; ++i) coef(i) = lam(i) > floor ? coef(i) / lam(i) : 0.0;
      dg = eig.eigenvectors() * coef;
    }
    if (!dg.allFinite()) return;
    const Vector df = r_inv.cwiseProduct(gf - p * dg);

    // Dual gain of a step t, formed from differences so that it stays
    // accurate when the potentials are large.
    auto gain = [&](double t) {
      const Matrix bump = ((t * df).replicate(1, d).rowwise() + (t * dg).transpose()).array().expm1().matrix();
      return t * (df.sum() + dg.sum()) - p.cwiseProduct(bump).sum();
    };
    const double slope = gf.dot(df) + gg.dot(dg);
    if (!(slope > 0.0)) return;
    double t = 1.0;
    bool moved = false;
    for (int half = 0; half < 30; ++half, t *= 0.5) {
      const double value = gain(t);
      if (std::isfinite(value) && value >= 1e-4 * t * slope) {
        f += t * df;
        g += t * dg;
        moved = true;
        break;
      }
    }
    if (!moved) return;
  }
}

// Sweeps between Newton polishes and between stall checks.
constexpr int kCheckInterval = 50;
// Newton costs O(d³) per step; beyond this size only sweeps are used.
constexpr Eigen::Index kNewtonMaxDim = 256;
// A check interval that shrinks the error by less than this factor counts
// as stalled.
constexpr double kStallRatio = 0.5;
// Largest marginal error the final rounding step is allowed to absorb.
constexpr double kRoundingThreshold = 1e-3;

// Moves a nonnegative matrix with near-unit marginals onto the Birkhoff
// polytope: shrink rows and columns whose sums exceed one, then spread the
// remaining row and column deficits as a rank-one correction. The result
// is within 2·‖marginal error‖₁ of the input in ℓ1.
Matrix round_to_polytope(Matrix p) {
  const Vector row_scale = p.rowwise().sum().cwiseInverse().cwiseMin(1.0);
  p = row_scale.asDiagonal() * p;
  const Vector col_scale = p.colwise().sum().transpose().cwiseInverse().cwiseMin(1.0);
  p = p * col_scale.asDiagonal();
  const Vector row_deficit = (1.0 - p.rowwise().sum().array()).cwiseMax(0.0).matrix();
  const Vector col_deficit = (1.0 - p.colwise().sum().transpose().array()).cwiseMax(0.0).matrix();
  const double total = row_deficit.sum();
  if (total > 0.0) p += row_deficit * col_deficit.transpose() / total;
  return p;
}

struct SweepOutcome {
  double err = std::numeric_limits<double>::infinity();
  int sweeps = 0;
  bool converged = false;
  bool stalled = false;  // sublinear progress with err ≤ kRoundingThreshold
};

// Alternating sweeps from the column potential g. On return the row
// potential f is exact; on convergence the columns are exact as well.
SweepOutcome run_sweeps(const Matrix& k, Vector& f, Vector& g, double tol, int budget) {
  const Eigen::Index d = k.rows();
  Vector f_next(d);
  SweepOutcome out;
  row_potential(k, g, f);
  col_potential(k, f, g);
  double err_mark = out.err;
  for (; out.sweeps < budget; ++out.sweeps) {
    row_potential(k, g, f_next);
    // Columns are exact here, so the row marginal is exp(f − f_next).
    out.err = ((f - f_next).array().exp() - 1.0).abs().maxCoeff();
    f = f_next;
    if (out.err <= tol) {
      out.converged = true;
      break;
    }
    if (out.sweeps > 0 && out.sweeps % kCheckInterval == 0) {
      // Sublinear convergence means the kernel has effectively lost total
      // support in double precision; more sweeps will not fix it.
      if (out.err <= kRoundingThreshold && out.err > kStallRatio * err_mark) {
        out.stalled = true;
        break;
      }
      err_mark = out.err;
      if (d <= kNewtonMaxDim) newton_polish(k, f, g, tol, 30);
    }
    col_potential(k, f, g);
  }
  return out;
}

// Budget for a warm-started attempt before falling back to ε-scaling.
constexpr int kWarmBudget = 500;
// ε-scaling starts at the temperature where the kernel spans this range and
// divides the temperature by kScalingStep per stage.
constexpr double kScalingStartRange = 16.0;
constexpr double kScalingStep = 4.0;
constexpr double kStageTolerance = 1e-3;
constexpr int kStageBudget = 500;

}  // namespace

Coupling sinkhorn_project(const Matrix& log_kernel, double tol_marginal, int max_sinkhorn, Vector* warm_g,
                          int* sweeps) {
  if (log_kernel.rows() != log_kernel.cols() || log_kernel.rows() == 0) {
    throw Error(ErrorKind::DimensionMismatch, "log kernel must be a non-empty square matrix");
  }
  if (!log_kernel.allFinite()) {
    throw Error(ErrorKind::NonFinite, "log kernel has non-finite entries");
  }
  if (max_sinkhorn < 1) throw Error(ErrorKind::InvalidArgument, "max_sinkhorn must be positive");
  const Eigen::Index d = log_kernel.rows();
  Vector f = Vector::Zero(d);
  Vector g = Vector::Zero(d);
  SweepOutcome out;
  int used = 0;

  const bool warm = warm_g && warm_g->size() == d;
  if (warm) {
    g = *warm_g;
    out = run_sweeps(log_kernel, f, g, tol_marginal, std::min(max_sinkhorn, kWarmBudget));
    used = out.sweeps;
  }
  if (!out.converged && !out.stalled && used < max_sinkhorn) {
    // Cold path with ε-scaling: solve K/λ for decreasing λ, carrying the
    // potentials (which scale like 1/λ) from stage to stage.
    g.setZero();
    double lambda = (log_kernel.maxCoeff() - log_kernel.minCoeff()) / kScalingStartRange;
    while (lambda > 1.0 && used < max_sinkhorn) {
      const Matrix tempered = log_kernel / lambda;
      used += run_sweeps(tempered, f, g, kStageTolerance, std::min(kStageBudget, max_sinkhorn - used)).sweeps;
      const double next = std::max(1.0, lambda / kScalingStep);
      g *= lambda / next;
      lambda = next;
    }
    if (used < max_sinkhorn) {
      out = run_sweeps(log_kernel, f, g, tol_marginal, max_sinkhorn - used);
      used += out.sweeps;
    }
  }
  if (!out.converged && !(out.err <= kRoundingThreshold)) {
    throw Error(ErrorKind::SinkhornStall, "marginal error " + std::to_string(out.err) + " after " +
                                              std::to_string(used) + " sweeps");
  }
  if (warm_g) *warm_g = g;
  if (sweeps) *sweeps = used;

  Matrix p = ((log_kernel.colwise() + f).rowwise() + g.transpose()).array().exp().matrix();
  if (!out.converged) p = round_to_polytope(std::move(p));
  return Coupling(std::move(p));
}

double relaxed_objective(const Matrix& coupling, const SymMatrix& a, const SymMatrix& b) {
  return (coupling * a.matrix() * coupling.transpose()).cwiseProduct(b.matrix()).sum();
}

GwReport entropic_gw(const SymMatrix& sigma_x, const SymMatrix& sigma_y, const GwOptions& opts) {
  if (sigma_x.dim() != sigma_y.dim()) {
    throw Error(ErrorKind::DimensionMismatch, "entropic_gw covariances differ in dimension");
  }
  const std::size_t d = sigma_x.dim();
  const double epsilon = opts.resolved_epsilon(d);
  if (!(epsilon > 0.0) || !(opts.tol_outer > 0.0) || !(opts.tol_marginal > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "epsilon and tolerances must be positive");
  }

  Matrix p;
  switch (opts.init) {
    case GwInit::uniform: p = Coupling::uniform(d).entries(); break;
    case GwInit::identity: p = Matrix::Identity(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d)); break;
    case GwInit::given:
      if (!opts.initial || opts.initial->dim() != d) {
        throw Error(ErrorKind::InvalidArgument, "init=given requires an initial coupling of matching size");
      }
      p = opts.initial->entries();
      break;
  }

  const Matrix& ax = sigma_x.matrix();
  const Matrix& by = sigma_y.matrix();
  Vector g = Vector::Zero(static_cast<Eigen::Index>(d));

  GwReport report;
  report.epsilon = epsilon;
  double eps_now = epsilon;
  if (opts.anneal) {
    const Matrix grad = 2.0 * by * p * ax;
    eps_now = std::max(epsilon, grad.maxCoeff() - grad.minCoeff());
  }

  Coupling current;
  for (int t = 0; t < opts.max_outer; ++t) {
    Matrix kernel = (2.0 / eps_now) * (by * p * ax);
    kernel.array() -= kernel.maxCoeff();
    int sweeps = 0;
    current = sinkhorn_project(kernel, opts.tol_marginal, opts.max_sinkhorn, &g, &sweeps);
    report.sinkhorn_sweeps += sweeps;
    const double change = (current.entries() - p).norm();
    p = current.entries();

    const double objective = relaxed_objective(p, sigma_x, sigma_y);
    if (!std::isfinite(objective)) {
      throw Error(ErrorKind::NonFinite, "relaxed objective diverged at outer step " + std::to_string(t));
    }
    report.objective_trace.push_back(objective);
    report.max_marginal_deviation = std::max(report.max_marginal_deviation, current.marginal_deviation());
    report.outer_iterations = t + 1;

    if (eps_now > epsilon) {
      eps_now = std::max(epsilon, eps_now * opts.anneal_factor);
      continue;
    }
    if (change < opts.tol_outer) {
      report.converged = true;
      break;
    }
  }

  report.coupling = current;
  report.objective_relaxed = report.objective_trace.empty()
                                 ? relaxed_objective(p, sigma_x, sigma_y)
                                 : report.objective_trace.back();
  report.permutation = round_coupling(report.coupling);
  report.objective_rounded = qap_objective(sigma_x, sigma_y, report.permutation);
  report.objective_unrefined = report.objective_rounded;
  return report;
}

Permutation round_coupling(const Coupling& coupling) { return lap_max(coupling.entries()).permutation; }

GwReport gw_estimate(const SymMatrix& sigma_x, const SymMatrix& sigma_y, const GwOptions& opts) {
  GwReport report = entropic_gw(sigma_x, sigma_y, opts);
  if (!opts.refine) return report;

  std::vector<int> map = report.permutation.map();
  Permutation refined = report.permutation;
  const double slack = 1e-12 * (1.0 + std::abs(report.objective_rounded));
  const std::size_t d = map.size();
  for (std::size_t r = 0; r + 1 < d; ++r) {
    for (std::size_t s = r + 1; s < d; ++s) {
      if (qap_swap_delta(sigma_x, sigma_y, refined, r, s) > slack) {
        std::swap(map[r], map[s]);
        refined = Permutation(map);
      }
    }
  }
  const double refined_objective = qap_objective(sigma_x, sigma_y, refined);
  if (refined_objective > report.objective_rounded) {
    report.permutation = refined;
    report.objective_rounded = refined_objective;
  }
  return report;
}

}  // namespace covalign
