// covalign/gw_solver.hpp
//
// Entropic Gromov–Wasserstein over the Birkhoff polytope
//
//   max_{P ∈ BP(d)} ⟨P Σ̂_X Pᵀ, Σ̂_Y⟩,   BP(d) = {P ≥ 0 : P1 = Pᵀ1 = 1}
//
// solved by the entropic fixed point P ← Proj_KL(exp(∇f(P)/ε)) with
// ∇f(P) = 2 Σ̂_Y P Σ̂_X. Each KL projection is a log-domain Sinkhorn run.
// The final coupling is rounded to the permutation carrying the most mass
// and then polished by one pass of 2-swaps on the discrete objective.

#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "covalign/linalg.hpp"

namespace covalign {

/// Nonnegative d×d matrix with unit row and column sums.
class Coupling {
 public:
  Coupling() = default;
  /// Throws InvalidArgument if an entry is negative or a marginal is off by
  /// more than tol.
  static Coupling from_matrix(Matrix entries, double tol = 1e-8);
  static Coupling uniform(std::size_t d);
  static Coupling from_permutation(const Permutation& pi);

  std::size_t dim() const { return static_cast<std::size_t>(entries_.rows()); }
  const Matrix& entries() const { return entries_; }
  /// max_i |row_i − 1| ∨ max_j |col_j − 1|.
  double marginal_deviation() const;

 private:
  explicit Coupling(Matrix entries) : entries_(std::move(entries)) {}
  friend Coupling sinkhorn_project(const Matrix&, double, int, Vector*, int*);
  Matrix entries_;
};

enum class GwInit { uniform, identity, given };

struct GwOptions {
  /// Entropic penalty. Unset means 1/d².
  std::optional<double> epsilon;
  int max_outer = 1000;
  double tol_outer = 1e-7;
  int max_sinkhorn = 10000;
  double tol_marginal = 1e-9;
  GwInit init = GwInit::uniform;
  std::optional<Coupling> initial;  // used with GwInit::given
  /// Geometric ε-annealing (×anneal_factor per outer step) from the gradient
  /// scale down to epsilon.
  bool anneal = false;
  double anneal_factor = 0.9;
  /// One pass of improving 2-swaps after rounding (gw_estimate only).
  bool refine = true;

  double resolved_epsilon(std::size_t d) const;
};

struct GwReport {
  Coupling coupling;
  Permutation permutation;
  double objective_relaxed = 0.0;
  double objective_rounded = 0.0;  // qap_objective(Σ̂_X, Σ̂_Y, permutation)
  double objective_unrefined = 0.0;
  int outer_iterations = 0;
  bool converged = false;
  double epsilon = 0.0;
  long long sinkhorn_sweeps = 0;
  /// Worst marginal deviation over every coupling the run produced.
  double max_marginal_deviation = 0.0;
  /// objective_relaxed after each outer iteration.
  std::vector<double> objective_trace;
};

/// KL projection of exp(log_kernel) onto BP(d): diag(e^f)·exp(K)·diag(e^g)
/// with both marginals within tol_marginal of 1.
///
/// Very peaked kernels can lose total support in double precision, and the
/// sweeps then converge sublinearly. Once the marginal error is below 1e-3
/// and stops halving, the scaled plan is moved onto BP(d) by a rank-one
/// rounding step (ℓ1 change at most twice the marginal error). Throws
/// SinkhornStall when max_sinkhorn sweeps end above that error.
///
/// warm_g, when given, seeds the column potential and receives the final
/// one; sweeps, when given, receives the number of sweeps performed.
Coupling sinkhorn_project(const Matrix& log_kernel, double tol_marginal = 1e-9,
                          int max_sinkhorn = 10000, Vector* warm_g = nullptr, int* sweeps = nullptr);

GwReport entropic_gw(const SymMatrix& sigma_x, const SymMatrix& sigma_y, const GwOptions& opts = {});

/// Permutation maximizing Σ_i P[i][π(i)].
Permutation round_coupling(const Coupling& coupling);

GwReport gw_estimate(const SymMatrix& sigma_x, const SymMatrix& sigma_y, const GwOptions& opts = {});

/// ⟨P A Pᵀ, B⟩.
double relaxed_objective(const Matrix& coupling, const SymMatrix& a, const SymMatrix& b);

}  // namespace covalign
