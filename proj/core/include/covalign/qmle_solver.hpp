// covalign/qmle_solver.hpp
//
// Quasi-MLE over permutations,
//
//   π̂ = argmin_π ⟨Σ̂_Y, (Σ̂_X^π)^{-1}⟩ = argmin_π qap_objective(Σ̂_X⁻¹, Σ̂_Y, π),
//
// plus the two discrete searches it dispatches to. Both searches are generic
// over (M, B, sense) so the GW objective (M = Σ̂_X, sense = max) can reuse
// them.

#pragma once

#include <cstdint>

#include "covalign/linalg.hpp"

namespace covalign {

enum class Sense { minimize, maximize };

enum class SearchMode { exhaustive, local };

/// Largest dimension exhaustive_search accepts (9! ≈ 3.6e5 permutations).
inline constexpr std::size_t kMaxExhaustiveDim = 9;

struct SearchOptions {
  SearchMode mode = SearchMode::local;
  int restarts = 16;
  int max_sweeps = 200;
  double ridge = 0.0;
  std::uint64_t seed = 0;
};

struct SearchReport {
  Permutation permutation;
  double objective = 0.0;
  std::uint64_t evaluations = 0;
  int restarts_used = 0;
  int sweeps = 0;  // sweeps taken by the winning restart
  /// Condition number of Σ̂_X + ridge·I (qmle_estimate only, else 0).
  double condition_number = 0.0;
};

/// Global optimum over all d! permutations; the lexicographically smallest π
/// wins ties. Throws DimensionTooLarge above kMaxExhaustiveDim.
SearchReport exhaustive_search(const SymMatrix& m, const SymMatrix& b, Sense sense);

/// Best-of-restarts 2-swap hill climbing with best-improvement acceptance.
/// Restart 0 starts at the identity, restart k ≥ 1 at a shuffle drawn from
/// mix_seed(opts.seed, k).
SearchReport local_search(const SymMatrix& m, const SymMatrix& b, Sense sense, const SearchOptions& opts = {});

/// Single hill climb from a given start. Exposed for tests and refinement.
SearchReport climb_from(const SymMatrix& m, const SymMatrix& b, Sense sense, Permutation start,
                        int max_sweeps);

SearchReport qmle_estimate(const SymMatrix& sigma_x, const SymMatrix& sigma_y, const SearchOptions& opts = {});

}  // namespace covalign
