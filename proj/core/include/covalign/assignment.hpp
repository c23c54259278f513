// covalign/assignment.hpp
//
// Exact linear assignment, maximization form.

#pragma once

#include "covalign/linalg.hpp"

namespace covalign {

struct AssignmentResult {
  Permutation permutation;
  double value = 0.0;  // Σ_i M[i][π(i)]
};

/// Maximizes Σ_i M[i][π(i)] over all permutations. O(d³) shortest augmenting
/// path with dual potentials. Among optimal assignments (reduced cost within
/// a relative 1e−11 of zero) the lexicographically smallest π.map is returned.
AssignmentResult lap_max(const Matrix& scores);

}  // namespace covalign
