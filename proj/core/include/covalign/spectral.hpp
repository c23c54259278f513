// covalign/spectral.hpp
//
// Fiedler-vector seriation. For a Robinson covariance the Fiedler vector of
// L = diag(Σ̂1) − Σ̂ is monotone along the true order, so sorting it recovers
// the order up to a global reversal.

#pragma once

#include "covalign/linalg.hpp"

namespace covalign {

struct FiedlerResult {
  /// ordering[k] = feature index at rank k of the sorted Fiedler vector.
  Permutation ordering;
  double fiedler_value = 0.0;
  /// Distance to the next eigenvalue; 0 when the Laplacian is degenerate.
  double gap = 0.0;
  Vector fiedler_vector;
};

enum class SpectralVariant {
  /// Sort both Fiedler vectors and match ranks.
  two_sided,
  /// Sort only Σ̂_Y's vector and assume Σ̂_X is already in seriation order.
  one_sided,
};

FiedlerResult fiedler_order(const SymMatrix& sigma_hat);

/// π̂ aligning rank orders of the two Fiedler vectors; among the reversal
/// combinations the one minimizing ‖Σ̂_X^{π̂} − Σ̂_Y‖_F is kept.
Permutation spectral_estimate(const SymMatrix& sigma_x, const SymMatrix& sigma_y,
                              SpectralVariant variant = SpectralVariant::two_sided);

}  // namespace covalign
