// covalign/model.hpp
//
// The two-sample Gaussian model: X_k ~ N(0, Σ), Y_k ~ N(0, Σ^{π*}). Sampling,
// sample covariances, the quadratic-assignment objective shared by both
// estimators, and the loss metrics used to score an estimate π̂.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "covalign/linalg.hpp"
#include "covalign/rng.hpp"

namespace covalign {

/// Number of observations, or the infinite-sample sentinel where the sample
/// covariance is replaced by the population covariance.
class SampleSize {
 public:
  static constexpr SampleSize exact() { return SampleSize(0); }
  static SampleSize of(std::int64_t count);
  /// Accepts a positive integer or the literal "exact".
  static SampleSize parse(std::string_view text);

  constexpr bool is_exact() const { return count_ == 0; }
  constexpr std::int64_t count() const { return count_; }
  std::string to_string() const;

  constexpr bool operator==(const SampleSize&) const = default;

 private:
  constexpr explicit SampleSize(std::int64_t count) : count_(count) {}
  std::int64_t count_;
};

/// Features-by-observations layout: column k is one draw.
struct Dataset {
  Matrix observations;

  std::size_t dim() const { return static_cast<std::size_t>(observations.rows()); }
  std::size_t count() const { return static_cast<std::size_t>(observations.cols()); }
};

struct AlignmentInstance {
  SymMatrix sigma;
  Permutation pi_star;
  SampleSize m = SampleSize::exact();
  SampleSize n = SampleSize::exact();
  std::optional<Dataset> x_data;
  std::optional<Dataset> y_data;
  SymMatrix sigma_hat_x;
  SymMatrix sigma_hat_y;
  std::uint64_t seed = 0;

  std::size_t dim() const { return sigma.dim(); }
};

/// Columns L·z with z iid standard normal and LLᵀ = Σ. Semidefinite Σ falls
/// back to an eigenvalue square root; Σ with a negative eigenvalue below
/// −1e−10·(1 + ‖Σ‖) raises NotPositiveDefinite.
Dataset sample_gaussian(const SymMatrix& sigma, std::size_t count, Rng& rng);

/// (1/count)·Σ_k x_k x_kᵀ. No centering unless asked: the model is zero-mean.
SymMatrix sample_covariance(const Dataset& data, bool center = false);

/// Σ_{ij} B_{ij} · M_{π(i), π(j)} = ⟨M^π, B⟩.
double qap_objective(const SymMatrix& m, const SymMatrix& b, const Permutation& pi);

/// Change in qap_objective when positions r and s of π are exchanged
/// (π' = π∘(r s)). O(d): only rows and columns r, s of M^π move.
double qap_swap_delta(const SymMatrix& m, const SymMatrix& b, const Permutation& pi,
                      std::size_t r, std::size_t s);

/// d_Σ(π̂, π*) = ‖Σ^{π̂} − Σ^{π*}‖_F.
double frob_loss(const SymMatrix& sigma, const Permutation& estimate, const Permutation& truth);

/// ‖(Σ^{π*})^{-1/2} (Σ^{π̂} − Σ^{π*}) (Σ^{π*})^{-1/2}‖_F. Requires Σ^{π*} PD.
double nf_loss(const SymMatrix& sigma, const Permutation& estimate, const Permutation& truth);

int hamming_loss(const Permutation& estimate, const Permutation& truth);

/// ⟨Σ^{π̂⁻¹} − Σ, Σ⁻¹⟩ with the truth taken as the identity.
double trace_loss(const SymMatrix& sigma, const Permutation& estimate);

/// trace_loss against an arbitrary truth: re-expresses π̂ relative to π* on
/// the permuted covariance Σ^{π*}.
double trace_loss(const SymMatrix& sigma, const Permutation& estimate, const Permutation& truth);

}  // namespace covalign
