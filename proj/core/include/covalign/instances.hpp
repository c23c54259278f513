// covalign/instances.hpp
//
// Ground-truth covariance generators and full instance assembly.

#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "covalign/linalg.hpp"
#include "covalign/model.hpp"
#include "covalign/rng.hpp"

namespace covalign {

enum class InstanceKind { robinson, wishart, hard, custom_file };
enum class Normalization { none, opnorm, trace };

std::string_view to_string(InstanceKind kind);
std::string_view to_string(Normalization norm);
InstanceKind parse_instance_kind(std::string_view text);
Normalization parse_normalization(std::string_view text);

struct InstanceSpec {
  InstanceKind kind = InstanceKind::wishart;
  std::size_t d = 10;
  double gamma = 0.5;
  SampleSize m = SampleSize::exact();
  SampleSize n = SampleSize::exact();
  Normalization normalize = Normalization::none;
  double c1 = 3.0;
  double c5 = 0.5;
  std::uint64_t seed = 0;
  /// Matrix CSV for custom_file.
  std::string path;

  void validate() const;
};

/// Σ_ij = (1 + |i − j|)^{−γ}.
SymMatrix robinson(std::size_t d, double gamma);

/// Σ = Σ_{k=1}^{d} g_k g_kᵀ with g_k ~ N(0, I_d), optionally rescaled.
SymMatrix wishart(std::size_t d, Rng& rng, Normalization normalize = Normalization::none);

struct HardInstance {
  SymMatrix sigma;  // (I + ηS)/2
  SymMatrix sign_matrix;
  double eta = 0.0;
  int draws = 0;  // rejection draws used
};

/// Symmetric ±1 matrix S (diagonal included) with independent upper-triangle
/// entries, redrawn until ‖S‖_op ≤ c1·√d (at most 1000 draws).
SymMatrix rademacher_symmetric(std::size_t d, Rng& rng);

/// η = c5·max{√(log d/(nd)), (log d/(mnd))^{1/4}} clipped into (0, 1/(2c1√d)).
double hard_eta(std::size_t d, double m, double n, double c1, double c5);

HardInstance hard_instance(std::size_t d, SampleSize m, SampleSize n, double c1, double c5, Rng& rng);

/// Generates Σ, draws π* uniformly, then either samples both datasets or, for
/// EXACT sample sizes, uses the population covariances. Deterministic in spec.
AlignmentInstance make_instance(const InstanceSpec& spec);

}  // namespace covalign
