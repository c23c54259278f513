// covalign/lemmas.hpp
//
// Randomized property suites for the inequalities and structural identities
// the estimators rely on. Each suite draws its own stream from
// mix_seed(seed, suite index), so suites can be run or skipped independently.

#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "covalign/linalg.hpp"

namespace covalign {

enum class CheckOutcome { holds, violated, invalid_input };

std::string_view to_string(CheckOutcome outcome);

/// Σ(xᵢ−1)² ≤ 4(S + S²), S = Σ(xᵢ−1). Input must be positive with unit
/// product (checked through Σ log xᵢ).
CheckOutcome check_trace_frobenius(std::span<const double> x);

/// ax² ≤ bx + c with a, b, c > 0 and x ≥ 0 implies x ≤ b/a + √(c/a).
CheckOutcome check_quadratic_bound(double a, double b, double c, double x);

/// 1/2 ≤ min(1, ‖Σ⁻¹ − I‖_F) / min(1, ‖Σ − I‖_F) ≤ 2. Σ = I is invalid input.
CheckOutcome check_frobenius_sandwich(const SymMatrix& sigma);

/// inner(J/d · Σ⁻¹ · J/d, Σ) for the flat coupling J/d.
double flat_coupling_qmle_value(const SymMatrix& sigma);

struct SuiteResult {
  std::string name;
  bool passed = true;
  int trials = 0;
  int failures = 0;
  int invalid = 0;  // draws rejected by the precondition guard
  std::string counterexample;  // first failure, human readable
  double seconds = 0.0;
};

struct VerificationReport {
  std::vector<SuiteResult> suites;
  bool all_passed() const;
};

/// Suite name → number of random trials.
using VerifyCounts = std::map<std::string, int>;

VerifyCounts default_verify_counts();

/// Runs every suite named in counts. Throws InvalidArgument for unknown
/// suite names or counts below 1.
VerificationReport verify_lemmas(std::uint64_t seed, const VerifyCounts& counts = default_verify_counts());

}  // namespace covalign
