// covalign/linalg.hpp
//
// Dense symmetric matrices and permutations. Everything downstream (the
// estimators, the losses, the instance generators) is phrased in terms of
// these two types.

#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "covalign/rng.hpp"

namespace covalign {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Relative asymmetry ‖A − Aᵀ‖_F / ‖A‖_F above which construction is refused.
inline constexpr double kSymmetryTolerance = 1e-9;

/// Dense symmetric real matrix. Construction symmetrizes (A + Aᵀ)/2 after
/// checking that the input is symmetric up to roundoff.
class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(Matrix a);
  SymMatrix(std::initializer_list<std::initializer_list<double>> rows);

  static SymMatrix identity(std::size_t d);
  static SymMatrix zeros(std::size_t d);
  static SymMatrix diagonal(std::span<const double> diag);
  static SymMatrix diagonal(std::initializer_list<double> diag);

  std::size_t dim() const { return static_cast<std::size_t>(m_.rows()); }
  double operator()(std::size_t i, std::size_t j) const {
    return m_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }
  const Matrix& matrix() const { return m_; }
  double trace() const { return m_.trace(); }

  SymMatrix operator+(const SymMatrix& other) const;
  SymMatrix operator-(const SymMatrix& other) const;
  SymMatrix operator*(double scale) const;
  SymMatrix with_ridge(double ridge) const;

  bool operator==(const SymMatrix& other) const { return m_ == other.m_; }

 private:
  struct Trusted {};
  SymMatrix(Matrix a, Trusted);
  friend SymMatrix symmetrize(Matrix a);

  Matrix m_;
};

/// Symmetrizes without the asymmetry check. For results that are symmetric in
/// exact arithmetic (XXᵀ, PAPᵀ) and only carry roundoff.
SymMatrix symmetrize(Matrix a);

/// Bijection on {0, …, d−1}.
class Permutation {
 public:
  Permutation() = default;
  explicit Permutation(std::vector<int> map);
  Permutation(std::initializer_list<int> map);

  static Permutation identity(std::size_t d);
  static bool is_valid(std::span<const int> map);

  std::size_t size() const { return map_.size(); }
  int operator[](std::size_t i) const { return map_[i]; }
  const std::vector<int>& map() const { return map_; }

  /// (P_π)_{ij} = 1{π(i) = j}.
  Matrix matrix() const;

  auto operator<=>(const Permutation&) const = default;

 private:
  std::vector<int> map_;
};

struct EigenDecomposition {
  Vector values;   // ascending
  Matrix vectors;  // orthonormal columns
};

/// Uniform draw from S_d by Fisher–Yates.
Permutation random_permutation(std::size_t d, Rng& rng);

/// (A^π)_{ij} = A_{π(i), π(j)}.
SymMatrix perm_apply(const SymMatrix& a, const Permutation& pi);

Permutation perm_invert(const Permutation& pi);

/// (π₁∘π₂)(i) = π₁(π₂(i)).
Permutation perm_compose(const Permutation& outer, const Permutation& inner);

/// Lower-triangular L with LLᵀ = A. Throws NotPositiveDefinite when a pivot
/// falls to 1e−12·trace(A)/d or below.
Matrix cholesky(const SymMatrix& a);

EigenDecomposition sym_eigen(const SymMatrix& a);

SymMatrix sym_inverse(const SymMatrix& a);
SymMatrix sym_inv_sqrt(const SymMatrix& a);

double inner(const SymMatrix& a, const SymMatrix& b);
double frobenius_norm(const SymMatrix& a);
double operator_norm(const SymMatrix& a);
double min_eigenvalue(const SymMatrix& a);

}  // namespace covalign
