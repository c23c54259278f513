#include "covalign/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "covalign/error.hpp"

namespace covalign {

namespace {

void require_same_dim(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw Error(ErrorKind::DimensionMismatch,
                std::string(what) + ": " + std::to_string(a) + " vs " + std::to_string(b));
  }
}

Eigen::Index idx(std::size_t i) { return static_cast<Eigen::Index>(i); }

}  // namespace

SymMatrix::SymMatrix(Matrix a) {
  if (a.rows() != a.cols()) {
    throw Error(ErrorKind::DimensionMismatch, "matrix is not square");
  }
  if (a.rows() == 0) {
    throw Error(ErrorKind::InvalidArgument, "matrix dimension must be at least 1");
  }
  if (!a.allFinite()) {
    throw Error(ErrorKind::NonFinite, "matrix has non-finite entries");
  }
  const double norm = a.norm();
  const double asym = (a - a.transpose()).norm();
  if (asym > kSymmetryTolerance * norm) {
    throw Error(ErrorKind::NotSymmetric,
                "relative asymmetry " + std::to_string(asym / norm) + " exceeds 1e-9");
  }
  m_ = 0.5 * (a + a.transpose());
}

SymMatrix::SymMatrix(Matrix a, Trusted) : m_(std::move(a)) {}

SymMatrix::SymMatrix(std::initializer_list<std::initializer_list<double>> rows) {
  const auto d = static_cast<Eigen::Index>(rows.size());
  Matrix a(d, d);
  Eigen::Index i = 0;
  for (const auto& row : rows) {
    if (static_cast<Eigen::Index>(row.size()) != d) {
      throw Error(ErrorKind::DimensionMismatch, "ragged matrix literal");
    }
    Eigen::Index j = 0;
    for (double v : row) a(i, j++) = v;
    ++i;
  }
  *this = SymMatrix(std::move(a));
}

SymMatrix symmetrize(Matrix a) {
  if (a.rows() != a.cols() || a.rows() == 0) {
    throw Error(ErrorKind::DimensionMismatch, "symmetrize: matrix is not square");
  }
  Matrix s = 0.5 * (a + a.transpose());
  return SymMatrix(std::move(s), SymMatrix::Trusted{});
}

SymMatrix SymMatrix::identity(std::size_t d) {
  return SymMatrix(Matrix::Identity(idx(d), idx(d)), Trusted{});
}

SymMatrix SymMatrix::zeros(std::size_t d) {
  return SymMatrix(Matrix::Zero(idx(d), idx(d)), Trusted{});
}

SymMatrix SymMatrix::diagonal(std::span<const double> diag) {
  Matrix a = Matrix::Zero(idx(diag.size()), idx(diag.size()));
  for (std::size_t i = 0; i < diag.size(); ++i) a(idx(i), idx(i)) = diag[i];
  return SymMatrix(std::move(a));
}

SymMatrix SymMatrix::diagonal(std::initializer_list<double> diag) {
  return diagonal(std::span<const double>(diag.begin(), diag.size()));
}

SymMatrix SymMatrix::operator+(const SymMatrix& other) const {
  require_same_dim(dim(), other.dim(), "add");
  return SymMatrix(m_ + other.m_, Trusted{});
}

SymMatrix SymMatrix::operator-(const SymMatrix& other) const {
  require_same_dim(dim(), other.dim(), "subtract");
  return SymMatrix(m_ - other.m_, Trusted{});
}

SymMatrix SymMatrix::operator*(double scale) const { return SymMatrix(m_ * scale, Trusted{}); }

SymMatrix SymMatrix::with_ridge(double ridge) const {
  Matrix a = m_;
  a.diagonal().array() += ridge;
  return SymMatrix(std::move(a), Trusted{});
}

Permutation::Permutation(std::vector<int> map) : map_(std::move(map)) {
  if (!is_valid(map_)) {
    throw Error(ErrorKind::InvalidArgument, "map is not a bijection on {0..d-1}");
  }
}

Permutation::Permutation(std::initializer_list<int> map) : Permutation(std::vector<int>(map)) {}

Permutation Permutation::identity(std::size_t d) {
  std::vector<int> map(d);
  std::iota(map.begin(), map.end(), 0);
  return Permutation(std::move(map));
}

bool Permutation::is_valid(std::span<const int> map) {
  std::vector<char> seen(map.size(), 0);
  for (int v : map) {
    if (v < 0 || static_cast<std::size_t>(v) >= map.size() || seen[static_cast<std::size_t>(v)]) {
      return false;
    }
    seen[static_cast<std::size_t>(v)] = 1;
  }
  return true;
}

Matrix Permutation::matrix() const {
  const auto d = idx(size());
  Matrix p = Matrix::Zero(d, d);
  for (std::size_t i = 0; i < size(); ++i) p(idx(i), map_[i]) = 1.0;
  return p;
}

Permutation random_permutation(std::size_t d, Rng& rng) {
  std::vector<int> map(d);
  std::iota(map.begin(), map.end(), 0);
  for (std::size_t i = d; i > 1; --i) {
    std::uniform_int_distribution<std::size_t> pick(0, i - 1);
    std::swap(map[i - 1], map[pick(rng)]);
  }
  return Permutation(std::move(map));
}

SymMatrix perm_apply(const SymMatrix& a, const Permutation& pi) {
  require_same_dim(a.dim(), pi.size(), "perm_apply");
  const std::size_t d = a.dim();
  Matrix out(idx(d), idx(d));
  const Matrix& src = a.matrix();
  for (std::size_t j = 0; j < d; ++j) {
    const Eigen::Index pj = pi[j];
    for (std::size_t i = 0; i < d; ++i) out(idx(i), idx(j)) = src(pi[i], pj);
  }
  return symmetrize(std::move(out));
}

Permutation perm_invert(const Permutation& pi) {
  std::vector<int> inv(pi.size());
  for (std::size_t i = 0; i < pi.size(); ++i) inv[static_cast<std::size_t>(pi[i])] = static_cast<int>(i);
  return Permutation(std::move(inv));
}

Permutation perm_compose(const Permutation& outer, const Permutation& inner) {
  require_same_dim(outer.size(), inner.size(), "perm_compose");
  std::vector<int> out(inner.size());
  for (std::size_t i = 0; i < inner.size(); ++i) out[i] = outer[static_cast<std::size_t>(inner[i])];
  return Permutation(std::move(out));
}

Matrix cholesky(const SymMatrix& a) {
  const auto d = static_cast<Eigen::Index>(a.dim());
  const Matrix& m = a.matrix();
  const double floor = 1e-12 * m.trace() / static_cast<double>(d);
  Matrix l = Matrix::Zero(d, d);
  for (Eigen::Index j = 0; j < d; ++j) {
    double pivot = m(j, j);
    for (Eigen::Index k = 0; k < j; ++k) pivot -= l(j, k) * l(j, k);
    if (!(pivot > floor) || pivot <= 0.0) {
      throw Error(ErrorKind::NotPositiveDefinite,
                  "cholesky pivot " + std::to_string(pivot) + " at index " + std::to_string(j));
    }
    const double ljj = std::sqrt(pivot);
    l(j, j) = ljj;
    for (Eigen::Index i = j + 1; i < d; ++i) {
      double s = m(i, j);
      for (Eigen::Index k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / ljj;
    }
  }
  return l;
}

EigenDecomposition sym_eigen(const SymMatrix& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(a.matrix());
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorKind::ConvergenceFailure, "symmetric eigensolver did not converge");
  }
  return {solver.eigenvalues(), solver.eigenvectors()};
}

SymMatrix sym_inverse(const SymMatrix& a) {
  const Matrix l = cholesky(a);
  const auto d = static_cast<Eigen::Index>(a.dim());
  Matrix inv = Matrix::Identity(d, d);
  const auto tri = l.triangularView<Eigen::Lower>();
  tri.solveInPlace(inv);
  tri.transpose().solveInPlace(inv);
  return symmetrize(std::move(inv));
}

SymMatrix sym_inv_sqrt(const SymMatrix& a) {
  const EigenDecomposition eig = sym_eigen(a);
  const double top = eig.values.cwiseAbs().maxCoeff();
  const double low = eig.values.minCoeff();
  if (!(low > 1e-12 * top)) {
    throw Error(ErrorKind::NotPositiveDefinite,
                "smallest eigenvalue " + std::to_string(low) + " is not positive");
  }
  const Vector scale = eig.values.array().rsqrt();
  return symmetrize(eig.vectors * scale.asDiagonal() * eig.vectors.transpose());
}

double inner(const SymMatrix& a, const SymMatrix& b) {
  require_same_dim(a.dim(), b.dim(), "inner");
  return a.matrix().cwiseProduct(b.matrix()).sum();
}

double frobenius_norm(const SymMatrix& a) { return std::sqrt(inner(a, a)); }

double operator_norm(const SymMatrix& a) {
  const EigenDecomposition eig = sym_eigen(a);
  return std::max(std::abs(eig.values(0)), std::abs(eig.values(eig.values.size() - 1)));
}

double min_eigenvalue(const SymMatrix& a) { return sym_eigen(a).values(0); }

}  // namespace covalign
