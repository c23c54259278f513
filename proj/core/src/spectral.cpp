#include "covalign/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "covalign/error.hpp"

namespace covalign {

namespace {

// Eigenvalues at or below this fraction of the spectral radius count as zero.
constexpr double kZeroEigenFraction = 1e-8;

Permutation argsort(const Vector& v) {
  std::vector<int> order(static_cast<std::size_t>(v.size()));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return v(a) < v(b); });
  return Permutation(std::move(order));
}

Permutation reversed(const Permutation& p) {
  std::vector<int> map(p.map().rbegin(), p.map().rend());
  return Permutation(std::move(map));
}

// π̂ with π̂(order_y[k]) = order_x[k].
Permutation match_ranks(const Permutation& order_x, const Permutation& order_y) {
  std::vector<int> map(order_x.size());
  for (std::size_t k = 0; k < map.size(); ++k) map[static_cast<std::size_t>(order_y[k])] = order_x[k];
  return Permutation(std::move(map));
}

}  // namespace

FiedlerResult fiedler_order(const SymMatrix& sigma_hat) {
  const std::size_t d = sigma_hat.dim();
  if (d < 2) throw Error(ErrorKind::InvalidArgument, "fiedler_order needs d >= 2");

  Matrix laplacian = -sigma_hat.matrix();
  laplacian.diagonal() += sigma_hat.matrix().rowwise().sum();
  const EigenDecomposition eig = sym_eigen(symmetrize(std::move(laplacian)));

  const double radius = eig.values.cwiseAbs().maxCoeff();
  const double zero = kZeroEigenFraction * radius;
  Eigen::Index k = 0;
  while (k < eig.values.size() && !(eig.values(k) > zero)) ++k;

  FiedlerResult result;
  if (radius == 0.0 || k == eig.values.size()) {
    result.ordering = Permutation::identity(d);
    result.fiedler_vector = Vector::Zero(static_cast<Eigen::Index>(d));
    return result;
  }

  Vector v = eig.vectors.col(k);
  // Sign convention: first non-negligible component negative.
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v(i)) > 1e-12) {
      if (v(i) > 0) v = -v;
      break;
    }
  }
  result.fiedler_value = eig.values(k);
  result.gap = k + 1 < eig.values.size() ? eig.values(k + 1) - eig.values(k) : 0.0;
  result.ordering = argsort(v);
  result.fiedler_vector = std::move(v);
  return result;
}

Permutation spectral_estimate(const SymMatrix& sigma_x, const SymMatrix& sigma_y, SpectralVariant variant) {
  if (sigma_x.dim() != sigma_y.dim()) {
    throw Error(ErrorKind::DimensionMismatch, "spectral_estimate covariances differ in dimension");
  }
  const std::size_t d = sigma_x.dim();
  const Permutation order_y = fiedler_order(sigma_y).ordering;
  const Permutation order_x =
      variant == SpectralVariant::two_sided ? fiedler_order(sigma_x).ordering : Permutation::identity(d);

  const Permutation candidates[] = {
      match_ranks(order_x, order_y),
      match_ranks(reversed(order_x), order_y),
      match_ranks(order_x, reversed(order_y)),
      match_ranks(reversed(order_x), reversed(order_y)),
  };
  const Permutation* best = nullptr;
  double best_residual = 0.0;
  for (const Permutation& candidate : candidates) {
    const double residual = frobenius_norm(perm_apply(sigma_x, candidate) - sigma_y);
    if (best == nullptr || residual < best_residual) {
      best = &candidate;
      best_residual = residual;
    }
  }
  return *best;
}

}  // namespace covalign
