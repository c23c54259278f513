#include "covalign/model.hpp"

#include <charconv>
#include <cmath>

#include "covalign/error.hpp"

namespace covalign {

SampleSize SampleSize::of(std::int64_t count) {
  if (count < 1) {
    throw Error(ErrorKind::InvalidArgument, "sample size must be positive, got " + std::to_string(count));
  }
  return SampleSize(count);
}

SampleSize SampleSize::parse(std::string_view text) {
  if (text == "exact") return exact();
  std::int64_t value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || value < 1) {
    throw Error(ErrorKind::InvalidArgument,
                "expected a positive integer or 'exact', got '" + std::string(text) + "'");
  }
  return SampleSize(value);
}

std::string SampleSize::to_string() const {
  return is_exact() ? std::string("exact") : std::to_string(count_);
}

namespace {

// Factor F with FFᵀ = Σ for a semidefinite Σ.
Matrix psd_factor(const SymMatrix& sigma) {
  const EigenDecomposition eig = sym_eigen(sigma);
  const double scale = 1.0 + eig.values.cwiseAbs().maxCoeff();
  if (eig.values(0) < -1e-10 * scale) {
    throw Error(ErrorKind::NotPositiveDefinite,
                "covariance has negative eigenvalue " + std::to_string(eig.values(0)));
  }
  const Vector root = eig.values.cwiseMax(0.0).cwiseSqrt();
  return eig.vectors * root.asDiagonal();
}

}  // namespace

Dataset sample_gaussian(const SymMatrix& sigma, std::size_t count, Rng& rng) {
  if (count < 1) throw Error(ErrorKind::InvalidArgument, "sample count must be positive");
  const auto d = static_cast<Eigen::Index>(sigma.dim());
  const auto cols = static_cast<Eigen::Index>(count);

  Matrix factor;
  try {
    factor = cholesky(sigma);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::NotPositiveDefinite) throw;
    factor = psd_factor(sigma);
  }

  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix z(d, cols);
  for (Eigen::Index k = 0; k < cols; ++k) {
    for (Eigen::Index i = 0; i < d; ++i) z(i, k) = normal(rng);
  }
  return Dataset{factor * z};
}

SymMatrix sample_covariance(const Dataset& data, bool center) {
  if (data.count() < 1) throw Error(ErrorKind::InvalidArgument, "dataset is empty");
  const double inv = 1.0 / static_cast<double>(data.count());
  if (!center) {
    return symmetrize(inv * (data.observations * data.observations.transpose()));
  }
  const Vector mean = data.observations.rowwise().mean();
  const Matrix centered = data.observations.colwise() - mean;
  return symmetrize(inv * (centered * centered.transpose()));
}

double qap_objective(const SymMatrix& m, const SymMatrix& b, const Permutation& pi) {
  if (m.dim() != b.dim() || m.dim() != pi.size()) {
    throw Error(ErrorKind::DimensionMismatch, "qap_objective operands differ in dimension");
  }
  const std::size_t d = m.dim();
  const Matrix& mm = m.matrix();
  const Matrix& bm = b.matrix();
  double total = 0.0;
  for (std::size_t j = 0; j < d; ++j) {
    const auto pj = static_cast<Eigen::Index>(pi[j]);
    for (std::size_t i = 0; i < d; ++i) {
      total += bm(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) * mm(pi[i], pj);
    }
  }
  return total;
}

double qap_swap_delta(const SymMatrix& m, const SymMatrix& b, const Permutation& pi,
                      std::size_t r, std::size_t s) {
  if (r == s) return 0.0;
  const Matrix& mm = m.matrix();
  const Matrix& bm = b.matrix();
  const auto er = static_cast<Eigen::Index>(r);
  const auto es = static_cast<Eigen::Index>(s);
  const Eigen::Index pr = pi[r];
  const Eigen::Index ps = pi[s];
  double acc = 0.0;
  for (std::size_t k = 0; k < pi.size(); ++k) {
    if (k == r || k == s) continue;
    const auto ek = static_cast<Eigen::Index>(k);
    const Eigen::Index pk = pi[k];
    acc += (mm(ps, pk) - mm(pr, pk)) * (bm(er, ek) - bm(es, ek));
  }
  return 2.0 * acc + (mm(ps, ps) - mm(pr, pr)) * (bm(er, er) - bm(es, es));
}

double frob_loss(const SymMatrix& sigma, const Permutation& estimate, const Permutation& truth) {
  return frobenius_norm(perm_apply(sigma, estimate) - perm_apply(sigma, truth));
}

double nf_loss(const SymMatrix& sigma, const Permutation& estimate, const Permutation& truth) {
  const SymMatrix target = perm_apply(sigma, truth);
  const SymMatrix whiten = sym_inv_sqrt(target);
  const Matrix diff = (perm_apply(sigma, estimate) - target).matrix();
  return (whiten.matrix() * diff * whiten.matrix()).norm();
}

int hamming_loss(const Permutation& estimate, const Permutation& truth) {
  if (estimate.size() != truth.size()) {
    throw Error(ErrorKind::DimensionMismatch, "hamming_loss operands differ in length");
  }
  int count = 0;
  for (std::size_t i = 0; i < estimate.size(); ++i) count += estimate[i] != truth[i] ? 1 : 0;
  return count;
}

double trace_loss(const SymMatrix& sigma, const Permutation& estimate) {
  const SymMatrix precision = sym_inverse(sigma);
  return inner(perm_apply(sigma, perm_invert(estimate)) - sigma, precision);
}

double trace_loss(const SymMatrix& sigma, const Permutation& estimate, const Permutation& truth) {
  // Σ^{π̂} = (Σ^{π*})^{τ} with τ = π*⁻¹ ∘ π̂.
  return trace_loss(perm_apply(sigma, truth), perm_compose(perm_invert(truth), estimate));
}

}  // namespace covalign
