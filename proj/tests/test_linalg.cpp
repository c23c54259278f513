#include <doctest.h>

#include <cmath>

#include <covalign/linalg.hpp>

#include "support.hpp"

using namespace covalign;
using testing::thrown_kind;

TEST_SUITE("linalg") {

TEST_CASE("symmetric construction") {
  const SymMatrix a{{1, 2}, {2, 3}};
  CHECK(a.dim() == 2);
  CHECK(a(0, 1) == 2);
  CHECK(thrown_kind([] { SymMatrix({{1, 2}, {0, 3}}); }) == ErrorKind::NotSymmetric);
  CHECK(thrown_kind([] { SymMatrix(Matrix::Zero(2, 3)); }) == ErrorKind::DimensionMismatch);

  // Roundoff-level asymmetry is accepted and averaged away.
  Matrix m(2, 2);
  m << 1, 0.5, 0.5 + 1e-14, 1;
  const SymMatrix s(m);
  CHECK(s(0, 1) == s(1, 0));
}

TEST_CASE("permutation validation") {
  CHECK(Permutation::is_valid(std::vector<int>{2, 0, 1}));
  CHECK_FALSE(Permutation::is_valid(std::vector<int>{0, 0, 1}));
  CHECK_FALSE(Permutation::is_valid(std::vector<int>{0, 3, 1}));
  CHECK(thrown_kind([] { Permutation({1, 1}); }) == ErrorKind::InvalidArgument);
  CHECK(Permutation::identity(3).map() == std::vector<int>{0, 1, 2});
}

TEST_CASE("perm_apply examples") {
  const SymMatrix a{{1, 2}, {2, 3}};
  CHECK(perm_apply(a, Permutation::identity(2)) == a);
  CHECK(perm_apply(a, Permutation{1, 0}) == SymMatrix{{3, 2}, {2, 1}});
}

TEST_CASE("perm_apply composes as A^(p1 o p2)") {
  Rng rng(11);
  for (int t = 0; t < 50; ++t) {
    const SymMatrix a = testing::random_symmetric(5, rng);
    const Permutation p1 = random_permutation(5, rng);
    const Permutation p2 = random_permutation(5, rng);
    CHECK(perm_apply(perm_apply(a, p1), p2) == perm_apply(a, perm_compose(p1, p2)));
  }
}

TEST_CASE("perm_apply matches P A P^T") {
  Rng rng(12);
  for (std::size_t d = 1; d <= 8; ++d) {
    for (int t = 0; t < 20; ++t) {
      const SymMatrix a = testing::random_symmetric(d, rng);
      const Permutation pi = random_permutation(d, rng);
      const Matrix p = pi.matrix();
      CHECK((perm_apply(a, pi).matrix() - p * a.matrix() * p.transpose()).norm() == 0.0);
    }
  }
}

TEST_CASE("permutation matrix convention") {
  const Permutation pi{2, 0, 1};
  const Matrix p = pi.matrix();
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) CHECK(p(i, j) == (pi[static_cast<std::size_t>(i)] == j ? 1.0 : 0.0));
}

TEST_CASE("invert and compose") {
  CHECK(perm_invert(Permutation::identity(4)) == Permutation::identity(4));
  CHECK(perm_invert(Permutation{1, 2, 0}) == Permutation{2, 0, 1});
  CHECK(perm_compose(Permutation{1, 2, 0}, Permutation{1, 0, 2}) == Permutation{2, 1, 0});
  Rng rng(13);
  for (int t = 0; t < 100; ++t) {
    const std::size_t d = 1 + rng() % 8;
    const Permutation pi = random_permutation(d, rng);
    CHECK(perm_compose(pi, perm_invert(pi)) == Permutation::identity(d));
    CHECK(perm_compose(perm_invert(pi), pi) == Permutation::identity(d));
  }
}

TEST_CASE("random_permutation is a bijection and seed-determined") {
  Rng a(5), b(5);
  for (int t = 0; t < 20; ++t) {
    const Permutation p = random_permutation(9, a);
    CHECK(Permutation::is_valid(p.map()));
    CHECK(p == random_permutation(9, b));
  }
}

TEST_CASE("cholesky") {
  const Matrix l_id = cholesky(SymMatrix::identity(3));
  CHECK(l_id == Matrix::Identity(3, 3));

  const Matrix l = cholesky(SymMatrix{{4, 2}, {2, 2}});
  Matrix expected(2, 2);
  expected << 2, 0, 1, 1;
  CHECK((l - expected).norm() < 1e-15);

  CHECK(thrown_kind([] { cholesky(SymMatrix{{1, 1}, {1, 1}}); }) == ErrorKind::NotPositiveDefinite);
  CHECK(thrown_kind([] { cholesky(SymMatrix{{1, 0}, {0, -1}}); }) == ErrorKind::NotPositiveDefinite);

  Rng rng(14);
  for (int t = 0; t < 20; ++t) {
    const SymMatrix a = testing::random_spd(7, rng);
    const Matrix f = cholesky(a);
    CHECK((f * f.transpose() - a.matrix()).norm() < 1e-12 * a.matrix().norm());
    CHECK(f.triangularView<Eigen::StrictlyUpper>().toDenseMatrix().norm() == 0.0);
  }
}

TEST_CASE("sym_eigen") {
  const EigenDecomposition e = sym_eigen(SymMatrix::diagonal({3, 1}));
  CHECK(e.values(0) == doctest::Approx(1));
  CHECK(e.values(1) == doctest::Approx(3));
  CHECK(std::abs(e.vectors(1, 0)) == doctest::Approx(1));
  CHECK(std::abs(e.vectors(0, 1)) == doctest::Approx(1));

  const EigenDecomposition id = sym_eigen(SymMatrix::identity(4));
  for (int i = 0; i < 4; ++i) CHECK(id.values(i) == doctest::Approx(1));

  Rng rng(15);
  for (int t = 0; t < 20; ++t) {
    const SymMatrix a = testing::random_spd(6, rng, 0.0);
    const EigenDecomposition ed = sym_eigen(a);
    const Matrix rebuilt = ed.vectors * ed.values.asDiagonal() * ed.vectors.transpose();
    CHECK((rebuilt - a.matrix()).norm() < 1e-12 * (1 + a.matrix().norm()));
    CHECK((ed.vectors.transpose() * ed.vectors - Matrix::Identity(6, 6)).norm() < 1e-12);
    for (int i = 1; i < 6; ++i) CHECK(ed.values(i - 1) <= ed.values(i));
  }
}

TEST_CASE("inverse and inverse square root") {
  CHECK((sym_inverse(SymMatrix::diagonal({2, 4})).matrix() - SymMatrix::diagonal({0.5, 0.25}).matrix()).norm() <
        1e-15);
  CHECK((sym_inverse(SymMatrix::identity(5)).matrix() - Matrix::Identity(5, 5)).norm() < 1e-15);
  const SymMatrix r = sym_inv_sqrt(SymMatrix::diagonal({4, 9}));
  CHECK(r(0, 0) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(r(1, 1) == doctest::Approx(1.0 / 3).epsilon(1e-14));
  CHECK(std::abs(r(0, 1)) < 1e-15);

  CHECK(thrown_kind([] { sym_inverse(SymMatrix{{1, 1}, {1, 1}}); }) == ErrorKind::NotPositiveDefinite);

  Rng rng(16);
  for (int t = 0; t < 20; ++t) {
    const SymMatrix a = testing::random_spd(6, rng);
    CHECK((sym_inverse(a).matrix() * a.matrix() - Matrix::Identity(6, 6)).norm() < 1e-10);
    const Matrix s = sym_inv_sqrt(a).matrix();
    CHECK((s * a.matrix() * s - Matrix::Identity(6, 6)).norm() < 1e-10);
  }
}

TEST_CASE("inner products and norms") {
  CHECK(inner(SymMatrix::identity(2), SymMatrix::identity(2)) == 2);
  CHECK(inner(SymMatrix{{1, 2}, {2, 3}}, SymMatrix::zeros(2)) == 0);
  CHECK(inner(SymMatrix{{1, 2}, {2, 3}}, SymMatrix{{0, 1}, {1, 0}}) == 4);
  CHECK(frobenius_norm(SymMatrix{{3, 0}, {0, 4}}) == 5);
  CHECK(operator_norm(SymMatrix::diagonal({-7, 2})) == doctest::Approx(7));
  CHECK(min_eigenvalue(SymMatrix::diagonal({-7, 2})) == doctest::Approx(-7));
}

TEST_CASE("frobenius norm is permutation invariant") {
  Rng rng(17);
  for (int t = 0; t < 100; ++t) {
    const std::size_t d = 1 + rng() % 8;
    const SymMatrix a = testing::random_symmetric(d, rng);
    const Permutation pi = random_permutation(d, rng);
    CHECK(frobenius_norm(perm_apply(a, pi)) == doctest::Approx(frobenius_norm(a)).epsilon(1e-15));
  }
}

TEST_CASE("inverse commutes with relabeling") {
  Rng rng(18);
  for (int t = 0; t < 100; ++t) {
    const std::size_t d = 1 + rng() % 8;
    const SymMatrix a = testing::random_spd(d, rng);
    const Permutation pi = random_permutation(d, rng);
    const Matrix lhs = sym_inverse(perm_apply(a, pi)).matrix();
    const Matrix rhs = perm_apply(sym_inverse(a), pi).matrix();
    CHECK((lhs - rhs).norm() <= 1e-10 * (1 + rhs.norm()));
  }
}

TEST_CASE("arithmetic helpers") {
  const SymMatrix a{{1, 2}, {2, 3}};
  CHECK(a + a == a * 2.0);
  CHECK(a - a == SymMatrix::zeros(2));
  CHECK(a.with_ridge(0.5) == SymMatrix{{1.5, 2}, {2, 3.5}});
  CHECK(thrown_kind([&] { (void)(a + SymMatrix::identity(3)); }) == ErrorKind::DimensionMismatch);
}

}  // TEST_SUITE
