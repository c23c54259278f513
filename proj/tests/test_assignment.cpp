#include <doctest.h>

#include <covalign/assignment.hpp>

#include "support.hpp"

using namespace covalign;

namespace {

double assignment_value(const Matrix& m, const Permutation& pi) {
  double v = 0;
  for (std::size_t i = 0; i < pi.size(); ++i) v += m(static_cast<Eigen::Index>(i), pi[i]);
  return v;
}

struct Brute {
  double best = -std::numeric_limits<double>::infinity();
  int winners = 0;
  Permutation arg;
};

Brute brute_force(const Matrix& m) {
  Brute b;
  for (const Permutation& pi : testing::all_permutations(static_cast<std::size_t>(m.rows()))) {
    const double v = assignment_value(m, pi);
    if (v > b.best + 1e-12) {
      b.best = v;
      b.arg = pi;
      b.winners = 1;
    } else if (v > b.best - 1e-12) {
      ++b.winners;
    }
  }
  return b;
}

}  // namespace

TEST_SUITE("assignment") {

TEST_CASE("small examples") {
  const AssignmentResult id = lap_max(Matrix::Identity(2, 2));
  CHECK(id.permutation == Permutation::identity(2));
  CHECK(id.value == 2);

  Matrix anti(2, 2);
  anti << 0, 1, 1, 0;
  const AssignmentResult sw = lap_max(anti);
  CHECK(sw.permutation == Permutation{1, 0});
  CHECK(sw.value == 2);

  Matrix one(1, 1);
  one << -4;
  CHECK(lap_max(one).permutation == Permutation::identity(1));
  CHECK(lap_max(one).value == -4);
}

TEST_CASE("ties go to the lexicographically smallest permutation") {
  CHECK(lap_max(Matrix::Constant(5, 5, 0.2)).permutation == Permutation::identity(5));
  Matrix m(3, 3);
  m << 1, 1, 0,
       1, 1, 0,
       0, 0, 1;
  CHECK(lap_max(m).permutation == Permutation::identity(3));
}

TEST_CASE("matches brute force on random matrices") {
  Rng rng(21);
  for (int seed = 0; seed < 100; ++seed) {
    const Matrix m = testing::gaussian_matrix(6, 6, rng);
    const AssignmentResult r = lap_max(m);
    const Brute b = brute_force(m);
    CHECK(r.value == doctest::Approx(b.best).epsilon(1e-12));
    CHECK(assignment_value(m, r.permutation) == doctest::Approx(r.value).epsilon(1e-12));
    if (b.winners == 1) CHECK(r.permutation == b.arg);
  }
  for (std::size_t d = 1; d <= 7; ++d) {
    for (int t = 0; t < 10; ++t) {
      const Matrix m = testing::gaussian_matrix(d, d, rng);
      CHECK(lap_max(m).value == doctest::Approx(brute_force(m).best).epsilon(1e-12));
    }
  }
}

TEST_CASE("integer costs with many ties") {
  Rng rng(22);
  for (int t = 0; t < 100; ++t) {
    Matrix m(6, 6);
    for (Eigen::Index i = 0; i < 6; ++i)
      for (Eigen::Index j = 0; j < 6; ++j) m(i, j) = static_cast<double>(rng() % 3);
    CHECK(lap_max(m).value == brute_force(m).best);
  }
}

TEST_CASE("argmax is invariant to a constant shift") {
  Rng rng(23);
  for (int t = 0; t < 100; ++t) {
    const std::size_t d = 2 + rng() % 10;
    const Matrix m = testing::gaussian_matrix(d, d, rng);
    const double c = std::normal_distribution<double>(0, 10)(rng);
    CHECK(lap_max(m.array() + c).permutation == lap_max(m).permutation);
  }
}

TEST_CASE("bad input") {
  CHECK(testing::thrown_kind([] { lap_max(Matrix::Zero(2, 3)); }) == ErrorKind::DimensionMismatch);
  Matrix m = Matrix::Zero(2, 2);
  m(0, 1) = std::numeric_limits<double>::quiet_NaN();
  CHECK(testing::thrown_kind([&] { lap_max(m); }) == ErrorKind::NonFinite);
}

}  // TEST_SUITE
