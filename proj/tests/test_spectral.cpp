#include <doctest.h>

#include <algorithm>
#include <cmath>

#include <covalign/instances.hpp>
#include <covalign/model.hpp>
#include <covalign/spectral.hpp>

#include "support.hpp"

using namespace covalign;

namespace {

Permutation reversed(const Permutation& p) {
  std::vector<int> m = p.map();
  std::reverse(m.begin(), m.end());
  return Permutation(m);
}

bool same_up_to_reversal(const Permutation& a, const Permutation& b) { return a == b || a == reversed(b); }

double residual(const SymMatrix& x, const SymMatrix& y, const Permutation& pi) {
  return frobenius_norm(perm_apply(x, pi) - y);
}

}  // namespace

TEST_SUITE("spectral") {

TEST_CASE("three point Robinson matrix") {
  const SymMatrix s = robinson(3, 1.0);
  const FiedlerResult f = fiedler_order(s);
  CHECK(same_up_to_reversal(f.ordering, Permutation::identity(3)));
  CHECK(f.gap > 0);
  const Vector& v = f.fiedler_vector;
  const bool up = v(0) < v(1) && v(1) < v(2);
  const bool down = v(0) > v(1) && v(1) > v(2);
  CHECK((up || down));

  // Closed form: L = [[5/6,-1/2,-1/3],[-1/2,1,-1/2],[-1/3,-1/2,5/6]] has the
  // antisymmetric eigenvector (1,0,-1) with eigenvalue 5/6 + 1/3 = 7/6 and
  // eigenvalues {0, 7/6, 3/2}.
  CHECK(f.fiedler_value == doctest::Approx(7.0 / 6.0));
  CHECK(std::abs(v(1)) < 1e-12);
}

TEST_CASE("identity is fully degenerate") {
  const FiedlerResult f = fiedler_order(SymMatrix::identity(4));
  CHECK(f.gap == 0);
  CHECK(f.ordering == Permutation::identity(4));
}

TEST_CASE("relabeling the input relabels the ordering") {
  Rng rng(51);
  for (int t = 0; t < 30; ++t) {
    const std::size_t d = 4 + rng() % 20;
    const SymMatrix s = robinson(d, 0.3 + 0.1 * static_cast<double>(t % 5));
    const Permutation pi = random_permutation(d, rng);
    const FiedlerResult base = fiedler_order(s);
    const FiedlerResult moved = fiedler_order(perm_apply(s, pi));
    // Feature i of Σ^π is feature π(i) of Σ, so rank k holds π⁻¹(base[k]).
    const Permutation expected = perm_compose(perm_invert(pi), base.ordering);
    CHECK(same_up_to_reversal(moved.ordering, expected));
  }
}

TEST_CASE("exact Robinson instances are recovered") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    InstanceSpec spec;
    spec.kind = InstanceKind::robinson;
    spec.d = 10;
    spec.gamma = 0.5;
    spec.seed = seed;
    const AlignmentInstance inst = make_instance(spec);
    for (SpectralVariant v : {SpectralVariant::two_sided, SpectralVariant::one_sided}) {
      const Permutation est = spectral_estimate(inst.sigma_hat_x, inst.sigma_hat_y, v);
      CHECK(frob_loss(inst.sigma, est, inst.pi_star) == 0);
    }
  }
}

TEST_CASE("self alignment has zero loss") {
  Rng rng(52);
  for (int t = 0; t < 20; ++t) {
    const SymMatrix s = testing::random_spd(9, rng);
    const Permutation est = spectral_estimate(s, s);
    CHECK(frob_loss(s, est, Permutation::identity(9)) == 0);
  }
}

TEST_CASE("estimate is insensitive to Fiedler vector signs") {
  // Flipping the sign of either Fiedler vector reverses its ordering. The
  // estimator must pick the residual minimizer over all four combinations,
  // which makes it blind to the eigensolver's sign choice.
  Rng rng(53);
  for (int t = 0; t < 50; ++t) {
    InstanceSpec spec;
    spec.kind = InstanceKind::robinson;
    spec.d = 12;
    spec.gamma = 0.4;
    spec.m = SampleSize::of(60);
    spec.n = SampleSize::of(60);
    spec.seed = static_cast<std::uint64_t>(t);
    const AlignmentInstance inst = make_instance(spec);
    const SymMatrix& x = inst.sigma_hat_x;
    const SymMatrix& y = inst.sigma_hat_y;
    const Permutation ox = fiedler_order(x).ordering;
    const Permutation oy = fiedler_order(y).ordering;
    double best = INFINITY;
    for (const Permutation& a : {ox, reversed(ox)}) {
      for (const Permutation& b : {oy, reversed(oy)}) {
        // Rank k of Y is matched with rank k of X: π(b[k]) = a[k].
        std::vector<int> map(12);
        for (std::size_t k = 0; k < 12; ++k) map[static_cast<std::size_t>(b[k])] = a[k];
        best = std::min(best, residual(x, y, Permutation(map)));
      }
    }
    const Permutation est = spectral_estimate(x, y);
    CHECK(residual(x, y, est) <= best + 1e-12);
  }
}

TEST_CASE("output is always a permutation") {
  Rng rng(54);
  for (int t = 0; t < 200; ++t) {
    const std::size_t d = 2 + rng() % 15;
    const SymMatrix x = testing::random_symmetric(d, rng);
    const SymMatrix y = testing::random_symmetric(d, rng);
    CHECK(Permutation::is_valid(spectral_estimate(x, y).map()));
    CHECK(Permutation::is_valid(spectral_estimate(x, y, SpectralVariant::one_sided).map()));
  }
  CHECK(testing::thrown_kind([] { spectral_estimate(SymMatrix{{2}}, SymMatrix{{3}}); }) == ErrorKind::InvalidArgument);
}

}  // TEST_SUITE
