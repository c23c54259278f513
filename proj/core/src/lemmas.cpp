#include "covalign/lemmas.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <numeric>
#include <sstream>

#include <Eigen/QR>

#include "covalign/assignment.hpp"
#include "covalign/error.hpp"
#include "covalign/gw_solver.hpp"
#include "covalign/instances.hpp"
#include "covalign/model.hpp"
#include "covalign/qmle_solver.hpp"
#include "covalign/rng.hpp"
#include "covalign/spectral.hpp"

namespace covalign {

std::string_view to_string(CheckOutcome outcome) {
  switch (outcome) {
    case CheckOutcome::holds: return "holds";
    case CheckOutcome::violated: return "violated";
    case CheckOutcome::invalid_input: return "invalid-input";
  }
  return "unknown";
}

CheckOutcome check_trace_frobenius(std::span<const double> x) {
  if (x.empty()) return CheckOutcome::invalid_input;
  double log_sum = 0.0;
  double log_abs = 0.0;
  for (double v : x) {
    if (!std::isfinite(v) || !(v > 0.0)) return CheckOutcome::invalid_input;
    log_sum += std::log(v);
    log_abs += std::abs(std::log(v));
  }
  if (std::abs(log_sum) > 1e-10 * (1.0 + log_abs)) return CheckOutcome::invalid_input;

  double s = 0.0;
  double sq = 0.0;
  for (double v : x) {
    s += v - 1.0;
    sq += (v - 1.0) * (v - 1.0);
  }
  const double rhs = 4.0 * (s + s * s);
  return sq <= rhs + 1e-9 * (1.0 + sq) ? CheckOutcome::holds : CheckOutcome::violated;
}

CheckOutcome check_quadratic_bound(double a, double b, double c, double x) {
  if (!(a > 0.0) || !(b > 0.0) || !(c > 0.0) || !(x >= 0.0)) return CheckOutcome::invalid_input;
  if (!std::isfinite(a) || !std::isfinite(b) || !std::isfinite(c) || !std::isfinite(x)) {
    return CheckOutcome::invalid_input;
  }
  if (a * x * x > b * x + c) return CheckOutcome::invalid_input;
  const double bound = b / a + std::sqrt(c / a);
  return x <= bound * (1.0 + 1e-12) ? CheckOutcome::holds : CheckOutcome::violated;
}

CheckOutcome check_frobenius_sandwich(const SymMatrix& sigma) {
  const std::size_t d = sigma.dim();
  const double dist = frobenius_norm(sigma - SymMatrix::identity(d));
  if (!(dist > 0.0)) return CheckOutcome::invalid_input;
  SymMatrix inv;
  try {
    inv = sym_inverse(sigma);
  } catch (const Error&) {
    return CheckOutcome::invalid_input;
  }
  const double dist_inv = frobenius_norm(inv - SymMatrix::identity(d));
  const double ratio = std::min(1.0, dist_inv) / std::min(1.0, dist);
  constexpr double slack = 1e-9;
  return ratio >= 0.5 * (1.0 - slack) && ratio <= 2.0 * (1.0 + slack) ? CheckOutcome::holds : CheckOutcome::violated;
}

double flat_coupling_qmle_value(const SymMatrix& sigma) {
  const std::size_t d = sigma.dim();
  const auto n = static_cast<Eigen::Index>(d);
  const Matrix flat = Matrix::Constant(n, n, 1.0 / static_cast<double>(d));
  const Matrix inv = sym_inverse(sigma).matrix();
  const Matrix relaxed = flat * inv * flat.transpose();
  return relaxed.cwiseProduct(sigma.matrix()).sum();
}

bool VerificationReport::all_passed() const {
  return std::all_of(suites.begin(), suites.end(), [](const SuiteResult& s) { return s.passed; });
}

namespace {

std::string describe(const Matrix& m) {
  std::ostringstream out;
  out.precision(17);
  out << '[';
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    if (i) out << "; ";
    for (Eigen::Index j = 0; j < m.cols(); ++j) out << (j ? " " : "") << m(i, j);
  }
  out << ']';
  return out.str();
}

std::string describe(const Permutation& p) {
  std::ostringstream out;
  out << '[';
  for (std::size_t i = 0; i < p.size(); ++i) out << (i ? "," : "") << p[i];
  out << ']';
  return out.str();
}

std::size_t random_dim(Rng& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

Matrix gaussian_matrix(std::size_t rows, std::size_t cols, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix g(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index j = 0; j < g.cols(); ++j) {
    for (Eigen::Index i = 0; i < g.rows(); ++i) g(i, j) = normal(rng);
  }
  return g;
}

// G Gᵀ/d + δI with δ ∈ [0.05, 1].
SymMatrix random_pd(std::size_t d, Rng& rng) {
  const Matrix g = gaussian_matrix(d, d, rng);
  const double ridge = std::uniform_real_distribution<double>(0.05, 1.0)(rng);
  Matrix s = g * g.transpose() / static_cast<double>(d);
  s.diagonal().array() += ridge;
  return symmetrize(std::move(s));
}

// Q diag(exp(scale·z)) Qᵀ with Haar-ish Q and log-uniform scale, so that
// draws land on both sides of ‖Σ − I‖_F = 1.
SymMatrix random_pd_near_identity(std::size_t d, Rng& rng) {
  const Matrix q = Eigen::HouseholderQR<Matrix>(gaussian_matrix(d, d, rng)).householderQ();
  const double scale = std::exp(std::uniform_real_distribution<double>(std::log(1e-3), std::log(2.0))(rng));
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector lambda(static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < lambda.size(); ++i) lambda(i) = std::exp(scale * normal(rng));
  return symmetrize(q * lambda.asDiagonal() * q.transpose());
}

SymMatrix random_symmetric(std::size_t d, Rng& rng) {
  const Matrix g = gaussian_matrix(d, d, rng);
  return symmetrize(0.5 * (g + g.transpose()));
}

SymMatrix sym_sqrt(const SymMatrix& a) {
  const EigenDecomposition eig = sym_eigen(a);
  const Vector root = eig.values.cwiseMax(0.0).cwiseSqrt();
  return symmetrize(eig.vectors * root.asDiagonal() * eig.vectors.transpose());
}

double max_abs_diff(const Matrix& a, const Matrix& b) { return (a - b).cwiseAbs().maxCoeff(); }

struct SuiteContext {
  SuiteResult& result;
  void fail(const std::string& what) {
    ++result.failures;
    if (result.counterexample.empty()) result.counterexample = what;
  }
};

using SuiteFn = std::function<void(int count, Rng& rng, SuiteContext& ctx)>;

struct Suite {
  const char* name;
  int default_count;
  SuiteFn run;
};

// ---------------------------------------------------------------------------

void suite_trace_frobenius(int count, Rng& rng, SuiteContext& ctx) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> sd(0.01, 2.0);
  std::vector<double> x;
  for (int t = 0; t < count; ++t) {
    const std::size_t d = random_dim(rng, 1, 12);
    const double s = sd(rng);
    x.resize(d);
    double mean_log = 0.0;
    for (double& v : x) {
      v = s * normal(rng);
      mean_log += v;
    }
    mean_log /= static_cast<double>(d);
    for (double& v : x) v = std::exp(v - mean_log);
    ++ctx.result.trials;
    const CheckOutcome outcome = check_trace_frobenius(x);
    if (outcome == CheckOutcome::invalid_input) {
      ++ctx.result.invalid;
    } else if (outcome == CheckOutcome::violated) {
      ctx.fail("x = " + describe(Eigen::Map<const Vector>(x.data(), static_cast<Eigen::Index>(d)).transpose()));
    }
  }
  // The guard must reject a vector whose product is not 1.
  const double off[] = {2.0, 2.0, 2.0};
  if (check_trace_frobenius(off) != CheckOutcome::invalid_input) ctx.fail("guard accepted x = [2 2 2]");
}

void suite_trace_frobenius_applied(int count, Rng& rng, SuiteContext& ctx) {
  for (int t = 0; t < count; ++t) {
    const std::size_t d = random_dim(rng, 2, 8);
    const SymMatrix sigma = random_pd(d, rng);
    const Permutation pi = random_permutation(d, rng);
    ++ctx.result.trials;
    const double tl = trace_loss(sigma, pi);
    const double rhs = 4.0 * (tl + tl * tl);

    const SymMatrix inv_sqrt = sym_inv_sqrt(sigma);
    const Matrix a = inv_sqrt.matrix() * perm_apply(sigma, perm_invert(pi)).matrix() * inv_sqrt.matrix() -
                     Matrix::Identity(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
    const SymMatrix root = sym_sqrt(sigma);
    const Matrix b = root.matrix() * perm_apply(sym_inverse(sigma), pi).matrix() * root.matrix() -
                     Matrix::Identity(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
    const double lhs_a = a.squaredNorm();
    const double lhs_b = b.squaredNorm();
    const double slack = 1e-8 * (1.0 + rhs);
    if (lhs_a > rhs + slack || lhs_b > rhs + slack) {
      ctx.fail("sigma = " + describe(sigma.matrix()) + " pi = " + describe(pi));
    }
  }
}

void suite_trace_loss_nonnegative(int count, Rng& rng, SuiteContext& ctx) {
  for (int t = 0; t < count; ++t) {
    const std::size_t d = random_dim(rng, 2, 8);
    const SymMatrix sigma = random_pd(d, rng);
    const Permutation pi = random_permutation(d, rng);
    ++ctx.result.trials;
    const double tl = trace_loss(sigma, pi);
    if (tl < -1e-9) ctx.fail("trace_loss = " + std::to_string(tl) + " for sigma = " + describe(sigma.matrix()));
  }
}

void suite_frobenius_sandwich(int count, Rng& rng, SuiteContext& ctx) {
  for (int t = 0; t < count; ++t) {
    const std::size_t d = random_dim(rng, 1, 8);
    const SymMatrix sigma = random_pd_near_identity(d, rng);
    ++ctx.result.trials;
    const CheckOutcome outcome = check_frobenius_sandwich(sigma);
    if (outcome == CheckOutcome::invalid_input) {
      ++ctx.result.invalid;
    } else if (outcome == CheckOutcome::violated) {
      ctx.fail("sigma = " + describe(sigma.matrix()));
    }
  }
  if (check_frobenius_sandwich(SymMatrix::identity(3)) != CheckOutcome::invalid_input) {
    ctx.fail("guard accepted sigma = I");
  }
}

void suite_quadratic_bound(int count, Rng& rng, SuiteContext& ctx) {
  std::normal_distribution<double> normal(0.0, 2.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int t = 0; t < count; ++t) {
    const double a = std::exp(normal(rng));
    const double b = std::exp(normal(rng));
    const double c = std::exp(normal(rng));
    // Largest admissible x is the positive root of ax² − bx − c.
    const double root = (b + std::sqrt(b * b + 4.0 * a * c)) / (2.0 * a);
    const double x = unit(rng) * root;
    ++ctx.result.trials;
    const CheckOutcome outcome = check_quadratic_bound(a, b, c, x);
    if (outcome == CheckOutcome::invalid_input) {
      ++ctx.result.invalid;
    } else if (outcome == CheckOutcome::violated) {
      std::ostringstream out;
      out.precision(17);
      out << "a=" << a << " b=" << b << " c=" << c << " x=" << x;
      ctx.fail(out.str());
    }
  }
  if (check_quadratic_bound(1.0, 1.0, 1.0, 10.0) != CheckOutcome::invalid_input) {
    ctx.fail("guard accepted a tuple violating the premise");
  }
}

void suite_interior_counterexample(int, Rng&, SuiteContext& ctx) {
  const SymMatrix sigma = SymMatrix::diagonal({1.0, 0.5, 0.5});
  ++ctx.result.trials;
  const double flat = flat_coupling_qmle_value(sigma);
  if (std::abs(flat - 10.0 / 9.0) > 1e-12) ctx.fail("flat coupling value " + std::to_string(flat));
  const SearchReport best = exhaustive_search(sym_inverse(sigma), sigma, Sense::minimize);
  if (std::abs(best.objective - 3.0) > 1e-12) ctx.fail("permutation minimum " + std::to_string(best.objective));
  if (!(flat < best.objective)) ctx.fail("flat coupling does not beat every permutation");
}

void suite_hard_prior(int count, Rng& rng, SuiteContext& ctx) {
  constexpr double c1 = 3.0;
  constexpr double c2 = 0.05;
  for (std::size_t d : {16u, 32u, 64u}) {
    const double dd = static_cast<double>(d);
    const double limit = c1 * std::sqrt(dd);
    const double eta = hard_eta(d, 1.0, 1.0, c1, 0.5);  // clamps to the top of the range
    int accepted = 0;
    std::vector<SymMatrix> kept;
    for (int t = 0; t < count; ++t) {
      const SymMatrix s = rademacher_symmetric(d, rng);
      ++ctx.result.trials;
      if (s.matrix().squaredNorm() != dd * dd) ctx.fail("||S||_F^2 != d^2 at d = " + std::to_string(d));
      if (operator_norm(s) > limit) continue;
      ++accepted;
      const SymMatrix sigma = (SymMatrix::identity(d) + s * eta) * 0.5;
      if (operator_norm(sigma) > 1.0 + 1e-10) ctx.fail("||Sigma||_op > 1 at d = " + std::to_string(d));
      if (kept.size() < 4) kept.push_back(s);
    }
    if (2 * accepted < count) {
      ctx.fail("acceptance " + std::to_string(accepted) + "/" + std::to_string(count) + " at d = " +
               std::to_string(d));
    }
    if (d < 32 || kept.empty()) continue;
    // Property 3 on pairs at the hamming boundary (a single k-cycle) and on
    // unconstrained random pairs.
    const int k = static_cast<int>(std::ceil(dd / 10.0));
    for (int pair = 0; pair < 100; ++pair) {
      const SymMatrix& s = kept[static_cast<std::size_t>(pair) % kept.size()];
      const Permutation p1 = random_permutation(d, rng);
      Permutation p2;
      if (pair % 2 == 0) {
        const Permutation shuffle = random_permutation(d, rng);
        std::vector<int> cycle(p1.map());
        // Rotate p1's values along the first k positions of a random order.
        for (int i = 0; i < k; ++i) {
          cycle[static_cast<std::size_t>(shuffle[static_cast<std::size_t>(i)])] =
              p1[static_cast<std::size_t>(shuffle[static_cast<std::size_t>((i + 1) % k)])];
        }
        p2 = Permutation(std::move(cycle));
      } else {
        p2 = random_permutation(d, rng);
      }
      if (10 * hamming_loss(p1, p2) < static_cast<int>(d)) continue;
      const double gap = (perm_apply(s, p1) - perm_apply(s, p2)).matrix().squaredNorm();
      if (gap < c2 * dd * dd) ctx.fail("property 3 gap " + std::to_string(gap) + " at d = " + std::to_string(d));
    }
  }
}

void suite_permutation_algebra(int count, Rng& rng, SuiteContext& ctx) {
  for (int t = 0; t < count; ++t) {
    const std::size_t d = random_dim(rng, 1, 8);
    const SymMatrix a = random_symmetric(d, rng);
    const Permutation p1 = random_permutation(d, rng);
    const Permutation p2 = random_permutation(d, rng);
    ++ctx.result.trials;
    const Matrix m1 = p1.matrix();
    if (perm_apply(a, p1).matrix() != Matrix(m1 * a.matrix() * m1.transpose())) {
      ctx.fail("perm_apply != P A P^T for pi = " + describe(p1));
    }
    if (Matrix(m1.transpose()) != perm_invert(p1).matrix()) ctx.fail("P^-1 != P_{pi^-1} for " + describe(p1));
    if (Matrix(m1 * p2.matrix()) != perm_compose(p2, p1).matrix()) {
      ctx.fail("P1 P2 != P_{p2 o p1} for " + describe(p1) + ", " + describe(p2));
    }
    if (perm_apply(perm_apply(a, p1), p2) != perm_apply(a, perm_compose(p1, p2))) {
      ctx.fail("(A^p1)^p2 != A^(p1 o p2)");
    }
    const double fa = frobenius_norm(a);
    if (std::abs(frobenius_norm(perm_apply(a, p1)) - fa) > 1e-14 * (1.0 + fa)) {
      ctx.fail("Frobenius norm not permutation invariant");
    }
  }
}

void suite_inverse_commutation(int count, Rng& rng, SuiteContext& ctx) {
  for (int t = 0; t < count; ++t) {
    const std::size_t d = random_dim(rng, 2, 8);
    const SymMatrix a = random_pd(d, rng);
    const Permutation pi = random_permutation(d, rng);
    ++ctx.result.trials;
    const Matrix lhs = sym_inverse(perm_apply(a, pi)).matrix();
    const Matrix rhs = perm_apply(sym_inverse(a), pi).matrix();
    if (max_abs_diff(lhs, rhs) > 1e-9 * (1.0 + rhs.cwiseAbs().maxCoeff())) {
      ctx.fail("inverse does not commute with pi = " + describe(pi));
    }
  }
}

void suite_uniform_permutation(int count, Rng& rng, SuiteContext& ctx) {
  std::map<std::vector<int>, int> freq;
  for (int t = 0; t < count; ++t) ++freq[random_permutation(4, rng).map()];
  ctx.result.trials = count;
  // Missing some permutation has probability ≤ 24·(23/24)^count; only
  // demand full coverage once that is negligible.
  if (count >= 1000 && freq.size() != 24) ctx.fail("only " + std::to_string(freq.size()) + " of 24 permutations drawn");
  const double p = 1.0 / 24.0;
  const double mean = count * p;
  const double sd = std::sqrt(count * p * (1.0 - p));
  for (const auto& [perm, hits] : freq) {
    if (std::abs(hits - mean) > 5.0 * sd) {
      ctx.fail(describe(Permutation(perm)) + " drawn " + std::to_string(hits) + " times");
    }
  }
}

double brute_force_lap(const Matrix& m) {
  std::vector<int> p(static_cast<std::size_t>(m.rows()));
  std::iota(p.begin(), p.end(), 0);
  double best = -std::numeric_limits<double>::infinity();
  do {
    double v = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) v += m(static_cast<Eigen::Index>(i), p[i]);
    best = std::max(best, v);
  } while (std::next_permutation(p.begin(), p.end()));
  return best;
}

void suite_lap(int count, Rng& rng, SuiteContext& ctx) {
  for (int t = 0; t < count; ++t) {
    const std::size_t d = random_dim(rng, 1, 7);
    const Matrix m = gaussian_matrix(d, d, rng);
    ++ctx.result.trials;
    const AssignmentResult result = lap_max(m);
    const double best = brute_force_lap(m);
    if (std::abs(result.value - best) > 1e-12 * (1.0 + std::abs(best))) ctx.fail("lap_max suboptimal on " + describe(m));
    const Matrix shifted = (m.array() + 3.25).matrix();
    if (lap_max(shifted).permutation != result.permutation) ctx.fail("lap_max not shift invariant on " + describe(m));
  }
}

void suite_sinkhorn(int count, Rng& rng, SuiteContext& ctx) {
  std::uniform_real_distribution<double> scale(0.1, 50.0);
  for (int t = 0; t < count; ++t) {
    const std::size_t d = random_dim(rng, 1, 8);
    const Matrix k = scale(rng) * gaussian_matrix(d, d, rng);
    ++ctx.result.trials;
    try {
      const Coupling p = sinkhorn_project(k);
      if (!(p.marginal_deviation() <= 1e-8)) ctx.fail("marginal deviation " + std::to_string(p.marginal_deviation()));
    } catch (const Error& e) {
      ctx.fail(e.what());
    }
  }
}

void suite_loss_crosscheck(int count, Rng& rng, SuiteContext& ctx) {
  for (int t = 0; t < count; ++t) {
    const std::size_t d = random_dim(rng, 2, 8);
    const SymMatrix sigma = random_pd(d, rng);
    const Permutation est = random_permutation(d, rng);
    const Permutation truth = random_permutation(d, rng);
    ++ctx.result.trials;
    const Matrix pe = est.matrix();
    const Matrix pt = truth.matrix();
    const Matrix diff = pe * sigma.matrix() * pe.transpose() - pt * sigma.matrix() * pt.transpose();
    const double explicit_loss = diff.norm();
    if (std::abs(frob_loss(sigma, est, truth) - explicit_loss) > 1e-12 * (1.0 + explicit_loss)) {
      ctx.fail("frob_loss disagrees with explicit P matrices");
    }
  }
}

void suite_search_rescaling(int count, Rng& rng, SuiteContext& ctx) {
  std::uniform_real_distribution<double> scale(0.01, 100.0);
  for (int t = 0; t < count; ++t) {
    const std::size_t d = random_dim(rng, 3, 10);
    const SymMatrix m = random_pd(d, rng);
    const SymMatrix b = random_pd(d, rng);
    const double c = scale(rng);
    const Sense sense = t % 2 ? Sense::maximize : Sense::minimize;
    SearchOptions opts;
    opts.restarts = 4;
    opts.seed = static_cast<std::uint64_t>(t);
    ++ctx.result.trials;
    const Permutation base = local_search(m, b, sense, opts).permutation;
    const Permutation scaled = local_search(m, b * c, sense, opts).permutation;
    if (base != scaled) ctx.fail("local_search argument changed under B <- " + std::to_string(c) + " B");
  }
}

void suite_spectral(int count, Rng& rng, SuiteContext& ctx) {
  for (int t = 0; t < count; ++t) {
    const std::size_t d = random_dim(rng, 2, 12);
    const SymMatrix x = random_pd(d, rng);
    const SymMatrix y = perm_apply(x, random_permutation(d, rng));
    ++ctx.result.trials;
    const Permutation est = spectral_estimate(x, y);
    if (!Permutation::is_valid(est.map()) || est.size() != d) ctx.fail("spectral estimate is not a permutation");
  }
}

const std::vector<Suite>& suites() {
  static const std::vector<Suite> all = {
      {"trace-frobenius", 100000, suite_trace_frobenius},
      {"trace-frobenius-applied", 10000, suite_trace_frobenius_applied},
      {"trace-loss-nonnegative", 10000, suite_trace_loss_nonnegative},
      {"frobenius-inverse-sandwich", 10000, suite_frobenius_sandwich},
      {"quadratic-bound", 10000, suite_quadratic_bound},
      {"interior-counterexample", 1, suite_interior_counterexample},
      {"hard-prior", 200, suite_hard_prior},
      {"permutation-algebra", 10000, suite_permutation_algebra},
      {"inverse-commutation", 10000, suite_inverse_commutation},
      {"uniform-permutation", 100000, suite_uniform_permutation},
      {"lap-brute-force", 200, suite_lap},
      {"sinkhorn-marginals", 1000, suite_sinkhorn},
      {"loss-crosscheck", 10000, suite_loss_crosscheck},
      {"search-rescaling", 200, suite_search_rescaling},
      {"spectral-validity", 1000, suite_spectral},
  };
  return all;
}

}  // namespace

VerifyCounts default_verify_counts() {
  VerifyCounts counts;
  for (const Suite& s : suites()) counts.emplace(s.name, s.default_count);
  return counts;
}

VerificationReport verify_lemmas(std::uint64_t seed, const VerifyCounts& counts) {
  const auto& all = suites();
  for (const auto& [name, count] : counts) {
    const bool known = std::any_of(all.begin(), all.end(), [&](const Suite& s) { return name == s.name; });
    if (!known) throw Error(ErrorKind::InvalidArgument, "unknown lemma suite '" + name + "'");
    if (count < 1) throw Error(ErrorKind::InvalidArgument, "suite '" + name + "' needs a count >= 1");
  }
  VerificationReport report;
  for (std::size_t i = 0; i < all.size(); ++i) {
    const auto it = counts.find(all[i].name);
    if (it == counts.end()) continue;
    SuiteResult result;
    result.name = all[i].name;
    Rng rng = make_rng(mix_seed(seed, i));
    SuiteContext ctx{result};
    const auto start = std::chrono::steady_clock::now();
    try {
      all[i].run(it->second, rng, ctx);
    } catch (const std::exception& e) {
      ctx.fail(std::string("exception: ") + e.what());
    }
    result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    result.passed = result.failures == 0;
    report.suites.push_back(std::move(result));
  }
  return report;
}

}  // namespace covalign
