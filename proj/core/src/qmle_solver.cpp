#include "covalign/qmle_solver.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "covalign/error.hpp"
#include "covalign/model.hpp"
#include "covalign/rng.hpp"

namespace covalign {

namespace {

double gain(double delta, Sense sense) { return sense == Sense::maximize ? delta : -delta; }

bool better(double candidate, double incumbent, Sense sense, double slack) {
  return gain(candidate - incumbent, sense) > slack;
}

double slack_for(double objective) { return 1e-12 * (1.0 + std::abs(objective)); }

void require_square_pair(const SymMatrix& m, const SymMatrix& b) {
  if (m.dim() != b.dim()) {
    throw Error(ErrorKind::DimensionMismatch, "search operands differ in dimension");
  }
}

}  // namespace

SearchReport exhaustive_search(const SymMatrix& m, const SymMatrix& b, Sense sense) {
  require_square_pair(m, b);
  const std::size_t d = m.dim();
  if (d > kMaxExhaustiveDim) {
    throw Error(ErrorKind::DimensionTooLarge,
                "exhaustive search limited to d <= 9, got d = " + std::to_string(d));
  }
  std::vector<int> map(d);
  std::iota(map.begin(), map.end(), 0);

  SearchReport report;
  report.permutation = Permutation(map);
  report.objective = qap_objective(m, b, report.permutation);
  report.evaluations = 1;
  report.restarts_used = 1;
  while (std::next_permutation(map.begin(), map.end())) {
    const Permutation pi(map);
    const double value = qap_objective(m, b, pi);
    ++report.evaluations;
    if (better(value, report.objective, sense, slack_for(report.objective))) {
      report.objective = value;
      report.permutation = pi;
    }
  }
  return report;
}

SearchReport climb_from(const SymMatrix& m, const SymMatrix& b, Sense sense, Permutation start,
                        int max_sweeps) {
  require_square_pair(m, b);
  if (start.size() != m.dim()) {
    throw Error(ErrorKind::DimensionMismatch, "start permutation has wrong length");
  }
  const std::size_t d = m.dim();
  std::vector<int> map = start.map();
  Permutation current = std::move(start);
  double objective = qap_objective(m, b, current);

  SearchReport report;
  report.evaluations = 1;
  report.restarts_used = 1;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double best_gain = 0.0;
    std::size_t best_r = 0, best_s = 0;
    for (std::size_t r = 0; r + 1 < d; ++r) {
      for (std::size_t s = r + 1; s < d; ++s) {
        const double g = gain(qap_swap_delta(m, b, current, r, s), sense);
        if (g > best_gain) {
          best_gain = g;
          best_r = r;
          best_s = s;
        }
      }
    }
    report.evaluations += d * (d - 1) / 2;
    report.sweeps = sweep + 1;
    if (!(best_gain > slack_for(objective))) break;
    std::swap(map[best_r], map[best_s]);
    current = Permutation(map);
    objective += sense == Sense::maximize ? best_gain : -best_gain;
  }
  report.objective = qap_objective(m, b, current);
  report.permutation = std::move(current);
  return report;
}

SearchReport local_search(const SymMatrix& m, const SymMatrix& b, Sense sense, const SearchOptions& opts) {
  require_square_pair(m, b);
  const std::size_t d = m.dim();
  if (opts.restarts < 1 || opts.max_sweeps < 0) {
    throw Error(ErrorKind::InvalidArgument, "local search needs restarts >= 1 and max_sweeps >= 0");
  }
  const int restarts = opts.restarts;

  SearchReport best;
  std::uint64_t evaluations = 0;
  for (int k = 0; k < restarts; ++k) {
    Permutation start = Permutation::identity(d);
    if (k > 0) {
      Rng rng = make_rng(mix_seed(opts.seed, static_cast<std::uint64_t>(k)));
      start = random_permutation(d, rng);
    }
    SearchReport run = climb_from(m, b, sense, std::move(start), opts.max_sweeps);
    evaluations += run.evaluations;
    const bool take = k == 0 || better(run.objective, best.objective, sense, slack_for(best.objective)) ||
                      (!better(best.objective, run.objective, sense, slack_for(run.objective)) &&
                       run.permutation < best.permutation);
    if (take) best = std::move(run);
  }
  best.evaluations = evaluations;
  best.restarts_used = restarts;
  return best;
}

SearchReport qmle_estimate(const SymMatrix& sigma_x, const SymMatrix& sigma_y, const SearchOptions& opts) {
  require_square_pair(sigma_x, sigma_y);
  if (opts.ridge < 0.0) throw Error(ErrorKind::InvalidArgument, "ridge must be nonnegative");
  const SymMatrix regularized = sigma_x.with_ridge(opts.ridge);
  SymMatrix precision;
  try {
    precision = sym_inverse(regularized);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::NotPositiveDefinite) throw;
    throw Error(ErrorKind::NotPositiveDefinite,
                "sigma_x + ridge*I is not invertible (fewer samples than features?); set ridge > 0");
  }
  const EigenDecomposition eig = sym_eigen(regularized);

  SearchReport report = opts.mode == SearchMode::exhaustive
                            ? exhaustive_search(precision, sigma_y, Sense::minimize)
                            : local_search(precision, sigma_y, Sense::minimize, opts);
  report.condition_number = eig.values(eig.values.size() - 1) / eig.values(0);
  return report;
}

}  // namespace covalign
