#include <doctest.h>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <covalign/harness.hpp>

#include "support.hpp"

using namespace covalign;
using testing::thrown_kind;

namespace {

std::vector<std::string> read_lines(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::vector<std::string> out;
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

/// CSV row with the runtime column blanked out.
std::string without_runtime(const TrialRecord& r) {
  TrialRecord copy = r;
  copy.runtime_ms = 0;
  return to_csv_row(copy);
}

SweepConfig small_sweep(const std::filesystem::path& out) {
  SweepConfig c;
  c.grid.kinds = {InstanceKind::wishart, InstanceKind::robinson};
  c.grid.dims = {5, 7};
  c.grid.ns = {SampleSize::of(40), SampleSize::exact()};
  c.grid.gammas = {0.5};
  EstimatorConfig gw;
  gw.name = "gw";
  EstimatorConfig sp;
  sp.name = "spectral";
  c.estimators = {gw, sp};
  c.replicates = 3;
  c.base_seed = 17;
  c.output = out;
  return c;
}

}  // namespace

TEST_SUITE("harness") {

TEST_CASE("estimator names") {
  for (const char* name : kEstimatorNames) CHECK(is_known_estimator(name));
  CHECK_FALSE(is_known_estimator("qmle"));
}

TEST_CASE("gw-exhaustive recovers exact Robinson") {
  InstanceSpec spec;
  spec.kind = InstanceKind::robinson;
  spec.d = 5;
  spec.seed = 4;
  EstimatorConfig e;
  e.name = "gw-exhaustive";
  const TrialRecord r = run_trial(make_instance(spec), e);
  CHECK(r.ok());
  CHECK(r.frob_loss_sq == 0);
  CHECK(r.hamming == 0);
  CHECK(r.relative_loss == 0);
}

TEST_CASE("identity covariance has zero loss whatever the estimate") {
  AlignmentInstance inst;
  inst.sigma = SymMatrix::identity(6);
  inst.pi_star = Permutation::identity(6);
  inst.sigma_hat_x = inst.sigma;
  inst.sigma_hat_y = inst.sigma;
  for (const char* name : kEstimatorNames) {
    EstimatorConfig e;
    e.name = name;
    const TrialRecord r = run_trial(inst, e);
    CHECK(r.ok());
    CHECK(r.frob_loss_sq == 0);
    CHECK(r.nf_loss_sq == 0);
  }
}

TEST_CASE("records are deterministic apart from timing") {
  InstanceSpec spec;
  spec.kind = InstanceKind::wishart;
  spec.d = 12;
  spec.m = SampleSize::of(100);
  spec.n = SampleSize::of(100);
  spec.seed = 99;
  for (const char* name : {"gw", "qmle-local", "spectral"}) {
    EstimatorConfig e;
    e.name = name;
    const TrialRecord a = run_trial(make_instance(spec), e);
    const TrialRecord b = run_trial(make_instance(spec), e);
    CHECK(without_runtime(a) == without_runtime(b));
    CHECK(a.estimate == b.estimate);
  }
}

TEST_CASE("losses agree with the model functions") {
  InstanceSpec spec;
  spec.kind = InstanceKind::wishart;
  spec.d = 9;
  spec.m = SampleSize::of(30);
  spec.n = SampleSize::of(30);
  spec.seed = 5;
  const AlignmentInstance inst = make_instance(spec);
  EstimatorConfig e;
  e.name = "spectral";
  const TrialRecord r = run_trial(inst, e);
  const double f = frob_loss(inst.sigma, r.estimate, inst.pi_star);
  CHECK(r.frob_loss_sq == doctest::Approx(f * f).epsilon(1e-14));
  CHECK(r.relative_loss == doctest::Approx(f * f / inner(inst.sigma, inst.sigma)).epsilon(1e-14));
  CHECK(r.hamming == hamming_loss(r.estimate, inst.pi_star));
  CHECK(r.d == 9);
  CHECK(r.m == SampleSize::of(30));
  CHECK(r.seed == 5);
}

TEST_CASE("failures become records") {
  InstanceSpec spec;
  spec.kind = InstanceKind::wishart;
  spec.d = 8;
  spec.m = SampleSize::of(3);
  spec.n = SampleSize::of(3);
  spec.seed = 1;
  EstimatorConfig e;
  e.name = "qmle-local";
  const TrialRecord r = run_trial(make_instance(spec), e);
  CHECK(r.status == "NotPositiveDefinite");
  CHECK_FALSE(r.ok());
  CHECK(std::isnan(r.frob_loss_sq));
  CHECK(r.hamming == -1);
  CHECK_FALSE(r.error.empty());

  e.name = "bogus";
  CHECK(run_trial(make_instance(spec), e).status == "InvalidArgument");
}

TEST_CASE("csv rows round trip") {
  InstanceSpec spec;
  spec.kind = InstanceKind::robinson;
  spec.d = 6;
  spec.gamma = 0.3;
  spec.m = SampleSize::exact();
  spec.n = SampleSize::of(50);
  spec.seed = 0xFFFFFFFFFFFFFFF0ULL;
  EstimatorConfig e;
  e.name = "gw";
  const TrialRecord r = run_trial(make_instance(spec), e);
  const std::string row = to_csv_row(r);
  const TrialRecord back = parse_csv_row(row);
  CHECK(to_csv_row(back) == row);
  CHECK(back.seed == spec.seed);
  CHECK(back.m.is_exact());
  CHECK(back.frob_loss_sq == r.frob_loss_sq);
  CHECK(back.epsilon == r.epsilon);

  const std::string_view header = kResultsHeader;
  CHECK(std::count(header.begin(), header.end(), ',') == std::count(row.begin(), row.end(), ','));
  CHECK(thrown_kind([] { parse_csv_row("gw,3,exact"); }) == ErrorKind::FileFormat);
  CHECK(thrown_kind([&] { parse_csv_row(row.substr(0, row.size() - 3) + "x,y"); }) == ErrorKind::FileFormat);
}

TEST_CASE("aggregate") {
  TrialRecord a;
  a.frob_loss_sq = 1.0;
  a.relative_loss = 0.1;
  TrialRecord b;
  b.frob_loss_sq = 3.0;
  b.relative_loss = 0.3;
  TrialRecord bad;
  bad.status = "SinkhornStall";
  bad.frob_loss_sq = NAN;
  const std::vector<TrialRecord> recs{a, b, bad};
  const CellAggregate g = aggregate(recs);
  CHECK(g.mean == 2.0);
  CHECK(g.median == 2.0);
  CHECK(g.count == 2);
  CHECK(g.failures == 1);
  CHECK(g.stderr_mean == doctest::Approx(1.0));
  CHECK(g.mean_relative == doctest::Approx(0.2));
}

TEST_CASE("grid expansion") {
  SweepConfig c = small_sweep("unused.csv");
  c.grid.gammas = {0.2, 0.8};
  const std::vector<SweepCell> cells = expand_grid(c);
  // wishart: 2 d × 2 n; robinson: 2 d × 2 n × 2 gamma.
  CHECK(cells.size() == 12);
  for (std::size_t i = 0; i < cells.size(); ++i) CHECK(cells[i].index == i);
  for (const SweepCell& cell : cells) CHECK(cell.spec.m == cell.spec.n);
}

TEST_CASE("one cell, one replicate") {
  const auto dir = testing::scratch_dir("sweep1");
  SweepConfig c;
  c.grid.dims = {4};
  c.grid.ns = {SampleSize::of(20)};
  c.estimators = {EstimatorConfig{}};
  c.output = dir / "out.csv";
  const SweepResult r = run_sweep(c);
  CHECK(r.records.size() == 1);
  CHECK(r.aggregates.size() == 1);
  const auto lines = read_lines(c.output);
  REQUIRE(lines.size() == 2);
  CHECK(lines[0] == kResultsHeader);
  std::filesystem::remove_all(dir);
}

TEST_CASE("sweep output does not depend on the job count") {
  const auto dir = testing::scratch_dir("jobs");
  SweepConfig one = small_sweep(dir / "one.csv");
  one.jobs = 1;
  SweepConfig many = small_sweep(dir / "many.csv");
  many.jobs = 4;
  const SweepResult a = run_sweep(one);
  const SweepResult b = run_sweep(many);
  REQUIRE(a.records.size() == 2 * 2 * 2 * 2 * 3);
  REQUIRE(a.records.size() == b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) CHECK(without_runtime(a.records[i]) == without_runtime(b.records[i]));
  REQUIRE(a.aggregates.size() == b.aggregates.size());
  for (std::size_t i = 0; i < a.aggregates.size(); ++i) CHECK(a.aggregates[i].mean == b.aggregates[i].mean);

  std::ostringstream sa, sb;
  write_summary_csv(sa, a.aggregates);
  write_summary_csv(sb, b.aggregates);
  CHECK(sa.str() == sb.str());
  std::filesystem::remove_all(dir);
}

TEST_CASE("resuming a truncated results file") {
  const auto dir = testing::scratch_dir("resume");
  const SweepConfig full = small_sweep(dir / "full.csv");
  const SweepResult reference = run_sweep(full);
  const auto full_lines = read_lines(full.output);
  REQUIRE(full_lines.size() == reference.records.size() + 1);

  // Header, five complete rows, then half of the sixth without a newline.
  const std::filesystem::path partial = dir / "partial.csv";
  {
    std::ofstream out(partial);
    for (std::size_t i = 0; i < 6; ++i) out << full_lines[i] << '\n';
    out << full_lines[6].substr(0, full_lines[6].size() / 2);
  }
  SweepConfig resumed_cfg = small_sweep(partial);
  const SweepResult resumed = run_sweep(resumed_cfg);
  CHECK(resumed.resumed == 5);
  REQUIRE(resumed.records.size() == reference.records.size());
  for (std::size_t i = 0; i < resumed.records.size(); ++i) {
    CHECK(without_runtime(resumed.records[i]) == without_runtime(reference.records[i]));
  }

  const auto lines = read_lines(partial);
  CHECK(lines.size() == full_lines.size());
  std::set<std::string> keys;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const TrialRecord r = parse_csv_row(lines[i]);
    keys.insert(r.estimator + "|" + std::to_string(r.d) + "|" + r.n.to_string() + "|" + std::to_string(r.seed));
  }
  CHECK(keys.size() == lines.size() - 1);

  // A second resume finds everything done.
  CHECK(run_sweep(resumed_cfg).resumed == static_cast<int>(reference.records.size()));
  std::filesystem::remove_all(dir);
}

TEST_CASE("foreign header is refused") {
  const auto dir = testing::scratch_dir("header");
  {
    std::ofstream out(dir / "x.csv");
    out << "something,else\n";
  }
  const SweepConfig c = small_sweep(dir / "x.csv");
  CHECK(thrown_kind([&] { run_sweep(c); }) == ErrorKind::FileFormat);
  std::filesystem::remove_all(dir);
}

TEST_CASE("sweep config parsing") {
  const SweepConfig c = parse_sweep_config(R"({
    "grid": {"kind": ["wishart", "robinson"], "d": [8, 16], "n": [100, "exact"], "m": "n",
             "gamma": [0.1, 0.5], "normalize": "opnorm"},
    "estimators": ["spectral", {"name": "gw", "epsilon": 0.001, "anneal": true}],
    "replicates": 4, "base_seed": 12, "jobs": 2, "output": "r.csv"})");
  CHECK(c.grid.kinds.size() == 2);
  CHECK(c.grid.dims == std::vector<std::size_t>{8, 16});
  CHECK(c.grid.ns[1].is_exact());
  CHECK(c.grid.m_equals_n);
  CHECK(c.grid.normalize == Normalization::opnorm);
  REQUIRE(c.estimators.size() == 2);
  CHECK(c.estimators[1].gw.epsilon.value() == 0.001);
  CHECK(c.estimators[1].gw.anneal);
  CHECK(c.replicates == 4);
  CHECK(c.base_seed == 12);
  CHECK(c.jobs == 2);
  CHECK(c.output == "r.csv");

  const SweepConfig scalar = parse_sweep_config(R"({"grid": {"d": 5, "n": 20, "m": [10, 40]}, "estimators": "gw"})");
  CHECK_FALSE(scalar.grid.m_equals_n);
  CHECK(scalar.grid.ms.size() == 2);
}

TEST_CASE("sweep config errors name the offending path") {
  auto message = [](const char* text) {
    try {
      parse_sweep_config(text);
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::InvalidArgument);
      return std::string(e.what());
    }
    return std::string("no error");
  };
  CHECK(message("{not json").find("/: malformed JSON") != std::string::npos);
  CHECK(message(R"({"grid": {"d": [8]}, "estimators": ["gw"]})").find("/grid/n") != std::string::npos);
  CHECK(message(R"({"grid": {"d": [8, 1], "n": [10]}, "estimators": ["gw"]})").find("/grid/d/1") !=
        std::string::npos);
  CHECK(message(R"({"grid": {"d": [8], "n": [10]}, "estimators": ["nope"]})").find("/estimators/0") !=
        std::string::npos);
  CHECK(message(R"({"grid": {"d": [8], "n": [10]}, "estimators": ["gw"], "replicates": 0})").find("/replicates") !=
        std::string::npos);
  CHECK(message(R"({"grid": {"d": [8], "n": ["lots"]}, "estimators": ["gw"]})").find("/grid/n/0") !=
        std::string::npos);
  CHECK(message(R"({"grid": {"d": [8], "n": [10]}, "estimators": ["gw", {"name": "qmle-local", "restarts": 0}]})")
            .find("/estimators/1/restarts") != std::string::npos);
  CHECK(message(R"({"grid": {"d": [8], "n": [10]}, "estimators": [{"name": "gw", "anneal": "yes"}]})")
            .find("/estimators/0/anneal") != std::string::npos);
}

TEST_CASE("threshold search") {
  ThresholdConfig cfg;
  cfg.estimator.name = "gw";
  cfg.n_min = 10;
  cfg.base_seed = 3;

  const ThresholdResult trivial = threshold_search(8, "gw", 1.0, 3, cfg);
  CHECK(trivial.n_star == 10);
  CHECK(trivial.probes.size() == 1);

  const ThresholdResult loose = threshold_search(8, "gw", 0.3, 3, cfg);
  const ThresholdResult tight = threshold_search(8, "gw", 0.1, 3, cfg);
  CHECK(tight.n_star >= loose.n_star);
  CHECK(tight.probes.at(tight.n_star) <= 0.1);
  CHECK(loose.max_marginal_deviation <= 1e-8);

  // Same seeds at the same n give the same loss.
  CHECK(mean_relative_loss(8, tight.n_star, 3, cfg) == tight.probes.at(tight.n_star));

  cfg.n_cap = 12;
  CHECK(thrown_kind([&] { threshold_search(8, "gw", 1e-9, 2, cfg); }) == ErrorKind::BudgetExceeded);
  CHECK(thrown_kind([&] { threshold_search(8, "gw", 0.0, 2, cfg); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("swapping the samples leaves the loss distribution alone") {
  // Running GW on (Y, X) estimates π*⁻¹ on the relabeled covariance Σ^{π*}.
  double sum_fwd = 0, sum_bwd = 0, sq_fwd = 0, sq_bwd = 0;
  const int reps = 40;
  for (int r = 0; r < reps; ++r) {
    InstanceSpec spec;
    spec.kind = InstanceKind::wishart;
    spec.d = 10;
    spec.m = SampleSize::of(60);
    spec.n = SampleSize::of(60);
    spec.seed = mix_seed(8, static_cast<std::uint64_t>(r));
    const AlignmentInstance inst = make_instance(spec);
    AlignmentInstance swapped = inst;
    swapped.sigma = perm_apply(inst.sigma, inst.pi_star);
    swapped.pi_star = perm_invert(inst.pi_star);
    std::swap(swapped.sigma_hat_x, swapped.sigma_hat_y);
    EstimatorConfig e;
    const double f = run_trial(inst, e).relative_loss;
    const double b = run_trial(swapped, e).relative_loss;
    sum_fwd += f;
    sum_bwd += b;
    sq_fwd += f * f;
    sq_bwd += b * b;
  }
  const double mf = sum_fwd / reps, mb = sum_bwd / reps;
  const double se = std::sqrt((sq_fwd / reps - mf * mf + sq_bwd / reps - mb * mb) / reps);
  CHECK(std::abs(mf - mb) <= 4 * se + 1e-12);
}

TEST_CASE("parallel_for covers every index once") {
  std::vector<int> hits(1000, 0);
  parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i] += 1; });
  CHECK(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }));
}

}  // TEST_SUITE
