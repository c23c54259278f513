#include "cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "covalign/error.hpp"
#include "covalign/harness.hpp"
#include "covalign/instances.hpp"
#include "covalign/lemmas.hpp"
#include "covalign/matrix_io.hpp"
#include "json.hpp"

namespace covalign::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

// Thrown for problems that map to exit code 2 (I/O, parse, bad values).
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::uint64_t effective_seed(std::uint64_t flag) {
  if (const char* env = std::getenv("COVALIGN_SEED"); env && *env) {
    try {
      std::size_t used = 0;
      const unsigned long long v = std::stoull(env, &used);
      if (used == std::string(env).size()) return v;
    } catch (const std::exception&) {
    }
    throw UsageError("COVALIGN_SEED is not an unsigned integer: '" + std::string(env) + "'");
  }
  return flag;
}

SymMatrix load_matrix(const std::string& path) {
  try {
    return read_matrix_csv(fs::path(path));
  } catch (const Error& e) {
    throw UsageError(path + ": " + e.what());
  }
}

json load_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw UsageError(path.string() + ": " + e.what());
  }
}

json sample_size_json(const SampleSize& s) {
  if (s.is_exact()) return "exact";
  return s.count();
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw UsageError("cannot write " + path.string());
  out << text;
  if (!out) throw UsageError("write failed for " + path.string());
}

// ---------------------------------------------------------------------------

struct SimulateArgs {
  std::string kind;
  std::size_t d = 0;
  double gamma = 0.5;
  std::string m;
  std::string n = "exact";
  std::string normalize = "none";
  double c1 = 3.0;
  double c5 = 0.5;
  std::uint64_t seed = 0;
  std::string out;
};

int cmd_simulate(const SimulateArgs& a, std::ostream& out, std::ostream& err) {
  InstanceSpec spec;
  try {
    spec.kind = parse_instance_kind(a.kind);
    spec.n = SampleSize::parse(a.n);
    spec.m = a.m.empty() ? spec.n : SampleSize::parse(a.m);
    spec.normalize = parse_normalization(a.normalize);
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  spec.d = a.d;
  spec.gamma = a.gamma;
  spec.c1 = a.c1;
  spec.c5 = a.c5;
  spec.seed = effective_seed(a.seed);

  AlignmentInstance inst;
  try {
    inst = make_instance(spec);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }

  const fs::path dir(a.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw UsageError("cannot create " + dir.string() + ": " + ec.message());
  auto csv = [](const SymMatrix& m) {
    std::ostringstream s;
    write_matrix_csv(s, m);
    return s.str();
  };
  write_file(dir / "sigma.csv", csv(inst.sigma));
  write_file(dir / "sigma_hat_x.csv", csv(inst.sigma_hat_x));
  write_file(dir / "sigma_hat_y.csv", csv(inst.sigma_hat_y));

  json meta = {
      {"kind", std::string(to_string(spec.kind))},
      {"d", spec.d},
      {"gamma", spec.gamma},
      {"m", sample_size_json(spec.m)},
      {"n", sample_size_json(spec.n)},
      {"normalize", std::string(to_string(spec.normalize))},
      {"c1", spec.c1},
      {"c5", spec.c5},
      {"seed", spec.seed},
      {"pi_star", inst.pi_star.map()},
      {"sigma", "sigma.csv"},
      {"version", kVersion},
  };
  write_file(dir / "meta.json", meta.dump(2) + "\n");
  out << (dir / "meta.json").string() << '\n';
  return 0;
}

// ---------------------------------------------------------------------------

struct AlignArgs {
  std::string x;
  std::string y;
  std::string estimator = "gw";
  std::optional<double> eps;
  bool anneal = false;
  double ridge = 0.0;
  int restarts = 16;
  bool exhaustive = false;
  bool one_sided = false;
  std::uint64_t seed = 0;
  std::string truth;
};

struct Truth {
  SymMatrix sigma;
  Permutation pi_star;
};

Truth load_truth(const std::string& meta_path, std::size_t d) {
  const fs::path path(meta_path);
  const json meta = load_json(path);
  Truth t;
  try {
    t.pi_star = Permutation(meta.at("pi_star").get<std::vector<int>>());
    const fs::path sigma = path.parent_path() / meta.at("sigma").get<std::string>();
    t.sigma = load_matrix(sigma.string());
  } catch (const json::exception& e) {
    throw UsageError(meta_path + ": " + e.what());
  } catch (const Error& e) {
    throw UsageError(meta_path + ": " + e.what());
  }
  if (t.pi_star.size() != d || t.sigma.dim() != d) {
    throw UsageError(meta_path + ": ground truth dimension does not match the inputs");
  }
  return t;
}

int cmd_align(const AlignArgs& a, std::ostream& out) {
  const SymMatrix x = load_matrix(a.x);
  const SymMatrix y = load_matrix(a.y);
  if (x.dim() != y.dim()) throw UsageError("--x and --y have different dimensions");
  std::optional<Truth> truth;
  if (!a.truth.empty()) truth = load_truth(a.truth, x.dim());

  EstimatorConfig cfg;
  if (a.estimator == "gw") {
    cfg.name = "gw";
  } else if (a.estimator == "qmle") {
    cfg.name = a.exhaustive ? "qmle-exhaustive" : "qmle-local";
  } else {
    cfg.name = "spectral";
  }
  cfg.gw.epsilon = a.eps;
  cfg.gw.anneal = a.anneal;
  cfg.search.ridge = a.ridge;
  cfg.search.restarts = a.restarts;
  cfg.search.seed = effective_seed(a.seed);
  cfg.spectral = a.one_sided ? SpectralVariant::one_sided : SpectralVariant::two_sided;

  TrialRecord rec = run_estimator(x, y, cfg);
  if (!rec.ok()) {
    const json doc = {{"error", {{"kind", rec.status}, {"message", rec.error}}}};
    out << doc.dump() << '\n';
    return kExitFailure;
  }

  json doc = {
      {"estimator", cfg.name},
      {"d", x.dim()},
      {"permutation", rec.estimate.map()},
      {"objective", rec.objective},
      {"diagnostics",
       {{"iterations", rec.iterations}, {"converged", rec.converged}, {"runtime_ms", rec.runtime_ms}}},
      {"version", kVersion},
  };
  if (cfg.name == "gw") doc["diagnostics"]["epsilon"] = rec.epsilon;
  if (truth) {
    score_record(rec, truth->sigma, truth->pi_star);
    doc["losses"] = {{"frobenius_sq", rec.frob_loss_sq}, {"nf_sq", rec.nf_loss_sq}, {"hamming", rec.hamming}};
  }
  out << doc.dump(2) << '\n';
  return 0;
}

// ---------------------------------------------------------------------------

struct SweepArgs {
  std::string config;
  std::string out;
  int jobs = 0;
};

int cmd_sweep(const SweepArgs& a, std::ostream& out, std::ostream& err) {
  std::ifstream in(a.config);
  if (!in) throw UsageError("cannot read " + a.config);
  std::stringstream text;
  text << in.rdbuf();

  SweepConfig config;
  try {
    config = parse_sweep_config(text.str());
  } catch (const Error& e) {
    throw UsageError(a.config + ": " + e.what());
  }
  config.output = a.out;
  if (a.jobs > 0) {
    config.jobs = a.jobs;
  } else {
    config.jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  }
  if (std::getenv("COVALIGN_SEED")) config.base_seed = effective_seed(config.base_seed);
  config.progress = &err;

  SweepResult result;
  try {
    result = run_sweep(config);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::FileFormat || e.kind() == ErrorKind::InvalidArgument) throw UsageError(e.what());
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  write_summary_csv(out, result.aggregates);
  return 0;
}

// ---------------------------------------------------------------------------

VerifyCounts parse_counts(const std::string& text) {
  VerifyCounts counts = default_verify_counts();
  if (text.empty()) return counts;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw UsageError("--counts entries must look like suite=N, got '" + item + "'");
    const std::string name = item.substr(0, eq);
    if (!counts.count(name)) throw UsageError("unknown suite '" + name + "'");
    try {
      std::size_t used = 0;
      const int v = std::stoi(item.substr(eq + 1), &used);
      if (used != item.size() - eq - 1 || v < 1) throw std::invalid_argument("count");
      counts[name] = v;
    } catch (const std::exception&) {
      throw UsageError("count for '" + name + "' must be a positive integer");
    }
  }
  return counts;
}

int cmd_verify(const std::string& counts_text, std::uint64_t seed, std::ostream& out) {
  const VerificationReport report = verify_lemmas(effective_seed(seed), parse_counts(counts_text));
  out << "suite                          trials  failures  invalid  seconds  result\n";
  for (const SuiteResult& s : report.suites) {
    char line[160];
    std::snprintf(line, sizeof line, "%-30s %7d %9d %8d %8.2f  %s\n", s.name.c_str(), s.trials, s.failures, s.invalid,
                  s.seconds, s.passed ? "PASS" : "FAIL");
    out << line;
    if (!s.passed) out << "  counterexample: " << s.counterexample << '\n';
  }
  return report.all_passed() ? 0 : kExitFailure;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Covariance alignment: estimate the feature permutation between two Gaussian samples"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Generate an instance and write its covariances");
  simulate->add_option("--kind", sim.kind, "Ground-truth family")
      ->required()
      ->check(CLI::IsMember({"robinson", "wishart", "hard"}));
  simulate->add_option("--d", sim.d, "Dimension")->required()->check(CLI::Range(2, 100000));
  simulate->add_option("--gamma", sim.gamma, "Robinson decay exponent")->check(CLI::PositiveNumber);
  simulate->add_option("--m", sim.m, "Samples from X (integer or 'exact'; default: same as --n)");
  simulate->add_option("--n", sim.n, "Samples from Y (integer or 'exact')")->capture_default_str();
  simulate->add_option("--normalize", sim.normalize, "Rescaling of Sigma")
      ->check(CLI::IsMember({"none", "opnorm", "trace"}))
      ->capture_default_str();
  simulate->add_option("--c1", sim.c1, "Hard instance: operator-norm constant")->check(CLI::PositiveNumber);
  simulate->add_option("--c5", sim.c5, "Hard instance: perturbation constant")->check(CLI::PositiveNumber);
  simulate->add_option("--seed", sim.seed, "Random seed (COVALIGN_SEED overrides)")->required();
  simulate->add_option("--out", sim.out, "Output directory")->required();

  AlignArgs al;
  auto* align = app.add_subcommand("align", "Estimate the permutation between two covariance files");
  align->add_option("--x", al.x, "CSV covariance of the first sample")->required();
  align->add_option("--y", al.y, "CSV covariance of the second sample")->required();
  align->add_option("--estimator", al.estimator, "Estimator")
      ->check(CLI::IsMember({"gw", "qmle", "spectral"}))
      ->capture_default_str();
  align->add_option("--eps", al.eps, "GW entropic penalty (default 1/d^2)")->check(CLI::PositiveNumber);
  align->add_flag("--anneal", al.anneal, "GW: anneal the penalty geometrically down to --eps");
  align->add_option("--ridge", al.ridge, "QMLE: ridge added to the first covariance")->check(CLI::NonNegativeNumber);
  align->add_option("--restarts", al.restarts, "QMLE: local-search restarts")->check(CLI::Range(1, 1000000));
  align->add_flag("--exhaustive", al.exhaustive, "QMLE: enumerate all permutations (d <= 9)");
  align->add_flag("--one-sided", al.one_sided, "Spectral: sort only the second covariance's Fiedler vector");
  align->add_option("--seed", al.seed, "QMLE restart seed (COVALIGN_SEED overrides)");
  align->add_option("--truth", al.truth, "meta.json written by simulate; adds a losses block");

  SweepArgs sw;
  auto* sweep = app.add_subcommand("sweep", "Run a parameter sweep from a JSON config");
  sweep->add_option("--config", sw.config, "Sweep config (JSON)")->required();
  sweep->add_option("--out", sw.out, "Results CSV (appended, resumable)")->required();
  sweep->add_option("--jobs", sw.jobs, "Worker threads (default: logical cores)")->check(CLI::Range(1, 4096));

  std::string counts;
  std::uint64_t verify_seed = 0;
  auto* verify = app.add_subcommand("verify", "Run the randomized lemma property suites");
  verify->add_option("--counts", counts, "Overrides as suite=N,suite=N");
  verify->add_option("--seed", verify_seed, "Random seed (COVALIGN_SEED overrides)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    if (code == 0) return 0;
    const auto active = app.get_subcommands();
    err << (active.empty() ? app.help() : active.front()->help());
    return kExitUsage;
  }

  try {
    if (simulate->parsed()) return cmd_simulate(sim, out, err);
    if (align->parsed()) return cmd_align(al, out);
    if (sweep->parsed()) return cmd_sweep(sw, out, err);
    if (verify->parsed()) return cmd_verify(counts, verify_seed, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace covalign::cli
