#include "covalign/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <limits>
#include <mutex>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>
#include <tuple>

#include "covalign/error.hpp"
#include "covalign/matrix_io.hpp"
#include "json.hpp"

namespace covalign {

bool is_known_estimator(std::string_view name) {
  return std::any_of(std::begin(kEstimatorNames), std::end(kEstimatorNames),
                     [&](const char* known) { return name == known; });
}

namespace {

struct EstimateOutcome {
  Permutation estimate;
  double objective = 0.0;
  double epsilon = 0.0;
  int iterations = 0;
  bool converged = true;
  double max_marginal_deviation = 0.0;
};

EstimateOutcome estimate(const SymMatrix& sigma_x, const SymMatrix& sigma_y, const EstimatorConfig& cfg) {
  EstimateOutcome out;
  if (cfg.name == "gw") {
    const GwReport report = gw_estimate(sigma_x, sigma_y, cfg.gw);
    out.estimate = report.permutation;
    out.objective = report.objective_rounded;
    out.epsilon = report.epsilon;
    out.iterations = report.outer_iterations;
    out.converged = report.converged;
    out.max_marginal_deviation = report.max_marginal_deviation;
  } else if (cfg.name == "qmle-local" || cfg.name == "qmle-exhaustive") {
    SearchOptions opts = cfg.search;
    opts.mode = cfg.name == "qmle-local" ? SearchMode::local : SearchMode::exhaustive;
    const SearchReport report = qmle_estimate(sigma_x, sigma_y, opts);
    out.estimate = report.permutation;
    out.objective = report.objective;
    out.iterations = report.sweeps;
  } else if (cfg.name == "gw-exhaustive") {
    const SearchReport report = exhaustive_search(sigma_x, sigma_y, Sense::maximize);
    out.estimate = report.permutation;
    out.objective = report.objective;
  } else if (cfg.name == "spectral") {
    out.estimate = spectral_estimate(sigma_x, sigma_y, cfg.spectral);
    out.objective = frobenius_norm(perm_apply(sigma_x, out.estimate) - sigma_y);
  } else {
    throw Error(ErrorKind::InvalidArgument, "unknown estimator '" + cfg.name + "'");
  }
  return out;
}

template <typename F>
double nan_on_error(F&& fn) {
  try {
    return fn();
  } catch (const Error&) {
    return std::numeric_limits<double>::quiet_NaN();
  }
}

}  // namespace

TrialRecord run_estimator(const SymMatrix& sigma_x, const SymMatrix& sigma_y, const EstimatorConfig& cfg) {
  TrialRecord rec;
  rec.estimator = cfg.name;
  rec.d = sigma_x.dim();
  const auto start = std::chrono::steady_clock::now();
  try {
    EstimateOutcome out = estimate(sigma_x, sigma_y, cfg);
    rec.estimate = std::move(out.estimate);
    rec.objective = out.objective;
    rec.epsilon = out.epsilon;
    rec.iterations = out.iterations;
    rec.converged = out.converged;
    rec.max_marginal_deviation = out.max_marginal_deviation;
  } catch (const Error& e) {
    rec.status = std::string(to_string(e.kind()));
    rec.error = e.what();
    rec.converged = false;
  }
  rec.runtime_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return rec;
}

void score_record(TrialRecord& rec, const SymMatrix& sigma, const Permutation& truth) {
  if (!rec.ok()) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    rec.frob_loss_sq = rec.nf_loss_sq = rec.trace_loss = rec.relative_loss = nan;
    rec.hamming = -1;
    return;
  }
  const double frob = frob_loss(sigma, rec.estimate, truth);
  rec.frob_loss_sq = frob * frob;
  const double scale = inner(sigma, sigma);
  rec.relative_loss = scale > 0.0 ? rec.frob_loss_sq / scale : 0.0;
  rec.nf_loss_sq = nan_on_error([&] {
    const double v = nf_loss(sigma, rec.estimate, truth);
    return v * v;
  });
  rec.trace_loss = nan_on_error([&] { return trace_loss(sigma, rec.estimate, truth); });
  rec.hamming = hamming_loss(rec.estimate, truth);
}

TrialRecord run_trial(const AlignmentInstance& instance, const EstimatorConfig& cfg) {
  TrialRecord rec = run_estimator(instance.sigma_hat_x, instance.sigma_hat_y, cfg);
  rec.m = instance.m;
  rec.n = instance.n;
  rec.seed = instance.seed;
  score_record(rec, instance.sigma, instance.pi_star);
  return rec;
}

// ---------------------------------------------------------------------------
// CSV

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  while (true) {
    const auto comma = line.find(',');
    fields.push_back(line.substr(0, comma));
    if (comma == std::string_view::npos) break;
    line.remove_prefix(comma + 1);
  }
  return fields;
}

std::string format_real(double v) {
  if (std::isnan(v)) return "nan";
  return format_double(v);
}

double parse_real(std::string_view text) {
  if (text == "nan") return std::numeric_limits<double>::quiet_NaN();
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw Error(ErrorKind::FileFormat, "bad number '" + std::string(text) + "'");
  }
  return v;
}

template <typename Int>
Int parse_int(std::string_view text) {
  Int v{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw Error(ErrorKind::FileFormat, "bad integer '" + std::string(text) + "'");
  }
  return v;
}

}  // namespace

std::string to_csv_row(const TrialRecord& r) {
  std::ostringstream out;
  out << r.estimator << ',' << r.d << ',' << r.m.to_string() << ',' << r.n.to_string() << ',' << r.seed << ','
      << format_real(r.epsilon) << ',' << format_real(r.frob_loss_sq) << ',' << format_real(r.nf_loss_sq) << ','
      << format_real(r.trace_loss) << ',' << r.hamming << ',' << format_real(r.objective) << ',' << r.iterations
      << ',' << (r.converged ? "true" : "false") << ',' << format_real(r.runtime_ms) << ',' << r.status;
  return out.str();
}

TrialRecord parse_csv_row(std::string_view line) {
  const auto f = split_fields(line);
  if (f.size() != 15) {
    throw Error(ErrorKind::FileFormat, "results row has " + std::to_string(f.size()) + " fields, expected 15");
  }
  TrialRecord r;
  try {
    r.estimator = std::string(f[0]);
    r.d = parse_int<std::size_t>(f[1]);
    r.m = SampleSize::parse(f[2]);
    r.n = SampleSize::parse(f[3]);
    r.seed = parse_int<std::uint64_t>(f[4]);
    r.epsilon = parse_real(f[5]);
    r.frob_loss_sq = parse_real(f[6]);
    r.nf_loss_sq = parse_real(f[7]);
    r.trace_loss = parse_real(f[8]);
    r.hamming = parse_int<int>(f[9]);
    r.objective = parse_real(f[10]);
    r.iterations = parse_int<int>(f[11]);
    if (f[12] != "true" && f[12] != "false") throw Error(ErrorKind::FileFormat, "bad converged flag");
    r.converged = f[12] == "true";
    r.runtime_ms = parse_real(f[13]);
    r.status = std::string(f[14]);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::FileFormat) throw;
    throw Error(ErrorKind::FileFormat, e.what());
  }
  if (r.status.empty()) throw Error(ErrorKind::FileFormat, "empty status field");
  return r;
}

// ---------------------------------------------------------------------------
// Sweep config

namespace {

using nlohmann::json;

[[noreturn]] void config_error(const std::string& pointer, const std::string& what) {
  throw Error(ErrorKind::InvalidArgument, (pointer.empty() ? std::string("/") : pointer) + ": " + what);
}

const json& require(const json& obj, const std::string& key, const std::string& where) {
  if (!obj.contains(key)) config_error(where + "/" + key, "missing required field");
  return obj.at(key);
}

// Accepts a scalar or an array of scalars.
template <typename T, typename Parse>
std::vector<T> list_of(const json& node, const std::string& where, Parse parse) {
  std::vector<T> out;
  if (node.is_array()) {
    if (node.empty()) config_error(where, "list must not be empty");
    for (std::size_t i = 0; i < node.size(); ++i) out.push_back(parse(node[i], where + "/" + std::to_string(i)));
  } else {
    out.push_back(parse(node, where));
  }
  return out;
}

SampleSize sample_size_of(const json& v, const std::string& where) {
  if (v.is_string()) {
    try {
      return SampleSize::parse(v.get<std::string>());
    } catch (const Error&) {
      config_error(where, "expected positive integer or \"exact\"");
    }
  }
  if (!v.is_number_integer() || v.get<std::int64_t>() < 1) config_error(where, "expected positive integer or \"exact\"");
  return SampleSize::of(v.get<std::int64_t>());
}

std::size_t dim_of(const json& v, const std::string& where) {
  if (!v.is_number_integer() || v.get<std::int64_t>() < 2) config_error(where, "expected integer >= 2");
  return static_cast<std::size_t>(v.get<std::int64_t>());
}

double positive_real(const json& v, const std::string& where) {
  if (!v.is_number() || !(v.get<double>() > 0.0)) config_error(where, "expected positive number");
  return v.get<double>();
}

int integer_at_least(const json& v, int lo, const std::string& where) {
  if (!v.is_number_integer() || v.get<std::int64_t>() < lo || v.get<std::int64_t>() > std::numeric_limits<int>::max()) {
    config_error(where, "expected integer >= " + std::to_string(lo));
  }
  return v.get<int>();
}

bool boolean(const json& v, const std::string& where) {
  if (!v.is_boolean()) config_error(where, "expected true or false");
  return v.get<bool>();
}

EstimatorConfig estimator_of(const json& v, const std::string& where) {
  EstimatorConfig cfg;
  if (v.is_string()) {
    cfg.name = v.get<std::string>();
  } else if (v.is_object()) {
    cfg.name = require(v, "name", where).is_string() ? v.at("name").get<std::string>() : "";
    if (v.contains("epsilon")) cfg.gw.epsilon = positive_real(v.at("epsilon"), where + "/epsilon");
    if (v.contains("max_outer")) cfg.gw.max_outer = integer_at_least(v.at("max_outer"), 1, where + "/max_outer");
    if (v.contains("anneal")) cfg.gw.anneal = boolean(v.at("anneal"), where + "/anneal");
    if (v.contains("refine")) cfg.gw.refine = boolean(v.at("refine"), where + "/refine");
    if (v.contains("restarts")) cfg.search.restarts = integer_at_least(v.at("restarts"), 1, where + "/restarts");
    if (v.contains("max_sweeps")) {
      cfg.search.max_sweeps = integer_at_least(v.at("max_sweeps"), 0, where + "/max_sweeps");
    }
    if (v.contains("ridge")) {
      const json& r = v.at("ridge");
      if (!r.is_number() || !(r.get<double>() >= 0.0)) config_error(where + "/ridge", "expected nonnegative number");
      cfg.search.ridge = r.get<double>();
    }
    if (v.contains("one_sided")) {
      cfg.spectral = boolean(v.at("one_sided"), where + "/one_sided") ? SpectralVariant::one_sided
                                                                        : SpectralVariant::two_sided;
    }
  } else {
    config_error(where, "expected estimator name or object");
  }
  if (!is_known_estimator(cfg.name)) config_error(where, "unknown estimator '" + cfg.name + "'");
  return cfg;
}

}  // namespace

void SweepConfig::validate() const {
  if (grid.kinds.empty() || grid.dims.empty() || grid.ns.empty()) {
    throw Error(ErrorKind::InvalidArgument, "sweep grid must be non-empty");
  }
  if (!grid.m_equals_n && grid.ms.empty()) throw Error(ErrorKind::InvalidArgument, "sweep grid has no m values");
  if (estimators.empty()) throw Error(ErrorKind::InvalidArgument, "sweep needs at least one estimator");
  if (replicates < 1) throw Error(ErrorKind::InvalidArgument, "replicates must be >= 1");
  if (jobs < 1) throw Error(ErrorKind::InvalidArgument, "jobs must be >= 1");
}

SweepConfig parse_sweep_config(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::InvalidArgument, std::string("/: malformed JSON (") + e.what() + ")");
  }
  try {
    if (!doc.is_object()) config_error("", "sweep config must be a JSON object");
    SweepConfig cfg;
    const json& grid = require(doc, "grid", "");
    if (!grid.is_object()) config_error("/grid", "expected object");

    if (grid.contains("kind")) {
      cfg.grid.kinds = list_of<InstanceKind>(grid.at("kind"), "/grid/kind", [](const json& v, const std::string& w) {
        if (!v.is_string()) config_error(w, "expected instance kind string");
        try {
          return parse_instance_kind(v.get<std::string>());
        } catch (const Error&) {
          config_error(w, "unknown instance kind");
        }
      });
    }
    cfg.grid.dims = list_of<std::size_t>(require(grid, "d", "/grid"), "/grid/d", dim_of);
    cfg.grid.ns = list_of<SampleSize>(require(grid, "n", "/grid"), "/grid/n", sample_size_of);
    if (grid.contains("m")) {
      const json& m = grid.at("m");
      if (m.is_string() && m.get<std::string>() == "n") {
        cfg.grid.m_equals_n = true;
      } else {
        cfg.grid.m_equals_n = false;
        cfg.grid.ms = list_of<SampleSize>(m, "/grid/m", sample_size_of);
      }
    }
    if (grid.contains("gamma")) cfg.grid.gammas = list_of<double>(grid.at("gamma"), "/grid/gamma", positive_real);
    if (grid.contains("normalize")) {
      if (!grid.at("normalize").is_string()) config_error("/grid/normalize", "expected string");
      try {
        cfg.grid.normalize = parse_normalization(grid.at("normalize").get<std::string>());
      } catch (const Error&) {
        config_error("/grid/normalize", "expected none|opnorm|trace");
      }
    }
    if (grid.contains("c1")) cfg.grid.c1 = positive_real(grid.at("c1"), "/grid/c1");
    if (grid.contains("c5")) cfg.grid.c5 = positive_real(grid.at("c5"), "/grid/c5");

    const json& ests = require(doc, "estimators", "");
    cfg.estimators = list_of<EstimatorConfig>(ests, "/estimators", estimator_of);

    if (doc.contains("replicates")) {
      const json& r = doc.at("replicates");
      if (!r.is_number_integer() || r.get<int>() < 1) config_error("/replicates", "expected integer >= 1");
      cfg.replicates = r.get<int>();
    }
    if (doc.contains("base_seed")) {
      const json& s = doc.at("base_seed");
      if (!s.is_number_integer()) config_error("/base_seed", "expected integer");
      cfg.base_seed = s.get<std::uint64_t>();
    }
    if (doc.contains("jobs")) {
      const json& j = doc.at("jobs");
      if (!j.is_number_integer() || j.get<int>() < 1) config_error("/jobs", "expected integer >= 1");
      cfg.jobs = j.get<int>();
    }
    if (doc.contains("output")) {
      if (!doc.at("output").is_string()) config_error("/output", "expected path string");
      cfg.output = doc.at("output").get<std::string>();
    }
    return cfg;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::InvalidArgument, std::string("sweep config: ") + e.what());
  }
}

std::vector<SweepCell> expand_grid(const SweepConfig& config) {
  std::vector<SweepCell> cells;
  const SweepGrid& g = config.grid;
  for (InstanceKind kind : g.kinds) {
    const std::vector<double> gammas = kind == InstanceKind::robinson ? g.gammas : std::vector<double>{g.gammas.front()};
    for (std::size_t d : g.dims) {
      for (const SampleSize& n : g.ns) {
        const std::vector<SampleSize> ms = g.m_equals_n ? std::vector<SampleSize>{n} : g.ms;
        for (const SampleSize& m : ms) {
          for (double gamma : gammas) {
            SweepCell cell;
            cell.index = cells.size();
            cell.spec.kind = kind;
            cell.spec.d = d;
            cell.spec.n = n;
            cell.spec.m = m;
            cell.spec.gamma = gamma;
            cell.spec.normalize = g.normalize;
            cell.spec.c1 = g.c1;
            cell.spec.c5 = g.c5;
            cells.push_back(cell);
          }
        }
      }
    }
  }
  return cells;
}

// ---------------------------------------------------------------------------
// Sweep execution

void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(std::max(1, jobs)), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

namespace {

using RecordKey = std::tuple<std::string, std::size_t, std::int64_t, std::int64_t, std::uint64_t>;

RecordKey key_of(const TrialRecord& r) { return {r.estimator, r.d, r.m.count(), r.n.count(), r.seed}; }

// Reads complete rows from an existing results file and rewrites it without
// any trailing partial line. Returns the parsed rows.
std::vector<TrialRecord> recover_existing(const std::filesystem::path& path) {
  std::vector<TrialRecord> rows;
  if (!std::filesystem::exists(path)) return rows;
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::FileFormat, "cannot read " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string content = buffer.str();
  in.close();

  std::vector<std::string> kept;
  std::size_t pos = 0;
  bool header_seen = false;
  while (pos < content.size()) {
    const auto nl = content.find('\n', pos);
    if (nl == std::string::npos) break;  // partial final line
    std::string line = content.substr(pos, nl - pos);
    pos = nl + 1;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!header_seen) {
      if (line != kResultsHeader) throw Error(ErrorKind::FileFormat, path.string() + " has an unexpected header");
      header_seen = true;
      continue;
    }
    try {
      rows.push_back(parse_csv_row(line));
      kept.push_back(std::move(line));
    } catch (const Error&) {
      // A torn write can only be the last complete-looking line; drop it.
    }
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << kResultsHeader << '\n';
  for (const auto& line : kept) out << line << '\n';
  return rows;
}

}  // namespace

CellAggregate aggregate(std::span<const TrialRecord> records) {
  CellAggregate agg;
  std::vector<double> losses;
  double rel_sum = 0.0;
  for (const TrialRecord& r : records) {
    if (!r.ok()) {
      ++agg.failures;
      continue;
    }
    losses.push_back(r.frob_loss_sq);
    rel_sum += r.relative_loss;
  }
  agg.count = static_cast<int>(losses.size());
  if (losses.empty()) {
    agg.mean = agg.median = agg.stderr_mean = agg.mean_relative = std::numeric_limits<double>::quiet_NaN();
    return agg;
  }
  std::sort(losses.begin(), losses.end());
  const double n = static_cast<double>(losses.size());
  agg.mean = std::accumulate(losses.begin(), losses.end(), 0.0) / n;
  const std::size_t mid = losses.size() / 2;
  agg.median = losses.size() % 2 ? losses[mid] : 0.5 * (losses[mid - 1] + losses[mid]);
  if (losses.size() > 1) {
    double ss = 0.0;
    for (double v : losses) ss += (v - agg.mean) * (v - agg.mean);
    agg.stderr_mean = std::sqrt(ss / (n - 1.0) / n);
  }
  agg.mean_relative = rel_sum / n;
  return agg;
}

SweepResult run_sweep(const SweepConfig& config) {
  config.validate();
  const std::vector<SweepCell> cells = expand_grid(config);
  const auto reps = static_cast<std::size_t>(config.replicates);

  // seed → (cell, replicate), also the collision check for the seed mix.
  std::map<std::uint64_t, std::pair<std::size_t, std::size_t>> seed_owner;
  for (const SweepCell& cell : cells) {
    for (std::size_t r = 0; r < reps; ++r) {
      const std::uint64_t seed = mix_seed(config.base_seed, cell.index, r);
      if (!seed_owner.emplace(seed, std::make_pair(cell.index, r)).second) {
        throw Error(ErrorKind::InvalidArgument, "seed collision in sweep grid");
      }
    }
  }

  SweepResult result;
  std::vector<TrialRecord> collected;
  std::set<RecordKey> done;
  const bool to_file = !config.output.empty();
  if (to_file) {
    for (TrialRecord& r : recover_existing(config.output)) {
      if (!seed_owner.count(r.seed) || !done.insert(key_of(r)).second) continue;
      collected.push_back(std::move(r));
    }
    result.resumed = static_cast<int>(collected.size());
  }

  std::ofstream log;
  if (to_file) {
    const bool fresh = !std::filesystem::exists(config.output);
    log.open(config.output, std::ios::binary | std::ios::app);
    if (!log) throw Error(ErrorKind::FileFormat, "cannot open " + config.output.string() + " for append");
    if (fresh) log << kResultsHeader << '\n' << std::flush;
  }

  std::mutex sink;
  const std::size_t tasks = cells.size() * reps;
  parallel_for(tasks, config.jobs, [&](std::size_t task) {
    const SweepCell& cell = cells[task / reps];
    const std::size_t r = task % reps;
    InstanceSpec spec = cell.spec;
    spec.seed = mix_seed(config.base_seed, cell.index, r);

    std::vector<const EstimatorConfig*> pending;
    {
      std::lock_guard lock(sink);
      for (const EstimatorConfig& est : config.estimators) {
        if (!done.count({est.name, spec.d, spec.m.count(), spec.n.count(), spec.seed})) pending.push_back(&est);
      }
      if (config.progress) {
        *config.progress << "cell " << cell.index + 1 << '/' << cells.size() << " replicate " << r + 1 << '/'
                         << reps << (pending.empty() ? " (resumed)" : "") << '\n';
      }
    }
    if (pending.empty()) return;

    std::vector<TrialRecord> fresh;
    try {
      const AlignmentInstance instance = make_instance(spec);
      for (const EstimatorConfig* est : pending) fresh.push_back(run_trial(instance, *est));
    } catch (const Error& e) {
      // Instance generation failed: record it against every pending estimator.
      for (const EstimatorConfig* est : pending) {
        TrialRecord rec;
        rec.estimator = est->name;
        rec.d = spec.d;
        rec.m = spec.m;
        rec.n = spec.n;
        rec.seed = spec.seed;
        rec.status = std::string(to_string(e.kind()));
        rec.error = e.what();
        rec.converged = false;
        rec.hamming = -1;
        rec.frob_loss_sq = rec.nf_loss_sq = rec.trace_loss = std::numeric_limits<double>::quiet_NaN();
        fresh.push_back(std::move(rec));
      }
    }

    std::lock_guard lock(sink);
    for (TrialRecord& rec : fresh) {
      if (to_file) log << to_csv_row(rec) << '\n' << std::flush;
      done.insert(key_of(rec));
      collected.push_back(std::move(rec));
    }
  });

  std::map<std::string, std::size_t> est_rank;
  for (std::size_t i = 0; i < config.estimators.size(); ++i) est_rank.emplace(config.estimators[i].name, i);
  std::sort(collected.begin(), collected.end(), [&](const TrialRecord& a, const TrialRecord& b) {
    const auto& oa = seed_owner.at(a.seed);
    const auto& ob = seed_owner.at(b.seed);
    return std::tie(oa, est_rank[a.estimator]) < std::tie(ob, est_rank[b.estimator]);
  });

  for (const SweepCell& cell : cells) {
    for (const EstimatorConfig& est : config.estimators) {
      std::vector<TrialRecord> group;
      for (const TrialRecord& r : collected) {
        if (r.estimator == est.name && seed_owner.at(r.seed).first == cell.index) group.push_back(r);
      }
      CellAggregate agg = aggregate(group);
      agg.cell = cell.index;
      agg.estimator = est.name;
      agg.d = cell.spec.d;
      agg.m = cell.spec.m;
      agg.n = cell.spec.n;
      result.aggregates.push_back(std::move(agg));
    }
  }
  result.records = std::move(collected);
  return result;
}

void write_summary_csv(std::ostream& out, std::span<const CellAggregate> aggregates) {
  out << "cell,estimator,d,m,n,count,failures,mean_frob_loss_sq,median_frob_loss_sq,stderr_frob_loss_sq,"
         "mean_relative_loss\n";
  for (const CellAggregate& a : aggregates) {
    out << a.cell << ',' << a.estimator << ',' << a.d << ',' << a.m.to_string() << ',' << a.n.to_string() << ','
        << a.count << ',' << a.failures << ',' << format_real(a.mean) << ',' << format_real(a.median) << ','
        << format_real(a.stderr_mean) << ',' << format_real(a.mean_relative) << '\n';
  }
}

// ---------------------------------------------------------------------------
// Threshold search

double mean_relative_loss(std::size_t d, std::int64_t n, int reps, const ThresholdConfig& config,
                          double* max_marginal_deviation) {
  std::vector<double> losses(static_cast<std::size_t>(reps));
  std::vector<double> deviations(static_cast<std::size_t>(reps), 0.0);
  parallel_for(losses.size(), config.jobs, [&](std::size_t r) {
    InstanceSpec spec;
    spec.kind = config.kind;
    spec.d = d;
    spec.gamma = config.gamma;
    spec.normalize = config.normalize;
    spec.m = SampleSize::of(n);
    spec.n = SampleSize::of(n);
    spec.seed = mix_seed(config.base_seed, d, r);
    const TrialRecord rec = run_trial(make_instance(spec), config.estimator);
    losses[r] = rec.ok() ? rec.relative_loss : std::numeric_limits<double>::infinity();
    deviations[r] = rec.max_marginal_deviation;
  });
  if (max_marginal_deviation) {
    *max_marginal_deviation = std::max(*max_marginal_deviation, *std::max_element(deviations.begin(), deviations.end()));
  }
  return std::accumulate(losses.begin(), losses.end(), 0.0) / static_cast<double>(reps);
}

ThresholdResult threshold_search(std::size_t d, const std::string& estimator, double tau, int reps,
                                 const ThresholdConfig& config) {
  if (!(tau > 0.0) || !(tau <= 1.0)) throw Error(ErrorKind::InvalidArgument, "tau must lie in (0, 1]");
  if (reps < 1) throw Error(ErrorKind::InvalidArgument, "reps must be >= 1");
  if (config.n_min < 1 || config.n_cap < config.n_min) {
    throw Error(ErrorKind::InvalidArgument, "need 1 <= n_min <= n_cap");
  }
  ThresholdConfig cfg = config;
  cfg.estimator.name = estimator;

  ThresholdResult result;
  auto passes = [&](std::int64_t n) {
    auto it = result.probes.find(n);
    if (it == result.probes.end()) {
      it = result.probes.emplace(n, mean_relative_loss(d, n, reps, cfg, &result.max_marginal_deviation)).first;
    }
    return it->second <= tau;
  };

  std::int64_t hi = cfg.n_min;
  std::int64_t lo = 0;
  while (!passes(hi)) {
    if (hi >= cfg.n_cap) {
      throw Error(ErrorKind::BudgetExceeded, "mean relative loss above tau at n = " + std::to_string(cfg.n_cap));
    }
    lo = hi;
    hi = std::min(hi * 2, cfg.n_cap);
  }
  if (lo == 0) {
    result.n_star = hi;
    return result;
  }
  while (hi - lo > std::max<std::int64_t>(1, static_cast<std::int64_t>(cfg.rel_resolution * static_cast<double>(lo)))) {
    const std::int64_t mid = lo + (hi - lo) / 2;
    if (passes(mid)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  result.n_star = hi;
  return result;
}

}  // namespace covalign
