#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "tailcp/changepoint.hpp"
#include "tailcp/error.hpp"
#include "tailcp/experiments.hpp"
#include "tailcp/io.hpp"
#include "tailcp/lmsv.hpp"
#include "tailcp/series.hpp"
#include "tailcp/version.hpp"

namespace tailcp::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

std::optional<std::uint64_t> env_seed() {
  const char* v = std::getenv("TAILCP_SEED");
  if (v == nullptr || *v == '\0') return std::nullopt;
  try {
    std::size_t used = 0;
    const auto s = std::stoull(v, &used);
    if (used != std::string(v).size()) throw std::invalid_argument(v);
    return s;
  } catch (const std::exception&) {
    fail(ErrorCode::InvalidArgument, std::string("TAILCP_SEED is not an unsigned integer: ") + v);
  }
}

// Flag beats environment beats built-in default.
std::uint64_t pick_seed(const std::optional<std::uint64_t>& flag, std::uint64_t fallback) {
  if (flag) return *flag;
  if (auto e = env_seed()) return *e;
  return fallback;
}

int exit_code_for(const Error& e) {
  switch (category_of(e.code())) {
    case ErrorCategory::Validation: return kExitValidation;
    case ErrorCategory::Parse: return kExitParse;
    case ErrorCategory::Domain: return kExitDomain;
    case ErrorCategory::Io: return kExitIo;
  }
  return kExitDomain;
}

std::string hint_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::NoExceedances:
    case ErrorCode::NoAdmissibleK:
    case ErrorCode::InsufficientPrefix:
      return "increase p or lower t0";
    case ErrorCode::NonPositiveReference:
      return "the upper tail contains non-positive values; increase p is not enough, check the transform";
    case ErrorCode::NonPositivePrice:
      return "log returns need strictly positive prices; use --transform none for returns data";
    case ErrorCode::TooShort:
      return "supply more observations";
    default:
      return {};
  }
}

TimeSeries load_input(const std::string& input, const std::string& column, const std::string& transform) {
  ReadOptions ro;
  ro.column = column;
  TimeSeries series = input == "-" ? parse_series(std::string(std::istreambuf_iterator<char>(std::cin), {}), ro)
                                   : read_series(input, ro);
  if (transform == "log-returns") return log_returns(series);
  if (transform != "none") fail(ErrorCode::InvalidArgument, "unknown transform '" + transform + "'");
  return series;
}

// Tab-separated cache of Monte Carlo critical values keyed by every input.
class CritvalCache {
 public:
  explicit CritvalCache(std::optional<fs::path> path) : path_(std::move(path)) {}

  static std::string key(const McCriticalValueOptions& o) {
    std::ostringstream os;
    os << format_double(o.level) << '\t' << format_double(o.t0) << '\t' << o.n_paths << '\t' << o.n_grid
       << '\t' << o.seed;
    return os.str();
  }

  std::optional<double> lookup(const McCriticalValueOptions& o) const {
    if (!path_) return std::nullopt;
    std::error_code ec;
    if (!fs::exists(*path_, ec)) return std::nullopt;
    const std::string k = key(o) + '\t';
    std::istringstream in(read_text_file(*path_));
    std::string line;
    std::optional<double> hit;
    while (std::getline(in, line)) {
      if (line.rfind(k, 0) != 0) continue;
      try {
        hit = std::stod(line.substr(k.size()));
      } catch (const std::exception&) {
        fail(ErrorCode::IoError, "corrupt critical value cache entry in " + path_->string());
      }
    }
    return hit;
  }

  void store(const McCriticalValueOptions& o, double value) const {
    if (!path_) return;
    if (path_->has_parent_path()) {
      std::error_code ec;
      fs::create_directories(path_->parent_path(), ec);
    }
    append_text_file(*path_, key(o) + '\t' + format_double(value) + '\n');
  }

 private:
  std::optional<fs::path> path_;
};

std::pair<double, bool> critval_with_cache(const McCriticalValueOptions& o, const CritvalCache& cache) {
  if (auto hit = cache.lookup(o)) return {*hit, true};
  const double v = cached_mc_critical_value(o);
  cache.store(o, v);
  return {v, false};
}

const char* kDefaultCache = ".tailcp-critval-cache.tsv";

// ---------------------------------------------------------------- detect

struct DetectArgs {
  std::string input;
  std::string column;
  std::string transform = "none";
  double p = 0.1;
  std::string t0 = "default";
  double level = 0.05;
  std::string variant = "hill";
  std::string critval_source = "monte-carlo";
  std::optional<double> critval;
  std::size_t mc_paths = 100000;
  std::size_t mc_grid = 4096;
  std::optional<std::uint64_t> seed;
  std::string cache = kDefaultCache;
  bool no_cache = false;
  std::string output;
  std::string path_output;
  unsigned threads = 0;
};

int cmd_detect(const DetectArgs& a, std::ostream& out) {
  if (!(a.p > 0.0 && a.p < 1.0)) fail(ErrorCode::InvalidArgument, "--p must lie in (0, 1)");
  if (!(a.level > 0.0 && a.level < 1.0)) fail(ErrorCode::InvalidArgument, "--level must lie in (0, 1)");

  DecideOptions o;
  o.t0 = T0Policy::parse(a.t0);
  o.level = a.level;
  o.variant = parse_estimator_variant(a.variant);
  o.critval_source = a.critval ? CritvalSource::UserSupplied : parse_critval_source(a.critval_source);
  if (a.critval) o.user_critval = *a.critval;
  if (o.critval_source == CritvalSource::UserSupplied && !a.critval)
    fail(ErrorCode::InvalidArgument, "--critval-source user needs --critval VALUE");
  o.mc_paths = a.mc_paths;
  o.mc_grid = a.mc_grid;
  o.mc_seed = pick_seed(a.seed, DecideOptions{}.mc_seed);
  o.workers = a.threads;

  const TimeSeries x = load_input(a.input, a.column, a.transform);
  o.k_n = k_from_proportion(x.size(), a.p);
  const double t0 = resolve_t0(o.t0, x.size(), o.k_n);

  CriticalValue cv;
  bool cached = false;
  if (o.critval_source == CritvalSource::MonteCarlo) {
    McCriticalValueOptions mc{1.0 - o.level, t0, o.mc_paths, o.mc_grid, o.mc_seed, o.workers};
    const CritvalCache cache(a.no_cache ? std::nullopt : std::optional<fs::path>(a.cache));
    std::tie(cv.value, cached) = critval_with_cache(mc, cache);
    cv.source = CritvalSource::MonteCarlo;
  } else {
    cv = resolve_critical_value(o, t0);
  }

  GammaPath path;
  const ChangePointReport r = decide_with(x, o, cv, &path);

  ordered_json j;
  j["version"] = kVersion;
  j["input"] = a.input;
  j["transform"] = a.transform;
  j["n"] = r.n;
  j["p"] = a.p;
  j["k_n"] = r.k_n;
  j["variant"] = std::string(to_string(r.variant));
  j["t0_policy"] = r.t0_policy;
  j["t0"] = r.t0;
  j["statistic_raw"] = r.statistic_raw;
  j["scaling"] = r.scaling;
  j["statistic_scaled"] = r.statistic_scaled;
  j["level"] = r.level;
  j["critval_source"] = std::string(to_string(r.critval_source));
  j["critical_value"] = r.critical_value;
  j["reject"] = r.reject;
  j["change_index"] = r.change_index;
  j["change_fraction"] = r.change_fraction;
  if (r.change_date) j["change_date"] = r.change_date->iso();
  j["seed"] = r.mc_seed;
  j["mc_paths"] = r.mc_paths;
  j["mc_grid"] = r.mc_grid;

  std::string path_file = a.path_output;
  if (path_file.empty() && !a.output.empty()) {
    fs::path p(a.output);
    path_file = (p.parent_path() / (p.stem().string() + ".path.csv")).string();
  }
  if (!a.output.empty()) write_text_file(a.output, j.dump(2) + "\n");
  if (!path_file.empty()) {
    std::ostringstream csv;
    csv << "k,t,gamma_prefix,gamma_full,Gamma,Gamma_scaled";
    if (x.has_timestamps()) csv << ",date";
    csv << "\n";
    for (std::size_t i = 0; i < path.ks.size(); ++i) {
      const std::size_t k = path.ks[i];
      csv << k << "," << format_double(static_cast<double>(k) / static_cast<double>(x.size())) << ","
          << format_double(path.prefix_gamma[i]) << "," << format_double(path.full_gamma) << ","
          << format_double(path.values[i]) << "," << format_double(r.scaling * path.values[i]);
      if (x.has_timestamps()) csv << "," << x.timestamps()[k - 1].iso();
      csv << "\n";
    }
    write_text_file(path_file, csv.str());
  }

  out << "statistic " << format_double(r.statistic_scaled) << " (raw " << format_double(r.statistic_raw)
      << ", sqrt(k_n) = " << format_double(r.scaling) << ")\n"
      << "critical value " << format_double(r.critical_value) << " [" << to_string(r.critval_source)
      << (cached ? ", cached" : "") << "] at level " << format_double(r.level) << "\n"
      << (r.reject ? "REJECT" : "no rejection") << ": change at k = " << r.change_index << " (t = "
      << format_double(r.change_fraction) << ")";
  if (r.change_date) out << " on " << r.change_date->iso();
  out << "\n";
  if (a.output.empty()) out << j.dump(2) << "\n";
  return kExitOk;
}

// -------------------------------------------------------------- simulate

struct SimulateArgs {
  std::size_t n = 1000;
  double hurst = 0.7;
  double alpha = 2.0;
  double h = 0.0;
  double tau = 1.0;
  std::string family = "standard-pareto";
  bool center = false;
  bool components = false;
  std::optional<std::uint64_t> seed;
  std::string output;
};

int cmd_simulate(const SimulateArgs& a, std::ostream& out) {
  LmsvSpec s;
  s.n = a.n;
  s.hurst = a.hurst;
  s.alpha = a.alpha;
  s.change_height = a.h;
  s.change_fraction = a.tau;
  s.family = parse_innovation_family(a.family);
  s.center_innovations = a.center;
  s.seed = pick_seed(a.seed, 1);
  const LmsvPath path = simulate_lmsv_path(s);

  std::ostringstream os;
  os << "# tailcp simulate version=" << kVersion << "\n"
     << "# n=" << s.n << " hurst=" << format_double(s.hurst) << " alpha=" << format_double(s.alpha)
     << " h=" << format_double(s.change_height) << " tau=" << format_double(s.change_fraction)
     << " family=" << to_string(s.family) << " center=" << (s.center_innovations ? 1 : 0)
     << " seed=" << s.seed << "\n";
  if (s.has_break()) os << "# change_index=" << s.break_index() << "\n";
  if (a.components) os << "x,y,eps\n";
  for (std::size_t i = 0; i < s.n; ++i) {
    os << format_double(path.x[i]);
    if (a.components)
      os << "," << format_double(path.volatility_driver[i]) << "," << format_double(path.innovations[i]);
    os << "\n";
  }
  if (a.output.empty())
    out << os.str();
  else
    write_text_file(a.output, os.str());
  return kExitOk;
}

// --------------------------------------------------------------- critval

struct CritvalArgs {
  double level = 0.95;
  double t0 = 0.0;
  std::size_t paths = 100000;
  std::size_t grid = 4096;
  std::optional<std::uint64_t> seed;
  std::string cache = kDefaultCache;
  bool no_cache = false;
  unsigned threads = 0;
};

int cmd_critval(const CritvalArgs& a, std::ostream& out, std::ostream& err) {
  McCriticalValueOptions o{a.level, a.t0, a.paths, a.grid, pick_seed(a.seed, McCriticalValueOptions{}.seed),
                           a.threads};
  if (!(o.level > 0.0 && o.level < 1.0)) fail(ErrorCode::InvalidArgument, "--level must lie in (0, 1)");
  const CritvalCache cache(a.no_cache ? std::nullopt : std::optional<fs::path>(a.cache));
  const auto [value, cached] = critval_with_cache(o, cache);
  out << format_double(value) << "\n";
  err << "level=" << format_double(o.level) << " t0=" << format_double(o.t0) << " paths=" << o.n_paths
      << " grid=" << o.n_grid << " seed=" << o.seed << " source=" << (cached ? "cache" : "computed");
  if (o.t0 == 0.0) err << " kolmogorov=" << format_double(kolmogorov_quantile(o.level));
  err << "\n";
  return kExitOk;
}

// -------------------------------------------------------------- diagnose

struct DiagnoseArgs {
  std::string input;
  std::string column;
  std::string transform = "none";
  std::size_t max_lag = 20;
  std::string prefix = "diagnose";
};

int cmd_diagnose(const DiagnoseArgs& a, std::ostream& out) {
  const TimeSeries x = load_input(a.input, a.column, a.transform);
  if (x.size() < 2) fail(ErrorCode::TooShort, "diagnostics need at least two observations");
  std::vector<double> abs_values(x.values().begin(), x.values().end());
  for (double& v : abs_values) v = std::fabs(v);
  const TimeSeries ax(std::move(abs_values));
  const double band = 1.96 / std::sqrt(static_cast<double>(x.size()));

  auto write_acf = [&](const TimeSeries& s, const std::string& file) {
    const AcfResult acf = sample_acf(s, a.max_lag);
    std::ostringstream os;
    os << "lag,acf,band_lower,band_upper\n";
    std::size_t inside = 0;
    for (std::size_t k = 0; k < acf.lags.size(); ++k) {
      os << acf.lags[k] << "," << format_double(acf.correlations[k]) << "," << format_double(-band) << ","
         << format_double(band) << "\n";
      if (k > 0 && std::fabs(acf.correlations[k]) <= band) ++inside;
    }
    write_text_file(file, os.str());
    return inside;
  };
  const std::size_t in_x = write_acf(x, a.prefix + "_acf.csv");
  const std::size_t in_abs = write_acf(ax, a.prefix + "_abs_acf.csv");

  const QqData qq = qq_pairs(x);
  std::ostringstream os;
  os << "theoretical,sample\n";
  for (std::size_t i = 0; i < qq.sample_quantiles.size(); ++i)
    os << format_double(qq.theoretical_quantiles[i]) << "," << format_double(qq.sample_quantiles[i]) << "\n";
  write_text_file(a.prefix + "_qq.csv", os.str());

  out << "n=" << x.size() << " band=+-" << format_double(band) << "\n"
      << "acf: " << in_x << "/" << a.max_lag << " lags inside the white-noise band\n"
      << "abs acf: " << in_abs << "/" << a.max_lag << " lags inside the white-noise band\n";
  return kExitOk;
}

// ----------------------------------------------------------------- table

struct TableArgs {
  std::string config;
  std::string output;
  std::string journal;
  bool no_journal = false;
  std::optional<std::uint64_t> seed;
  unsigned threads = 0;
};

int cmd_table(const TableArgs& a, std::ostream& out) {
  auto grid = load_experiment_grid(a.config);
  std::optional<std::uint64_t> seed = a.seed ? a.seed : env_seed();
  if (seed)
    for (auto& c : grid) c.master_seed = *seed;

  TableRunOptions opts;
  opts.workers = a.threads;
  opts.version = kVersion;
  if (!a.no_journal) {
    if (!a.journal.empty())
      opts.journal = fs::path(a.journal);
    else if (!a.output.empty())
      opts.journal = fs::path(a.output + ".journal");
  }
  const TableArtifact table = run_table(grid, opts);
  const std::string text = format_table(table, kVersion);
  if (a.output.empty())
    out << text;
  else {
    write_text_file(a.output, text);
    out << table.cells.size() << " cells (" << table.resumed << " resumed) written to " << a.output << "\n";
  }
  return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Tail-index change-point detection for heavy-tailed, long-memory series", "tailcp"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  DetectArgs detect;
  auto* d = app.add_subcommand("detect", "Run the tail-index change-point test on a series");
  d->add_option("-i,--input", detect.input, "Input file ('-' for stdin)")->required();
  d->add_option("--column", detect.column, "Value column: header name or 1-based index");
  d->add_option("--transform", detect.transform, "none | log-returns")->capture_default_str();
  d->add_option("-p,--p", detect.p, "Proportion of top order statistics, k_n = floor(n p)")->capture_default_str();
  d->add_option("--t0", detect.t0, "default | auto-min | value in (0,1)")->capture_default_str();
  d->add_option("--level", detect.level, "Significance level")->capture_default_str();
  d->add_option("--variant", detect.variant, "hill | threshold")->capture_default_str();
  d->add_option("--critval-source", detect.critval_source, "monte-carlo | kolmogorov | user")->capture_default_str();
  d->add_option("--critval", detect.critval, "User-supplied critical value");
  d->add_option("--mc-paths", detect.mc_paths)->capture_default_str();
  d->add_option("--mc-grid", detect.mc_grid)->capture_default_str();
  d->add_option("--seed", detect.seed, "Monte Carlo seed (overrides TAILCP_SEED)");
  d->add_option("--cache", detect.cache, "Critical value cache file")->capture_default_str();
  d->add_flag("--no-cache", detect.no_cache);
  d->add_option("-o,--output", detect.output, "JSON report path");
  d->add_option("--path-output", detect.path_output, "Gamma path CSV (default: <output>.path.csv)");
  d->add_option("--threads", detect.threads, "Worker threads (0 = auto)");

  SimulateArgs sim;
  auto* s = app.add_subcommand("simulate", "Simulate an LMSV path");
  s->add_option("-n,--n", sim.n)->capture_default_str();
  s->add_option("--hurst", sim.hurst)->capture_default_str();
  s->add_option("--alpha", sim.alpha)->capture_default_str();
  s->add_option("--height", sim.h, "Change height (post-break index alpha + h)")->capture_default_str();
  s->add_option("--tau", sim.tau, "Change fraction in (0, 1]")->capture_default_str();
  s->add_option("--family", sim.family, "standard-pareto | generalized-pareto")->capture_default_str();
  s->add_flag("--center", sim.center, "Subtract the innovation mean");
  s->add_flag("--components", sim.components, "Also write Y and eps columns");
  s->add_option("--seed", sim.seed, "Master seed (overrides TAILCP_SEED)");
  s->add_option("-o,--output", sim.output, "Output file (default: stdout)");

  CritvalArgs crit;
  auto* c = app.add_subcommand("critval", "Monte Carlo quantile of sup |B(t) - tB(1)| over [t0, 1]");
  c->add_option("--level", crit.level)->capture_default_str();
  c->add_option("--t0", crit.t0)->capture_default_str();
  c->add_option("--paths", crit.paths)->capture_default_str();
  c->add_option("--grid", crit.grid)->capture_default_str();
  c->add_option("--seed", crit.seed, "Overrides TAILCP_SEED");
  c->add_option("--cache", crit.cache)->capture_default_str();
  c->add_flag("--no-cache", crit.no_cache);
  c->add_option("--threads", crit.threads);

  DiagnoseArgs diag;
  auto* g = app.add_subcommand("diagnose", "ACF, absolute-value ACF and Q-Q plot data");
  g->add_option("-i,--input", diag.input)->required();
  g->add_option("--column", diag.column);
  g->add_option("--transform", diag.transform)->capture_default_str();
  g->add_option("--max-lag", diag.max_lag)->capture_default_str();
  g->add_option("--output-prefix", diag.prefix)->capture_default_str();

  TableArgs table;
  auto* t = app.add_subcommand("table", "Run a grid of rejection-rate cells");
  t->add_option("-c,--config", table.config)->required();
  t->add_option("-o,--output", table.output);
  t->add_option("--journal", table.journal, "Resume journal (default: <output>.journal)");
  t->add_flag("--no-journal", table.no_journal);
  t->add_option("--seed", table.seed, "Override every cell's master seed");
  t->add_option("--threads", table.threads);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    std::ostringstream o, e2;
    const int code = app.exit(e, o, e2);
    out << o.str();
    err << e2.str();
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (*d) return cmd_detect(detect, out);
    if (*s) return cmd_simulate(sim, out);
    if (*c) return cmd_critval(crit, out, err);
    if (*g) return cmd_diagnose(diag, out);
    if (*t) return cmd_table(table, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    if (auto hint = hint_for(e.code()); !hint.empty() && std::string(e.what()).find(hint) == std::string::npos)
      err << "hint: " << hint << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  }
  return kExitValidation;
}

}  // namespace tailcp::cli
