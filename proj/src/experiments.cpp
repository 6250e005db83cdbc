#include "tailcp/experiments.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <limits>
#include <set>
#include <sstream>

#include "tailcp/io.hpp"
#include "tailcp/parallel.hpp"
#include "tailcp/random.hpp"

namespace tailcp {

namespace {

std::string num(double v) { return format_double(v); }

[[noreturn]] void config_fail(const std::string& what) { fail(ErrorCode::InvalidConfig, what); }

struct RepOutcome {
  bool ok = false;
  ErrorCode code = ErrorCode::InvalidArgument;
  bool reject = false;
  double change_fraction = 0.0;
};

std::vector<RepOutcome> run_replications(const ExperimentConfig& config, const DecideOptions& options,
                                         const CriticalValue& critval, unsigned workers) {
  std::vector<RepOutcome> outcomes(config.reps);
  parallel_for(config.reps, workers, [&](std::size_t i) {
    RepOutcome& o = outcomes[i];
    try {
      const TimeSeries x = simulate_lmsv(config.lmsv_spec(replication_seed(config.master_seed, i)));
      const ChangePointReport r = decide_with(x, options, critval);
      o.ok = true;
      o.reject = r.reject;
      o.change_fraction = r.change_fraction;
    } catch (const Error& e) {
      o.code = e.code();
    }
  });
  return outcomes;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (reps < 1) config_fail("reps must be at least 1");
  if (n < 3) config_fail("n must be at least 3");
  if (!(proportion > 0.0 && proportion < 1.0)) config_fail("p must lie in (0, 1), got " + num(proportion));
  if (!(level > 0.0 && level < 1.0)) config_fail("level must lie in (0, 1), got " + num(level));
  if (!(change_fraction > 0.0 && change_fraction <= 1.0))
    config_fail("tau must lie in (0, 1], got " + num(change_fraction));
  const std::size_t k_n = static_cast<std::size_t>(std::floor(static_cast<double>(n) * proportion));
  if (k_n < 1 || k_n + 1 > n) config_fail("k_n = floor(n p) must lie in [1, n-1]");
  if (t0.kind == T0Policy::Kind::Fixed && !(t0.value > 0.0 && t0.value < 1.0))
    config_fail("t0 must lie in (0, 1)");
  if (critval_source == CritvalSource::MonteCarlo && (mc_paths < 1000 || mc_grid < 1024))
    config_fail("Monte Carlo critical values need mc_paths >= 1000 and mc_grid >= 1024");
  lmsv_spec(master_seed).validate();
}

LmsvSpec ExperimentConfig::lmsv_spec(std::uint64_t seed) const {
  LmsvSpec s;
  s.n = n;
  s.hurst = hurst;
  s.alpha = alpha;
  s.change_height = change_height;
  s.change_fraction = change_fraction;
  s.family = family;
  s.seed = seed;
  return s;
}

DecideOptions ExperimentConfig::decide_options(unsigned workers) const {
  DecideOptions o;
  o.k_n = k_from_proportion(n, proportion);
  o.t0 = t0;
  o.level = level;
  o.variant = variant;
  o.critval_source = critval_source;
  o.user_critval = user_critval;
  o.mc_paths = mc_paths;
  o.mc_grid = mc_grid;
  o.mc_seed = mc_seed;
  o.workers = workers;
  return o;
}

std::string ExperimentConfig::cell_id() const {
  std::ostringstream os;
  os << "n=" << n << ";H=" << num(hurst) << ";alpha=" << num(alpha) << ";h=" << num(change_height)
     << ";tau=" << num(change_fraction) << ";p=" << num(proportion) << ";reps=" << reps
     << ";level=" << num(level) << ";variant=" << to_string(variant) << ";t0=" << t0.describe()
     << ";seed=" << master_seed << ";family=" << to_string(family)
     << ";critval=" << to_string(critval_source);
  if (critval_source == CritvalSource::UserSupplied) os << ":" << num(user_critval);
  if (critval_source == CritvalSource::MonteCarlo)
    os << ":" << mc_paths << "x" << mc_grid << "@" << mc_seed;
  return os.str();
}

std::uint64_t replication_seed(std::uint64_t master_seed, std::size_t i) noexcept {
  return mix64(master_seed, i);
}

CellResult rejection_rate(const ExperimentConfig& config, unsigned workers) {
  config.validate();
  const DecideOptions options = config.decide_options(workers);
  const double t0 = resolve_t0(options.t0, config.n, options.k_n);
  const CriticalValue critval = resolve_critical_value(options, t0);
  const auto outcomes = run_replications(config, options, critval, workers);

  CellResult out;
  out.config = config;
  out.critical_value = critval.value;
  double fraction_sum = 0.0;
  for (const RepOutcome& o : outcomes) {
    if (!o.ok) {
      ++out.errors;
      ++out.errors_by_code[o.code];
      const bool excluded = config.t0.kind == T0Policy::Kind::AutoMin &&
                            (o.code == ErrorCode::NoExceedances || o.code == ErrorCode::NoAdmissibleK);
      if (excluded) {
        ++out.excluded;
        continue;
      }
    } else if (o.reject) {
      ++out.rejections;
      fraction_sum += o.change_fraction;
    }
    ++out.reps;
  }
  if (out.reps > 0) {
    out.rejection_rate = static_cast<double>(out.rejections) / static_cast<double>(out.reps);
    out.mc_standard_error =
        std::sqrt(out.rejection_rate * (1.0 - out.rejection_rate) / static_cast<double>(out.reps));
  } else {
    out.rejection_rate = std::numeric_limits<double>::quiet_NaN();
  }
  out.mean_change_fraction = out.rejections > 0 ? fraction_sum / static_cast<double>(out.rejections)
                                                : std::numeric_limits<double>::quiet_NaN();
  return out;
}

LocationAccuracy location_accuracy(const ExperimentConfig& config, double tolerance, unsigned workers) {
  if (config.change_height == 0.0) config_fail("location accuracy needs a change (h != 0)");
  if (!(config.change_fraction > 0.0 && config.change_fraction < 1.0))
    config_fail("location accuracy needs tau in (0, 1), got " + num(config.change_fraction));
  if (!(tolerance > 0.0)) config_fail("tolerance must be positive");
  config.validate();
  const DecideOptions options = config.decide_options(workers);
  // Only the argmax matters here, so the critical value is irrelevant.
  const CriticalValue critval{kolmogorov_quantile(1.0 - config.level), CritvalSource::KolmogorovAnalytic};

  std::vector<double> fractions(config.reps);
  parallel_for(config.reps, workers, [&](std::size_t i) {
    const TimeSeries x = simulate_lmsv(config.lmsv_spec(replication_seed(config.master_seed, i)));
    fractions[i] = decide_with(x, options, critval).change_fraction;
  });
  LocationAccuracy out;
  out.reps = config.reps;
  out.tolerance = tolerance;
  for (double f : fractions)
    if (std::fabs(f - config.change_fraction) <= tolerance) ++out.hits;
  out.fraction = static_cast<double>(out.hits) / static_cast<double>(out.reps);
  return out;
}

namespace {

std::string serialize_cell(const CellResult& c) {
  std::ostringstream os;
  os << "cell\t" << c.config.cell_id() << "\t" << num(c.rejection_rate) << "\t" << c.reps << "\t"
     << c.rejections << "\t" << c.excluded << "\t" << c.errors << "\t" << num(c.mc_standard_error)
     << "\t" << num(c.mean_change_fraction) << "\t" << num(c.critical_value) << "\t";
  bool first = true;
  for (const auto& [code, count] : c.errors_by_code) {
    os << (first ? "" : "|") << static_cast<int>(code) << ":" << count;
    first = false;
  }
  os << "\n";
  return os.str();
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) out.push_back(cur);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

double to_double(const std::string& s) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    fail(ErrorCode::ParseError, "journal: bad number '" + s + "'");
  return v;
}

std::size_t to_size(const std::string& s) {
  std::size_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    fail(ErrorCode::ParseError, "journal: bad count '" + s + "'");
  return v;
}

// Journal rows keyed by cell id. Corrupt trailing lines (an interrupted
// write) are ignored.
std::map<std::string, std::vector<std::string>> read_journal(const std::filesystem::path& path) {
  std::map<std::string, std::vector<std::string>> rows;
  std::error_code ec;
  if (!std::filesystem::exists(path, ec)) return rows;
  std::istringstream in(read_text_file(path));
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("cell\t", 0) != 0) continue;
    auto fields = split(line, '\t');
    if (fields.size() != 11) continue;
    rows[fields[1]] = std::move(fields);
  }
  return rows;
}

CellResult restore_cell(const ExperimentConfig& config, const std::vector<std::string>& f) {
  CellResult c;
  c.config = config;
  c.rejection_rate = to_double(f[2]);
  c.reps = to_size(f[3]);
  c.rejections = to_size(f[4]);
  c.excluded = to_size(f[5]);
  c.errors = to_size(f[6]);
  c.mc_standard_error = to_double(f[7]);
  c.mean_change_fraction = to_double(f[8]);
  c.critical_value = to_double(f[9]);
  if (!f[10].empty()) {
    for (const auto& item : split(f[10], '|')) {
      const auto colon = item.find(':');
      if (colon == std::string::npos) fail(ErrorCode::ParseError, "journal: bad error tally '" + item + "'");
      c.errors_by_code[static_cast<ErrorCode>(to_size(item.substr(0, colon)))] = to_size(item.substr(colon + 1));
    }
  }
  return c;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

TableArtifact run_table(const std::vector<ExperimentConfig>& grid, const TableRunOptions& options) {
  for (const auto& cell : grid) cell.validate();

  std::map<std::string, std::vector<std::string>> journal;
  std::string header;
  if (options.journal) {
    journal = read_journal(*options.journal);
    std::ostringstream head;
    head << "# run version=" << options.version << " started=" << utc_timestamp() << " cells=" << grid.size()
         << "\n";
    header = head.str();
  }

  TableArtifact table;
  for (const auto& cell : grid) {
    const std::string id = cell.cell_id();
    if (auto it = journal.find(id); it != journal.end()) {
      table.cells.push_back(restore_cell(cell, it->second));
      ++table.resumed;
      continue;
    }
    CellResult result = rejection_rate(cell, options.workers);
    if (options.journal) {
      try {
        append_text_file(*options.journal, header + serialize_cell(result));
        header.clear();
      } catch (const Error& e) {
        fail(e.code(), std::string("cell ") + id + ": " + e.what());
      }
    }
    table.cells.push_back(std::move(result));
  }
  return table;
}

std::string format_table(const TableArtifact& table, const std::string& version) {
  std::ostringstream os;
  std::set<std::uint64_t> seeds;
  for (const auto& c : table.cells) seeds.insert(c.config.master_seed);
  os << "# tailcp rejection-rate table\n# version=" << version << "\n# master_seed=";
  bool first = true;
  for (auto s : seeds) {
    os << (first ? "" : ";") << s;
    first = false;
  }
  os << "\nH,p,n,alpha,h,tau,reps,rate,se,errors\n";
  for (const auto& c : table.cells) {
    const auto& k = c.config;
    os << num(k.hurst) << "," << num(k.proportion) << "," << k.n << "," << num(k.alpha) << ","
       << num(k.change_height) << "," << num(k.change_fraction) << "," << c.reps << ","
       << num(c.rejection_rate) << "," << num(c.mc_standard_error) << "," << c.errors << "\n";
  }
  return os.str();
}

namespace {

std::string trim_copy(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::uint64_t parse_u64(const std::string& s, std::size_t line) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    config_fail("line " + std::to_string(line) + ": expected a non-negative integer, got '" + s + "'");
  return v;
}

double parse_real(const std::string& s, std::size_t line) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    config_fail("line " + std::to_string(line) + ": expected a number, got '" + s + "'");
  return v;
}

void apply_key(ExperimentConfig& c, const std::string& key, const std::string& value, std::size_t line) {
  try {
    if (key == "n") c.n = parse_u64(value, line);
    else if (key == "hurst" || key == "H") c.hurst = parse_real(value, line);
    else if (key == "alpha") c.alpha = parse_real(value, line);
    else if (key == "h" || key == "change_height") c.change_height = parse_real(value, line);
    else if (key == "tau" || key == "change_fraction") c.change_fraction = parse_real(value, line);
    else if (key == "p" || key == "proportion") c.proportion = parse_real(value, line);
    else if (key == "reps") c.reps = parse_u64(value, line);
    else if (key == "level") c.level = parse_real(value, line);
    else if (key == "variant") c.variant = parse_estimator_variant(value);
    else if (key == "t0") c.t0 = T0Policy::parse(value);
    else if (key == "seed" || key == "master_seed") c.master_seed = parse_u64(value, line);
    else if (key == "family") c.family = parse_innovation_family(value);
    else if (key == "critval") c.critval_source = parse_critval_source(value);
    else if (key == "critval_value") c.user_critval = parse_real(value, line);
    else if (key == "mc_paths") c.mc_paths = parse_u64(value, line);
    else if (key == "mc_grid") c.mc_grid = parse_u64(value, line);
    else if (key == "mc_seed") c.mc_seed = parse_u64(value, line);
    else config_fail("line " + std::to_string(line) + ": unknown key '" + key + "'");
  } catch (const Error& e) {
    if (e.code() == ErrorCode::InvalidConfig) throw;
    config_fail("line " + std::to_string(line) + ": " + e.what());
  }
}

struct Entry {
  std::string key;
  std::vector<std::string> values;
  std::size_t line;
};

void expand(const std::vector<Entry>& entries, std::size_t index, ExperimentConfig current,
            std::vector<ExperimentConfig>& out) {
  if (index == entries.size()) {
    out.push_back(current);
    return;
  }
  for (const auto& v : entries[index].values) {
    ExperimentConfig next = current;
    apply_key(next, entries[index].key, v, entries[index].line);
    expand(entries, index + 1, next, out);
  }
}

}  // namespace

std::vector<ExperimentConfig> parse_experiment_grid(const std::string& text) {
  std::vector<std::vector<Entry>> blocks(1);
  std::istringstream in(text);
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string t = trim_copy(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (t.empty()) continue;
    if (t == "[grid]") {
      blocks.emplace_back();
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      fail(ErrorCode::ParseError, "line " + std::to_string(line) + ": expected 'key = value[, value...]'");
    Entry e{trim_copy(t.substr(0, eq)), {}, line};
    for (const auto& v : split(t.substr(eq + 1), ',')) {
      const std::string tv = trim_copy(v);
      if (tv.empty()) config_fail("line " + std::to_string(line) + ": empty value for '" + e.key + "'");
      e.values.push_back(tv);
    }
    if (e.values.empty()) config_fail("line " + std::to_string(line) + ": no value for '" + e.key + "'");
    blocks.back().push_back(std::move(e));
  }

  std::vector<ExperimentConfig> grid;
  for (const auto& block : blocks) {
    if (block.empty()) continue;
    expand(block, 0, ExperimentConfig{}, grid);
  }
  for (const auto& c : grid) c.validate();
  return grid;
}

std::vector<ExperimentConfig> load_experiment_grid(const std::filesystem::path& path) {
  return parse_experiment_grid(read_text_file(path));
}

}  // namespace tailcp
