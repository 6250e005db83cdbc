#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "tailcp/error.hpp"
#include "tailcp/experiments.hpp"
#include "tailcp/io.hpp"
#include "tailcp/random.hpp"

using namespace tailcp;
namespace fs = std::filesystem;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected tailcp::Error");
  return ErrorCode::IoError;
}

ExperimentConfig cell(std::size_t n, double h, double p, std::size_t reps) {
  ExperimentConfig c;
  c.n = n;
  c.hurst = 0.6;
  c.alpha = 2.0;
  c.change_height = h;
  c.change_fraction = 0.5;
  c.proportion = p;
  c.reps = reps;
  c.critval_source = CritvalSource::KolmogorovAnalytic;
  return c;
}

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / "tailcp-test-experiments";
  fs::create_directories(dir);
  auto p = dir / name;
  fs::remove(p);
  return p;
}

// One-sided two-proportion z statistic.
double z_greater(const CellResult& a, const CellResult& b) {
  const double pa = a.rejection_rate, pb = b.rejection_rate;
  const double se = std::sqrt(pa * (1 - pa) / a.reps + pb * (1 - pb) / b.reps);
  return (pa - pb) / se;
}

}  // namespace

TEST_CASE("config validation") {
  CHECK_NOTHROW(cell(1000, 0.0, 0.1, 10).validate());
  CHECK(code_of([] { cell(1000, 0.0, 0.1, 0).validate(); }) == ErrorCode::InvalidConfig);
  CHECK(code_of([] { cell(1000, 0.0, 0.0, 10).validate(); }) == ErrorCode::InvalidConfig);
  CHECK(code_of([] { cell(1000, 0.0, 1.0, 10).validate(); }) == ErrorCode::InvalidConfig);
  auto c = cell(1000, 0.0, 0.1, 10);
  c.level = 1.0;
  CHECK(code_of([&] { c.validate(); }) == ErrorCode::InvalidConfig);
  c = cell(1000, 0.0, 0.1, 10);
  c.change_fraction = 0.0;
  CHECK(code_of([&] { c.validate(); }) == ErrorCode::InvalidConfig);
  c = cell(1000, 0.0, 0.1, 10);
  c.hurst = 0.4;
  CHECK(code_of([&] { c.validate(); }) == ErrorCode::InvalidSpec);
  c = cell(1000, -2.0, 0.1, 10);
  CHECK(code_of([&] { c.validate(); }) == ErrorCode::InvalidSpec);
  c = cell(1000, 0.0, 0.1, 10);
  c.critval_source = CritvalSource::MonteCarlo;
  c.mc_paths = 10;
  CHECK(code_of([&] { c.validate(); }) == ErrorCode::InvalidConfig);
}

TEST_CASE("replication seeds") {
  CHECK(replication_seed(1, 0) == mix64(1, 0));
  CHECK(replication_seed(1, 5) != replication_seed(2, 5));
}

TEST_CASE("single replication") {
  for (std::uint64_t s = 0; s < 5; ++s) {
    auto c = cell(500, -1.0, 0.2, 1);
    c.master_seed = s;
    auto r = rejection_rate(c);
    CHECK(r.reps == 1);
    CHECK((r.rejection_rate == 0.0 || r.rejection_rate == 1.0));
    CHECK(r.mc_standard_error == 0.0);
  }
}

TEST_CASE("determinism across worker counts") {
  auto c = cell(800, -1.0, 0.2, 300);
  c.master_seed = 42;
  auto a = rejection_rate(c, 1);
  auto b = rejection_rate(c, 4);
  CHECK(a.rejections == b.rejections);
  CHECK(a.reps == b.reps);
  CHECK(a.mean_change_fraction == b.mean_change_fraction);
  CHECK(a.mc_standard_error == doctest::Approx(std::sqrt(a.rejection_rate * (1 - a.rejection_rate) / a.reps)));
}

TEST_CASE("strong power for the alpha = 1, h = -0.5 cell") {
  ExperimentConfig c = cell(1000, -0.5, 0.2, 1000);
  c.alpha = 1.0;
  c.critval_source = CritvalSource::MonteCarlo;
  auto r = rejection_rate(c);
  MESSAGE("rate " << r.rejection_rate << " (reference 0.999)");
  CHECK(r.rejection_rate >= 0.95);
  CHECK(r.errors == 0);
}

TEST_CASE("power grows with n") {
  auto small = rejection_rate(cell(300, -1.0, 0.1, 1000));
  auto large = rejection_rate(cell(1000, -1.0, 0.1, 1000));
  MESSAGE("n=300: " << small.rejection_rate << ", n=1000: " << large.rejection_rate);
  CHECK(z_greater(large, small) > 1.645);
}

TEST_CASE("size grows with H") {
  auto lo = cell(1000, 0.0, 0.1, 1000);
  auto hi = lo;
  hi.hurst = 0.9;
  auto a = rejection_rate(lo), b = rejection_rate(hi);
  MESSAGE("H=0.6: " << a.rejection_rate << ", H=0.9: " << b.rejection_rate);
  CHECK(b.rejection_rate + 2.0 * b.mc_standard_error >= a.rejection_rate);
}

TEST_CASE("failing replications are counted, not dropped") {
  // With k_n = 1 the threshold variant has a single exceedance; when it is
  // the last observation no prefix of length < n contains it.
  ExperimentConfig c = cell(20, 0.0, 0.05, 400);
  c.variant = EstimatorVariant::Threshold;
  c.t0 = T0Policy::fixed(0.5);
  auto r = rejection_rate(c);
  CHECK(r.errors > 0);
  CHECK(r.errors == r.errors_by_code[ErrorCode::NoAdmissibleK]);
  CHECK(r.excluded == 0);
  CHECK(r.reps == 400);
}

TEST_CASE("location accuracy") {
  auto c = cell(2000, -1.0, 0.2, 500);
  auto acc = location_accuracy(c);
  MESSAGE("h=-1 location hit rate " << acc.fraction);
  CHECK(acc.fraction >= 0.5);
  CHECK(acc.reps == 500);
  CHECK(acc.tolerance == 0.05);

  auto weak = c;
  weak.change_height = -0.5;
  auto acc_weak = location_accuracy(weak);
  MESSAGE("h=-0.5 location hit rate " << acc_weak.fraction);
  CHECK(acc.fraction + 0.05 >= acc_weak.fraction);

  auto none = c;
  none.change_height = 0.0;
  CHECK(code_of([&] { location_accuracy(none); }) == ErrorCode::InvalidConfig);
  auto edge = c;
  edge.change_fraction = 1.0;
  CHECK(code_of([&] { location_accuracy(edge); }) == ErrorCode::InvalidConfig);
  edge.change_fraction = 0.0;
  CHECK(code_of([&] { location_accuracy(edge); }) == ErrorCode::InvalidConfig);
}

TEST_CASE("grid file parsing") {
  auto g = parse_experiment_grid(
      "# comment\n"
      "H = 0.6\n"
      "alpha = 2\n"
      "p = 0.1\n"
      "tau = 0.5\n"
      "critval = kolmogorov\n"
      "h = 0, -1   # two heights\n"
      "n = 300, 500\n"
      "reps = 50\n"
      "[grid]\n"
      "n = 1000\n"
      "reps = 20\n"
      "t0 = auto-min\n"
      "variant = threshold\n");
  REQUIRE(g.size() == 5);
  CHECK(g[0].change_height == 0.0);
  CHECK(g[0].n == 300);
  CHECK(g[1].n == 500);
  CHECK(g[2].change_height == -1.0);
  CHECK(g[3].critval_source == CritvalSource::KolmogorovAnalytic);
  CHECK(g[4].n == 1000);
  CHECK(g[4].critval_source == CritvalSource::MonteCarlo);  // blocks do not inherit
  CHECK(g[4].t0.kind == T0Policy::Kind::AutoMin);
  CHECK(g[4].variant == EstimatorVariant::Threshold);

  CHECK(code_of([] { parse_experiment_grid("n 100\n"); }) == ErrorCode::ParseError);
  CHECK(code_of([] { parse_experiment_grid("reps = 0\n"); }) == ErrorCode::InvalidConfig);
  CHECK(code_of([] { parse_experiment_grid("colour = red\n"); }) == ErrorCode::InvalidConfig);
  CHECK(code_of([] { parse_experiment_grid("n = ten\n"); }) == ErrorCode::InvalidConfig);
  CHECK(code_of([] { parse_experiment_grid("tau = 1.5\n"); }) == ErrorCode::InvalidConfig);
  CHECK(code_of([] { parse_experiment_grid("variant = moment\n"); }) == ErrorCode::InvalidConfig);
  CHECK(parse_experiment_grid("").empty());
  CHECK(code_of([] { load_experiment_grid("/nonexistent/grid.cfg"); }) == ErrorCode::NotFound);
}

TEST_CASE("table run") {
  const std::string text =
      "H = 0.6\nalpha = 2\np = 0.1\ntau = 0.5\ncritval = kolmogorov\nreps = 400\n"
      "h = 0, -1\nn = 300, 500\n";
  const auto grid = parse_experiment_grid(text);
  auto a = run_table(grid);
  REQUIRE(a.cells.size() == 4);
  CHECK(a.resumed == 0);
  const double h1_300 = a.cells[2].rejection_rate, h1_500 = a.cells[3].rejection_rate;
  MESSAGE("h=-1 power n=300 " << h1_300 << ", n=500 " << h1_500);
  CHECK(h1_500 > h1_300);

  const std::string out = format_table(a, "test");
  CHECK(out == format_table(run_table(grid, {std::nullopt, 3, "test"}), "test"));
  std::istringstream lines(out);
  std::string line;
  std::getline(lines, line);
  CHECK(line == "# tailcp rejection-rate table");
  std::getline(lines, line);
  CHECK(line == "# version=test");
  std::getline(lines, line);
  CHECK(line == "# master_seed=1");
  std::getline(lines, line);
  CHECK(line == "H,p,n,alpha,h,tau,reps,rate,se,errors");
  int rows = 0;
  while (std::getline(lines, line)) ++rows;
  CHECK(rows == 4);

  auto empty = run_table({});
  CHECK(empty.cells.empty());
  CHECK(format_table(empty, "v").find("H,p,n") != std::string::npos);
}

TEST_CASE("table resume from a journal") {
  const auto grid = parse_experiment_grid(
      "critval = kolmogorov\nreps = 100\nh = 0, -1\nn = 300, 400\n");
  const auto journal = scratch("resume.journal");

  // Partial run: the first two cells only.
  std::vector<ExperimentConfig> head(grid.begin(), grid.begin() + 2);
  auto partial = run_table(head, {journal, 1, "t"});
  CHECK(partial.resumed == 0);

  auto full = run_table(grid, {journal, 1, "t"});
  CHECK(full.resumed == 2);
  CHECK(format_table(full, "t") == format_table(run_table(grid), "t"));

  auto again = run_table(grid, {journal, 1, "t"});
  CHECK(again.resumed == 4);
  const std::string j = read_text_file(journal);
  CHECK(j.find("# run version=t started=") != std::string::npos);

  // A torn final line is ignored.
  append_text_file(journal, "cell\tn=300;H=0.6");
  CHECK(run_table(grid, {journal, 1, "t"}).resumed == 4);
}

TEST_CASE("journal write failures name the cell") {
  const auto grid = parse_experiment_grid("critval = kolmogorov\nreps = 5\nn = 300\n");
  const auto dir = scratch("journal-is-a-directory");
  fs::create_directories(dir);
  try {
    run_table(grid, {dir, 1, "t"});
    FAIL("no throw");
  } catch (const Error& e) {
    CHECK(category_of(e.code()) == ErrorCategory::Io);
    CHECK(std::string(e.what()).find(grid[0].cell_id()) != std::string::npos);
  }
}
