#include "tfdf/harness.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

using namespace tfdf;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path scratch_dir(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("tfdf_test_harness_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::size_t line_count(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

template <typename F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an exception");
  return ErrorCode::IoError;
}

ExperimentConfig quick_config(const fs::path& dir) {
  auto cfg = load_config(dir / "config.json");
  cfg.solver.outer_iterations = 4;
  cfg.solver.init_iterations = 2;
  return cfg;
}

fs::path synthetic_dir(const std::string& name, std::uint64_t seed = 1) {
  const auto dir = scratch_dir(name);
  write_synthetic_task(dir, seed, {40});
  return dir;
}

}  // namespace

TEST_CASE("accuracy examples") {
  CHECK(accuracy({0, 1, 2}, {0, 1, 2}) == 100.0);
  CHECK(accuracy({0, 1, 1, 1}, {0, 1, 1, 0}) == 75.0);
  CHECK(accuracy({1, 1}, {0, 0}) == 0.0);
  CHECK(code_of([] { accuracy({0}, {0, 1}); }) == ErrorCode::LengthMismatch);

  std::mt19937_64 rng(70);
  std::uniform_int_distribution<int> lab(0, 2);
  for (int trial = 0; trial < 20; ++trial) {
    LabelVector p(13), t(13);
    for (std::size_t i = 0; i < p.size(); ++i) {
      p[i] = lab(rng);
      t[i] = lab(rng);
    }
    std::size_t wrong = 0;
    for (std::size_t i = 0; i < p.size(); ++i) wrong += p[i] != t[i];
    CHECK(accuracy(p, t) + 100.0 * static_cast<double>(wrong) / 13.0 == doctest::Approx(100.0).epsilon(1e-14));
  }
}

TEST_CASE("confusion matrix examples") {
  const auto perfect = confusion_matrix({0, 1, 1, 2}, {0, 1, 1, 2}, 3);
  Eigen::MatrixXi diag = Eigen::MatrixXi::Zero(3, 3);
  diag.diagonal() << 1, 2, 1;
  CHECK(perfect == diag);

  const auto one = confusion_matrix({1}, {0}, 2);
  CHECK(one(0, 1) == 1);
  CHECK(one.sum() == 1);

  CHECK(code_of([] { confusion_matrix({0, 3}, {0, 1}, 3); }) == ErrorCode::LabelOutOfRange);
  CHECK(code_of([] { confusion_matrix({0}, {0, 1}, 3); }) == ErrorCode::LengthMismatch);

  std::mt19937_64 rng(71);
  std::uniform_int_distribution<int> lab(0, 3);
  for (int trial = 0; trial < 20; ++trial) {
    LabelVector p(25), t(25);
    for (std::size_t i = 0; i < p.size(); ++i) {
      p[i] = lab(rng);
      t[i] = lab(rng);
    }
    const auto M = confusion_matrix(p, t, 4);
    for (int c = 0; c < 4; ++c) CHECK(M.row(c).sum() == std::count(t.begin(), t.end(), c));
    CHECK(100.0 * M.trace() / 25.0 == doctest::Approx(accuracy(p, t)).epsilon(1e-14));
  }
}

TEST_CASE("config parsing") {
  const json base = {{"task",
                      {{"source_features", "s.csv"}, {"source_labels", "sy.csv"}, {"target_features", "t.csv"}}}};
  const auto cfg = parse_config(base, "/data/run");
  CHECK(cfg.task.source_features == fs::path("/data/run/s.csv"));
  CHECK(!cfg.task.target_labels);
  CHECK(cfg.preprocessing == Preprocessing::ZScoreThenUnitL2);
  CHECK(cfg.solver.params.lambda == 10.0);

  auto abs = base;
  abs["task"]["target_features"] = "/abs/t.csv";
  CHECK(parse_config(abs, "/data").task.target_features == fs::path("/abs/t.csv"));

  auto unknown = base;
  unknown["learning_rate"] = 0.1;
  CHECK(code_of([&] { parse_config(unknown); }) == ErrorCode::InvalidConfig);
  auto nested = base;
  nested["solver"] = {{"lamda", 1.0}};
  CHECK(code_of([&] { parse_config(nested); }) == ErrorCode::InvalidConfig);
  auto no_srm = base;
  no_srm["ablation"] = {{"srm", false}};
  CHECK(code_of([&] { parse_config(no_srm); }) == ErrorCode::InvalidConfig);
  auto bad_sweep = base;
  bad_sweep["sweep"] = {{"gamma", {1.0}}};
  CHECK(code_of([&] { parse_config(bad_sweep); }) == ErrorCode::UnknownParameter);
  CHECK(code_of([&] { parse_config(json::object()); }) == ErrorCode::InvalidConfig);
  CHECK(code_of([&] { load_config("/nonexistent/config.json"); }) == ErrorCode::InvalidConfig);

  auto full = base;
  full["solver"] = {{"xi", 0.5}, {"neighbors", 7}};
  full["sweep"] = {{"rho", {0.1, 1.0}}};
  full["output_dir"] = "out";
  const auto parsed = parse_config(full, "/d");
  CHECK(parsed.solver.params.xi == 0.5);
  CHECK(parsed.solver.neighbors == 7);
  const auto again = parse_config(to_json(parsed), "/elsewhere");
  CHECK(to_json(again) == to_json(parsed));
}

TEST_CASE("ablation rows and switch semantics") {
  const auto rows = ablation_rows();
  REQUIRE(rows.size() == 5);
  std::vector<std::string> names;
  for (const auto& r : rows) names.push_back(r.name());
  CHECK(names == std::vector<std::string>{"SRM", "SRM+DA", "SRM+LD", "SRM+DA+LD", "SRM+DA+LD+GD"});

  SolverConfig c;
  const auto off = apply_ablation(c, {true, false, false, false});
  CHECK(off.params.lambda == 0.0);
  CHECK(off.params.rho == 0.0);
  CHECK(off.params.xi == 0.0);
  CHECK(off.params.eta == c.params.eta);
  CHECK(code_of([&] { apply_ablation(c, {false, true, true, true}); }) == ErrorCode::InvalidConfig);
}

TEST_CASE("turning a switch off equals zeroing its weight") {
  const auto dir = synthetic_dir("ablation_pairs");
  const auto cfg = quick_config(dir);
  const TaskPair task = load_task(cfg);
  const auto rows = run_ablation(task, cfg);
  for (const auto& row : rows) {
    SolverConfig zeroed = cfg.solver;
    if (!row.switches.da) zeroed.params.lambda = 0.0;
    if (!row.switches.ld) zeroed.params.rho = 0.0;
    if (!row.switches.gd) zeroed.params.xi = 0.0;
    const auto direct = execute_task(task, cfg.preprocessing, zeroed);
    CHECK(direct.beta == row.result.beta);
    CHECK(direct.predictions == row.result.predictions);
  }

  // The SRM row is plain kernel ridge on the source followed by Adam on the SRM, ridge and centering terms.
  SolverConfig krr = cfg.solver;
  krr.params.lambda = krr.params.rho = krr.params.xi = 0.0;
  const TaskPair pre = preprocess_task(task, cfg.preprocessing);
  const auto solved = solve_tfdf(pre, krr);
  CHECK(solved.beta == rows[0].result.beta);
}

TEST_CASE("sweep grids and parameter overrides") {
  ExperimentConfig cfg;
  CHECK(sweep_grid(cfg, "p") == std::vector<double>{5, 10, 15, 20, 30});
  const std::vector<double> lambda_grid = {0.001, 0.005, 0.01, 0.05, 0.1, 0.5, 1, 5, 10};
  for (const char* p : {"lambda", "rho", "eta", "delta"}) CHECK(sweep_grid(cfg, p) == lambda_grid);
  CHECK(code_of([&] { sweep_grid(cfg, "xi"); }) == ErrorCode::InvalidConfig);
  CHECK(code_of([&] { sweep_grid(cfg, "gamma"); }) == ErrorCode::UnknownParameter);
  cfg.sweep["xi"] = {0.0, 0.1};
  CHECK(sweep_grid(cfg, "xi") == std::vector<double>{0.0, 0.1});

  SolverConfig s;
  CHECK(with_parameter(s, "p", 15).neighbors == 15);
  CHECK(with_parameter(s, "alpha", 0.01).learning_rate == 0.01);
  CHECK(with_parameter(s, "delta", 0.5).params.delta == 0.5);
  CHECK(code_of([&] { with_parameter(s, "gamma", 1.0); }) == ErrorCode::UnknownParameter);
  CHECK(code_of([&] { with_parameter(s, "p", 2.5); }) == ErrorCode::InvalidNeighborCount);
  CHECK(code_of([&] { with_parameter(s, "rho", -1.0); }) == ErrorCode::InvalidConfig);
}

TEST_CASE("a sweep of length one matches a single run") {
  const auto dir = synthetic_dir("sweep_one");
  auto cfg = quick_config(dir);
  cfg.output_dir = dir / "sweep_out";
  const auto pts = run_sweep(cfg, "rho", {cfg.solver.params.rho});
  REQUIRE(pts.size() == 1);
  cfg.output_dir = dir / "single";
  const auto single = run_task(cfg);
  CHECK(pts[0].result.beta == single.beta);
  CHECK(pts[0].result.accuracy == single.accuracy);

  const auto csv = slurp(dir / "sweep_out" / "sweep.csv");
  CHECK(line_count(csv) == 2);
  CHECK(csv.rfind("parameter,value,accuracy,final_mu\n", 0) == 0);
  CHECK(slurp(dir / "sweep_out" / "sweep" / "rho_1" / "result.json") == slurp(dir / "single" / "result.json"));
}

TEST_CASE("parallel sweep cells match sequential ones") {
  const auto dir = synthetic_dir("parallel");
  auto cfg = quick_config(dir);
  const TaskPair task = load_task(cfg);
  const std::vector<double> grid = {0.1, 1.0, 10.0};
  const auto seq = run_sweep(task, cfg, "lambda", grid);
  cfg.parallelism = 3;
  const auto par = run_sweep(task, cfg, "lambda", grid);
  for (std::size_t i = 0; i < grid.size(); ++i) CHECK(seq[i].result.beta == par[i].result.beta);
}

TEST_CASE("run_task outputs are complete and byte-identical across runs") {
  const auto dir = synthetic_dir("determinism", 3);
  auto cfg = quick_config(dir);
  cfg.output_dir = dir / "a";
  const auto r = run_task(cfg);
  cfg.output_dir = dir / "b";
  run_task(cfg);
  for (const char* f : {"result.json", "confusion.csv", "diagnostics.csv", "embeddings.csv"}) {
    CHECK(fs::exists(dir / "a" / f));
    CHECK(slurp(dir / "a" / f) == slurp(dir / "b" / f));
  }
  CHECK(fs::exists(dir / "a" / "metadata.json"));

  const auto result = json::parse(slurp(dir / "a" / "result.json"));
  CHECK(result["accuracy"].get<double>() == *r.accuracy);
  CHECK(result["target_predictions"].size() == 80);
  CHECK(result["adam_iterations"] == 4);
  int conf_sum = 0;
  for (const auto& row : result["confusion"])
    for (const auto& v : row) conf_sum += v.get<int>();
  CHECK(conf_sum == 80);
  CHECK(100.0 * r.confusion.trace() / 80.0 == doctest::Approx(*r.accuracy));

  const auto emb = slurp(dir / "a" / "embeddings.csv");
  CHECK(line_count(emb) == 161);
  CHECK(emb.rfind("domain,index,label,predicted,score_1,score_2\n", 0) == 0);
}

TEST_CASE("diagnostics export") {
  const auto dir = synthetic_dir("diagnostics");
  const auto cfg = quick_config(dir);
  const auto r = execute_task(load_task(cfg), cfg.preprocessing, cfg.solver);
  const auto csv = diagnostics_csv(r.history);
  CHECK(line_count(csv) == r.history.size() + 1);
  CHECK(csv.rfind("phase,iteration,mmd,mmcd,accuracy,mu,srm,", 0) == 0);
  export_diagnostics(r.history, dir / "d.csv");
  CHECK(slurp(dir / "d.csv") == csv);
  CHECK(line_count(diagnostics_csv({})) == 1);
}

TEST_CASE("identical domains give an mmd of zero throughout") {
  TaskPair t = make_synthetic_task(6, {30});
  t.target_X = t.source_X;
  t.target_y_truth = t.source_y;
  SolverConfig cfg;
  cfg.outer_iterations = 5;
  cfg.init_iterations = 2;
  const auto r = execute_task(t, Preprocessing::ZScoreThenUnitL2, cfg);
  for (const auto* h : {&r.init_history, &r.history})
    for (const auto& d : *h) CHECK(d.mmd_distance < 1e-12);
}

TEST_CASE("synthetic generator") {
  const auto a = make_synthetic_task(11);
  const auto b = make_synthetic_task(11);
  CHECK(a.source_X == b.source_X);
  CHECK(a.target_X == b.target_X);
  CHECK(a.num_source() == 200);
  CHECK(a.num_target() == 200);
  CHECK(a.source_X.cols() == SyntheticOptions{}.dim);
  CHECK(std::count(a.source_y.begin(), a.source_y.end(), 1) == 100);
  CHECK(make_synthetic_task(12).source_X != a.source_X);

  // Zero shift: both domains come from the same distribution.
  SyntheticOptions none;
  none.rotation_degrees = 0.0;
  none.translation = 0.0;
  none.per_class = 2000;
  const auto same = make_synthetic_task(3, none);
  const Vector gap = same.source_X.colwise().mean() - same.target_X.colwise().mean();
  CHECK(gap.cwiseAbs().maxCoeff() < 0.1);

  CHECK(code_of([] { make_synthetic_task(1, {0}); }) == ErrorCode::InvalidConfig);

  const auto dir = synthetic_dir("generator", 11);
  const auto cfg = load_config(dir / "config.json");
  CHECK(cfg.solver.params.xi == synthetic_solver_config().params.xi);
  const auto loaded = load_task(cfg);
  CHECK(loaded.source_X == make_synthetic_task(11, {40}).source_X);
  CHECK(loaded.num_classes == 2);
  CHECK(loaded.target_y_truth.has_value());
}

TEST_CASE("load_task infers the class count and checks files") {
  const auto dir = synthetic_dir("load");
  auto cfg = load_config(dir / "config.json");
  cfg.num_classes.reset();
  CHECK(load_task(cfg).num_classes == 2);
  cfg.task.source_labels = dir / "missing.csv";
  CHECK(code_of([&] { load_task(cfg); }) == ErrorCode::MissingFile);
}
