#include "tfdf/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <thread>

namespace tfdf {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

[[noreturn]] void config_error(const std::string& message) { throw Error(ErrorCode::InvalidConfig, message); }

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) config_error(where + " must be an object");
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.count(key)) config_error("unknown key '" + key + "' in " + where);
  }
}

double get_number(const json& obj, const std::string& key, const std::string& where) {
  const auto& v = obj.at(key);
  if (!v.is_number()) config_error(where + "." + key + " must be a number");
  return v.get<double>();
}

int get_int(const json& obj, const std::string& key, const std::string& where) {
  const auto& v = obj.at(key);
  if (!v.is_number_integer()) config_error(where + "." + key + " must be an integer");
  return v.get<int>();
}

bool get_bool(const json& obj, const std::string& key, const std::string& where) {
  const auto& v = obj.at(key);
  if (!v.is_boolean()) config_error(where + "." + key + " must be a boolean");
  return v.get<bool>();
}

std::string get_string(const json& obj, const std::string& key, const std::string& where) {
  const auto& v = obj.at(key);
  if (!v.is_string()) config_error(where + "." + key + " must be a string");
  return v.get<std::string>();
}

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

SolverConfig parse_solver(const json& obj) {
  static const std::set<std::string> keys = {
      "eta", "lambda", "rho", "xi", "delta", "outer_iterations", "init_iterations", "learning_rate", "adam_theta1",
      "adam_theta2", "adam_epsilon", "neighbors", "kernel", "bandwidth", "base_classifier", "keep_snapshots"};
  check_keys(obj, keys, "solver");
  SolverConfig cfg;
  const std::string w = "solver";
  if (obj.contains("eta")) cfg.params.eta = get_number(obj, "eta", w);
  if (obj.contains("lambda")) cfg.params.lambda = get_number(obj, "lambda", w);
  if (obj.contains("rho")) cfg.params.rho = get_number(obj, "rho", w);
  if (obj.contains("xi")) cfg.params.xi = get_number(obj, "xi", w);
  if (obj.contains("delta")) cfg.params.delta = get_number(obj, "delta", w);
  if (obj.contains("outer_iterations")) cfg.outer_iterations = get_int(obj, "outer_iterations", w);
  if (obj.contains("init_iterations")) cfg.init_iterations = get_int(obj, "init_iterations", w);
  if (obj.contains("learning_rate")) cfg.learning_rate = get_number(obj, "learning_rate", w);
  if (obj.contains("adam_theta1")) cfg.adam.theta1 = get_number(obj, "adam_theta1", w);
  if (obj.contains("adam_theta2")) cfg.adam.theta2 = get_number(obj, "adam_theta2", w);
  if (obj.contains("adam_epsilon")) cfg.adam.epsilon = get_number(obj, "adam_epsilon", w);
  if (obj.contains("neighbors")) cfg.neighbors = get_int(obj, "neighbors", w);
  if (obj.contains("kernel")) {
    const auto kind = get_string(obj, "kernel", w);
    if (kind == "rbf") cfg.kernel.kind = KernelKind::Rbf;
    else if (kind == "linear") cfg.kernel.kind = KernelKind::Linear;
    else config_error("solver.kernel must be 'rbf' or 'linear'");
  }
  if (obj.contains("bandwidth") && !obj.at("bandwidth").is_null()) cfg.kernel.bandwidth = get_number(obj, "bandwidth", w);
  if (obj.contains("base_classifier") && get_string(obj, "base_classifier", w) != "nn1") {
    config_error("solver.base_classifier must be 'nn1'");
  }
  if (obj.contains("keep_snapshots")) cfg.keep_snapshots = get_bool(obj, "keep_snapshots", w);
  cfg.validate();
  return cfg;
}

json solver_json(const SolverConfig& cfg) {
  json j = {{"eta", cfg.params.eta},
            {"lambda", cfg.params.lambda},
            {"rho", cfg.params.rho},
            {"xi", cfg.params.xi},
            {"delta", cfg.params.delta},
            {"outer_iterations", cfg.outer_iterations},
            {"init_iterations", cfg.init_iterations},
            {"learning_rate", cfg.learning_rate},
            {"adam_theta1", cfg.adam.theta1},
            {"adam_theta2", cfg.adam.theta2},
            {"adam_epsilon", cfg.adam.epsilon},
            {"neighbors", cfg.neighbors},
            {"kernel", cfg.kernel.kind == KernelKind::Rbf ? "rbf" : "linear"},
            {"base_classifier", "nn1"}};
  j["bandwidth"] = cfg.kernel.bandwidth ? json(*cfg.kernel.bandwidth) : json(nullptr);
  return j;
}

FeatureMatrix load_features(const fs::path& path, const std::optional<MatrixFormat>& format) {
  return load_matrix(path, format ? *format : format_from_extension(path));
}

// Runs body(i) for i in [0, count) on up to `parallelism` threads; rethrows the lowest-index failure.
template <typename Body>
void parallel_for(std::size_t count, int parallelism, Body&& body) {
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        body(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const auto threads = static_cast<std::size_t>(std::clamp<int>(parallelism, 1, static_cast<int>(std::max<std::size_t>(count, 1))));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

std::string phase_name(Phase p) { return p == Phase::Closed ? "closed" : "adam"; }

json breakdown_json(const ObjectiveBreakdown<double>& b) {
  return {{"srm", b.srm},           {"ridge", b.ridge},
          {"distribution", b.distribution}, {"manifold", b.manifold},
          {"confusion", b.confusion}, {"constraint_penalty", b.constraint_penalty},
          {"total", b.total}};
}

std::string embeddings_csv(const TaskResult& r) {
  const auto& truth = r.target_truth;
  std::ostringstream out;
  out << "domain,index,label,predicted";
  for (int c = 1; c <= r.num_classes; ++c) out << ",score_" << c;
  out << '\n';
  for (Index i = 0; i < r.scores.cols(); ++i) {
    const bool source = i < r.num_source;
    const auto local = static_cast<std::size_t>(source ? i : i - r.num_source);
    Index best = 0;
    for (Index c = 1; c < r.scores.rows(); ++c)
      if (r.scores(c, i) > r.scores(best, i)) best = c;
    out << (source ? "source" : "target") << ',' << local << ',';
    if (source) out << r.source_labels[local] + 1;
    else if (truth) out << (*truth)[local] + 1;
    out << ',' << best + 1;
    for (Index c = 0; c < r.scores.rows(); ++c) out << ',' << format_double(r.scores(c, i));
    out << '\n';
  }
  return out.str();
}

}  // namespace

void write_task_outputs(const TaskResult& result, const fs::path& dir) {
  fs::create_directories(dir);
  write_file_atomic(dir / "result.json", result_json(result).dump(2) + "\n");

  std::ostringstream conf;
  for (Index i = 0; i < result.confusion.rows(); ++i) {
    for (Index j = 0; j < result.confusion.cols(); ++j) conf << (j ? "," : "") << result.confusion(i, j);
    conf << '\n';
  }
  write_file_atomic(dir / "confusion.csv", conf.str());

  std::vector<Diagnostics> all = result.init_history;
  all.insert(all.end(), result.history.begin(), result.history.end());
  export_diagnostics(all, dir / "diagnostics.csv");
  write_file_atomic(dir / "embeddings.csv", embeddings_csv(result));

  const auto now = std::chrono::system_clock::now().time_since_epoch();
  const json meta = {{"wall_clock_seconds", result.seconds},
                     {"finished_unix_seconds", std::chrono::duration_cast<std::chrono::seconds>(now).count()}};
  write_file_atomic(dir / "metadata.json", meta.dump(2) + "\n");
}

namespace {

std::string value_label(double v) {
  std::string s = format_double(v);
  std::replace(s.begin(), s.end(), '.', 'p');
  return s;
}

}  // namespace

std::string AblationSwitches::name() const {
  std::string s = "SRM";
  if (da) s += "+DA";
  if (ld) s += "+LD";
  if (gd) s += "+GD";
  return s;
}

ExperimentConfig parse_config(const json& j, const fs::path& base_dir) {
  check_keys(j, {"task", "num_classes", "preprocessing", "solver", "ablation", "sweep", "output_dir", "parallelism"},
             "config");
  ExperimentConfig cfg;
  if (!j.contains("task")) config_error("config.task is required");
  const auto& t = j.at("task");
  check_keys(t, {"name", "source_features", "source_labels", "target_features", "target_labels", "format"}, "task");
  for (const char* key : {"source_features", "source_labels", "target_features"}) {
    if (!t.contains(key)) config_error(std::string("task.") + key + " is required");
  }
  if (t.contains("name")) cfg.task.name = get_string(t, "name", "task");
  cfg.task.source_features = resolve(base_dir, get_string(t, "source_features", "task"));
  cfg.task.source_labels = resolve(base_dir, get_string(t, "source_labels", "task"));
  cfg.task.target_features = resolve(base_dir, get_string(t, "target_features", "task"));
  if (t.contains("target_labels") && !t.at("target_labels").is_null()) {
    cfg.task.target_labels = resolve(base_dir, get_string(t, "target_labels", "task"));
  }
  if (t.contains("format")) cfg.task.format = parse_matrix_format(get_string(t, "format", "task"));

  if (j.contains("num_classes")) {
    cfg.num_classes = get_int(j, "num_classes", "config");
    if (*cfg.num_classes < 2) config_error("num_classes must be >= 2");
  }
  if (j.contains("preprocessing")) cfg.preprocessing = parse_preprocessing(get_string(j, "preprocessing", "config"));
  if (j.contains("solver")) cfg.solver = parse_solver(j.at("solver"));
  if (j.contains("ablation")) {
    const auto& a = j.at("ablation");
    check_keys(a, {"srm", "da", "ld", "gd"}, "ablation");
    if (a.contains("srm")) cfg.ablation.srm = get_bool(a, "srm", "ablation");
    if (a.contains("da")) cfg.ablation.da = get_bool(a, "da", "ablation");
    if (a.contains("ld")) cfg.ablation.ld = get_bool(a, "ld", "ablation");
    if (a.contains("gd")) cfg.ablation.gd = get_bool(a, "gd", "ablation");
    if (!cfg.ablation.srm) config_error("ablation.srm cannot be turned off");
  }
  if (j.contains("sweep")) {
    const auto& s = j.at("sweep");
    if (!s.is_object()) config_error("sweep must be an object");
    for (const auto& [key, grid] : s.items()) {
      const auto& params = sweep_parameters();
      if (std::find(params.begin(), params.end(), key) == params.end()) {
        throw Error(ErrorCode::UnknownParameter, "sweep parameter '" + key + "'");
      }
      if (!grid.is_array() || grid.empty()) config_error("sweep." + key + " must be a nonempty array");
      std::vector<double> values;
      for (const auto& v : grid) {
        if (!v.is_number()) config_error("sweep." + key + " must contain numbers");
        values.push_back(v.get<double>());
      }
      cfg.sweep[key] = std::move(values);
    }
  }
  if (j.contains("output_dir")) cfg.output_dir = resolve(base_dir, get_string(j, "output_dir", "config"));
  if (j.contains("parallelism")) {
    cfg.parallelism = get_int(j, "parallelism", "config");
    if (cfg.parallelism < 1) config_error("parallelism must be >= 1");
  }
  return cfg;
}

ExperimentConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::InvalidConfig, "cannot read config " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    config_error(std::string("config is not valid JSON: ") + e.what());
  }
  return parse_config(j, path.parent_path());
}

json to_json(const ExperimentConfig& cfg) {
  json task = {{"name", cfg.task.name},
               {"source_features", cfg.task.source_features.string()},
               {"source_labels", cfg.task.source_labels.string()},
               {"target_features", cfg.task.target_features.string()}};
  if (cfg.task.target_labels) task["target_labels"] = cfg.task.target_labels->string();
  if (cfg.task.format) task["format"] = *cfg.task.format == MatrixFormat::Csv ? "csv" : "raw-f64";
  json j = {{"task", task},
            {"preprocessing", std::string(to_string(cfg.preprocessing))},
            {"solver", solver_json(cfg.solver)},
            {"ablation", {{"srm", cfg.ablation.srm}, {"da", cfg.ablation.da}, {"ld", cfg.ablation.ld}, {"gd", cfg.ablation.gd}}},
            {"output_dir", cfg.output_dir.string()},
            {"parallelism", cfg.parallelism}};
  if (cfg.num_classes) j["num_classes"] = *cfg.num_classes;
  if (!cfg.sweep.empty()) j["sweep"] = cfg.sweep;
  return j;
}

SolverConfig apply_ablation(SolverConfig config, const AblationSwitches& switches) {
  if (!switches.srm) throw Error(ErrorCode::InvalidConfig, "the SRM term cannot be disabled");
  if (!switches.da) config.params.lambda = 0.0;
  if (!switches.ld) config.params.rho = 0.0;
  if (!switches.gd) config.params.xi = 0.0;
  return config;
}

double accuracy(const LabelVector& pred, const LabelVector& truth) {
  if (pred.size() != truth.size()) throw Error(ErrorCode::LengthMismatch, "prediction and truth lengths differ");
  if (pred.empty()) throw Error(ErrorCode::LengthMismatch, "no samples to score");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) hits += pred[i] == truth[i] ? 1 : 0;
  return 100.0 * static_cast<double>(hits) / static_cast<double>(pred.size());
}

Eigen::MatrixXi confusion_matrix(const LabelVector& pred, const LabelVector& truth, int num_classes) {
  if (pred.size() != truth.size()) throw Error(ErrorCode::LengthMismatch, "prediction and truth lengths differ");
  Eigen::MatrixXi out = Eigen::MatrixXi::Zero(num_classes, num_classes);
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (pred[i] < 0 || pred[i] >= num_classes || truth[i] < 0 || truth[i] >= num_classes) {
      throw Error(ErrorCode::LabelOutOfRange, "label outside 1.." + std::to_string(num_classes));
    }
    ++out(truth[i], pred[i]);
  }
  return out;
}

TaskPair load_task(const ExperimentConfig& config) {
  TaskPair task;
  task.source_X = load_features(config.task.source_features, config.task.format);
  task.source_y = load_labels(config.task.source_labels);
  task.target_X = load_features(config.task.target_features, config.task.format);
  if (config.task.target_labels) task.target_y_truth = load_labels(*config.task.target_labels);

  int max_label = *std::max_element(task.source_y.begin(), task.source_y.end());
  if (task.target_y_truth && !task.target_y_truth->empty()) {
    max_label = std::max(max_label, *std::max_element(task.target_y_truth->begin(), task.target_y_truth->end()));
  }
  task.num_classes = config.num_classes ? *config.num_classes : max_label + 1;
  validate(task);
  return task;
}

TaskPair preprocess_task(TaskPair task, Preprocessing scheme) {
  task.source_X = preprocess(task.source_X, scheme);
  task.target_X = preprocess(task.target_X, scheme);
  return task;
}

TaskResult execute_task(const TaskPair& raw_task, Preprocessing scheme, const SolverConfig& solver,
                        const AblationSwitches& switches) {
  const auto start = std::chrono::steady_clock::now();
  const TaskPair task = preprocess_task(raw_task, scheme);
  const SolverConfig cfg = apply_ablation(solver, switches);
  const Problem problem = prepare(task, cfg);
  SolveResult solved = solve_tfdf(problem, cfg);

  TaskResult r;
  r.num_classes = task.num_classes;
  r.num_source = task.num_source();
  r.source_labels = task.source_y;
  r.target_truth = task.target_y_truth;
  r.mu = solved.mu;
  r.scores = solved.beta.transpose() * problem.K();
  r.beta = std::move(solved.beta);
  r.predictions = std::move(solved.pseudo_labels);
  r.init_history = std::move(solved.init_history);
  r.history = std::move(solved.history);
  if (task.target_y_truth) {
    r.accuracy = accuracy(r.predictions, *task.target_y_truth);
    r.confusion = confusion_matrix(r.predictions, *task.target_y_truth, task.num_classes);
    r.source_only_accuracy =
        accuracy(nearest_neighbor_predict(task.source_X, task.source_y, task.target_X), *task.target_y_truth);
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

json result_json(const TaskResult& r) {
  json j;
  j["task"] = r.name;
  j["accuracy"] = r.accuracy ? json(*r.accuracy) : json(nullptr);
  j["source_only_accuracy"] = r.source_only_accuracy ? json(*r.source_only_accuracy) : json(nullptr);
  j["num_classes"] = r.num_classes;
  j["num_source"] = r.num_source;
  j["num_target"] = r.scores.cols() - r.num_source;
  j["final_mu"] = r.mu;
  json conf = json::array();
  for (Index i = 0; i < r.confusion.rows(); ++i) {
    json row = json::array();
    for (Index k = 0; k < r.confusion.cols(); ++k) row.push_back(r.confusion(i, k));
    conf.push_back(row);
  }
  j["confusion"] = conf;
  j["closed_form_iterations"] = r.init_history.size();
  j["adam_iterations"] = r.history.size();
  const auto& last = !r.history.empty() ? r.history.back() : r.init_history.back();
  j["final_objective"] = breakdown_json(last.objective);
  j["final_mmd"] = last.mmd_distance;
  j["final_mmcd"] = last.mmcd_distance;
  json pred = json::array();
  for (int y : r.predictions) pred.push_back(y + 1);
  j["target_predictions"] = pred;
  return j;
}

TaskResult run_task(const ExperimentConfig& config) {
  const TaskPair task = load_task(config);
  TaskResult r = execute_task(task, config.preprocessing, config.solver, config.ablation);
  r.name = config.task.name;
  write_task_outputs(r, config.output_dir);
  return r;
}

std::vector<AblationSwitches> ablation_rows() {
  return {{true, false, false, false}, {true, true, false, false}, {true, false, true, false},
          {true, true, true, false},   {true, true, true, true}};
}

std::vector<AblationRow> run_ablation(const TaskPair& raw_task, const ExperimentConfig& config) {
  const auto rows = ablation_rows();
  std::vector<AblationRow> out(rows.size());
  parallel_for(rows.size(), config.parallelism, [&](std::size_t i) {
    out[i] = {rows[i], execute_task(raw_task, config.preprocessing, config.solver, rows[i])};
    out[i].result.name = config.task.name;
  });
  return out;
}

std::vector<AblationRow> run_ablation(const ExperimentConfig& config) {
  const TaskPair task = load_task(config);
  auto rows = run_ablation(task, config);
  std::ostringstream csv;
  csv << "row,srm,da,ld,gd,accuracy,final_mu\n";
  for (const auto& row : rows) {
    const auto& s = row.switches;
    csv << s.name() << ',' << s.srm << ',' << s.da << ',' << s.ld << ',' << s.gd << ','
        << (row.result.accuracy ? format_double(*row.result.accuracy) : "") << ',' << format_double(row.result.mu) << '\n';
    write_task_outputs(row.result, config.output_dir / "ablation" / s.name());
  }
  write_file_atomic(config.output_dir / "ablation.csv", csv.str());
  return rows;
}

const std::vector<std::string>& sweep_parameters() {
  static const std::vector<std::string> names = {"p", "rho", "lambda", "eta", "xi", "delta", "alpha"};
  return names;
}

std::vector<double> sweep_grid(const ExperimentConfig& config, const std::string& parameter) {
  const auto& params = sweep_parameters();
  if (std::find(params.begin(), params.end(), parameter) == params.end()) {
    throw Error(ErrorCode::UnknownParameter, "sweep parameter '" + parameter + "'");
  }
  if (auto it = config.sweep.find(parameter); it != config.sweep.end()) return it->second;
  if (parameter == "p") return {5, 10, 15, 20, 30};
  if (parameter == "xi" || parameter == "alpha") {
    throw Error(ErrorCode::InvalidConfig, "no default grid for '" + parameter + "'; set sweep." + parameter);
  }
  return {0.001, 0.005, 0.01, 0.05, 0.1, 0.5, 1, 5, 10};
}

SolverConfig with_parameter(SolverConfig config, const std::string& parameter, double value) {
  if (parameter == "p") {
    if (value < 1 || value != std::floor(value)) throw Error(ErrorCode::InvalidNeighborCount, "p must be a positive integer");
    config.neighbors = static_cast<Index>(value);
  } else if (parameter == "rho") {
    config.params.rho = value;
  } else if (parameter == "lambda") {
    config.params.lambda = value;
  } else if (parameter == "eta") {
    config.params.eta = value;
  } else if (parameter == "xi") {
    config.params.xi = value;
  } else if (parameter == "delta") {
    config.params.delta = value;
  } else if (parameter == "alpha") {
    config.learning_rate = value;
  } else {
    throw Error(ErrorCode::UnknownParameter, "sweep parameter '" + parameter + "'");
  }
  config.validate();
  return config;
}

std::vector<SweepPoint> run_sweep(const TaskPair& raw_task, const ExperimentConfig& config, const std::string& parameter,
                                  const std::vector<double>& grid) {
  std::vector<SolverConfig> cells;
  for (double v : grid) cells.push_back(with_parameter(config.solver, parameter, v));
  std::vector<SweepPoint> out(grid.size());
  parallel_for(grid.size(), config.parallelism, [&](std::size_t i) {
    out[i] = {grid[i], execute_task(raw_task, config.preprocessing, cells[i], config.ablation)};
    out[i].result.name = config.task.name;
  });
  return out;
}

std::vector<SweepPoint> run_sweep(const ExperimentConfig& config, const std::string& parameter,
                                  const std::vector<double>& grid) {
  const TaskPair task = load_task(config);
  auto points = run_sweep(task, config, parameter, grid);
  std::ostringstream csv;
  csv << "parameter,value,accuracy,final_mu\n";
  for (const auto& pt : points) {
    csv << parameter << ',' << format_double(pt.value) << ','
        << (pt.result.accuracy ? format_double(*pt.result.accuracy) : "") << ',' << format_double(pt.result.mu) << '\n';
    write_task_outputs(pt.result, config.output_dir / "sweep" / (parameter + "_" + value_label(pt.value)));
  }
  write_file_atomic(config.output_dir / "sweep.csv", csv.str());
  return points;
}

std::string diagnostics_csv(const std::vector<Diagnostics>& history) {
  std::ostringstream out;
  out << "phase,iteration,mmd,mmcd,accuracy,mu,srm,ridge,distribution,manifold,confusion,constraint_penalty,total\n";
  for (const auto& d : history) {
    const auto& o = d.objective;
    out << phase_name(d.phase) << ',' << d.iteration << ',' << format_double(d.mmd_distance) << ','
        << format_double(d.mmcd_distance) << ',' << (d.target_accuracy ? format_double(*d.target_accuracy) : "") << ','
        << format_double(d.mu) << ',' << format_double(o.srm) << ',' << format_double(o.ridge) << ','
        << format_double(o.distribution) << ',' << format_double(o.manifold) << ',' << format_double(o.confusion) << ','
        << format_double(o.constraint_penalty) << ',' << format_double(o.total) << '\n';
  }
  return out.str();
}

void export_diagnostics(const std::vector<Diagnostics>& history, const fs::path& path) {
  write_file_atomic(path, diagnostics_csv(history));
}

TaskPair make_synthetic_task(std::uint64_t seed, const SyntheticOptions& o) {
  if (o.per_class < 1 || o.dim < 2 || !(o.noise > 0.0)) throw Error(ErrorCode::InvalidConfig, "bad synthetic options");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, o.noise);
  const Index n = 2 * o.per_class;

  const auto sample = [&](FeatureMatrix& X, LabelVector& y) {
    X.resize(n, o.dim);
    y.resize(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) {
      const int cls = static_cast<int>(i % 2);
      y[static_cast<std::size_t>(i)] = cls;
      for (Index k = 0; k < o.dim; ++k) X(i, k) = gauss(rng);
      X(i, 0) += cls == 0 ? -o.separation : o.separation;
    }
  };

  TaskPair task;
  task.num_classes = 2;
  sample(task.source_X, task.source_y);
  LabelVector target_y;
  sample(task.target_X, target_y);
  const double theta = o.rotation_degrees * std::numbers::pi / 180.0;
  const double c = std::cos(theta), s = std::sin(theta);
  for (Index i = 0; i < n; ++i) {
    const double x = task.target_X(i, 0), y = task.target_X(i, 1);
    task.target_X(i, 0) = c * x - s * y;
    task.target_X(i, 1) = s * x + c * y + o.translation;
  }
  task.target_y_truth = std::move(target_y);
  return task;
}

SolverConfig synthetic_solver_config() {
  SolverConfig cfg;
  cfg.params.xi = 1e-4;
  return cfg;
}

void write_synthetic_task(const fs::path& dir, std::uint64_t seed, const SyntheticOptions& options) {
  const TaskPair task = make_synthetic_task(seed, options);
  fs::create_directories(dir);
  save_matrix(dir / "source_features.csv", task.source_X, MatrixFormat::Csv);
  save_labels(dir / "source_labels.csv", task.source_y);
  save_matrix(dir / "target_features.csv", task.target_X, MatrixFormat::Csv);
  save_labels(dir / "target_labels.csv", *task.target_y_truth);

  ExperimentConfig cfg;
  cfg.task = {"synthetic-" + std::to_string(seed), "source_features.csv", "source_labels.csv", "target_features.csv",
              fs::path("target_labels.csv"), MatrixFormat::Csv};
  cfg.num_classes = 2;
  cfg.solver = synthetic_solver_config();
  cfg.output_dir = "results";
  write_file_atomic(dir / "config.json", to_json(cfg).dump(2) + "\n");
}

}  // namespace tfdf
