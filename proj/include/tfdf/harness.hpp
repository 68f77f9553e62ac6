#pragma once

#include "tfdf/data_io.hpp"
#include "tfdf/solver.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace tfdf {

/// Which objective components are active. Turning one off zeroes its weight.
struct AblationSwitches {
  bool srm = true;
  bool da = true;  // distribution alignment (lambda)
  bool ld = true;  // local / manifold (rho)
  bool gd = true;  // global / class confusion (xi)

  std::string name() const;
};

struct TaskFiles {
  std::string name = "task";
  std::filesystem::path source_features;
  std::filesystem::path source_labels;
  std::filesystem::path target_features;
  std::optional<std::filesystem::path> target_labels;
  /// Inferred from each file's extension when unset.
  std::optional<MatrixFormat> format;
};

struct ExperimentConfig {
  TaskFiles task;
  std::optional<int> num_classes;
  Preprocessing preprocessing = Preprocessing::ZScoreThenUnitL2;
  SolverConfig solver;
  AblationSwitches ablation;
  std::map<std::string, std::vector<double>> sweep;
  std::filesystem::path output_dir = "tfdf_out";
  int parallelism = 1;
};

/// Parses the JSON config. Unknown keys are InvalidConfig; relative paths resolve against base_dir.
ExperimentConfig parse_config(const nlohmann::json& json, const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);
nlohmann::json to_json(const ExperimentConfig& config);

SolverConfig apply_ablation(SolverConfig config, const AblationSwitches& switches);

struct TaskResult {
  std::string name;
  std::optional<double> accuracy;
  std::optional<double> source_only_accuracy;
  Eigen::MatrixXi confusion;  // empty without ground truth
  std::vector<Diagnostics> init_history;
  std::vector<Diagnostics> history;
  double seconds = 0.0;
  double mu = 0.5;
  Matrix beta;
  Matrix scores;  // C x n, beta^T K over all samples
  LabelVector predictions;
  int num_classes = 0;
  Index num_source = 0;
  LabelVector source_labels;
  std::optional<LabelVector> target_truth;
};

double accuracy(const LabelVector& pred, const LabelVector& truth);
Eigen::MatrixXi confusion_matrix(const LabelVector& pred, const LabelVector& truth, int num_classes);

/// Reads the task files named by the config; num_classes defaults to the largest label seen.
TaskPair load_task(const ExperimentConfig& config);

/// Applies the preprocessing scheme to each domain separately.
TaskPair preprocess_task(TaskPair task, Preprocessing scheme);

/// Preprocess, build kernel and graph, solve, predict and score. No file output.
TaskResult execute_task(const TaskPair& raw_task, Preprocessing scheme, const SolverConfig& solver,
                        const AblationSwitches& switches = {});

/// Writes result.json, confusion.csv, diagnostics.csv, embeddings.csv and metadata.json.
void write_task_outputs(const TaskResult& result, const std::filesystem::path& dir);

/// Deterministic result document (no timing).
nlohmann::json result_json(const TaskResult& result);

TaskResult run_task(const ExperimentConfig& config);

struct AblationRow {
  AblationSwitches switches;
  TaskResult result;
};

/// The five switch combinations SRM, SRM+DA, SRM+LD, SRM+DA+LD, SRM+DA+LD+GD.
std::vector<AblationSwitches> ablation_rows();

/// Runs every ablation row on the config's task; writes ablation.csv plus per-row outputs.
std::vector<AblationRow> run_ablation(const ExperimentConfig& config);
std::vector<AblationRow> run_ablation(const TaskPair& raw_task, const ExperimentConfig& config);

struct SweepPoint {
  double value = 0.0;
  TaskResult result;
};

const std::vector<std::string>& sweep_parameters();

/// Grid from the config, falling back to the standard search grid for p, rho, lambda, eta, delta.
std::vector<double> sweep_grid(const ExperimentConfig& config, const std::string& parameter);

/// Returns `config` with one parameter overridden. Throws UnknownParameter.
SolverConfig with_parameter(SolverConfig config, const std::string& parameter, double value);

std::vector<SweepPoint> run_sweep(const ExperimentConfig& config, const std::string& parameter,
                                  const std::vector<double>& grid);
std::vector<SweepPoint> run_sweep(const TaskPair& raw_task, const ExperimentConfig& config,
                                  const std::string& parameter, const std::vector<double>& grid);

/// One header row plus one row per diagnostics entry.
std::string diagnostics_csv(const std::vector<Diagnostics>& history);
void export_diagnostics(const std::vector<Diagnostics>& history, const std::filesystem::path& path);

/// Two-class shifted-Gaussian task. Source classes sit at +/- `separation` along the first axis;
/// the target applies a rotation in the first two axes and a translation along the second.
struct SyntheticOptions {
  int per_class = 100;
  int dim = 12;
  double separation = 2.0;
  double noise = 0.45;
  double rotation_degrees = 80.0;
  double translation = 1.0;
};

TaskPair make_synthetic_task(std::uint64_t seed, const SyntheticOptions& options = {});

/// Solver settings written into the synthetic config. Defaults except xi = 1e-4: the raw
/// confusion term grows like n^2 / C, and larger xi pulls Adam away from the closed-form optimum.
SolverConfig synthetic_solver_config();

/// Writes the synthetic task as CSV files plus a ready-to-run config.json in `dir`.
void write_synthetic_task(const std::filesystem::path& dir, std::uint64_t seed, const SyntheticOptions& options = {});

}  // namespace tfdf
