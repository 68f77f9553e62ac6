#pragma once

#include "tfdf/alignment.hpp"
#include "tfdf/common.hpp"
#include "tfdf/data_io.hpp"
#include "tfdf/kernel_graph.hpp"
#include "tfdf/objective.hpp"

#include <optional>
#include <vector>

namespace tfdf {

struct AdamConstants {
  double theta1 = 0.9;
  double theta2 = 0.999;
  double epsilon = 1e-8;
};

struct KernelConfig {
  KernelKind kind = KernelKind::Rbf;
  /// Median pairwise distance of the concatenated features when unset.
  std::optional<double> bandwidth;
};

enum class BaseClassifier { Nn1 };

struct SolverConfig {
  ObjectiveParams params;
  int outer_iterations = 100;  // Adam steps
  int init_iterations = 10;    // closed-form refinements
  double learning_rate = 5e-4;
  AdamConstants adam;
  Index neighbors = 10;
  KernelConfig kernel;
  BaseClassifier base_classifier = BaseClassifier::Nn1;
  /// Record beta after every iteration in SolveResult::snapshots.
  bool keep_snapshots = false;

  void validate() const;
};

enum class Phase { Closed, Adam };

struct Diagnostics {
  Phase phase = Phase::Closed;
  int iteration = 0;  // 1-based within its phase
  ObjectiveBreakdown<double> objective;
  double mmd_distance = 0.0;
  double mmcd_distance = 0.0;
  std::optional<double> target_accuracy;
  double mu = 0.5;
};

/// Kernel, graph and label structures shared by every iteration of a solve.
struct Problem {
  TaskPair task;
  KernelMatrix<double> kernel;
  GraphLaplacian<double> graph;
  LabelMatrix labels;

  Index num_source() const { return task.num_source(); }
  Index num_target() const { return task.num_target(); }
  const Matrix& K() const { return kernel.K; }
};

/// Validates the task and builds K (rbf or linear) and the cosine kNN Laplacian over [Xs; Xt].
Problem prepare(const TaskPair& task, const SolverConfig& config);

struct SolveResult {
  Matrix beta;
  LabelVector pseudo_labels;
  double mu = 0.5;
  /// Closed-form refinement history (both solvers) and Adam history (solve_tfdf only).
  std::vector<Diagnostics> init_history;
  std::vector<Diagnostics> history;
  /// beta after each Adam step, or after each closed-form step for solve_tfdf_v.
  std::vector<Matrix> snapshots;
};

/// Thrown on a NaN/Inf iterate; carries the diagnostics gathered so far.
class SolverFailure : public Error {
 public:
  SolverFailure(const std::string& message, std::vector<Diagnostics> history)
      : Error(ErrorCode::NonFiniteIterate, message), history_(std::move(history)) {}
  const std::vector<Diagnostics>& history() const { return history_; }

 private:
  std::vector<Diagnostics> history_;
};

/// 1-NN over Euclidean distance; ties go to the lower source index.
LabelVector nearest_neighbor_predict(const FeatureMatrix& Xs, const LabelVector& ys, const FeatureMatrix& Xt);

LabelVector initial_pseudo_labels(const TaskPair& task, BaseClassifier base = BaseClassifier::Nn1);

struct Prediction {
  Matrix scores;  // C x count
  LabelVector labels;
};

/// Scores beta^T K for columns [first, first + count); argmax per column, ties to the lower class.
Prediction predict(const Matrix& beta, const Matrix& K, Index first, Index count);

/// Solves ((A + lambda V + rho L + delta H) K + eta I) beta = A Y^T, retrying with diagonal
/// jitter (1e-10 mean|diag|, x10 per retry, 3 retries) before raising SingularSystem.
Matrix closed_form_beta(const Matrix& K, const LabelMatrix& labels, const Matrix& V, const Matrix& L,
                        const ObjectiveParams& params);

/// Per-iteration quantities for beta. The objective uses `alignment` (pseudo labels); the MMD and
/// MMCD distances use ground-truth target labels when the task has them.
Diagnostics compute_diagnostics(const Matrix& beta, const Problem& problem, const AlignmentSet& alignment,
                                const ObjectiveParams& params, Phase phase, int iteration);

SolveResult solve_tfdf_v(const Problem& problem, const SolverConfig& config);
SolveResult solve_tfdf_v(const TaskPair& task, const SolverConfig& config);

/// Closed-form initialisation followed by full-batch Adam with per-step pseudo-label refresh.
SolveResult solve_tfdf(const Problem& problem, const SolverConfig& config);
SolveResult solve_tfdf(const TaskPair& task, const SolverConfig& config);

/// Adam state update. The step divides by sqrt(v_hat + epsilon) with epsilon inside the root.
struct AdamState {
  Matrix m;
  Matrix v;
  int step = 0;

  /// Returns the increment to subtract from the parameters.
  Matrix update(const Matrix& grad, double learning_rate, const AdamConstants& constants);
};

}  // namespace tfdf
