#include "tfdf/solver.hpp"

#include <cmath>
#include <limits>

namespace tfdf {
namespace {

double percent_correct(const LabelVector& pred, const LabelVector& truth) {
  std::size_t hits = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) hits += pred[i] == truth[i] ? 1 : 0;
  return pred.empty() ? 0.0 : 100.0 * static_cast<double>(hits) / static_cast<double>(pred.size());
}

// mu from A-distances. The marginal distance depends only on the features and is computed once;
// class distances are recomputed only when the pseudo labels change.
class BalanceTracker {
 public:
  explicit BalanceTracker(const TaskPair& task) : task_(&task), d_marginal_(a_distance(task.source_X, task.target_X)) {}

  double mu(const LabelVector& pseudo) {
    if (!cached_ || pseudo != labels_) {
      const auto d = conditional_a_distances(task_->source_X, task_->target_X, task_->source_y, pseudo, task_->num_classes);
      double sum = 0.0;
      for (double v : d) sum += v;
      mu_ = balance_factor(d_marginal_, sum);
      labels_ = pseudo;
      cached_ = true;
    }
    return mu_;
  }

 private:
  const TaskPair* task_;
  double d_marginal_;
  bool cached_ = false;
  LabelVector labels_;
  double mu_ = 0.5;
};

LabelVector target_labels(const Matrix& beta, const Problem& problem) {
  return predict(beta, problem.K(), problem.num_source(), problem.num_target()).labels;
}

void require_finite(const Matrix& beta, const std::vector<Diagnostics>& history, int iteration) {
  if (!beta.allFinite()) {
    throw SolverFailure("non-finite coefficients at iteration " + std::to_string(iteration), history);
  }
}

}  // namespace

void SolverConfig::validate() const {
  params.validate();
  if (outer_iterations < 0 || init_iterations < 1) throw Error(ErrorCode::InvalidConfig, "iteration counts must be >= 1");
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) throw Error(ErrorCode::InvalidConfig, "learning rate must be >= 0");
  if (!(adam.theta1 > 0.0 && adam.theta1 < 1.0) || !(adam.theta2 > 0.0 && adam.theta2 < 1.0)) {
    throw Error(ErrorCode::InvalidConfig, "Adam decay rates must lie in (0,1)");
  }
  if (!(adam.epsilon > 0.0)) throw Error(ErrorCode::InvalidConfig, "Adam epsilon must be > 0");
  if (neighbors < 1) throw Error(ErrorCode::InvalidNeighborCount, "neighbors must be >= 1");
  if (kernel.bandwidth && !(*kernel.bandwidth > 0.0)) throw Error(ErrorCode::NonPositiveBandwidth, "bandwidth must be > 0");
}

Problem prepare(const TaskPair& task, const SolverConfig& config) {
  validate(task);
  config.validate();
  if (task.num_target() < 1) throw Error(ErrorCode::EmptyDomain, "target domain is empty");

  Matrix X(task.num_samples(), task.source_X.cols());
  X << task.source_X, task.target_X;

  Problem problem{task, {}, {}, build_label_structures(task)};
  if (config.kernel.kind == KernelKind::Rbf) {
    const double bandwidth = config.kernel.bandwidth ? *config.kernel.bandwidth : median_bandwidth(X);
    problem.kernel = rbf_kernel(X, bandwidth);
  } else {
    problem.kernel = linear_kernel(X);
  }
  problem.graph = build_graph(X, config.neighbors);
  return problem;
}

LabelVector nearest_neighbor_predict(const FeatureMatrix& Xs, const LabelVector& ys, const FeatureMatrix& Xt) {
  detail::require_dims(Xs.cols() == Xt.cols(), "1-NN feature dimensions differ");
  detail::require_dims(static_cast<Index>(ys.size()) == Xs.rows() && Xs.rows() > 0, "1-NN source labels");
  const Vector source_sq = Xs.rowwise().squaredNorm();
  LabelVector out(static_cast<std::size_t>(Xt.rows()));
  for (Index j = 0; j < Xt.rows(); ++j) {
    // |xs|^2 - 2 xs.xt ranks sources by distance to xt.
    const Vector score = source_sq - 2.0 * (Xs * Xt.row(j).transpose());
    Index best = 0;
    for (Index i = 1; i < score.size(); ++i)
      if (score(i) < score(best)) best = i;
    out[static_cast<std::size_t>(j)] = ys[static_cast<std::size_t>(best)];
  }
  return out;
}

LabelVector initial_pseudo_labels(const TaskPair& task, BaseClassifier) {
  return nearest_neighbor_predict(task.source_X, task.source_y, task.target_X);
}

Prediction predict(const Matrix& beta, const Matrix& K, Index first, Index count) {
  detail::require_dims(beta.rows() == K.rows() && first >= 0 && count >= 0 && first + count <= K.cols(),
                       "prediction column range");
  Prediction out{beta.transpose() * K.middleCols(first, count), LabelVector(static_cast<std::size_t>(count))};
  for (Index j = 0; j < count; ++j) {
    Index best = 0;
    for (Index c = 1; c < out.scores.rows(); ++c)
      if (out.scores(c, j) > out.scores(best, j)) best = c;
    out.labels[static_cast<std::size_t>(j)] = static_cast<int>(best);
  }
  return out;
}

Matrix closed_form_beta(const Matrix& K, const LabelMatrix& labels, const Matrix& V, const Matrix& L,
                        const ObjectiveParams& params) {
  const Index n = K.rows();
  detail::require_dims(K.cols() == n && V.rows() == n && V.cols() == n && L.rows() == n && L.cols() == n &&
                           labels.source_mask.size() == n && labels.Y.cols() == n,
                       "closed-form system sizes");
  Matrix P = params.lambda * V + params.rho * L + params.delta * centering_matrix(n);
  P.diagonal() += labels.source_mask;
  Matrix S = P * K;
  S.diagonal().array() += params.eta;
  const Matrix rhs = labels.source_mask.asDiagonal() * labels.Y.transpose();

  const double base_jitter = 1e-10 * std::max(S.diagonal().cwiseAbs().mean(), std::numeric_limits<double>::min());
  double jitter = 0.0;
  for (int attempt = 0; attempt <= 3; ++attempt) {
    if (attempt > 0) {
      const double next = base_jitter * std::pow(10.0, attempt - 1);
      S.diagonal().array() += next - jitter;
      jitter = next;
    }
    Eigen::PartialPivLU<Matrix> lu(S);
    if (!(lu.rcond() > 1e-15)) continue;
    Matrix beta = lu.solve(rhs);
    if (beta.allFinite()) return beta;
  }
  throw Error(ErrorCode::SingularSystem, "closed-form system is singular after jitter retries");
}

Diagnostics compute_diagnostics(const Matrix& beta, const Problem& problem, const AlignmentSet& alignment,
                                const ObjectiveParams& params, Phase phase, int iteration) {
  const Matrix& K = problem.K();
  Diagnostics d;
  d.phase = phase;
  d.iteration = iteration;
  d.mu = alignment.mu;
  d.objective = total_objective(beta, K, problem.labels.Y, problem.labels.source_mask,
                                DiscrepancyOperator<double>(alignment, K), problem.graph.L, Centering{}, params);

  const auto& task = problem.task;
  const LabelVector& reference = task.target_y_truth ? *task.target_y_truth : target_labels(beta, problem);
  const AlignmentSet truth = make_alignment_set(task.source_y, reference, task.num_classes, alignment.mu);

  // Embeddings F^T = K beta (n x C); each term is a C x C statistic of F.
  const Matrix F = K * beta;
  const auto mean_part = [&](const DomainSplit& s) { return (F.array() * apply_mean_matrix(s, F).array()).sum(); };
  const auto cov_part = [&](const DomainSplit& s) { return (F.transpose() * apply_covariance_matrix(s, F)).squaredNorm(); };
  double mmd = mean_part(truth.marginal);
  double conditional = 0.0;
  for (const auto& s : truth.classes) {
    if (s.empty()) continue;
    const double m = mean_part(s);
    mmd += m;
    conditional += m + cov_part(s);
  }
  d.mmd_distance = std::max(mmd, 0.0);
  const double marginal = mean_part(truth.marginal) + cov_part(truth.marginal);
  d.mmcd_distance = std::max((1.0 - alignment.mu) * marginal + alignment.mu * conditional, 0.0);
  if (task.target_y_truth) d.target_accuracy = percent_correct(target_labels(beta, problem), *task.target_y_truth);
  return d;
}

SolveResult solve_tfdf_v(const Problem& problem, const SolverConfig& config) {
  config.validate();
  const auto& task = problem.task;
  ObjectiveParams params = config.params;
  params.xi = 0.0;

  SolveResult out;
  out.pseudo_labels = initial_pseudo_labels(task, config.base_classifier);
  BalanceTracker balance(task);
  for (int t = 1; t <= config.init_iterations; ++t) {
    const AlignmentSet set = make_alignment_set(task.source_y, out.pseudo_labels, task.num_classes, balance.mu(out.pseudo_labels));
    const Matrix V = assemble_V(set, problem.K());
    out.beta = closed_form_beta(problem.K(), problem.labels, V, problem.graph.L, params);
    require_finite(out.beta, out.init_history, t);
    out.mu = set.mu;
    out.pseudo_labels = target_labels(out.beta, problem);
    out.init_history.push_back(compute_diagnostics(out.beta, problem, set, params, Phase::Closed, t));
    if (config.keep_snapshots) out.snapshots.push_back(out.beta);
  }
  return out;
}

SolveResult solve_tfdf_v(const TaskPair& task, const SolverConfig& config) {
  return solve_tfdf_v(prepare(task, config), config);
}

Matrix AdamState::update(const Matrix& grad, double learning_rate, const AdamConstants& c) {
  if (step == 0) {
    m = Matrix::Zero(grad.rows(), grad.cols());
    v = Matrix::Zero(grad.rows(), grad.cols());
  }
  ++step;
  m = c.theta1 * m + (1.0 - c.theta1) * grad;
  v = c.theta2 * v + (1.0 - c.theta2) * grad.cwiseAbs2();
  const double m_scale = 1.0 / (1.0 - std::pow(c.theta1, step));
  const double v_scale = 1.0 / (1.0 - std::pow(c.theta2, step));
  return learning_rate * ((m_scale * m).array() / (v_scale * v.array() + c.epsilon).sqrt()).matrix();
}

SolveResult solve_tfdf(const Problem& problem, const SolverConfig& config) {
  SolveResult out = solve_tfdf_v(problem, config);
  out.snapshots.clear();
  const auto& task = problem.task;
  const Matrix& K = problem.K();
  BalanceTracker balance(task);
  AdamState adam;

  for (int t = 1; t <= config.outer_iterations; ++t) {
    const AlignmentSet set = make_alignment_set(task.source_y, out.pseudo_labels, task.num_classes, balance.mu(out.pseudo_labels));
    const DiscrepancyOperator<double> V(set, K);
    const Matrix g = gradient(out.beta, K, problem.labels.Y, problem.labels.source_mask, V, problem.graph.L,
                              Centering{}, config.params);
    out.beta -= adam.update(g, config.learning_rate, config.adam);
    require_finite(out.beta, out.history, t);
    out.mu = set.mu;
    out.pseudo_labels = target_labels(out.beta, problem);
    out.history.push_back(compute_diagnostics(out.beta, problem, set, config.params, Phase::Adam, t));
    if (config.keep_snapshots) out.snapshots.push_back(out.beta);
  }
  return out;
}

SolveResult solve_tfdf(const TaskPair& task, const SolverConfig& config) {
  return solve_tfdf(prepare(task, config), config);
}

}  // namespace tfdf
