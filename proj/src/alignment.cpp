#include "tfdf/alignment.hpp"

#include "tfdf/kernel_graph.hpp"

#include <algorithm>
#include <cmath>

namespace tfdf {
namespace {

constexpr double kDiscriminatorRidge = 1e-3;

FeatureMatrix gather_rows(const FeatureMatrix& X, const std::vector<int>& labels, int cls) {
  std::vector<Index> idx;
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] == cls) idx.push_back(static_cast<Index>(i));
  return X(idx, Eigen::all);
}

}  // namespace

std::vector<DomainSplit> class_splits(const std::vector<int>& source_y, const std::vector<int>& target_y,
                                      int num_classes) {
  std::vector<DomainSplit> splits(static_cast<std::size_t>(std::max(num_classes, 0)));
  const auto check = [num_classes](int y) {
    if (y < 0 || y >= num_classes) throw Error(ErrorCode::LabelOutOfRange, "label " + std::to_string(y + 1));
    return static_cast<std::size_t>(y);
  };
  const auto ns = static_cast<Index>(source_y.size());
  for (Index i = 0; i < ns; ++i) splits[check(source_y[static_cast<std::size_t>(i)])].source.push_back(i);
  for (std::size_t i = 0; i < target_y.size(); ++i) splits[check(target_y[i])].target.push_back(ns + static_cast<Index>(i));
  return splits;
}

AlignmentSet make_alignment_set(const std::vector<int>& source_y, const std::vector<int>& pseudo_t, int num_classes,
                                double mu) {
  const auto ns = static_cast<Index>(source_y.size());
  const auto nt = static_cast<Index>(pseudo_t.size());
  if (ns < 1 || nt < 1) throw Error(ErrorCode::EmptyDomain, "both domains need at least one sample");
  if (!(mu >= 0.0 && mu <= 1.0)) throw Error(ErrorCode::InvalidConfig, "mu must lie in [0,1]");
  return {ns + nt, marginal_split(ns, nt), class_splits(source_y, pseudo_t, num_classes), mu};
}

double a_distance(const FeatureMatrix& Xs, const FeatureMatrix& Xt) {
  const Index ns = Xs.rows();
  const Index nt = Xt.rows();
  if (ns < 1 || nt < 1) throw Error(ErrorCode::EmptyDomain, "a_distance needs two nonempty domains");
  detail::require_dims(Xs.cols() == Xt.cols(), "a_distance feature dimensions differ");
  const Index n = ns + nt;
  const Index d = Xs.cols() + 1;

  Matrix D(n, d);
  D << Xs, Vector::Ones(ns), Xt, Vector::Ones(nt);
  Vector t(n);
  t << Vector::Constant(ns, -1.0), Vector::Constant(nt, 1.0);

  Vector score;
  if (d <= n) {
    Matrix gram = D.transpose() * D;
    gram.diagonal().array() += kDiscriminatorRidge;
    score = D * gram.ldlt().solve(D.transpose() * t);
  } else {
    Matrix gram = D * D.transpose();
    const Matrix plain = gram;
    gram.diagonal().array() += kDiscriminatorRidge;
    score = plain * gram.ldlt().solve(t);
  }

  Index wrong = 0;
  for (Index i = 0; i < n; ++i) {
    const bool predicted_target = score(i) > 0.0;
    if (predicted_target != (i >= ns)) ++wrong;
  }
  const double eps = std::clamp(static_cast<double>(wrong) / static_cast<double>(n), 0.0, 0.5);
  return 2.0 * (1.0 - 2.0 * eps);
}

double balance_factor(double d_marginal, double d_conditional_sum) {
  const double denom = d_marginal + d_conditional_sum;
  if (denom < 1e-12) return 0.5;
  return std::clamp(d_marginal / denom, 0.0, 1.0);
}

std::vector<double> conditional_a_distances(const FeatureMatrix& Xs, const FeatureMatrix& Xt,
                                            const std::vector<int>& source_y, const std::vector<int>& pseudo_t,
                                            int num_classes) {
  std::vector<double> d(static_cast<std::size_t>(num_classes), 0.0);
  for (int c = 0; c < num_classes; ++c) {
    const FeatureMatrix xs = gather_rows(Xs, source_y, c);
    const FeatureMatrix xt = gather_rows(Xt, pseudo_t, c);
    if (xs.rows() == 0 || xt.rows() == 0) continue;
    d[static_cast<std::size_t>(c)] = a_distance(xs, xt);
  }
  return d;
}

BalanceEstimate estimate_mu(const FeatureMatrix& Xs, const FeatureMatrix& Xt, const std::vector<int>& source_y,
                            const std::vector<int>& pseudo_t, int num_classes) {
  BalanceEstimate out;
  out.d_marginal = a_distance(Xs, Xt);
  out.d_class = conditional_a_distances(Xs, Xt, source_y, pseudo_t, num_classes);
  double sum = 0.0;
  for (double v : out.d_class) sum += v;
  out.mu = balance_factor(out.d_marginal, sum);
  return out;
}

double whitening_constant(const Matrix& K, double rank_tol) {
  const Matrix khk = K * (Centering{} * K);
  Eigen::SelfAdjointEigenSolver<Matrix> eig((khk + khk.transpose()) / 2);
  const Vector& ev = eig.eigenvalues();
  const double cutoff = rank_tol * ev.cwiseAbs().maxCoeff();
  double smallest = 0.0;
  for (Index i = 0; i < ev.size(); ++i) {
    if (ev(i) > cutoff) {
      smallest = ev(i);
      break;
    }
  }
  if (!(smallest > 0.0)) throw Error(ErrorCode::DegenerateData, "K H K has no positive eigenvalue");
  return 1.0 / smallest;
}

}  // namespace tfdf
