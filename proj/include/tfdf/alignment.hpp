#pragma once

#include "tfdf/common.hpp"

#include <utility>
#include <vector>

namespace tfdf {

/// The two sample sets compared by one mean/covariance discrepancy term. Indices refer to
/// rows of the concatenated [source; target] matrix.
struct DomainSplit {
  std::vector<Index> source;
  std::vector<Index> target;

  bool empty() const { return source.empty() || target.empty(); }
  /// Source indices followed by target indices.
  std::vector<Index> members() const {
    std::vector<Index> all = source;
    all.insert(all.end(), target.begin(), target.end());
    return all;
  }
};

struct ClassCount {
  Index source = 0;
  Index target = 0;
};

namespace detail {

// Rows of X ordered as split.members(); returns the same rows of Z X.
template <typename Derived>
Mat<typename Derived::Scalar> compact_covariance(const DomainSplit& split, const Eigen::MatrixBase<Derived>& X) {
  using Scalar = typename Derived::Scalar;
  const auto ns = static_cast<Index>(split.source.size());
  const auto nt = static_cast<Index>(split.target.size());
  Mat<Scalar> out(ns + nt, X.cols());
  const auto xs = X.topRows(ns);
  const auto xt = X.bottomRows(nt);
  out.topRows(ns) = (xs.rowwise() - xs.colwise().mean()) / static_cast<Scalar>(ns);
  out.bottomRows(nt) = (xt.rowwise() - xt.colwise().mean()) / static_cast<Scalar>(-nt);
  return out;
}

template <typename Scalar>
Vec<Scalar> mean_weights(const DomainSplit& split, Index n) {
  Vec<Scalar> e = Vec<Scalar>::Zero(n);
  for (Index i : split.source) e(i) = Scalar(1) / static_cast<Scalar>(split.source.size());
  for (Index i : split.target) e(i) = Scalar(-1) / static_cast<Scalar>(split.target.size());
  return e;
}

}  // namespace detail

/// Dense MMD matrix M: 1/n_s^2 inside the source set, 1/n_t^2 inside the target set,
/// -1/(n_s n_t) across, 0 for samples outside the split. M = e e^T is rank one.
template <typename Scalar = double>
Mat<Scalar> mean_matrix(const DomainSplit& split, Index n) {
  if (split.empty()) return Mat<Scalar>::Zero(n, n);
  const Vec<Scalar> e = detail::mean_weights<Scalar>(split, n);
  return e * e.transpose();
}

/// Dense MCD matrix Z: blockdiag((I - 11^T/n_s)/n_s, -(I - 11^T/n_t)/n_t) on the split's
/// samples, 0 elsewhere.
template <typename Scalar = double>
Mat<Scalar> covariance_matrix(const DomainSplit& split, Index n) {
  Mat<Scalar> Z = Mat<Scalar>::Zero(n, n);
  if (split.empty()) return Z;
  const auto fill = [&](const std::vector<Index>& idx, Scalar sign) {
    const auto m = static_cast<Scalar>(idx.size());
    for (Index i : idx)
      for (Index j : idx) Z(i, j) = sign * ((i == j ? Scalar(1) / m : Scalar(0)) - Scalar(1) / (m * m));
  };
  fill(split.source, Scalar(1));
  fill(split.target, Scalar(-1));
  return Z;
}

template <typename Derived>
Mat<typename Derived::Scalar> apply_mean_matrix(const DomainSplit& split, const Eigen::MatrixBase<Derived>& X) {
  using Scalar = typename Derived::Scalar;
  if (split.empty()) return Mat<Scalar>::Zero(X.rows(), X.cols());
  const Vec<Scalar> e = detail::mean_weights<Scalar>(split, X.rows());
  return e * (e.transpose() * X);
}

template <typename Derived>
Mat<typename Derived::Scalar> apply_covariance_matrix(const DomainSplit& split, const Eigen::MatrixBase<Derived>& X) {
  using Scalar = typename Derived::Scalar;
  Mat<Scalar> out = Mat<Scalar>::Zero(X.rows(), X.cols());
  if (split.empty()) return out;
  const auto idx = split.members();
  out(idx, Eigen::all) = detail::compact_covariance(split, X(idx, Eigen::all));
  return out;
}

/// Z K K Z X in O(n m c) for a split of m samples, without forming Z K K Z.
template <typename Scalar, typename Derived>
Mat<Scalar> apply_covariance_gram(const DomainSplit& split, const Mat<Scalar>& K, const Eigen::MatrixBase<Derived>& X) {
  Mat<Scalar> out = Mat<Scalar>::Zero(X.rows(), X.cols());
  if (split.empty()) return out;
  const auto idx = split.members();
  const Mat<Scalar> zx = detail::compact_covariance(split, X(idx, Eigen::all));
  const Mat<Scalar> kzx = K(Eigen::all, idx) * zx;
  const Mat<Scalar> kkzx = K(idx, Eigen::all) * kzx;
  out(idx, Eigen::all) = detail::compact_covariance(split, kkzx);
  return out;
}

/// Adds weight * Z K K Z to V, touching only the split's rows and columns.
template <typename Scalar>
void add_covariance_gram(Mat<Scalar>& V, const DomainSplit& split, const Mat<Scalar>& K, Scalar weight) {
  if (split.empty()) return;
  const auto idx = split.members();
  const Mat<Scalar> zk = detail::compact_covariance(split, K(idx, Eigen::all));
  Mat<Scalar> gram(zk.rows(), zk.rows());
  gram.template triangularView<Eigen::Lower>() = zk * zk.transpose();
  gram.template triangularView<Eigen::StrictlyUpper>() = gram.transpose();
  V(idx, idx) += weight * gram;
}

template <typename Scalar = double>
struct MarginalMatrices {
  Mat<Scalar> M0;
  Mat<Scalar> Z0;
};

template <typename Scalar = double>
struct ConditionalMatrices {
  std::vector<Mat<Scalar>> Mc;
  std::vector<Mat<Scalar>> Zc;
  std::vector<ClassCount> class_counts;
};

inline DomainSplit marginal_split(Index ns, Index nt) {
  DomainSplit split;
  for (Index i = 0; i < ns; ++i) split.source.push_back(i);
  for (Index i = 0; i < nt; ++i) split.target.push_back(ns + i);
  return split;
}

/// Per-class splits. Labels are 0-based; out-of-range labels raise LabelOutOfRange.
std::vector<DomainSplit> class_splits(const std::vector<int>& source_y, const std::vector<int>& target_y, int num_classes);

template <typename Scalar = double>
MarginalMatrices<Scalar> build_marginal_matrices(Index ns, Index nt) {
  if (ns < 1 || nt < 1) throw Error(ErrorCode::EmptyDomain, "both domains need at least one sample");
  const auto split = marginal_split(ns, nt);
  return {mean_matrix<Scalar>(split, ns + nt), covariance_matrix<Scalar>(split, ns + nt)};
}

template <typename Scalar = double>
ConditionalMatrices<Scalar> build_conditional_matrices(const std::vector<int>& source_y,
                                                       const std::vector<int>& pseudo_t, int num_classes) {
  const auto n = static_cast<Index>(source_y.size() + pseudo_t.size());
  ConditionalMatrices<Scalar> out;
  for (const auto& split : class_splits(source_y, pseudo_t, num_classes)) {
    out.Mc.push_back(mean_matrix<Scalar>(split, n));
    out.Zc.push_back(covariance_matrix<Scalar>(split, n));
    out.class_counts.push_back({static_cast<Index>(split.source.size()), static_cast<Index>(split.target.size())});
  }
  return out;
}

/// V = (1-mu)(M0 + Z0 K K Z0) + mu sum_c (Mc + Zc K K Zc), evaluated literally.
template <typename Scalar>
Mat<Scalar> assemble_V(const Mat<Scalar>& M0, const Mat<Scalar>& Z0, const std::vector<Mat<Scalar>>& Mc,
                       const std::vector<Mat<Scalar>>& Zc, Scalar mu, const Mat<Scalar>& K) {
  const Index n = K.rows();
  const auto square = [n](const Mat<Scalar>& m) { return m.rows() == n && m.cols() == n; };
  detail::require_dims(square(K) && square(M0) && square(Z0) && Mc.size() == Zc.size(), "assemble_V inputs");
  for (std::size_t c = 0; c < Mc.size(); ++c) detail::require_dims(square(Mc[c]) && square(Zc[c]), "class matrix");
  if (!(mu >= 0 && mu <= 1)) throw Error(ErrorCode::InvalidConfig, "mu must lie in [0,1]");

  Mat<Scalar> V = (1 - mu) * (M0 + Z0 * K * K * Z0);
  for (std::size_t c = 0; c < Mc.size(); ++c) V += mu * (Mc[c] + Zc[c] * K * K * Zc[c]);
  return ((V + V.transpose()) / 2).eval();
}

/// Index-set view of the MMD/MCD matrices for one pseudo-label state, plus the balance factor.
struct AlignmentSet {
  Index n = 0;
  DomainSplit marginal;
  std::vector<DomainSplit> classes;
  double mu = 0.5;

  std::vector<ClassCount> class_counts() const {
    std::vector<ClassCount> out;
    for (const auto& s : classes) out.push_back({static_cast<Index>(s.source.size()), static_cast<Index>(s.target.size())});
    return out;
  }
  Matrix M0() const { return mean_matrix(marginal, n); }
  Matrix Z0() const { return covariance_matrix(marginal, n); }
  Matrix Mc(std::size_t c) const { return mean_matrix(classes.at(c), n); }
  Matrix Zc(std::size_t c) const { return covariance_matrix(classes.at(c), n); }
};

AlignmentSet make_alignment_set(const std::vector<int>& source_y, const std::vector<int>& pseudo_t, int num_classes,
                                double mu);

/// Dense V from the index-set representation; the O(n^3) part is Z0 K K Z0.
template <typename Scalar>
Mat<Scalar> assemble_V(const AlignmentSet& set, const Mat<Scalar>& K) {
  detail::require_dims(K.rows() == set.n && K.cols() == set.n, "kernel size differs from alignment set");
  const auto mu = static_cast<Scalar>(set.mu);
  Mat<Scalar> V = (1 - mu) * mean_matrix<Scalar>(set.marginal, set.n);
  add_covariance_gram<Scalar>(V, set.marginal, K, 1 - mu);
  for (const auto& split : set.classes) {
    if (split.empty()) continue;
    V += mu * mean_matrix<Scalar>(split, set.n);
    add_covariance_gram<Scalar>(V, split, K, mu);
  }
  return V;
}

/// Matrix-free V: `op * X` equals assemble_V(set, K) * X at O(n^2 c) cost.
template <typename Scalar = double>
class DiscrepancyOperator {
 public:
  DiscrepancyOperator(const AlignmentSet& set, const Mat<Scalar>& K) : set_(&set), K_(&K) {
    detail::require_dims(K.rows() == set.n && K.cols() == set.n, "kernel size differs from alignment set");
  }

  template <typename Derived>
  Mat<Scalar> operator*(const Eigen::MatrixBase<Derived>& X) const {
    detail::require_dims(X.rows() == set_->n, "operand rows differ from alignment set");
    const auto mu = static_cast<Scalar>(set_->mu);
    Mat<Scalar> out = (1 - mu) * (apply_mean_matrix(set_->marginal, X) + apply_covariance_gram(set_->marginal, *K_, X));
    for (const auto& split : set_->classes) {
      if (split.empty()) continue;
      out += mu * (apply_mean_matrix(split, X) + apply_covariance_gram(split, *K_, X));
    }
    return out;
  }

 private:
  const AlignmentSet* set_;
  const Mat<Scalar>* K_;
};

/// d_A = 2(1 - 2 eps), eps the training error of a ridge (1e-3) least-squares domain
/// discriminator with bias, clipped to [0, 0.5].
double a_distance(const FeatureMatrix& Xs, const FeatureMatrix& Xt);

/// mu = d_M / (d_M + sum_c d_c), 0.5 when the denominator is below 1e-12, clipped to [0,1].
double balance_factor(double d_marginal, double d_conditional_sum);

struct BalanceEstimate {
  double mu = 0.5;
  double d_marginal = 0.0;
  /// Per class; classes lacking a source or target sample are skipped and left at 0.
  std::vector<double> d_class;
};

/// A-distances of every class present in both domains.
std::vector<double> conditional_a_distances(const FeatureMatrix& Xs, const FeatureMatrix& Xt,
                                            const std::vector<int>& source_y, const std::vector<int>& pseudo_t,
                                            int num_classes);

BalanceEstimate estimate_mu(const FeatureMatrix& Xs, const FeatureMatrix& Xt, const std::vector<int>& source_y,
                            const std::vector<int>& pseudo_t, int num_classes);

/// sigma = ||(K H K)^{+1/2}||_2^2, the constant relating the whitened covariance term to its
/// convex surrogate. Eigenvalues below `rank_tol * max` are treated as zero.
double whitening_constant(const Matrix& K, double rank_tol = 1e-10);

}  // namespace tfdf
