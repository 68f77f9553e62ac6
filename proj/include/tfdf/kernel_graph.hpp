#pragma once

#include "tfdf/common.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace tfdf {

enum class KernelKind { Rbf, Linear };

template <typename Scalar = double>
struct KernelMatrix {
  Mat<Scalar> K;
  KernelKind kind = KernelKind::Rbf;
  Scalar bandwidth = 0;  // rbf only
};

template <typename Scalar = double>
struct GraphLaplacian {
  Mat<Scalar> W;
  Mat<Scalar> L;
  Index neighbors = 0;
};

/// Pairwise squared Euclidean distances between the rows of X, clamped at zero.
template <typename Derived>
Mat<typename Derived::Scalar> squared_distances(const Eigen::MatrixBase<Derived>& X) {
  using Scalar = typename Derived::Scalar;
  const Vec<Scalar> sq = X.rowwise().squaredNorm();
  Mat<Scalar> D = (-2 * X * X.transpose()).eval();
  D.colwise() += sq;
  D.rowwise() += sq.transpose();
  D = D.cwiseMax(Scalar(0));
  D.diagonal().setZero();
  return D;
}

/// K_ij = exp(-|x_i - x_j|^2 / (2 bandwidth^2)), symmetrised with an exact unit diagonal.
template <typename Derived>
KernelMatrix<typename Derived::Scalar> rbf_kernel(const Eigen::MatrixBase<Derived>& X,
                                                  typename Derived::Scalar bandwidth) {
  using Scalar = typename Derived::Scalar;
  if (!(bandwidth > 0)) throw Error(ErrorCode::NonPositiveBandwidth, "rbf bandwidth must be > 0");
  Mat<Scalar> K = (squared_distances(X) * (Scalar(-1) / (2 * bandwidth * bandwidth))).array().exp().matrix();
  K = ((K + K.transpose()) / 2).eval();
  K.diagonal().setOnes();
  return {std::move(K), KernelKind::Rbf, bandwidth};
}

template <typename Derived>
KernelMatrix<typename Derived::Scalar> linear_kernel(const Eigen::MatrixBase<Derived>& X) {
  using Scalar = typename Derived::Scalar;
  Mat<Scalar> K = X * X.transpose();
  K = ((K + K.transpose()) / 2).eval();
  return {std::move(K), KernelKind::Linear, Scalar(0)};
}

/// Median of the pairwise Euclidean distances over i < j (mean of the middle pair for even counts).
template <typename Derived>
typename Derived::Scalar median_bandwidth(const Eigen::MatrixBase<Derived>& X) {
  using Scalar = typename Derived::Scalar;
  const Index n = X.rows();
  if (n < 2) throw Error(ErrorCode::DegenerateData, "need at least two samples for a bandwidth");
  const Mat<Scalar> D = squared_distances(X);
  std::vector<Scalar> d;
  d.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
  for (Index j = 1; j < n; ++j)
    for (Index i = 0; i < j; ++i) d.push_back(std::sqrt(D(i, j)));
  const auto mid = d.begin() + static_cast<std::ptrdiff_t>(d.size() / 2);
  std::nth_element(d.begin(), mid, d.end());
  Scalar median = *mid;
  if (d.size() % 2 == 0) median = (median + *std::max_element(d.begin(), mid)) / 2;
  if (!(median > 0)) throw Error(ErrorCode::DegenerateData, "median pairwise distance is zero");
  return median;
}

template <typename Scalar = double>
Mat<Scalar> centering_matrix(Index n) {
  Mat<Scalar> H = Mat<Scalar>::Identity(n, n);
  H.array() -= Scalar(1) / static_cast<Scalar>(n);
  return H;
}

/// Applies H = I - 11^T/n without materialising it.
struct Centering {
  template <typename Derived>
  Mat<typename Derived::Scalar> operator*(const Eigen::MatrixBase<Derived>& X) const {
    return X.rowwise() - X.colwise().mean();
  }
};

/// Symmetric p-nearest-neighbour affinity over cosine similarity. Negative cosines clamp to 0;
/// neighbour ties go to the lower sample index.
template <typename Derived>
Mat<typename Derived::Scalar> knn_cosine_graph(const Eigen::MatrixBase<Derived>& Z, Index p) {
  using Scalar = typename Derived::Scalar;
  const Index n = Z.rows();
  if (p < 1 || p >= n) throw Error(ErrorCode::InvalidNeighborCount, "need 1 <= p < n");
  Mat<Scalar> Zn = Z;
  for (Index i = 0; i < n; ++i) {
    const Scalar norm = Zn.row(i).norm();
    if (!(norm > 0)) throw Error(ErrorCode::ZeroRow, "row " + std::to_string(i) + " has zero norm", i, 0);
    Zn.row(i) /= norm;
  }
  const Mat<Scalar> S = Zn * Zn.transpose();

  Mat<Scalar> W = Mat<Scalar>::Zero(n, n);
  std::vector<Index> order(static_cast<std::size_t>(n - 1));
  for (Index i = 0; i < n; ++i) {
    std::iota(order.begin(), order.begin() + i, Index{0});
    std::iota(order.begin() + i, order.end(), i + 1);
    std::partial_sort(order.begin(), order.begin() + p, order.end(), [&](Index a, Index b) {
      return S(i, a) != S(i, b) ? S(i, a) > S(i, b) : a < b;
    });
    for (auto it = order.begin(); it != order.begin() + p; ++it) {
      // S is not bit-symmetric, so use the canonical (min,max) entry for both halves.
      const Index j = *it;
      const Scalar w = std::max(S(std::min(i, j), std::max(i, j)), Scalar(0));
      W(i, j) = w;
      W(j, i) = w;
    }
  }
  return W;
}

/// L = I - G^{-1/2} W G^{-1/2}. Isolated nodes (G_ii = 0) get an identity row.
template <typename Derived>
Mat<typename Derived::Scalar> laplacian(const Eigen::MatrixBase<Derived>& W) {
  using Scalar = typename Derived::Scalar;
  const Index n = W.rows();
  detail::require_dims(W.cols() == n, "affinity matrix must be square");
  const Scalar scale = std::max(Scalar(1), W.cwiseAbs().maxCoeff());
  if ((W - W.transpose()).cwiseAbs().maxCoeff() > Scalar(1e-12) * scale) {
    throw Error(ErrorCode::AsymmetricInput, "affinity matrix is not symmetric");
  }
  const Vec<Scalar> degree = W.rowwise().sum();
  Vec<Scalar> inv_sqrt(n);
  for (Index i = 0; i < n; ++i) inv_sqrt(i) = degree(i) > 0 ? Scalar(1) / std::sqrt(degree(i)) : Scalar(0);
  Mat<Scalar> L = -(inv_sqrt.asDiagonal() * W * inv_sqrt.asDiagonal());
  L.diagonal().array() += Scalar(1);
  return ((L + L.transpose()) / 2).eval();
}

template <typename Derived>
GraphLaplacian<typename Derived::Scalar> build_graph(const Eigen::MatrixBase<Derived>& Z, Index p) {
  auto W = knn_cosine_graph(Z, p);
  auto L = laplacian(W);
  return {std::move(W), std::move(L), p};
}

}  // namespace tfdf
