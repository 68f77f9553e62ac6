#pragma once

#include "tfdf/common.hpp"

namespace tfdf {

/// Weights of the regularised objective. All must be nonnegative.
struct ObjectiveParams {
  double eta = 0.1;     // RKHS norm
  double lambda = 10.0; // distribution alignment
  double rho = 1.0;     // manifold
  double xi = 0.1;      // class confusion
  double delta = 0.01;  // relaxed orthogonality constraint

  void validate() const;
};

/// Unweighted terms of the objective; `total` is their weighted sum.
template <typename Scalar = double>
struct ObjectiveBreakdown {
  Scalar srm = 0;
  Scalar ridge = 0;
  Scalar distribution = 0;
  Scalar manifold = 0;
  Scalar confusion = 0;
  Scalar constraint_penalty = 0;
  Scalar total = 0;
};

namespace detail {

template <typename Scalar>
void check_beta(const Mat<Scalar>& beta, const Mat<Scalar>& K) {
  require_dims(K.rows() == K.cols() && beta.rows() == K.rows(), "beta rows must match the kernel size");
}

// tr(P^T (Op P)) for an operator that supports `op * P`.
template <typename Scalar, typename Op>
Scalar quadratic_trace(const Op& op, const Mat<Scalar>& P) {
  const Mat<Scalar> OP = op * P;
  require_dims(OP.rows() == P.rows() && OP.cols() == P.cols(), "operator size differs from kernel size");
  return (P.array() * OP.array()).sum();
}

}  // namespace detail

/// ||(Y - beta^T K) A||_F^2, A = diag(source_mask).
template <typename Scalar>
Scalar srm_term(const Mat<Scalar>& beta, const Mat<Scalar>& K, const Mat<Scalar>& Y, const Vec<Scalar>& source_mask) {
  detail::check_beta(beta, K);
  detail::require_dims(Y.rows() == beta.cols() && Y.cols() == K.rows() && source_mask.size() == K.rows(),
                       "label matrix shape");
  const Mat<Scalar> residual = (Y - beta.transpose() * K) * source_mask.asDiagonal();
  return residual.squaredNorm();
}

/// tr(beta^T K V K beta). V may be a dense matrix or a DiscrepancyOperator.
template <typename Scalar, typename VOp>
Scalar distribution_term(const Mat<Scalar>& beta, const Mat<Scalar>& K, const VOp& V) {
  detail::check_beta(beta, K);
  return detail::quadratic_trace<Scalar>(V, Mat<Scalar>(K * beta));
}

/// tr(beta^T K L K beta).
template <typename Scalar, typename LOp>
Scalar manifold_term(const Mat<Scalar>& beta, const Mat<Scalar>& K, const LOp& L) {
  detail::check_beta(beta, K);
  return detail::quadratic_trace<Scalar>(L, Mat<Scalar>(K * beta));
}

/// ||B - I||_F^2 with B = F F^T and F = beta^T K (C x n), I the C x C identity.
template <typename Scalar>
Scalar confusion_term(const Mat<Scalar>& beta, const Mat<Scalar>& K) {
  detail::check_beta(beta, K);
  const Mat<Scalar> KB = K * beta;
  Mat<Scalar> B = KB.transpose() * KB;
  B.diagonal().array() -= Scalar(1);
  return B.squaredNorm();
}

/// Weighted sum srm + eta tr(b'Kb) + lambda tr(b'KVKb) + rho tr(b'KLKb) + xi ||B-I||^2
/// + delta tr(b'KHKb - I). The constraint penalty is linear and may be negative.
template <typename Scalar, typename VOp, typename LOp, typename HOp>
ObjectiveBreakdown<Scalar> total_objective(const Mat<Scalar>& beta, const Mat<Scalar>& K, const Mat<Scalar>& Y,
                                           const Vec<Scalar>& source_mask, const VOp& V, const LOp& L, const HOp& H,
                                           const ObjectiveParams& params) {
  ObjectiveBreakdown<Scalar> out;
  const Mat<Scalar> KB = K * beta;
  out.srm = srm_term(beta, K, Y, source_mask);
  out.ridge = (beta.array() * KB.array()).sum();
  out.distribution = detail::quadratic_trace<Scalar>(V, KB);
  out.manifold = detail::quadratic_trace<Scalar>(L, KB);
  out.confusion = confusion_term(beta, K);
  out.constraint_penalty = detail::quadratic_trace<Scalar>(H, KB) - static_cast<Scalar>(beta.cols());
  out.total = out.srm + Scalar(params.eta) * out.ridge + Scalar(params.lambda) * out.distribution +
              Scalar(params.rho) * out.manifold + Scalar(params.xi) * out.confusion +
              Scalar(params.delta) * out.constraint_penalty;
  return out;
}

/// Analytic gradient of total_objective with respect to beta (K symmetric):
///   -2KAY^T + 2KAKb + 2eta Kb + 2lambda KVKb + 2rho KLKb + 2delta KHKb + 4xi KKb(b'KKb - I)
template <typename Scalar, typename VOp, typename LOp, typename HOp>
Mat<Scalar> gradient(const Mat<Scalar>& beta, const Mat<Scalar>& K, const Mat<Scalar>& Y, const Vec<Scalar>& source_mask,
                     const VOp& V, const LOp& L, const HOp& H, const ObjectiveParams& params) {
  detail::check_beta(beta, K);
  detail::require_dims(Y.rows() == beta.cols() && Y.cols() == K.rows() && source_mask.size() == K.rows(),
                       "label matrix shape");
  const Mat<Scalar> KB = K * beta;

  // Everything except the eta term is K applied to an n x C matrix.
  Mat<Scalar> inner = source_mask.asDiagonal() * (KB - Y.transpose());
  if (params.lambda != 0) inner += Scalar(params.lambda) * (V * KB);
  if (params.rho != 0) inner += Scalar(params.rho) * (L * KB);
  if (params.delta != 0) inner += Scalar(params.delta) * (H * KB);
  if (params.xi != 0) {
    Mat<Scalar> B = KB.transpose() * KB;
    B.diagonal().array() -= Scalar(1);
    inner += Scalar(2 * params.xi) * (KB * B);
  }
  Mat<Scalar> g = Scalar(2) * (K * inner);
  if (params.eta != 0) g += Scalar(2 * params.eta) * KB;
  return g;
}

}  // namespace tfdf
