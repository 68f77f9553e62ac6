#pragma once

#include <Eigen/Dense>

#include <optional>
#include <stdexcept>
#include <string>

namespace tfdf {

template <typename Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Index = Eigen::Index;
using Matrix = Mat<double>;
using Vector = Vec<double>;

/// Dense n x d sample matrix, one sample per row.
using FeatureMatrix = Matrix;

enum class ErrorCode {
  MissingFile,
  ParseError,
  NonFiniteValue,
  NonPositiveBandwidth,
  DegenerateData,
  InvalidNeighborCount,
  ZeroRow,
  AsymmetricInput,
  EmptyDomain,
  DimensionMismatch,
  SingularSystem,
  NonFiniteIterate,
  LengthMismatch,
  LabelOutOfRange,
  UnknownParameter,
  InvalidConfig,
  InvalidTask,
  IoError,
};

const char* to_string(ErrorCode code);

/// Failure class used to pick the CLI exit code.
enum class ErrorCategory { Config, Data, Numerical };

ErrorCategory category_of(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}
  Error(ErrorCode code, const std::string& message, Index row, Index col)
      : std::runtime_error(std::string(to_string(code)) + ": " + message + " (row " +
                           std::to_string(row) + ", col " + std::to_string(col) + ")"),
        code_(code),
        row_(row),
        col_(col) {}

  ErrorCode code() const noexcept { return code_; }
  std::optional<Index> row() const noexcept { return row_; }
  std::optional<Index> col() const noexcept { return col_; }

 private:
  ErrorCode code_;
  std::optional<Index> row_;
  std::optional<Index> col_;
};

namespace detail {

inline void require_dims(bool ok, const char* what) {
  if (!ok) throw Error(ErrorCode::DimensionMismatch, what);
}

}  // namespace detail

}  // namespace tfdf
