#pragma once

#include "tfdf/common.hpp"

#include <filesystem>
#include <optional>
#include <string_view>
#include <vector>

namespace tfdf {

enum class MatrixFormat { Csv, RawF64 };

enum class Preprocessing { None, ZScore, UnitL2, ZScoreThenUnitL2 };

MatrixFormat parse_matrix_format(std::string_view name);
Preprocessing parse_preprocessing(std::string_view name);
std::string_view to_string(Preprocessing scheme);

/// Picks raw-f64 for `.f64`/`.bin` extensions and CSV otherwise.
MatrixFormat format_from_extension(const std::filesystem::path& path);

/// Class ids, 0-based in memory. On disk they are 1-based.
using LabelVector = std::vector<int>;

struct TaskPair {
  FeatureMatrix source_X;
  LabelVector source_y;
  FeatureMatrix target_X;
  std::optional<LabelVector> target_y_truth;
  int num_classes = 0;

  Index num_source() const { return source_X.rows(); }
  Index num_target() const { return target_X.rows(); }
  Index num_samples() const { return source_X.rows() + target_X.rows(); }
};

/// Throws InvalidTask / DimensionMismatch / LabelOutOfRange when the pair is unusable.
void validate(const TaskPair& task);

/// One-hot targets Y (C x n, zero on target columns) and the source indicator A.
struct LabelMatrix {
  Matrix Y;
  /// Diagonal of A: 1 for source samples, 0 for target samples.
  Vector source_mask;

  Matrix A() const { return source_mask.asDiagonal(); }
};

FeatureMatrix load_matrix(const std::filesystem::path& path, MatrixFormat format);
void save_matrix(const std::filesystem::path& path, const FeatureMatrix& X, MatrixFormat format);

LabelVector load_labels(const std::filesystem::path& path);
void save_labels(const std::filesystem::path& path, const LabelVector& labels);

/// Parses CSV text. A first row that does not parse as numbers is treated as a header.
FeatureMatrix parse_csv_matrix(std::string_view text);

FeatureMatrix preprocess(const FeatureMatrix& X, Preprocessing scheme);

LabelMatrix build_label_structures(const TaskPair& task);

/// Writes to a sibling temp file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

/// Shortest decimal representation that parses back to the same double.
std::string format_double(double value);

}  // namespace tfdf
