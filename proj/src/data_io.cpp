#include "tfdf/data_io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <functional>
#include <sstream>
#include <thread>

namespace tfdf {
namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::MissingFile, path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return std::move(buf).str();
}

std::string_view trim(std::string_view s) {
  const auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r'; };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

std::vector<std::string_view> nonblank_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  for (auto line : split(text, '\n')) {
    if (!trim(line).empty()) lines.push_back(line);
  }
  return lines;
}

std::optional<double> parse_double(std::string_view cell) {
  cell = trim(cell);
  if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
  if (cell.empty()) return std::nullopt;
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (ec != std::errc() || ptr != cell.data() + cell.size()) return std::nullopt;
  return value;
}

std::optional<long long> parse_int(std::string_view cell) {
  cell = trim(cell);
  if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
  if (cell.empty()) return std::nullopt;
  long long value = 0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (ec != std::errc() || ptr != cell.data() + cell.size()) return std::nullopt;
  return value;
}

bool is_numeric_row(std::string_view line) {
  return std::ranges::all_of(split(line, ','), [](auto c) { return parse_double(c).has_value(); });
}

void put_u64_le(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
}

std::uint64_t get_u64_le(const unsigned char* p) {
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
  return v;
}

FeatureMatrix parse_raw_f64(const std::string& bytes) {
  if (bytes.size() < 16) throw Error(ErrorCode::ParseError, "raw-f64 header truncated", 0, 0);
  const auto* data = reinterpret_cast<const unsigned char*>(bytes.data());
  const std::uint64_t rows = get_u64_le(data);
  const std::uint64_t cols = get_u64_le(data + 8);
  if (rows == 0 || cols == 0) throw Error(ErrorCode::ParseError, "raw-f64 matrix is empty", 0, 0);
  if (rows > (bytes.size() - 16) / 8 / cols || bytes.size() != 16 + rows * cols * 8) {
    throw Error(ErrorCode::ParseError, "raw-f64 payload size does not match header", 0, 0);
  }
  FeatureMatrix X(static_cast<Index>(rows), static_cast<Index>(cols));
  const unsigned char* p = data + 16;
  for (Index i = 0; i < X.rows(); ++i) {
    for (Index j = 0; j < X.cols(); ++j, p += 8) {
      const double v = std::bit_cast<double>(get_u64_le(p));
      if (!std::isfinite(v)) throw Error(ErrorCode::NonFiniteValue, "raw-f64 entry", i, j);
      X(i, j) = v;
    }
  }
  return X;
}

}  // namespace

MatrixFormat parse_matrix_format(std::string_view name) {
  if (name == "csv") return MatrixFormat::Csv;
  if (name == "raw-f64") return MatrixFormat::RawF64;
  throw Error(ErrorCode::InvalidConfig, "unknown matrix format '" + std::string(name) + "'");
}

Preprocessing parse_preprocessing(std::string_view name) {
  if (name == "none") return Preprocessing::None;
  if (name == "zscore") return Preprocessing::ZScore;
  if (name == "unit_l2") return Preprocessing::UnitL2;
  if (name == "zscore_then_unit_l2") return Preprocessing::ZScoreThenUnitL2;
  throw Error(ErrorCode::InvalidConfig, "unknown preprocessing scheme '" + std::string(name) + "'");
}

std::string_view to_string(Preprocessing scheme) {
  switch (scheme) {
    case Preprocessing::None: return "none";
    case Preprocessing::ZScore: return "zscore";
    case Preprocessing::UnitL2: return "unit_l2";
    case Preprocessing::ZScoreThenUnitL2: return "zscore_then_unit_l2";
  }
  return "none";
}

MatrixFormat format_from_extension(const std::filesystem::path& path) {
  const auto ext = path.extension().string();
  return (ext == ".f64" || ext == ".bin") ? MatrixFormat::RawF64 : MatrixFormat::Csv;
}

void validate(const TaskPair& task) {
  if (task.num_classes < 2) throw Error(ErrorCode::InvalidTask, "num_classes must be at least 2");
  if (task.source_X.rows() < 1 || task.source_X.cols() < 1) {
    throw Error(ErrorCode::InvalidTask, "source feature matrix is empty");
  }
  if (task.target_X.rows() > 0 && task.target_X.cols() != task.source_X.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "source and target feature dimensions differ");
  }
  if (static_cast<Index>(task.source_y.size()) != task.source_X.rows()) {
    throw Error(ErrorCode::LengthMismatch, "source label count differs from source rows");
  }
  std::vector<int> seen(static_cast<std::size_t>(task.num_classes), 0);
  for (int y : task.source_y) {
    if (y < 0 || y >= task.num_classes) throw Error(ErrorCode::LabelOutOfRange, "source label " + std::to_string(y + 1));
    ++seen[static_cast<std::size_t>(y)];
  }
  for (std::size_t c = 0; c < seen.size(); ++c) {
    if (seen[c] == 0) throw Error(ErrorCode::InvalidTask, "source has no sample of class " + std::to_string(c + 1));
  }
  if (task.target_y_truth) {
    if (static_cast<Index>(task.target_y_truth->size()) != task.target_X.rows()) {
      throw Error(ErrorCode::LengthMismatch, "target label count differs from target rows");
    }
    for (int y : *task.target_y_truth) {
      if (y < 0 || y >= task.num_classes) throw Error(ErrorCode::LabelOutOfRange, "target label " + std::to_string(y + 1));
    }
  }
  if (!task.source_X.allFinite() || !task.target_X.allFinite()) {
    throw Error(ErrorCode::NonFiniteValue, "task features contain NaN or Inf");
  }
}

FeatureMatrix parse_csv_matrix(std::string_view text) {
  auto lines = nonblank_lines(text);
  if (!lines.empty() && !is_numeric_row(lines.front())) lines.erase(lines.begin());
  if (lines.empty()) throw Error(ErrorCode::ParseError, "no numeric rows", 0, 0);

  const auto cols = static_cast<Index>(split(lines.front(), ',').size());
  FeatureMatrix X(static_cast<Index>(lines.size()), cols);
  for (Index i = 0; i < X.rows(); ++i) {
    const auto cells = split(lines[static_cast<std::size_t>(i)], ',');
    if (static_cast<Index>(cells.size()) != cols) {
      throw Error(ErrorCode::ParseError, "ragged row", i, std::min<Index>(cols, static_cast<Index>(cells.size())));
    }
    for (Index j = 0; j < cols; ++j) {
      const auto v = parse_double(cells[static_cast<std::size_t>(j)]);
      if (!v) throw Error(ErrorCode::ParseError, "not a number", i, j);
      if (!std::isfinite(*v)) throw Error(ErrorCode::NonFiniteValue, "csv entry", i, j);
      X(i, j) = *v;
    }
  }
  return X;
}

FeatureMatrix load_matrix(const std::filesystem::path& path, MatrixFormat format) {
  const std::string bytes = read_file(path);
  return format == MatrixFormat::Csv ? parse_csv_matrix(bytes) : parse_raw_f64(bytes);
}

std::string format_double(double value) {
  std::array<char, 32> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), ptr);
}

void save_matrix(const std::filesystem::path& path, const FeatureMatrix& X, MatrixFormat format) {
  std::string out;
  if (format == MatrixFormat::Csv) {
    for (Index i = 0; i < X.rows(); ++i) {
      for (Index j = 0; j < X.cols(); ++j) {
        if (j) out.push_back(',');
        out += format_double(X(i, j));
      }
      out.push_back('\n');
    }
  } else {
    out.reserve(16 + static_cast<std::size_t>(X.size()) * 8);
    put_u64_le(out, static_cast<std::uint64_t>(X.rows()));
    put_u64_le(out, static_cast<std::uint64_t>(X.cols()));
    for (Index i = 0; i < X.rows(); ++i) {
      for (Index j = 0; j < X.cols(); ++j) put_u64_le(out, std::bit_cast<std::uint64_t>(X(i, j)));
    }
  }
  write_file_atomic(path, out);
}

LabelVector load_labels(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  auto lines = nonblank_lines(text);
  if (!lines.empty() && !parse_int(lines.front())) lines.erase(lines.begin());
  if (lines.empty()) throw Error(ErrorCode::ParseError, "label file has no rows", 0, 0);
  LabelVector labels;
  labels.reserve(lines.size());
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto v = parse_int(lines[i]);
    if (!v) throw Error(ErrorCode::ParseError, "label is not an integer", static_cast<Index>(i), 0);
    if (*v < 1) throw Error(ErrorCode::LabelOutOfRange, "labels are 1-based", static_cast<Index>(i), 0);
    labels.push_back(static_cast<int>(*v - 1));
  }
  return labels;
}

void save_labels(const std::filesystem::path& path, const LabelVector& labels) {
  std::string out;
  for (int y : labels) out += std::to_string(y + 1) + '\n';
  write_file_atomic(path, out);
}

FeatureMatrix preprocess(const FeatureMatrix& X, Preprocessing scheme) {
  FeatureMatrix out = X;
  if (scheme == Preprocessing::ZScore || scheme == Preprocessing::ZScoreThenUnitL2) {
    const double n = static_cast<double>(out.rows());
    for (Index j = 0; j < out.cols(); ++j) {
      auto col = out.col(j);
      const double mean = col.mean();
      col.array() -= mean;
      const double sd = std::sqrt(col.squaredNorm() / n);
      if (sd <= 1e-12 * std::max(1.0, std::abs(mean))) {
        col.setZero();  // constant column
      } else {
        col /= sd;
      }
    }
  }
  if (scheme == Preprocessing::UnitL2 || scheme == Preprocessing::ZScoreThenUnitL2) {
    for (Index i = 0; i < out.rows(); ++i) {
      const double norm = out.row(i).norm();
      if (norm > 0.0) out.row(i) /= norm;
    }
  }
  return out;
}

LabelMatrix build_label_structures(const TaskPair& task) {
  const Index ns = task.num_source();
  const Index n = task.num_samples();
  if (static_cast<Index>(task.source_y.size()) != ns) {
    throw Error(ErrorCode::LengthMismatch, "source label count differs from source rows");
  }
  LabelMatrix out{Matrix::Zero(task.num_classes, n), Vector::Zero(n)};
  for (Index i = 0; i < ns; ++i) {
    const int y = task.source_y[static_cast<std::size_t>(i)];
    if (y < 0 || y >= task.num_classes) throw Error(ErrorCode::LabelOutOfRange, "source label " + std::to_string(y + 1));
    out.Y(y, i) = 1.0;
    out.source_mask(i) = 1.0;
  }
  return out;
}

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp-" + std::to_string(std::hash<std::thread::id>{}(std::this_thread::get_id()));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot open " + tmp.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw Error(ErrorCode::IoError, "write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace tfdf
