#include "oracles.hpp"
#include "tfdf/data_io.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>

using namespace tfdf;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("tfdf_test_data_io_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write_text(const fs::path& p, const std::string& s) { std::ofstream(p, std::ios::binary) << s; }

template <typename F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an exception");
  return ErrorCode::IoError;
}

}  // namespace

TEST_CASE("csv parses a plain 2x2 matrix") {
  const auto X = parse_csv_matrix("1.0,2.0\n3.0,4.0");
  REQUIRE(X.rows() == 2);
  REQUIRE(X.cols() == 2);
  CHECK(X(0, 0) == 1.0);
  CHECK(X(0, 1) == 2.0);
  CHECK(X(1, 0) == 3.0);
  CHECK(X(1, 1) == 4.0);
}

TEST_CASE("csv rejects nan with its location") {
  try {
    parse_csv_matrix("1,2\n3,nan\n");
    FAIL("no exception");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NonFiniteValue);
    REQUIRE(e.row());
    CHECK(*e.row() == 1);
    CHECK(*e.col() == 1);
  }
  CHECK(code_of([] { parse_csv_matrix("inf,1\n"); }) == ErrorCode::NonFiniteValue);
}

TEST_CASE("csv rejects empty input and ragged rows") {
  CHECK(code_of([] { parse_csv_matrix(""); }) == ErrorCode::ParseError);
  CHECK(code_of([] { parse_csv_matrix("\n\n"); }) == ErrorCode::ParseError);
  CHECK(code_of([] { parse_csv_matrix("1,2\n3\n"); }) == ErrorCode::ParseError);
  CHECK(code_of([] { parse_csv_matrix("1,2\n3,x\n"); }) == ErrorCode::ParseError);
}

TEST_CASE("csv header row is skipped") {
  const auto X = parse_csv_matrix("f1,f2\n1,2\n3,4\n");
  CHECK(X.rows() == 2);
  CHECK(X(1, 0) == 3.0);
  CHECK(code_of([] { parse_csv_matrix("a,b\n"); }) == ErrorCode::ParseError);
}

TEST_CASE("load_matrix on a missing file") {
  CHECK(code_of([] { load_matrix("/nonexistent/tfdf/x.csv", MatrixFormat::Csv); }) == ErrorCode::MissingFile);
  const auto dir = scratch_dir("empty");
  write_text(dir / "empty.csv", "");
  CHECK(code_of([&] { load_matrix(dir / "empty.csv", MatrixFormat::Csv); }) == ErrorCode::ParseError);
}

TEST_CASE("save/load round trip is bit-exact in both formats") {
  std::mt19937_64 rng(7);
  auto X = oracle::random_matrix(rng, 13, 5, 1e3);
  X(0, 0) = std::numeric_limits<double>::denorm_min();
  X(1, 1) = -0.0;
  X(2, 2) = 1.0 / 3.0;
  X(3, 3) = std::numeric_limits<double>::max();
  const auto dir = scratch_dir("roundtrip");
  for (auto fmt : {MatrixFormat::Csv, MatrixFormat::RawF64}) {
    const auto path = dir / (fmt == MatrixFormat::Csv ? "x.csv" : "x.f64");
    save_matrix(path, X, fmt);
    const auto Y = load_matrix(path, fmt);
    REQUIRE(Y.rows() == X.rows());
    REQUIRE(Y.cols() == X.cols());
    for (Index j = 0; j < X.cols(); ++j)
      for (Index i = 0; i < X.rows(); ++i) CHECK(std::bit_cast<std::uint64_t>(Y(i, j)) == std::bit_cast<std::uint64_t>(X(i, j)));
  }
}

TEST_CASE("raw-f64 layout is two u64 dims then row-major doubles") {
  const auto dir = scratch_dir("raw");
  Matrix X(2, 3);
  X << 1, 2, 3, 4, 5, 6;
  save_matrix(dir / "x.bin", X, MatrixFormat::RawF64);
  std::ifstream in(dir / "x.bin", std::ios::binary);
  std::uint64_t dims[2];
  double vals[6];
  in.read(reinterpret_cast<char*>(dims), sizeof dims);
  in.read(reinterpret_cast<char*>(vals), sizeof vals);
  CHECK(dims[0] == 2);
  CHECK(dims[1] == 3);
  CHECK(vals[1] == 2.0);
  CHECK(vals[3] == 4.0);
  CHECK(fs::file_size(dir / "x.bin") == 16 + 48);

  write_text(dir / "short.bin", std::string("\x02\0\0\0\0\0\0\0\x02\0\0\0\0\0\0\0", 16));
  CHECK(code_of([&] { load_matrix(dir / "short.bin", MatrixFormat::RawF64); }) == ErrorCode::ParseError);
}

TEST_CASE("labels are 1-based on disk") {
  const auto dir = scratch_dir("labels");
  write_text(dir / "y.csv", "1\n2\n2\n");
  const auto y = load_labels(dir / "y.csv");
  CHECK(y == LabelVector{0, 1, 1});
  save_labels(dir / "z.csv", y);
  CHECK(load_labels(dir / "z.csv") == y);
  write_text(dir / "bad.csv", "0\n1\n");
  CHECK(code_of([&] { load_labels(dir / "bad.csv"); }) == ErrorCode::LabelOutOfRange);
}

TEST_CASE("preprocess examples") {
  Matrix a(2, 1);
  a << 1, 3;
  const auto z = preprocess(a, Preprocessing::ZScore);
  CHECK(z(0, 0) == doctest::Approx(-1.0).epsilon(1e-15));
  CHECK(z(1, 0) == doctest::Approx(1.0).epsilon(1e-15));

  Matrix b(1, 2);
  b << 3, 4;
  const auto u = preprocess(b, Preprocessing::UnitL2);
  CHECK(u(0, 0) == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(u(0, 1) == doctest::Approx(0.8).epsilon(1e-15));

  std::mt19937_64 rng(3);
  const auto X = oracle::random_matrix(rng, 9, 4);
  CHECK(preprocess(X, Preprocessing::None) == X);
}

TEST_CASE("zscore columns have zero mean and unit std; constant columns become 0") {
  std::mt19937_64 rng(11);
  Matrix X = oracle::random_matrix(rng, 40, 6, 5.0);
  X.col(2).setConstant(7.5);
  const auto Z = preprocess(X, Preprocessing::ZScore);
  for (Index j = 0; j < Z.cols(); ++j) {
    const double mean = Z.col(j).mean();
    CHECK(std::abs(mean) < 1e-10);
    const double var = (Z.col(j).array() - mean).square().mean();
    if (j == 2) {
      CHECK(Z.col(j).cwiseAbs().maxCoeff() == 0.0);
    } else {
      CHECK(std::sqrt(var) == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("unit_l2 is idempotent and keeps zero rows") {
  std::mt19937_64 rng(5);
  Matrix X = oracle::random_matrix(rng, 30, 8);
  X.row(4).setZero();
  const auto once = preprocess(X, Preprocessing::UnitL2);
  const auto twice = preprocess(once, Preprocessing::UnitL2);
  CHECK((once - twice).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(once.row(4).norm() == 0.0);
  CHECK(std::abs(once.row(0).norm() - 1.0) < 1e-12);
  const auto both = preprocess(X, Preprocessing::ZScoreThenUnitL2);
  CHECK((both - preprocess(preprocess(X, Preprocessing::ZScore), Preprocessing::UnitL2)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("label structures") {
  TaskPair t;
  t.source_X = Matrix::Zero(2, 1);
  t.source_y = {0, 1};
  t.target_X = Matrix::Zero(1, 1);
  t.num_classes = 2;
  auto L = build_label_structures(t);
  Matrix Yexp(2, 3);
  Yexp << 1, 0, 0, 0, 1, 0;
  CHECK(L.Y == Yexp);
  CHECK(L.source_mask == Vector((Vector(3) << 1, 1, 0).finished()));

  t.source_y = {0, 0};
  L = build_label_structures(t);
  CHECK(L.Y.row(1).head(2).cwiseAbs().sum() == 0.0);

  t.target_X.resize(0, 1);
  t.source_y = {0, 1};
  L = build_label_structures(t);
  CHECK(L.A() == Matrix::Identity(2, 2));
}

TEST_CASE("label structures: columns of Y sum to the diagonal of A") {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    TaskPair t;
    const int C = oracle::uniform_int(rng, 2, 6);
    const Index ns = oracle::uniform_int(rng, 1, 30), nt = oracle::uniform_int(rng, 0, 30);
    t.num_classes = C;
    t.source_X = Matrix::Zero(ns, 2);
    t.target_X = Matrix::Zero(nt, 2);
    t.source_y = oracle::random_labels(rng, ns, C);
    const auto L = build_label_structures(t);
    CHECK((L.Y.colwise().sum().transpose() - L.source_mask).cwiseAbs().maxCoeff() == 0.0);
    CHECK(L.source_mask.sum() == static_cast<double>(ns));
  }
}

TEST_CASE("task validation") {
  TaskPair t;
  t.source_X = Matrix::Ones(3, 2);
  t.source_y = {0, 1, 1};
  t.target_X = Matrix::Ones(2, 2);
  t.num_classes = 2;
  CHECK_NOTHROW(validate(t));
  auto bad = t;
  bad.target_X = Matrix::Ones(2, 3);
  CHECK(code_of([&] { validate(bad); }) == ErrorCode::DimensionMismatch);
  bad = t;
  bad.source_y = {0, 0, 0};
  CHECK(code_of([&] { validate(bad); }) == ErrorCode::InvalidTask);
  bad = t;
  bad.target_y_truth = LabelVector{0};
  CHECK(code_of([&] { validate(bad); }) == ErrorCode::LengthMismatch);
  bad = t;
  bad.source_y = {0, 1, 2};
  CHECK(code_of([&] { validate(bad); }) == ErrorCode::LabelOutOfRange);
}

TEST_CASE("format helpers") {
  CHECK(format_from_extension("a/b.f64") == MatrixFormat::RawF64);
  CHECK(format_from_extension("a/b.bin") == MatrixFormat::RawF64);
  CHECK(format_from_extension("a/b.csv") == MatrixFormat::Csv);
  CHECK(parse_preprocessing("zscore_then_unit_l2") == Preprocessing::ZScoreThenUnitL2);
  CHECK(to_string(Preprocessing::UnitL2) == "unit_l2");
  CHECK(std::stod(format_double(0.1)) == 0.1);
  CHECK(format_double(2.0) == "2");
}
