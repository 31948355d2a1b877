#include <gtest/gtest.h>

#include <algorithm>
#include <fstream>
#include <set>

#include "fsl/dataset.hpp"
#include "fsl/error.hpp"
#include "test_util.hpp"

using namespace fsl;
namespace fs = std::filesystem;

namespace {

fs::path write_file(const fs::path& dir, const std::string& name, const std::string& text) {
  const auto p = dir / name;
  std::ofstream(p, std::ios::binary) << text;
  return p;
}

// rows 0..n-1 with value = row index, class = row / per_class
LabeledDataset blocks(int classes, Index per_class, Index m = 2) {
  MatrixXd f(classes * per_class, m);
  std::vector<int> labels;
  for (Index r = 0; r < f.rows(); ++r) {
    f.row(r).setConstant(static_cast<double>(r));
    labels.push_back(static_cast<int>(r / per_class));
  }
  return LabeledDataset(std::move(f), std::move(labels));
}

std::set<double> ids(const LabeledDataset& d, int j) {
  std::set<double> out;
  for (Index r : d.class_index(j)) out.insert(d.features()(r, 0));
  return out;
}

}  // namespace

TEST(LabeledDataset, ClassIndexPartitionsRows) {
  MatrixXd f = MatrixXd::Zero(5, 2);
  LabeledDataset d(f, {1, 0, 1, 2, 0});
  EXPECT_EQ(d.class_count(), 3);
  EXPECT_EQ(d.class_index(0), (std::vector<Index>{1, 4}));
  EXPECT_EQ(d.class_index(1), (std::vector<Index>{0, 2}));
  EXPECT_EQ(d.class_index(2), (std::vector<Index>{3}));
  EXPECT_EQ(d.class_names()[2], "2");
}

TEST(LabeledDataset, RejectsEmptyClassAndBadLabels) {
  EXPECT_THROW(LabeledDataset(MatrixXd::Zero(2, 1), {0, 2}), Error);
  EXPECT_THROW(LabeledDataset(MatrixXd::Zero(2, 1), {0, -1}), Error);
  EXPECT_THROW(LabeledDataset(MatrixXd::Zero(2, 1), {0}), Error);
  MatrixXd f = MatrixXd::Zero(2, 1);
  f(0, 0) = std::numeric_limits<double>::infinity();
  EXPECT_THROW(LabeledDataset(f, {0, 1}), Error);
}

TEST(LoadFeatureCsv, TwoRowFile) {
  const auto dir = fsl::testing::temp_dir("csv_two");
  const auto d = load_feature_csv(write_file(dir, "a.csv", "label,f0,f1,f2\na,1,2,3\nb,4,5,6\n"));
  EXPECT_EQ(d.size(), 2);
  EXPECT_EQ(d.dims(), 3);
  EXPECT_EQ(d.class_count(), 2);
  EXPECT_DOUBLE_EQ(d.features()(1, 2), 6.0);
  EXPECT_EQ(d.class_names()[0], "a");
  EXPECT_EQ(d.class_names()[1], "b");
}

TEST(LoadFeatureCsv, FirstAppearanceRemapAndCrlf) {
  const auto dir = fsl::testing::temp_dir("csv_remap");
  const auto d = load_feature_csv(
      write_file(dir, "a.csv", "label,f0\r\ncat,1e-3\r\ndog,-2.5E2\r\ncat,0\r\n"));
  EXPECT_EQ(d.labels(), (std::vector<int>{0, 1, 0}));
  EXPECT_EQ(d.class_names()[0], "cat");
  EXPECT_DOUBLE_EQ(d.features()(0, 0), 1e-3);
  EXPECT_DOUBLE_EQ(d.features()(1, 0), -250.0);
}

TEST(LoadFeatureCsv, FourClassesTwoHundredEach) {
  const auto dir = fsl::testing::temp_dir("csv_800");
  std::string text = "label,f0,f1\n";
  for (int r = 0; r < 800; ++r) text += "c" + std::to_string(r % 4) + "," + std::to_string(r) + ",0.5\n";
  const auto d = load_feature_csv(write_file(dir, "a.csv", text));
  EXPECT_EQ(d.size(), 800);
  EXPECT_EQ(d.class_count(), 4);
  const auto s = split_per_class(d, {160, 40, 3});
  EXPECT_EQ(s.train.size(), 640);
  EXPECT_EQ(s.test.size(), 160);
}

TEST(LoadFeatureCsv, RaggedThirdRow) {
  const auto dir = fsl::testing::temp_dir("csv_ragged");
  const auto p = write_file(dir, "a.csv", "label,f0,f1,f2\na,1,2,3\nb,4,5,6\na,7,8\n");
  try {
    load_feature_csv(p);
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_EQ(e.code(), ErrorCode::FormatError);
    EXPECT_EQ(e.row(), 3u);
  }
}

TEST(LoadFeatureCsv, NonNumericCell) {
  const auto dir = fsl::testing::temp_dir("csv_nonnum");
  const auto p = write_file(dir, "a.csv", "label,f0\na,1\nb,x\n");
  try {
    load_feature_csv(p);
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_EQ(e.row(), 2u);
  }
}

TEST(LoadFeatureCsv, EmptyFileAndHeaderOnly) {
  const auto dir = fsl::testing::temp_dir("csv_empty");
  EXPECT_THROW(load_feature_csv(write_file(dir, "a.csv", "")), FormatError);
  EXPECT_THROW(load_feature_csv(write_file(dir, "b.csv", "label,f0\n")), FormatError);
}

TEST(LoadFeatureCsv, MissingFile) {
  try {
    load_feature_csv("/nonexistent/fsl/none.csv");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::IoError);
  }
}

TEST(WriteFeatureCsv, RoundTripIsExact) {
  std::mt19937_64 gen(1);
  const auto dir = fsl::testing::temp_dir("csv_roundtrip");
  LabeledDataset d(fsl::testing::random_matrix(6, 3, gen), {0, 1, 1, 0, 2, 2}, {"x", "y", "z"});
  write_feature_csv(d, dir / "d.csv");
  const auto back = load_feature_csv(dir / "d.csv");
  EXPECT_EQ(back.features(), d.features());
  EXPECT_EQ(back.labels(), d.labels());
  EXPECT_EQ(back.class_names(), d.class_names());
}

TEST(SplitPerClass, EightClassSizes) {
  const auto d = blocks(8, 110);
  const auto s = split_per_class(d, {75, 25, 42});
  EXPECT_EQ(s.train.size(), 600);
  EXPECT_EQ(s.test.size(), 200);
  for (int j = 0; j < 8; ++j) {
    EXPECT_EQ(s.train.class_size(j), 75);
    EXPECT_EQ(s.test.class_size(j), 25);
  }
  // train classes concatenated in class order
  for (Index r = 0; r < s.train.size(); ++r) EXPECT_EQ(s.train.labels()[r], r / 75);
}

TEST(SplitPerClass, InsufficientClassSize) {
  const auto d = blocks(2, 100);
  try {
    split_per_class(d, {300, 1, 0});
    FAIL();
  } catch (const InsufficientClassSize& e) {
    EXPECT_EQ(e.class_id(), 0);
    EXPECT_EQ(e.have(), 100u);
    EXPECT_EQ(e.need(), 301u);
  }
}

TEST(SplitPerClass, RejectsZeroCounts) {
  const auto d = blocks(2, 10);
  EXPECT_THROW(split_per_class(d, {0, 1, 0}), Error);
  EXPECT_THROW(split_per_class(d, {1, 0, 0}), Error);
}

TEST(SplitPerClass, Deterministic) {
  const auto d = blocks(3, 40);
  const auto a = split_per_class(d, {10, 5, 99});
  const auto b = split_per_class(d, {10, 5, 99});
  EXPECT_EQ(a.train_rows, b.train_rows);
  EXPECT_EQ(a.test_rows, b.test_rows);
  EXPECT_EQ(split_hash(a), split_hash(b));
  const auto c = split_per_class(d, {10, 5, 100});
  EXPECT_NE(a.train_rows, c.train_rows);
}

TEST(SplitPerClass, FeaturesFollowRows) {
  const auto d = blocks(2, 20);
  const auto s = split_per_class(d, {5, 5, 7});
  for (std::size_t i = 0; i < s.train_rows.size(); ++i)
    EXPECT_EQ(s.train.features()(static_cast<Index>(i), 0), static_cast<double>(s.train_rows[i]));
}

TEST(SplitPerClass, BlockPermutationInvariance) {
  // Same within-class order, class blocks laid out in a different order.
  const Index per = 30;
  const auto d = blocks(3, per);
  MatrixXd f(3 * per, 2);
  std::vector<int> labels;
  const int order[3] = {2, 0, 1};
  Index r = 0;
  for (int j : order)
    for (Index i = 0; i < per; ++i, ++r) {
      f.row(r).setConstant(static_cast<double>(j * per + i));
      labels.push_back(j);
    }
  // labels reference the original class ids, so class j keeps its index.
  const LabeledDataset swapped(f, labels);
  const auto a = split_per_class(d, {12, 8, 5});
  const auto b = split_per_class(swapped, {12, 8, 5});
  for (int j = 0; j < 3; ++j) {
    EXPECT_EQ(ids(a.train, j), ids(b.train, j));
    EXPECT_EQ(ids(a.test, j), ids(b.test, j));
  }
}

TEST(SplitPerClass, RandomSpecsDisjointWithinClass) {
  std::mt19937_64 gen(2024);
  const auto d = blocks(4, 50);
  for (int trial = 0; trial < 50; ++trial) {
    const Index tr = 1 + static_cast<Index>(gen() % 30);
    const Index te = 1 + static_cast<Index>(gen() % (50 - tr));
    const auto s = split_per_class(d, {tr, te, gen()});
    for (int j = 0; j < 4; ++j) {
      std::set<double> all = ids(s.train, j);
      const auto t = ids(s.test, j);
      all.insert(t.begin(), t.end());
      EXPECT_EQ(static_cast<Index>(all.size()), tr + te);
      for (double v : all) EXPECT_EQ(static_cast<Index>(v) / 50, j);
    }
  }
}

TEST(SplitStreamSeed, DependsOnSeedAndClass) {
  EXPECT_NE(split_stream_seed(0, 0), split_stream_seed(0, 1));
  EXPECT_NE(split_stream_seed(0, 0), split_stream_seed(1, 0));
  EXPECT_EQ(split_stream_seed(17, 3), split_stream_seed(17, 3));
}

TEST(RowsHash, OrderSensitive) {
  EXPECT_NE(rows_hash({1, 2}), rows_hash({2, 1}));
  EXPECT_EQ(rows_hash({4, 5, 6}), rows_hash({4, 5, 6}));
}

TEST(ValidateNonnegative, AllPositiveUnchanged) {
  const auto d = blocks(2, 3);
  const auto r = validate_nonnegative(d, false);
  EXPECT_EQ(r.clamped, 0u);
  EXPECT_EQ(r.data.features(), d.features());
}

TEST(ValidateNonnegative, NegativeEntryReported) {
  MatrixXd f = MatrixXd::Ones(3, 2);
  f(2, 1) = -0.5;
  const LabeledDataset d(f, {0, 1, 0});
  try {
    validate_nonnegative(d, false);
    FAIL();
  } catch (const NegativeEntry& e) {
    EXPECT_EQ(e.row(), 2u);
    EXPECT_EQ(e.col(), 1u);
    EXPECT_DOUBLE_EQ(e.value(), -0.5);
  }
  EXPECT_THROW(validate_nonnegative(d, true), NegativeEntry);
}

TEST(ValidateNonnegative, ClampsRoundOff) {
  MatrixXd f = MatrixXd::Ones(2, 2);
  f(0, 1) = -1e-12;
  const LabeledDataset d(f, {0, 1});
  const auto r = validate_nonnegative(d, true);
  EXPECT_EQ(r.clamped, 1u);
  EXPECT_EQ(r.data.features()(0, 1), 0.0);
  EXPECT_THROW(validate_nonnegative(d, false), NegativeEntry);
}
