#ifndef FSL_DATASET_HPP
#define FSL_DATASET_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "fsl/linalg.hpp"

namespace fsl {

/// N samples of dimension M with labels in 0..C-1. Every class has at least
/// one member; class_index(j) lists the rows of class j in row order.
class LabeledDataset {
 public:
  /// Validates the invariants. class_count defaults to max(label) + 1 and
  /// class_names defaults to the decimal class ids.
  LabeledDataset(MatrixXd features, std::vector<int> labels,
                 std::vector<std::string> class_names = {});

  const MatrixXd& features() const { return features_; }
  const std::vector<int>& labels() const { return labels_; }
  const std::vector<std::string>& class_names() const { return class_names_; }
  const std::vector<Index>& class_index(int j) const { return class_index_.at(j); }

  Index size() const { return features_.rows(); }
  Index dims() const { return features_.cols(); }
  int class_count() const { return static_cast<int>(class_names_.size()); }
  Index class_size(int j) const { return static_cast<Index>(class_index(j).size()); }

  /// Rows of `rows` in the given order, keeping class ids and names.
  LabeledDataset subset(const std::vector<Index>& rows) const;

  /// Same labels, new feature matrix with the same row count.
  LabeledDataset with_features(MatrixXd features) const;

 private:
  MatrixXd features_;
  std::vector<int> labels_;
  std::vector<std::string> class_names_;
  std::vector<std::vector<Index>> class_index_;
};

struct SplitSpec {
  Index train_per_class = 1;
  Index test_per_class = 1;
  std::uint64_t seed = 0;
};

/// train/test datasets plus the source row indices each was drawn from.
struct Split {
  LabeledDataset train;
  LabeledDataset test;
  std::vector<Index> train_rows;
  std::vector<Index> test_rows;
};

/// Reads the feature CSV: header `label,f0,...`, one sample per line.
/// Labels are remapped to 0..C-1 in first-appearance order; the original
/// strings become class_names.
LabeledDataset load_feature_csv(const std::filesystem::path& path);

/// Inverse of load_feature_csv, 17 significant digits per value.
void write_feature_csv(const LabeledDataset& d, const std::filesystem::path& path);

/// Per-class shuffle-and-take. Class j is shuffled by a generator seeded with
/// split_stream_seed(seed, j); the first train_per_class rows go to train and
/// the next test_per_class to test.
Split split_per_class(const LabeledDataset& d, const SplitSpec& spec);

/// Seed of the per-class shuffle stream: splitmix64 over (seed, class).
std::uint64_t split_stream_seed(std::uint64_t seed, int class_id);

/// FNV-1a over the row indices, used to compare splits across runs/methods.
std::uint64_t rows_hash(const std::vector<Index>& rows);
std::uint64_t split_hash(const Split& split);

struct NonnegativeCheck {
  LabeledDataset data;
  std::size_t clamped = 0;
};

inline constexpr double kClampTolerance = 1e-9;

/// clamp=false: throws NegativeEntry on any negative entry. clamp=true: entries
/// in [-1e-9, 0) become 0 and are counted; anything below throws.
NonnegativeCheck validate_nonnegative(const LabeledDataset& d, bool clamp);

/// Throws NegativeEntry for the first entry below zero (row-major scan).
void require_nonnegative(const MatrixXd& m);

}  // namespace fsl

#endif  // FSL_DATASET_HPP
