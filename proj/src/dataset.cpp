#include "fsl/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>
#include <string_view>
#include <unordered_map>

namespace fsl {

LabeledDataset::LabeledDataset(MatrixXd features, std::vector<int> labels,
                               std::vector<std::string> class_names)
    : features_(std::move(features)),
      labels_(std::move(labels)),
      class_names_(std::move(class_names)) {
  if (features_.rows() < 1 || features_.cols() < 1) {
    throw_invalid("dataset needs at least one row and one feature column");
  }
  if (static_cast<Index>(labels_.size()) != features_.rows()) {
    throw_invalid("dataset has " + std::to_string(features_.rows()) + " rows but " +
                  std::to_string(labels_.size()) + " labels");
  }
  if (!features_.allFinite()) throw_invalid("dataset contains non-finite features");

  int max_label = -1;
  for (int label : labels_) {
    if (label < 0) throw_invalid("negative class label " + std::to_string(label));
    max_label = std::max(max_label, label);
  }
  if (class_names_.empty()) {
    for (int j = 0; j <= max_label; ++j) class_names_.push_back(std::to_string(j));
  } else if (static_cast<int>(class_names_.size()) <= max_label) {
    throw_invalid("label " + std::to_string(max_label) + " has no class name");
  }

  class_index_.assign(class_names_.size(), {});
  for (Index i = 0; i < features_.rows(); ++i) class_index_[labels_[i]].push_back(i);
  for (std::size_t j = 0; j < class_index_.size(); ++j) {
    if (class_index_[j].empty()) {
      throw_invalid("class " + std::to_string(j) + " (" + class_names_[j] + ") has no members");
    }
  }
}

LabeledDataset LabeledDataset::subset(const std::vector<Index>& rows) const {
  MatrixXd f(static_cast<Index>(rows.size()), dims());
  std::vector<int> l(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    f.row(static_cast<Index>(r)) = features_.row(rows[r]);
    l[r] = labels_[rows[r]];
  }
  return LabeledDataset(std::move(f), std::move(l), class_names_);
}

LabeledDataset LabeledDataset::with_features(MatrixXd features) const {
  if (features.rows() != size()) throw_invalid("with_features: row count mismatch");
  return LabeledDataset(std::move(features), labels_, class_names_);
}

namespace {

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      cells.push_back(line.substr(start));
      return cells;
    }
    cells.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

bool parse_real(std::string_view cell, double& out) {
  cell = trim(cell);
  if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
  if (cell.empty()) return false;
  const auto* end = cell.data() + cell.size();
  const auto [ptr, ec] = std::from_chars(cell.data(), end, out);
  return ec == std::errc() && ptr == end && std::isfinite(out);
}

}  // namespace

LabeledDataset load_feature_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());

  std::string line;
  auto next_line = [&]() -> bool {
    if (!std::getline(in, line)) return false;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
  };

  if (!next_line()) throw FormatError(0, "empty file");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  const auto header = split_commas(line);
  if (header.size() < 2 || trim(header[0]) != "label") {
    throw FormatError(0, "header must be `label,f0,...,f{M-1}`");
  }
  const std::size_t dims = header.size() - 1;

  std::vector<double> values;
  std::vector<int> labels;
  std::vector<std::string> names;
  std::unordered_map<std::string, int> ids;
  std::size_t row = 0;
  while (next_line()) {
    if (line.empty()) continue;
    ++row;
    const auto cells = split_commas(line);
    if (cells.size() != dims + 1) {
      throw FormatError(row, "expected " + std::to_string(dims) + " feature cells, found " +
                                 std::to_string(cells.size() - 1));
    }
    const std::string label(trim(cells[0]));
    if (label.empty()) throw FormatError(row, "empty label");
    auto [it, inserted] = ids.try_emplace(label, static_cast<int>(names.size()));
    if (inserted) names.push_back(label);
    labels.push_back(it->second);
    for (std::size_t c = 1; c < cells.size(); ++c) {
      double v = 0.0;
      if (!parse_real(cells[c], v)) {
        throw FormatError(row, "column " + std::to_string(c) + " is not a finite real: '" +
                                   std::string(cells[c]) + "'");
      }
      values.push_back(v);
    }
  }
  if (row == 0) throw FormatError(0, "no data rows");

  MatrixXd features(static_cast<Index>(row), static_cast<Index>(dims));
  for (std::size_t r = 0; r < row; ++r) {
    for (std::size_t c = 0; c < dims; ++c) {
      features(static_cast<Index>(r), static_cast<Index>(c)) = values[r * dims + c];
    }
  }
  return LabeledDataset(std::move(features), std::move(labels), std::move(names));
}

void write_feature_csv(const LabeledDataset& d, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << "label";
  for (Index c = 0; c < d.dims(); ++c) out << ",f" << c;
  out << '\n';
  char buf[32];
  for (Index r = 0; r < d.size(); ++r) {
    out << d.class_names()[d.labels()[r]];
    for (Index c = 0; c < d.dims(); ++c) {
      std::snprintf(buf, sizeof buf, "%.17g", d.features()(r, c));
      out << ',' << buf;
    }
    out << '\n';
  }
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// Unbiased draw from [0, n) by rejection; std::uniform_int_distribution is
// not specified bit-for-bit across standard libraries.
std::uint64_t draw_below(std::mt19937_64& gen, std::uint64_t n) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t x = 0;
  do {
    x = gen();
  } while (x >= limit);
  return x % n;
}

}  // namespace

std::uint64_t split_stream_seed(std::uint64_t seed, int class_id) {
  return splitmix64(splitmix64(seed) ^ static_cast<std::uint64_t>(class_id));
}

Split split_per_class(const LabeledDataset& d, const SplitSpec& spec) {
  if (spec.train_per_class < 1 || spec.test_per_class < 1) {
    throw_invalid("split needs train_per_class >= 1 and test_per_class >= 1");
  }
  const Index need = spec.train_per_class + spec.test_per_class;
  for (int j = 0; j < d.class_count(); ++j) {
    if (d.class_size(j) < need) {
      throw InsufficientClassSize(j, static_cast<std::size_t>(d.class_size(j)),
                                  static_cast<std::size_t>(need));
    }
  }

  std::vector<Index> train_rows;
  std::vector<Index> test_rows;
  for (int j = 0; j < d.class_count(); ++j) {
    std::vector<Index> rows = d.class_index(j);
    std::mt19937_64 gen(split_stream_seed(spec.seed, j));
    // Fisher-Yates, high index down.
    for (std::size_t i = rows.size() - 1; i > 0; --i) {
      std::swap(rows[i], rows[draw_below(gen, i + 1)]);
    }
    train_rows.insert(train_rows.end(), rows.begin(), rows.begin() + spec.train_per_class);
    test_rows.insert(test_rows.end(), rows.begin() + spec.train_per_class, rows.begin() + need);
  }
  return Split{d.subset(train_rows), d.subset(test_rows), std::move(train_rows),
               std::move(test_rows)};
}

std::uint64_t rows_hash(const std::vector<Index>& rows) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (Index r : rows) {
    auto v = static_cast<std::uint64_t>(r);
    for (int b = 0; b < 8; ++b) {
      h ^= (v >> (8 * b)) & 0xffu;
      h *= 0x100000001b3ull;
    }
  }
  return h;
}

std::uint64_t split_hash(const Split& split) {
  return rows_hash(split.train_rows) * 31u ^ rows_hash(split.test_rows);
}

NonnegativeCheck validate_nonnegative(const LabeledDataset& d, bool clamp) {
  const MatrixXd& f = d.features();
  if (f.minCoeff() >= 0.0) return {d, 0};
  if (!clamp) {
    require_nonnegative(f);
  }
  MatrixXd out = f;
  std::size_t clamped = 0;
  for (Index r = 0; r < out.rows(); ++r) {
    for (Index c = 0; c < out.cols(); ++c) {
      double& v = out(r, c);
      if (v >= 0.0) continue;
      if (v < -kClampTolerance) {
        throw NegativeEntry(static_cast<std::size_t>(r), static_cast<std::size_t>(c), v);
      }
      v = 0.0;
      ++clamped;
    }
  }
  return {d.with_features(std::move(out)), clamped};
}

void require_nonnegative(const MatrixXd& m) {
  for (Index r = 0; r < m.rows(); ++r) {
    for (Index c = 0; c < m.cols(); ++c) {
      if (m(r, c) < 0.0) {
        throw NegativeEntry(static_cast<std::size_t>(r), static_cast<std::size_t>(c), m(r, c));
      }
    }
  }
}

}  // namespace fsl
