#include "fsl/classify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace fsl {

void KnnConfig::validate() const {
  if (k_values.empty()) throw_invalid("knn k_values must not be empty");
  for (std::size_t i = 0; i < k_values.size(); ++i) {
    if (k_values[i] < 1) throw_invalid("knn k values must be >= 1");
    if (i > 0 && k_values[i] <= k_values[i - 1]) {
      throw_invalid("knn k_values must be strictly increasing");
    }
  }
}

namespace {

struct Neighbor {
  double dist;
  Index row;
};

void check_knn_inputs(const MatrixXd& train, const std::vector<int>& labels, const MatrixXd& test,
                      Index max_k) {
  if (static_cast<Index>(labels.size()) != train.rows()) {
    throw_invalid("knn: " + std::to_string(train.rows()) + " training rows but " +
                  std::to_string(labels.size()) + " labels");
  }
  if (train.cols() != test.cols()) {
    throw_invalid("knn: training features have " + std::to_string(train.cols()) +
                  " dims, test features have " + std::to_string(test.cols()));
  }
  if (max_k < 1 || max_k > train.rows()) {
    throw_invalid("knn: k = " + std::to_string(max_k) + " must lie in [1, " +
                  std::to_string(train.rows()) + "]");
  }
  for (int l : labels) {
    if (l < 0) throw_invalid("knn: negative training label");
  }
}

// The `count` nearest training rows of one test row, ordered by (distance, row).
std::vector<Neighbor> nearest(const MatrixXd& train, const Eigen::Ref<const Eigen::RowVectorXd>& point,
                              Index count) {
  std::vector<Neighbor> all(static_cast<std::size_t>(train.rows()));
  for (Index r = 0; r < train.rows(); ++r) {
    all[static_cast<std::size_t>(r)] = {(train.row(r) - point).norm(), r};
  }
  auto less = [](const Neighbor& a, const Neighbor& b) {
    return a.dist < b.dist || (a.dist == b.dist && a.row < b.row);
  };
  std::partial_sort(all.begin(), all.begin() + count, all.end(), less);
  all.resize(static_cast<std::size_t>(count));
  return all;
}

int vote(const std::vector<Neighbor>& neighbors, Index k, const std::vector<int>& labels,
         int class_count) {
  std::vector<Index> counts(static_cast<std::size_t>(class_count), 0);
  std::vector<double> dist_sum(static_cast<std::size_t>(class_count), 0.0);
  for (Index i = 0; i < k; ++i) {
    const auto& nb = neighbors[static_cast<std::size_t>(i)];
    const auto c = static_cast<std::size_t>(labels[static_cast<std::size_t>(nb.row)]);
    ++counts[c];
    dist_sum[c] += nb.dist;
  }
  int best = -1;
  for (int c = 0; c < class_count; ++c) {
    const auto uc = static_cast<std::size_t>(c);
    if (counts[uc] == 0) continue;
    if (best < 0) {
      best = c;
      continue;
    }
    const auto ub = static_cast<std::size_t>(best);
    if (counts[uc] > counts[ub] || (counts[uc] == counts[ub] && dist_sum[uc] < dist_sum[ub])) {
      best = c;
    }
  }
  return best;
}

int class_count_of(const std::vector<int>& labels) {
  return labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
}

}  // namespace

std::vector<int> knn_predict(const MatrixXd& train_feats, const std::vector<int>& train_labels,
                             const MatrixXd& test_feats, Index k) {
  check_knn_inputs(train_feats, train_labels, test_feats, k);
  const int classes = class_count_of(train_labels);
  std::vector<int> out(static_cast<std::size_t>(test_feats.rows()));
  for (Index t = 0; t < test_feats.rows(); ++t) {
    out[static_cast<std::size_t>(t)] =
        vote(nearest(train_feats, test_feats.row(t), k), k, train_labels, classes);
  }
  return out;
}

double accuracy(const std::vector<int>& pred, const std::vector<int>& truth) {
  if (pred.size() != truth.size()) {
    throw_invalid("accuracy: " + std::to_string(pred.size()) + " predictions for " +
                  std::to_string(truth.size()) + " labels");
  }
  if (pred.empty()) throw_invalid("accuracy: empty label vectors");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) hits += pred[i] == truth[i] ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(pred.size());
}

double mean_accuracy_over_k(const MatrixXd& train_feats, const std::vector<int>& train_labels,
                            const MatrixXd& test_feats, const std::vector<int>& test_labels,
                            const KnnConfig& cfg) {
  cfg.validate();
  check_knn_inputs(train_feats, train_labels, test_feats, cfg.k_values.back());
  if (static_cast<Index>(test_labels.size()) != test_feats.rows()) {
    throw_invalid("knn: test label count does not match test rows");
  }
  const int classes = class_count_of(train_labels);
  std::vector<std::size_t> hits(cfg.k_values.size(), 0);
  for (Index t = 0; t < test_feats.rows(); ++t) {
    const auto neighbors = nearest(train_feats, test_feats.row(t), cfg.k_values.back());
    for (std::size_t i = 0; i < cfg.k_values.size(); ++i) {
      if (vote(neighbors, cfg.k_values[i], train_labels, classes) ==
          test_labels[static_cast<std::size_t>(t)]) {
        ++hits[i];
      }
    }
  }
  double total = 0.0;
  for (std::size_t h : hits) total += static_cast<double>(h) / static_cast<double>(test_feats.rows());
  return total / static_cast<double>(hits.size());
}

namespace {

struct Moments {
  double mean;
  double var;
};

Moments moments(const std::vector<double>& s) {
  const double n = static_cast<double>(s.size());
  const double mean = std::accumulate(s.begin(), s.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : s) ss += (v - mean) * (v - mean);
  return {mean, ss / (n - 1.0)};
}

}  // namespace

ZTestResult z_test(const std::vector<double>& sample_a, const std::vector<double>& sample_b) {
  if (sample_a.size() < 2 || sample_b.size() < 2) {
    throw_invalid("z_test needs at least two values per sample");
  }
  for (const auto* s : {&sample_a, &sample_b}) {
    for (double v : *s) {
      if (!std::isfinite(v)) throw_invalid("z_test: non-finite value");
    }
  }
  const Moments a = moments(sample_a);
  const Moments b = moments(sample_b);
  const double se2 = a.var / static_cast<double>(sample_a.size()) +
                     b.var / static_cast<double>(sample_b.size());
  const double diff = a.mean - b.mean;
  if (se2 == 0.0) {
    if (diff == 0.0) return {0.0, 1.0};
    return {std::copysign(std::numeric_limits<double>::infinity(), diff), 0.0};
  }
  const double z = diff / std::sqrt(se2);
  return {z, std::erfc(std::abs(z) / std::sqrt(2.0))};
}

}  // namespace fsl
