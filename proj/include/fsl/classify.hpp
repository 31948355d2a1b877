#ifndef FSL_CLASSIFY_HPP
#define FSL_CLASSIFY_HPP

#include <vector>

#include "fsl/linalg.hpp"

namespace fsl {

struct KnnConfig {
  std::vector<Index> k_values{1, 5, 10, 15};

  /// Throws InvalidInput unless non-empty, every k >= 1 and strictly increasing.
  void validate() const;
};

/// Euclidean k-nearest-neighbour majority vote. Ties between classes with the
/// same vote count go to the smaller summed neighbour distance, then to the
/// smaller class index. Equidistant neighbours are ranked by training row.
std::vector<int> knn_predict(const MatrixXd& train_feats, const std::vector<int>& train_labels,
                             const MatrixXd& test_feats, Index k);

/// Fraction of exact matches.
double accuracy(const std::vector<int>& pred, const std::vector<int>& truth);

/// Arithmetic mean of the KNN accuracy over cfg.k_values. Distances are
/// computed once per test row and shared by every k.
double mean_accuracy_over_k(const MatrixXd& train_feats, const std::vector<int>& train_labels,
                            const MatrixXd& test_feats, const std::vector<int>& test_labels,
                            const KnnConfig& cfg = {});

struct ZTestResult {
  double z = 0.0;
  double p = 1.0;
};

/// Two-sample unpooled z-test on the means, unbiased variances, two-sided p.
/// Zero total variance gives z = 0, p = 1 for equal means and z = +-inf, p = 0
/// otherwise.
ZTestResult z_test(const std::vector<double>& sample_a, const std::vector<double>& sample_b);

}  // namespace fsl

#endif  // FSL_CLASSIFY_HPP
