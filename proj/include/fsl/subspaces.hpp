#ifndef FSL_SUBSPACES_HPP
#define FSL_SUBSPACES_HPP

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fsl/dataset.hpp"
#include "fsl/linalg.hpp"

namespace fsl {

/// Two-class scatter: mean difference and the size-weighted intra-class scatter.
struct BinaryScatter {
  VectorXd s_b;          // mean(class 0) - mean(class 1)
  MatrixXd s_w;          // beta * S_W^0 + (1 - beta) * S_W^1
  double balance = 0.5;  // beta = (N_1 - 1) / (N_0 + N_1 - 2)
};

struct ScatterStats {
  VectorXd global_mean;
  MatrixXd class_means;        // C x M, row j is the mean of class j
  std::vector<Index> class_sizes;
  MatrixXd s_w_total;          // sum of per-class scatters
  MatrixXd s_b_total;          // sum over classes of (m_j - m)(m_j - m)^T
  std::optional<BinaryScatter> binary;  // present iff C == 2

  Index dims() const { return global_mean.size(); }
  int class_count() const { return static_cast<int>(class_sizes.size()); }
};

enum class ProjectionMethod { LdaMulticlass, FsBinary, Svd };

std::string_view to_string(ProjectionMethod m);
ProjectionMethod projection_method_from_string(std::string_view name);

/// M x L linear map with the metadata of the fit that produced it.
struct Projection {
  ProjectionMethod method = ProjectionMethod::Svd;
  MatrixXd directions;                 // M x L, unit columns
  VectorXd discrim_values;             // discriminant methods only
  VectorXd singular_values;            // svd only
  std::optional<VectorXd> center;      // subtracted before projecting
  double regularization = 0.0;         // delta actually added to the intra-class scatter

  Index source_dims() const { return directions.rows(); }
  Index dims() const { return directions.cols(); }
};

struct LdaConfig {
  double delta = 5e-3;
  Index max_dims_binary = 10;
};

/// Class means, S_W, S_B, and for two classes the binary s_b and S~_W.
ScatterStats compute_scatter(const LabeledDataset& d);

/// C-1 generalized eigenvectors of (S_B, S_W + delta I) via Cholesky whitening.
Projection fit_lda_multiclass(const ScatterStats& stats, const LdaConfig& cfg = {});

/// Foley-Sammon orthonormal discriminant vectors for two classes.
///
/// d_1 is proportional to S~_W^{-1} s_b and each later d_n solves the
/// constrained Fisher problem (orthogonal to d_1..d_{n-1}) through
///   d_n ~ S~_W^{-1} (s_b - D_{n-1} S_{n-1}^{-1} [1/a_1, 0, ..., 0]^T),
/// with S_{n-1}(i, j) = d_i^T S~_W^{-1} d_j and a_1 the normalizer of d_1.
/// S~_W gets delta * I added only when its Cholesky factorization fails.
/// If s_b already lies in span(d_1..d_{n-1}) the remaining directions are an
/// orthonormal completion with discrim-value 0.
/// Throws NotBinary, DegenerateMeans or RecursionBreakdown.
Projection fit_fs_binary(const ScatterStats& stats, Index dims, const LdaConfig& cfg = {});

/// Fisher ratio of every column under the scatter pair the projection was
/// fitted with (including its regularization).
std::vector<double> discrim_values(const Projection& p, const ScatterStats& stats);

/// Top-p right singular vectors of the (optionally column-centered) data.
Projection fit_svd_subspace(const LabeledDataset& train, Index p, bool center = false);

/// samples * directions, after subtracting the stored center if any.
MatrixXd project(const Projection& p, const MatrixXd& samples);

/// Fisher ratio (d^T B d) / (d^T W d).
template <typename DerivedD, typename DerivedB, typename DerivedW>
double fisher_ratio(const Eigen::MatrixBase<DerivedD>& d, const Eigen::MatrixBase<DerivedB>& between,
                    const Eigen::MatrixBase<DerivedW>& within) {
  return d.dot(between * d) / d.dot(within * d);
}

}  // namespace fsl

#endif  // FSL_SUBSPACES_HPP
