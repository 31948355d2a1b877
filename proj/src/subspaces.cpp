#include "fsl/subspaces.hpp"

#include <cmath>

namespace fsl {

std::string_view to_string(ProjectionMethod m) {
  switch (m) {
    case ProjectionMethod::LdaMulticlass: return "lda_multiclass";
    case ProjectionMethod::FsBinary: return "fs_binary";
    case ProjectionMethod::Svd: return "svd";
  }
  return "unknown";
}

ProjectionMethod projection_method_from_string(std::string_view name) {
  if (name == "lda_multiclass") return ProjectionMethod::LdaMulticlass;
  if (name == "fs_binary") return ProjectionMethod::FsBinary;
  if (name == "svd") return ProjectionMethod::Svd;
  throw_invalid("unknown projection method '" + std::string(name) + "'");
}

ScatterStats compute_scatter(const LabeledDataset& d) {
  const int classes = d.class_count();
  if (classes < 2) {
    throw Error(ErrorCode::NeedTwoClasses,
                "scatter statistics need at least two classes, got " + std::to_string(classes));
  }
  const MatrixXd& y = d.features();
  const Index m = d.dims();

  ScatterStats s;
  s.global_mean = y.colwise().mean().transpose();
  s.class_means.resize(classes, m);
  s.s_w_total = MatrixXd::Zero(m, m);
  s.s_b_total = MatrixXd::Zero(m, m);

  std::vector<MatrixXd> per_class;
  per_class.reserve(classes);
  for (int j = 0; j < classes; ++j) {
    const auto& rows = d.class_index(j);
    MatrixXd members(static_cast<Index>(rows.size()), m);
    for (std::size_t r = 0; r < rows.size(); ++r) members.row(static_cast<Index>(r)) = y.row(rows[r]);
    const VectorXd mean = members.colwise().mean().transpose();
    members.rowwise() -= mean.transpose();
    MatrixXd scatter = MatrixXd::Zero(m, m);
    scatter.selfadjointView<Eigen::Lower>().rankUpdate(members.transpose());
    scatter = scatter.selfadjointView<Eigen::Lower>();

    s.class_means.row(j) = mean.transpose();
    s.class_sizes.push_back(static_cast<Index>(rows.size()));
    s.s_w_total += scatter;
    const VectorXd offset = mean - s.global_mean;
    s.s_b_total.noalias() += offset * offset.transpose();
    per_class.push_back(std::move(scatter));
  }

  if (classes == 2) {
    BinaryScatter b;
    b.s_b = (s.class_means.row(0) - s.class_means.row(1)).transpose();
    const Index n1 = s.class_sizes[0];
    const Index n2 = s.class_sizes[1];
    // One sample per class leaves the weight undefined (0/0); both scatters are zero then.
    b.balance = (n1 + n2 - 2) > 0 ? static_cast<double>(n2 - 1) / static_cast<double>(n1 + n2 - 2)
                                  : 0.5;
    b.s_w = b.balance * per_class[0] + (1.0 - b.balance) * per_class[1];
    s.binary = std::move(b);
  }
  return s;
}

Projection fit_lda_multiclass(const ScatterStats& stats, const LdaConfig& cfg) {
  if (!(cfg.delta > 0)) throw_invalid("LDA regularization delta must be positive");
  const Index m = stats.dims();
  const Index out_dims = stats.class_count() - 1;
  if (out_dims < 1) throw Error(ErrorCode::NeedTwoClasses, "LDA needs at least two classes");
  if (out_dims > m) {
    throw_invalid("LDA yields C-1 = " + std::to_string(out_dims) +
                  " directions but the data has only " + std::to_string(m) + " features");
  }

  const MatrixXd regularized = stats.s_w_total + cfg.delta * MatrixXd::Identity(m, m);
  std::optional<SpdFactor<double>> factor;
  try {
    factor.emplace(regularized);
  } catch (const Error& e) {
    throw Error(ErrorCode::NumericalFailure,
                std::string("regularized intra-class scatter is not positive definite: ") + e.what());
  }
  const auto lower = factor->lower();

  // Whitened between-class scatter L^{-1} S_B L^{-T}.
  const MatrixXd left = lower.solve(stats.s_b_total);
  const MatrixXd whitened = lower.solve(left.transpose());
  const SymEigResult<double> eig = sym_eig(whitened);

  Projection p;
  p.method = ProjectionMethod::LdaMulticlass;
  p.regularization = cfg.delta;
  p.directions = lower.transpose().solve(eig.eigenvectors.leftCols(out_dims));
  p.discrim_values = eig.eigenvalues.head(out_dims);
  for (Index j = 0; j < out_dims; ++j) {
    p.directions.col(j).normalize();
    canonicalize_sign(p.directions.col(j));
  }
  return p;
}

Projection fit_fs_binary(const ScatterStats& stats, Index dims, const LdaConfig& cfg) {
  if (!stats.binary) {
    throw Error(ErrorCode::NotBinary, "Foley-Sammon directions need exactly two classes, got " +
                                          std::to_string(stats.class_count()));
  }
  const Index m = stats.dims();
  if (dims < 1 || dims > m) {
    throw_invalid("fs_binary dims must lie in [1, " + std::to_string(m) + "], got " +
                  std::to_string(dims));
  }
  const BinaryScatter& bin = *stats.binary;
  if (bin.s_b.norm() <= 1e-12) {
    throw Error(ErrorCode::DegenerateMeans, "class means coincide; no discriminant direction exists");
  }

  double reg = 0.0;
  std::optional<SpdFactor<double>> factor;
  try {
    factor.emplace(bin.s_w);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NotPositiveDefinite) throw;
    if (!(cfg.delta > 0)) throw;
    reg = cfg.delta;
    try {
      factor.emplace(bin.s_w + reg * MatrixXd::Identity(m, m));
    } catch (const Error& inner) {
      throw Error(ErrorCode::NumericalFailure,
                  std::string("regularized binary intra-class scatter: ") + inner.what());
    }
  }

  const VectorXd w = factor->solve(bin.s_b);  // S~_W^{-1} s_b
  const double inv_alpha1 = w.norm();

  MatrixXd d(m, dims);        // directions, unflipped
  MatrixXd sinv_d(m, dims);   // S~_W^{-1} d_k
  d.col(0) = w / inv_alpha1;
  sinv_d.col(0) = factor->solve(d.col(0));

  Index recursed = dims;  // directions from the recursion; the rest complete the basis
  for (Index n = 1; n < dims; ++n) {
    const auto prior = d.leftCols(n);
    const auto prior_sinv = sinv_d.leftCols(n);
    MatrixXd gram = prior.transpose() * prior_sinv;  // S_{n-1}
    gram = (0.5 * (gram + gram.transpose())).eval();
    Eigen::LLT<MatrixXd> gram_llt(gram);
    if (gram_llt.info() != Eigen::Success || !(gram_llt.rcond() > 1e-13)) {
      throw RecursionBreakdown(static_cast<std::size_t>(n + 1), static_cast<std::size_t>(n));
    }
    VectorXd rhs = VectorXd::Zero(n);
    rhs(0) = inv_alpha1;
    const VectorXd coeff = gram_llt.solve(rhs);

    // S~_W^{-1}(s_b - D c) = w - (S~_W^{-1} D) c
    VectorXd v = w - prior_sinv * coeff;
    const double raw_norm = v.norm();
    if (raw_norm <= 1e-10 * inv_alpha1) {
      // s_b lies in span(d_1..d_{n-1}): every remaining orthogonal direction
      // has zero discrim-value, so any orthonormal completion is optimal.
      const Eigen::HouseholderQR<MatrixXd> qr(d.leftCols(n));
      const MatrixXd q = qr.householderQ();
      d.rightCols(dims - n) = q.middleCols(n, dims - n);
      recursed = n;
      break;
    }
    v -= prior * (prior.transpose() * v);
    const double norm = v.norm();
    if (!(raw_norm > 0) || !(norm > 1e-8 * raw_norm)) {
      throw RecursionBreakdown(static_cast<std::size_t>(n + 1), static_cast<std::size_t>(n));
    }
    d.col(n) = v / norm;
    sinv_d.col(n) = factor->solve(d.col(n));
  }

  Projection p;
  p.method = ProjectionMethod::FsBinary;
  p.regularization = reg;
  p.directions = std::move(d);
  p.discrim_values.resize(dims);
  for (Index n = 0; n < dims; ++n) {
    canonicalize_sign(p.directions.col(n));
    if (n >= recursed) {
      p.discrim_values(n) = 0.0;
      continue;
    }
    const double along = p.directions.col(n).dot(bin.s_b);
    // d^T S~_W d with the regularization folded in.
    const double spread =
        p.directions.col(n).dot(bin.s_w * p.directions.col(n)) + reg * p.directions.col(n).squaredNorm();
    p.discrim_values(n) = along * along / spread;
  }
  return p;
}

std::vector<double> discrim_values(const Projection& p, const ScatterStats& stats) {
  if (p.source_dims() != stats.dims()) {
    throw_invalid("projection has " + std::to_string(p.source_dims()) +
                  " source dims, scatter stats have " + std::to_string(stats.dims()));
  }
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(p.dims()));
  switch (p.method) {
    case ProjectionMethod::FsBinary: {
      if (!stats.binary) throw_invalid("fs_binary discrim-values need binary scatter statistics");
      const MatrixXd within =
          stats.binary->s_w + p.regularization * MatrixXd::Identity(stats.dims(), stats.dims());
      for (Index n = 0; n < p.dims(); ++n) {
        const auto dn = p.directions.col(n);
        const double along = dn.dot(stats.binary->s_b);
        out.push_back(along * along / dn.dot(within * dn));
      }
      break;
    }
    case ProjectionMethod::LdaMulticlass: {
      const MatrixXd within =
          stats.s_w_total + p.regularization * MatrixXd::Identity(stats.dims(), stats.dims());
      for (Index n = 0; n < p.dims(); ++n) {
        out.push_back(fisher_ratio(p.directions.col(n), stats.s_b_total, within));
      }
      break;
    }
    case ProjectionMethod::Svd:
      throw_invalid("discrim-values are defined only for discriminant projections");
  }
  return out;
}

Projection fit_svd_subspace(const LabeledDataset& train, Index p, bool center) {
  const Index limit = std::min(train.size(), train.dims());
  if (p < 1 || p > limit) {
    throw_invalid("svd subspace dimension must lie in [1, " + std::to_string(limit) + "], got " +
                  std::to_string(p));
  }
  Projection out;
  out.method = ProjectionMethod::Svd;
  SvdResult<double> svd;
  if (center) {
    const VectorXd mean = train.features().colwise().mean().transpose();
    svd = svd_decompose(train.features().rowwise() - mean.transpose());
    out.center = mean;
  } else {
    svd = svd_decompose(train.features());
  }
  out.directions = svd.v.leftCols(p);
  out.singular_values = svd.singular_values.head(p);
  return out;
}

MatrixXd project(const Projection& p, const MatrixXd& samples) {
  if (samples.cols() != p.source_dims()) {
    throw_invalid("samples have " + std::to_string(samples.cols()) +
                  " columns, projection expects " + std::to_string(p.source_dims()));
  }
  if (p.center) {
    if (p.center->size() != p.source_dims()) throw_invalid("projection center has wrong length");
    return (samples.rowwise() - p.center->transpose()) * p.directions;
  }
  return samples * p.directions;
}

}  // namespace fsl
