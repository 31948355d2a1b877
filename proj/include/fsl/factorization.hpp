#ifndef FSL_FACTORIZATION_HPP
#define FSL_FACTORIZATION_HPP

#include <cstdint>
#include <utility>
#include <vector>

#include "fsl/linalg.hpp"

namespace fsl {

inline constexpr double kDenominatorFloor = 1e-12;
inline constexpr double kProjectionFloor = 1e-8;
inline constexpr Index kDefaultIterations = 3000;

/// Y ~ K X with K (N x p) and X (p x M) non-negative.
struct NmfModel {
  MatrixXd k;
  MatrixXd x;
  Index rank = 0;
  std::vector<double> error_trace;  // ||Y - K X||_F after each round
  std::uint64_t seed = 0;
  Index iterations = 0;

  double final_error() const { return error_trace.empty() ? 0.0 : error_trace.back(); }
};

struct AdadeltaParams {
  double rho = 0.95;
  double epsilon = 1e-6;
};

/// Running averages of squared gradients and squared steps, per entry.
struct AdadeltaState {
  MatrixXd grad_accum;
  MatrixXd step_accum;
  double rho = 0.95;
  double epsilon = 1e-6;

  static AdadeltaState zeros(Index rows, Index cols, const AdadeltaParams& params = {});

  /// Updates the accumulators in place and returns the step to add.
  MatrixXd step(const MatrixXd& grad);
};

/// Functional form of AdadeltaState::step.
std::pair<MatrixXd, AdadeltaState> adadelta_step(const AdadeltaState& state, const MatrixXd& grad);

struct SnmfModel {
  MatrixXd k;
  MatrixXd x;
  Index rank = 0;
  std::uint64_t seed = 0;
  Index iterations = 0;
  VectorXd logit_coefficients;  // beta, length p + 1, intercept first
  double lambda_reg = 1.0;
  AdadeltaParams adadelta;
  std::vector<double> loss_trace;            // total objective
  std::vector<double> reconstruction_trace;  // 0.5 ||Y - K X||_F^2
  std::vector<double> logistic_trace;        // (lambda / N)(sum softplus(z^T beta) - u^T Z beta)

  double final_error() const;
};

struct SnmfGradients {
  MatrixXd x;     // p x M
  VectorXd beta;  // p + 1
};

struct SnmfObjective {
  double reconstruction = 0.0;
  double logistic = 0.0;
  double total() const { return reconstruction + logistic; }
};

/// ||Y - K X||_F.
template <typename DK, typename DX, typename DY>
double reconstruction_error(const Eigen::MatrixBase<DK>& k, const Eigen::MatrixBase<DX>& x,
                            const Eigen::MatrixBase<DY>& y) {
  if (k.cols() != x.rows() || k.rows() != y.rows() || x.cols() != y.cols()) {
    throw_invalid("reconstruction_error: shapes (" + std::to_string(k.rows()) + "x" +
                  std::to_string(k.cols()) + ")(" + std::to_string(x.rows()) + "x" +
                  std::to_string(x.cols()) + ") do not conform to " + std::to_string(y.rows()) +
                  "x" + std::to_string(y.cols()));
  }
  return (y - k * x).norm();
}

/// Multiplicative-update NMF, `iters` rounds of (K update, X update).
NmfModel nmf_fit(const MatrixXd& y, Index p, Index iters, std::uint64_t seed);

/// Non-negative initialization used by every factorization: uniform (0, 1]
/// entries from mt19937_64(seed), K filled row-major before X, scaled by
/// sqrt(mean(Y) / p).
std::pair<MatrixXd, MatrixXd> nmf_initialize(const MatrixXd& y, Index p, std::uint64_t seed);

/// One multiplicative round on K with X fixed.
void nmf_update_k(const MatrixXd& y, MatrixXd& k, const MatrixXd& x);
/// One multiplicative round on X with K fixed.
void nmf_update_x(const MatrixXd& y, const MatrixXd& k, MatrixXd& x);

/// Coefficients of new samples against a fixed basis X (non-negative least
/// squares through the K update).
MatrixXd nmf_transform(const MatrixXd& x, const MatrixXd& samples, Index iters, std::uint64_t seed);

/// Supervised NMF with a logistic-regression term on z_i = [1, X y_i].
SnmfModel snmf_fit(const MatrixXd& y, const std::vector<int>& u, Index p, double lambda_reg,
                   Index iters, std::uint64_t seed, const AdadeltaParams& adadelta = {});

SnmfObjective snmf_objective(const MatrixXd& y, const std::vector<int>& u, const MatrixXd& k,
                             const MatrixXd& x, const VectorXd& beta, double lambda_reg);

/// Analytic gradients of the total objective with respect to X and beta.
SnmfGradients snmf_gradients(const MatrixXd& y, const std::vector<int>& u, const MatrixXd& k,
                             const MatrixXd& x, const VectorXd& beta, double lambda_reg);

/// Replaces negative entries with a small positive number.
MatrixXd project_nonnegative(const MatrixXd& x, double floor = kProjectionFloor);

/// Logistic-head class-1 probabilities sigma([1, X y]^T beta) for each sample row.
VectorXd snmf_predict_proba(const SnmfModel& model, const MatrixXd& samples);

}  // namespace fsl

#endif  // FSL_FACTORIZATION_HPP
