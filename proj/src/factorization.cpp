#include "fsl/factorization.hpp"

#include <cmath>
#include <random>

#include "fsl/dataset.hpp"

namespace fsl {

namespace {

void check_factor_input(const MatrixXd& y, Index p, Index iters, const char* who) {
  require_nonempty(y, who);
  require_finite(y, who);
  require_nonnegative(y);
  const Index limit = std::min(y.rows(), y.cols());
  if (p < 1 || p >= limit) {
    throw_invalid(std::string(who) + ": rank must satisfy 1 <= p < min(N, M) = " +
                  std::to_string(limit) + ", got " + std::to_string(p));
  }
  if (iters < 1) throw_invalid(std::string(who) + ": iteration count must be >= 1");
}

// Uniform on (0, 1] from the top 53 bits.
double unit_open_closed(std::mt19937_64& gen) {
  return static_cast<double>((gen() >> 11) + 1) * 0x1.0p-53;
}

double softplus(double a) { return a > 0 ? a + std::log1p(std::exp(-a)) : std::log1p(std::exp(a)); }

double logistic(double a) {
  if (a >= 0) return 1.0 / (1.0 + std::exp(-a));
  const double e = std::exp(a);
  return e / (1.0 + e);
}

MatrixXd design_matrix(const MatrixXd& y, const MatrixXd& x) {
  MatrixXd z(y.rows(), x.rows() + 1);
  z.col(0).setOnes();
  z.rightCols(x.rows()).noalias() = y * x.transpose();
  return z;
}

VectorXd label_vector(const std::vector<int>& u) {
  VectorXd out(static_cast<Index>(u.size()));
  for (std::size_t i = 0; i < u.size(); ++i) out(static_cast<Index>(i)) = u[i];
  return out;
}

void check_binary_labels(const std::vector<int>& u, Index n) {
  if (static_cast<Index>(u.size()) != n) {
    throw_invalid("label vector has " + std::to_string(u.size()) + " entries for " +
                  std::to_string(n) + " samples");
  }
  bool seen[2] = {false, false};
  for (int label : u) {
    if (label != 0 && label != 1) {
      throw Error(ErrorCode::NotBinary, "supervised NMF needs labels in {0, 1}, found " +
                                            std::to_string(label));
    }
    seen[label] = true;
  }
  if (!seen[0] || !seen[1]) {
    throw Error(ErrorCode::NotBinary, "supervised NMF needs both classes present");
  }
}

}  // namespace

std::pair<MatrixXd, MatrixXd> nmf_initialize(const MatrixXd& y, Index p, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  const double mean = y.size() > 0 ? y.mean() : 0.0;
  const double scale = mean > 0 ? std::sqrt(mean / static_cast<double>(p)) : 1.0;
  MatrixXd k(y.rows(), p);
  MatrixXd x(p, y.cols());
  for (Index r = 0; r < k.rows(); ++r)
    for (Index c = 0; c < k.cols(); ++c) k(r, c) = scale * unit_open_closed(gen);
  for (Index r = 0; r < x.rows(); ++r)
    for (Index c = 0; c < x.cols(); ++c) x(r, c) = scale * unit_open_closed(gen);
  return {std::move(k), std::move(x)};
}

void nmf_update_k(const MatrixXd& y, MatrixXd& k, const MatrixXd& x) {
  const MatrixXd numer = y * x.transpose();
  const MatrixXd denom = k * (x * x.transpose());
  k = k.cwiseProduct(numer.cwiseQuotient(denom.cwiseMax(kDenominatorFloor)));
}

void nmf_update_x(const MatrixXd& y, const MatrixXd& k, MatrixXd& x) {
  const MatrixXd numer = k.transpose() * y;
  const MatrixXd denom = (k.transpose() * k) * x;
  x = x.cwiseProduct(numer.cwiseQuotient(denom.cwiseMax(kDenominatorFloor)));
}

NmfModel nmf_fit(const MatrixXd& y, Index p, Index iters, std::uint64_t seed) {
  check_factor_input(y, p, iters, "nmf_fit");
  NmfModel model;
  std::tie(model.k, model.x) = nmf_initialize(y, p, seed);
  model.rank = p;
  model.seed = seed;
  model.iterations = iters;
  model.error_trace.reserve(static_cast<std::size_t>(iters));
  for (Index it = 0; it < iters; ++it) {
    nmf_update_k(y, model.k, model.x);
    nmf_update_x(y, model.k, model.x);
    model.error_trace.push_back((y - model.k * model.x).norm());
  }
  return model;
}

MatrixXd nmf_transform(const MatrixXd& x, const MatrixXd& samples, Index iters,
                       std::uint64_t seed) {
  require_nonempty(x, "nmf_transform");
  require_nonempty(samples, "nmf_transform");
  require_finite(samples, "nmf_transform");
  if (samples.cols() != x.cols()) {
    throw_invalid("nmf_transform: samples have " + std::to_string(samples.cols()) +
                  " columns, basis has " + std::to_string(x.cols()));
  }
  if (iters < 1) throw_invalid("nmf_transform: iteration count must be >= 1");
  require_nonnegative(samples);

  MatrixXd k = nmf_initialize(samples, x.rows(), seed).first;
  // X is fixed, so both products of the K update are loop invariants.
  const MatrixXd numer = samples * x.transpose();
  const MatrixXd gram = x * x.transpose();
  for (Index it = 0; it < iters; ++it) {
    const MatrixXd denom = k * gram;
    k = k.cwiseProduct(numer.cwiseQuotient(denom.cwiseMax(kDenominatorFloor)));
  }
  return k;
}

AdadeltaState AdadeltaState::zeros(Index rows, Index cols, const AdadeltaParams& params) {
  if (!(params.rho > 0 && params.rho < 1)) throw_invalid("ADADELTA rho must lie in (0, 1)");
  if (!(params.epsilon > 0)) throw_invalid("ADADELTA epsilon must be positive");
  return AdadeltaState{MatrixXd::Zero(rows, cols), MatrixXd::Zero(rows, cols), params.rho,
                       params.epsilon};
}

MatrixXd AdadeltaState::step(const MatrixXd& grad) {
  if (grad.rows() != grad_accum.rows() || grad.cols() != grad_accum.cols()) {
    throw_invalid("adadelta_step: gradient is " + std::to_string(grad.rows()) + "x" +
                  std::to_string(grad.cols()) + ", state is " + std::to_string(grad_accum.rows()) +
                  "x" + std::to_string(grad_accum.cols()));
  }
  grad_accum = rho * grad_accum + (1.0 - rho) * grad.cwiseAbs2();
  MatrixXd delta = -((step_accum.array() + epsilon).sqrt() /
                     (grad_accum.array() + epsilon).sqrt() * grad.array())
                        .matrix();
  step_accum = rho * step_accum + (1.0 - rho) * delta.cwiseAbs2();
  return delta;
}

std::pair<MatrixXd, AdadeltaState> adadelta_step(const AdadeltaState& state, const MatrixXd& grad) {
  AdadeltaState next = state;
  MatrixXd delta = next.step(grad);
  return {std::move(delta), std::move(next)};
}

MatrixXd project_nonnegative(const MatrixXd& x, double floor) {
  return x.unaryExpr([floor](double v) { return v < 0.0 ? floor : v; });
}

double SnmfModel::final_error() const {
  return reconstruction_trace.empty() ? 0.0 : std::sqrt(2.0 * reconstruction_trace.back());
}

SnmfObjective snmf_objective(const MatrixXd& y, const std::vector<int>& u, const MatrixXd& k,
                             const MatrixXd& x, const VectorXd& beta, double lambda_reg) {
  const double err = reconstruction_error(k, x, y);
  if (beta.size() != x.rows() + 1) throw_invalid("snmf_objective: beta must have p + 1 entries");
  const VectorXd a = design_matrix(y, x) * beta;
  const VectorXd labels = label_vector(u);
  double sum = 0.0;
  for (Index i = 0; i < a.size(); ++i) sum += softplus(a(i)) - labels(i) * a(i);
  return {0.5 * err * err, lambda_reg / static_cast<double>(y.rows()) * sum};
}

SnmfGradients snmf_gradients(const MatrixXd& y, const std::vector<int>& u, const MatrixXd& k,
                             const MatrixXd& x, const VectorXd& beta, double lambda_reg) {
  if (beta.size() != x.rows() + 1) throw_invalid("snmf_gradients: beta must have p + 1 entries");
  const MatrixXd z = design_matrix(y, x);
  const VectorXd a = z * beta;
  VectorXd residual = label_vector(u);  // becomes sigma(a) - u
  for (Index i = 0; i < a.size(); ++i) residual(i) = logistic(a(i)) - residual(i);
  const double scale = lambda_reg / static_cast<double>(y.rows());

  SnmfGradients g;
  g.x = -k.transpose() * (y - k * x);
  g.x.noalias() += scale * beta.tail(x.rows()) * (residual.transpose() * y);
  g.beta = scale * (z.transpose() * residual);
  return g;
}

SnmfModel snmf_fit(const MatrixXd& y, const std::vector<int>& u, Index p, double lambda_reg,
                   Index iters, std::uint64_t seed, const AdadeltaParams& adadelta) {
  check_factor_input(y, p, iters, "snmf_fit");
  check_binary_labels(u, y.rows());
  if (!(lambda_reg >= 0) || !std::isfinite(lambda_reg)) {
    throw_invalid("snmf_fit: lambda_reg must be a finite non-negative real");
  }

  SnmfModel model;
  std::tie(model.k, model.x) = nmf_initialize(y, p, seed);
  model.rank = p;
  model.seed = seed;
  model.iterations = iters;
  model.lambda_reg = lambda_reg;
  model.adadelta = adadelta;
  model.logit_coefficients = VectorXd::Zero(p + 1);

  AdadeltaState x_state = AdadeltaState::zeros(p, y.cols(), adadelta);
  AdadeltaState beta_state = AdadeltaState::zeros(p + 1, 1, adadelta);
  for (Index it = 0; it < iters; ++it) {
    nmf_update_k(y, model.k, model.x);

    const SnmfGradients gx = snmf_gradients(y, u, model.k, model.x, model.logit_coefficients, lambda_reg);
    model.x = project_nonnegative(model.x + x_state.step(gx.x));

    const SnmfGradients gb = snmf_gradients(y, u, model.k, model.x, model.logit_coefficients, lambda_reg);
    model.logit_coefficients += beta_state.step(gb.beta);

    const SnmfObjective obj =
        snmf_objective(y, u, model.k, model.x, model.logit_coefficients, lambda_reg);
    model.loss_trace.push_back(obj.total());
    model.reconstruction_trace.push_back(obj.reconstruction);
    model.logistic_trace.push_back(obj.logistic);
  }
  return model;
}

VectorXd snmf_predict_proba(const SnmfModel& model, const MatrixXd& samples) {
  if (samples.cols() != model.x.cols()) {
    throw_invalid("snmf_predict_proba: samples have " + std::to_string(samples.cols()) +
                  " columns, basis has " + std::to_string(model.x.cols()));
  }
  const VectorXd a = design_matrix(samples, model.x) * model.logit_coefficients;
  return a.unaryExpr([](double v) { return logistic(v); });
}

}  // namespace fsl
