#ifndef FSL_HARNESS_HPP
#define FSL_HARNESS_HPP

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "fsl/classify.hpp"
#include "fsl/dataset.hpp"

namespace fsl {

/// Feature representations compared by the harness, in report order.
enum class Method { FeatureSpace, Svd, Lda, FsBinary, Nmf, Snmf };

std::string_view method_name(Method m);
Method method_from_name(std::string_view name);

struct FactorizationConfig {
  Index iters = 3000;
  double lambda_reg = 1.0;
  double rho = 0.95;
  double epsilon = 1e-6;
};

struct ExperimentConfig {
  std::string dataset_path;
  Index train_per_class = 0;
  Index test_per_class = 0;
  Index repetitions = 10;
  std::vector<Method> methods;
  std::map<Method, Index> dims;  // overrides of the per-method defaults
  KnnConfig knn;
  FactorizationConfig factorization;
  double lda_delta = 5e-3;
  std::uint64_t base_seed = 0;
  bool svd_center = false;

  /// Subspace dimension used for `m`: the override if present, else 30 for
  /// svd/nmf/snmf, 10 for fs_binary, C-1 for lda and M for feature_space.
  Index dims_for(Method m, int class_count, Index source_dims) const;

  std::uint64_t split_seed(Index repetition) const {
    return base_seed + static_cast<std::uint64_t>(repetition);
  }
  std::uint64_t init_seed(Index repetition) const {
    return base_seed * 1000u + static_cast<std::uint64_t>(repetition);
  }
};

/// Strict reader: unknown keys anywhere are rejected with InvalidInput.
ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ExperimentConfig& cfg);

/// Checks every precondition that can be checked before fitting anything.
void validate_config(const ExperimentConfig& cfg, const LabeledDataset& data);

/// Accuracies are stored in percent.
struct MethodResult {
  Method method = Method::FeatureSpace;
  Index dims = 0;
  std::vector<double> accuracies;  // one per repetition
  double mean = 0.0;
  double std = 0.0;  // unbiased, 0 for a single repetition
  double wall_time_s = 0.0;
  std::vector<std::string> split_hashes;  // split seen in each repetition
};

struct PairwiseTest {
  Method a = Method::FeatureSpace;
  Method b = Method::FeatureSpace;
  double z = 0.0;
  double p = 1.0;
};

struct ExperimentReport {
  ExperimentConfig config;
  int class_count = 0;
  Index source_dims = 0;
  std::vector<std::string> split_hashes;  // per repetition
  std::vector<MethodResult> methods;      // report order
  std::vector<PairwiseTest> comparisons;  // all pairs, report order

  const MethodResult& result(Method m) const;
};

nlohmann::json to_json(const ExperimentReport& report, bool include_timing = true);
ExperimentReport report_from_json(const nlohmann::json& j);

/// Repeated splits (seed base_seed + r), every method fitted on train only,
/// mean KNN accuracy over cfg.knn.k_values, pairwise z-tests.
ExperimentReport run_experiment(const ExperimentConfig& cfg, const LabeledDataset& data);
ExperimentReport run_experiment(const ExperimentConfig& cfg);

struct SweepRow {
  Index dim = 0;
  double mean = 0.0;
  double std = 0.0;
  std::vector<double> accuracies;
  std::vector<std::string> split_hashes;
};

/// One run_experiment per dimension with the same splits, rows sorted by dim.
std::vector<SweepRow> dimension_sweep(const ExperimentConfig& cfg, const LabeledDataset& data,
                                      Method method, std::vector<Index> dims);
std::vector<SweepRow> dimension_sweep(const ExperimentConfig& cfg, Method method,
                                      std::vector<Index> dims);

struct InitStudyRow {
  Index dim = 0;
  std::uint64_t init_seed = 0;
  double final_error = 0.0;
  double mean_accuracy = 0.0;  // percent
};

struct InitStudySummary {
  Index dim = 0;
  double mean_error = 0.0;
  double mean_accuracy = 0.0;
  double accuracy_spread = 0.0;  // max - min, percent points
};

/// NMF fitted `inits` times per dim on the split of repetition 0; init seed
/// i is cfg.init_seed(i).
std::vector<InitStudyRow> nmf_init_study(const ExperimentConfig& cfg, const LabeledDataset& data,
                                         const std::vector<Index>& dims, Index inits);
std::vector<InitStudyRow> nmf_init_study(const ExperimentConfig& cfg,
                                         const std::vector<Index>& dims, Index inits);
std::vector<InitStudySummary> summarize_init_study(const std::vector<InitStudyRow>& rows);

/// "58.68±3.75": two decimals, values already in percent.
std::string format_mean_std(double mean, double std);

std::string render_table(const ExperimentReport& report);

/// Writes report.json and report.txt into `dir` (created if missing).
void emit_report(const ExperimentReport& report, const std::filesystem::path& dir);
/// Writes sweep.csv, sweep.json and sweep.txt.
void emit_sweep(const std::vector<SweepRow>& rows, Method method, const std::filesystem::path& dir);
/// Writes init_study.csv and init_study.txt.
void emit_init_study(const std::vector<InitStudyRow>& rows, const std::filesystem::path& dir);

}  // namespace fsl

#endif  // FSL_HARNESS_HPP
