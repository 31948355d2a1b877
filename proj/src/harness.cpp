#include "fsl/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <numeric>
#include <set>
#include <sstream>

#include "fsl/factorization.hpp"
#include "fsl/serialize.hpp"
#include "fsl/subspaces.hpp"

namespace fsl {

namespace {

constexpr Method kAllMethods[] = {Method::FeatureSpace, Method::Svd,  Method::Lda,
                                  Method::FsBinary,     Method::Nmf, Method::Snmf};

std::string hex64(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double std_of(const std::vector<double>& v, double mean) {
  if (v.size() < 2) return 0.0;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

void check_keys(const json& j, std::initializer_list<const char*> allowed, const char* where) {
  if (!j.is_object()) throw_invalid(std::string(where) + " must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    const bool known = std::any_of(allowed.begin(), allowed.end(),
                                   [&](const char* a) { return key == a; });
    if (!known) throw_invalid("unknown config key '" + key + "' in " + where);
  }
}

template <typename T>
void read_opt(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw_invalid(std::string("config key '") + key + "': " + e.what());
  }
}

}  // namespace

std::string_view method_name(Method m) {
  switch (m) {
    case Method::FeatureSpace: return "feature_space";
    case Method::Svd: return "svd";
    case Method::Lda: return "lda";
    case Method::FsBinary: return "fs_binary";
    case Method::Nmf: return "nmf";
    case Method::Snmf: return "snmf";
  }
  return "unknown";
}

Method method_from_name(std::string_view name) {
  for (Method m : kAllMethods) {
    if (method_name(m) == name) return m;
  }
  throw_invalid("unknown method '" + std::string(name) +
                "' (expected feature_space, svd, lda, fs_binary, nmf or snmf)");
}

Index ExperimentConfig::dims_for(Method m, int class_count, Index source_dims) const {
  if (auto it = dims.find(m); it != dims.end()) return it->second;
  switch (m) {
    case Method::FeatureSpace: return source_dims;
    case Method::Lda: return class_count - 1;
    case Method::FsBinary: return 10;
    case Method::Svd:
    case Method::Nmf:
    case Method::Snmf: return 30;
  }
  return 0;
}

ExperimentConfig config_from_json(const json& j) {
  check_keys(j,
             {"dataset_path", "train_per_class", "test_per_class", "repetitions", "methods",
              "dims", "knn", "factorization", "lda_delta", "base_seed", "svd_center"},
             "experiment config");
  ExperimentConfig cfg;
  read_opt(j, "dataset_path", cfg.dataset_path);
  read_opt(j, "train_per_class", cfg.train_per_class);
  read_opt(j, "test_per_class", cfg.test_per_class);
  read_opt(j, "repetitions", cfg.repetitions);
  std::vector<std::string> names;
  read_opt(j, "methods", names);
  for (const auto& n : names) cfg.methods.push_back(method_from_name(n));
  if (j.contains("dims")) {
    const json& d = j.at("dims");
    if (!d.is_object()) throw_invalid("config key 'dims' must be an object");
    for (const auto& [key, value] : d.items()) {
      const Method m = method_from_name(key);
      if (m == Method::FeatureSpace) throw_invalid("feature_space has no configurable dimension");
      if (!value.is_number_integer()) throw_invalid("dims." + key + " must be an integer");
      cfg.dims[m] = value.get<Index>();
    }
  }
  if (j.contains("knn")) {
    const json& k = j.at("knn");
    check_keys(k, {"k_values"}, "knn");
    read_opt(k, "k_values", cfg.knn.k_values);
  }
  if (j.contains("factorization")) {
    const json& f = j.at("factorization");
    check_keys(f, {"iters", "lambda_reg", "rho", "epsilon"}, "factorization");
    read_opt(f, "iters", cfg.factorization.iters);
    read_opt(f, "lambda_reg", cfg.factorization.lambda_reg);
    read_opt(f, "rho", cfg.factorization.rho);
    read_opt(f, "epsilon", cfg.factorization.epsilon);
  }
  read_opt(j, "lda_delta", cfg.lda_delta);
  read_opt(j, "base_seed", cfg.base_seed);
  read_opt(j, "svd_center", cfg.svd_center);
  return cfg;
}

json to_json(const ExperimentConfig& cfg) {
  json j;
  j["dataset_path"] = cfg.dataset_path;
  j["train_per_class"] = cfg.train_per_class;
  j["test_per_class"] = cfg.test_per_class;
  j["repetitions"] = cfg.repetitions;
  j["methods"] = json::array();
  for (Method m : cfg.methods) j["methods"].push_back(std::string(method_name(m)));
  j["dims"] = json::object();
  for (const auto& [m, d] : cfg.dims) j["dims"][std::string(method_name(m))] = d;
  j["knn"] = {{"k_values", cfg.knn.k_values}};
  j["factorization"] = {{"iters", cfg.factorization.iters},
                        {"lambda_reg", cfg.factorization.lambda_reg},
                        {"rho", cfg.factorization.rho},
                        {"epsilon", cfg.factorization.epsilon}};
  j["lda_delta"] = cfg.lda_delta;
  j["base_seed"] = cfg.base_seed;
  j["svd_center"] = cfg.svd_center;
  return j;
}

void validate_config(const ExperimentConfig& cfg, const LabeledDataset& data) {
  if (cfg.repetitions < 1) throw_invalid("repetitions must be >= 1");
  if (cfg.train_per_class < 1 || cfg.test_per_class < 1) {
    throw_invalid("train_per_class and test_per_class must be >= 1");
  }
  if (cfg.methods.empty()) throw_invalid("no methods requested");
  std::set<Method> seen;
  for (Method m : cfg.methods) {
    if (!seen.insert(m).second) throw_invalid("method '" + std::string(method_name(m)) + "' listed twice");
  }
  cfg.knn.validate();
  if (!(cfg.lda_delta > 0)) throw_invalid("lda_delta must be positive");

  const int classes = data.class_count();
  const Index m = data.dims();
  const Index n_train = cfg.train_per_class * classes;
  if (classes < 2) throw Error(ErrorCode::NeedTwoClasses, "experiments need at least two classes");
  const Index need = cfg.train_per_class + cfg.test_per_class;
  for (int j = 0; j < classes; ++j) {
    if (data.class_size(j) < need) {
      throw InsufficientClassSize(j, static_cast<std::size_t>(data.class_size(j)),
                                  static_cast<std::size_t>(need));
    }
  }
  if (cfg.knn.k_values.back() > n_train) {
    throw_invalid("largest k (" + std::to_string(cfg.knn.k_values.back()) + ") exceeds the " +
                  std::to_string(n_train) + " training rows");
  }

  bool factorizes = false;
  for (Method method : cfg.methods) {
    const std::string name(method_name(method));
    const Index d = cfg.dims_for(method, classes, m);
    switch (method) {
      case Method::FeatureSpace:
        break;
      case Method::Lda:
        if (d != classes - 1) {
          throw_invalid("lda dimension is fixed at C-1 = " + std::to_string(classes - 1) +
                        ", got " + std::to_string(d));
        }
        if (d > m) throw_invalid("lda needs C-1 <= M");
        break;
      case Method::FsBinary:
        if (classes != 2) {
          throw Error(ErrorCode::NotBinary, "fs_binary requires exactly two classes, dataset has " +
                                                std::to_string(classes));
        }
        if (d < 1 || d > m) throw_invalid("fs_binary dims must lie in [1, " + std::to_string(m) + "]");
        break;
      case Method::Svd:
        if (d < 1 || d > std::min(n_train, m)) {
          throw_invalid("svd dims must lie in [1, " + std::to_string(std::min(n_train, m)) + "]");
        }
        break;
      case Method::Snmf:
        if (classes != 2) {
          throw Error(ErrorCode::NotBinary, "snmf requires exactly two classes, dataset has " +
                                                std::to_string(classes));
        }
        [[fallthrough]];
      case Method::Nmf:
        factorizes = true;
        if (d < 1 || d >= std::min(n_train, m)) {
          throw_invalid(name + " dims must satisfy 1 <= p < " + std::to_string(std::min(n_train, m)));
        }
        break;
    }
  }
  if (factorizes) {
    const auto& f = cfg.factorization;
    if (f.iters < 1) throw_invalid("factorization.iters must be >= 1");
    if (!(f.lambda_reg >= 0)) throw_invalid("factorization.lambda_reg must be >= 0");
    if (!(f.rho > 0 && f.rho < 1)) throw_invalid("factorization.rho must lie in (0, 1)");
    if (!(f.epsilon > 0)) throw_invalid("factorization.epsilon must be positive");
    validate_nonnegative(data, true);
  }
}

const MethodResult& ExperimentReport::result(Method m) const {
  for (const auto& r : methods) {
    if (r.method == m) return r;
  }
  throw_invalid("report has no result for '" + std::string(method_name(m)) + "'");
}

namespace {

struct Features {
  MatrixXd train;
  MatrixXd test;
};

MatrixXd clamped(const LabeledDataset& d) { return validate_nonnegative(d, true).data.features(); }

Features represent(Method method, Index dims, const Split& split, const ExperimentConfig& cfg,
                   std::uint64_t init_seed, const std::optional<ScatterStats>& stats) {
  const LdaConfig lda{cfg.lda_delta, dims};
  switch (method) {
    case Method::FeatureSpace:
      return {split.train.features(), split.test.features()};
    case Method::Svd: {
      const Projection p = fit_svd_subspace(split.train, dims, cfg.svd_center);
      return {project(p, split.train.features()), project(p, split.test.features())};
    }
    case Method::Lda: {
      const Projection p = fit_lda_multiclass(*stats, lda);
      return {project(p, split.train.features()), project(p, split.test.features())};
    }
    case Method::FsBinary: {
      const Projection p = fit_fs_binary(*stats, dims, lda);
      return {project(p, split.train.features()), project(p, split.test.features())};
    }
    case Method::Nmf: {
      const auto& f = cfg.factorization;
      const NmfModel model = nmf_fit(clamped(split.train), dims, f.iters, init_seed);
      return {model.k, nmf_transform(model.x, clamped(split.test), f.iters, init_seed)};
    }
    case Method::Snmf: {
      const auto& f = cfg.factorization;
      const SnmfModel model = snmf_fit(clamped(split.train), split.train.labels(), dims, f.lambda_reg,
                                       f.iters, init_seed, {f.rho, f.epsilon});
      return {model.k, nmf_transform(model.x, clamped(split.test), f.iters, init_seed)};
    }
  }
  throw_invalid("unhandled method");
}

std::vector<Method> canonical_methods(const std::vector<Method>& requested) {
  std::vector<Method> out;
  for (Method m : kAllMethods) {
    if (std::find(requested.begin(), requested.end(), m) != requested.end()) out.push_back(m);
  }
  return out;
}

}  // namespace

ExperimentReport run_experiment(const ExperimentConfig& cfg, const LabeledDataset& data) {
  validate_config(cfg, data);
  const std::vector<Method> methods = canonical_methods(cfg.methods);
  const bool needs_scatter =
      std::any_of(methods.begin(), methods.end(),
                  [](Method m) { return m == Method::Lda || m == Method::FsBinary; });

  ExperimentReport report;
  report.config = cfg;
  report.class_count = data.class_count();
  report.source_dims = data.dims();
  for (Method m : methods) {
    MethodResult r;
    r.method = m;
    r.dims = cfg.dims_for(m, data.class_count(), data.dims());
    report.methods.push_back(std::move(r));
  }

  for (Index rep = 0; rep < cfg.repetitions; ++rep) {
    const Split split =
        split_per_class(data, {cfg.train_per_class, cfg.test_per_class, cfg.split_seed(rep)});
    const std::string hash = hex64(split_hash(split));
    report.split_hashes.push_back(hash);
    std::optional<ScatterStats> stats;
    if (needs_scatter) stats = compute_scatter(split.train);

    for (auto& result : report.methods) {
      const auto start = std::chrono::steady_clock::now();
      try {
        const Features f = represent(result.method, result.dims, split, cfg, cfg.init_seed(rep), stats);
        const double acc = mean_accuracy_over_k(f.train, split.train.labels(), f.test,
                                                split.test.labels(), cfg.knn);
        result.accuracies.push_back(100.0 * acc);
      } catch (Error& e) {
        e.add_context("repetition " + std::to_string(rep) + ", method " +
                      std::string(method_name(result.method)));
        throw;
      }
      result.split_hashes.push_back(hash);
      result.wall_time_s +=
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
  }

  for (auto& r : report.methods) {
    r.mean = mean_of(r.accuracies);
    r.std = std_of(r.accuracies, r.mean);
  }
  if (cfg.repetitions >= 2) {
    for (std::size_t a = 0; a < report.methods.size(); ++a) {
      for (std::size_t b = a + 1; b < report.methods.size(); ++b) {
        const ZTestResult t = z_test(report.methods[a].accuracies, report.methods[b].accuracies);
        report.comparisons.push_back({report.methods[a].method, report.methods[b].method, t.z, t.p});
      }
    }
  }
  return report;
}

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
  return run_experiment(cfg, load_feature_csv(cfg.dataset_path));
}

namespace {

json finite_or_string(double v) {
  if (std::isfinite(v)) return v;
  return v > 0 ? "inf" : (v < 0 ? "-inf" : "nan");
}

double double_or_string(const json& j) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    return std::numeric_limits<double>::quiet_NaN();
  }
  return j.get<double>();
}

}  // namespace

json to_json(const ExperimentReport& report, bool include_timing) {
  json j;
  j["config"] = to_json(report.config);
  j["class_count"] = report.class_count;
  j["source_dims"] = report.source_dims;
  j["accuracy_unit"] = "percent";
  j["split_hashes"] = report.split_hashes;
  j["methods"] = json::array();
  for (const auto& r : report.methods) {
    json m;
    m["method"] = std::string(method_name(r.method));
    m["dims"] = r.dims;
    m["accuracies"] = r.accuracies;
    m["mean"] = r.mean;
    m["std"] = r.std;
    m["split_hashes"] = r.split_hashes;
    if (include_timing) m["wall_time_s"] = r.wall_time_s;
    j["methods"].push_back(std::move(m));
  }
  j["comparisons"] = json::array();
  for (const auto& c : report.comparisons) {
    j["comparisons"].push_back({{"a", std::string(method_name(c.a))},
                                {"b", std::string(method_name(c.b))},
                                {"z", finite_or_string(c.z)},
                                {"p", c.p}});
  }
  return j;
}

ExperimentReport report_from_json(const json& j) {
  try {
    ExperimentReport r;
    r.config = config_from_json(j.at("config"));
    r.class_count = j.at("class_count").get<int>();
    r.source_dims = j.at("source_dims").get<Index>();
    r.split_hashes = j.at("split_hashes").get<std::vector<std::string>>();
    for (const auto& m : j.at("methods")) {
      MethodResult res;
      res.method = method_from_name(m.at("method").get<std::string>());
      res.dims = m.at("dims").get<Index>();
      res.accuracies = m.at("accuracies").get<std::vector<double>>();
      res.mean = m.at("mean").get<double>();
      res.std = m.at("std").get<double>();
      res.split_hashes = m.at("split_hashes").get<std::vector<std::string>>();
      if (m.contains("wall_time_s")) res.wall_time_s = m.at("wall_time_s").get<double>();
      r.methods.push_back(std::move(res));
    }
    for (const auto& c : j.at("comparisons")) {
      r.comparisons.push_back({method_from_name(c.at("a").get<std::string>()),
                               method_from_name(c.at("b").get<std::string>()),
                               double_or_string(c.at("z")), c.at("p").get<double>()});
    }
    return r;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::FormatError, std::string("report document: ") + e.what());
  }
}

std::vector<SweepRow> dimension_sweep(const ExperimentConfig& cfg, const LabeledDataset& data,
                                      Method method, std::vector<Index> dims) {
  if (method == Method::Lda) {
    throw_invalid("lda dimension is fixed at C-1; it cannot be swept");
  }
  if (method == Method::FeatureSpace) throw_invalid("feature_space has no dimension to sweep");
  if (dims.empty()) throw_invalid("sweep needs at least one dimension");
  std::sort(dims.begin(), dims.end());
  if (std::adjacent_find(dims.begin(), dims.end()) != dims.end()) {
    throw_invalid("sweep dimensions must be distinct");
  }

  ExperimentConfig run = cfg;
  run.methods = {method};
  for (Index d : dims) {
    run.dims[method] = d;
    try {
      validate_config(run, data);
    } catch (Error& e) {
      e.add_context("invalid dim " + std::to_string(d) + " for " + std::string(method_name(method)));
      throw;
    }
  }

  std::vector<SweepRow> rows;
  for (Index d : dims) {
    run.dims[method] = d;
    const ExperimentReport report = run_experiment(run, data);
    const MethodResult& r = report.methods.front();
    rows.push_back({d, r.mean, r.std, r.accuracies, r.split_hashes});
  }
  return rows;
}

std::vector<SweepRow> dimension_sweep(const ExperimentConfig& cfg, Method method,
                                      std::vector<Index> dims) {
  return dimension_sweep(cfg, load_feature_csv(cfg.dataset_path), method, std::move(dims));
}

std::vector<InitStudyRow> nmf_init_study(const ExperimentConfig& cfg, const LabeledDataset& data,
                                         const std::vector<Index>& dims, Index inits) {
  if (inits < 1) throw_invalid("init study needs at least one initialization");
  if (dims.empty()) throw_invalid("init study needs at least one dimension");
  ExperimentConfig run = cfg;
  run.methods = {Method::Nmf};
  for (Index d : dims) {
    run.dims[Method::Nmf] = d;
    try {
      validate_config(run, data);
    } catch (Error& e) {
      e.add_context("invalid dim " + std::to_string(d) + " for nmf");
      throw;
    }
  }

  const Split split =
      split_per_class(data, {cfg.train_per_class, cfg.test_per_class, cfg.split_seed(0)});
  const MatrixXd train = clamped(split.train);
  const MatrixXd test = clamped(split.test);
  const Index iters = cfg.factorization.iters;

  std::vector<InitStudyRow> rows;
  for (Index d : dims) {
    for (Index i = 0; i < inits; ++i) {
      const std::uint64_t seed = cfg.init_seed(i);
      const NmfModel model = nmf_fit(train, d, iters, seed);
      const MatrixXd test_coeff = nmf_transform(model.x, test, iters, seed);
      const double acc =
          mean_accuracy_over_k(model.k, split.train.labels(), test_coeff, split.test.labels(), cfg.knn);
      rows.push_back({d, seed, model.final_error(), 100.0 * acc});
    }
  }
  return rows;
}

std::vector<InitStudyRow> nmf_init_study(const ExperimentConfig& cfg,
                                         const std::vector<Index>& dims, Index inits) {
  return nmf_init_study(cfg, load_feature_csv(cfg.dataset_path), dims, inits);
}

std::vector<InitStudySummary> summarize_init_study(const std::vector<InitStudyRow>& rows) {
  std::vector<InitStudySummary> out;
  for (const auto& row : rows) {
    if (out.empty() || out.back().dim != row.dim) out.push_back({row.dim, 0.0, 0.0, 0.0});
  }
  for (auto& s : out) {
    std::vector<double> acc;
    double err = 0.0;
    for (const auto& row : rows) {
      if (row.dim != s.dim) continue;
      acc.push_back(row.mean_accuracy);
      err += row.final_error;
    }
    s.mean_error = err / static_cast<double>(acc.size());
    s.mean_accuracy = mean_of(acc);
    const auto [lo, hi] = std::minmax_element(acc.begin(), acc.end());
    s.accuracy_spread = *hi - *lo;
  }
  return out;
}

std::string format_mean_std(double mean, double std) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f±%.2f", mean, std);
  return buf;
}

std::string render_table(const ExperimentReport& report) {
  std::ostringstream os;
  char line[160];
  std::snprintf(line, sizeof line, "%-14s %6s  %s\n", "method", "dims", "accuracy (%)");
  os << line;
  for (const auto& r : report.methods) {
    std::snprintf(line, sizeof line, "%-14s %6lld  %s\n", std::string(method_name(r.method)).c_str(),
                  static_cast<long long>(r.dims), format_mean_std(r.mean, r.std).c_str());
    os << line;
  }
  if (!report.comparisons.empty()) {
    os << '\n';
    std::snprintf(line, sizeof line, "%-14s %-14s %10s %12s\n", "a", "b", "z", "p");
    os << line;
    for (const auto& c : report.comparisons) {
      std::snprintf(line, sizeof line, "%-14s %-14s %10.3f %12.3e\n",
                    std::string(method_name(c.a)).c_str(), std::string(method_name(c.b)).c_str(),
                    c.z, c.p);
      os << line;
    }
  }
  return os.str();
}

namespace {

void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) {
    throw Error(ErrorCode::IoError, "cannot create output directory " + dir.string());
  }
}

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void emit_report(const ExperimentReport& report, const std::filesystem::path& dir) {
  ensure_dir(dir);
  write_text_file(dir / "report.json", to_json(report).dump(2) + "\n");
  write_text_file(dir / "report.txt", render_table(report));
}

void emit_sweep(const std::vector<SweepRow>& rows, Method method, const std::filesystem::path& dir) {
  ensure_dir(dir);
  std::ostringstream csv;
  csv << "dim,mean,std\n";
  json j;
  j["method"] = std::string(method_name(method));
  j["accuracy_unit"] = "percent";
  j["rows"] = json::array();
  std::ostringstream txt;
  char line[96];
  std::snprintf(line, sizeof line, "%6s  %s\n", "dim", std::string(method_name(method)).c_str());
  txt << line;
  for (const auto& r : rows) {
    csv << r.dim << ',' << g17(r.mean) << ',' << g17(r.std) << '\n';
    j["rows"].push_back({{"dim", r.dim},
                         {"mean", r.mean},
                         {"std", r.std},
                         {"accuracies", r.accuracies},
                         {"split_hashes", r.split_hashes}});
    std::snprintf(line, sizeof line, "%6lld  %s\n", static_cast<long long>(r.dim),
                  format_mean_std(r.mean, r.std).c_str());
    txt << line;
  }
  write_text_file(dir / "sweep.csv", csv.str());
  write_text_file(dir / "sweep.json", j.dump(2) + "\n");
  write_text_file(dir / "sweep.txt", txt.str());
}

void emit_init_study(const std::vector<InitStudyRow>& rows, const std::filesystem::path& dir) {
  ensure_dir(dir);
  std::ostringstream csv;
  csv << "dim,init_seed,final_error,mean_accuracy\n";
  for (const auto& r : rows) {
    csv << r.dim << ',' << r.init_seed << ',' << g17(r.final_error) << ',' << g17(r.mean_accuracy)
        << '\n';
  }
  std::ostringstream txt;
  char line[128];
  std::snprintf(line, sizeof line, "%6s %16s %14s %14s\n", "dim", "mean error", "mean acc (%)",
                "spread (pts)");
  txt << line;
  for (const auto& s : summarize_init_study(rows)) {
    std::snprintf(line, sizeof line, "%6lld %16.6g %14.2f %14.2f\n", static_cast<long long>(s.dim),
                  s.mean_error, s.mean_accuracy, s.accuracy_spread);
    txt << line;
  }
  write_text_file(dir / "init_study.csv", csv.str());
  write_text_file(dir / "init_study.txt", txt.str());
}

}  // namespace fsl
