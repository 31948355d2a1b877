#include "fsl/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <optional>
#include <ostream>
#include <sstream>

#include "fsl/dataset.hpp"
#include "fsl/factorization.hpp"
#include "fsl/harness.hpp"
#include "fsl/serialize.hpp"
#include "fsl/subspaces.hpp"

namespace fsl::cli {

namespace {

namespace fs = std::filesystem;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string config;
  std::string out;
  std::vector<std::string> sets;
  std::optional<std::uint64_t> seed;
  std::string method;
  std::string dims;
  std::string model;
  std::string input;
  Index inits = 20;
};

bool known_override(const std::vector<std::string>& path) {
  static const std::vector<std::string> top = {
      "dataset_path", "train_per_class", "test_per_class", "repetitions", "methods",
      "lda_delta",    "base_seed",       "svd_center"};
  static const std::vector<std::string> methods = {"svd", "lda", "fs_binary", "nmf", "snmf"};
  static const std::vector<std::string> factorization = {"iters", "lambda_reg", "rho", "epsilon"};
  auto in = [](const std::vector<std::string>& v, const std::string& s) {
    return std::find(v.begin(), v.end(), s) != v.end();
  };
  if (path.size() == 1) return in(top, path[0]);
  if (path.size() != 2) return false;
  if (path[0] == "dims") return in(methods, path[1]);
  if (path[0] == "knn") return path[1] == "k_values";
  if (path[0] == "factorization") return in(factorization, path[1]);
  return false;
}

void apply_override(json& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw UsageError("--set expects key=value, got '" + assignment + "'");
  }
  const std::string key = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  std::vector<std::string> path;
  std::stringstream ss(key);
  for (std::string part; std::getline(ss, part, '.');) path.push_back(part);
  if (!known_override(path)) throw UsageError("--set: unknown config key '" + key + "'");

  json value = json::parse(raw, nullptr, false);
  if (value.is_discarded()) value = raw;
  json* node = &cfg;
  for (std::size_t i = 0; i + 1 < path.size(); ++i) {
    json& child = (*node)[path[i]];
    if (child.is_null()) child = json::object();
    node = &child;
  }
  (*node)[path.back()] = std::move(value);
}

ExperimentConfig load_config(const Options& o) {
  json j = read_json_file(o.config);
  for (const auto& s : o.sets) apply_override(j, s);
  ExperimentConfig cfg = config_from_json(j);
  if (o.seed) cfg.base_seed = *o.seed;
  fs::path data(cfg.dataset_path);
  if (cfg.dataset_path.empty()) throw_invalid("config has no dataset_path");
  if (data.is_relative()) cfg.dataset_path = (fs::path(o.config).parent_path() / data).string();
  return cfg;
}

std::vector<Index> parse_dims(const std::string& csv) {
  std::vector<Index> dims;
  std::stringstream ss(csv);
  for (std::string item; std::getline(ss, item, ',');) {
    try {
      std::size_t used = 0;
      const long long v = std::stoll(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
      dims.push_back(static_cast<Index>(v));
    } catch (const std::exception&) {
      throw UsageError("--dims expects a comma-separated list of integers, got '" + csv + "'");
    }
  }
  if (dims.empty()) throw UsageError("--dims is empty");
  return dims;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw Error(ErrorCode::IoError, "cannot create " + dir.string());
}

int run_split(const Options& o, std::ostream& out) {
  const ExperimentConfig cfg = load_config(o);
  const LabeledDataset data = load_feature_csv(cfg.dataset_path);
  const Split split =
      split_per_class(data, {cfg.train_per_class, cfg.test_per_class, cfg.split_seed(0)});
  ensure_dir(o.out);
  write_feature_csv(split.train, fs::path(o.out) / "train.csv");
  write_feature_csv(split.test, fs::path(o.out) / "test.csv");
  json meta = {{"seed", cfg.split_seed(0)},
               {"train_rows", split.train_rows},
               {"test_rows", split.test_rows},
               {"split_hash", split_hash(split)}};
  write_text_file(fs::path(o.out) / "split.json", meta.dump(2) + "\n");
  out << "split: " << split.train.size() << " train rows, " << split.test.size()
      << " test rows -> " << o.out << '\n';
  return kExitOk;
}

int run_fit(const Options& o, std::ostream& out) {
  const ExperimentConfig cfg = load_config(o);
  const Method method = method_from_name(o.method);
  const LabeledDataset data = load_feature_csv(cfg.dataset_path);
  Index dims = cfg.dims_for(method, data.class_count(), data.dims());
  if (!o.dims.empty()) {
    const auto list = parse_dims(o.dims);
    if (list.size() != 1) throw UsageError("fit takes a single --dims value");
    dims = list.front();
  }
  const std::uint64_t seed = cfg.init_seed(0);
  const LdaConfig lda{cfg.lda_delta, dims};
  const auto& f = cfg.factorization;
  ensure_dir(o.out);
  const fs::path model_path = fs::path(o.out) / "model.json";
  switch (method) {
    case Method::FeatureSpace:
      throw_invalid("feature_space has nothing to fit");
    case Method::Svd:
      save_model(fit_svd_subspace(data, dims, cfg.svd_center), model_path);
      break;
    case Method::Lda:
      if (dims != data.class_count() - 1) {
        throw_invalid("lda dimension is fixed at C-1 = " + std::to_string(data.class_count() - 1));
      }
      save_model(fit_lda_multiclass(compute_scatter(data), lda), model_path);
      break;
    case Method::FsBinary:
      save_model(fit_fs_binary(compute_scatter(data), dims, lda), model_path);
      break;
    case Method::Nmf: {
      const NmfModel m = nmf_fit(validate_nonnegative(data, true).data.features(), dims, f.iters, seed);
      save_model(m, model_path);
      write_trace_csv(m.error_trace, fs::path(o.out) / "trace.csv");
      break;
    }
    case Method::Snmf: {
      const SnmfModel m = snmf_fit(validate_nonnegative(data, true).data.features(), data.labels(),
                                   dims, f.lambda_reg, f.iters, seed, {f.rho, f.epsilon});
      save_model(m, model_path);
      write_trace_csv(m.loss_trace, fs::path(o.out) / "trace.csv");
      break;
    }
  }
  out << "fit: " << method_name(method) << " with " << dims << " dims -> " << model_path.string()
      << '\n';
  return kExitOk;
}

int run_transform(const Options& o, std::ostream& out) {
  const FittedModel model = load_model(o.model);
  const LabeledDataset data = load_feature_csv(o.input);
  MatrixXd projected;
  if (const auto* p = std::get_if<Projection>(&model)) {
    projected = project(*p, data.features());
  } else if (const auto* m = std::get_if<NmfModel>(&model)) {
    projected = nmf_transform(m->x, validate_nonnegative(data, true).data.features(), m->iterations,
                              o.seed.value_or(m->seed));
  } else {
    const auto& s = std::get<SnmfModel>(model);
    projected = nmf_transform(s.x, validate_nonnegative(data, true).data.features(), s.iterations,
                              o.seed.value_or(s.seed));
  }
  ensure_dir(o.out);
  const fs::path path = fs::path(o.out) / "projected.csv";
  write_feature_csv(data.with_features(std::move(projected)), path);
  out << "transform: " << data.size() << " rows -> " << path.string() << '\n';
  return kExitOk;
}

int run_evaluate(const Options& o, std::ostream& out) {
  const ExperimentReport report = run_experiment(load_config(o));
  emit_report(report, o.out);
  out << render_table(report);
  return kExitOk;
}

int run_sweep(const Options& o, std::ostream& out) {
  const ExperimentConfig cfg = load_config(o);
  const Method method = method_from_name(o.method);
  const auto rows = dimension_sweep(cfg, method, parse_dims(o.dims));
  emit_sweep(rows, method, o.out);
  for (const auto& r : rows) out << r.dim << ' ' << format_mean_std(r.mean, r.std) << '\n';
  return kExitOk;
}

int run_init_study(const Options& o, std::ostream& out) {
  const ExperimentConfig cfg = load_config(o);
  const auto rows = nmf_init_study(cfg, parse_dims(o.dims), o.inits);
  emit_init_study(rows, o.out);
  char line[128];
  for (const auto& s : summarize_init_study(rows)) {
    std::snprintf(line, sizeof line, "%lld error %.6g accuracy %.2f spread %.2f\n",
                  static_cast<long long>(s.dim), s.mean_error, s.mean_accuracy, s.accuracy_spread);
    out << line;
  }
  return kExitOk;
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Subspace feature representations and few-shot evaluation", "fsl"};
  app.require_subcommand(1);
  Options o;

  auto add_config = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--set", o.sets, "Override a config key, key=value (repeatable)");
    sub->add_option("--seed", o.seed, "Override base_seed");
  };
  auto add_out = [&](CLI::App* sub) {
    sub->add_option("--out", o.out, "Output directory")->required();
  };

  CLI::App* split = app.add_subcommand("split", "Write the train/test split of repetition 0");
  add_config(split);
  add_out(split);

  CLI::App* fit = app.add_subcommand("fit", "Fit one subspace or factorization on the whole dataset");
  add_config(fit);
  add_out(fit);
  fit->add_option("--method", o.method, "svd, lda, fs_binary, nmf or snmf")->required();
  fit->add_option("--dims", o.dims, "Subspace dimension (defaults from config)");

  CLI::App* transform = app.add_subcommand("transform", "Project a feature CSV with a fitted model");
  transform->add_option("--model", o.model, "model.json written by fit")->required()->check(CLI::ExistingFile);
  transform->add_option("--input", o.input, "Feature CSV to project")->required();
  transform->add_option("--seed", o.seed, "Initialization seed for factorization models");
  add_out(transform);

  CLI::App* evaluate = app.add_subcommand("evaluate", "Run the repeated-split experiment");
  add_config(evaluate);
  add_out(evaluate);

  CLI::App* sweep = app.add_subcommand("sweep", "Accuracy of one method across subspace dimensions");
  add_config(sweep);
  add_out(sweep);
  sweep->add_option("--method", o.method, "svd, fs_binary, nmf or snmf")->required();
  sweep->add_option("--dims", o.dims, "Comma-separated dimensions")->required();

  CLI::App* init = app.add_subcommand("init-study", "NMF reconstruction/accuracy over random inits");
  add_config(init);
  add_out(init);
  init->add_option("--dims", o.dims, "Comma-separated dimensions")->required();
  init->add_option("--inits", o.inits, "Initializations per dimension")->check(CLI::PositiveNumber);

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "fsl: error[usage]: " << e.what() << '\n';
    const CLI::App* shown = &app;
    for (const CLI::App* sub : app.get_subcommands()) shown = sub;
    err << shown->help();
    return kExitUsage;
  }

  try {
    if (app.got_subcommand(split)) return run_split(o, out);
    if (app.got_subcommand(fit)) return run_fit(o, out);
    if (app.got_subcommand(transform)) return run_transform(o, out);
    if (app.got_subcommand(evaluate)) return run_evaluate(o, out);
    if (app.got_subcommand(sweep)) return run_sweep(o, out);
    if (app.got_subcommand(init)) return run_init_study(o, out);
  } catch (const UsageError& e) {
    err << "fsl: error[usage]: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    err << "fsl: error[" << to_string(e.code()) << "]: " << e.what() << '\n';
    return is_numerical(e.code()) ? kExitNumerical : kExitData;
  }
  err << "fsl: error[usage]: no subcommand\n" << app.help();
  return kExitUsage;
}

}  // namespace fsl::cli
