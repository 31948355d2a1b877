#include "fsl/serialize.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace fsl {

namespace {

const json& field(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) {
    throw Error(ErrorCode::FormatError, std::string("model document is missing '") + key + "'");
  }
  return j.at(key);
}

template <typename T>
T get_as(const json& j, const char* key) {
  try {
    return field(j, key).get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::FormatError, std::string("field '") + key + "': " + e.what());
  }
}

}  // namespace

json matrix_to_json(const MatrixXd& m) {
  json out = json::array();
  for (Index r = 0; r < m.rows(); ++r)
    for (Index c = 0; c < m.cols(); ++c) out.push_back(m(r, c));
  return out;
}

MatrixXd matrix_from_json(const json& j, Index rows, Index cols, const char* name) {
  std::vector<double> flat;
  try {
    flat = j.get<std::vector<double>>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::FormatError, std::string("field '") + name + "': " + e.what());
  }
  if (rows < 0 || cols < 0 || static_cast<Index>(flat.size()) != rows * cols) {
    throw Error(ErrorCode::FormatError, std::string("field '") + name + "' has " +
                                            std::to_string(flat.size()) + " entries, expected " +
                                            std::to_string(rows * cols));
  }
  MatrixXd m(rows, cols);
  for (Index r = 0; r < rows; ++r)
    for (Index c = 0; c < cols; ++c) m(r, c) = flat[static_cast<std::size_t>(r * cols + c)];
  return m;
}

json vector_to_json(const VectorXd& v) {
  return json(std::vector<double>(v.data(), v.data() + v.size()));
}

VectorXd vector_from_json(const json& j, const char* name) {
  std::vector<double> flat;
  try {
    flat = j.get<std::vector<double>>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::FormatError, std::string("field '") + name + "': " + e.what());
  }
  return Eigen::Map<const VectorXd>(flat.data(), static_cast<Index>(flat.size()));
}

json to_json(const Projection& p) {
  json j;
  j["kind"] = "projection";
  j["method"] = std::string(to_string(p.method));
  j["source_dims"] = p.source_dims();
  j["dims"] = p.dims();
  j["directions"] = matrix_to_json(p.directions);
  j["discrim_values"] = vector_to_json(p.discrim_values);
  j["singular_values"] = vector_to_json(p.singular_values);
  j["center"] = p.center ? vector_to_json(*p.center) : json(nullptr);
  j["regularization"] = p.regularization;
  return j;
}

Projection projection_from_json(const json& j) {
  Projection p;
  p.method = projection_method_from_string(get_as<std::string>(j, "method"));
  const auto m = get_as<Index>(j, "source_dims");
  const auto l = get_as<Index>(j, "dims");
  p.directions = matrix_from_json(field(j, "directions"), m, l, "directions");
  p.discrim_values = vector_from_json(field(j, "discrim_values"), "discrim_values");
  p.singular_values = vector_from_json(field(j, "singular_values"), "singular_values");
  if (j.contains("center") && !j.at("center").is_null()) {
    p.center = vector_from_json(j.at("center"), "center");
    if (p.center->size() != m) throw Error(ErrorCode::FormatError, "center has wrong length");
  }
  p.regularization = get_as<double>(j, "regularization");
  return p;
}

json to_json(const NmfModel& m) {
  json j;
  j["kind"] = "nmf";
  j["rank"] = m.rank;
  j["seed"] = m.seed;
  j["iterations"] = m.iterations;
  j["rows"] = m.k.rows();
  j["cols"] = m.x.cols();
  j["k"] = matrix_to_json(m.k);
  j["x"] = matrix_to_json(m.x);
  j["final_error"] = m.final_error();
  return j;
}

NmfModel nmf_model_from_json(const json& j) {
  NmfModel m;
  m.rank = get_as<Index>(j, "rank");
  m.seed = get_as<std::uint64_t>(j, "seed");
  m.iterations = get_as<Index>(j, "iterations");
  const auto rows = get_as<Index>(j, "rows");
  const auto cols = get_as<Index>(j, "cols");
  m.k = matrix_from_json(field(j, "k"), rows, m.rank, "k");
  m.x = matrix_from_json(field(j, "x"), m.rank, cols, "x");
  m.error_trace = {get_as<double>(j, "final_error")};
  return m;
}

json to_json(const SnmfModel& m) {
  json j;
  j["kind"] = "snmf";
  j["rank"] = m.rank;
  j["seed"] = m.seed;
  j["iterations"] = m.iterations;
  j["rows"] = m.k.rows();
  j["cols"] = m.x.cols();
  j["k"] = matrix_to_json(m.k);
  j["x"] = matrix_to_json(m.x);
  j["logit_coefficients"] = vector_to_json(m.logit_coefficients);
  j["lambda_reg"] = m.lambda_reg;
  j["rho"] = m.adadelta.rho;
  j["epsilon"] = m.adadelta.epsilon;
  j["final_error"] = m.final_error();
  j["final_loss"] = m.loss_trace.empty() ? 0.0 : m.loss_trace.back();
  return j;
}

SnmfModel snmf_model_from_json(const json& j) {
  SnmfModel m;
  m.rank = get_as<Index>(j, "rank");
  m.seed = get_as<std::uint64_t>(j, "seed");
  m.iterations = get_as<Index>(j, "iterations");
  const auto rows = get_as<Index>(j, "rows");
  const auto cols = get_as<Index>(j, "cols");
  m.k = matrix_from_json(field(j, "k"), rows, m.rank, "k");
  m.x = matrix_from_json(field(j, "x"), m.rank, cols, "x");
  m.logit_coefficients = vector_from_json(field(j, "logit_coefficients"), "logit_coefficients");
  if (m.logit_coefficients.size() != m.rank + 1) {
    throw Error(ErrorCode::FormatError, "logit_coefficients must have rank + 1 entries");
  }
  m.lambda_reg = get_as<double>(j, "lambda_reg");
  m.adadelta.rho = get_as<double>(j, "rho");
  m.adadelta.epsilon = get_as<double>(j, "epsilon");
  const double err = get_as<double>(j, "final_error");
  m.reconstruction_trace = {0.5 * err * err};
  m.loss_trace = {get_as<double>(j, "final_loss")};
  return m;
}

void save_model(const FittedModel& model, const std::filesystem::path& path) {
  const json j = std::visit([](const auto& m) { return to_json(m); }, model);
  write_text_file(path, j.dump(2) + "\n");
}

FittedModel load_model(const std::filesystem::path& path) {
  const json j = read_json_file(path);
  const auto kind = get_as<std::string>(j, "kind");
  if (kind == "projection") return projection_from_json(j);
  if (kind == "nmf") return nmf_model_from_json(j);
  if (kind == "snmf") return snmf_model_from_json(j);
  throw Error(ErrorCode::FormatError, "unknown model kind '" + kind + "'");
}

void write_trace_csv(const std::vector<double>& trace, const std::filesystem::path& path) {
  std::ostringstream os;
  os << "iteration,error\n";
  char buf[40];
  for (std::size_t i = 0; i < trace.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", trace[i]);
    os << (i + 1) << ',' << buf << '\n';
  }
  write_text_file(path, os.str());
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::FormatError, path.string() + ": " + e.what());
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << text;
  out.flush();
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

}  // namespace fsl
