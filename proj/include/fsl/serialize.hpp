#ifndef FSL_SERIALIZE_HPP
#define FSL_SERIALIZE_HPP

#include <filesystem>
#include <variant>
#include <vector>

#include <json.hpp>

#include "fsl/factorization.hpp"
#include "fsl/subspaces.hpp"

namespace fsl {

using json = nlohmann::json;

// Doubles are written in shortest round-trip form, so every document here
// reloads bit-for-bit.

json matrix_to_json(const MatrixXd& m);  // row-major flat array
MatrixXd matrix_from_json(const json& j, Index rows, Index cols, const char* field);
json vector_to_json(const VectorXd& v);
VectorXd vector_from_json(const json& j, const char* field);

json to_json(const Projection& p);
Projection projection_from_json(const json& j);

json to_json(const NmfModel& m);
NmfModel nmf_model_from_json(const json& j);

json to_json(const SnmfModel& m);
SnmfModel snmf_model_from_json(const json& j);

/// Anything the `fit` subcommand can write.
using FittedModel = std::variant<Projection, NmfModel, SnmfModel>;

void save_model(const FittedModel& model, const std::filesystem::path& path);
FittedModel load_model(const std::filesystem::path& path);

/// Two columns, `iteration,error`, 17 significant digits.
void write_trace_csv(const std::vector<double>& trace, const std::filesystem::path& path);

json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace fsl

#endif  // FSL_SERIALIZE_HPP
