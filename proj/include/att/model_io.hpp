#ifndef ATT_MODEL_IO_HPP_
#define ATT_MODEL_IO_HPP_

#include <string>

#include <json.hpp>

#include "att/factor_model.hpp"

namespace att {

/// A model together with the regularization it was trained under.
struct ModelDocument {
  FactorModel model;
  HyperParams hp;
};

// Fields: n_nodes, n_slots, rank, window, S, U, Z (flat row-major), a, c, e,
// W_band (admissible strictly-lower weights, row-major by k then l), lambda,
// lambda_b.
nlohmann::json model_to_json(const FactorModel& model, const HyperParams& hp);
// Validates the parsed model; throws DataError on any schema violation.
ModelDocument model_from_json(const nlohmann::json& doc);

void save_model(const std::string& path, const FactorModel& model,
                const HyperParams& hp);
ModelDocument load_model(const std::string& path);

// Pretty-printed JSON with a trailing newline.
void write_json_file(const std::string& path, const nlohmann::json& doc);
nlohmann::json read_json_file(const std::string& path);

}  // namespace att

#endif  // ATT_MODEL_IO_HPP_
