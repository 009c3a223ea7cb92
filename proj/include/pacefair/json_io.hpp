#pragma once

// JSON forms of the data model:
//   market    {"n":2,"m":3,"valuations":[[...],[...]],"budgets":[...]}
//   model     {"kind":"markov","base":[...],"transition":[[...]],"seed":7}
//   sequence  {"m":3,"items":[0,2,1]}
//   solution  {"beta":[...],"objective":...,"residual":...}
// Matrices are row-major arrays of rows.

#include "pacefair/eg_solver.hpp"
#include "pacefair/input_models.hpp"
#include "pacefair/market.hpp"

#include <json.hpp>

#include <filesystem>

namespace pacefair {

using Json = nlohmann::json;

Json vector_to_json(const Vector& v);
Vector vector_from_json(const Json& j);
Json matrix_to_json(const Matrix& mat);
Matrix matrix_from_json(const Json& j);

Json market_to_json(const MarketInstance& instance);
/// Throws ConfigError on missing fields or shape errors.
MarketInstance market_from_json(const Json& j);

Json model_to_json(const InputModel& model);
InputModel model_from_json(const Json& j);

Json sequence_to_json(const ItemSequence& seq, Index m);
ItemSequence sequence_from_json(const Json& j);

Json solution_to_json(const DualSolution& sol);
DualSolution solution_from_json(const Json& j);

/// Throws ConfigError if the file is missing or is not valid JSON.
Json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const Json& j);

}  // namespace pacefair
