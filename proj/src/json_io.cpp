#include "pacefair/json_io.hpp"

#include "pacefair/errors.hpp"

#include <fstream>

namespace pacefair {

namespace {

template <typename Fn>
auto wrap(const char* what, Fn&& fn) {
  try {
    return fn();
  } catch (const ConfigError&) {
    throw;
  } catch (const Json::exception& e) {
    throw ConfigError(std::string(what) + ": " + e.what());
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string(what) + ": " + e.what());
  }
}

CorruptionKind parse_corruption_kind(const std::string& name) {
  if (name == "decaying") return CorruptionKind::decaying;
  if (name == "budgeted") return CorruptionKind::budgeted;
  throw ConfigError("unknown corruption schedule '" + name + "'");
}

}  // namespace

Json vector_to_json(const Vector& v) {
  Json out = Json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Vector vector_from_json(const Json& j) {
  if (!j.is_array()) throw ConfigError("expected a JSON array of numbers");
  Vector v(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Index>(i)) = j[i].get<double>();
  return v;
}

Json matrix_to_json(const Matrix& mat) {
  Json out = Json::array();
  for (Index r = 0; r < mat.rows(); ++r) out.push_back(vector_to_json(mat.row(r).transpose()));
  return out;
}

Matrix matrix_from_json(const Json& j) {
  if (!j.is_array() || j.empty()) throw ConfigError("expected a nonempty array of rows");
  const std::size_t cols = j[0].size();
  Matrix mat(static_cast<Index>(j.size()), static_cast<Index>(cols));
  for (std::size_t r = 0; r < j.size(); ++r) {
    if (!j[r].is_array() || j[r].size() != cols) throw ConfigError("ragged matrix rows");
    mat.row(static_cast<Index>(r)) = vector_from_json(j[r]).transpose();
  }
  return mat;
}

Json market_to_json(const MarketInstance& instance) {
  return Json{{"n", instance.n()},
              {"m", instance.m()},
              {"valuations", matrix_to_json(instance.valuations())},
              {"budgets", vector_to_json(instance.budgets())}};
}

MarketInstance market_from_json(const Json& j) {
  return wrap("market", [&] {
    Matrix valuations = matrix_from_json(j.at("valuations"));
    if (j.contains("n") && j.at("n").get<Index>() != valuations.rows()) {
      throw ConfigError("market: n does not match valuation rows");
    }
    if (j.contains("m") && j.at("m").get<Index>() != valuations.cols()) {
      throw ConfigError("market: m does not match valuation columns");
    }
    if (j.contains("budgets")) return MarketInstance(std::move(valuations), vector_from_json(j.at("budgets")));
    return MarketInstance(std::move(valuations));
  });
}

Json model_to_json(const InputModel& model) {
  Json out{{"kind", std::string(to_string(model.kind()))}, {"seed", model.seed()}};
  switch (model.kind()) {
    case ModelKind::iid:
      out["base"] = vector_to_json(model.base().probs());
      break;
    case ModelKind::corrupted:
      out["base"] = vector_to_json(model.base().probs());
      out["schedule"] =
          model.schedule().kind == CorruptionKind::budgeted ? "budgeted" : "decaying";
      out["amount"] = model.schedule().amount;
      break;
    case ModelKind::markov:
      out["base"] = vector_to_json(model.base().probs());
      out["transition"] = matrix_to_json(model.transition());
      break;
    case ModelKind::periodic:
      out["period_dists"] = matrix_to_json(model.period_dists());
      break;
  }
  return out;
}

InputModel model_from_json(const Json& j) {
  return wrap("input model", [&] {
    const ModelKind kind = parse_model_kind(j.at("kind").get<std::string>());
    const auto seed = j.value("seed", std::uint64_t{0});
    switch (kind) {
      case ModelKind::iid:
        return InputModel::iid(ReferenceDistribution(vector_from_json(j.at("base"))), seed);
      case ModelKind::corrupted: {
        CorruptionSchedule schedule{parse_corruption_kind(j.value("schedule", std::string("decaying"))),
                                    j.at("amount").get<double>()};
        return InputModel::corrupted(ReferenceDistribution(vector_from_json(j.at("base"))),
                                     schedule, seed);
      }
      case ModelKind::markov:
        return InputModel::markov(ReferenceDistribution(vector_from_json(j.at("base"))),
                                  matrix_from_json(j.at("transition")), seed);
      case ModelKind::periodic:
        return InputModel::periodic(matrix_from_json(j.at("period_dists")), seed);
    }
    throw ConfigError("unknown model kind");
  });
}

Json sequence_to_json(const ItemSequence& seq, Index m) {
  return Json{{"m", m}, {"t", seq.horizon()}, {"items", seq.items}};
}

ItemSequence sequence_from_json(const Json& j) {
  return wrap("sequence", [&] {
    ItemSequence seq{j.at("items").get<std::vector<std::int32_t>>()};
    if (j.contains("m")) seq.validate(j.at("m").get<Index>());
    return seq;
  });
}

Json solution_to_json(const DualSolution& sol) {
  return Json{{"beta", vector_to_json(sol.beta_hat)},
              {"objective", sol.objective},
              {"residual", sol.residual},
              {"iterations", sol.iterations},
              {"converged", sol.converged}};
}

DualSolution solution_from_json(const Json& j) {
  return wrap("solution", [&] {
    DualSolution sol;
    sol.beta_hat = vector_from_json(j.at("beta"));
    sol.objective = j.at("objective").get<double>();
    sol.residual = j.at("residual").get<double>();
    sol.iterations = j.value("iterations", std::int64_t{0});
    sol.converged = j.value("converged", true);
    return sol;
  });
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

void write_json_file(const std::filesystem::path& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

}  // namespace pacefair
