#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "qcut/classifier.hpp"
#include "qcut/data.hpp"

namespace qcut {

/// Everything needed to reuse a trained model: architecture, input
/// preprocessing, weights, optimizer state, and the split it was trained on.
struct ModelFile {
  ModelConfig config;
  Scaler scaler;
  Weights weights;
  OptimizerState optimizer;
  std::vector<double> loss_history;
  std::uint64_t seed = 0;        // training seed
  std::uint64_t split_seed = 0;
  double test_fraction = 0.25;
};

inline nlohmann::ordered_json model_to_json(const ModelFile& m) {
  nlohmann::ordered_json j;
  j["schema_version"] = kResultsSchemaVersion;
  j["kind"] = "model";
  j["config"] = {{"n_qubits", m.config.n_qubits},
                 {"n_classes", m.config.n_classes},
                 {"layers", m.config.layers},
                 {"depth", m.config.depth},
                 {"head", std::string(head_name(m.config.head))},
                 {"partition_a", m.config.partition_a},
                 {"encode_first", m.config.encode_first}};
  j["scaler"] = {{"minmax", m.scaler.minmax}, {"lo", m.scaler.lo}, {"hi", m.scaler.hi}};
  j["weights"] = m.weights;
  j["optimizer"] = {{"accumulators", m.optimizer.accumulators},
                    {"iteration", m.optimizer.iteration},
                    {"mask", m.optimizer.mask}};
  j["loss_history"] = m.loss_history;
  j["seed"] = m.seed;
  j["split"] = {{"seed", m.split_seed}, {"test_fraction", m.test_fraction}};
  return j;
}

inline ModelFile model_from_json(const nlohmann::ordered_json& j) {
  try {
    if (!j.contains("schema_version")) throw Error(ErrorCode::ParseError, "missing schema_version");
    ModelFile m;
    const auto& c = j.at("config");
    m.config.n_qubits = c.at("n_qubits").get<int>();
    m.config.n_classes = c.at("n_classes").get<int>();
    m.config.layers = c.at("layers").get<int>();
    m.config.depth = c.at("depth").get<int>();
    m.config.head = head_from_name(c.at("head").get<std::string>());
    m.config.partition_a = c.at("partition_a").get<std::vector<int>>();
    m.config.encode_first = c.at("encode_first").get<bool>();
    m.config.check();
    const auto& s = j.at("scaler");
    m.scaler.minmax = s.at("minmax").get<bool>();
    m.scaler.lo = s.at("lo").get<std::vector<double>>();
    m.scaler.hi = s.at("hi").get<std::vector<double>>();
    m.weights = j.at("weights").get<Weights>();
    if (m.weights.size() != m.config.parameter_count()) throw Error(ErrorCode::DimMismatch, "weight count mismatch");
    const auto& o = j.at("optimizer");
    m.optimizer.accumulators = o.at("accumulators").get<std::vector<double>>();
    m.optimizer.iteration = o.at("iteration").get<std::size_t>();
    m.optimizer.mask = o.at("mask").get<std::vector<bool>>();
    m.loss_history = j.at("loss_history").get<std::vector<double>>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.split_seed = j.at("split").at("seed").get<std::uint64_t>();
    m.test_fraction = j.at("split").at("test_fraction").get<double>();
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("model file: ") + e.what());
  }
}

inline void save_model(const std::string& path, const ModelFile& m) { persist_results(path, model_to_json(m)); }

inline ModelFile load_model(const std::string& path) { return model_from_json(load_results(path)); }

}  // namespace qcut
