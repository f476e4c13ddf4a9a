#pragma once

// Experiment configuration files (JSON).
//
//   {
//     "law": {"K": 1, "generator": "dirichlet", "alpha": [1, 1, 1],
//             "delta": 0, "relax_ellipticity": true},
//     "experiment": {"nList": [256, 1024], "sGrid": [0.5, 1], "rList": [0, 0.5],
//                    "theta": [1, 1], "replicas": 2000, "seed": 1},
//     "tolerances": {"truncEps": 1e-14, ...}
//   }
//
// A mixture law uses "generator": "mixture" with "rows" and "weights".

#include <string>

#include <json.hpp>

#include "rwre/cltlab.hpp"

namespace rwre {

/// Throws ConfigError on malformed input; law validation errors propagate.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config(const std::string& path);

nlohmann::json law_to_json(const EnvironmentLaw& law);
nlohmann::json config_to_json(const ExperimentConfig& cfg);
std::string serialize_config(const ExperimentConfig& cfg);

bool operator==(const ExperimentConfig& a, const ExperimentConfig& b);

}  // namespace rwre
