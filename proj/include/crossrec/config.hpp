// Application config: one JSON file with "generator", "model", "train" and
// "eval" sections, each optional, overriding the built-in defaults.
#pragma once

#include "crossrec/eval.hpp"

namespace crossrec {

struct AppConfig {
  GeneratorConfig generator;
  ModelConfig model;
  TrainConfig train;
  EvalOptions eval;
};

AppConfig app_config_from_json(const nlohmann::json& j);
nlohmann::json app_config_to_json(const AppConfig& c);

// Throws ConfigError for unreadable or invalid files.
AppConfig load_config(const std::string& path);

}  // namespace crossrec
