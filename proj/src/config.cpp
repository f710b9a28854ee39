#include <fstream>

#include "crossrec/config.hpp"

namespace crossrec {

using nlohmann::json;

namespace {

void read_generator(GeneratorConfig& g, const json& j) {
  g.num_users = j.value("num_users", g.num_users);
  g.num_items = j.value("num_items", g.num_items);
  g.num_topics = j.value("num_topics", g.num_topics);
  g.vocab_size = j.value("vocab_size", g.vocab_size);
  g.tokens_per_item = j.value("tokens_per_item", g.tokens_per_item);
  g.topic_pool_size = j.value("topic_pool_size", g.topic_pool_size);
  g.visual_dim = j.value("visual_dim", g.visual_dim);
  g.rho = j.value("rho", g.rho);
  g.min_topics_per_user = j.value("min_topics_per_user", g.min_topics_per_user);
  g.max_topics_per_user = j.value("max_topics_per_user", g.max_topics_per_user);
  g.rate_homefeed = j.value("rate_homefeed", g.rate_homefeed);
  g.rate_search = j.value("rate_search", g.rate_search);
  g.rate_ads = j.value("rate_ads", g.rate_ads);
  g.dominant_weight = j.value("dominant_weight", g.dominant_weight);
  g.emerging_weight = j.value("emerging_weight", g.emerging_weight);
  g.emerging_frac = j.value("emerging_frac", g.emerging_frac);
  g.base_time = j.value("base_time", g.base_time);
  g.horizon_s = j.value("horizon_s", g.horizon_s);
}

json write_generator(const GeneratorConfig& g) {
  return json{{"num_users", g.num_users},
              {"num_items", g.num_items},
              {"num_topics", g.num_topics},
              {"vocab_size", g.vocab_size},
              {"tokens_per_item", g.tokens_per_item},
              {"topic_pool_size", g.topic_pool_size},
              {"visual_dim", g.visual_dim},
              {"rho", g.rho},
              {"min_topics_per_user", g.min_topics_per_user},
              {"max_topics_per_user", g.max_topics_per_user},
              {"rate_homefeed", g.rate_homefeed},
              {"rate_search", g.rate_search},
              {"rate_ads", g.rate_ads},
              {"dominant_weight", g.dominant_weight},
              {"emerging_weight", g.emerging_weight},
              {"emerging_frac", g.emerging_frac},
              {"base_time", g.base_time},
              {"horizon_s", g.horizon_s}};
}

void read_train(TrainConfig& t, const json& j) {
  t.epochs = j.value("epochs", t.epochs);
  t.batch_size = j.value("batch_size", t.batch_size);
  t.negatives = j.value("negatives", t.negatives);
  t.lr = j.value("lr", t.lr);
  t.lambda_w = j.value("lambda_w", t.lambda_w);
  t.seed = j.value("seed", t.seed);
  t.detach_sequence_items =
      j.value("detach_sequence_items", t.detach_sequence_items);
  t.max_users = j.value("max_users", t.max_users);
  t.stats_path = j.value("stats_path", t.stats_path);
}

json write_train(const TrainConfig& t) {
  return json{{"epochs", t.epochs},
              {"batch_size", t.batch_size},
              {"negatives", t.negatives},
              {"lr", t.lr},
              {"lambda_w", t.lambda_w},
              {"seed", t.seed},
              {"detach_sequence_items", t.detach_sequence_items},
              {"max_users", t.max_users},
              {"stats_path", t.stats_path}};
}

void read_eval(EvalOptions& e, const json& j) {
  if (j.contains("ks")) e.ks = j["ks"].get<std::vector<std::size_t>>();
  e.pool_size = j.value("pool_size", e.pool_size);
  e.seed = j.value("seed", e.seed);
  e.max_users = j.value("max_users", e.max_users);
  if (j.contains("input_scenarios")) {
    e.input_scenarios = {false, false, false};
    for (const auto& name : j["input_scenarios"]) {
      auto s = scenario_from_name(name.get<std::string>());
      if (!s)
        throw ConfigError("eval: unknown scenario " + name.get<std::string>());
      e.input_scenarios[(std::size_t)*s] = true;
    }
  }
  if (j.contains("target_scenario") && !j["target_scenario"].is_null()) {
    auto s = scenario_from_name(j["target_scenario"].get<std::string>());
    if (!s)
      throw ConfigError("eval: unknown scenario " +
                        j["target_scenario"].get<std::string>());
    e.target_scenario = s;
  }
}

json write_eval(const EvalOptions& e) {
  json inputs = json::array();
  for (std::size_t s = 0; s < kNumScenarios; ++s)
    if (e.input_scenarios[s]) inputs.push_back(scenario_name((Scenario)s));
  json out{{"ks", e.ks},
           {"pool_size", e.pool_size},
           {"seed", e.seed},
           {"max_users", e.max_users},
           {"input_scenarios", inputs}};
  out["target_scenario"] =
      e.target_scenario ? json(scenario_name(*e.target_scenario)) : json();
  return out;
}

}  // namespace

AppConfig app_config_from_json(const json& j) {
  AppConfig c;
  if (j.contains("generator")) read_generator(c.generator, j["generator"]);
  if (j.contains("model")) c.model = model_config_from_json(j["model"]);
  if (j.contains("train")) read_train(c.train, j["train"]);
  if (j.contains("eval")) read_eval(c.eval, j["eval"]);
  return c;
}

json app_config_to_json(const AppConfig& c) {
  return json{{"generator", write_generator(c.generator)},
              {"model", model_config_to_json(c.model)},
              {"train", write_train(c.train)},
              {"eval", write_eval(c.eval)}};
}

AppConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("config: cannot open " + path);
  json j;
  try {
    j = json::parse(is);
  } catch (const json::exception& e) {
    throw ConfigError("config: " + path + ": " + e.what());
  }
  try {
    return app_config_from_json(j);
  } catch (const json::exception& e) {
    throw ConfigError("config: " + path + ": " + e.what());
  }
}

}  // namespace crossrec
