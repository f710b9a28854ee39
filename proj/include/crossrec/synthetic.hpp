// Topic-structured synthetic data: an item catalog with token/visual
// features and cross-scenario behavior logs whose scenario imbalance
// (homefeed >> search >> ads) and interest correlation are configurable.
#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "crossrec/events.hpp"

namespace crossrec {

struct GeneratorConfig {
  std::size_t num_users = 5000;
  std::size_t num_items = 20000;
  std::size_t num_topics = 50;
  std::size_t vocab_size = 50000;
  std::size_t tokens_per_item = 8;
  std::size_t topic_pool_size = 40;  // distinct tokens per topic word pool
  std::size_t visual_dim = 64;
  // probability that a user's topic set is shared across scenarios
  double rho = 1.0;
  std::size_t min_topics_per_user = 1;  // each user draws min..max topics
  std::size_t max_topics_per_user = 3;
  // mean events per user, per scenario
  double rate_homefeed = 90.0;
  double rate_search = 25.0;
  double rate_ads = 12.0;
  // mass of each scenario's preferred topic within the user topic mixture
  double dominant_weight = 0.8;
  // Multi-topic users have an "emerging" interest: the last topic of their
  // set. Homefeed's steady mixture leaves it out entirely; search covers
  // the full topic set uniformly. In the final emerging_frac of the
  // horizon, homefeed adopts the emerging topic with a per-event
  // probability that ramps linearly from 0 up to emerging_weight, so
  // search history anticipates late homefeed behavior.
  double emerging_weight = 0.9;
  double emerging_frac = 0.25;
  std::int64_t base_time = 1756000000;   // newest possible event timestamp
  std::int64_t horizon_s = 30 * 86400;   // events span [base-horizon, base)
};

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& m) : std::runtime_error(m) {}
};

struct CatalogItem {
  std::string item_id;
  std::vector<std::size_t> tokens;
  std::vector<double> visual;  // empty = absent
  std::size_t topic = 0;
};

struct Catalog {
  std::vector<CatalogItem> items;
  std::unordered_map<std::string, std::size_t> by_id;
  std::vector<std::vector<std::size_t>> by_topic;

  const CatalogItem* find(const std::string& id) const {
    auto it = by_id.find(id);
    return it == by_id.end() ? nullptr : &items[it->second];
  }
  std::vector<std::string> ids() const;
  void rebuild_index();
};

struct SyntheticData {
  Catalog catalog;
  std::vector<UserHistory> users;
};

SyntheticData generate_synthetic(const GeneratorConfig& cfg, std::uint64_t seed);

// Sidecar catalog file: one item per line,
// {"item_id": ..., "tokens": [...], "visual": [...], "topic": ...}
void write_catalog(std::ostream& out, const Catalog& c);
Catalog read_catalog(std::istream& in);

}  // namespace crossrec
