// Two-tower model: a compact transformer item encoder (tokens + optional
// visual vector -> unit embedding) and a transformer user encoder that
// appends K learnable interest queries to the fused event sequence.
#pragma once

#include <cstdint>
#include <unordered_map>

#include "crossrec/mixer.hpp"
#include "crossrec/params.hpp"
#include "crossrec/synthetic.hpp"
#include "json.hpp"

namespace crossrec {

struct ModelConfig {
  std::size_t d = 64;
  std::size_t heads = 4;
  std::size_t item_layers = 2;
  std::size_t user_layers = 2;
  std::size_t ffn_mult = 4;
  std::size_t vocab_size = 50000;
  std::size_t visual_dim = 64;  // 0 disables the visual path
  std::size_t last_n = 128;
  std::size_t window = 10;  // W: most recent events held out in training
  std::size_t queries_per_scenario = 3;
  bool frozen_item_tower = false;
  MixerConfig mixer;

  std::size_t interest_count() const {
    return queries_per_scenario * kNumScenarios;
  }
  void validate() const;
};

nlohmann::json model_config_to_json(const ModelConfig& c);
ModelConfig model_config_from_json(const nlohmann::json& j);

// K unit-norm interest vectors, one per learnable query.
struct InterestSet {
  Tensor vectors;  // [K x d]
  std::size_t count() const { return vectors.rows(); }
};

class Model {
 public:
  Model(ModelConfig cfg, std::uint64_t seed);

  const ModelConfig& config() const { return cfg_; }
  ParamStore& params() { return params_; }
  const ParamStore& params() const { return params_; }
  ad::Var temperature() const { return params_.get("tau"); }
  MixerTables mixer_tables() const;

  // --- item tower ---
  // [1 x d], unit norm; throws ShapeError for out-of-range token ids.
  ad::Var encode_item_var(const CatalogItem& item) const;
  Tensor encode_item(const CatalogItem& item) const;  // no-grad path

  // --- user tower ---
  // Returns the K query-output rows, L2-normalized ([K x d]).
  // training=true hides the last `window` events from the encoder input
  // (truncation by default; with_mask uses an additive -1e9 attention mask
  // over those rows instead, which is numerically identical at the query
  // outputs). Throws when training leaves no visible events.
  ad::Var encode_user_var(const MixedSequence& ms, const ad::Var& item_vecs,
                          bool training, bool with_mask = false) const;
  InterestSet encode_user(const MixedSequence& ms,
                          const Tensor& item_vecs) const;  // inference

  // Mean-pooled single user vector (diagnostic reduction of the K interests).
  static Tensor pooled_interest(const InterestSet& s);

  // max over interests of cos(interest, item); inputs unit-norm
  static double score_user_item(const InterestSet& s, const Tensor& item_vec);

  // Sequence-side item embeddings for a mixed sequence; detached (no-grad)
  // entries come from `cache` keyed by item_id when present.
  Tensor sequence_items_cached(
      const MixedSequence& ms, const Catalog& catalog,
      std::unordered_map<std::string, Tensor>* cache) const;
  ad::Var sequence_items_var(const MixedSequence& ms,
                             const Catalog& catalog) const;

  void save(const std::string& path) const;  // checkpoint + config sidecar
  static Model load(const std::string& path);

 private:
  ad::Var transformer(const ad::Var& input, const std::string& prefix,
                      std::size_t layers, const Tensor* key_mask) const;
  void init_params(std::uint64_t seed);

  ModelConfig cfg_;
  ParamStore params_;
};

}  // namespace crossrec
