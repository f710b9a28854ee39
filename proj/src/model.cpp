#include "crossrec/model.hpp"

#include <cmath>
#include <fstream>

#include "json.hpp"

namespace crossrec {

using ad::Var;
using nlohmann::json;

void ModelConfig::validate() const {
  if (d == 0 || heads == 0 || d % heads != 0)
    throw ConfigError("model: d must be a positive multiple of heads");
  if (window >= last_n)
    throw ConfigError("model: window W must be smaller than last_n");
  if (mixer.quota.last_n() != last_n)
    throw ConfigError("model: mixer quota sum " +
                      std::to_string(mixer.quota.last_n()) +
                      " != last_n " + std::to_string(last_n));
  if (queries_per_scenario == 0)
    throw ConfigError("model: queries_per_scenario must be > 0");
}

Model::Model(ModelConfig cfg, std::uint64_t seed) : cfg_(std::move(cfg)) {
  cfg_.validate();
  init_params(seed);
}

namespace {
void init_tower(ParamStore& ps, const std::string& prefix, std::size_t layers,
                std::size_t d, std::size_t ffn_mult, std::mt19937_64& rng) {
  for (std::size_t l = 0; l < layers; ++l) {
    const std::string p = prefix + "L" + std::to_string(l) + ".";
    auto ln1g = ps.get_or_create(p + "ln1.g", 1, d, rng);
    ln1g->val.fill(1.0);
    ps.get_or_create(p + "ln1.b", 1, d, rng)->val.fill(0.0);
    ps.get_or_create(p + "wq", d, d, rng);
    ps.get_or_create(p + "wk", d, d, rng);
    ps.get_or_create(p + "wv", d, d, rng);
    ps.get_or_create(p + "wo", d, d, rng);
    auto ln2g = ps.get_or_create(p + "ln2.g", 1, d, rng);
    ln2g->val.fill(1.0);
    ps.get_or_create(p + "ln2.b", 1, d, rng)->val.fill(0.0);
    ps.get_or_create(p + "ffn.w1", d, ffn_mult * d, rng);
    ps.get_or_create(p + "ffn.b1", 1, ffn_mult * d, rng)->val.fill(0.0);
    ps.get_or_create(p + "ffn.w2", ffn_mult * d, d, rng);
    ps.get_or_create(p + "ffn.b2", 1, d, rng)->val.fill(0.0);
  }
}
}  // namespace

void Model::init_params(std::uint64_t seed) {
  std::mt19937_64 rng(seed * 0x9e3779b97f4a7c15ull + 1);
  params_.get_or_create("tau", 1, 1, rng)->val[0] = 20.0;
  params_.get_or_create("item.tok_emb", cfg_.vocab_size + 1, cfg_.d, rng);
  if (cfg_.visual_dim > 0)
    params_.get_or_create("item.vis_proj", cfg_.visual_dim, cfg_.d, rng);
  init_tower(params_, "item.", cfg_.item_layers, cfg_.d, cfg_.ffn_mult, rng);
  params_.get_or_create("user.action", kNumFlags, cfg_.d, rng);
  params_.get_or_create("user.hour", 24, cfg_.d, rng);
  params_.get_or_create("user.scenario", kNumScenarios, cfg_.d, rng);
  params_.get_or_create("user.pe_seq", cfg_.last_n, cfg_.d, rng);
  params_.get_or_create("user.pe_gap", kGapBuckets, cfg_.d, rng);
  params_.get_or_create("user.queries", cfg_.interest_count(), cfg_.d, rng);
  init_tower(params_, "user.", cfg_.user_layers, cfg_.d, cfg_.ffn_mult, rng);
}

MixerTables Model::mixer_tables() const {
  return MixerTables{params_.get("user.action"), params_.get("user.hour"),
                     params_.get("user.scenario"), params_.get("user.pe_seq"),
                     params_.get("user.pe_gap")};
}

Var Model::transformer(const Var& input, const std::string& prefix,
                       std::size_t layers, const Tensor* key_mask) const {
  const std::size_t n = input->val.rows();
  const std::size_t d = cfg_.d, hd = d / cfg_.heads;
  Tensor mask_mat;
  if (key_mask != nullptr) {
    mask_mat = Tensor({n, n});
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        mask_mat.at(i, j) = (*key_mask)[j];
  }
  Var x = input;
  for (std::size_t l = 0; l < layers; ++l) {
    const std::string p = prefix + "L" + std::to_string(l) + ".";
    Var xn = ad::layer_norm(x, params_.get(p + "ln1.g"),
                            params_.get(p + "ln1.b"), 1e-5);
    Var q = ad::matmul(xn, params_.get(p + "wq"));
    Var k = ad::matmul(xn, params_.get(p + "wk"));
    Var v = ad::matmul(xn, params_.get(p + "wv"));
    std::vector<Var> heads;
    for (std::size_t h = 0; h < cfg_.heads; ++h) {
      Var qh = ad::slice_cols(q, h * hd, (h + 1) * hd);
      Var kh = ad::slice_cols(k, h * hd, (h + 1) * hd);
      Var vh = ad::slice_cols(v, h * hd, (h + 1) * hd);
      heads.push_back(ad::scaled_dot_attention(
          qh, kh, vh, key_mask != nullptr ? &mask_mat : nullptr));
    }
    x = ad::add(x, ad::matmul(ad::concat_cols(heads), params_.get(p + "wo")));
    Var xn2 = ad::layer_norm(x, params_.get(p + "ln2.g"),
                             params_.get(p + "ln2.b"), 1e-5);
    Var hidden = ad::relu(
        ad::add(ad::matmul(xn2, params_.get(p + "ffn.w1")),
                params_.get(p + "ffn.b1")));
    x = ad::add(x, ad::add(ad::matmul(hidden, params_.get(p + "ffn.w2")),
                           params_.get(p + "ffn.b2")));
  }
  return x;
}

Var Model::encode_item_var(const CatalogItem& item) const {
  std::vector<std::size_t> ids;
  ids.push_back(cfg_.vocab_size);  // special pooling token, always first
  for (auto t : item.tokens) {
    if (t >= cfg_.vocab_size)
      throw ShapeError("encode_item: token id " + std::to_string(t) +
                       " out of range [0," + std::to_string(cfg_.vocab_size) +
                       ")");
    ids.push_back(t);
  }
  Var x = ad::embedding_rows(params_.get("item.tok_emb"), ids);
  x = transformer(x, "item.", cfg_.item_layers, nullptr);
  Var pooled = ad::slice_rows(x, 0, 1);
  if (cfg_.visual_dim > 0 && !item.visual.empty()) {
    if (item.visual.size() != cfg_.visual_dim)
      throw ShapeError("encode_item: visual vector length " +
                       std::to_string(item.visual.size()) + " != configured " +
                       std::to_string(cfg_.visual_dim));
    Var vis = ad::constant(Tensor::row(item.visual));
    pooled = ad::add(pooled, ad::matmul(vis, params_.get("item.vis_proj")));
  }
  return ad::l2_normalize_rows(pooled);
}

Tensor Model::encode_item(const CatalogItem& item) const {
  ad::NoGradGuard ng;
  return encode_item_var(item)->val;
}

Var Model::encode_user_var(const MixedSequence& ms, const Var& item_vecs,
                           bool training, bool with_mask) const {
  const std::size_t L = ms.entries.size();
  if (L == 0) throw ShapeError("encode_user: empty sequence");
  std::size_t vis = L;
  if (training) {
    if (L <= cfg_.window)
      throw ShapeError("encode_user: history of " + std::to_string(L) +
                       " events too short for window " +
                       std::to_string(cfg_.window));
    vis = L - cfg_.window;
  }
  Var fused = fuse_features(ms, item_vecs, mixer_tables(), cfg_.mixer);
  const std::size_t K = cfg_.interest_count();
  Var queries = params_.get("user.queries");
  Var out;
  if (with_mask && vis < L) {
    Var input = ad::concat_rows({fused, queries});
    Tensor key_mask({1, L + K});
    for (std::size_t j = vis; j < L; ++j) key_mask[j] = -1e9;
    out = transformer(input, "user.", cfg_.user_layers, &key_mask);
  } else {
    Var input = ad::concat_rows({ad::slice_rows(fused, 0, vis), queries});
    out = transformer(input, "user.", cfg_.user_layers, nullptr);
  }
  const std::size_t rows = out->val.rows();
  return ad::l2_normalize_rows(ad::slice_rows(out, rows - K, rows));
}

InterestSet Model::encode_user(const MixedSequence& ms,
                               const Tensor& item_vecs) const {
  ad::NoGradGuard ng;
  return {encode_user_var(ms, ad::constant(item_vecs), false)->val};
}

Tensor Model::pooled_interest(const InterestSet& s) {
  const std::size_t k = s.vectors.rows(), d = s.vectors.cols();
  Tensor out({1, d});
  for (std::size_t j = 0; j < d; ++j) {
    double acc = 0.0;
    for (std::size_t i = 0; i < k; ++i) acc += s.vectors.at(i, j);
    out[j] = acc / (double)k;
  }
  double n2 = 0.0;
  for (std::size_t j = 0; j < d; ++j) n2 += out[j] * out[j];
  const double nrm = std::sqrt(n2);
  if (nrm > 1e-30)
    for (std::size_t j = 0; j < d; ++j) out[j] /= nrm;
  return out;
}

double Model::score_user_item(const InterestSet& s, const Tensor& item_vec) {
  const std::size_t k = s.vectors.rows(), d = s.vectors.cols();
  double best = -2.0;
  for (std::size_t i = 0; i < k; ++i) {
    double dot = 0.0, ni = 0.0, nv = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      dot += s.vectors.at(i, j) * item_vec[j];
      ni += s.vectors.at(i, j) * s.vectors.at(i, j);
      nv += item_vec[j] * item_vec[j];
    }
    const double c = dot / (std::sqrt(ni) * std::sqrt(nv));
    best = std::max(best, c);
  }
  return best;
}

Tensor Model::sequence_items_cached(
    const MixedSequence& ms, const Catalog& catalog,
    std::unordered_map<std::string, Tensor>* cache) const {
  const std::size_t L = ms.entries.size();
  Tensor out({L, cfg_.d});
  for (std::size_t i = 0; i < L; ++i) {
    const std::string& id = ms.entries[i].event.item_id;
    const Tensor* vec = nullptr;
    if (cache != nullptr) {
      auto it = cache->find(id);
      if (it != cache->end()) vec = &it->second;
    }
    Tensor fresh;
    if (vec == nullptr) {
      const CatalogItem* item = catalog.find(id);
      if (item == nullptr)
        throw std::runtime_error("sequence_items: unknown item " + id);
      fresh = encode_item(*item);
      if (cache != nullptr) vec = &cache->emplace(id, fresh).first->second;
      else vec = &fresh;
    }
    for (std::size_t j = 0; j < cfg_.d; ++j) out.at(i, j) = (*vec)[j];
  }
  return out;
}

Var Model::sequence_items_var(const MixedSequence& ms,
                              const Catalog& catalog) const {
  std::vector<Var> rows;
  rows.reserve(ms.entries.size());
  for (const auto& e : ms.entries) {
    const CatalogItem* item = catalog.find(e.event.item_id);
    if (item == nullptr)
      throw std::runtime_error("sequence_items: unknown item " +
                               e.event.item_id);
    rows.push_back(encode_item_var(*item));
  }
  return ad::concat_rows(rows);
}

namespace {
json mixer_to_json(const MixerConfig& m) {
  return json{{"n_h", m.quota.n_h},
              {"n_a", m.quota.n_a},
              {"n_s", m.quota.n_s},
              {"strategy", mix_strategy_name(m.strategy)},
              {"action_channels", m.action_channels}};
}
MixerConfig mixer_from_json(const json& j) {
  MixerConfig m;
  m.quota.n_h = j.value("n_h", m.quota.n_h);
  m.quota.n_a = j.value("n_a", m.quota.n_a);
  m.quota.n_s = j.value("n_s", m.quota.n_s);
  if (j.contains("strategy")) {
    auto s = mix_strategy_from_name(j["strategy"].get<std::string>());
    if (!s) throw ConfigError("unknown mixer strategy " +
                              j["strategy"].get<std::string>());
    m.strategy = *s;
  }
  if (j.contains("action_channels"))
    m.action_channels = j["action_channels"].get<std::vector<std::size_t>>();
  return m;
}
}  // namespace

json model_config_to_json(const ModelConfig& c) {
  return json{{"d", c.d},
              {"heads", c.heads},
              {"item_layers", c.item_layers},
              {"user_layers", c.user_layers},
              {"ffn_mult", c.ffn_mult},
              {"vocab_size", c.vocab_size},
              {"visual_dim", c.visual_dim},
              {"last_n", c.last_n},
              {"window", c.window},
              {"queries_per_scenario", c.queries_per_scenario},
              {"frozen_item_tower", c.frozen_item_tower},
              {"mixer", mixer_to_json(c.mixer)}};
}

ModelConfig model_config_from_json(const json& j) {
  ModelConfig c;
  c.d = j.value("d", c.d);
  c.heads = j.value("heads", c.heads);
  c.item_layers = j.value("item_layers", c.item_layers);
  c.user_layers = j.value("user_layers", c.user_layers);
  c.ffn_mult = j.value("ffn_mult", c.ffn_mult);
  c.vocab_size = j.value("vocab_size", c.vocab_size);
  c.visual_dim = j.value("visual_dim", c.visual_dim);
  c.last_n = j.value("last_n", c.last_n);
  c.window = j.value("window", c.window);
  c.queries_per_scenario = j.value("queries_per_scenario", c.queries_per_scenario);
  c.frozen_item_tower = j.value("frozen_item_tower", c.frozen_item_tower);
  if (j.contains("mixer")) c.mixer = mixer_from_json(j["mixer"]);
  return c;
}

void Model::save(const std::string& path) const {
  params_.save(path);
  std::ofstream os(path + ".json");
  os << model_config_to_json(cfg_).dump(2) << '\n';
  if (!os) throw std::runtime_error("model: cannot write " + path + ".json");
}

Model Model::load(const std::string& path) {
  std::ifstream is(path + ".json");
  if (!is) throw std::runtime_error("model: missing config sidecar " + path +
                                    ".json");
  json j = json::parse(is);
  Model m(model_config_from_json(j), 0);
  ParamStore fresh;
  fresh.load(path);
  // dimension check against the configured architecture
  for (const auto& name : m.params_.names()) {
    if (!fresh.has(name))
      throw std::runtime_error("checkpoint: missing tensor " + name);
    if (fresh.get(name)->val.shape() != m.params_.get(name)->val.shape())
      throw std::runtime_error("checkpoint: dimension mismatch for " + name);
  }
  m.params_ = std::move(fresh);
  return m;
}

}  // namespace crossrec
