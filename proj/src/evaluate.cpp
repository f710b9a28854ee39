#include <unordered_map>

#include "crossrec/eval.hpp"

namespace crossrec {

namespace {
std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}
}  // namespace

EvalResult evaluate(const Model& model, const SyntheticData& data,
                    const EvalOptions& opt) {
  const ModelConfig& mc = model.config();
  EvalResult out;
  const std::vector<std::string> catalog_ids = data.catalog.ids();
  std::unordered_map<std::string, Tensor> item_cache;

  auto cached_vec = [&](const std::string& id) -> const Tensor& {
    auto it = item_cache.find(id);
    if (it != item_cache.end()) return it->second;
    const CatalogItem* item = data.catalog.find(id);
    if (item == nullptr)
      throw std::runtime_error("evaluate: unknown item " + id);
    return item_cache.emplace(id, model.encode_item(*item)).first->second;
  };

  const std::size_t limit =
      opt.max_users == 0 ? data.users.size()
                         : std::min(opt.max_users, data.users.size());
  for (std::size_t ui = 0; ui < limit; ++ui) {
    const UserHistory& user = data.users[ui];
    std::mt19937_64 rng(mix64(opt.seed) ^ mix64(ui + 1));
    auto split = temporal_split(user, rng, catalog_ids, opt.pool_size);
    if (!split) {
      ++out.skipped_users;
      continue;
    }

    std::vector<std::string> targets;
    for (std::size_t t = 0; t < split->targets.size(); ++t)
      if (!opt.target_scenario ||
          split->target_scenarios[t] == *opt.target_scenario)
        targets.push_back(split->targets[t]);
    if (targets.empty()) {
      ++out.skipped_users;
      continue;
    }

    UserHistory visible;
    visible.user_id = user.user_id;
    for (const auto& e : split->input_events)
      if (opt.input_scenarios[(std::size_t)e.scenario])
        visible.of(e.scenario).push_back(e);
    MixedSequence ms =
        mix(visible, mc.mixer.quota, mc.mixer.strategy, split->t_cut);
    if (ms.entries.size() == 0) {
      ++out.skipped_users;
      continue;
    }

    Tensor seq({ms.entries.size(), mc.d});
    for (std::size_t i = 0; i < ms.entries.size(); ++i) {
      const Tensor& v = cached_vec(ms.entries[i].event.item_id);
      for (std::size_t j = 0; j < mc.d; ++j) seq.at(i, j) = v[j];
    }
    InterestSet interests = model.encode_user(ms, seq);

    std::vector<ScoredItem> pool;
    pool.reserve(split->candidate_pool.size());
    for (const auto& id : split->candidate_pool)
      pool.push_back({id, Model::score_user_item(interests, cached_vec(id))});

    RankingMetrics m = metrics_for_ranks(target_ranks(std::move(pool), targets),
                                         opt.ks);
    for (std::size_t k : opt.ks) {
      out.metrics.hr[k] += m.hr[k];
      out.metrics.ndcg[k] += m.ndcg[k];
    }
    out.metrics.mrr += m.mrr;
    ++out.evaluated_users;
  }

  if (out.evaluated_users > 0) {
    for (auto& [k, v] : out.metrics.hr) v /= (double)out.evaluated_users;
    for (auto& [k, v] : out.metrics.ndcg) v /= (double)out.evaluated_users;
    out.metrics.mrr /= (double)out.evaluated_users;
  }
  return out;
}

std::vector<AblationRow> run_ablation(const ModelConfig& base,
                                      const SyntheticData& data,
                                      const TrainConfig& tc,
                                      const EvalOptions& opt,
                                      const std::vector<MixStrategy>& strategies,
                                      std::uint64_t model_seed) {
  std::vector<AblationRow> rows;
  for (MixStrategy s : strategies) {
    ModelConfig cfg = base;
    cfg.mixer.strategy = s;
    Model model(cfg, model_seed);
    AblationRow row;
    row.strategy = s;
    row.train_stats = train(model, data, tc);
    row.result = evaluate(model, data, opt);
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace crossrec
