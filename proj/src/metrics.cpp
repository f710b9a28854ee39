#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "crossrec/eval.hpp"

namespace crossrec {

std::vector<std::size_t> target_ranks(std::vector<ScoredItem> pool,
                                      const std::vector<std::string>& targets) {
  std::sort(pool.begin(), pool.end(),
            [](const ScoredItem& a, const ScoredItem& b) {
              if (a.score != b.score) return a.score > b.score;
              return a.item_id < b.item_id;
            });
  std::unordered_map<std::string, std::size_t> rank_of;
  rank_of.reserve(pool.size());
  for (std::size_t i = 0; i < pool.size(); ++i)
    rank_of[pool[i].item_id] = i + 1;
  std::vector<std::size_t> ranks;
  ranks.reserve(targets.size());
  for (const auto& t : targets) {
    auto it = rank_of.find(t);
    if (it == rank_of.end())
      throw std::runtime_error("target_ranks: target " + t +
                               " missing from the candidate pool");
    ranks.push_back(it->second);
  }
  return ranks;
}

RankingMetrics metrics_for_ranks(const std::vector<std::size_t>& ranks,
                                 const std::vector<std::size_t>& ks) {
  RankingMetrics out;
  if (ranks.empty())
    throw std::runtime_error("metrics_for_ranks: no target ranks");
  const std::size_t best = *std::min_element(ranks.begin(), ranks.end());
  std::size_t max_k = 0;
  for (std::size_t k : ks) {
    max_k = std::max(max_k, k);
    out.hr[k] = best <= k ? 1.0 : 0.0;
    double dcg = 0.0;
    for (std::size_t r : ranks)
      if (r <= k) dcg += 1.0 / std::log2((double)r + 1.0);
    double idcg = 0.0;
    const std::size_t ideal = std::min(ranks.size(), k);
    for (std::size_t i = 1; i <= ideal; ++i)
      idcg += 1.0 / std::log2((double)i + 1.0);
    out.ndcg[k] = idcg > 0.0 ? dcg / idcg : 0.0;
  }
  out.mrr = best <= max_k ? 1.0 / (double)best : 0.0;
  return out;
}

}  // namespace crossrec
