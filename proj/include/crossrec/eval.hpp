// Ranking metrics (HR@K, NDCG@K, MRR) and the offline evaluation loop:
// per-user temporal split, candidate-pool scoring, scenario filters, and
// the mixing-strategy ablation harness.
#pragma once

#include <map>

#include "crossrec/training.hpp"

namespace crossrec {

struct ScoredItem {
  std::string item_id;
  double score = 0.0;
};

// 1-based ranks of each target inside the scored pool. Ordering is by
// descending score; exact score ties break by ascending item_id. Targets
// absent from the pool are an error.
std::vector<std::size_t> target_ranks(std::vector<ScoredItem> pool,
                                      const std::vector<std::string>& targets);

struct RankingMetrics {
  std::map<std::size_t, double> hr;    // K -> hit rate
  std::map<std::size_t, double> ndcg;  // K -> NDCG
  double mrr = 0.0;                    // reciprocal best rank, 0 past max K
};

// Metrics for one evaluation instance. HR@K is 1 when any target ranks
// within K. NDCG@K uses gain 1/log2(rank+1) with the ideal ranking of
// min(#targets, K) relevant items. MRR uses the best target rank and is 0
// when it exceeds the largest K.
RankingMetrics metrics_for_ranks(const std::vector<std::size_t>& ranks,
                                 const std::vector<std::size_t>& ks);

struct EvalOptions {
  std::vector<std::size_t> ks = {10, 100, 1000};
  std::size_t pool_size = 10000;
  std::uint64_t seed = 0;
  // which scenarios contribute input events (the history the user encoder
  // sees); targets are unaffected
  std::array<bool, kNumScenarios> input_scenarios = {true, true, true};
  // when set, only targets from this scenario count (users without such a
  // target are skipped)
  std::optional<Scenario> target_scenario;
  std::size_t max_users = 0;  // 0 = evaluate everyone
};

struct EvalResult {
  RankingMetrics metrics;  // mean over evaluated users
  std::size_t evaluated_users = 0;
  std::size_t skipped_users = 0;
};

EvalResult evaluate(const Model& model, const SyntheticData& data,
                    const EvalOptions& opt);

struct AblationRow {
  MixStrategy strategy;
  TrainStats train_stats;
  EvalResult result;
};

// Trains one model per mixing strategy from the same initialization seed
// and evaluates each under identical options.
std::vector<AblationRow> run_ablation(const ModelConfig& base,
                                      const SyntheticData& data,
                                      const TrainConfig& tc,
                                      const EvalOptions& opt,
                                      const std::vector<MixStrategy>& strategies,
                                      std::uint64_t model_seed);

}  // namespace crossrec
