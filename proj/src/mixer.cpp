#include "crossrec/mixer.hpp"

#include <algorithm>
#include <cmath>

namespace crossrec {

namespace {
const char* kStrategyNames[] = {"sorted_by_timestamp", "naive", "pe_seq_only",
                                "pe_gap_only", "2d"};
}

const char* mix_strategy_name(MixStrategy s) {
  return kStrategyNames[(std::size_t)s];
}

std::optional<MixStrategy> mix_strategy_from_name(const std::string& name) {
  for (std::size_t i = 0; i < 5; ++i)
    if (name == kStrategyNames[i]) return (MixStrategy)i;
  return std::nullopt;
}

std::size_t gap_bucket(std::int64_t dt_seconds) {
  if (dt_seconds <= 0) return 0;
  const double b = std::floor(std::log2(1.0 + (double)dt_seconds / 60.0));
  if (b >= (double)(kGapBuckets - 1)) return kGapBuckets - 1;
  return b <= 0.0 ? 0 : (std::size_t)b;
}

std::size_t hour_of(std::int64_t timestamp) {
  return (std::size_t)((timestamp % 86400 + 86400) % 86400 / 3600);
}

std::array<std::vector<InteractionEvent>, kNumScenarios> apply_quota(
    const UserHistory& h, const MixQuota& q) {
  const std::array<std::size_t, kNumScenarios> quotas = {q.n_h, q.n_a, q.n_s};
  std::array<std::vector<InteractionEvent>, kNumScenarios> out;
  for (std::size_t s = 0; s < kNumScenarios; ++s) {
    const auto& evs = h.events[s];
    const std::size_t keep = std::min(evs.size(), quotas[s]);
    out[s].assign(evs.end() - (long)keep, evs.end());
  }
  return out;
}

MixedSequence merge(
    const std::array<std::vector<InteractionEvent>, kNumScenarios>& lists,
    std::optional<std::int64_t> t_curr) {
  MixedSequence ms;
  std::size_t total = 0;
  for (const auto& l : lists) total += l.size();
  ms.entries.reserve(total);
  for (std::size_t s = 0; s < kNumScenarios; ++s)
    for (const auto& e : lists[s]) ms.entries.push_back({e, 0, 0});
  std::stable_sort(ms.entries.begin(), ms.entries.end(),
                   [](const MixedEntry& a, const MixedEntry& b) {
                     if (a.event.timestamp != b.event.timestamp)
                       return a.event.timestamp < b.event.timestamp;
                     return (std::uint8_t)a.event.scenario <
                            (std::uint8_t)b.event.scenario;
                   });
  std::int64_t max_ts = 0;
  for (const auto& e : ms.entries)
    max_ts = std::max(max_ts, e.event.timestamp);
  ms.t_curr = t_curr.value_or(max_ts + 1);
  for (std::size_t j = 0; j < ms.entries.size(); ++j) {
    ms.entries[j].seq_position = j;
    ms.entries[j].time_gap =
        std::max<std::int64_t>(0, ms.t_curr - ms.entries[j].event.timestamp);
  }
  return ms;
}

MixedSequence mix(const UserHistory& h, const MixQuota& q, MixStrategy strategy,
                  std::optional<std::int64_t> t_curr) {
  if (strategy == MixStrategy::sorted_by_timestamp) {
    // no scenario quotas: global last_n by recency
    std::array<std::vector<InteractionEvent>, kNumScenarios> all = h.events;
    MixedSequence full = merge(all, t_curr);
    const std::size_t keep = std::min(full.entries.size(), q.last_n());
    MixedSequence ms;
    ms.t_curr = full.t_curr;
    ms.entries.assign(full.entries.end() - (long)keep, full.entries.end());
    for (std::size_t j = 0; j < ms.entries.size(); ++j)
      ms.entries[j].seq_position = j;
    return ms;
  }
  return merge(apply_quota(h, q), t_curr);
}

ad::Var encode_positions(const MixedSequence& ms, const MixerTables& t,
                         MixStrategy strategy) {
  const std::size_t L = ms.entries.size();
  const std::size_t d = t.pe_seq->val.cols();
  const bool want_seq = strategy == MixStrategy::pe_seq_only ||
                        strategy == MixStrategy::two_d ||
                        strategy == MixStrategy::sorted_by_timestamp;
  const bool want_gap = strategy == MixStrategy::pe_gap_only ||
                        strategy == MixStrategy::two_d ||
                        strategy == MixStrategy::sorted_by_timestamp;
  if (!want_seq && !want_gap) return ad::constant(Tensor({L, d}));
  std::vector<std::size_t> pos, buckets;
  for (const auto& e : ms.entries) {
    if (e.seq_position >= t.pe_seq->val.rows())
      throw ShapeError("encode_positions: position " +
                       std::to_string(e.seq_position) +
                       " exceeds configured last_n " +
                       std::to_string(t.pe_seq->val.rows()));
    pos.push_back(e.seq_position);
    buckets.push_back(gap_bucket(e.time_gap));
  }
  if (want_seq && want_gap)
    return ad::add(ad::embedding_rows(t.pe_seq, pos),
                   ad::embedding_rows(t.pe_gap, buckets));
  if (want_seq) return ad::embedding_rows(t.pe_seq, pos);
  return ad::embedding_rows(t.pe_gap, buckets);
}

ad::Var fuse_features(const MixedSequence& ms, const ad::Var& item_vecs,
                      const MixerTables& t, const MixerConfig& cfg) {
  const std::size_t L = ms.entries.size();
  const std::size_t d = t.action->val.cols();
  if (item_vecs->val.rows() != L || item_vecs->val.cols() != d)
    throw ShapeError("fuse_features: item_vecs " + item_vecs->val.shape_str() +
                     " does not match sequence length " + std::to_string(L));
  // selector picks the active flags within the configured channel set
  Tensor selector({L, kNumFlags});
  std::vector<std::size_t> hours, scenarios;
  for (std::size_t j = 0; j < L; ++j) {
    const auto& e = ms.entries[j].event;
    for (std::size_t ch : cfg.action_channels)
      if (e.flags[ch]) selector.at(j, ch) = 1.0;
    hours.push_back(hour_of(e.timestamp));
    scenarios.push_back((std::size_t)e.scenario);
  }
  ad::Var fused = ad::add(item_vecs, ad::matmul(ad::constant(selector), t.action));
  fused = ad::add(fused, ad::embedding_rows(t.hour, hours));
  fused = ad::add(fused, ad::embedding_rows(t.scenario, scenarios));
  fused = ad::add(fused, encode_positions(ms, t, cfg.strategy));
  return fused;
}

}  // namespace crossrec
