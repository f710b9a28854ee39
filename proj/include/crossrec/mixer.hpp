// Scenario-balanced sequence assembly: per-scenario quota truncation,
// chronological merge with scenario tags, dual positional codes (sequence
// index + log-bucketed time gap), and additive feature fusion into the
// user-encoder input matrix.
#pragma once

#include <cstdint>
#include <optional>

#include "crossrec/autograd.hpp"
#include "crossrec/events.hpp"

namespace crossrec {

enum class MixStrategy {
  sorted_by_timestamp,  // no quota: global last_n most recent events
  naive,                // quota, no positional codes
  pe_seq_only,
  pe_gap_only,
  two_d,                // quota + both positional codes
};
const char* mix_strategy_name(MixStrategy s);
std::optional<MixStrategy> mix_strategy_from_name(const std::string& name);

struct MixQuota {
  std::size_t n_h = 96;
  std::size_t n_a = 16;
  std::size_t n_s = 16;
  std::size_t last_n() const { return n_h + n_a + n_s; }
};

struct MixedEntry {
  InteractionEvent event;
  std::size_t seq_position = 0;  // 0..L-1, oldest -> newest
  std::int64_t time_gap = 0;     // t_curr - timestamp, >= 0
};

struct MixedSequence {
  std::vector<MixedEntry> entries;
  std::int64_t t_curr = 0;
};

constexpr std::size_t kGapBuckets = 32;
// min(G-1, floor(log2(1 + dt/60)))
std::size_t gap_bucket(std::int64_t dt_seconds);
std::size_t hour_of(std::int64_t timestamp);  // 0..23, UTC

std::array<std::vector<InteractionEvent>, kNumScenarios> apply_quota(
    const UserHistory& h, const MixQuota& q);

// Chronological merge; ties by scenario order homefeed < ads < search.
// t_curr defaults to (max timestamp + 1); pass the split cutoff in eval.
MixedSequence merge(
    const std::array<std::vector<InteractionEvent>, kNumScenarios>& lists,
    std::optional<std::int64_t> t_curr = std::nullopt);

// Quota+merge under a strategy (sorted_by_timestamp takes the global
// last_n most recent events instead of per-scenario quotas).
MixedSequence mix(const UserHistory& h, const MixQuota& q, MixStrategy strategy,
                  std::optional<std::int64_t> t_curr = std::nullopt);

struct MixerTables {
  ad::Var action;    // [12 x d]
  ad::Var hour;      // [24 x d]
  ad::Var scenario;  // [3 x d]
  ad::Var pe_seq;    // [last_n x d]
  ad::Var pe_gap;    // [kGapBuckets x d]
};

struct MixerConfig {
  MixQuota quota;
  MixStrategy strategy = MixStrategy::two_d;
  // action-embedding channels; defaults to the collect/share/message/
  // hide/like subset (is_hide stands in for "block")
  std::vector<std::size_t> action_channels = {kCollect, kShare, kMessage,
                                              kHide, kLike};
};

// p_j = PE_seq(j) + PE_gap(bucket(dt_j)), zeroed per strategy. [L x d]
ad::Var encode_positions(const MixedSequence& ms, const MixerTables& t,
                         MixStrategy strategy);

// row_j = item_vec_j + sum(active action embeds) + hour + scenario + p_j
ad::Var fuse_features(const MixedSequence& ms, const ad::Var& item_vecs,
                      const MixerTables& t, const MixerConfig& cfg);

}  // namespace crossrec
