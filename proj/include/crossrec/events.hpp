// Behavior-log domain types plus JSONL parsing/serialization, user validity
// filtering, and temporal evaluation splits.
//
// Wire format, one user per line:
//   {"user_id": "...", "data": {"homefeed_item_lastn": [...],
//    "ads_item_lastn": [...], "search_item_lastn": [...]}}
// Each event object carries duration, item_id, timestamp, type and the
// twelve is_* flags below. Unknown fields are ignored.
#pragma once

#include <array>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <vector>

namespace crossrec {

enum class Scenario : std::uint8_t { homefeed = 0, advertisements = 1, search = 2 };
constexpr std::size_t kNumScenarios = 3;
const char* scenario_name(Scenario s);
std::optional<Scenario> scenario_from_name(const std::string& name);

constexpr std::size_t kNumFlags = 12;
// Fixed flag order; index into InteractionEvent::flags.
enum Flag : std::size_t {
  kClick = 0,
  kClickProfile,
  kCollect,
  kComment,
  kFollow,
  kHide,
  kLike,
  kMessage,
  kPagetime,
  kReadComment,
  kShare,
  kVideoend,
};
extern const std::array<const char*, kNumFlags> kFlagNames;

struct InteractionEvent {
  std::string item_id;
  Scenario scenario = Scenario::homefeed;
  std::int64_t timestamp = 0;  // seconds since epoch, > 0
  std::int64_t duration = 0;   // seconds, >= 0
  std::array<std::uint8_t, kNumFlags> flags{};
  std::string item_type = "note";

  bool flag(Flag f) const { return flags[f] != 0; }
  bool operator==(const InteractionEvent&) const = default;
};

struct UserHistory {
  std::string user_id;
  // index by static_cast<size_t>(Scenario); each list sorted by timestamp
  std::array<std::vector<InteractionEvent>, kNumScenarios> events;

  const std::vector<InteractionEvent>& of(Scenario s) const {
    return events[(std::size_t)s];
  }
  std::vector<InteractionEvent>& of(Scenario s) {
    return events[(std::size_t)s];
  }
  std::size_t total_events() const;
  bool operator==(const UserHistory&) const = default;
};

// Chronological merge of all three scenario lists; ties break by scenario
// order homefeed < advertisements < search, then file order (stable).
std::vector<InteractionEvent> merged_timeline(const UserHistory& h);

struct ParseStats {
  std::size_t records = 0;
  std::size_t bad_lines = 0;       // unparseable records
  std::size_t dropped_events = 0;  // events missing item_id/timestamp
  std::vector<std::string> errors;
};

std::vector<UserHistory> parse_log(std::istream& in, ParseStats* stats = nullptr);
std::string serialize_user(const UserHistory& h);
void write_log(std::ostream& out, const std::vector<UserHistory>& users);

struct ValidityPolicy {
  int min_homefeed_clicks = 30;
  int min_ads_clicks = 5;
  int min_click_duration_s = 5;  // valid iff duration strictly exceeds this
};

struct ValidationResult {
  bool accepted = false;
  std::string reason;
};

ValidationResult validate_user(const UserHistory& h, const ValidityPolicy& p);

struct EvalSplit {
  std::vector<InteractionEvent> input_events;  // all timestamps < t_cut
  std::vector<std::string> targets;            // exactly 3 item ids
  std::vector<Scenario> target_scenarios;      // scenario of each target event
  std::int64_t t_cut = 0;                      // timestamp of the first target
  std::vector<std::string> candidate_pool;     // unique ids, targets included
};

// Samples a cutoff uniformly over admissible merged-timeline positions
// (>= min_prefix events strictly before, >= 3 at/after, strict timestamp
// increase at the boundary). Returns nullopt when the history is too short.
std::optional<EvalSplit> temporal_split(const UserHistory& h,
                                        std::mt19937_64& rng,
                                        const std::vector<std::string>& catalog_ids,
                                        std::size_t pool_size,
                                        std::size_t min_prefix = 1);

}  // namespace crossrec
