#include "crossrec/events.hpp"

#include <algorithm>
#include <unordered_set>

#include "json.hpp"

namespace crossrec {

using nlohmann::json;

const std::array<const char*, kNumFlags> kFlagNames = {
    "is_click",     "is_click_profile", "is_collect", "is_comment",
    "is_follow",    "is_hide",          "is_like",    "is_message",
    "is_pagetime",  "is_read_comment",  "is_share",   "is_videoend"};

namespace {
const std::array<const char*, kNumScenarios> kScenarioNames = {
    "homefeed", "advertisements", "search"};
const std::array<const char*, kNumScenarios> kScenarioKeys = {
    "homefeed_item_lastn", "ads_item_lastn", "search_item_lastn"};
}  // namespace

const char* scenario_name(Scenario s) {
  return kScenarioNames[(std::size_t)s];
}

std::optional<Scenario> scenario_from_name(const std::string& name) {
  for (std::size_t i = 0; i < kNumScenarios; ++i)
    if (name == kScenarioNames[i]) return (Scenario)i;
  if (name == "ads") return Scenario::advertisements;
  return std::nullopt;
}

std::size_t UserHistory::total_events() const {
  std::size_t n = 0;
  for (const auto& v : events) n += v.size();
  return n;
}

std::vector<InteractionEvent> merged_timeline(const UserHistory& h) {
  std::vector<InteractionEvent> all;
  all.reserve(h.total_events());
  for (const auto& v : h.events) all.insert(all.end(), v.begin(), v.end());
  std::stable_sort(all.begin(), all.end(),
                   [](const InteractionEvent& a, const InteractionEvent& b) {
                     if (a.timestamp != b.timestamp)
                       return a.timestamp < b.timestamp;
                     return (std::uint8_t)a.scenario < (std::uint8_t)b.scenario;
                   });
  return all;
}

namespace {

bool parse_event(const json& j, Scenario s, InteractionEvent& out) {
  if (!j.is_object()) return false;
  auto id = j.find("item_id");
  auto ts = j.find("timestamp");
  if (id == j.end() || !id->is_string() || id->get<std::string>().empty())
    return false;
  if (ts == j.end() || !ts->is_number_integer() || ts->get<std::int64_t>() <= 0)
    return false;
  out.item_id = id->get<std::string>();
  out.timestamp = ts->get<std::int64_t>();
  out.scenario = s;
  out.duration = 0;
  if (auto d = j.find("duration"); d != j.end() && d->is_number_integer()) {
    auto v = d->get<std::int64_t>();
    if (v < 0) return false;
    out.duration = v;
  }
  out.flags.fill(0);
  for (std::size_t f = 0; f < kNumFlags; ++f)
    if (auto it = j.find(kFlagNames[f]); it != j.end() && it->is_number_integer())
      out.flags[f] = it->get<int>() != 0 ? 1 : 0;
  out.item_type = j.value("type", "note");
  return true;
}

}  // namespace

std::vector<UserHistory> parse_log(std::istream& in, ParseStats* stats) {
  std::vector<UserHistory> users;
  std::string line;
  std::size_t lineno = 0;
  ParseStats local;
  ParseStats& st = stats ? *stats : local;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("user_id") ||
        !j["user_id"].is_string() || !j.contains("data") ||
        !j["data"].is_object()) {
      ++st.bad_lines;
      st.errors.push_back("line " + std::to_string(lineno) +
                          ": malformed record");
      continue;
    }
    UserHistory h;
    h.user_id = j["user_id"].get<std::string>();
    const json& data = j["data"];
    for (std::size_t s = 0; s < kNumScenarios; ++s) {
      auto arr = data.find(kScenarioKeys[s]);
      if (arr == data.end() || !arr->is_array()) continue;
      for (const auto& ev : *arr) {
        InteractionEvent e;
        if (parse_event(ev, (Scenario)s, e))
          h.events[s].push_back(std::move(e));
        else
          ++st.dropped_events;
      }
      std::stable_sort(h.events[s].begin(), h.events[s].end(),
                       [](const InteractionEvent& a, const InteractionEvent& b) {
                         return a.timestamp < b.timestamp;
                       });
    }
    ++st.records;
    users.push_back(std::move(h));
  }
  return users;
}

std::string serialize_user(const UserHistory& h) {
  json data = json::object();
  for (std::size_t s = 0; s < kNumScenarios; ++s) {
    json arr = json::array();
    for (const auto& e : h.events[s]) {
      json ev;
      ev["duration"] = e.duration;
      for (std::size_t f = 0; f < kNumFlags; ++f)
        ev[kFlagNames[f]] = (int)e.flags[f];
      ev["item_id"] = e.item_id;
      ev["timestamp"] = e.timestamp;
      ev["type"] = e.item_type;
      arr.push_back(std::move(ev));
    }
    data[kScenarioKeys[s]] = std::move(arr);
  }
  json rec;
  rec["user_id"] = h.user_id;
  rec["data"] = std::move(data);
  return rec.dump();
}

void write_log(std::ostream& out, const std::vector<UserHistory>& users) {
  for (const auto& h : users) out << serialize_user(h) << '\n';
}

ValidationResult validate_user(const UserHistory& h, const ValidityPolicy& p) {
  auto valid_clicks = [&p](const std::vector<InteractionEvent>& evs) {
    int n = 0;
    for (const auto& e : evs)
      if (e.flag(kClick) && e.duration > p.min_click_duration_s) ++n;
    return n;
  };
  const int hf = valid_clicks(h.of(Scenario::homefeed));
  if (hf < p.min_homefeed_clicks)
    return {false, "homefeed valid clicks " + std::to_string(hf) + " < " +
                       std::to_string(p.min_homefeed_clicks)};
  const int ads = valid_clicks(h.of(Scenario::advertisements));
  if (ads < p.min_ads_clicks)
    return {false, "ads valid clicks " + std::to_string(ads) + " < " +
                       std::to_string(p.min_ads_clicks)};
  return {true, ""};
}

std::optional<EvalSplit> temporal_split(const UserHistory& h,
                                        std::mt19937_64& rng,
                                        const std::vector<std::string>& catalog_ids,
                                        std::size_t pool_size,
                                        std::size_t min_prefix) {
  auto timeline = merged_timeline(h);
  const std::size_t n = timeline.size();
  std::vector<std::size_t> admissible;
  if (n >= min_prefix + 3) {
    for (std::size_t c = std::max<std::size_t>(min_prefix, 1); c + 3 <= n; ++c)
      if (timeline[c - 1].timestamp < timeline[c].timestamp)
        admissible.push_back(c);
  }
  if (admissible.empty()) return std::nullopt;
  const std::size_t c =
      admissible[std::uniform_int_distribution<std::size_t>(
          0, admissible.size() - 1)(rng)];

  EvalSplit split;
  split.input_events.assign(timeline.begin(), timeline.begin() + (long)c);
  for (std::size_t k = 0; k < 3; ++k) {
    split.targets.push_back(timeline[c + k].item_id);
    split.target_scenarios.push_back(timeline[c + k].scenario);
  }
  split.t_cut = timeline[c].timestamp;

  std::unordered_set<std::string> in_pool(split.targets.begin(),
                                          split.targets.end());
  const std::size_t want = pool_size > in_pool.size()
                               ? pool_size - in_pool.size()
                               : 0;
  std::uniform_int_distribution<std::size_t> pick(0, catalog_ids.size() - 1);
  std::size_t taken = 0, attempts = 0;
  const std::size_t max_attempts = 100 * pool_size + 1000;
  while (taken < want && attempts < max_attempts) {
    ++attempts;
    if (in_pool.insert(catalog_ids[pick(rng)]).second) ++taken;
  }
  split.candidate_pool.assign(in_pool.begin(), in_pool.end());
  std::sort(split.candidate_pool.begin(), split.candidate_pool.end());
  return split;
}

}  // namespace crossrec
