#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <random>

#include "crossrec/mixer.hpp"
#include "crossrec/params.hpp"
#include "doctest.h"

using namespace crossrec;

namespace {

InteractionEvent ev(const std::string& id, Scenario s, std::int64_t ts) {
  InteractionEvent e;
  e.item_id = id;
  e.scenario = s;
  e.timestamp = ts;
  return e;
}

UserHistory random_history(std::mt19937_64& rng, std::size_t max_per = 200) {
  UserHistory h;
  h.user_id = "u";
  for (std::size_t s = 0; s < kNumScenarios; ++s) {
    const std::size_t n = rng() % max_per;
    for (std::size_t i = 0; i < n; ++i) {
      auto e = ev("i" + std::to_string(rng() % 1000), (Scenario)s,
                  1000 + (std::int64_t)(rng() % 5000));
      e.flags[rng() % kNumFlags] = 1;
      h.events[s].push_back(e);
    }
    std::stable_sort(h.events[s].begin(), h.events[s].end(),
                     [](const InteractionEvent& a, const InteractionEvent& b) {
                       return a.timestamp < b.timestamp;
                     });
  }
  return h;
}

MixerTables make_tables(std::size_t d, std::size_t last_n,
                        std::mt19937_64& rng, ParamStore& ps) {
  return MixerTables{ps.get_or_create("action", kNumFlags, d, rng),
                     ps.get_or_create("hour", 24, d, rng),
                     ps.get_or_create("scenario", kNumScenarios, d, rng),
                     ps.get_or_create("pe_seq", last_n, d, rng),
                     ps.get_or_create("pe_gap", kGapBuckets, d, rng)};
}

}  // namespace

TEST_CASE("apply_quota keeps the most recent per scenario") {
  UserHistory h;
  for (int i = 0; i < 5; ++i)
    h.of(Scenario::homefeed).push_back(ev("h" + std::to_string(i),
                                          Scenario::homefeed, 100 + i));
  auto kept = apply_quota(h, {.n_h = 2, .n_a = 16, .n_s = 16});
  REQUIRE(kept[0].size() == 2);
  CHECK(kept[0][0].item_id == "h3");
  CHECK(kept[0][1].item_id == "h4");
  CHECK(kept[1].empty());
  CHECK(kept[2].empty());
}

TEST_CASE("apply_quota: 200/50/10 under 96/16/16 keeps 96/16/10") {
  UserHistory h;
  for (int i = 0; i < 200; ++i)
    h.of(Scenario::homefeed).push_back(ev("h", Scenario::homefeed, i));
  for (int i = 0; i < 50; ++i)
    h.of(Scenario::advertisements).push_back(ev("a", Scenario::advertisements, i));
  for (int i = 0; i < 10; ++i)
    h.of(Scenario::search).push_back(ev("s", Scenario::search, i));
  auto kept = apply_quota(h, {});
  CHECK(kept[0].size() == 96);
  CHECK(kept[1].size() == 16);
  CHECK(kept[2].size() == 10);
}

TEST_CASE("merge: chronological with scenario tags") {
  std::array<std::vector<InteractionEvent>, kNumScenarios> lists;
  lists[0] = {ev("h1", Scenario::homefeed, 100), ev("h2", Scenario::homefeed, 300)};
  lists[1] = {ev("a1", Scenario::advertisements, 200)};
  lists[2] = {ev("s1", Scenario::search, 50)};
  auto ms = merge(lists);
  REQUIRE(ms.entries.size() == 4);
  CHECK(ms.entries[0].event.item_id == "s1");
  CHECK(ms.entries[1].event.item_id == "h1");
  CHECK(ms.entries[2].event.item_id == "a1");
  CHECK(ms.entries[3].event.item_id == "h2");
  CHECK(ms.t_curr == 301);
  for (std::size_t j = 0; j < 4; ++j) {
    CHECK(ms.entries[j].seq_position == j);
    CHECK(ms.entries[j].time_gap == ms.t_curr - ms.entries[j].event.timestamp);
  }
}

TEST_CASE("merge: exact timestamp ties follow scenario priority") {
  std::array<std::vector<InteractionEvent>, kNumScenarios> lists;
  lists[2] = {ev("s", Scenario::search, 100)};
  lists[1] = {ev("a", Scenario::advertisements, 100)};
  lists[0] = {ev("h", Scenario::homefeed, 100)};
  auto ms = merge(lists);
  CHECK(ms.entries[0].event.item_id == "h");
  CHECK(ms.entries[1].event.item_id == "a");
  CHECK(ms.entries[2].event.item_id == "s");
}

TEST_CASE("merge: idempotent on an already merged list") {
  std::array<std::vector<InteractionEvent>, kNumScenarios> lists;
  lists[0] = {ev("h1", Scenario::homefeed, 10), ev("h2", Scenario::homefeed, 20)};
  auto once = merge(lists);
  std::array<std::vector<InteractionEvent>, kNumScenarios> again;
  for (const auto& e : once.entries) again[0].push_back(e.event);
  auto twice = merge(again);
  REQUIRE(twice.entries.size() == once.entries.size());
  for (std::size_t i = 0; i < once.entries.size(); ++i)
    CHECK(twice.entries[i].event == once.entries[i].event);
}

TEST_CASE("merge order equals a reference full sort over randomized histories") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 200; ++trial) {
    auto h = random_history(rng, 40);
    auto ms = merge(h.events);
    // reference: concatenate in scenario order, stable sort by (ts, scenario)
    std::vector<std::pair<std::int64_t, std::size_t>> ref;
    for (std::size_t s = 0; s < kNumScenarios; ++s)
      for (const auto& e : h.events[s]) ref.push_back({e.timestamp, s});
    std::stable_sort(ref.begin(), ref.end());
    REQUIRE(ms.entries.size() == ref.size());
    for (std::size_t i = 0; i < ref.size(); ++i) {
      CHECK(ms.entries[i].event.timestamp == ref[i].first);
      CHECK((std::size_t)ms.entries[i].event.scenario == ref[i].second);
    }
  }
}

TEST_CASE("gap buckets") {
  CHECK(gap_bucket(0) == 0);
  CHECK(gap_bucket(59) == 0);
  CHECK(gap_bucket(3600) == 5);  // floor(log2(61))
  CHECK(gap_bucket(10LL * 365 * 86400) == 22);
  CHECK(gap_bucket(60LL * ((1LL << 36) - 1)) == kGapBuckets - 1);  // clamp
}

TEST_CASE("hour conversion is UTC") {
  CHECK(hour_of(1749771247) == 23);
  CHECK(hour_of(0) == 0);
  CHECK(hour_of(86399) == 23);
}

TEST_CASE("quota and length invariants over 10k randomized histories") {
  std::mt19937_64 rng(22);
  MixQuota q;
  for (int trial = 0; trial < 10000; ++trial) {
    auto h = random_history(rng, 60);
    for (auto strategy : {MixStrategy::sorted_by_timestamp, MixStrategy::two_d}) {
      auto ms = mix(h, q, strategy);
      CHECK(ms.entries.size() <= q.last_n());
      if (strategy != MixStrategy::sorted_by_timestamp) {
        std::array<std::size_t, kNumScenarios> counts{};
        for (const auto& e : ms.entries) ++counts[(std::size_t)e.event.scenario];
        CHECK(counts[0] <= q.n_h);
        CHECK(counts[1] <= q.n_a);
        CHECK(counts[2] <= q.n_s);
      }
      for (std::size_t j = 1; j < ms.entries.size(); ++j) {
        CHECK(ms.entries[j - 1].event.timestamp <= ms.entries[j].event.timestamp);
        CHECK(ms.entries[j - 1].time_gap >= ms.entries[j].time_gap);
      }
    }
  }
}

TEST_CASE("fusion additivity") {
  std::mt19937_64 rng(23);
  const std::size_t d = 8;
  ParamStore ps;
  auto tables = make_tables(d, 16, rng, ps);
  MixerConfig cfg;
  cfg.quota = {.n_h = 8, .n_a = 4, .n_s = 4};

  auto h = random_history(rng, 6);
  auto ms = mix(h, cfg.quota, cfg.strategy);
  const std::size_t L = ms.entries.size();
  if (L == 0) return;
  Tensor items({L, d});
  std::uniform_real_distribution<double> u(-1, 1);
  for (auto& v : items.vec()) v = u(rng);

  auto fused = fuse_features(ms, ad::constant(items), tables, cfg);
  // zeroing the hour table shifts each row by exactly hour_table[hour]
  Tensor hour_backup = tables.hour->val;
  tables.hour->val.fill(0.0);
  auto fused0 = fuse_features(ms, ad::constant(items), tables, cfg);
  tables.hour->val = hour_backup;
  for (std::size_t j = 0; j < L; ++j) {
    const std::size_t hr = hour_of(ms.entries[j].event.timestamp);
    for (std::size_t c = 0; c < d; ++c)
      CHECK(fused->val.at(j, c) - fused0->val.at(j, c) ==
            doctest::Approx(tables.hour->val.at(hr, c)).epsilon(1e-12));
  }
}

TEST_CASE("event with all flags zero contributes no action embedding") {
  std::mt19937_64 rng(24);
  ParamStore ps;
  const std::size_t d = 8;
  auto tables = make_tables(d, 16, rng, ps);
  MixerConfig cfg;
  std::array<std::vector<InteractionEvent>, kNumScenarios> lists;
  lists[0] = {ev("x", Scenario::homefeed, 1000)};
  auto ms = merge(lists);
  Tensor items({1, d});
  auto fused = fuse_features(ms, ad::constant(items), tables, cfg);
  Tensor action_backup = tables.action->val;
  tables.action->val.fill(0.0);
  auto fused0 = fuse_features(ms, ad::constant(items), tables, cfg);
  tables.action->val = action_backup;
  CHECK(fused->val.vec() == fused0->val.vec());
}

TEST_CASE("hour 3 vs hour 4 rows differ by hour_table[3]-hour_table[4]") {
  std::mt19937_64 rng(25);
  ParamStore ps;
  const std::size_t d = 8;
  auto tables = make_tables(d, 16, rng, ps);
  MixerConfig cfg;
  std::array<std::vector<InteractionEvent>, kNumScenarios> lists;
  lists[0] = {ev("x", Scenario::homefeed, 3 * 3600 + 10),
              ev("x", Scenario::homefeed, 4 * 3600 + 10)};
  auto ms = merge(lists, 5 * 3600 + 10);  // equal gap buckets? no, but compare
  // use identical item vecs; difference = hour + pe_seq + pe_gap terms
  Tensor items({2, d});
  cfg.strategy = MixStrategy::naive;  // isolate: no positional codes
  auto fused = fuse_features(ms, ad::constant(items), tables, cfg);
  for (std::size_t c = 0; c < d; ++c)
    CHECK(fused->val.at(0, c) - fused->val.at(1, c) ==
          doctest::Approx(tables.hour->val.at(3, c) -
                          tables.hour->val.at(4, c))
              .epsilon(1e-12));
}

TEST_CASE("all five strategies selectable and give differing fused inputs") {
  std::mt19937_64 rng(26);
  ParamStore ps;
  const std::size_t d = 8;
  MixQuota q{.n_h = 12, .n_a = 3, .n_s = 3};
  auto tables = make_tables(d, q.last_n(), rng, ps);
  UserHistory h = random_history(rng, 30);
  std::vector<std::string> reprs;
  for (auto strategy :
       {MixStrategy::sorted_by_timestamp, MixStrategy::naive,
        MixStrategy::pe_seq_only, MixStrategy::pe_gap_only, MixStrategy::two_d}) {
    CHECK(mix_strategy_from_name(mix_strategy_name(strategy)) == strategy);
    MixerConfig cfg{.quota = q, .strategy = strategy};
    auto ms = mix(h, q, strategy);
    Tensor items({ms.entries.size(), d});
    auto fused = fuse_features(ms, ad::constant(items), tables, cfg);
    std::string r;
    for (double v : fused->val.vec()) r += std::to_string(v) + ",";
    reprs.push_back(std::to_string(ms.entries.size()) + "|" + r);
  }
  std::sort(reprs.begin(), reprs.end());
  CHECK(std::adjacent_find(reprs.begin(), reprs.end()) == reprs.end());
}

TEST_CASE("sequence longer than pe_seq table is an error") {
  std::mt19937_64 rng(27);
  ParamStore ps;
  auto tables = make_tables(4, 2, rng, ps);  // last_n=2 table
  std::array<std::vector<InteractionEvent>, kNumScenarios> lists;
  lists[0] = {ev("a", Scenario::homefeed, 1), ev("b", Scenario::homefeed, 2),
              ev("c", Scenario::homefeed, 3)};
  auto ms = merge(lists);
  CHECK_THROWS_AS(encode_positions(ms, tables, MixStrategy::two_d), ShapeError);
}
