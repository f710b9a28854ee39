#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <sstream>

#include "crossrec/events.hpp"
#include "crossrec/synthetic.hpp"
#include "doctest.h"

using namespace crossrec;

namespace {

// mean over users of P(random homefeed event topic == random search event
// topic); the cross-scenario interest-consistency signal
double topic_overlap(const SyntheticData& d) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& u : d.users) {
    const auto& hf = u.of(Scenario::homefeed);
    const auto& se = u.of(Scenario::search);
    if (hf.empty() || se.empty()) continue;
    std::size_t hits = 0;
    for (const auto& a : hf)
      for (const auto& b : se)
        if (d.catalog.find(a.item_id)->topic == d.catalog.find(b.item_id)->topic)
          ++hits;
    sum += (double)hits / ((double)hf.size() * (double)se.size());
    ++n;
  }
  return sum / (double)n;
}

std::string dump(const SyntheticData& d) {
  std::ostringstream os;
  write_catalog(os, d.catalog);
  write_log(os, d.users);
  return os.str();
}

}  // namespace

TEST_CASE("parse_log: single homefeed event, flags bit-exact") {
  std::istringstream in(
      R"({"user_id":"xxxx","data":{"homefeed_item_lastn":[{"duration":28,)"
      R"("is_click":1,"is_click_profile":0,"is_collect":0,"is_comment":0,)"
      R"("is_follow":0,"is_hide":0,"is_like":0,"is_message":1,"is_pagetime":1,)"
      R"("is_read_comment":1,"is_share":0,"is_videoend":0,)"
      R"("item_id":"684a48440000000023014319","page_key":0,)"
      R"("timestamp":1749771247,"type":"note"}],)"
      R"("ads_item_lastn":[],"search_item_lastn":[]}})");
  ParseStats st;
  auto users = parse_log(in, &st);
  REQUIRE(users.size() == 1);
  CHECK(st.bad_lines == 0);
  CHECK(st.dropped_events == 0);
  const auto& hf = users[0].of(Scenario::homefeed);
  REQUIRE(hf.size() == 1);
  CHECK(hf[0].item_id == "684a48440000000023014319");
  CHECK(hf[0].duration == 28);
  CHECK(hf[0].timestamp == 1749771247);
  CHECK(hf[0].flag(kClick));
  CHECK(hf[0].flag(kMessage));
  CHECK(hf[0].flag(kPagetime));
  CHECK(hf[0].flag(kReadComment));
  CHECK_FALSE(hf[0].flag(kLike));
  CHECK_FALSE(hf[0].flag(kVideoend));
  CHECK(users[0].of(Scenario::advertisements).empty());
  CHECK(users[0].of(Scenario::search).empty());
}

TEST_CASE("parse_log: empty data arrays give three empty lists, no error") {
  std::istringstream in(
      R"({"user_id":"a","data":{"homefeed_item_lastn":[],"ads_item_lastn":[],"search_item_lastn":[]}})");
  ParseStats st;
  auto users = parse_log(in, &st);
  REQUIRE(users.size() == 1);
  CHECK(st.bad_lines == 0);
  for (std::size_t s = 0; s < kNumScenarios; ++s)
    CHECK(users[0].events[s].empty());
}

TEST_CASE("parse_log: out-of-file-order events come back sorted") {
  std::istringstream in(
      R"({"user_id":"a","data":{"homefeed_item_lastn":[)"
      R"({"item_id":"x","timestamp":1749771247},)"
      R"({"item_id":"y","timestamp":1749732355}]}})");
  auto users = parse_log(in);
  const auto& hf = users[0].of(Scenario::homefeed);
  REQUIRE(hf.size() == 2);
  CHECK(hf[0].timestamp == 1749732355);
  CHECK(hf[1].timestamp == 1749771247);
}

TEST_CASE("parse_log: malformed line reported with number, parsing continues") {
  std::istringstream in(
      "{\"user_id\":\"a\",\"data\":{}}\n"
      "this is not json\n"
      "{\"user_id\":\"b\",\"data\":{}}\n");
  ParseStats st;
  auto users = parse_log(in, &st);
  CHECK(users.size() == 2);
  REQUIRE(st.bad_lines == 1);
  CHECK(st.errors[0].find("line 2") != std::string::npos);
}

TEST_CASE("parse_log: events missing item_id or timestamp dropped and counted") {
  std::istringstream in(
      R"({"user_id":"a","data":{"homefeed_item_lastn":[)"
      R"({"timestamp":100},{"item_id":"x"},{"item_id":"y","timestamp":100}]}})");
  ParseStats st;
  auto users = parse_log(in, &st);
  CHECK(st.dropped_events == 2);
  CHECK(users[0].of(Scenario::homefeed).size() == 1);
}

TEST_CASE("round-trip: parse_log after serialize is identity") {
  auto data = generate_synthetic({.num_users = 20, .num_items = 200,
                                  .num_topics = 5, .visual_dim = 8},
                                 42);
  std::ostringstream os;
  write_log(os, data.users);
  std::istringstream is(os.str());
  ParseStats st;
  auto back = parse_log(is, &st);
  CHECK(st.bad_lines == 0);
  CHECK(st.dropped_events == 0);
  REQUIRE(back.size() == data.users.size());
  for (std::size_t i = 0; i < back.size(); ++i) CHECK(back[i] == data.users[i]);
}

namespace {
UserHistory make_clicky_user(int hf_clicks, int ads_clicks, int duration) {
  UserHistory h;
  h.user_id = "u";
  for (int i = 0; i < hf_clicks; ++i) {
    InteractionEvent e;
    e.item_id = "h" + std::to_string(i);
    e.scenario = Scenario::homefeed;
    e.timestamp = 1000 + i;
    e.duration = duration;
    e.flags[kClick] = 1;
    h.of(Scenario::homefeed).push_back(e);
  }
  for (int i = 0; i < ads_clicks; ++i) {
    InteractionEvent e;
    e.item_id = "a" + std::to_string(i);
    e.scenario = Scenario::advertisements;
    e.timestamp = 2000 + i;
    e.duration = duration;
    e.flags[kClick] = 1;
    h.of(Scenario::advertisements).push_back(e);
  }
  return h;
}
}  // namespace

TEST_CASE("validate_user thresholds") {
  ValidityPolicy p;
  CHECK(validate_user(make_clicky_user(30, 5, 10), p).accepted);
  // duration == 5 is not a valid click: "exceeds" is strict
  CHECK_FALSE(validate_user(make_clicky_user(30, 5, 5), p).accepted);
  auto r = validate_user(make_clicky_user(29, 100, 10), p);
  CHECK_FALSE(r.accepted);
  CHECK(r.reason.find("homefeed") != std::string::npos);
}

TEST_CASE("validate_user is monotone in added valid clicks") {
  ValidityPolicy p;
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    auto h = make_clicky_user((int)(rng() % 40), (int)(rng() % 10),
                              (int)(rng() % 20));
    const bool before = validate_user(h, p).accepted;
    InteractionEvent extra;
    extra.item_id = "x";
    extra.scenario = Scenario::homefeed;
    extra.timestamp = 99999;
    extra.duration = 100;
    extra.flags[kClick] = 1;
    h.of(Scenario::homefeed).push_back(extra);
    if (before) CHECK(validate_user(h, p).accepted);
  }
}

TEST_CASE("generate_synthetic: determinism, byte-identical datasets") {
  GeneratorConfig cfg{.num_users = 30, .num_items = 300, .num_topics = 6,
                      .visual_dim = 8};
  CHECK(dump(generate_synthetic(cfg, 7)) == dump(generate_synthetic(cfg, 7)));
  CHECK(dump(generate_synthetic(cfg, 7)) != dump(generate_synthetic(cfg, 8)));
}

TEST_CASE("generate_synthetic: config errors") {
  CHECK_THROWS_AS(generate_synthetic({.num_users = 0}, 1), ConfigError);
  CHECK_THROWS_AS(generate_synthetic({.num_items = 0}, 1), ConfigError);
  CHECK_THROWS_AS(generate_synthetic({.num_topics = 0}, 1), ConfigError);
}

TEST_CASE("generate_synthetic: rho=1, one topic per user, same topic everywhere") {
  GeneratorConfig cfg{.num_users = 25, .num_items = 400, .num_topics = 8,
                      .visual_dim = 4, .rho = 1.0, .max_topics_per_user = 1};
  auto d = generate_synthetic(cfg, 11);
  for (const auto& u : d.users) {
    std::size_t topic = SIZE_MAX;
    for (const auto& evs : u.events)
      for (const auto& e : evs) {
        const auto* item = d.catalog.find(e.item_id);
        REQUIRE(item != nullptr);
        if (topic == SIZE_MAX) topic = item->topic;
        CHECK(item->topic == topic);
      }
  }
}

TEST_CASE("generate_synthetic: rho=0 overlap at chance level (Monte-Carlo)") {
  const std::size_t T = 20;
  GeneratorConfig cfg{.num_users = 1000, .num_items = 4000, .num_topics = T,
                      .visual_dim = 4,   .rho = 0.0,
                      .rate_homefeed = 20, .rate_search = 10, .rate_ads = 3};
  auto d = generate_synthetic(cfg, 5);
  // per-user overlap statistics against the analytic chance level 1/T
  std::vector<double> per_user;
  for (const auto& u : d.users) {
    const auto& hf = u.of(Scenario::homefeed);
    const auto& se = u.of(Scenario::search);
    if (hf.empty() || se.empty()) continue;
    std::size_t hits = 0;
    for (const auto& a : hf)
      for (const auto& b : se)
        if (d.catalog.find(a.item_id)->topic ==
            d.catalog.find(b.item_id)->topic)
          ++hits;
    per_user.push_back((double)hits / ((double)hf.size() * (double)se.size()));
  }
  double mean = 0;
  for (double v : per_user) mean += v;
  mean /= (double)per_user.size();
  double var = 0;
  for (double v : per_user) var += (v - mean) * (v - mean);
  var /= (double)(per_user.size() - 1);
  const double sem = std::sqrt(var / (double)per_user.size());
  CHECK(std::abs(mean - 1.0 / (double)T) < 3.0 * sem + 1e-9);
}

TEST_CASE("generate_synthetic: rho=1 overlap strictly above rho=0, every seed") {
  for (std::uint64_t seed : {1ull, 2ull, 3ull, 4ull, 5ull}) {
    GeneratorConfig hi{.num_users = 150, .num_items = 2000, .num_topics = 15,
                       .visual_dim = 4, .rho = 1.0,
                       .rate_homefeed = 20, .rate_search = 10, .rate_ads = 3};
    GeneratorConfig lo = hi;
    lo.rho = 0.0;
    CHECK(topic_overlap(generate_synthetic(hi, seed)) >
          topic_overlap(generate_synthetic(lo, seed)));
  }
}

TEST_CASE("temporal_split: 10-event timeline, deterministic pieces") {
  UserHistory h;
  h.user_id = "u";
  for (int i = 0; i < 10; ++i) {
    InteractionEvent e;
    e.item_id = "e" + std::to_string(i);
    e.scenario = Scenario::homefeed;
    e.timestamp = 100 + i;
    h.of(Scenario::homefeed).push_back(e);
  }
  std::vector<std::string> catalog;
  for (int i = 0; i < 200; ++i) catalog.push_back("c" + std::to_string(i));
  std::mt19937_64 rng(1);
  bool saw_cut6 = false;
  for (int trial = 0; trial < 200; ++trial) {
    auto s = temporal_split(h, rng, catalog, 50);
    REQUIRE(s.has_value());
    CHECK(s->targets.size() == 3);
    // no leakage
    for (const auto& e : s->input_events) CHECK(e.timestamp < s->t_cut);
    if (s->input_events.size() == 6) {
      saw_cut6 = true;
      CHECK(s->targets == std::vector<std::string>{"e6", "e7", "e8"});
    }
    // pool: exact size, unique, all targets present
    CHECK(s->candidate_pool.size() == 50);
    auto pool = s->candidate_pool;
    std::sort(pool.begin(), pool.end());
    CHECK(std::adjacent_find(pool.begin(), pool.end()) == pool.end());
    for (const auto& t : s->targets)
      CHECK(std::binary_search(pool.begin(), pool.end(), t));
  }
  CHECK(saw_cut6);
}

TEST_CASE("temporal_split: history too short is unavailable") {
  UserHistory h;
  h.user_id = "u";
  for (int i = 0; i < 3; ++i) {
    InteractionEvent e;
    e.item_id = "e" + std::to_string(i);
    e.scenario = Scenario::homefeed;
    e.timestamp = 100 + i;
    h.of(Scenario::homefeed).push_back(e);
  }
  std::mt19937_64 rng(1);
  std::vector<std::string> catalog{"a", "b", "c", "d"};
  CHECK_FALSE(temporal_split(h, rng, catalog, 4, 1).has_value());
}

TEST_CASE("temporal_split: never leaks on random synthetic users") {
  auto d = generate_synthetic({.num_users = 50, .num_items = 500,
                               .num_topics = 5, .visual_dim = 4},
                              9);
  auto ids = d.catalog.ids();
  std::mt19937_64 rng(2);
  for (const auto& u : d.users) {
    auto s = temporal_split(u, rng, ids, 100);
    if (!s) continue;
    std::int64_t max_in = 0;
    for (const auto& e : s->input_events)
      max_in = std::max(max_in, e.timestamp);
    CHECK(max_in < s->t_cut);
  }
}
