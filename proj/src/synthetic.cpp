#include "crossrec/synthetic.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"

namespace crossrec {

using nlohmann::json;

std::vector<std::string> Catalog::ids() const {
  std::vector<std::string> out;
  out.reserve(items.size());
  for (const auto& it : items) out.push_back(it.item_id);
  return out;
}

void Catalog::rebuild_index() {
  by_id.clear();
  by_topic.clear();
  std::size_t max_topic = 0;
  for (std::size_t i = 0; i < items.size(); ++i) {
    by_id[items[i].item_id] = i;
    max_topic = std::max(max_topic, items[i].topic);
  }
  by_topic.resize(max_topic + 1);
  for (std::size_t i = 0; i < items.size(); ++i)
    by_topic[items[i].topic].push_back(i);
}

namespace {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

std::string item_name(std::size_t i) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "it%08zu", i);
  return buf;
}

struct ScenarioProfile {
  std::vector<std::size_t> topics;   // this scenario's topic set
  std::vector<double> cum_weights;   // cumulative mixture over topics
};

std::size_t sample_topic(const ScenarioProfile& p, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double r = u(rng);
  for (std::size_t i = 0; i < p.topics.size(); ++i)
    if (r < p.cum_weights[i]) return p.topics[i];
  return p.topics.back();
}

}  // namespace

SyntheticData generate_synthetic(const GeneratorConfig& cfg,
                                 std::uint64_t seed) {
  if (cfg.num_users == 0 || cfg.num_items == 0 || cfg.num_topics == 0)
    throw ConfigError("generate_synthetic: users, items and topics must be > 0");
  if (cfg.max_topics_per_user == 0 || cfg.min_topics_per_user == 0 ||
      cfg.min_topics_per_user > cfg.max_topics_per_user)
    throw ConfigError(
        "generate_synthetic: need 1 <= min_topics_per_user <= "
        "max_topics_per_user");
  if (cfg.rho < 0.0 || cfg.rho > 1.0)
    throw ConfigError("generate_synthetic: rho must be in [0,1]");
  if (cfg.emerging_weight < 0.0 || cfg.emerging_weight > 1.0 ||
      cfg.emerging_frac < 0.0 || cfg.emerging_frac > 1.0)
    throw ConfigError(
        "generate_synthetic: emerging_weight and emerging_frac must be in "
        "[0,1]");

  SyntheticData data;
  std::mt19937_64 rng(mix64(seed));

  // topic word pools and visual centroids are pure functions of (seed, topic)
  std::vector<std::vector<std::size_t>> pools(cfg.num_topics);
  std::vector<std::vector<double>> centroids(cfg.num_topics);
  for (std::size_t t = 0; t < cfg.num_topics; ++t) {
    pools[t].resize(cfg.topic_pool_size);
    for (std::size_t w = 0; w < cfg.topic_pool_size; ++w)
      pools[t][w] = mix64(seed * 1315423911ull + t * 2654435761ull + w) %
                    cfg.vocab_size;
    centroids[t].resize(cfg.visual_dim);
    std::mt19937_64 trng(mix64(seed ^ (t + 1)));
    std::normal_distribution<double> g(0.0, 1.0);
    for (auto& v : centroids[t]) v = g(trng);
  }

  data.catalog.items.resize(cfg.num_items);
  std::uniform_int_distribution<std::size_t> topic_pick(0, cfg.num_topics - 1);
  std::uniform_int_distribution<std::size_t> word_pick(0, cfg.topic_pool_size - 1);
  std::normal_distribution<double> noise(0.0, 0.1);
  for (std::size_t i = 0; i < cfg.num_items; ++i) {
    CatalogItem& it = data.catalog.items[i];
    it.item_id = item_name(i);
    it.topic = topic_pick(rng);
    it.tokens.resize(cfg.tokens_per_item);
    for (auto& tok : it.tokens) tok = pools[it.topic][word_pick(rng)];
    it.visual.resize(cfg.visual_dim);
    for (std::size_t d = 0; d < cfg.visual_dim; ++d)
      it.visual[d] = centroids[it.topic][d] + noise(rng);
  }
  data.catalog.rebuild_index();

  // users only draw interests from topics that actually have items
  std::vector<std::size_t> populated;
  for (std::size_t t = 0; t < data.catalog.by_topic.size(); ++t)
    if (!data.catalog.by_topic[t].empty()) populated.push_back(t);
  std::uniform_int_distribution<std::size_t> populated_pick(
      0, populated.size() - 1);

  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::uniform_int_distribution<std::int64_t> ts_pick(
      cfg.base_time - cfg.horizon_s, cfg.base_time - 1);
  std::uniform_int_distribution<std::int64_t> dur_pick(1, 80);

  data.users.resize(cfg.num_users);
  for (std::size_t ui = 0; ui < cfg.num_users; ++ui) {
    UserHistory& h = data.users[ui];
    char name[24];
    std::snprintf(name, sizeof(name), "u%07zu", ui);
    h.user_id = name;

    const std::size_t ntopics =
        (std::size_t)std::uniform_int_distribution<int>(
            (int)cfg.min_topics_per_user, (int)cfg.max_topics_per_user)(rng);
    auto draw_topics = [&](std::size_t k) {
      std::vector<std::size_t> t;
      while (t.size() < std::min(k, populated.size())) {
        std::size_t cand = populated[populated_pick(rng)];
        if (std::find(t.begin(), t.end(), cand) == t.end()) t.push_back(cand);
      }
      return t;
    };
    const bool shared = u01(rng) < cfg.rho;
    std::vector<std::size_t> shared_topics = draw_topics(ntopics);

    std::array<ScenarioProfile, kNumScenarios> profile;
    for (std::size_t s = 0; s < kNumScenarios; ++s) {
      ScenarioProfile& p = profile[s];
      p.topics = shared ? shared_topics : draw_topics(ntopics);
      // each scenario emphasises a different member of the topic set:
      // homefeed the first, advertisements the second, search the last —
      // and homefeed leaves the search-favored topic out of its steady
      // mixture entirely (it only appears via the emerging-interest drift)
      std::size_t dom = 0;
      if ((Scenario)s == Scenario::advertisements)
        dom = std::min<std::size_t>(1, p.topics.size() - 1);
      if ((Scenario)s == Scenario::homefeed && p.topics.size() > 1)
        p.topics.pop_back();
      const std::size_t k = p.topics.size();
      const bool uniform = (Scenario)s == Scenario::search;
      p.cum_weights.resize(k);
      double acc = 0.0;
      for (std::size_t i = 0; i < k; ++i) {
        double w = (k == 1 || uniform)
                       ? 1.0 / (double)k
                       : (i == dom ? cfg.dominant_weight
                                   : (1.0 - cfg.dominant_weight) /
                                         (double)(k - 1));
        acc += w;
        p.cum_weights[i] = acc;
      }
    }
    const std::size_t emerging_topic =
        profile[(std::size_t)Scenario::search].topics.back();
    const std::int64_t emerging_onset =
        cfg.base_time -
        (std::int64_t)((double)cfg.horizon_s * cfg.emerging_frac);

    const std::array<double, kNumScenarios> rates = {
        cfg.rate_homefeed, cfg.rate_ads, cfg.rate_search};
    const std::array<double, kNumScenarios> click_p = {0.9, 0.9, 0.85};
    for (std::size_t s = 0; s < kNumScenarios; ++s) {
      std::poisson_distribution<int> count_pick(rates[s]);
      const int count = std::max(1, count_pick(rng));
      auto& evs = h.events[s];
      evs.resize((std::size_t)count);
      for (auto& e : evs) {
        e.scenario = (Scenario)s;
        e.timestamp = ts_pick(rng);
        std::size_t topic = sample_topic(profile[s], rng);
        if (e.scenario == Scenario::homefeed && shared && ntopics > 1 &&
            e.timestamp >= emerging_onset) {
          // adoption ramps up linearly across the emerging window
          const double span = (double)(cfg.base_time - emerging_onset);
          const double phase =
              span > 0.0 ? (double)(e.timestamp - emerging_onset) / span : 1.0;
          if (u01(rng) < cfg.emerging_weight * phase) topic = emerging_topic;
        }
        const auto& pool = data.catalog.by_topic[topic];
        const std::size_t idx =
            pool[std::uniform_int_distribution<std::size_t>(0, pool.size() - 1)(
                rng)];
        e.item_id = data.catalog.items[idx].item_id;
        e.flags.fill(0);
        const bool clicked = u01(rng) < click_p[s];
        e.flags[kClick] = clicked;
        e.duration = clicked ? dur_pick(rng) : 0;
        e.flags[kLike] = u01(rng) < 0.15;
        e.flags[kCollect] = u01(rng) < 0.08;
        e.flags[kComment] = u01(rng) < 0.05;
        e.flags[kShare] = u01(rng) < 0.05;
        e.flags[kFollow] = u01(rng) < 0.02;
        e.flags[kHide] = u01(rng) < 0.01;
        e.flags[kMessage] = u01(rng) < 0.01;
        e.flags[kPagetime] = u01(rng) < 0.5;
        e.flags[kReadComment] = u01(rng) < 0.1;
        e.flags[kVideoend] = u01(rng) < 0.2;
        e.flags[kClickProfile] = u01(rng) < 0.03;
      }
      std::stable_sort(evs.begin(), evs.end(),
                       [](const InteractionEvent& a, const InteractionEvent& b) {
                         return a.timestamp < b.timestamp;
                       });
    }
  }
  return data;
}

void write_catalog(std::ostream& out, const Catalog& c) {
  for (const auto& it : c.items) {
    json j;
    j["item_id"] = it.item_id;
    j["tokens"] = it.tokens;
    j["visual"] = it.visual;
    j["topic"] = it.topic;
    out << j.dump() << '\n';
  }
}

Catalog read_catalog(std::istream& in) {
  Catalog c;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json j = json::parse(line);
    CatalogItem it;
    it.item_id = j.at("item_id").get<std::string>();
    it.tokens = j.at("tokens").get<std::vector<std::size_t>>();
    if (j.contains("visual")) it.visual = j["visual"].get<std::vector<double>>();
    it.topic = j.value("topic", 0);
    c.items.push_back(std::move(it));
  }
  c.rebuild_index();
  return c;
}

}  // namespace crossrec
