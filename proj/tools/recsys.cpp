// recsys: one binary for the whole pipeline — synthetic data generation,
// training, offline evaluation, mixing ablations, index building, top-k
// retrieval, serving benchmarks, and report pretty-printing.
//
// Exit codes: 0 success, 1 usage error, 2 data/config error, 3 numeric
// failure.
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "crossrec/config.hpp"
#include "crossrec/retrieval.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace crossrec;

namespace {

struct Globals {
  std::string config_path;
  std::string data_dir = "data";
  std::optional<std::uint64_t> seed;
  int threads = 0;
};

struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

AppConfig resolve_config(const Globals& g) {
  AppConfig cfg;
  if (!g.config_path.empty()) cfg = load_config(g.config_path);
  if (g.seed) {
    cfg.train.seed = *g.seed;
    cfg.eval.seed = *g.seed;
  }
  return cfg;
}

std::uint64_t pick_seed(const Globals& g, std::uint64_t fallback) {
  return g.seed ? *g.seed : fallback;
}

SyntheticData load_data(const std::string& dir) {
  const std::string cat_path = dir + "/catalog.jsonl";
  const std::string log_path = dir + "/log.jsonl";
  std::ifstream cat(cat_path);
  if (!cat) throw DataError("missing catalog: " + cat_path);
  std::ifstream log(log_path);
  if (!log) throw DataError("missing event log: " + log_path);
  SyntheticData data;
  data.catalog = read_catalog(cat);
  ParseStats stats;
  data.users = parse_log(log, &stats);
  if (stats.bad_lines > 0)
    std::cerr << "warning: " << stats.bad_lines << " malformed log lines\n";
  if (data.users.empty()) throw DataError("no users in " + log_path);
  return data;
}

Model load_model(const std::string& path) {
  if (!fs::exists(path)) throw DataError("missing checkpoint: " + path);
  return Model::load(path);
}

json report_json(const EvalResult& r, const EvalOptions& opt) {
  json hr, ndcg;
  for (const auto& [k, v] : r.metrics.hr) hr[std::to_string(k)] = v;
  for (const auto& [k, v] : r.metrics.ndcg) ndcg[std::to_string(k)] = v;
  return json{{"type", "eval"},
              {"pool_size", opt.pool_size},
              {"evaluated_users", r.evaluated_users},
              {"skipped_users", r.skipped_users},
              {"hr", hr},
              {"ndcg", ndcg},
              {"mrr", r.metrics.mrr},
              {"mrr_x100", r.metrics.mrr * 100.0}};
}

void print_report_table(const json& r, std::ostream& os) {
  os << "pool_size " << r.value("pool_size", 0) << "   users "
     << r.value("evaluated_users", 0) << " evaluated / "
     << r.value("skipped_users", 0) << " skipped\n";
  char line[128];
  std::snprintf(line, sizeof line, "%8s %10s %10s\n", "K", "HR@K", "NDCG@K");
  os << line;
  for (auto it = r["hr"].begin(); it != r["hr"].end(); ++it) {
    const std::string& k = it.key();
    std::snprintf(line, sizeof line, "%8s %10.4f %10.4f\n", k.c_str(),
                  it.value().get<double>(),
                  r["ndcg"].value(k, 0.0));
    os << line;
  }
  std::snprintf(line, sizeof line, "MRR_x100 %10.4f\n",
                r.value("mrr_x100", 0.0));
  os << line;
}

void write_json(const json& j, const std::string& path) {
  std::ofstream os(path);
  os << j.dump(2) << '\n';
  if (!os) throw DataError("cannot write " + path);
}

int run(int argc, char** argv) {
  CLI::App app{"cross-scenario sequential recommender toolkit"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--config", g.config_path, "JSON config file");
  app.add_option("--data-dir", g.data_dir, "dataset directory");
  std::uint64_t seed_opt = 0;
  auto* seed_flag =
      app.add_option("--seed", seed_opt, "seed override for all stages");
  app.add_option("--threads", g.threads, "worker threads (0 = library default)");

  // --- generate ---
  auto* cmd_gen = app.add_subcommand("generate", "write a synthetic dataset");
  std::size_t gen_users = 0, gen_items = 0;
  double gen_rho = -1.0;
  cmd_gen->add_option("--users", gen_users, "override user count");
  cmd_gen->add_option("--items", gen_items, "override item count");
  cmd_gen->add_option("--rho", gen_rho,
                      "cross-scenario interest correlation in [0,1]");

  // --- train ---
  auto* cmd_train = app.add_subcommand("train", "train a model");
  std::string train_out, train_stats;
  std::string train_strategy;
  cmd_train->add_option("--out", train_out, "checkpoint path");
  cmd_train->add_option("--stats", train_stats, "per-step stats JSONL");
  cmd_train->add_option("--strategy", train_strategy, "mixing strategy");

  // --- eval ---
  auto* cmd_eval = app.add_subcommand("eval", "offline ranking evaluation");
  std::string eval_model, eval_out;
  std::size_t eval_pool = 0, eval_max_users = 0;
  std::vector<std::string> eval_inputs;
  std::string eval_target;
  cmd_eval->add_option("--model", eval_model, "checkpoint path");
  cmd_eval->add_option("--out", eval_out, "report JSON path");
  cmd_eval->add_option("--pool", eval_pool, "candidate pool size");
  cmd_eval->add_option("--max-users", eval_max_users, "user cap");
  cmd_eval->add_option("--input-scenarios", eval_inputs,
                       "visible input scenarios");
  cmd_eval->add_option("--target-scenario", eval_target,
                       "restrict targets to one scenario");

  // --- ablate ---
  auto* cmd_ablate =
      app.add_subcommand("ablate", "train+eval every mixing strategy");
  std::string ablate_out;
  std::vector<std::string> ablate_strategies;
  cmd_ablate->add_option("--out", ablate_out, "report JSON path");
  cmd_ablate->add_option("--strategies", ablate_strategies,
                         "subset of strategies to run");

  // --- index ---
  auto* cmd_index = app.add_subcommand("index", "build the item index");
  std::string index_model, index_out;
  cmd_index->add_option("--model", index_model, "checkpoint path");
  cmd_index->add_option("--out", index_out, "index path");

  // --- retrieve ---
  auto* cmd_ret = app.add_subcommand("retrieve", "top-k items for a user");
  std::string ret_model, ret_index, ret_user;
  std::size_t ret_k = 10;
  cmd_ret->add_option("--model", ret_model, "checkpoint path");
  cmd_ret->add_option("--index", ret_index, "index path");
  cmd_ret->add_option("--user", ret_user, "user_id from the event log")
      ->required();
  cmd_ret->add_option("-k,--k", ret_k, "results to return");

  // --- bench ---
  auto* cmd_bench = app.add_subcommand("bench", "serving benchmarks");
  std::vector<std::size_t> bench_widths = {32, 64, 128};
  std::size_t bench_count = 200, bench_warmup = 20;
  std::string bench_out;
  cmd_bench->add_option("--widths", bench_widths, "encoder widths to time");
  cmd_bench->add_option("--count", bench_count, "timed iterations");
  cmd_bench->add_option("--warmup", bench_warmup, "untimed warmup iterations");
  cmd_bench->add_option("--out", bench_out, "report JSON path");

  // --- report ---
  auto* cmd_report = app.add_subcommand("report", "pretty-print a report");
  std::string report_in;
  cmd_report->add_option("--in", report_in, "report JSON path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }
  if (seed_flag->count() > 0) g.seed = seed_opt;
  if (g.threads > 0) ad::set_num_threads(g.threads);
  AppConfig cfg = resolve_config(g);

  if (cmd_gen->parsed()) {
    if (gen_users > 0) cfg.generator.num_users = gen_users;
    if (gen_items > 0) cfg.generator.num_items = gen_items;
    if (gen_rho >= 0.0) cfg.generator.rho = gen_rho;
    auto data = generate_synthetic(cfg.generator, pick_seed(g, 1));
    fs::create_directories(g.data_dir);
    std::ofstream cat(g.data_dir + "/catalog.jsonl");
    write_catalog(cat, data.catalog);
    std::ofstream log(g.data_dir + "/log.jsonl");
    write_log(log, data.users);
    if (!cat || !log) throw DataError("cannot write into " + g.data_dir);
    std::size_t events = 0;
    for (const auto& u : data.users) events += u.total_events();
    std::cout << json{{"users", data.users.size()},
                      {"items", data.catalog.items.size()},
                      {"events", events},
                      {"rho", cfg.generator.rho}}
                     .dump()
              << '\n';
    return 0;
  }

  if (cmd_train->parsed()) {
    auto data = load_data(g.data_dir);
    if (!train_strategy.empty()) {
      auto s = mix_strategy_from_name(train_strategy);
      if (!s) throw ConfigError("unknown strategy " + train_strategy);
      cfg.model.mixer.strategy = *s;
    }
    const std::uint64_t seed = pick_seed(g, cfg.train.seed);
    cfg.train.seed = seed;
    if (!train_stats.empty()) cfg.train.stats_path = train_stats;
    Model model(cfg.model, seed);
    TrainStats stats = train(model, data, cfg.train);
    for (double l : stats.epoch_loss)
      if (!std::isfinite(l)) {
        std::cerr << "error: non-finite training loss\n";
        return 3;
      }
    if (stats.rejected_steps > 0) {
      std::cerr << "error: " << stats.rejected_steps
                << " optimizer steps rejected (non-finite gradients)\n";
      return 3;
    }
    const std::string out =
        train_out.empty() ? g.data_dir + "/model.ckpt" : train_out;
    model.save(out);
    std::cout << json{{"checkpoint", out},
                      {"steps", stats.steps},
                      {"trained_users", stats.trained_users},
                      {"skipped_users", stats.skipped_users},
                      {"epoch_loss", stats.epoch_loss},
                      {"tau", model.temperature()->val[0]}}
                     .dump()
              << '\n';
    return 0;
  }

  if (cmd_eval->parsed()) {
    auto data = load_data(g.data_dir);
    Model model = load_model(
        eval_model.empty() ? g.data_dir + "/model.ckpt" : eval_model);
    EvalOptions opt = cfg.eval;
    if (g.seed) opt.seed = *g.seed;
    if (eval_pool > 0) opt.pool_size = eval_pool;
    if (eval_max_users > 0) opt.max_users = eval_max_users;
    if (!eval_inputs.empty()) {
      opt.input_scenarios = {false, false, false};
      for (const auto& name : eval_inputs) {
        auto s = scenario_from_name(name);
        if (!s) throw ConfigError("unknown scenario " + name);
        opt.input_scenarios[(std::size_t)*s] = true;
      }
    }
    if (!eval_target.empty()) {
      auto s = scenario_from_name(eval_target);
      if (!s) throw ConfigError("unknown scenario " + eval_target);
      opt.target_scenario = s;
    }
    EvalResult r = evaluate(model, data, opt);
    if (r.evaluated_users == 0) throw DataError("no evaluable users");
    json rep = report_json(r, opt);
    if (!eval_out.empty()) write_json(rep, eval_out);
    std::cout << rep.dump() << '\n';
    print_report_table(rep, std::cerr);
    return 0;
  }

  if (cmd_ablate->parsed()) {
    auto data = load_data(g.data_dir);
    std::vector<MixStrategy> strategies;
    if (ablate_strategies.empty()) {
      strategies = {MixStrategy::sorted_by_timestamp, MixStrategy::naive,
                    MixStrategy::pe_seq_only, MixStrategy::pe_gap_only,
                    MixStrategy::two_d};
    } else {
      for (const auto& name : ablate_strategies) {
        auto s = mix_strategy_from_name(name);
        if (!s) throw ConfigError("unknown strategy " + name);
        strategies.push_back(*s);
      }
    }
    const std::uint64_t seed = pick_seed(g, cfg.train.seed);
    cfg.train.seed = seed;
    EvalOptions opt = cfg.eval;
    if (g.seed) opt.seed = *g.seed;
    auto rows = run_ablation(cfg.model, data, cfg.train, opt, strategies, seed);
    json rep{{"type", "ablation"}, {"rows", json::array()}};
    for (const auto& row : rows) {
      json r = report_json(row.result, opt);
      r["strategy"] = mix_strategy_name(row.strategy);
      r["final_loss"] = row.train_stats.epoch_loss.empty()
                            ? 0.0
                            : row.train_stats.epoch_loss.back();
      rep["rows"].push_back(std::move(r));
    }
    if (!ablate_out.empty()) write_json(rep, ablate_out);
    std::cout << rep.dump() << '\n';
    for (const auto& r : rep["rows"]) {
      std::cerr << "--- " << r["strategy"].get<std::string>() << " ---\n";
      print_report_table(r, std::cerr);
    }
    return 0;
  }

  if (cmd_index->parsed()) {
    auto data = load_data(g.data_dir);
    Model model = load_model(
        index_model.empty() ? g.data_dir + "/model.ckpt" : index_model);
    ItemIndex idx = ItemIndex::build(model, data.catalog);
    const std::string out =
        index_out.empty() ? g.data_dir + "/items.redx" : index_out;
    idx.save(out);
    std::cout << json{{"index", out},
                      {"items", idx.size()},
                      {"dim", idx.dim},
                      {"bytes", fs::file_size(out)}}
                     .dump()
              << '\n';
    return 0;
  }

  if (cmd_ret->parsed()) {
    auto data = load_data(g.data_dir);
    Model model = load_model(
        ret_model.empty() ? g.data_dir + "/model.ckpt" : ret_model);
    ItemIndex idx = ItemIndex::load(
        ret_index.empty() ? g.data_dir + "/items.redx" : ret_index);
    const UserHistory* user = nullptr;
    for (const auto& u : data.users)
      if (u.user_id == ret_user) {
        user = &u;
        break;
      }
    if (user == nullptr) throw DataError("unknown user " + ret_user);
    const ModelConfig& mc = model.config();
    MixedSequence ms = mix(*user, mc.mixer.quota, mc.mixer.strategy);
    if (ms.entries.empty()) throw DataError("user has no events: " + ret_user);
    Tensor seq = model.sequence_items_cached(ms, data.catalog, nullptr);
    InterestSet interests = model.encode_user(ms, seq);
    if (ret_k > idx.size())
      std::cerr << "warning: k clamped to index size " << idx.size() << '\n';
    for (const auto& hit : topk(idx, interests.vectors, ret_k))
      std::cout << json{{"item_id", hit.item_id}, {"score", hit.score}}.dump()
                << '\n';
    return 0;
  }

  if (cmd_bench->parsed()) {
    auto data = load_data(g.data_dir);
    json rep{{"type", "bench"}, {"encoding", json::array()}};
    for (std::size_t d : bench_widths) {
      ModelConfig mc = cfg.model;
      mc.d = d;
      Model model(mc, pick_seed(g, 1));
      LatencyStats s = bench_encoding(model, data.catalog, bench_count,
                                      bench_warmup);
      rep["encoding"].push_back(json{{"d", d},
                                     {"sps", s.per_second},
                                     {"p50_us", s.p50_us},
                                     {"p95_us", s.p95_us},
                                     {"p99_us", s.p99_us}});
    }
    {
      Model model(cfg.model, pick_seed(g, 1));
      ItemIndex idx = ItemIndex::build(model, data.catalog);
      std::mt19937_64 rng(pick_seed(g, 1));
      std::normal_distribution<double> nd;
      std::vector<Tensor> queries;
      for (std::size_t i = 0; i < std::max<std::size_t>(1, bench_count); ++i) {
        Tensor q({1, idx.dim});
        for (auto& x : q.vec()) x = nd(rng);
        queries.push_back(std::move(q));
      }
      LatencyStats s = bench_topk(idx, queries, 100, bench_warmup);
      rep["retrieval"] = json{{"items", idx.size()},
                              {"k", 100},
                              {"qps", s.per_second},
                              {"p50_us", s.p50_us},
                              {"p95_us", s.p95_us},
                              {"p99_us", s.p99_us}};
    }
    if (!bench_out.empty()) write_json(rep, bench_out);
    std::cout << rep.dump() << '\n';
    return 0;
  }

  if (cmd_report->parsed()) {
    std::ifstream is(report_in);
    if (!is) throw DataError("cannot open " + report_in);
    json rep;
    try {
      rep = json::parse(is);
    } catch (const json::exception& e) {
      throw DataError("bad report JSON: " + std::string(e.what()));
    }
    if (rep.value("type", "") == "ablation") {
      for (const auto& r : rep["rows"]) {
        std::cout << "--- " << r["strategy"].get<std::string>() << " ---\n";
        print_report_table(r, std::cout);
      }
    } else if (rep.contains("hr")) {
      print_report_table(rep, std::cout);
    } else {
      std::cout << rep.dump(2) << '\n';
    }
    return 0;
  }

  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const ShapeError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return 3;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
