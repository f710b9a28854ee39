#include <algorithm>
#include <fstream>
#include <numeric>

#include "crossrec/training.hpp"
#include "json.hpp"

namespace crossrec {

using ad::Var;

namespace {
std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}
}  // namespace

TrainStats train(Model& model, const SyntheticData& data,
                 const TrainConfig& cfg) {
  const ModelConfig& mc = model.config();
  TrainStats stats;

  std::vector<MixedSequence> seqs;
  const std::size_t user_limit =
      cfg.max_users == 0 ? data.users.size()
                         : std::min(cfg.max_users, data.users.size());
  for (std::size_t ui = 0; ui < user_limit; ++ui) {
    const UserHistory& user = data.users[ui];
    MixedSequence ms = mix(user, mc.mixer.quota, mc.mixer.strategy);
    if (ms.entries.size() <= mc.window) {
      ++stats.skipped_users;
      continue;
    }
    seqs.push_back(std::move(ms));
  }
  stats.trained_users = seqs.size();
  if (seqs.empty()) {
    stats.epoch_loss.assign(cfg.epochs, 0.0);
    return stats;
  }

  Adam opt({cfg.lr});
  opt.clamp("tau", 1.0, 100.0);
  if (mc.frozen_item_tower) opt.freeze_prefix("item.");

  std::ofstream stats_os;
  if (!cfg.stats_path.empty()) {
    stats_os.open(cfg.stats_path);
    if (!stats_os)
      throw std::runtime_error("train: cannot write " + cfg.stats_path);
  }

  const Var tau = model.temperature();
  const std::size_t batch = std::max<std::size_t>(1, cfg.batch_size);
  std::size_t step = 0;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::unordered_map<std::string, Tensor> cache;
    std::vector<std::size_t> order(seqs.size());
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 shuffle_rng(mix64(cfg.seed) ^ mix64(epoch + 1));
    std::shuffle(order.begin(), order.end(), shuffle_rng);

    double epoch_sum = 0.0;
    std::size_t epoch_users = 0;
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t end = std::min(order.size(), start + batch);
      std::mt19937_64 step_rng(mix64(cfg.seed + step));

      std::unordered_set<std::string> positives;
      for (std::size_t b = start; b < end; ++b) {
        const auto& ms = seqs[order[b]];
        for (std::size_t j = ms.entries.size() - mc.window;
             j < ms.entries.size(); ++j)
          positives.insert(ms.entries[j].event.item_id);
      }
      std::vector<Var> negs;
      for (std::size_t idx :
           sample_negatives(data.catalog, positives, cfg.negatives, step_rng))
        negs.push_back(model.encode_item_var(data.catalog.items[idx]));

      Var total;
      std::size_t count = 0;
      for (std::size_t b = start; b < end; ++b) {
        const MixedSequence& ms = seqs[order[b]];
        const std::size_t L = ms.entries.size();
        const std::size_t vis = L - mc.window;

        Var item_vecs =
            cfg.detach_sequence_items
                ? ad::constant(
                      model.sequence_items_cached(ms, data.catalog, &cache))
                : model.sequence_items_var(ms, data.catalog);
        Var interests = model.encode_user_var(ms, item_vecs, true);

        std::vector<Var> targets;
        for (std::size_t j = vis; j < L; ++j) {
          const CatalogItem* it = data.catalog.find(ms.entries[j].event.item_id);
          if (it == nullptr)
            throw std::runtime_error("train: unknown item " +
                                     ms.entries[j].event.item_id);
          targets.push_back(model.encode_item_var(*it));
        }

        // next-item term through the best-matching interest
        const Tensor& iv = interests->val;
        const Tensor& pv = targets[0]->val;
        std::size_t best = 0;
        double best_dot = -2.0;
        for (std::size_t q = 0; q < iv.rows(); ++q) {
          double dot = 0.0;
          for (std::size_t j = 0; j < iv.cols(); ++j)
            dot += iv.at(q, j) * pv[j];
          if (dot > best_dot) {
            best_dot = dot;
            best = q;
          }
        }
        Var u = ad::slice_rows(interests, best, best + 1);
        Var user_loss = nce_loss(u, targets[0], negs, tau);
        if (cfg.lambda_w != 0.0)
          user_loss = ad::add(
              user_loss,
              ad::scale(window_contrastive_loss(interests, targets, negs, tau,
                                                step_rng),
                        cfg.lambda_w));
        total = total ? ad::add(total, user_loss) : user_loss;
        ++count;
      }

      Var loss = ad::scale(total, 1.0 / (double)count);
      ad::backward(loss);
      opt.step(model.params());

      epoch_sum += loss->val[0] * (double)count;
      epoch_users += count;
      if (stats_os)
        stats_os << nlohmann::json{{"step", step},
                                   {"epoch", epoch},
                                   {"users", count},
                                   {"loss", loss->val[0]},
                                   {"tau", tau->val[0]}}
                        .dump()
                 << '\n';
      ++step;
      ++stats.steps;
    }
    stats.epoch_loss.push_back(epoch_sum / (double)epoch_users);
  }
  stats.rejected_steps = opt.rejected_steps();
  return stats;
}

}  // namespace crossrec
