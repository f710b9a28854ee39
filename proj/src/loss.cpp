#include "crossrec/training.hpp"

namespace crossrec {

using ad::Var;

Var nce_loss(const Var& u, const Var& pos, const std::vector<Var>& negs,
             const Var& tau) {
  std::vector<Var> logits;
  logits.reserve(1 + negs.size());
  logits.push_back(ad::scale_by(tau, ad::cosine_similarity(u, pos)));
  for (const auto& n : negs)
    logits.push_back(ad::scale_by(tau, ad::cosine_similarity(u, n)));
  Var row = ad::concat_cols(logits);
  return ad::sub(ad::logsumexp_row(row), ad::slice_cols(row, 0, 1));
}

std::vector<std::size_t> sample_negatives(
    const Catalog& catalog, const std::unordered_set<std::string>& exclude,
    std::size_t count, std::mt19937_64& rng) {
  const std::size_t n = catalog.items.size();
  std::size_t excluded_present = 0;
  for (const auto& id : exclude)
    if (catalog.by_id.count(id)) ++excluded_present;
  if (count > n - excluded_present)
    throw ConfigError("sample_negatives: requested " + std::to_string(count) +
                      " negatives from " +
                      std::to_string(n - excluded_present) +
                      " admissible items");
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  std::unordered_set<std::size_t> chosen;
  std::vector<std::size_t> out;
  out.reserve(count);
  while (out.size() < count) {
    const std::size_t idx = pick(rng);
    if (chosen.count(idx) || exclude.count(catalog.items[idx].item_id))
      continue;
    chosen.insert(idx);
    out.push_back(idx);
  }
  return out;
}

std::vector<std::size_t> window_routing(const Tensor& interests,
                                        const Tensor& targets,
                                        std::mt19937_64& rng) {
  const std::size_t w = targets.rows();
  const std::size_t K = interests.rows();
  const std::size_t d = interests.cols();
  if (w == 0) throw ShapeError("window_routing: no targets");
  if (targets.cols() != d)
    throw ShapeError("window_routing: target width " +
                     std::to_string(targets.cols()) + " vs d=" +
                     std::to_string(d));
  auto cl = cluster_targets(targets, std::min(w, K), rng);
  const std::size_t k = cl.centroids.rows();
  Tensor sim({k, K});
  for (std::size_t c = 0; c < k; ++c)
    for (std::size_t q = 0; q < K; ++q) {
      double s = 0.0;
      for (std::size_t j = 0; j < d; ++j)
        s += cl.centroids.at(c, j) * interests.at(q, j);
      sim.at(c, q) = s;
    }
  auto match = hungarian_match(sim);
  std::vector<std::size_t> routing(w);
  for (std::size_t i = 0; i < w; ++i) routing[i] = match[cl.assign[i]];
  return routing;
}

Var window_loss_routed(const Var& interests,
                       const std::vector<Var>& target_vecs,
                       const std::vector<std::size_t>& routing,
                       const std::vector<Var>& negs, const Var& tau) {
  const std::size_t w = target_vecs.size();
  if (w == 0 || routing.size() != w)
    throw ShapeError("window_loss_routed: routing/target size mismatch");
  Var total;
  for (std::size_t i = 0; i < w; ++i) {
    Var ui = ad::slice_rows(interests, routing[i], routing[i] + 1);
    Var term = nce_loss(ui, target_vecs[i], negs, tau);
    total = total ? ad::add(total, term) : term;
  }
  return ad::scale(total, 1.0 / (double)w);
}

Var window_contrastive_loss(const Var& interests,
                            const std::vector<Var>& target_vecs,
                            const std::vector<Var>& negs, const Var& tau,
                            std::mt19937_64& rng) {
  const std::size_t w = target_vecs.size();
  const std::size_t d = interests->val.cols();
  if (w == 0) throw ShapeError("window_contrastive_loss: no targets");
  Tensor pts({w, d});
  for (std::size_t i = 0; i < w; ++i) {
    const Tensor& v = target_vecs[i]->val;
    if (v.rows() != 1 || v.cols() != d)
      throw ShapeError("window_contrastive_loss: target " + v.shape_str() +
                       " vs d=" + std::to_string(d));
    for (std::size_t j = 0; j < d; ++j) pts.at(i, j) = v[j];
  }
  auto routing = window_routing(interests->val, pts, rng);
  return window_loss_routed(interests, target_vecs, routing, negs, tau);
}

}  // namespace crossrec
