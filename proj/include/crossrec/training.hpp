// Training: temperature-scaled contrastive losses (next-item NCE plus a
// window term that clusters the hidden targets and matches clusters to
// interest queries), negative sampling, and the optimizer loop.
#pragma once

#include <random>
#include <unordered_set>

#include "crossrec/model.hpp"

namespace crossrec {

// -log( exp(tau*cos(u,pos)) / (exp(tau*cos(u,pos)) + sum_j exp(tau*cos(u,neg_j))) )
// u and the item vectors are [1 x d]; tau is a [1 x 1] parameter.
ad::Var nce_loss(const ad::Var& u, const ad::Var& pos,
                 const std::vector<ad::Var>& negs, const ad::Var& tau);

// `count` distinct catalog indices drawn uniformly, never from `exclude`.
std::vector<std::size_t> sample_negatives(
    const Catalog& catalog, const std::unordered_set<std::string>& exclude,
    std::size_t count, std::mt19937_64& rng);

struct Clustering {
  Tensor centroids;                 // [k x d], unit rows
  std::vector<std::size_t> assign;  // point -> cluster
};

// Spherical k-means (cosine distance, k-means++ seeding, <= max_iters
// Lloyd rounds, centroids re-normalized every round). Rows of `points`
// must be unit-norm.
Clustering cluster_targets(const Tensor& points, std::size_t k,
                           std::mt19937_64& rng, std::size_t max_iters = 20);

// Max-similarity assignment of each row to a distinct column (rows <= cols);
// among all optimal assignments returns the lexicographically smallest
// column sequence.
std::vector<std::size_t> hungarian_match(const Tensor& sim);

// The discrete part of the window loss: cluster the w target embeddings,
// match centroids to interest rows by cosine, and return the interest row
// each target is routed through.
std::vector<std::size_t> window_routing(const Tensor& interests,
                                        const Tensor& targets,
                                        std::mt19937_64& rng);

// Mean of nce_loss(interests[routing[i]], target_vecs[i]) over the targets;
// differentiable given a fixed routing.
ad::Var window_loss_routed(const ad::Var& interests,
                           const std::vector<ad::Var>& target_vecs,
                           const std::vector<std::size_t>& routing,
                           const std::vector<ad::Var>& negs,
                           const ad::Var& tau);

// window_routing + window_loss_routed in one call. `target_vecs` rows are
// unit-norm [1 x d] Vars.
ad::Var window_contrastive_loss(const ad::Var& interests,
                                const std::vector<ad::Var>& target_vecs,
                                const std::vector<ad::Var>& negs,
                                const ad::Var& tau, std::mt19937_64& rng);

struct TrainConfig {
  std::size_t epochs = 1;
  std::size_t batch_size = 8;  // users per optimizer step
  std::size_t negatives = 32;  // shared per-step negative pool
  double lr = 1e-3;
  double lambda_w = 1.0;  // weight of the window term
  std::uint64_t seed = 0;
  bool detach_sequence_items = true;  // cache sequence-side item embeddings
  std::size_t max_users = 0;          // 0 = train on every eligible user
  std::string stats_path;             // per-step JSONL, empty = off
};

struct TrainStats {
  std::vector<double> epoch_loss;  // mean per-user loss per epoch
  std::size_t steps = 0;
  std::size_t trained_users = 0;
  std::size_t skipped_users = 0;  // histories shorter than window+1
  std::size_t rejected_steps = 0;
};

TrainStats train(Model& model, const SyntheticData& data,
                 const TrainConfig& cfg);

}  // namespace crossrec
