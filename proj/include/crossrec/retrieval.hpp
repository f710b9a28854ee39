// Serving-side retrieval: a flat item-embedding index with an exact top-k
// cosine scan, a binary on-disk format, and latency/throughput benchmarks.
//
// Index file layout (little-endian):
//   magic   "REDX"          4 bytes
//   version u16             currently 1
//   M       u64             item count
//   d       u32             embedding width
//   ids     M x (u32 len, bytes)
//   payload M x d f32, row-major
#pragma once

#include "crossrec/eval.hpp"

namespace crossrec {

struct ItemIndex {
  std::vector<std::string> ids;
  std::vector<float> vecs;  // row-major [M x d]
  std::size_t dim = 0;

  std::size_t size() const { return ids.size(); }
  const float* row(std::size_t i) const { return vecs.data() + i * dim; }

  // Encodes every catalog item with the model's item tower (f32 storage).
  static ItemIndex build(const Model& model, const Catalog& catalog);
  void save(const std::string& path) const;
  static ItemIndex load(const std::string& path);
};

// Exact top-k scan. `query` is [1 x d] or [K x d] (scored as the max over
// rows); dot products accumulate in f64. Ordering: descending score, ties
// by ascending item_id. k is clamped to the index size.
std::vector<ScoredItem> topk(const ItemIndex& idx, const Tensor& query,
                             std::size_t k);

struct LatencyStats {
  double p50_us = 0.0;
  double p95_us = 0.0;
  double p99_us = 0.0;
  double per_second = 0.0;  // measured throughput (SPS for encoding)
  std::size_t measured = 0;
};

// Times model.encode_item over `count` catalog items (cycling) after
// `warmup` unmeasured calls.
LatencyStats bench_encoding(const Model& model, const Catalog& catalog,
                            std::size_t count, std::size_t warmup);

// Times topk(idx, query, k) per query after `warmup` unmeasured queries.
LatencyStats bench_topk(const ItemIndex& idx,
                        const std::vector<Tensor>& queries, std::size_t k,
                        std::size_t warmup);

}  // namespace crossrec
