#include <algorithm>
#include <chrono>

#include "crossrec/retrieval.hpp"

namespace crossrec {

namespace {

using Clock = std::chrono::steady_clock;

LatencyStats summarize(std::vector<double> us, double total_us) {
  LatencyStats s;
  s.measured = us.size();
  if (us.empty()) return s;
  std::sort(us.begin(), us.end());
  auto pct = [&](double p) {
    const std::size_t i =
        std::min(us.size() - 1, (std::size_t)(p * (double)us.size()));
    return us[i];
  };
  s.p50_us = pct(0.50);
  s.p95_us = pct(0.95);
  s.p99_us = pct(0.99);
  s.per_second = total_us > 0.0 ? 1e6 * (double)us.size() / total_us : 0.0;
  return s;
}

double elapsed_us(Clock::time_point a, Clock::time_point b) {
  return std::chrono::duration<double, std::micro>(b - a).count();
}

}  // namespace

LatencyStats bench_encoding(const Model& model, const Catalog& catalog,
                            std::size_t count, std::size_t warmup) {
  if (catalog.items.empty())
    throw std::runtime_error("bench_encoding: empty catalog");
  const std::size_t n = catalog.items.size();
  for (std::size_t i = 0; i < warmup; ++i)
    (void)model.encode_item(catalog.items[i % n]);
  std::vector<double> us;
  us.reserve(count);
  double total = 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    const auto t0 = Clock::now();
    (void)model.encode_item(catalog.items[i % n]);
    const auto t1 = Clock::now();
    const double dt = elapsed_us(t0, t1);
    us.push_back(dt);
    total += dt;
  }
  return summarize(std::move(us), total);
}

LatencyStats bench_topk(const ItemIndex& idx,
                        const std::vector<Tensor>& queries, std::size_t k,
                        std::size_t warmup) {
  if (queries.empty()) throw std::runtime_error("bench_topk: no queries");
  const std::size_t n = queries.size();
  for (std::size_t i = 0; i < warmup; ++i) (void)topk(idx, queries[i % n], k);
  std::vector<double> us;
  us.reserve(n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto t0 = Clock::now();
    (void)topk(idx, queries[i], k);
    const auto t1 = Clock::now();
    const double dt = elapsed_us(t0, t1);
    us.push_back(dt);
    total += dt;
  }
  return summarize(std::move(us), total);
}

}  // namespace crossrec
