#include <cmath>

#include "crossrec/training.hpp"

namespace crossrec {

namespace {

double dot_row(const Tensor& a, std::size_t ra, const Tensor& b,
               std::size_t rb) {
  double s = 0.0;
  for (std::size_t j = 0; j < a.cols(); ++j) s += a.at(ra, j) * b.at(rb, j);
  return s;
}

void normalize_row(Tensor& t, std::size_t r) {
  double n2 = 0.0;
  for (std::size_t j = 0; j < t.cols(); ++j) n2 += t.at(r, j) * t.at(r, j);
  const double n = std::sqrt(n2);
  if (n > 1e-30)
    for (std::size_t j = 0; j < t.cols(); ++j) t.at(r, j) /= n;
}

}  // namespace

Clustering cluster_targets(const Tensor& points, std::size_t k,
                           std::mt19937_64& rng, std::size_t max_iters) {
  const std::size_t w = points.rows(), d = points.cols();
  if (w == 0 || k == 0)
    throw ShapeError("cluster_targets: need at least one point and cluster");
  if (k > w) k = w;

  // k-means++ seeding on squared cosine distance
  Tensor centroids({k, d});
  std::vector<double> mind(w, 2.0);
  std::size_t first = std::uniform_int_distribution<std::size_t>(0, w - 1)(rng);
  for (std::size_t j = 0; j < d; ++j) centroids.at(0, j) = points.at(first, j);
  for (std::size_t c = 1; c < k; ++c) {
    double total = 0.0;
    for (std::size_t i = 0; i < w; ++i) {
      const double dist = 1.0 - dot_row(points, i, centroids, c - 1);
      mind[i] = std::min(mind[i], dist * dist);
      total += mind[i];
    }
    std::size_t pick = 0;
    if (total > 0.0) {
      double r = std::uniform_real_distribution<double>(0.0, total)(rng);
      for (; pick + 1 < w; ++pick) {
        r -= mind[pick];
        if (r <= 0.0) break;
      }
    } else {
      pick = std::uniform_int_distribution<std::size_t>(0, w - 1)(rng);
    }
    for (std::size_t j = 0; j < d; ++j) centroids.at(c, j) = points.at(pick, j);
  }

  Clustering out;
  out.assign.assign(w, 0);
  for (std::size_t it = 0; it < max_iters; ++it) {
    bool changed = false;
    for (std::size_t i = 0; i < w; ++i) {
      std::size_t best = 0;
      double best_sim = dot_row(points, i, centroids, 0);
      for (std::size_t c = 1; c < k; ++c) {
        const double s = dot_row(points, i, centroids, c);
        if (s > best_sim) {
          best_sim = s;
          best = c;
        }
      }
      if (out.assign[i] != best || it == 0) {
        changed = changed || out.assign[i] != best;
        out.assign[i] = best;
      }
    }
    if (it > 0 && !changed) break;
    Tensor next({k, d});
    std::vector<std::size_t> count(k, 0);
    for (std::size_t i = 0; i < w; ++i) {
      for (std::size_t j = 0; j < d; ++j)
        next.at(out.assign[i], j) += points.at(i, j);
      ++count[out.assign[i]];
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (count[c] == 0) {  // keep the previous centroid for empty clusters
        for (std::size_t j = 0; j < d; ++j) next.at(c, j) = centroids.at(c, j);
      }
      normalize_row(next, c);
    }
    centroids = std::move(next);
  }
  out.centroids = std::move(centroids);
  return out;
}

}  // namespace crossrec
