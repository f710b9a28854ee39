#include <algorithm>
#include <cstring>
#include <fstream>

#include "crossrec/retrieval.hpp"

namespace crossrec {

namespace {
constexpr char kMagic[4] = {'R', 'E', 'D', 'X'};
constexpr std::uint16_t kVersion = 1;

template <typename T>
void write_le(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}
template <typename T>
T read_le(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  return v;
}
}  // namespace

ItemIndex ItemIndex::build(const Model& model, const Catalog& catalog) {
  ItemIndex idx;
  idx.dim = model.config().d;
  idx.ids.reserve(catalog.items.size());
  idx.vecs.reserve(catalog.items.size() * idx.dim);
  for (const auto& item : catalog.items) {
    Tensor v = model.encode_item(item);
    idx.ids.push_back(item.item_id);
    for (std::size_t j = 0; j < idx.dim; ++j)
      idx.vecs.push_back((float)v[j]);
  }
  return idx;
}

void ItemIndex::save(const std::string& path) const {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("index: cannot open " + path);
  os.write(kMagic, 4);
  write_le<std::uint16_t>(os, kVersion);
  write_le<std::uint64_t>(os, ids.size());
  write_le<std::uint32_t>(os, (std::uint32_t)dim);
  for (const auto& id : ids) {
    write_le<std::uint32_t>(os, (std::uint32_t)id.size());
    os.write(id.data(), (std::streamsize)id.size());
  }
  os.write(reinterpret_cast<const char*>(vecs.data()),
           (std::streamsize)(vecs.size() * sizeof(float)));
  if (!os) throw std::runtime_error("index: write failed for " + path);
}

ItemIndex ItemIndex::load(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("index: cannot open " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kMagic, 4) != 0)
    throw std::runtime_error("index: bad magic in " + path);
  const auto version = read_le<std::uint16_t>(is);
  if (version != kVersion)
    throw std::runtime_error("index: unsupported version " +
                             std::to_string(version));
  const auto m = read_le<std::uint64_t>(is);
  const auto d = read_le<std::uint32_t>(is);
  ItemIndex idx;
  idx.dim = d;
  idx.ids.reserve(m);
  for (std::uint64_t i = 0; i < m; ++i) {
    const auto len = read_le<std::uint32_t>(is);
    std::string id(len, '\0');
    is.read(id.data(), len);
    idx.ids.push_back(std::move(id));
  }
  idx.vecs.resize((std::size_t)m * d);
  is.read(reinterpret_cast<char*>(idx.vecs.data()),
          (std::streamsize)(idx.vecs.size() * sizeof(float)));
  if (!is) throw std::runtime_error("index: truncated file " + path);
  return idx;
}

std::vector<ScoredItem> topk(const ItemIndex& idx, const Tensor& query,
                             std::size_t k) {
  if (query.cols() != idx.dim)
    throw ShapeError("topk: query width " + std::to_string(query.cols()) +
                     " != index width " + std::to_string(idx.dim));
  if (query.rows() == 0) throw ShapeError("topk: empty query");
  k = std::min(k, idx.size());
  std::vector<ScoredItem> scored;
  scored.reserve(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    const float* row = idx.row(i);
    double best = -1e300;
    for (std::size_t q = 0; q < query.rows(); ++q) {
      double dot = 0.0;  // 64-bit accumulation over f32 storage
      for (std::size_t j = 0; j < idx.dim; ++j)
        dot += query.at(q, j) * (double)row[j];
      best = std::max(best, dot);
    }
    scored.push_back({idx.ids[i], best});
  }
  auto cmp = [](const ScoredItem& a, const ScoredItem& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.item_id < b.item_id;
  };
  std::partial_sort(scored.begin(), scored.begin() + (long)k, scored.end(),
                    cmp);
  scored.resize(k);
  return scored;
}

}  // namespace crossrec
