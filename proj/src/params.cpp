#include "crossrec/params.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace crossrec {

namespace {
constexpr char kMagic[4] = {'C', 'R', 'C', 'P'};
constexpr std::uint16_t kVersion = 1;

template <typename T>
void write_le(std::ostream& os, T v) {
  // build/test targets are little-endian x86; layout is LE by fiat
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}
template <typename T>
T read_le(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  return v;
}
}  // namespace

ad::Var ParamStore::get_or_create(const std::string& name, std::size_t rows,
                                  std::size_t cols, std::mt19937_64& rng) {
  auto it = by_name_.find(name);
  if (it != by_name_.end()) return it->second;
  const double bound = 1.0 / std::sqrt((double)cols);
  std::uniform_real_distribution<double> dist(-bound, bound);
  Tensor t({rows, cols});
  for (auto& v : t.vec()) v = dist(rng);
  auto p = ad::make_param(std::move(t));
  by_name_.emplace(name, p);
  order_.push_back(name);
  return p;
}

ad::Var ParamStore::get(const std::string& name) const {
  auto it = by_name_.find(name);
  if (it == by_name_.end())
    throw std::runtime_error("ParamStore: unknown parameter " + name);
  return it->second;
}

void ParamStore::zero_grads() {
  for (auto& [name, p] : by_name_) p->grad = Tensor();
}

std::uint64_t ParamStore::checksum(const std::string& prefix) const {
  std::uint64_t h = 1469598103934665603ull;
  for (const auto& name : order_) {
    if (name.rfind(prefix, 0) != 0) continue;
    const Tensor& t = by_name_.at(name)->val;
    for (double v : t.vec()) {
      std::uint64_t bits;
      std::memcpy(&bits, &v, sizeof(bits));
      for (int b = 0; b < 8; ++b) {
        h ^= (bits >> (8 * b)) & 0xffu;
        h *= 1099511628211ull;
      }
    }
  }
  return h;
}

std::uint64_t ParamStore::checksum() const { return checksum(""); }

void ParamStore::save(const std::string& path) const {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("checkpoint: cannot open " + path);
  os.write(kMagic, 4);
  write_le<std::uint16_t>(os, kVersion);
  write_le<std::uint64_t>(os, order_.size());
  for (const auto& name : order_) {
    const Tensor& t = by_name_.at(name)->val;
    write_le<std::uint32_t>(os, (std::uint32_t)name.size());
    os.write(name.data(), (std::streamsize)name.size());
    write_le<std::uint32_t>(os, (std::uint32_t)t.shape().size());
    for (auto d : t.shape()) write_le<std::uint64_t>(os, d);
    os.write(reinterpret_cast<const char*>(t.data()),
             (std::streamsize)(t.size() * sizeof(double)));
  }
  if (!os) throw std::runtime_error("checkpoint: write failed for " + path);
}

void ParamStore::load(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("checkpoint: cannot open " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kMagic, 4) != 0)
    throw std::runtime_error("checkpoint: bad magic in " + path);
  const auto version = read_le<std::uint16_t>(is);
  if (version != kVersion)
    throw std::runtime_error("checkpoint: unsupported version " +
                             std::to_string(version));
  const auto count = read_le<std::uint64_t>(is);
  by_name_.clear();
  order_.clear();
  for (std::uint64_t i = 0; i < count; ++i) {
    const auto name_len = read_le<std::uint32_t>(is);
    std::string name(name_len, '\0');
    is.read(name.data(), name_len);
    const auto ndim = read_le<std::uint32_t>(is);
    std::vector<std::size_t> shape(ndim);
    for (auto& d : shape) d = (std::size_t)read_le<std::uint64_t>(is);
    Tensor t(shape);
    is.read(reinterpret_cast<char*>(t.data()),
            (std::streamsize)(t.size() * sizeof(double)));
    if (!is) throw std::runtime_error("checkpoint: truncated file " + path);
    by_name_.emplace(name, ad::make_param(std::move(t)));
    order_.push_back(name);
  }
}

void Adam::step(ParamStore& params) {
  ++t_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, (double)t_);
  const double bc2 = 1.0 - std::pow(cfg_.beta2, (double)t_);
  for (const auto& name : params.names()) {
    auto p = params.get(name);
    bool frozen = false;
    for (const auto& pref : frozen_)
      if (name.rfind(pref, 0) == 0) frozen = true;
    if (frozen || p->grad.size() == 0) {
      p->grad = Tensor();
      continue;
    }
    if (!p->grad.all_finite()) {
      ++rejected_;
      p->grad = Tensor();
      continue;
    }
    auto& [m, v] = moments_[name];
    if (m.size() != p->val.size()) {
      m = Tensor(p->val.shape());
      v = Tensor(p->val.shape());
    }
    for (std::size_t i = 0; i < p->val.size(); ++i) {
      const double g = p->grad[i];
      m[i] = cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * g;
      v[i] = cfg_.beta2 * v[i] + (1.0 - cfg_.beta2) * g * g;
      const double mhat = m[i] / bc1;
      const double vhat = v[i] / bc2;
      p->val[i] -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
    }
    auto c = clamps_.find(name);
    if (c != clamps_.end())
      for (auto& x : p->val.vec())
        x = std::min(c->second.second, std::max(c->second.first, x));
    p->grad = Tensor();
  }
}

}  // namespace crossrec
