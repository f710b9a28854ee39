// Named parameter store, Adam optimizer, and the binary checkpoint format.
//
// Checkpoint layout (little-endian throughout):
//   magic  "CRCP"            4 bytes
//   version u16              currently 1
//   count  u64               number of named tensors
//   per tensor:
//     name_len u32, name bytes
//     ndim u32, dims u64[ndim]
//     payload f64[prod(dims)]
#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "crossrec/autograd.hpp"

namespace crossrec {

class ParamStore {
 public:
  // Creates (or returns the existing) parameter with uniform(-1/sqrt(cols),
  // 1/sqrt(cols)) init drawn from rng.
  ad::Var get_or_create(const std::string& name, std::size_t rows,
                        std::size_t cols, std::mt19937_64& rng);
  ad::Var get(const std::string& name) const;
  bool has(const std::string& name) const { return by_name_.count(name) != 0; }

  const std::vector<std::string>& names() const { return order_; }
  void zero_grads();

  // FNV-1a over every value's bit pattern, in declaration order.
  std::uint64_t checksum() const;
  std::uint64_t checksum(const std::string& prefix) const;

  void save(const std::string& path) const;
  void load(const std::string& path);

 private:
  std::map<std::string, ad::Var> by_name_;
  std::vector<std::string> order_;
};

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

class Adam {
 public:
  explicit Adam(AdamConfig cfg = {}) : cfg_(cfg) {}

  // Skip updates for parameters whose name starts with prefix (frozen tower).
  void freeze_prefix(const std::string& prefix) { frozen_.push_back(prefix); }
  // Clamp a parameter's values into [lo, hi] after each step.
  void clamp(const std::string& name, double lo, double hi) {
    clamps_[name] = {lo, hi};
  }

  // One update over every parameter's accumulated gradient; zeroes grads.
  // A parameter with any non-finite gradient entry is left untouched and
  // rejected_steps() is incremented.
  void step(ParamStore& params);

  std::size_t rejected_steps() const { return rejected_; }
  const AdamConfig& config() const { return cfg_; }

 private:
  AdamConfig cfg_;
  std::map<std::string, std::pair<Tensor, Tensor>> moments_;
  std::map<std::string, std::pair<double, double>> clamps_;
  std::vector<std::string> frozen_;
  std::uint64_t t_ = 0;
  std::size_t rejected_ = 0;
};

}  // namespace crossrec
