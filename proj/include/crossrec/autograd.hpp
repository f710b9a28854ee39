// Reverse-mode autodiff over Tensor. Graphs are built eagerly; backward()
// walks the tape once and accumulates into .grad of every reachable node.
//
// Determinism contract: every reduction (matmul inner product, softmax row
// sum, norms, mean) accumulates sequentially in ascending index order.
// Parallelism only ever splits work across independent output elements, so
// results are bitwise identical for any thread count.
#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "crossrec/tensor.hpp"

namespace crossrec::ad {

struct Node;
using Var = std::shared_ptr<Node>;

struct Node {
  Tensor val;
  Tensor grad;  // allocated lazily, same shape as val
  bool requires_grad = false;
  std::vector<Var> parents;
  std::function<void(Node&)> backprop;  // reads this->grad, adds to parents
  const char* op = "leaf";

  Tensor& g();  // grad, allocating zeros on first touch
};

// When false, ops produce constants and record no tape. Scoped toggle.
bool grad_enabled();
struct NoGradGuard {
  NoGradGuard();
  ~NoGradGuard();
  bool prev;
};

Var constant(Tensor t);
Var make_param(Tensor t);

// --- op set -----------------------------------------------------------
Var matmul(const Var& a, const Var& b);
Var transpose(const Var& a);
Var add(const Var& a, const Var& b);  // same shape, or b = [1 x c] row bias
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);  // elementwise
Var scale(const Var& a, double s);
Var scale_by(const Var& s, const Var& a);  // s is [1x1], learnable scalar
Var neg(const Var& a);
Var relu(const Var& a);
Var add_const(const Var& a, const Tensor& c);  // e.g. additive attention mask
Var row_softmax(const Var& a);
Var layer_norm(const Var& a, const Var& gain, const Var& bias, double eps);
Var embedding_rows(const Var& table, const std::vector<std::size_t>& ids);
Var concat_rows(const std::vector<Var>& parts);
Var concat_cols(const std::vector<Var>& parts);
Var slice_rows(const Var& a, std::size_t r0, std::size_t r1);
Var slice_cols(const Var& a, std::size_t c0, std::size_t c1);
Var mean_rows(const Var& a);   // [r x c] -> [1 x c]
Var mean_elems(const Var& a);  // -> [1 x 1]
Var sum_elems(const Var& a);   // -> [1 x 1]
Var l2_normalize_rows(const Var& a);
Var cosine_similarity(const Var& a, const Var& b);  // [1 x d] x [1 x d] -> [1 x 1]
Var logsumexp_row(const Var& a);                    // [1 x n] -> [1 x 1]

// softmax((Q K^T)/sqrt(d_k) + mask) V; mask optional, additive, constant.
Var scaled_dot_attention(const Var& q, const Var& k, const Var& v,
                         const Tensor* mask = nullptr);

// Seeds d(loss)/d(loss) = 1 and propagates. loss must be [1x1].
void backward(const Var& loss);

// --- finite-difference oracle ----------------------------------------
// Central differences of a scalar-valued closure wrt one input tensor.
// Returns max over coordinates of |analytic - fd| / max(1, |fd|).
double grad_check(const std::function<double()>& eval,
                  Tensor& point, const Tensor& analytic_grad, double h);

void set_num_threads(int n);
int num_threads();

}  // namespace crossrec::ad
