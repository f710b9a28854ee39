#include "crossrec/autograd.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <unordered_set>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace crossrec::ad {

namespace {
thread_local bool g_grad_enabled = true;
int g_threads = 1;

void check(bool ok, const char* op, const std::string& detail) {
  if (!ok) throw ShapeError(std::string(op) + ": " + detail);
}

Var make_node(Tensor val, std::vector<Var> parents, const char* op) {
  auto n = std::make_shared<Node>();
  n->val = std::move(val);
  n->op = op;
  if (g_grad_enabled) {
    for (const auto& p : parents)
      if (p->requires_grad) {
        n->requires_grad = true;
        break;
      }
    if (n->requires_grad) n->parents = std::move(parents);
  }
  return n;
}
}  // namespace

Tensor& Node::g() {
  if (grad.size() != val.size()) grad = Tensor(val.shape());
  return grad;
}

bool grad_enabled() { return g_grad_enabled; }
NoGradGuard::NoGradGuard() : prev(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = prev; }

void set_num_threads(int n) {
  g_threads = std::max(1, n);
#ifdef _OPENMP
  omp_set_num_threads(g_threads);
#endif
}
int num_threads() { return g_threads; }

Var constant(Tensor t) {
  auto n = std::make_shared<Node>();
  n->val = std::move(t);
  n->op = "const";
  return n;
}

Var make_param(Tensor t) {
  auto n = std::make_shared<Node>();
  n->val = std::move(t);
  n->requires_grad = true;
  n->op = "param";
  return n;
}

Var matmul(const Var& a, const Var& b) {
  const std::size_t m = a->val.rows(), k = a->val.cols();
  const std::size_t k2 = b->val.rows(), n = b->val.cols();
  check(k == k2, "matmul",
        a->val.shape_str() + " x " + b->val.shape_str());
  Tensor out({m, n});
  const double* A = a->val.data();
  const double* B = b->val.data();
  double* C = out.data();
#pragma omp parallel for schedule(static) if (m > 8)
  for (long long ii = 0; ii < (long long)m; ++ii) {
    const std::size_t i = (std::size_t)ii;
    double* crow = C + i * n;
    const double* arow = A + i * k;
    for (std::size_t kk = 0; kk < k; ++kk) {
      const double av = arow[kk];
      const double* brow = B + kk * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
  auto out_node = make_node(std::move(out), {a, b}, "matmul");
  if (out_node->requires_grad) {
    Var av = a, bv = b;
    out_node->backprop = [av, bv, m, k, n](Node& self) {
      const double* G = self.grad.data();
      if (av->requires_grad) {
        double* dA = av->g().data();
        const double* B = bv->val.data();
#pragma omp parallel for schedule(static) if (m > 8)
        for (long long ii = 0; ii < (long long)m; ++ii) {
          const std::size_t i = (std::size_t)ii;
          for (std::size_t kk = 0; kk < k; ++kk) {
            double s = 0.0;
            const double* grow = G + i * n;
            const double* brow = B + kk * n;
            for (std::size_t j = 0; j < n; ++j) s += grow[j] * brow[j];
            dA[i * k + kk] += s;
          }
        }
      }
      if (bv->requires_grad) {
        double* dB = bv->g().data();
        const double* A = av->val.data();
#pragma omp parallel for schedule(static) if (k > 8)
        for (long long kki = 0; kki < (long long)k; ++kki) {
          const std::size_t kk = (std::size_t)kki;
          for (std::size_t j = 0; j < n; ++j) {
            double s = 0.0;
            for (std::size_t i = 0; i < m; ++i)
              s += A[i * k + kk] * G[i * n + j];
            dB[kk * n + j] += s;
          }
        }
      }
    };
  }
  return out_node;
}

Var transpose(const Var& a) {
  const std::size_t r = a->val.rows(), c = a->val.cols();
  Tensor out({c, r});
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) out.at(j, i) = a->val.at(i, j);
  auto n = make_node(std::move(out), {a}, "transpose");
  if (n->requires_grad) {
    Var av = a;
    n->backprop = [av, r, c](Node& self) {
      if (!av->requires_grad) return;
      Tensor& dA = av->g();
      for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j)
          dA.at(i, j) += self.grad.at(j, i);
    };
  }
  return n;
}

Var add(const Var& a, const Var& b) {
  const bool bias = !a->val.same_shape(b->val);
  if (bias)
    check(b->val.rows() == 1 && b->val.cols() == a->val.cols(), "add",
          a->val.shape_str() + " + " + b->val.shape_str());
  Tensor out = a->val;
  const std::size_t r = out.rows(), c = out.cols();
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j)
      out.at(i, j) += bias ? b->val.at(0, j) : b->val.at(i, j);
  auto n = make_node(std::move(out), {a, b}, "add");
  if (n->requires_grad) {
    Var av = a, bv = b;
    n->backprop = [av, bv, bias, r, c](Node& self) {
      if (av->requires_grad) {
        Tensor& dA = av->g();
        for (std::size_t i = 0; i < dA.size(); ++i) dA[i] += self.grad[i];
      }
      if (bv->requires_grad) {
        Tensor& dB = bv->g();
        if (!bias) {
          for (std::size_t i = 0; i < dB.size(); ++i) dB[i] += self.grad[i];
        } else {
          for (std::size_t j = 0; j < c; ++j) {
            double s = 0.0;
            for (std::size_t i = 0; i < r; ++i) s += self.grad.at(i, j);
            dB.at(0, j) += s;
          }
        }
      }
    };
  }
  return n;
}

Var sub(const Var& a, const Var& b) { return add(a, neg(b)); }

Var mul(const Var& a, const Var& b) {
  check(a->val.same_shape(b->val), "mul",
        a->val.shape_str() + " * " + b->val.shape_str());
  Tensor out = a->val;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= b->val[i];
  auto n = make_node(std::move(out), {a, b}, "mul");
  if (n->requires_grad) {
    Var av = a, bv = b;
    n->backprop = [av, bv](Node& self) {
      if (av->requires_grad) {
        Tensor& dA = av->g();
        for (std::size_t i = 0; i < dA.size(); ++i)
          dA[i] += self.grad[i] * bv->val[i];
      }
      if (bv->requires_grad) {
        Tensor& dB = bv->g();
        for (std::size_t i = 0; i < dB.size(); ++i)
          dB[i] += self.grad[i] * av->val[i];
      }
    };
  }
  return n;
}

Var scale(const Var& a, double s) {
  Tensor out = a->val;
  for (auto& v : out.vec()) v *= s;
  auto n = make_node(std::move(out), {a}, "scale");
  if (n->requires_grad) {
    Var av = a;
    n->backprop = [av, s](Node& self) {
      Tensor& dA = av->g();
      for (std::size_t i = 0; i < dA.size(); ++i) dA[i] += s * self.grad[i];
    };
  }
  return n;
}

Var scale_by(const Var& s, const Var& a) {
  check(s->val.size() == 1, "scale_by", "scalar must be [1x1]");
  const double sv = s->val[0];
  Tensor out = a->val;
  for (auto& v : out.vec()) v *= sv;
  auto n = make_node(std::move(out), {s, a}, "scale_by");
  if (n->requires_grad) {
    Var sc = s, av = a;
    n->backprop = [sc, av, sv](Node& self) {
      if (sc->requires_grad) {
        double g = 0.0;
        for (std::size_t i = 0; i < self.grad.size(); ++i)
          g += self.grad[i] * av->val[i];
        sc->g()[0] += g;
      }
      if (av->requires_grad) {
        Tensor& dA = av->g();
        for (std::size_t i = 0; i < dA.size(); ++i)
          dA[i] += sv * self.grad[i];
      }
    };
  }
  return n;
}

Var neg(const Var& a) { return scale(a, -1.0); }

Var relu(const Var& a) {
  Tensor out = a->val;
  for (auto& v : out.vec()) v = v > 0.0 ? v : 0.0;
  auto n = make_node(std::move(out), {a}, "relu");
  if (n->requires_grad) {
    Var av = a;
    n->backprop = [av](Node& self) {
      Tensor& dA = av->g();
      for (std::size_t i = 0; i < dA.size(); ++i)
        if (av->val[i] > 0.0) dA[i] += self.grad[i];
    };
  }
  return n;
}

Var add_const(const Var& a, const Tensor& c) {
  check(a->val.same_shape(c), "add_const",
        a->val.shape_str() + " + " + c.shape_str());
  Tensor out = a->val;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += c[i];
  auto n = make_node(std::move(out), {a}, "add_const");
  if (n->requires_grad) {
    Var av = a;
    n->backprop = [av](Node& self) {
      Tensor& dA = av->g();
      for (std::size_t i = 0; i < dA.size(); ++i) dA[i] += self.grad[i];
    };
  }
  return n;
}

Var row_softmax(const Var& a) {
  Tensor out = a->val;
  const std::size_t r = out.rows(), c = out.cols();
  for (std::size_t i = 0; i < r; ++i) {
    double m = out.at(i, 0);
    for (std::size_t j = 1; j < c; ++j) m = std::max(m, out.at(i, j));
    double z = 0.0;
    for (std::size_t j = 0; j < c; ++j) {
      double e = std::exp(out.at(i, j) - m);
      out.at(i, j) = e;
      z += e;
    }
    for (std::size_t j = 0; j < c; ++j) out.at(i, j) /= z;
  }
  auto n = make_node(std::move(out), {a}, "row_softmax");
  if (n->requires_grad) {
    Var av = a;
    n->backprop = [av, r, c](Node& self) {
      Tensor& dA = av->g();
      for (std::size_t i = 0; i < r; ++i) {
        double dot = 0.0;
        for (std::size_t j = 0; j < c; ++j)
          dot += self.grad.at(i, j) * self.val.at(i, j);
        for (std::size_t j = 0; j < c; ++j)
          dA.at(i, j) += self.val.at(i, j) * (self.grad.at(i, j) - dot);
      }
    };
  }
  return n;
}

Var layer_norm(const Var& a, const Var& gain, const Var& bias, double eps) {
  check(eps > 0.0, "layer_norm", "eps must be positive");
  const std::size_t r = a->val.rows(), c = a->val.cols();
  check(gain->val.rows() == 1 && gain->val.cols() == c &&
            bias->val.rows() == 1 && bias->val.cols() == c,
        "layer_norm", "gain/bias must be [1 x " + std::to_string(c) + "]");
  Tensor out({r, c});
  Tensor xhat({r, c});
  std::vector<double> inv_sd(r);
  for (std::size_t i = 0; i < r; ++i) {
    double mu = 0.0;
    for (std::size_t j = 0; j < c; ++j) mu += a->val.at(i, j);
    mu /= (double)c;
    double var = 0.0;
    for (std::size_t j = 0; j < c; ++j) {
      double d = a->val.at(i, j) - mu;
      var += d * d;
    }
    var /= (double)c;
    inv_sd[i] = 1.0 / std::sqrt(var + eps);
    for (std::size_t j = 0; j < c; ++j) {
      double xh = (a->val.at(i, j) - mu) * inv_sd[i];
      xhat.at(i, j) = xh;
      out.at(i, j) = gain->val.at(0, j) * xh + bias->val.at(0, j);
    }
  }
  auto n = make_node(std::move(out), {a, gain, bias}, "layer_norm");
  if (n->requires_grad) {
    Var av = a, gv = gain, bv = bias;
    auto xh = std::make_shared<Tensor>(std::move(xhat));
    auto isd = std::make_shared<std::vector<double>>(std::move(inv_sd));
    n->backprop = [av, gv, bv, xh, isd, r, c](Node& self) {
      if (gv->requires_grad) {
        Tensor& dG = gv->g();
        for (std::size_t j = 0; j < c; ++j) {
          double s = 0.0;
          for (std::size_t i = 0; i < r; ++i)
            s += self.grad.at(i, j) * xh->at(i, j);
          dG.at(0, j) += s;
        }
      }
      if (bv->requires_grad) {
        Tensor& dB = bv->g();
        for (std::size_t j = 0; j < c; ++j) {
          double s = 0.0;
          for (std::size_t i = 0; i < r; ++i) s += self.grad.at(i, j);
          dB.at(0, j) += s;
        }
      }
      if (av->requires_grad) {
        Tensor& dA = av->g();
        for (std::size_t i = 0; i < r; ++i) {
          // dxhat_j = dy_j * g_j; dx via the standard layernorm backward
          double sum_dxh = 0.0, sum_dxh_xh = 0.0;
          for (std::size_t j = 0; j < c; ++j) {
            double dxh = self.grad.at(i, j) * gv->val.at(0, j);
            sum_dxh += dxh;
            sum_dxh_xh += dxh * xh->at(i, j);
          }
          for (std::size_t j = 0; j < c; ++j) {
            double dxh = self.grad.at(i, j) * gv->val.at(0, j);
            dA.at(i, j) += (*isd)[i] * (dxh - sum_dxh / (double)c -
                                        xh->at(i, j) * sum_dxh_xh / (double)c);
          }
        }
      }
    };
  }
  return n;
}

Var embedding_rows(const Var& table, const std::vector<std::size_t>& ids) {
  const std::size_t v = table->val.rows(), d = table->val.cols();
  Tensor out({ids.size(), d});
  for (std::size_t i = 0; i < ids.size(); ++i) {
    check(ids[i] < v, "embedding_lookup",
          "id " + std::to_string(ids[i]) + " out of range [0," +
              std::to_string(v) + ")");
    std::memcpy(out.data() + i * d, table->val.data() + ids[i] * d,
                d * sizeof(double));
  }
  auto n = make_node(std::move(out), {table}, "embedding_lookup");
  if (n->requires_grad) {
    Var tv = table;
    auto idc = ids;
    n->backprop = [tv, idc, d](Node& self) {
      Tensor& dT = tv->g();
      for (std::size_t i = 0; i < idc.size(); ++i)
        for (std::size_t j = 0; j < d; ++j)
          dT.at(idc[i], j) += self.grad.at(i, j);
    };
  }
  return n;
}

Var concat_rows(const std::vector<Var>& parts) {
  check(!parts.empty(), "concat_rows", "no inputs");
  const std::size_t c = parts[0]->val.cols();
  std::size_t r = 0;
  for (const auto& p : parts) {
    check(p->val.cols() == c, "concat_rows", "column mismatch");
    r += p->val.rows();
  }
  Tensor out({r, c});
  std::size_t off = 0;
  for (const auto& p : parts) {
    std::memcpy(out.data() + off, p->val.data(),
                p->val.size() * sizeof(double));
    off += p->val.size();
  }
  auto n = make_node(std::move(out), parts, "concat_rows");
  if (n->requires_grad) {
    auto ps = parts;
    n->backprop = [ps](Node& self) {
      std::size_t off = 0;
      for (const auto& p : ps) {
        if (p->requires_grad) {
          Tensor& dP = p->g();
          for (std::size_t i = 0; i < dP.size(); ++i)
            dP[i] += self.grad[off + i];
        }
        off += p->val.size();
      }
    };
  }
  return n;
}

Var concat_cols(const std::vector<Var>& parts) {
  check(!parts.empty(), "concat_cols", "no inputs");
  const std::size_t r = parts[0]->val.rows();
  std::size_t c = 0;
  for (const auto& p : parts) {
    check(p->val.rows() == r, "concat_cols", "row mismatch");
    c += p->val.cols();
  }
  Tensor out({r, c});
  std::size_t off = 0;
  for (const auto& p : parts) {
    const std::size_t pc = p->val.cols();
    for (std::size_t i = 0; i < r; ++i)
      std::memcpy(out.data() + i * c + off, p->val.data() + i * pc,
                  pc * sizeof(double));
    off += pc;
  }
  auto n = make_node(std::move(out), parts, "concat_cols");
  if (n->requires_grad) {
    auto ps = parts;
    n->backprop = [ps, r, c](Node& self) {
      std::size_t off = 0;
      for (const auto& p : ps) {
        const std::size_t pc = p->val.cols();
        if (p->requires_grad) {
          Tensor& dP = p->g();
          for (std::size_t i = 0; i < r; ++i)
            for (std::size_t j = 0; j < pc; ++j)
              dP.at(i, j) += self.grad[i * c + off + j];
        }
        off += pc;
      }
    };
  }
  return n;
}

Var slice_rows(const Var& a, std::size_t r0, std::size_t r1) {
  check(r0 <= r1 && r1 <= a->val.rows(), "slice_rows", "bad range");
  const std::size_t c = a->val.cols();
  Tensor out({r1 - r0, c});
  std::memcpy(out.data(), a->val.data() + r0 * c,
              (r1 - r0) * c * sizeof(double));
  auto n = make_node(std::move(out), {a}, "slice_rows");
  if (n->requires_grad) {
    Var av = a;
    n->backprop = [av, r0, c](Node& self) {
      Tensor& dA = av->g();
      for (std::size_t i = 0; i < self.grad.size(); ++i)
        dA[r0 * c + i] += self.grad[i];
    };
  }
  return n;
}

Var slice_cols(const Var& a, std::size_t c0, std::size_t c1) {
  check(c0 <= c1 && c1 <= a->val.cols(), "slice_cols", "bad range");
  const std::size_t r = a->val.rows(), c = a->val.cols(), w = c1 - c0;
  Tensor out({r, w});
  for (std::size_t i = 0; i < r; ++i)
    std::memcpy(out.data() + i * w, a->val.data() + i * c + c0,
                w * sizeof(double));
  auto n = make_node(std::move(out), {a}, "slice_cols");
  if (n->requires_grad) {
    Var av = a;
    n->backprop = [av, c0, c, w, r](Node& self) {
      Tensor& dA = av->g();
      for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < w; ++j)
          dA[i * c + c0 + j] += self.grad[i * w + j];
    };
  }
  return n;
}

Var mean_rows(const Var& a) {
  const std::size_t r = a->val.rows(), c = a->val.cols();
  check(r > 0, "mean_rows", "empty input");
  Tensor out({1, c});
  for (std::size_t j = 0; j < c; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < r; ++i) s += a->val.at(i, j);
    out.at(0, j) = s / (double)r;
  }
  auto n = make_node(std::move(out), {a}, "mean_rows");
  if (n->requires_grad) {
    Var av = a;
    n->backprop = [av, r, c](Node& self) {
      Tensor& dA = av->g();
      for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j)
          dA.at(i, j) += self.grad.at(0, j) / (double)r;
    };
  }
  return n;
}

Var sum_elems(const Var& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < a->val.size(); ++i) s += a->val[i];
  auto n = make_node(Tensor::scalar(s), {a}, "sum_elems");
  if (n->requires_grad) {
    Var av = a;
    n->backprop = [av](Node& self) {
      Tensor& dA = av->g();
      for (std::size_t i = 0; i < dA.size(); ++i) dA[i] += self.grad[0];
    };
  }
  return n;
}

Var mean_elems(const Var& a) {
  return scale(sum_elems(a), 1.0 / (double)a->val.size());
}

Var l2_normalize_rows(const Var& a) {
  const std::size_t r = a->val.rows(), c = a->val.cols();
  Tensor out({r, c});
  std::vector<double> norms(r);
  for (std::size_t i = 0; i < r; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < c; ++j) s += a->val.at(i, j) * a->val.at(i, j);
    double nrm = std::sqrt(s);
    norms[i] = nrm;
    if (nrm > 1e-30)
      for (std::size_t j = 0; j < c; ++j) out.at(i, j) = a->val.at(i, j) / nrm;
  }
  auto n = make_node(std::move(out), {a}, "l2_normalize");
  if (n->requires_grad) {
    Var av = a;
    auto nm = std::make_shared<std::vector<double>>(std::move(norms));
    n->backprop = [av, nm, r, c](Node& self) {
      Tensor& dA = av->g();
      for (std::size_t i = 0; i < r; ++i) {
        double nrm = (*nm)[i];
        if (nrm <= 1e-30) continue;
        double dot = 0.0;
        for (std::size_t j = 0; j < c; ++j)
          dot += self.grad.at(i, j) * self.val.at(i, j);
        for (std::size_t j = 0; j < c; ++j)
          dA.at(i, j) +=
              (self.grad.at(i, j) - self.val.at(i, j) * dot) / nrm;
      }
    };
  }
  return n;
}

Var cosine_similarity(const Var& a, const Var& b) {
  check(a->val.rows() == 1 && b->val.rows() == 1 &&
            a->val.cols() == b->val.cols(),
        "cosine_similarity", a->val.shape_str() + " vs " + b->val.shape_str());
  const std::size_t d = a->val.cols();
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t j = 0; j < d; ++j) {
    dot += a->val[j] * b->val[j];
    na += a->val[j] * a->val[j];
    nb += b->val[j] * b->val[j];
  }
  na = std::sqrt(na);
  nb = std::sqrt(nb);
  check(na > 1e-30 && nb > 1e-30, "cosine_similarity", "zero-norm input");
  const double c = dot / (na * nb);
  auto n = make_node(Tensor::scalar(c), {a, b}, "cosine_similarity");
  if (n->requires_grad) {
    Var av = a, bv = b;
    n->backprop = [av, bv, c, na, nb, d](Node& self) {
      const double g = self.grad[0];
      if (av->requires_grad) {
        Tensor& dA = av->g();
        for (std::size_t j = 0; j < d; ++j)
          dA[j] += g * (bv->val[j] / (na * nb) - c * av->val[j] / (na * na));
      }
      if (bv->requires_grad) {
        Tensor& dB = bv->g();
        for (std::size_t j = 0; j < d; ++j)
          dB[j] += g * (av->val[j] / (na * nb) - c * bv->val[j] / (nb * nb));
      }
    };
  }
  return n;
}

Var logsumexp_row(const Var& a) {
  check(a->val.rows() == 1, "logsumexp", "expects a [1 x n] row");
  const std::size_t nn = a->val.cols();
  double m = a->val[0];
  for (std::size_t j = 1; j < nn; ++j) m = std::max(m, a->val[j]);
  double z = 0.0;
  for (std::size_t j = 0; j < nn; ++j) z += std::exp(a->val[j] - m);
  const double lse = m + std::log(z);
  auto n = make_node(Tensor::scalar(lse), {a}, "logsumexp");
  if (n->requires_grad) {
    Var av = a;
    n->backprop = [av, m, z, nn](Node& self) {
      Tensor& dA = av->g();
      for (std::size_t j = 0; j < nn; ++j)
        dA[j] += self.grad[0] * std::exp(av->val[j] - m) / z;
    };
  }
  return n;
}

Var scaled_dot_attention(const Var& q, const Var& k, const Var& v,
                         const Tensor* mask) {
  const double inv_sqrt_d = 1.0 / std::sqrt((double)k->val.cols());
  Var logits = scale(matmul(q, transpose(k)), inv_sqrt_d);
  if (mask != nullptr) logits = add_const(logits, *mask);
  return matmul(row_softmax(logits), v);
}

void backward(const Var& loss) {
  if (loss->val.size() != 1)
    throw ShapeError("backward: loss must be scalar, got " +
                     loss->val.shape_str());
  // topo order by iterative DFS
  std::vector<Node*> order;
  std::unordered_set<Node*> seen;
  std::vector<std::pair<Node*, std::size_t>> stack{{loss.get(), 0}};
  seen.insert(loss.get());
  while (!stack.empty()) {
    auto& [n, i] = stack.back();
    if (i < n->parents.size()) {
      Node* p = n->parents[i++].get();
      if (p->requires_grad && !seen.count(p)) {
        seen.insert(p);
        stack.push_back({p, 0});
      }
    } else {
      order.push_back(n);
      stack.pop_back();
    }
  }
  loss->g()[0] += 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it)
    if ((*it)->backprop) (*it)->backprop(**it);
}

double grad_check(const std::function<double()>& eval, Tensor& point,
                  const Tensor& analytic_grad, double h) {
  double worst = 0.0;
  for (std::size_t i = 0; i < point.size(); ++i) {
    const double orig = point[i];
    point[i] = orig + h;
    const double fp = eval();
    point[i] = orig - h;
    const double fm = eval();
    point[i] = orig;
    const double fd = (fp - fm) / (2.0 * h);
    const double err =
        std::abs(analytic_grad[i] - fd) / std::max(1.0, std::abs(fd));
    worst = std::max(worst, err);
  }
  return worst;
}

}  // namespace crossrec::ad
