#include "ranmt/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "ranmt/kernels.hpp"

namespace ranmt {

namespace {

thread_local int g_nograd_depth = 0;

std::shared_ptr<TensorImpl> make_impl(int rows, int cols) {
  auto impl = std::make_shared<TensorImpl>();
  impl->rows = rows;
  impl->cols = cols;
  impl->val.assign(static_cast<size_t>(rows) * cols, real_t(0));
  return impl;
}

bool any_requires(const std::vector<Tensor>& ts) {
  for (const auto& t : ts)
    if (t.impl()->requires_grad) return true;
  return false;
}

// Wires the node into the tape when grad mode is on and some input needs it.
Tensor make_node(std::shared_ptr<TensorImpl> impl, const std::vector<Tensor>& inputs,
                 std::function<void(TensorImpl&)> backfn) {
  if (grad_enabled() && any_requires(inputs)) {
    impl->requires_grad = true;
    impl->parents.reserve(inputs.size());
    for (const auto& t : inputs) impl->parents.push_back(t.impl());
    impl->backfn = std::move(backfn);
  }
  return Tensor(std::move(impl));
}

void check_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw std::runtime_error(std::string(op) + ": shape mismatch");
}

}  // namespace

NoGrad::NoGrad() { ++g_nograd_depth; }
NoGrad::~NoGrad() { --g_nograd_depth; }
bool grad_enabled() { return g_nograd_depth == 0; }

Tensor Tensor::zeros(int rows, int cols, bool requires_grad) {
  auto impl = make_impl(rows, cols);
  impl->requires_grad = requires_grad;
  return Tensor(std::move(impl));
}

Tensor Tensor::full(int rows, int cols, real_t value) {
  auto impl = make_impl(rows, cols);
  std::fill(impl->val.begin(), impl->val.end(), value);
  return Tensor(std::move(impl));
}

Tensor Tensor::from(std::vector<real_t> values, int rows, int cols) {
  if (values.size() != static_cast<size_t>(rows) * cols)
    throw std::runtime_error("Tensor::from: size does not match shape");
  auto impl = std::make_shared<TensorImpl>();
  impl->rows = rows;
  impl->cols = cols;
  impl->val = std::move(values);
  return Tensor(std::move(impl));
}

Tensor matmul(const Tensor& a, const Tensor& b, bool trans_a, bool trans_b) {
  const int m = trans_a ? a.cols() : a.rows();
  const int k = trans_a ? a.rows() : a.cols();
  const int kb = trans_b ? b.cols() : b.rows();
  const int n = trans_b ? b.rows() : b.cols();
  if (k != kb) throw std::runtime_error("matmul: inner dimensions disagree");
  if (trans_a && trans_b) throw std::runtime_error("matmul: double transpose unsupported");

  auto out = make_impl(m, n);
  kern::matmul(a.data().data(), b.data().data(), out->val.data(), m, k, n, trans_a, trans_b);

  auto ai = a.impl();
  auto bi = b.impl();
  return make_node(std::move(out), {a, b}, [ai, bi, m, k, n, trans_a, trans_b](TensorImpl& o) {
    const real_t* g = o.grad.data();
    if (ai->requires_grad) {
      // dA = G B^T (or B G^T into the transposed layout)
      if (!trans_a)
        kern::matmul(g, bi->val.data(), ai->gradbuf(), m, n, k, false, !trans_b, true);
      else
        kern::matmul(bi->val.data(), g, ai->gradbuf(), k, n, m, trans_b, true, true);
    }
    if (bi->requires_grad) {
      if (!trans_b)
        kern::matmul(ai->val.data(), g, bi->gradbuf(), k, m, n, !trans_a, false, true);
      else
        kern::matmul(g, ai->val.data(), bi->gradbuf(), n, m, k, true, trans_a, true);
    }
  });
}

namespace {
enum class Bcast { None, Row, Col };

Bcast bcast_kind(const Tensor& a, const Tensor& b, bool allow_row) {
  if (a.rows() == b.rows() && a.cols() == b.cols()) return Bcast::None;
  if (allow_row && b.rows() == 1 && b.cols() == a.cols()) return Bcast::Row;
  if (b.cols() == 1 && b.rows() == a.rows()) return Bcast::Col;
  throw std::runtime_error("broadcast: incompatible shapes");
}
}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
  const Bcast bc = bcast_kind(a, b, true);
  auto out = make_impl(a.rows(), a.cols());
  const int rows = a.rows(), cols = a.cols();
  const real_t* av = a.data().data();
  const real_t* bv = b.data().data();
  real_t* ov = out->val.data();
  switch (bc) {
    case Bcast::None:
      for (size_t i = 0; i < out->val.size(); ++i) ov[i] = av[i] + bv[i];
      break;
    case Bcast::Row:
      for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) ov[r * cols + c] = av[r * cols + c] + bv[c];
      break;
    case Bcast::Col:
      for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) ov[r * cols + c] = av[r * cols + c] + bv[r];
      break;
  }
  auto ai = a.impl();
  auto bi = b.impl();
  return make_node(std::move(out), {a, b}, [ai, bi, bc, rows, cols](TensorImpl& o) {
    const real_t* g = o.grad.data();
    if (ai->requires_grad) kern::vadd_inplace(g, ai->gradbuf(), o.size());
    if (bi->requires_grad) {
      real_t* bg = bi->gradbuf();
      switch (bc) {
        case Bcast::None:
          kern::vadd_inplace(g, bg, o.size());
          break;
        case Bcast::Row:
          for (int r = 0; r < rows; ++r)
            for (int c = 0; c < cols; ++c) bg[c] += g[r * cols + c];
          break;
        case Bcast::Col:
          for (int r = 0; r < rows; ++r)
            for (int c = 0; c < cols; ++c) bg[r] += g[r * cols + c];
          break;
      }
    }
  });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  check_same_shape(a, b, "sub");
  auto out = make_impl(a.rows(), a.cols());
  for (size_t i = 0; i < out->val.size(); ++i) out->val[i] = a.data()[i] - b.data()[i];
  auto ai = a.impl();
  auto bi = b.impl();
  return make_node(std::move(out), {a, b}, [ai, bi](TensorImpl& o) {
    const real_t* g = o.grad.data();
    if (ai->requires_grad) kern::vadd_inplace(g, ai->gradbuf(), o.size());
    if (bi->requires_grad) {
      real_t* bg = bi->gradbuf();
      for (size_t i = 0; i < o.size(); ++i) bg[i] -= g[i];
    }
  });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  const Bcast bc = bcast_kind(a, b, false);
  auto out = make_impl(a.rows(), a.cols());
  const int rows = a.rows(), cols = a.cols();
  const real_t* av = a.data().data();
  const real_t* bv = b.data().data();
  real_t* ov = out->val.data();
  if (bc == Bcast::None)
    for (size_t i = 0; i < out->val.size(); ++i) ov[i] = av[i] * bv[i];
  else
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c) ov[r * cols + c] = av[r * cols + c] * bv[r];
  auto ai = a.impl();
  auto bi = b.impl();
  return make_node(std::move(out), {a, b}, [ai, bi, bc, rows, cols](TensorImpl& o) {
    const real_t* g = o.grad.data();
    if (ai->requires_grad) {
      real_t* ag = ai->gradbuf();
      if (bc == Bcast::None)
        for (size_t i = 0; i < o.size(); ++i) ag[i] += g[i] * bi->val[i];
      else
        for (int r = 0; r < rows; ++r)
          for (int c = 0; c < cols; ++c) ag[r * cols + c] += g[r * cols + c] * bi->val[r];
    }
    if (bi->requires_grad) {
      real_t* bg = bi->gradbuf();
      if (bc == Bcast::None)
        for (size_t i = 0; i < o.size(); ++i) bg[i] += g[i] * ai->val[i];
      else
        for (int r = 0; r < rows; ++r)
          for (int c = 0; c < cols; ++c) bg[r] += g[r * cols + c] * ai->val[r * cols + c];
    }
  });
}

Tensor scale(const Tensor& a, real_t s) {
  auto out = make_impl(a.rows(), a.cols());
  for (size_t i = 0; i < out->val.size(); ++i) out->val[i] = a.data()[i] * s;
  auto ai = a.impl();
  return make_node(std::move(out), {a}, [ai, s](TensorImpl& o) {
    if (!ai->requires_grad) return;
    real_t* ag = ai->gradbuf();
    for (size_t i = 0; i < o.size(); ++i) ag[i] += o.grad[i] * s;
  });
}

Tensor tanh_t(const Tensor& a) {
  auto out = make_impl(a.rows(), a.cols());
  kern::vtanh(a.data().data(), out->val.data(), out->val.size());
  auto ai = a.impl();
  return make_node(std::move(out), {a}, [ai](TensorImpl& o) {
    if (!ai->requires_grad) return;
    real_t* ag = ai->gradbuf();
    for (size_t i = 0; i < o.size(); ++i) ag[i] += o.grad[i] * (real_t(1) - o.val[i] * o.val[i]);
  });
}

Tensor sigmoid_t(const Tensor& a) {
  auto out = make_impl(a.rows(), a.cols());
  kern::vsigmoid(a.data().data(), out->val.data(), out->val.size());
  auto ai = a.impl();
  return make_node(std::move(out), {a}, [ai](TensorImpl& o) {
    if (!ai->requires_grad) return;
    real_t* ag = ai->gradbuf();
    for (size_t i = 0; i < o.size(); ++i)
      ag[i] += o.grad[i] * o.val[i] * (real_t(1) - o.val[i]);
  });
}

Tensor softmax(const Tensor& a, int axis) {
  if (axis != 0 && axis != 1) throw std::runtime_error("softmax: axis must be 0 or 1");
  const int rows = a.rows(), cols = a.cols();
  auto out = make_impl(rows, cols);
  if (axis == 1) {
    kern::softmax_rows(a.data().data(), out->val.data(), rows, cols);
  } else {
    // column softmax via explicit loops; used rarely
    for (int c = 0; c < cols; ++c) {
      real_t mx = a.at(0, c);
      for (int r = 1; r < rows; ++r) mx = std::max(mx, a.at(r, c));
      real_t sum = 0;
      for (int r = 0; r < rows; ++r) {
        const real_t e = std::exp(a.at(r, c) - mx);
        out->val[static_cast<size_t>(r) * cols + c] = e;
        sum += e;
      }
      for (int r = 0; r < rows; ++r) out->val[static_cast<size_t>(r) * cols + c] /= sum;
    }
  }
  auto ai = a.impl();
  return make_node(std::move(out), {a}, [ai, axis, rows, cols](TensorImpl& o) {
    if (!ai->requires_grad) return;
    real_t* ag = ai->gradbuf();
    // dx = y * (g - sum(g * y)) along the softmax axis
    if (axis == 1) {
      for (int r = 0; r < rows; ++r) {
        const real_t* y = o.val.data() + static_cast<size_t>(r) * cols;
        const real_t* g = o.grad.data() + static_cast<size_t>(r) * cols;
        real_t dot = 0;
        for (int c = 0; c < cols; ++c) dot += g[c] * y[c];
        real_t* dst = ag + static_cast<size_t>(r) * cols;
        for (int c = 0; c < cols; ++c) dst[c] += y[c] * (g[c] - dot);
      }
    } else {
      for (int c = 0; c < cols; ++c) {
        real_t dot = 0;
        for (int r = 0; r < rows; ++r)
          dot += o.grad[static_cast<size_t>(r) * cols + c] * o.val[static_cast<size_t>(r) * cols + c];
        for (int r = 0; r < rows; ++r) {
          const size_t idx = static_cast<size_t>(r) * cols + c;
          ag[idx] += o.val[idx] * (o.grad[idx] - dot);
        }
      }
    }
  });
}

Tensor concat_cols(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw std::runtime_error("concat_cols: no parts");
  const int rows = parts[0].rows();
  int cols = 0;
  for (const auto& p : parts) {
    if (p.rows() != rows) throw std::runtime_error("concat_cols: row mismatch");
    cols += p.cols();
  }
  auto out = make_impl(rows, cols);
  int off = 0;
  for (const auto& p : parts) {
    for (int r = 0; r < rows; ++r)
      std::copy(p.data().begin() + static_cast<size_t>(r) * p.cols(),
                p.data().begin() + static_cast<size_t>(r + 1) * p.cols(),
                out->val.begin() + static_cast<size_t>(r) * cols + off);
    off += p.cols();
  }
  std::vector<std::shared_ptr<TensorImpl>> impls;
  for (const auto& p : parts) impls.push_back(p.impl());
  return make_node(std::move(out), parts, [impls, rows, cols](TensorImpl& o) {
    int off = 0;
    for (const auto& pi : impls) {
      if (pi->requires_grad) {
        real_t* pg = pi->gradbuf();
        for (int r = 0; r < rows; ++r)
          for (int c = 0; c < pi->cols; ++c)
            pg[static_cast<size_t>(r) * pi->cols + c] +=
                o.grad[static_cast<size_t>(r) * cols + off + c];
      }
      off += pi->cols;
    }
  });
}

Tensor slice_cols(const Tensor& a, int c0, int c1) {
  if (c0 < 0 || c1 > a.cols() || c0 >= c1) throw std::runtime_error("slice_cols: bad range");
  const int rows = a.rows(), cols = a.cols(), w = c1 - c0;
  auto out = make_impl(rows, w);
  for (int r = 0; r < rows; ++r)
    std::copy(a.data().begin() + static_cast<size_t>(r) * cols + c0,
              a.data().begin() + static_cast<size_t>(r) * cols + c1,
              out->val.begin() + static_cast<size_t>(r) * w);
  auto ai = a.impl();
  return make_node(std::move(out), {a}, [ai, c0, rows, cols, w](TensorImpl& o) {
    if (!ai->requires_grad) return;
    real_t* ag = ai->gradbuf();
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < w; ++c)
        ag[static_cast<size_t>(r) * cols + c0 + c] += o.grad[static_cast<size_t>(r) * w + c];
  });
}

Tensor gather_rows(const Tensor& table, const std::vector<int32_t>& ids) {
  const int cols = table.cols();
  for (int32_t id : ids)
    if (id < 0 || id >= table.rows()) throw std::runtime_error("gather_rows: id out of range");
  auto out = make_impl(static_cast<int>(ids.size()), cols);
  for (size_t r = 0; r < ids.size(); ++r)
    std::copy(table.data().begin() + static_cast<size_t>(ids[r]) * cols,
              table.data().begin() + static_cast<size_t>(ids[r] + 1) * cols,
              out->val.begin() + r * cols);
  auto ti = table.impl();
  return make_node(std::move(out), {table}, [ti, ids, cols](TensorImpl& o) {
    if (!ti->requires_grad) return;
    real_t* tg = ti->gradbuf();
    // serial scatter-add: ids may repeat
    for (size_t r = 0; r < ids.size(); ++r) {
      const real_t* g = o.grad.data() + r * cols;
      real_t* dst = tg + static_cast<size_t>(ids[r]) * cols;
      for (int c = 0; c < cols; ++c) dst[c] += g[c];
    }
  });
}

Tensor sum_all(const Tensor& a) {
  auto out = make_impl(1, 1);
  real_t acc = 0;
  for (real_t v : a.data()) acc += v;
  out->val[0] = acc;
  auto ai = a.impl();
  return make_node(std::move(out), {a}, [ai](TensorImpl& o) {
    if (!ai->requires_grad) return;
    real_t* ag = ai->gradbuf();
    const real_t g = o.grad[0];
    for (size_t i = 0; i < ai->val.size(); ++i) ag[i] += g;
  });
}

Tensor add_n(const std::vector<Tensor>& terms) {
  if (terms.empty()) throw std::runtime_error("add_n: no terms");
  const int rows = terms[0].rows(), cols = terms[0].cols();
  auto out = make_impl(rows, cols);
  for (const auto& t : terms) {
    check_same_shape(terms[0], t, "add_n");
    kern::vadd_inplace(t.data().data(), out->val.data(), out->val.size());
  }
  std::vector<std::shared_ptr<TensorImpl>> impls;
  for (const auto& t : terms) impls.push_back(t.impl());
  return make_node(std::move(out), terms, [impls](TensorImpl& o) {
    for (const auto& ti : impls)
      if (ti->requires_grad) kern::vadd_inplace(o.grad.data(), ti->gradbuf(), o.size());
  });
}

Tensor weighted_sum_cols(const std::vector<Tensor>& states, const Tensor& weights) {
  if (states.empty()) throw std::runtime_error("weighted_sum_cols: no states");
  const int rows = states[0].rows(), dim = states[0].cols();
  const int t = static_cast<int>(states.size());
  if (weights.rows() != rows || weights.cols() != t)
    throw std::runtime_error("weighted_sum_cols: weight shape mismatch");
  auto out = make_impl(rows, dim);
  for (int j = 0; j < t; ++j) {
    const real_t* sv = states[j].data().data();
    for (int r = 0; r < rows; ++r) {
      const real_t w = weights.at(r, j);
      real_t* dst = out->val.data() + static_cast<size_t>(r) * dim;
      const real_t* src = sv + static_cast<size_t>(r) * dim;
      for (int c = 0; c < dim; ++c) dst[c] += w * src[c];
    }
  }
  std::vector<Tensor> inputs = states;
  inputs.push_back(weights);
  std::vector<std::shared_ptr<TensorImpl>> impls;
  for (const auto& s : states) impls.push_back(s.impl());
  auto wi = weights.impl();
  return make_node(std::move(out), inputs, [impls, wi, rows, dim, t](TensorImpl& o) {
    for (int j = 0; j < t; ++j) {
      auto& si = impls[j];
      if (si->requires_grad) {
        real_t* sg = si->gradbuf();
        for (int r = 0; r < rows; ++r) {
          const real_t w = wi->val[static_cast<size_t>(r) * t + j];
          const real_t* g = o.grad.data() + static_cast<size_t>(r) * dim;
          real_t* dst = sg + static_cast<size_t>(r) * dim;
          for (int c = 0; c < dim; ++c) dst[c] += w * g[c];
        }
      }
      if (wi->requires_grad) {
        real_t* wg = wi->gradbuf();
        for (int r = 0; r < rows; ++r) {
          const real_t* g = o.grad.data() + static_cast<size_t>(r) * dim;
          const real_t* sv = si->val.data() + static_cast<size_t>(r) * dim;
          real_t dot = 0;
          for (int c = 0; c < dim; ++c) dot += g[c] * sv[c];
          wg[static_cast<size_t>(r) * t + j] += dot;
        }
      }
    }
  });
}

Tensor dropout(const Tensor& a, double p, Rng& rng) {
  if (p <= 0.0) return a;
  if (p >= 1.0) throw std::runtime_error("dropout: p must be < 1");
  auto out = make_impl(a.rows(), a.cols());
  auto keep = std::make_shared<std::vector<real_t>>(a.size());
  const real_t inv = real_t(1.0 / (1.0 - p));
  for (size_t i = 0; i < a.size(); ++i) {
    (*keep)[i] = rng.bernoulli(p) ? real_t(0) : inv;
    out->val[i] = a.data()[i] * (*keep)[i];
  }
  auto ai = a.impl();
  return make_node(std::move(out), {a}, [ai, keep](TensorImpl& o) {
    if (!ai->requires_grad) return;
    real_t* ag = ai->gradbuf();
    for (size_t i = 0; i < o.size(); ++i) ag[i] += o.grad[i] * (*keep)[i];
  });
}

namespace {

// Shared core: stable log-softmax NLL. Returns sum over effective targets.
Tensor ce_impl(const Tensor& logits, const std::vector<int32_t>& targets, int ignore_index,
               int* count_out, bool mean) {
  const int n = logits.rows(), v = logits.cols();
  if (static_cast<int>(targets.size()) != n)
    throw std::runtime_error("cross_entropy: target count != logit rows");
  for (int32_t t : targets)
    if (t != ignore_index && (t < 0 || t >= v))
      throw std::runtime_error("cross_entropy: target out of range");

  auto probs = std::make_shared<std::vector<real_t>>(static_cast<size_t>(n) * v);
  kern::softmax_rows(logits.data().data(), probs->data(), n, v);

  int count = 0;
  double loss = 0;
  for (int r = 0; r < n; ++r) {
    if (targets[r] == ignore_index) continue;
    ++count;
    const real_t* row = logits.data().data() + static_cast<size_t>(r) * v;
    real_t mx = row[0];
    for (int c = 1; c < v; ++c) mx = std::max(mx, row[c]);
    double sum = 0;
    for (int c = 0; c < v; ++c) sum += std::exp(static_cast<double>(row[c] - mx));
    loss += std::log(sum) + mx - row[targets[r]];
  }
  if (count == 0) throw std::runtime_error("cross_entropy: no effective target positions");
  if (count_out) *count_out = count;

  auto out = make_impl(1, 1);
  out->val[0] = static_cast<real_t>(mean ? loss / count : loss);
  auto li = logits.impl();
  return make_node(std::move(out), {logits},
                   [li, probs, targets, ignore_index, count, mean, n, v](TensorImpl& o) {
                     if (!li->requires_grad) return;
                     real_t* lg = li->gradbuf();
                     const real_t g = o.grad[0] * (mean ? real_t(1) / count : real_t(1));
                     for (int r = 0; r < n; ++r) {
                       if (targets[r] == ignore_index) continue;
                       const real_t* pr = probs->data() + static_cast<size_t>(r) * v;
                       real_t* dst = lg + static_cast<size_t>(r) * v;
                       for (int c = 0; c < v; ++c) dst[c] += g * pr[c];
                       dst[targets[r]] -= g;
                     }
                   });
}

}  // namespace

Tensor cross_entropy(const Tensor& logits, const std::vector<int32_t>& targets, int ignore_index) {
  return ce_impl(logits, targets, ignore_index, nullptr, true);
}

Tensor cross_entropy_sum(const Tensor& logits, const std::vector<int32_t>& targets,
                         int ignore_index, int* count_out) {
  return ce_impl(logits, targets, ignore_index, count_out, false);
}

void backward(const Tensor& loss) {
  if (!loss.is_scalar()) throw std::runtime_error("backward: loss must be a scalar");
  auto root = loss.impl();
  if (!root->requires_grad) return;

  // iterative post-order DFS for a topological order
  std::vector<TensorImpl*> order;
  std::unordered_set<TensorImpl*> seen;
  std::vector<std::pair<TensorImpl*, size_t>> stack{{root.get(), 0}};
  seen.insert(root.get());
  while (!stack.empty()) {
    auto& [node, idx] = stack.back();
    if (idx < node->parents.size()) {
      TensorImpl* p = node->parents[idx++].get();
      if (p->requires_grad && seen.insert(p).second) stack.push_back({p, 0});
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  // Interior node grads are scratch for this pass; only leaf grads
  // (parameters, inputs) accumulate across backward calls.
  for (TensorImpl* node : order)
    if (node->backfn && !node->grad.empty())
      std::fill(node->grad.begin(), node->grad.end(), real_t(0));

  root->gradbuf()[0] += real_t(1);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    TensorImpl* node = *it;
    if (node->backfn) {
      node->gradbuf();
      node->backfn(*node);
    }
  }
}

}  // namespace ranmt
