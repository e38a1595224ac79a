#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <stdexcept>
#include <vector>

#include "ranmt/real.hpp"
#include "ranmt/rng.hpp"

namespace ranmt {

// Reverse-mode autodiff over dense row-major 2-D tensors. Each op records a
// node holding its parents and a backward closure; the tape lives as long as
// the tensors referencing it and is rebuilt every training step. Scalars are
// [1 x 1], vectors [1 x n] or [n x 1].

struct TensorImpl {
  int rows = 0, cols = 0;
  std::vector<real_t> val;
  std::vector<real_t> grad;  // allocated lazily, zero-filled
  bool requires_grad = false;
  std::vector<std::shared_ptr<TensorImpl>> parents;
  std::function<void(TensorImpl&)> backfn;

  size_t size() const { return val.size(); }
  real_t* gradbuf() {
    if (grad.empty()) grad.assign(val.size(), real_t(0));
    return grad.data();
  }
};

class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::shared_ptr<TensorImpl> impl) : impl_(std::move(impl)) {}

  static Tensor zeros(int rows, int cols, bool requires_grad = false);
  static Tensor full(int rows, int cols, real_t value);
  static Tensor scalar(real_t value) { return full(1, 1, value); }
  static Tensor from(std::vector<real_t> values, int rows, int cols);

  bool defined() const { return impl_ != nullptr; }
  int rows() const { return impl_->rows; }
  int cols() const { return impl_->cols; }
  size_t size() const { return impl_->val.size(); }
  bool is_scalar() const { return rows() == 1 && cols() == 1; }

  std::vector<real_t>& data() { return impl_->val; }
  const std::vector<real_t>& data() const { return impl_->val; }
  real_t at(int r, int c) const { return impl_->val[static_cast<size_t>(r) * cols() + c]; }
  real_t& at(int r, int c) { return impl_->val[static_cast<size_t>(r) * cols() + c]; }
  real_t item() const {
    if (!is_scalar()) throw std::runtime_error("Tensor::item: not a scalar");
    return impl_->val[0];
  }

  bool requires_grad() const { return impl_->requires_grad; }
  void set_requires_grad(bool b) { impl_->requires_grad = b; }
  const std::vector<real_t>& grad() const { return impl_->grad; }
  void zero_grad() {
    if (!impl_->grad.empty()) std::fill(impl_->grad.begin(), impl_->grad.end(), real_t(0));
  }

  const std::shared_ptr<TensorImpl>& impl() const { return impl_; }

 private:
  std::shared_ptr<TensorImpl> impl_;
};

// While a NoGrad is alive, ops do not record tape nodes (used for decoding
// and dev evaluation).
struct NoGrad {
  NoGrad();
  ~NoGrad();
  NoGrad(const NoGrad&) = delete;
};
bool grad_enabled();

Tensor matmul(const Tensor& a, const Tensor& b, bool trans_a = false, bool trans_b = false);

// add: same shape, or b broadcast as a row [1 x n] or a column [m x 1]
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
// mul: elementwise, same shape, or b broadcast as a column [m x 1]
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, real_t s);
Tensor tanh_t(const Tensor& a);
Tensor sigmoid_t(const Tensor& a);
Tensor softmax(const Tensor& a, int axis);
Tensor concat_cols(const std::vector<Tensor>& parts);
Tensor slice_cols(const Tensor& a, int c0, int c1);
Tensor gather_rows(const Tensor& table, const std::vector<int32_t>& ids);
Tensor sum_all(const Tensor& a);
Tensor add_n(const std::vector<Tensor>& terms);
// ctx = sum_j weights[:, j] (*) states[j]; states[j] are [B x D], weights [B x T]
Tensor weighted_sum_cols(const std::vector<Tensor>& states, const Tensor& weights);
// Inverted dropout; draws size(a) values from rng even at p == 0 is avoided:
// p == 0 returns a unchanged and consumes no randomness.
Tensor dropout(const Tensor& a, double p, Rng& rng);

// Mean negative log-softmax probability of targets over positions whose
// target != ignore_index. Throws if no position is effective.
Tensor cross_entropy(const Tensor& logits, const std::vector<int32_t>& targets, int ignore_index);
// Sum form plus the count of effective positions, for composing a corpus
// level mean across steps.
Tensor cross_entropy_sum(const Tensor& logits, const std::vector<int32_t>& targets,
                         int ignore_index, int* count_out);

void backward(const Tensor& loss);

}  // namespace ranmt
