#include "ranmt/optim.hpp"

#include <cmath>
#include <stdexcept>

namespace ranmt {

Parameter& ParamStore::create(const std::string& name, int rows, int cols, Init init,
                              uint64_t seed) {
  if (params_.count(name)) throw std::runtime_error("ParamStore: duplicate parameter " + name);
  Tensor t = Tensor::zeros(rows, cols, true);
  Rng rng(seed, "init/" + name);
  switch (init) {
    case Init::Zero:
      break;
    case Init::Glorot: {
      const double limit = std::sqrt(6.0 / (rows + cols));
      for (auto& v : t.data()) v = static_cast<real_t>(rng.uniform(-limit, limit));
      break;
    }
    case Init::EmbedUniform:
      for (auto& v : t.data()) v = static_cast<real_t>(rng.uniform(-0.1, 0.1));
      break;
  }
  Parameter p;
  p.name = name;
  p.value = t;
  p.adam_m.assign(t.size(), real_t(0));
  p.adam_v.assign(t.size(), real_t(0));
  auto [it, ok] = params_.emplace(name, std::move(p));
  (void)ok;
  return it->second;
}

Parameter& ParamStore::create_from(const std::string& name, Tensor value) {
  if (params_.count(name)) throw std::runtime_error("ParamStore: duplicate parameter " + name);
  value.set_requires_grad(true);
  Parameter p;
  p.name = name;
  p.value = value;
  p.adam_m.assign(value.size(), real_t(0));
  p.adam_v.assign(value.size(), real_t(0));
  auto [it, ok] = params_.emplace(name, std::move(p));
  (void)ok;
  return it->second;
}

Parameter& ParamStore::get(const std::string& name) {
  auto it = params_.find(name);
  if (it == params_.end()) throw std::runtime_error("ParamStore: unknown parameter " + name);
  return it->second;
}

const Parameter& ParamStore::get(const std::string& name) const {
  auto it = params_.find(name);
  if (it == params_.end()) throw std::runtime_error("ParamStore: unknown parameter " + name);
  return it->second;
}

void ParamStore::zero_grad() {
  for (auto& [name, p] : params_) p.value.zero_grad();
}

double ParamStore::clip_global_norm(double max_norm) {
  double sq = 0;
  for (auto& [name, p] : params_)
    for (real_t g : p.value.grad()) sq += static_cast<double>(g) * g;
  const double norm = std::sqrt(sq);
  if (max_norm > 0 && norm > max_norm) {
    const real_t s = static_cast<real_t>(max_norm / norm);
    for (auto& [name, p] : params_) {
      auto& impl = *p.value.impl();
      for (auto& g : impl.grad) g *= s;
    }
  }
  return norm;
}

void adam_step(ParamStore& params, double lr, double beta1, double beta2, double eps) {
  for (auto& [name, p] : params.all()) {
    auto& impl = *p.value.impl();
    if (impl.grad.empty()) impl.grad.assign(impl.val.size(), real_t(0));
    p.step_count += 1;
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(p.step_count));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(p.step_count));
    for (size_t i = 0; i < impl.val.size(); ++i) {
      const double g = impl.grad[i];
      if (!std::isfinite(g))
        throw std::runtime_error("adam_step: non-finite gradient in parameter " + name);
      const double m = beta1 * p.adam_m[i] + (1.0 - beta1) * g;
      const double v = beta2 * p.adam_v[i] + (1.0 - beta2) * g * g;
      p.adam_m[i] = static_cast<real_t>(m);
      p.adam_v[i] = static_cast<real_t>(v);
      const double mhat = m / bc1;
      const double vhat = v / bc2;
      impl.val[i] -= static_cast<real_t>(lr * mhat / (std::sqrt(vhat) + eps));
    }
  }
}

void adam_step(ParamStore& params, const AdamConfig& cfg) {
  adam_step(params, cfg.lr, cfg.beta1, cfg.beta2, cfg.eps);
}

}  // namespace ranmt
