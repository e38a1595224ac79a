#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "ranmt/tensor.hpp"

namespace ranmt {

enum class Init { Zero, Glorot, EmbedUniform };

struct Parameter {
  std::string name;
  Tensor value;
  std::vector<real_t> adam_m, adam_v;
  int64_t step_count = 0;
};

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double clip_norm = 5.0;
};

// Owns every learnable tensor of a model, keyed by unique name. Iteration is
// in name order, so all whole-store operations are deterministic.
class ParamStore {
 public:
  // Initial values come from an RNG stream named after the parameter, so the
  // result does not depend on creation order.
  Parameter& create(const std::string& name, int rows, int cols, Init init, uint64_t seed);
  // Adopts externally produced values (checkpoint load, vocab extension).
  Parameter& create_from(const std::string& name, Tensor value);

  Parameter& get(const std::string& name);
  const Parameter& get(const std::string& name) const;
  bool has(const std::string& name) const { return params_.count(name) > 0; }

  std::map<std::string, Parameter>& all() { return params_; }
  const std::map<std::string, Parameter>& all() const { return params_; }

  void zero_grad();
  // Global L2 norm of all grads; returns the pre-clip norm.
  double clip_global_norm(double max_norm);

 private:
  std::map<std::string, Parameter> params_;
};

// Standard Adam with bias correction. Throws on non-finite gradients, naming
// the offending parameter.
void adam_step(ParamStore& params, const AdamConfig& cfg);
void adam_step(ParamStore& params, double lr, double beta1, double beta2, double eps);

}  // namespace ranmt
