#pragma once

// Central finite-difference gradient oracle. Test-only; independent of the
// backward implementations it checks.

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "ranmt/optim.hpp"
#include "ranmt/tensor.hpp"

namespace gradcheck {

struct Failure {
  std::string param;
  size_t index;
  double analytic, numeric, rel_err;
};

// Checks d loss / d p for every parameter in the store against central
// differences. `make_loss` must rebuild the loss from current parameter
// values on every call. `max_elems` samples that many elements per
// parameter (deterministically) to bound runtime; 0 means all.
inline std::vector<Failure> check(ranmt::ParamStore& store,
                                  const std::function<ranmt::Tensor()>& make_loss, double tol,
                                  double h = 1e-5, size_t max_elems = 0) {
  using ranmt::real_t;
  std::vector<Failure> failures;

  store.zero_grad();
  ranmt::Tensor loss = make_loss();
  ranmt::backward(loss);

  std::map<std::string, std::vector<real_t>> analytic;
  for (auto& [name, p] : store.all()) {
    auto g = p.value.grad();
    if (g.empty()) g.assign(p.value.size(), real_t(0));
    analytic[name] = g;
  }

  for (auto& [name, p] : store.all()) {
    auto& vals = p.value.data();
    size_t stride = 1;
    if (max_elems > 0 && vals.size() > max_elems) stride = vals.size() / max_elems + 1;
    for (size_t i = 0; i < vals.size(); i += stride) {
      const real_t saved = vals[i];
      double fp, fm;
      {
        ranmt::NoGrad ng;
        vals[i] = saved + static_cast<real_t>(h);
        fp = make_loss().item();
        vals[i] = saved - static_cast<real_t>(h);
        fm = make_loss().item();
        vals[i] = saved;
      }
      const double numeric = (fp - fm) / (2 * h);
      const double a = analytic[name][i];
      const double denom = std::max({1.0, std::abs(a), std::abs(numeric)});
      const double rel = std::abs(a - numeric) / denom;
      if (rel > tol) failures.push_back({name, i, a, numeric, rel});
    }
  }
  return failures;
}

}  // namespace gradcheck
