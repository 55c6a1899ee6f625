#pragma once

#include <cstddef>
#include <vector>

#include "hmn/numerics/params.hpp"

namespace hmn::trainer {

template <typename T>
class Adam {
 public:
  Adam(const num::ParamStore<T>& params, double learning_rate, double beta1 = 0.9, double beta2 = 0.999,
       double epsilon = 1e-8);

  void step(num::ParamStore<T>& params, const num::GradStore<T>& grads);
  std::size_t steps() const { return steps_; }
  double learning_rate() const { return lr_; }

 private:
  double lr_, beta1_, beta2_, epsilon_;
  std::size_t steps_ = 0;
  std::vector<num::Array<T>> m_;
  std::vector<num::Array<T>> v_;
};

/// Rescales grads so their global norm is at most max_norm; returns the norm
/// before clipping.
template <typename T>
double clip_global_norm(num::GradStore<T>& grads, double max_norm);

extern template class Adam<float>;
extern template class Adam<double>;

}  // namespace hmn::trainer
