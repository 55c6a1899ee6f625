#include "hmn/trainer/adam.hpp"

#include <cmath>
#include <limits>

#include "hmn/errors.hpp"

namespace hmn::trainer {

template <typename T>
Adam<T>::Adam(const num::ParamStore<T>& params, double learning_rate, double beta1, double beta2, double epsilon)
    : lr_(learning_rate), beta1_(beta1), beta2_(beta2), epsilon_(epsilon) {
  for (std::size_t i = 0; i < params.size(); ++i) {
    m_.emplace_back(params.value(num::ParamId{i}).shape());
    v_.emplace_back(params.value(num::ParamId{i}).shape());
  }
}

template <typename T>
void Adam<T>::step(num::ParamStore<T>& params, const num::GradStore<T>& grads) {
  if (params.size() != m_.size() || grads.size() != m_.size()) throw ContractError("adam: parameter count changed");
  ++steps_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(steps_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(steps_));
  const T step = static_cast<T>(lr_ * std::sqrt(c2) / c1);
  const T eps = static_cast<T>(epsilon_ * std::sqrt(c2));
  const T b1 = static_cast<T>(beta1_), b2 = static_cast<T>(beta2_);
  for (std::size_t i = 0; i < m_.size(); ++i) {
    const auto g = grads.grad(num::ParamId{i}).vec().array();
    auto m = m_[i].vec().array();
    auto v = v_[i].vec().array();
    m = b1 * m + (T(1) - b1) * g;
    v = b2 * v + (T(1) - b2) * g * g;
    params.value(num::ParamId{i}).vec().array() -= step * m / (v.sqrt() + eps);
  }
}

template <typename T>
double clip_global_norm(num::GradStore<T>& grads, double max_norm) {
  const double norm = static_cast<double>(grads.global_norm());
  if (!(norm > max_norm)) return norm;
  grads.scale(static_cast<T>(max_norm / norm));
  // Rounding in the rescale can leave the norm a few ulps above the bound.
  for (int i = 0; i < 8 && static_cast<double>(grads.global_norm()) > max_norm; ++i) {
    grads.scale(T(1) - T(4) * std::numeric_limits<T>::epsilon());
  }
  return norm;
}

template class Adam<float>;
template class Adam<double>;
template double clip_global_norm<float>(num::GradStore<float>&, double);
template double clip_global_norm<double>(num::GradStore<double>&, double);

}  // namespace hmn::trainer
