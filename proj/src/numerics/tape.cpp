#include "hmn/numerics/tape.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "hmn/errors.hpp"

namespace hmn::num {

std::string_view op_name(OpKind kind) {
  switch (kind) {
    case OpKind::Constant: return "constant";
    case OpKind::Param: return "param";
    case OpKind::Add: return "add";
    case OpKind::Sub: return "sub";
    case OpKind::Mul: return "elementwise-mul";
    case OpKind::Scale: return "scale";
    case OpKind::MatVec: return "matvec";
    case OpKind::MatTVec: return "matvec-transposed";
    case OpKind::Concat: return "concat";
    case OpKind::StackRows: return "stack-rows";
    case OpKind::RowSelect: return "row-select";
    case OpKind::SumRows: return "sum-rows";
    case OpKind::Sigmoid: return "sigmoid";
    case OpKind::Tanh: return "tanh";
    case OpKind::Softmax: return "softmax";
    case OpKind::LogSoftmax: return "log-softmax";
    case OpKind::Log: return "log";
    case OpKind::Dot: return "dot";
    case OpKind::Pick: return "pick";
  }
  return "unknown";
}

template <typename T>
Tape<T>::Tape(const ParamStore<T>& params, GradStore<T>* grads)
    : params_(params), grads_(grads), param_nodes_(params.size(), -1) {
  if (grads_ && grads_->size() != params_.size()) {
    throw ContractError("gradient store does not match parameter store");
  }
  nodes_.reserve(1024);
}

template <typename T>
const typename Tape<T>::Node& Tape<T>::node(Var v) const {
  if (v.id >= nodes_.size()) throw ContractError("variable does not belong to this tape");
  return nodes_[v.id];
}

template <typename T>
const Array<T>& Tape<T>::val(std::uint32_t id) const {
  const Node& n = nodes_[id];
  return n.external_value ? *n.external_value : n.value;
}

template <typename T>
const Array<T>& Tape<T>::value(Var v) const {
  node(v);
  return val(v.id);
}

template <typename T>
Array<T> Tape<T>::grad(Var v) const {
  const Node& n = node(v);
  if (n.external_grad) return *n.external_grad;
  if (n.grad.empty()) return Array<T>(val(v.id).shape());
  return n.grad;
}

template <typename T>
Array<T>& Tape<T>::grad_buffer(std::uint32_t id) {
  Node& n = nodes_[id];
  if (n.external_grad) return *n.external_grad;
  if (n.grad.empty()) n.grad = Array<T>(val(id).shape());
  return n.grad;
}

template <typename T>
Var Tape<T>::push(Node n) {
  nodes_.push_back(std::move(n));
  return Var{static_cast<std::uint32_t>(nodes_.size() - 1)};
}

template <typename T>
void Tape<T>::dimension_error(OpKind kind, const Shape& a, const Shape& b) const {
  throw DimensionError(std::string(op_name(kind)) + ": incompatible shapes " + shape_string(a) +
                       " and " + shape_string(b));
}

template <typename T>
void Tape<T>::require_vector(OpKind kind, Var v) const {
  const auto& s = value(v).shape();
  if (s.size() != 1) dimension_error(kind, s, Shape{});
}

template <typename T>
void Tape<T>::require_same(OpKind kind, Var a, Var b) const {
  const auto& sa = value(a).shape();
  const auto& sb = value(b).shape();
  if (sa != sb) dimension_error(kind, sa, sb);
}

template <typename T>
Var Tape<T>::constant(Array<T> value) {
  Node n;
  n.kind = OpKind::Constant;
  n.value = std::move(value);
  return push(std::move(n));
}

template <typename T>
Var Tape<T>::param(ParamId id) {
  if (id.index >= params_.size()) throw ContractError("parameter id out of range");
  if (param_nodes_[id.index] >= 0) return Var{static_cast<std::uint32_t>(param_nodes_[id.index])};
  Node n;
  n.kind = OpKind::Param;
  n.index = id.index;
  n.external_value = &params_.value(id);
  n.external_grad = grads_ ? &grads_->grad(id) : nullptr;
  n.needs_grad = grads_ != nullptr;
  Var v = push(std::move(n));
  param_nodes_[id.index] = v.id;
  return v;
}

template <typename T>
Var Tape<T>::add(Var a, Var b) {
  require_same(OpKind::Add, a, b);
  Node n;
  n.kind = OpKind::Add;
  n.a = a.id;
  n.b = b.id;
  n.value = value(a);
  n.value.vec() += value(b).vec();
  n.needs_grad = nodes_[a.id].needs_grad || nodes_[b.id].needs_grad;
  return push(std::move(n));
}

template <typename T>
Var Tape<T>::sub(Var a, Var b) {
  require_same(OpKind::Sub, a, b);
  Node n;
  n.kind = OpKind::Sub;
  n.a = a.id;
  n.b = b.id;
  n.value = value(a);
  n.value.vec() -= value(b).vec();
  n.needs_grad = nodes_[a.id].needs_grad || nodes_[b.id].needs_grad;
  return push(std::move(n));
}

template <typename T>
Var Tape<T>::mul(Var a, Var b) {
  require_same(OpKind::Mul, a, b);
  Node n;
  n.kind = OpKind::Mul;
  n.a = a.id;
  n.b = b.id;
  n.value = value(a);
  n.value.vec().array() *= value(b).vec().array();
  n.needs_grad = nodes_[a.id].needs_grad || nodes_[b.id].needs_grad;
  return push(std::move(n));
}

template <typename T>
Var Tape<T>::scale(Var a, T factor) {
  Node n;
  n.kind = OpKind::Scale;
  n.a = a.id;
  n.factor = factor;
  n.value = value(a);
  n.value.vec() *= factor;
  n.needs_grad = nodes_[a.id].needs_grad;
  return push(std::move(n));
}

template <typename T>
Var Tape<T>::matvec(Var m, Var x) {
  const auto& mv = value(m);
  const auto& xv = value(x);
  if (mv.rank() != 2 || xv.rank() != 1 || mv.cols() != xv.size()) {
    dimension_error(OpKind::MatVec, mv.shape(), xv.shape());
  }
  Node n;
  n.kind = OpKind::MatVec;
  n.a = m.id;
  n.b = x.id;
  n.value = Array<T>({mv.rows()});
  n.value.vec().noalias() = mv.mat() * xv.vec();
  n.needs_grad = nodes_[m.id].needs_grad || nodes_[x.id].needs_grad;
  return push(std::move(n));
}

template <typename T>
Var Tape<T>::matvec_t(Var m, Var x) {
  const auto& mv = value(m);
  const auto& xv = value(x);
  if (mv.rank() != 2 || xv.rank() != 1 || mv.rows() != xv.size()) {
    dimension_error(OpKind::MatTVec, mv.shape(), xv.shape());
  }
  Node n;
  n.kind = OpKind::MatTVec;
  n.a = m.id;
  n.b = x.id;
  n.value = Array<T>({mv.cols()});
  n.value.vec().noalias() = mv.mat().transpose() * xv.vec();
  n.needs_grad = nodes_[m.id].needs_grad || nodes_[x.id].needs_grad;
  return push(std::move(n));
}

template <typename T>
Var Tape<T>::concat(Var a, Var b) {
  const Var parts[] = {a, b};
  return concat(parts);
}

template <typename T>
Var Tape<T>::concat(std::span<const Var> parts) {
  if (parts.empty()) throw DimensionError("concat: no inputs");
  std::size_t total = 0;
  for (Var p : parts) {
    require_vector(OpKind::Concat, p);
    total += value(p).size();
  }
  Node n;
  n.kind = OpKind::Concat;
  n.value = Array<T>({total});
  std::size_t offset = 0;
  for (Var p : parts) {
    const auto& pv = value(p);
    std::copy(pv.data(), pv.data() + pv.size(), n.value.data() + offset);
    offset += pv.size();
    n.inputs.push_back(p.id);
    n.needs_grad = n.needs_grad || nodes_[p.id].needs_grad;
  }
  return push(std::move(n));
}

template <typename T>
Var Tape<T>::stack_rows(std::span<const Var> rows) {
  if (rows.empty()) throw DimensionError("stack-rows: no inputs");
  const std::size_t width = value(rows.front()).size();
  for (Var r : rows) {
    require_vector(OpKind::StackRows, r);
    if (value(r).size() != width) dimension_error(OpKind::StackRows, value(rows.front()).shape(), value(r).shape());
  }
  Node n;
  n.kind = OpKind::StackRows;
  n.value = Array<T>({rows.size(), width});
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& rv = value(rows[i]);
    std::copy(rv.data(), rv.data() + width, n.value.data() + i * width);
    n.inputs.push_back(rows[i].id);
    n.needs_grad = n.needs_grad || nodes_[rows[i].id].needs_grad;
  }
  return push(std::move(n));
}

template <typename T>
Var Tape<T>::row_select(Var m, std::size_t row) {
  const auto& mv = value(m);
  if (mv.rank() != 2 || row >= mv.rows()) {
    dimension_error(OpKind::RowSelect, mv.shape(), Shape{row + 1});
  }
  Node n;
  n.kind = OpKind::RowSelect;
  n.a = m.id;
  n.index = row;
  n.value = Array<T>({mv.cols()});
  std::copy(mv.data() + row * mv.cols(), mv.data() + (row + 1) * mv.cols(), n.value.data());
  n.needs_grad = nodes_[m.id].needs_grad;
  return push(std::move(n));
}

template <typename T>
Var Tape<T>::sum_rows(Var m) {
  const auto& mv = value(m);
  if (mv.rank() != 2) dimension_error(OpKind::SumRows, mv.shape(), Shape{});
  Node n;
  n.kind = OpKind::SumRows;
  n.a = m.id;
  n.value = Array<T>({mv.cols()});
  n.value.vec() = mv.mat().colwise().sum().transpose();
  n.needs_grad = nodes_[m.id].needs_grad;
  return push(std::move(n));
}

template <typename T>
Var Tape<T>::sum(std::span<const Var> terms) {
  if (terms.empty()) throw DimensionError("sum: no inputs");
  Node n;
  n.kind = OpKind::Add;
  n.value = value(terms.front());
  n.inputs.push_back(terms.front().id);
  n.needs_grad = nodes_[terms.front().id].needs_grad;
  for (std::size_t i = 1; i < terms.size(); ++i) {
    require_same(OpKind::Add, terms.front(), terms[i]);
    n.value.vec() += value(terms[i]).vec();
    n.inputs.push_back(terms[i].id);
    n.needs_grad = n.needs_grad || nodes_[terms[i].id].needs_grad;
  }
  return push(std::move(n));
}

template <typename T>
Var Tape<T>::sigmoid(Var a) {
  Node n;
  n.kind = OpKind::Sigmoid;
  n.a = a.id;
  n.value = value(a);
  for (auto& x : n.value.values()) x = T(1) / (T(1) + std::exp(-x));
  n.needs_grad = nodes_[a.id].needs_grad;
  return push(std::move(n));
}

template <typename T>
Var Tape<T>::tanh(Var a) {
  Node n;
  n.kind = OpKind::Tanh;
  n.a = a.id;
  n.value = value(a);
  for (auto& x : n.value.values()) x = std::tanh(x);
  n.needs_grad = nodes_[a.id].needs_grad;
  return push(std::move(n));
}

template <typename T>
Var Tape<T>::softmax(Var a) {
  require_vector(OpKind::Softmax, a);
  Node n;
  n.kind = OpKind::Softmax;
  n.a = a.id;
  n.value = value(a);
  auto v = n.value.vec();
  v.array() -= v.maxCoeff();
  v = v.array().exp();
  v /= v.sum();
  n.needs_grad = nodes_[a.id].needs_grad;
  return push(std::move(n));
}

template <typename T>
Var Tape<T>::log_softmax(Var a) {
  require_vector(OpKind::LogSoftmax, a);
  Node n;
  n.kind = OpKind::LogSoftmax;
  n.a = a.id;
  n.value = value(a);
  auto v = n.value.vec();
  v.array() -= v.maxCoeff();
  const T log_z = std::log(v.array().exp().sum());
  v.array() -= log_z;
  n.needs_grad = nodes_[a.id].needs_grad;
  return push(std::move(n));
}

template <typename T>
Var Tape<T>::log(Var a) {
  Node n;
  n.kind = OpKind::Log;
  n.a = a.id;
  n.value = value(a);
  for (auto& x : n.value.values()) x = std::log(x);
  n.needs_grad = nodes_[a.id].needs_grad;
  return push(std::move(n));
}

template <typename T>
Var Tape<T>::dot(Var a, Var b) {
  require_vector(OpKind::Dot, a);
  require_same(OpKind::Dot, a, b);
  Node n;
  n.kind = OpKind::Dot;
  n.a = a.id;
  n.b = b.id;
  n.value = Array<T>({1}, value(a).vec().dot(value(b).vec()));
  n.needs_grad = nodes_[a.id].needs_grad || nodes_[b.id].needs_grad;
  return push(std::move(n));
}

template <typename T>
Var Tape<T>::pick(Var a, std::size_t index) {
  const auto& av = value(a);
  if (index >= av.size()) dimension_error(OpKind::Pick, av.shape(), Shape{index + 1});
  Node n;
  n.kind = OpKind::Pick;
  n.a = a.id;
  n.index = index;
  n.value = Array<T>({1}, av[index]);
  n.needs_grad = nodes_[a.id].needs_grad;
  return push(std::move(n));
}

template <typename T>
void Tape<T>::backward(Var root) {
  if (value(root).size() != 1) {
    throw ContractError("backward: root must be a scalar, got shape " + shape_string(value(root).shape()));
  }
  for (auto& n : nodes_) {
    if (!n.external_grad) n.grad = Array<T>();
  }
  if (!nodes_[root.id].needs_grad) return;
  grad_buffer(root.id)[0] += T(1);
  for (std::int64_t id = root.id; id >= 0; --id) {
    const Node& n = nodes_[id];
    if (!n.needs_grad || n.external_grad || n.grad.empty()) continue;
    propagate(static_cast<std::uint32_t>(id));
  }
}

template <typename T>
void Tape<T>::propagate(std::uint32_t id) {
  // Inputs always have smaller ids, so writing their gradient buffers never
  // reallocates nodes_ and `g` stays valid.
  const Node& n = nodes_[id];
  const Array<T>& g = n.grad;
  auto needs = [this](std::uint32_t i) { return nodes_[i].needs_grad; };

  switch (n.kind) {
    case OpKind::Constant:
    case OpKind::Param:
      break;
    case OpKind::Add:
      if (!n.inputs.empty()) {
        for (auto in : n.inputs) {
          if (needs(in)) grad_buffer(in).vec() += g.vec();
        }
      } else {
        if (needs(n.a)) grad_buffer(n.a).vec() += g.vec();
        if (needs(n.b)) grad_buffer(n.b).vec() += g.vec();
      }
      break;
    case OpKind::Sub:
      if (needs(n.a)) grad_buffer(n.a).vec() += g.vec();
      if (needs(n.b)) grad_buffer(n.b).vec() -= g.vec();
      break;
    case OpKind::Mul:
      if (needs(n.a)) grad_buffer(n.a).vec().array() += g.vec().array() * val(n.b).vec().array();
      if (needs(n.b)) grad_buffer(n.b).vec().array() += g.vec().array() * val(n.a).vec().array();
      break;
    case OpKind::Scale:
      if (needs(n.a)) grad_buffer(n.a).vec() += n.factor * g.vec();
      break;
    case OpKind::MatVec:
      if (needs(n.a)) grad_buffer(n.a).mat().noalias() += g.vec() * val(n.b).vec().transpose();
      if (needs(n.b)) grad_buffer(n.b).vec().noalias() += val(n.a).mat().transpose() * g.vec();
      break;
    case OpKind::MatTVec:
      if (needs(n.a)) grad_buffer(n.a).mat().noalias() += val(n.b).vec() * g.vec().transpose();
      if (needs(n.b)) grad_buffer(n.b).vec().noalias() += val(n.a).mat() * g.vec();
      break;
    case OpKind::Concat: {
      std::size_t offset = 0;
      for (auto in : n.inputs) {
        const std::size_t len = val(in).size();
        if (needs(in)) grad_buffer(in).vec() += g.vec().segment(offset, len);
        offset += len;
      }
      break;
    }
    case OpKind::StackRows: {
      const std::size_t width = g.cols();
      for (std::size_t i = 0; i < n.inputs.size(); ++i) {
        if (!needs(n.inputs[i])) continue;
        grad_buffer(n.inputs[i]).vec() += g.vec().segment(i * width, width);
      }
      break;
    }
    case OpKind::RowSelect:
      if (needs(n.a)) grad_buffer(n.a).mat().row(n.index) += g.vec().transpose();
      break;
    case OpKind::SumRows:
      if (needs(n.a)) grad_buffer(n.a).mat().rowwise() += g.vec().transpose();
      break;
    case OpKind::Sigmoid:
      if (needs(n.a)) {
        const auto y = n.value.vec().array();
        grad_buffer(n.a).vec().array() += g.vec().array() * y * (T(1) - y);
      }
      break;
    case OpKind::Tanh:
      if (needs(n.a)) {
        const auto y = n.value.vec().array();
        grad_buffer(n.a).vec().array() += g.vec().array() * (T(1) - y * y);
      }
      break;
    case OpKind::Softmax:
      if (needs(n.a)) {
        const auto y = n.value.vec();
        const T inner = g.vec().dot(y);
        grad_buffer(n.a).vec().array() += y.array() * (g.vec().array() - inner);
      }
      break;
    case OpKind::LogSoftmax:
      if (needs(n.a)) {
        const T total = g.vec().sum();
        grad_buffer(n.a).vec().array() += g.vec().array() - n.value.vec().array().exp() * total;
      }
      break;
    case OpKind::Log:
      if (needs(n.a)) grad_buffer(n.a).vec().array() += g.vec().array() / val(n.a).vec().array();
      break;
    case OpKind::Dot:
      if (needs(n.a)) grad_buffer(n.a).vec() += g[0] * val(n.b).vec();
      if (needs(n.b)) grad_buffer(n.b).vec() += g[0] * val(n.a).vec();
      break;
    case OpKind::Pick:
      if (needs(n.a)) grad_buffer(n.a)[n.index] += g[0];
      break;
  }
}

template class Tape<float>;
template class Tape<double>;
template class Tape<long double>;

}  // namespace hmn::num
