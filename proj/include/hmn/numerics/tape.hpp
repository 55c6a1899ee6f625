#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "hmn/numerics/array.hpp"
#include "hmn/numerics/params.hpp"

namespace hmn::num {

/// Handle to a node recorded on a Tape.
struct Var {
  std::uint32_t id = 0;
};

enum class OpKind : std::uint8_t {
  Constant,
  Param,
  Add,
  Sub,
  Mul,
  Scale,
  MatVec,
  MatTVec,
  Concat,
  StackRows,
  RowSelect,
  SumRows,
  Sigmoid,
  Tanh,
  Softmax,
  LogSoftmax,
  Log,
  Dot,
  Pick,
};

std::string_view op_name(OpKind kind);

/// Define-by-run computation graph with reverse-mode differentiation.
///
/// Nodes are appended in evaluation order, so the node list is already a
/// topological order and backward is a single reverse sweep. Parameter leaves
/// read directly from a ParamStore and accumulate their gradients into a
/// GradStore, which lets one GradStore collect a whole mini-batch.
template <typename T>
class Tape {
 public:
  explicit Tape(const ParamStore<T>& params, GradStore<T>* grads = nullptr);

  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Array<T> value);
  /// Leaf for a stored parameter. Repeated calls return the same node.
  Var param(ParamId id);

  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);
  Var scale(Var a, T factor);
  /// M[r x c] * x[c] -> [r]
  Var matvec(Var m, Var x);
  /// M[r x c]^T * x[r] -> [c], i.e. the x-weighted sum of M's rows.
  Var matvec_t(Var m, Var x);
  Var concat(Var a, Var b);
  Var concat(std::span<const Var> parts);
  /// Vectors of equal length d -> [n x d].
  Var stack_rows(std::span<const Var> rows);
  Var row_select(Var m, std::size_t row);
  Var sum_rows(Var m);
  /// n-ary elementwise sum of equally shaped nodes.
  Var sum(std::span<const Var> terms);
  Var sigmoid(Var a);
  Var tanh(Var a);
  Var softmax(Var a);
  Var log_softmax(Var a);
  Var log(Var a);
  Var dot(Var a, Var b);
  Var pick(Var a, std::size_t index);

  const Array<T>& value(Var v) const;
  /// Gradient of the last backward root with respect to v (zeros if unreached).
  Array<T> grad(Var v) const;
  OpKind kind(Var v) const { return nodes_[v.id].kind; }
  std::size_t size() const { return nodes_.size(); }

  /// Reverse sweep from a scalar root. Parameter gradients are added into the
  /// bound GradStore.
  void backward(Var root);

 private:
  struct Node {
    OpKind kind = OpKind::Constant;
    std::uint32_t a = 0;
    std::uint32_t b = 0;
    std::size_t index = 0;
    T factor = T(1);
    bool needs_grad = false;
    Array<T> value;
    Array<T> grad;
    std::vector<std::uint32_t> inputs;
    const Array<T>* external_value = nullptr;
    Array<T>* external_grad = nullptr;
  };

  const Node& node(Var v) const;
  const Array<T>& val(std::uint32_t id) const;
  Array<T>& grad_buffer(std::uint32_t id);
  Var push(Node n);
  void require_vector(OpKind kind, Var v) const;
  void require_same(OpKind kind, Var a, Var b) const;
  [[noreturn]] void dimension_error(OpKind kind, const Shape& a, const Shape& b) const;
  void propagate(std::uint32_t id);

  const ParamStore<T>& params_;
  GradStore<T>* grads_;
  std::vector<Node> nodes_;
  std::vector<std::int64_t> param_nodes_;
};

extern template class Tape<float>;
extern template class Tape<double>;
extern template class Tape<long double>;

}  // namespace hmn::num
