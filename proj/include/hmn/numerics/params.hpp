#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <unordered_map>
#include <vector>

#include "hmn/errors.hpp"
#include "hmn/numerics/array.hpp"

namespace hmn::num {

/// Index of a named parameter inside a ParamStore.
struct ParamId {
  std::size_t index = 0;
  friend bool operator==(ParamId, ParamId) = default;
};

/// Named trainable arrays, in registration order.
template <typename T>
class ParamStore {
 public:
  ParamId add(std::string name, Array<T> value) {
    if (by_name_.contains(name)) throw ContractError("duplicate parameter name: " + name);
    ParamId id{values_.size()};
    by_name_.emplace(name, id.index);
    names_.push_back(std::move(name));
    values_.push_back(std::move(value));
    return id;
  }

  std::size_t size() const { return values_.size(); }
  const std::string& name(ParamId id) const { return names_[id.index]; }
  const std::vector<std::string>& names() const { return names_; }
  Array<T>& value(ParamId id) { return values_[id.index]; }
  const Array<T>& value(ParamId id) const { return values_[id.index]; }

  ParamId find(const std::string& name) const {
    auto it = by_name_.find(name);
    if (it == by_name_.end()) throw ContractError("unknown parameter: " + name);
    return ParamId{it->second};
  }
  bool contains(const std::string& name) const { return by_name_.contains(name); }

  std::size_t total_elements() const {
    std::size_t n = 0;
    for (const auto& v : values_) n += v.size();
    return n;
  }

  template <typename U>
  ParamStore<U> cast() const {
    ParamStore<U> out;
    for (std::size_t i = 0; i < values_.size(); ++i) out.add(names_[i], values_[i].template cast<U>());
    return out;
  }

 private:
  std::vector<std::string> names_;
  std::vector<Array<T>> values_;
  std::unordered_map<std::string, std::size_t> by_name_;
};

/// Gradient buffers mirroring a ParamStore's shapes.
template <typename T>
class GradStore {
 public:
  GradStore() = default;
  explicit GradStore(const ParamStore<T>& params) {
    grads_.reserve(params.size());
    for (std::size_t i = 0; i < params.size(); ++i) {
      grads_.emplace_back(params.value(ParamId{i}).shape());
    }
  }

  std::size_t size() const { return grads_.size(); }
  Array<T>& grad(ParamId id) { return grads_[id.index]; }
  const Array<T>& grad(ParamId id) const { return grads_[id.index]; }

  void zero() {
    for (auto& g : grads_) g.set_zero();
  }

  void add(const GradStore& other) {
    for (std::size_t i = 0; i < grads_.size(); ++i) grads_[i].vec() += other.grads_[i].vec();
  }

  void scale(T factor) {
    for (auto& g : grads_) g.vec() *= factor;
  }

  /// Euclidean norm over every entry of every buffer.
  T global_norm() const {
    long double sq = 0;
    for (const auto& g : grads_) sq += static_cast<long double>(g.vec().squaredNorm());
    return static_cast<T>(std::sqrt(sq));
  }

 private:
  std::vector<Array<T>> grads_;
};

}  // namespace hmn::num
