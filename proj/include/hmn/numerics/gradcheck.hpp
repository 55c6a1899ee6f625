#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "hmn/numerics/params.hpp"
#include "hmn/numerics/tape.hpp"

namespace hmn::num {

struct GroupCheck {
  std::string name;
  std::size_t entries_checked = 0;
  double max_relative_error = 0.0;
  double max_abs_analytic = 0.0;
  bool passed = true;
};

struct GradCheckReport {
  std::vector<GroupCheck> groups;
  double max_relative_error = 0.0;
  bool passed = true;
};

/// Builds a scalar loss on the given tape; must be deterministic.
template <typename T>
using LossBuilder = std::function<Var(Tape<T>&)>;

/// Compares reverse-mode gradients against central differences
/// (f(w+eps) - f(w-eps)) / 2eps for every parameter group.
///
/// Relative error per entry is |g_a - g_n| / max(|g_a|, |g_n|, 1e-8).
/// With max_entries_per_group > 0 a seeded random subset of each group is
/// probed instead of every entry.
template <typename T>
GradCheckReport finite_difference_check(const LossBuilder<T>& loss_fn, ParamStore<T>& params, T epsilon,
                                        double tolerance, std::size_t max_entries_per_group = 0,
                                        std::uint64_t seed = 0);

extern template GradCheckReport finite_difference_check<double>(const LossBuilder<double>&, ParamStore<double>&,
                                                                double, double, std::size_t, std::uint64_t);
extern template GradCheckReport finite_difference_check<long double>(const LossBuilder<long double>&,
                                                                     ParamStore<long double>&, long double,
                                                                     double, std::size_t, std::uint64_t);

}  // namespace hmn::num
