#include "hmn/numerics/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "hmn/errors.hpp"

namespace hmn::num {

template <typename T>
GradCheckReport finite_difference_check(const LossBuilder<T>& loss_fn, ParamStore<T>& params, T epsilon,
                                        double tolerance, std::size_t max_entries_per_group,
                                        std::uint64_t seed) {
  if (!(epsilon > T(0))) throw ContractError("finite_difference_check: epsilon must be positive");

  GradStore<T> analytic(params);
  {
    Tape<T> tape(params, &analytic);
    tape.backward(loss_fn(tape));
  }

  auto evaluate = [&]() {
    Tape<T> tape(params);
    return tape.value(loss_fn(tape))[0];
  };

  std::mt19937_64 rng(seed);
  GradCheckReport report;
  for (std::size_t g = 0; g < params.size(); ++g) {
    const ParamId id{g};
    Array<T>& value = params.value(id);
    const Array<T>& grad = analytic.grad(id);

    std::vector<std::size_t> entries(value.size());
    std::iota(entries.begin(), entries.end(), std::size_t{0});
    if (max_entries_per_group > 0 && entries.size() > max_entries_per_group) {
      std::shuffle(entries.begin(), entries.end(), rng);
      entries.resize(max_entries_per_group);
      std::sort(entries.begin(), entries.end());
    }

    GroupCheck check;
    check.name = params.name(id);
    for (auto i : entries) {
      const T saved = value[i];
      value[i] = saved + epsilon;
      const T plus = evaluate();
      value[i] = saved - epsilon;
      const T minus = evaluate();
      value[i] = saved;

      const double numeric = static_cast<double>((plus - minus) / (T(2) * epsilon));
      const double exact = static_cast<double>(grad[i]);
      const double denom = std::max({std::abs(exact), std::abs(numeric), 1e-8});
      const double rel = std::abs(exact - numeric) / denom;
      check.max_relative_error = std::max(check.max_relative_error, rel);
      check.max_abs_analytic = std::max(check.max_abs_analytic, std::abs(exact));
      ++check.entries_checked;
    }
    check.passed = check.max_relative_error < tolerance;
    report.max_relative_error = std::max(report.max_relative_error, check.max_relative_error);
    report.passed = report.passed && check.passed;
    report.groups.push_back(std::move(check));
  }
  return report;
}

template GradCheckReport finite_difference_check<double>(const LossBuilder<double>&, ParamStore<double>&, double,
                                                         double, std::size_t, std::uint64_t);
template GradCheckReport finite_difference_check<long double>(const LossBuilder<long double>&,
                                                              ParamStore<long double>&, long double, double,
                                                              std::size_t, std::uint64_t);

}  // namespace hmn::num
