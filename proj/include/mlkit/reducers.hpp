#pragma once

#include <limits>
#include <map>
#include <vector>

#include "mlkit/core.hpp"

namespace mlkit {

struct ReducerRule {
  enum class Type { Mean, Sum, Threshold };

  Type type = Type::Mean;
  double low = -std::numeric_limits<double>::infinity();
  double high = std::numeric_limits<double>::infinity();

  static ReducerRule mean() { return {}; }
  static ReducerRule sum() { return {Type::Sum}; }
  // Keeps values in the closed band [low, high]. Throws ConfigError if low > high.
  static ReducerRule threshold(double low, double high);
};

// A base rule plus optional per-arity overrides.
struct ReducerKind {
  ReducerRule base;
  std::map<LossArity, ReducerRule> overrides;

  const ReducerRule& rule_for(LossArity arity) const;
};

// Reduces one list of values. Empty (or fully thresholded) lists give 0.
double reduce_values(const std::vector<double>& values, const ReducerRule& rule);

// d(reduce_values)/d(values[k]); zero for values a threshold discards.
std::vector<double> reduce_weights(const std::vector<double>& values, const ReducerRule& rule);

// Reduces every populated arity independently and sums the results.
double reduce(const LossBundle& bundle, const ReducerKind& reducer);

}  // namespace mlkit
