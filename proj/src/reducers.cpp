#include "mlkit/reducers.hpp"

namespace mlkit {

ReducerRule ReducerRule::threshold(double low, double high) {
  if (!(low <= high)) throw ConfigError("threshold reducer requires low <= high");
  return {Type::Threshold, low, high};
}

const ReducerRule& ReducerKind::rule_for(LossArity arity) const {
  auto it = overrides.find(arity);
  return it == overrides.end() ? base : it->second;
}

namespace {

bool kept(double v, const ReducerRule& rule) {
  return rule.type != ReducerRule::Type::Threshold || (v >= rule.low && v <= rule.high);
}

}  // namespace

double reduce_values(const std::vector<double>& values, const ReducerRule& rule) {
  double total = 0.0;
  std::size_t count = 0;
  for (double v : values) {
    if (!kept(v, rule)) continue;
    total += v;
    ++count;
  }
  if (count == 0) return 0.0;
  return rule.type == ReducerRule::Type::Sum ? total : total / static_cast<double>(count);
}

std::vector<double> reduce_weights(const std::vector<double>& values, const ReducerRule& rule) {
  std::vector<double> w(values.size(), 0.0);
  std::size_t count = 0;
  for (double v : values) count += kept(v, rule) ? 1 : 0;
  if (count == 0) return w;
  const double each =
      rule.type == ReducerRule::Type::Sum ? 1.0 : 1.0 / static_cast<double>(count);
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (kept(values[k], rule)) w[k] = each;
  }
  return w;
}

double reduce(const LossBundle& bundle, const ReducerKind& reducer) {
  double total = 0.0;
  for (LossArity arity :
       {LossArity::Element, LossArity::PosPair, LossArity::NegPair, LossArity::Triplet}) {
    total += reduce_values(bundle.values(arity), reducer.rule_for(arity));
  }
  return total;
}

}  // namespace mlkit
