#include "mlkit/config.hpp"

#include <fstream>
#include <json.hpp>
#include <limits>
#include <set>
#include <sstream>

namespace mlkit {

namespace {

using nlohmann::json;

// Object view that remembers which keys were read and rejects the rest.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(where() + " must be an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  const json& at(const std::string& key) {
    if (!j_.contains(key)) throw ConfigError("missing required key " + where(key));
    seen_.insert(key);
    return j_.at(key);
  }

  Section child(const std::string& key) { return Section(at(key), where(key)); }

  double number(const std::string& key) {
    const json& v = at(key);
    if (!v.is_number()) throw ConfigError(where(key) + " must be a number");
    return v.get<double>();
  }
  double number(const std::string& key, double fallback) {
    return has(key) ? number(key) : fallback;
  }

  std::uint64_t count(const std::string& key) {
    const json& v = at(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
      throw ConfigError(where(key) + " must be a non-negative integer");
    }
    return v.get<std::uint64_t>();
  }
  std::uint64_t count(const std::string& key, std::uint64_t fallback) {
    return has(key) ? count(key) : fallback;
  }

  std::string text(const std::string& key) {
    const json& v = at(key);
    if (!v.is_string()) throw ConfigError(where(key) + " must be a string");
    return v.get<std::string>();
  }

  bool flag(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const json& v = at(key);
    if (!v.is_boolean()) throw ConfigError(where(key) + " must be true or false");
    return v.get<bool>();
  }

  const json& raw() const { return j_; }
  std::string where(const std::string& key = {}) const {
    return key.empty() ? "'" + path_ + "'" : "'" + path_ + "." + key + "'";
  }

  // Call once every known key has been read.
  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.contains(key)) throw ConfigError("unknown key " + where(key));
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

DistanceKind distance_of(Section& s, const std::string& key, DistanceKind fallback) {
  return s.has(key) ? DistanceKind::parse(s.text(key)) : fallback;
}

ReducerRule parse_rule(Section& s) {
  const std::string type = s.text("type");
  ReducerRule rule;
  if (type == "mean") {
    rule = ReducerRule::mean();
  } else if (type == "sum") {
    rule = ReducerRule::sum();
  } else if (type == "threshold") {
    constexpr double inf = std::numeric_limits<double>::infinity();
    const double low = s.number("low", -inf);
    const double high = s.number("high", inf);
    rule = ReducerRule::threshold(low, high);
  } else {
    throw ConfigError("unknown reducer type '" + type + "'");
  }
  return rule;
}

ReducerKind parse_reducer(Section s) {
  ReducerKind r;
  if (s.has("overrides")) {
    Section ov = s.child("overrides");
    const std::pair<const char*, LossArity> arities[] = {{"element", LossArity::Element},
                                                         {"pos_pair", LossArity::PosPair},
                                                         {"neg_pair", LossArity::NegPair},
                                                         {"triplet", LossArity::Triplet}};
    for (const auto& [name, arity] : arities) {
      if (!ov.has(name)) continue;
      Section rs = ov.child(name);
      r.overrides[arity] = parse_rule(rs);
      rs.finish();
    }
    ov.finish();
  }
  // Remaining keys describe the base rule.
  r.base = parse_rule(s);
  s.finish();
  return r;
}

RegularizerKind parse_regularizer(Section s) {
  const std::string type = s.text("type");
  RegularizerKind k;
  if (type == "lp") {
    const std::uint64_t power = s.count("power", 1);
    k = RegularizerKind::lp(s.number("p", 2.0), static_cast<int>(power));
  } else if (type == "regular_face") {
    k = RegularizerKind::regular_face();
  } else {
    throw ConfigError("unknown regularizer type '" + type + "'");
  }
  s.finish();
  return k;
}

LossConfig parse_loss(Section s) {
  LossConfig cfg = LossConfig::defaults(parse_loss_name(s.text("name")));
  cfg.distance = distance_of(s, "distance", cfg.distance);
  if (s.has("reducer")) cfg.reducer = parse_reducer(s.child("reducer"));
  if (s.has("hyperparameters")) {
    Section h = s.child("hyperparameters");
    for (const auto& key : hyperparameter_names(cfg.name)) {
      if (h.has(key)) cfg.hyperparameters[key] = h.number(key);
    }
    h.finish();
  }
  if (s.has("embedding_regularizer")) {
    cfg.embedding_regularizer = parse_regularizer(s.child("embedding_regularizer"));
  }
  cfg.embedding_reg_weight = s.number("embedding_reg_weight", cfg.embedding_reg_weight);
  if (s.has("weight_regularizer")) {
    cfg.weight_regularizer = parse_regularizer(s.child("weight_regularizer"));
  }
  cfg.weight_reg_weight = s.number("weight_reg_weight", cfg.weight_reg_weight);
  s.finish();
  return cfg;
}

CalculatorConfig parse_calculator(Section s) {
  CalculatorConfig c;
  c.k = s.count("k", c.k);
  if (s.has("metrics")) {
    const json& list = s.at("metrics");
    if (!list.is_array()) throw ConfigError(s.where("metrics") + " must be a list of names");
    c.requested_metrics.clear();
    for (const auto& m : list) {
      if (!m.is_string()) throw ConfigError(s.where("metrics") + " must hold strings");
      c.requested_metrics.insert(m.get<std::string>());
    }
  }
  c.exclude_self = s.flag("exclude_self", c.exclude_self);
  c.distance = distance_of(s, "distance", c.distance);
  if (s.has("kmeans")) {
    Section k = s.child("kmeans");
    c.kmeans.restarts = k.count("restarts", c.kmeans.restarts);
    c.kmeans.max_iters = k.count("max_iters", c.kmeans.max_iters);
    c.kmeans.tol = k.number("tol", c.kmeans.tol);
    c.kmeans.seed = k.count("seed", c.kmeans.seed);
    k.finish();
  }
  s.finish();
  if (c.k == 0) throw ConfigError("calculator.k must be positive");
  if (c.kmeans.restarts == 0 || c.kmeans.max_iters == 0 || !(c.kmeans.tol > 0.0)) {
    throw ConfigError("calculator.kmeans needs restarts >= 1, max_iters >= 1 and tol > 0");
  }
  return c;
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  const std::filesystem::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

}  // namespace

RunConfig parse_run_config(std::string_view text, const std::filesystem::path& base_dir) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  Section s(root, "config");
  RunConfig rc;

  {
    Section d = s.child("dataset");
    if (d.has("synthetic") == (d.has("embeddings") || d.has("labels"))) {
      throw ConfigError("dataset needs exactly one of 'synthetic' or 'embeddings'+'labels'");
    }
    if (d.has("synthetic")) {
      Section syn = d.child("synthetic");
      SyntheticSpec spec;
      spec.classes = syn.count("classes");
      spec.per_class = syn.count("per_class");
      spec.d_in = syn.count("d_in");
      spec.center_spread = syn.number("center_spread");
      spec.noise_dev = syn.number("noise_dev");
      spec.seed = syn.count("seed", 0);
      syn.finish();
      rc.synthetic = spec;
    } else {
      rc.files = DatasetFiles{resolve(base_dir, d.text("embeddings")),
                              resolve(base_dir, d.text("labels"))};
    }
    d.finish();
  }

  {
    Section m = s.child("model");
    const std::string type = m.text("type");
    if (type == "linear") {
      rc.model.architecture = Architecture::Linear;
    } else if (type == "mlp") {
      rc.model.architecture = Architecture::MLP;
      rc.model.hidden = m.count("hidden");
      if (rc.model.hidden == 0) throw ConfigError("model.hidden must be positive");
    } else {
      throw ConfigError("unknown model type '" + type + "'");
    }
    rc.model.d_out = m.count("d_out");
    if (rc.model.d_out == 0) throw ConfigError("model.d_out must be positive");
    m.finish();
  }

  rc.train.loss = parse_loss(s.child("loss"));
  if (s.has("miner")) {
    Section mn = s.child("miner");
    if (mn.text("name") != "MultiSimilarity") {
      throw ConfigError("only the MultiSimilarity miner is available");
    }
    MinerConfig mc;
    mc.epsilon = mn.number("epsilon", mc.epsilon);
    mc.distance = distance_of(mn, "distance", mc.distance);
    mn.finish();
    rc.train.miner = mc;
  }
  {
    Section sp = s.child("sampler");
    rc.train.sampler.m = sp.count("m");
    rc.train.sampler.batch_size = sp.count("batch_size");
    rc.train.sampler.epoch_length = sp.count("epoch_length");
    rc.train.sampler.seed = sp.count("seed", 0);
    sp.finish();
  }
  {
    Section o = s.child("optimizer");
    rc.train.optimizer.learning_rate = o.number("learning_rate");
    rc.train.optimizer.momentum = o.number("momentum", 0.0);
    o.finish();
  }
  rc.train.epochs = s.count("epochs");
  rc.train.seed = s.count("seed", 0);
  rc.train.checkpoint_every = s.count("checkpoint_every", rc.train.epochs);
  rc.train.output_dir = resolve(base_dir, s.text("output_dir"));
  if (s.has("calculator")) rc.calculator = parse_calculator(s.child("calculator"));
  rc.evaluate_each_epoch = s.flag("evaluate_each_epoch", false);
  s.finish();

  rc.train.validate();
  if (rc.train.sampler.m == 0 || rc.train.sampler.batch_size == 0 ||
      rc.train.sampler.epoch_length == 0 || rc.train.sampler.batch_size % rc.train.sampler.m) {
    throw ConfigError("sampler needs positive sizes with batch_size divisible by m");
  }
  return rc;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw IoFailure("cannot read config " + path.string());
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_run_config(ss.str(), path.parent_path());
}

}  // namespace mlkit
