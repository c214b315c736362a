#include "mlkit/cli.hpp"

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <sstream>

#include "mlkit/checkpoint.hpp"
#include "mlkit/config.hpp"

namespace mlkit::cli {

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::trunc | std::ios::binary);
  if (!f) throw IoFailure("cannot open " + path.string() + " for writing");
  f << text;
  if (!f) throw IoFailure("failed writing " + path.string());
}

void write_projection(const Matrix& projection, const LabelVector& y,
                      const std::filesystem::path& path) {
  std::ostringstream os;
  os << "pc1,pc2,label\n";
  os << std::setprecision(17);
  for (std::size_t i = 0; i < projection.rows(); ++i) {
    os << projection(i, 0) << ',' << projection(i, 1) << ',' << y[i] << '\n';
  }
  write_text(path, os.str());
}

}  // namespace

std::string format_report(const MetricReport& report) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [name, value] : report) j[name] = value;
  return j.dump(2) + "\n";
}

int cmd_train(const std::filesystem::path& config_path, std::ostream& out, std::ostream& err) {
  RunConfig rc;
  Dataset data;
  try {
    if (!std::filesystem::exists(config_path)) {
      err << "error: config file " << config_path.string() << " does not exist\n";
      return kExitConfigError;
    }
    rc = load_run_config(config_path);
    if (rc.synthetic) {
      data = synthetic_gaussians(*rc.synthetic);
    } else {
      LabeledEmbeddings loaded = load_embeddings_csv(rc.files->embeddings, rc.files->labels);
      data = {loaded.embeddings.values(), *loaded.labels};
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfigError;
  }

  try {
    Rng rng(rc.train.seed);
    const std::size_t d_in = data.data.cols();
    EmbedderModel model = rc.model.architecture == Architecture::Linear
                              ? EmbedderModel::linear(d_in, rc.model.d_out, rng)
                              : EmbedderModel::mlp(d_in, rc.model.hidden, rc.model.d_out, rng);
    std::optional<CalculatorConfig> per_epoch;
    if (rc.evaluate_each_epoch) per_epoch = rc.calculator;
    const TrainRecord record = run_training(model, data.data, data.labels, rc.train, per_epoch);
    const Evaluation ev = evaluate(model, data.data, data.labels, rc.calculator);

    const auto& dir = rc.train.output_dir;
    write_text(dir / "report.json", format_report(ev.report));
    write_projection(ev.projection, data.labels, dir / "projection.csv");
    if (!record.epoch_reports.empty()) {
      std::string lines;
      for (const auto& r : record.epoch_reports) {
        nlohmann::json j(r);
        lines += j.dump() + "\n";
      }
      write_text(dir / "epoch_reports.jsonl", lines);
    }
    out << format_report(ev.report);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntimeError;
  }
  return kExitOk;
}

int cmd_eval(const EvalOptions& options, std::ostream& out, std::ostream& err) {
  try {
    const LabeledEmbeddings loaded = load_embeddings_csv(options.embeddings, options.labels);
    CalculatorConfig cfg;
    cfg.k = options.k;
    cfg.distance = DistanceKind::parse(options.distance);
    if (!options.metrics.empty()) {
      cfg.requested_metrics = {options.metrics.begin(), options.metrics.end()};
    }
    const AccuracyCalculator calc;
    const Matrix& x = loaded.embeddings.values();
    const MetricReport report =
        calc.get_accuracy(x, x, *loaded.labels, *loaded.labels, cfg, true);
    out << format_report(report);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfigError;
  }
  return kExitOk;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Deep metric learning toolkit: train embedders and evaluate embeddings"};
  app.require_subcommand(1);

  std::string config;
  auto* train = app.add_subcommand("train", "Train a model from a JSON run config");
  train->add_option("--config", config, "Run configuration file")->required();

  EvalOptions eval_opts;
  std::string metrics;
  auto* eval = app.add_subcommand("eval", "Compute accuracy metrics for stored embeddings");
  eval->add_option("--embeddings", eval_opts.embeddings, "CSV of embeddings")->required();
  eval->add_option("--labels", eval_opts.labels, "One integer label per line")->required();
  eval->add_option("--k", eval_opts.k, "Neighbors for k-NN metrics")->capture_default_str();
  eval->add_option("--metrics", metrics, "Comma-separated metric names");
  eval->add_option("--distance", eval_opts.distance, "euclidean, lp1, lp:<p>, cosine, dot, snr")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfigError;
  }

  if (*train) return cmd_train(config, out, err);

  std::stringstream ss(metrics);
  std::string name;
  while (std::getline(ss, name, ',')) {
    if (!name.empty()) eval_opts.metrics.push_back(name);
  }
  return cmd_eval(eval_opts, out, err);
}

}  // namespace mlkit::cli
