#include "dbcs/experiment.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace {

using namespace dbcs;

std::vector<int> read_labels(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open labels " + path);
  nlohmann::json j;
  in >> j;
  return j.get<std::vector<int>>();
}

void write_json(const nlohmann::ordered_json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path);
  out << j.dump(2) << "\n";
}

Index measurement_count(const ExperimentConfig& cfg, Index n) {
  if (cfg.op.m) return *cfg.op.m;
  if (cfg.op.kind == OperatorKind::identity) return n;
  return static_cast<Index>(std::ceil(cfg.op.ratio * static_cast<double>(n)));
}

MeasurementOperator operator_from_config(const ExperimentConfig& cfg, Index n) {
  return build_operator(cfg.op.kind, measurement_count(cfg, n), n,
                        derived_operator_seed(cfg.seed),
                        {.density = cfg.op.density});
}

int run_cli(int argc, char** argv) {
  CLI::App app{"Deep blind compressed sensing experiment driver"};
  app.require_subcommand(1);

  std::string config_path, out_path, model_dir, x_path, y_path, labels_path;
  std::string csv_in, csv_out, features_path;
  int threads = 1;
  bool verbose = false;
  app.add_option("--threads", threads,
                 "Parallel matrix products (>1 trades away bit-determinism)");
  app.add_flag("--verbose", verbose, "Chatty stage logging");

  auto add_config = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "Experiment config JSON")
        ->required()
        ->check(CLI::ExistingFile);
  };

  auto* cmd_run = app.add_subcommand("run", "Run the full experiment pipeline");
  add_config(cmd_run);
  cmd_run->add_option("--out", out_path, "Output directory (overrides config)");

  auto* cmd_synth = app.add_subcommand("synth", "Generate synthetic data");
  add_config(cmd_synth);
  cmd_synth->add_option("--out", out_path, "Output directory")->required();

  auto* cmd_acquire =
      app.add_subcommand("acquire", "Apply the measurement operator");
  add_config(cmd_acquire);
  cmd_acquire->add_option("--x", x_path, "Signal matrix (DBCS1)")
      ->required()
      ->check(CLI::ExistingFile);
  cmd_acquire->add_option("--out", out_path, "Measurement matrix path")->required();

  auto* cmd_fit = app.add_subcommand("fit", "Fit the configured model");
  add_config(cmd_fit);
  cmd_fit->add_option("--y", y_path, "Measurement matrix (DBCS1)")
      ->required()
      ->check(CLI::ExistingFile);
  cmd_fit->add_option("--out", out_path, "Model output directory")->required();

  auto* cmd_encode =
      app.add_subcommand("encode", "Encode measurements with a fitted model");
  add_config(cmd_encode);
  cmd_encode->add_option("--model", model_dir, "Model directory")->required();
  cmd_encode->add_option("--y", y_path, "Measurement matrix (DBCS1)")
      ->required()
      ->check(CLI::ExistingFile);
  cmd_encode->add_option("--out", out_path, "Code matrix path")->required();

  auto* cmd_reconstruct =
      app.add_subcommand("reconstruct", "Synthesize signals from a model");
  cmd_reconstruct->add_option("--model", model_dir, "Model directory")->required();
  cmd_reconstruct->add_option("--out", out_path, "Reconstruction path")->required();

  auto* cmd_classify =
      app.add_subcommand("classify", "Split + k-NN metrics on a feature matrix");
  add_config(cmd_classify);
  cmd_classify->add_option("--features", features_path, "Feature matrix (DBCS1)")
      ->required()
      ->check(CLI::ExistingFile);
  cmd_classify->add_option("--labels", labels_path, "Labels JSON array")
      ->required()
      ->check(CLI::ExistingFile);
  cmd_classify->add_option("--out", out_path, "Metrics JSON path")->required();

  auto* cmd_csv = app.add_subcommand("export-csv", "DBCS1 matrix to CSV");
  cmd_csv->add_option("input", csv_in, "DBCS1 matrix")
      ->required()
      ->check(CLI::ExistingFile);
  cmd_csv->add_option("output", csv_out, "CSV path")->required();

  CLI11_PARSE(app, argc, argv);

  Eigen::setNbThreads(threads);
  auto log = [&](const std::string& msg) {
    if (verbose) std::cerr << "[dbcs] " << msg << "\n";
  };

  if (cmd_run->parsed()) {
    ExperimentConfig cfg = load_config(config_path);
    std::string out = out_path.empty() ? cfg.output_dir : out_path;
    log("running pipeline into " + out);
    std::cout << run(cfg, out) << "\n";
    return 0;
  }

  if (cmd_synth->parsed()) {
    ExperimentConfig cfg = load_config(config_path);
    if (!cfg.data.synthetic) {
      throw ConfigError("synth: config data source is not synthetic");
    }
    std::filesystem::create_directories(out_path);
    Rng rng = data_stream(cfg.seed);
    SynthResult data = synth(cfg.data.synth, rng);
    mat_write(data.X, out_path + "/X.mat");
    if (!data.labels.empty()) {
      write_json(nlohmann::ordered_json(data.labels), out_path + "/labels.json");
    }
    for (std::size_t i = 0; i < data.true_dictionaries.size(); ++i) {
      mat_write(data.true_dictionaries[i],
                out_path + "/Dstar" + std::to_string(i + 1) + ".mat");
    }
    if (data.true_codes.size() > 0) {
      mat_write(data.true_codes, out_path + "/Zstar.mat");
    }
    log("synthesized " + std::to_string(data.X.cols()) + " samples");
    return 0;
  }

  if (cmd_acquire->parsed()) {
    ExperimentConfig cfg = load_config(config_path);
    Matrix X = mat_read(x_path);
    MeasurementOperator op = operator_from_config(cfg, X.rows());
    mat_write(op.apply(X), out_path);
    log("acquired " + std::to_string(op.m()) + " of " + std::to_string(op.n()) +
        " coordinates per sample");
    return 0;
  }

  if (cmd_fit->parsed()) {
    ExperimentConfig cfg = load_config(config_path);
    Matrix Y = mat_read(y_path);
    Rng fit_rng = fit_stream(cfg.seed);
    if (cfg.model.method == Method::dl) {
      // dl consumes raw signals; --y carries them here.
      ShallowFit fit =
          dl_fit(Y, cfg.model.layer_sizes.front(),
                 cfg.model.lambda.value_or(0.1 * Y.cwiseAbs().maxCoeff()),
                 cfg.model.sweeps, cfg.model.solver, fit_rng);
      DbcsModel model;
      model.layer_spec.sizes = {Y.rows(), cfg.model.layer_sizes.front()};
      model.dictionaries = {std::move(fit.dictionary)};
      model.codes = std::move(fit.codes);
      model.objective_trace = std::move(fit.trace);
      model.seed = cfg.seed;
      save_model(model, out_path);
    } else {
      Index n = cfg.data.synthetic
                    ? (cfg.data.synth.generator == Generator::planted_factorization
                           ? cfg.data.synth.sizes.front()
                           : cfg.data.synth.dimension)
                    : mat_read(cfg.data.path).rows();
      MeasurementOperator op = operator_from_config(cfg, n);
      LayerSpec spec;
      spec.sizes.push_back(n);
      for (Index k : cfg.model.layer_sizes) spec.sizes.push_back(k);
      double lambda = cfg.model.lambda.value_or([&] {
        Rng probe = fit_rng;
        std::vector<Matrix> dicts;
        for (Index i = 0; i < spec.depth(); ++i) {
          Matrix d = gaussian_matrix(spec.sizes[static_cast<std::size_t>(i)],
                                     spec.sizes[static_cast<std::size_t>(i) + 1],
                                     probe);
          normalize_columns(d, probe);
          dicts.push_back(std::move(d));
        }
        return default_lambda(op, dicts, Y);
      }());
      DbcsModel model;
      if (cfg.model.method == Method::bcs) {
        ShallowFit fit = bcs_fit(Y, op, cfg.model.layer_sizes.front(), lambda,
                                 cfg.model.mu, cfg.model.sweeps, cfg.model.solver,
                                 fit_rng);
        model.layer_spec.sizes = {n, cfg.model.layer_sizes.front()};
        model.dictionaries = {std::move(fit.dictionary)};
        model.codes = std::move(fit.codes);
        model.objective_trace = std::move(fit.trace);
        model.lambda = lambda;
        model.seed = cfg.seed;
      } else if (cfg.model.method == Method::dbcs) {
        model = dbcs_fit(Y, op, spec, lambda, cfg.model.sweeps, cfg.model.solver,
                         fit_rng);
      } else {
        throw ConfigError("fit: cs_ista has no model to save; use run");
      }
      save_model(model, out_path);
    }
    log("model written to " + out_path);
    return 0;
  }

  if (cmd_encode->parsed()) {
    ExperimentConfig cfg = load_config(config_path);
    DbcsModel model = load_model(model_dir);
    Matrix Y = mat_read(y_path);
    MeasurementOperator op = operator_from_config(cfg, model.layer_spec.sizes.front());
    Matrix Z = encode(op, model.dictionaries, Y,
                      cfg.model.lambda.value_or(model.lambda), cfg.model.solver);
    mat_write(Z, out_path);
    log("encoded " + std::to_string(Y.cols()) + " columns");
    return 0;
  }

  if (cmd_reconstruct->parsed()) {
    DbcsModel model = load_model(model_dir);
    mat_write(reconstruct(model), out_path);
    return 0;
  }

  if (cmd_classify->parsed()) {
    ExperimentConfig cfg = load_config(config_path);
    Matrix features = mat_read(features_path);
    std::vector<int> labels = read_labels(labels_path);
    if (static_cast<Index>(labels.size()) != features.cols()) {
      throw DimensionError("classify: labels length does not match features");
    }
    nlohmann::ordered_json metrics =
        evaluate_features(cfg.eval, features, labels, split_stream(cfg.seed));
    write_json(metrics, out_path);
    return 0;
  }

  if (cmd_csv->parsed()) {
    export_csv(csv_in, csv_out);
    return 0;
  }

  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run_cli(argc, argv);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
