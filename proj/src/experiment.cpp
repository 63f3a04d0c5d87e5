#include "dbcs/experiment.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>

namespace fs = std::filesystem;

namespace dbcs {

Method method_from_string(std::string_view s) {
  if (s == "dbcs") return Method::dbcs;
  if (s == "bcs") return Method::bcs;
  if (s == "dl") return Method::dl;
  if (s == "cs_ista") return Method::cs_ista;
  throw ConfigError("unknown method: " + std::string(s));
}

std::string to_string(Method m) {
  switch (m) {
    case Method::dbcs: return "dbcs";
    case Method::bcs: return "bcs";
    case Method::dl: return "dl";
    case Method::cs_ista: return "cs_ista";
  }
  throw ConfigError("invalid method");
}

FeatureProtocol protocol_from_string(std::string_view s) {
  if (s == "frozen_encode") return FeatureProtocol::frozen_encode;
  if (s == "transductive") return FeatureProtocol::transductive;
  throw ConfigError("unknown feature protocol: " + std::string(s));
}

std::string to_string(FeatureProtocol p) {
  return p == FeatureProtocol::frozen_encode ? "frozen_encode" : "transductive";
}

namespace {

void check_keys(const nlohmann::json& obj, const std::set<std::string>& allowed,
                const std::string& where) {
  if (!obj.is_object()) {
    throw ConfigError("config: " + where + " must be an object");
  }
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.count(key)) {
      throw ConfigError("config: unknown key '" + key + "' in " + where);
    }
  }
}

SyntheticSpec parse_synthetic(const nlohmann::json& j) {
  SyntheticSpec spec;
  std::string gen = j.value("generator", "planted_factorization");
  if (gen == "planted_factorization") {
    check_keys(j, {"generator", "sizes", "sparsity", "noise", "num_samples"},
               "data.synthetic");
    spec.generator = Generator::planted_factorization;
    if (!j.contains("sizes")) {
      throw ConfigError("config: planted_factorization requires data.synthetic.sizes");
    }
    spec.sizes = j.at("sizes").get<std::vector<Index>>();
    spec.sparsity = j.value("sparsity", Index{5});
    spec.noise = j.value("noise", 0.0);
    spec.num_samples = j.value("num_samples", Index{100});
  } else if (gen == "labeled_mixture") {
    check_keys(j,
               {"generator", "dimension", "classes", "mean_scale", "class_noise",
                "samples_per_class"},
               "data.synthetic");
    spec.generator = Generator::labeled_mixture;
    if (!j.contains("dimension")) {
      throw ConfigError("config: labeled_mixture requires data.synthetic.dimension");
    }
    spec.dimension = j.at("dimension").get<Index>();
    spec.classes = j.value("classes", 2);
    spec.mean_scale = j.value("mean_scale", 1.0);
    spec.class_noise = j.value("class_noise", 0.1);
    spec.samples_per_class = j.value("samples_per_class", Index{50});
  } else {
    throw ConfigError("config: unknown generator '" + gen + "'");
  }
  return spec;
}

}  // namespace

Rng data_stream(std::uint64_t seed) { return Rng(seed).stream(1); }

std::uint64_t derived_operator_seed(std::uint64_t seed) {
  return Rng(seed).stream(2).next_u64();
}

Rng fit_stream(std::uint64_t seed) { return Rng(seed).stream(3); }

Rng split_stream(std::uint64_t seed) { return Rng(seed).stream(4); }

ExperimentConfig parse_config(const nlohmann::json& j) {
  check_keys(j, {"seed", "data", "operator", "model", "eval", "output_dir"},
             "top level");
  ExperimentConfig cfg;
  cfg.seed = j.value("seed", std::uint64_t{0});
  if (const char* env = std::getenv("DBCS_SEED")) {
    cfg.seed = std::strtoull(env, nullptr, 10);
  }

  if (j.contains("data")) {
    const auto& d = j.at("data");
    check_keys(d, {"source", "path", "labels_path", "synthetic"}, "data");
    std::string source = d.value("source", "synthetic");
    if (source == "synthetic") {
      cfg.data.synthetic = true;
      cfg.data.synth = parse_synthetic(d.value("synthetic", nlohmann::json::object()));
    } else if (source == "file") {
      cfg.data.synthetic = false;
      if (!d.contains("path")) {
        throw ConfigError("config: data.source=file requires data.path");
      }
      cfg.data.path = d.at("path").get<std::string>();
      cfg.data.labels_path = d.value("labels_path", "");
    } else {
      throw ConfigError("config: unknown data source '" + source + "'");
    }
  } else {
    throw ConfigError("config: missing data section");
  }

  if (j.contains("operator")) {
    const auto& o = j.at("operator");
    check_keys(o, {"kind", "ratio", "m", "density"}, "operator");
    cfg.op.kind = operator_kind_from_string(o.value("kind", "dense_gaussian"));
    cfg.op.ratio = o.value("ratio", 0.25);
    if (o.contains("m") && !o.at("m").is_null()) {
      cfg.op.m = o.at("m").get<Index>();
    }
    cfg.op.density = o.value("density", 0.5);
    if (!(cfg.op.ratio > 0.0 && cfg.op.ratio <= 1.0)) {
      throw ConfigError("config: operator.ratio must be in (0, 1]");
    }
  }

  if (j.contains("model")) {
    const auto& m = j.at("model");
    check_keys(m, {"method", "layer_sizes", "lambda", "mu", "sweeps", "solver"},
               "model");
    cfg.model.method = method_from_string(m.value("method", "dbcs"));
    cfg.model.layer_sizes =
        m.value("layer_sizes", std::vector<Index>{});
    if (m.contains("lambda") && !m.at("lambda").is_null()) {
      cfg.model.lambda = m.at("lambda").get<double>();
    }
    cfg.model.mu = m.value("mu", 0.1);
    cfg.model.sweeps = m.value("sweeps", 10);
    if (m.contains("solver")) {
      const auto& s = m.at("solver");
      check_keys(s, {"max_iters", "cg_max_iters", "tol", "safety", "power_iters"},
                 "model.solver");
      cfg.model.solver.max_iters = s.value("max_iters", 100);
      cfg.model.solver.cg_max_iters = s.value("cg_max_iters", 50);
      cfg.model.solver.tol = s.value("tol", 1e-6);
      cfg.model.solver.safety = s.value("safety", 0.95);
      cfg.model.solver.power_iters = s.value("power_iters", 50);
      if (!(cfg.model.solver.safety > 0.0 && cfg.model.solver.safety <= 1.0)) {
        throw ConfigError("config: solver.safety must be in (0, 1]");
      }
    }
  }
  if (cfg.model.method != Method::cs_ista && cfg.model.layer_sizes.empty()) {
    throw ConfigError("config: model.layer_sizes required for learned methods");
  }

  if (j.contains("eval")) {
    const auto& e = j.at("eval");
    check_keys(e, {"split_fraction", "k", "feature_protocol"}, "eval");
    cfg.eval.split_fraction = e.value("split_fraction", 0.5);
    cfg.eval.k = e.value("k", 1);
    cfg.eval.protocol =
        protocol_from_string(e.value("feature_protocol", "frozen_encode"));
  }

  cfg.output_dir = j.value("output_dir", "out");
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config: parse error in " + path + ": " + e.what());
  }
  return parse_config(j);
}

nlohmann::ordered_json config_to_json(const ExperimentConfig& cfg) {
  nlohmann::ordered_json j;
  j["seed"] = cfg.seed;
  nlohmann::ordered_json data;
  data["source"] = cfg.data.synthetic ? "synthetic" : "file";
  if (cfg.data.synthetic) {
    nlohmann::ordered_json s;
    if (cfg.data.synth.generator == Generator::planted_factorization) {
      s["generator"] = "planted_factorization";
      s["sizes"] = cfg.data.synth.sizes;
      s["sparsity"] = cfg.data.synth.sparsity;
      s["noise"] = cfg.data.synth.noise;
      s["num_samples"] = cfg.data.synth.num_samples;
    } else {
      s["generator"] = "labeled_mixture";
      s["dimension"] = cfg.data.synth.dimension;
      s["classes"] = cfg.data.synth.classes;
      s["mean_scale"] = cfg.data.synth.mean_scale;
      s["class_noise"] = cfg.data.synth.class_noise;
      s["samples_per_class"] = cfg.data.synth.samples_per_class;
    }
    data["synthetic"] = s;
  } else {
    data["path"] = cfg.data.path;
    data["labels_path"] = cfg.data.labels_path;
  }
  j["data"] = data;

  nlohmann::ordered_json op;
  op["kind"] = to_string(cfg.op.kind);
  op["ratio"] = cfg.op.ratio;
  if (cfg.op.m) op["m"] = *cfg.op.m;
  op["density"] = cfg.op.density;
  j["operator"] = op;

  nlohmann::ordered_json model;
  model["method"] = to_string(cfg.model.method);
  model["layer_sizes"] = cfg.model.layer_sizes;
  if (cfg.model.lambda) {
    model["lambda"] = *cfg.model.lambda;
  } else {
    model["lambda"] = nullptr;
  }
  model["mu"] = cfg.model.mu;
  model["sweeps"] = cfg.model.sweeps;
  nlohmann::ordered_json solver;
  solver["max_iters"] = cfg.model.solver.max_iters;
  solver["cg_max_iters"] = cfg.model.solver.cg_max_iters;
  solver["tol"] = cfg.model.solver.tol;
  solver["safety"] = cfg.model.solver.safety;
  solver["power_iters"] = cfg.model.solver.power_iters;
  model["solver"] = solver;
  j["model"] = model;

  nlohmann::ordered_json ev;
  ev["split_fraction"] = cfg.eval.split_fraction;
  ev["k"] = cfg.eval.k;
  ev["feature_protocol"] = to_string(cfg.eval.protocol);
  j["eval"] = ev;

  j["output_dir"] = cfg.output_dir;
  return j;
}

namespace {

Matrix select_cols(const Matrix& m, const std::vector<Index>& idx) {
  Matrix out(m.rows(), static_cast<Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) {
    out.col(static_cast<Index>(i)) = m.col(idx[i]);
  }
  return out;
}

std::vector<int> select_labels(const std::vector<int>& labels,
                               const std::vector<Index>& idx) {
  std::vector<int> out;
  out.reserve(idx.size());
  for (Index i : idx) out.push_back(labels[static_cast<std::size_t>(i)]);
  return out;
}

// Replays the trainer's initialization draw on a copy of the rng so the
// data-scaled default lambda sees the same initial dictionaries the fit will.
double resolve_lambda(const ExperimentConfig& cfg, const MeasurementOperator& op,
                      const LayerSpec& spec, const Matrix& Y, Rng fit_rng) {
  if (cfg.model.lambda) return *cfg.model.lambda;
  if (cfg.model.method == Method::cs_ista) {
    return 0.1 * op.adjoint(Y).cwiseAbs().maxCoeff();
  }
  std::vector<Matrix> dicts;
  for (Index i = 0; i < spec.depth(); ++i) {
    Matrix d = gaussian_matrix(spec.sizes[static_cast<std::size_t>(i)],
                               spec.sizes[static_cast<std::size_t>(i) + 1], fit_rng);
    normalize_columns(d, fit_rng);
    dicts.push_back(std::move(d));
  }
  return default_lambda(op, dicts, Y);
}

struct FitOutput {
  std::vector<Matrix> dictionaries;  // empty for cs_ista
  Matrix codes;
  std::vector<double> trace;
  double lambda = 0.0;
};

FitOutput fit_method(const ExperimentConfig& cfg, const Matrix& Y,
                     const MeasurementOperator& op, Rng fit_rng) {
  FitOutput out;
  const Index n = op.n();
  LayerSpec spec;
  spec.sizes.push_back(n);
  for (Index k : cfg.model.layer_sizes) spec.sizes.push_back(k);
  out.lambda = resolve_lambda(cfg, op, spec, Y, fit_rng);

  switch (cfg.model.method) {
    case Method::dbcs: {
      DbcsModel model = dbcs_fit(Y, op, spec, out.lambda, cfg.model.sweeps,
                                 cfg.model.solver, fit_rng);
      out.dictionaries = std::move(model.dictionaries);
      out.codes = std::move(model.codes);
      out.trace = std::move(model.objective_trace);
      break;
    }
    case Method::bcs: {
      ShallowFit fit = bcs_fit(Y, op, cfg.model.layer_sizes.front(), out.lambda,
                               cfg.model.mu, cfg.model.sweeps, cfg.model.solver,
                               fit_rng);
      out.dictionaries = {std::move(fit.dictionary)};
      out.codes = std::move(fit.codes);
      out.trace = std::move(fit.trace);
      break;
    }
    case Method::dl: {
      // Dictionary learning baseline operates on the raw signal domain.
      throw ConfigError("fit_method: dl handled by caller");
    }
    case Method::cs_ista: {
      IstaResult r = ista(matrix_map(op.materialize()), Y, out.lambda,
                          Matrix::Zero(n, Y.cols()), cfg.model.solver, fit_rng);
      out.codes = std::move(r.Z);
      out.trace = std::move(r.trace);
      break;
    }
  }
  return out;
}

nlohmann::ordered_json classification_report(
    const ExperimentConfig& cfg, const std::vector<int>& labels_train,
    const std::vector<int>& labels_test, const Matrix& feat_train,
    const Matrix& feat_test, const Matrix& raw_train, const Matrix& raw_test) {
  LabeledDataset train{feat_train, labels_train};
  std::vector<int> pred = knn_predict(train, feat_test, cfg.eval.k);

  LabeledDataset raw{raw_train, labels_train};
  std::vector<int> raw_pred = knn_predict(raw, raw_test, cfg.eval.k);

  int num_classes = 0;
  for (int l : labels_test) num_classes = std::max(num_classes, l + 1);
  for (int l : labels_train) num_classes = std::max(num_classes, l + 1);

  nlohmann::ordered_json per_class = nlohmann::ordered_json::array();
  double recall_sum = 0.0;
  int recall_count = 0;
  for (int c = 0; c < num_classes; ++c) {
    SensSpec ss = sens_spec(pred, labels_test, c);
    nlohmann::ordered_json entry;
    entry["class"] = c;
    if (ss.sensitivity) {
      entry["sensitivity"] = *ss.sensitivity;
      recall_sum += *ss.sensitivity;
      ++recall_count;
    } else {
      entry["sensitivity"] = nullptr;
    }
    entry["specificity"] = ss.specificity;
    per_class.push_back(entry);
  }

  nlohmann::ordered_json report;
  report["protocol"] = to_string(cfg.eval.protocol);
  report["k"] = cfg.eval.k;
  report["accuracy_overall"] = accuracy(pred, labels_test);
  report["accuracy_macro"] =
      recall_count > 0 ? recall_sum / recall_count : 0.0;
  report["baseline_accuracy_raw_measurements"] = accuracy(raw_pred, labels_test);
  report["per_class"] = per_class;
  return report;
}

}  // namespace

nlohmann::ordered_json evaluate_features(const EvalSpec& eval,
                                         const Matrix& features,
                                         const std::vector<int>& labels,
                                         Rng split_rng) {
  auto [train_idx, test_idx] = split_indices(labels, eval.split_fraction, split_rng);
  LabeledDataset train{select_cols(features, train_idx),
                       select_labels(labels, train_idx)};
  std::vector<int> labels_test = select_labels(labels, test_idx);
  std::vector<int> pred =
      knn_predict(train, select_cols(features, test_idx), eval.k);

  int num_classes = 0;
  for (int l : labels) num_classes = std::max(num_classes, l + 1);

  nlohmann::ordered_json per_class = nlohmann::ordered_json::array();
  double recall_sum = 0.0;
  int recall_count = 0;
  for (int c = 0; c < num_classes; ++c) {
    SensSpec ss = sens_spec(pred, labels_test, c);
    nlohmann::ordered_json entry;
    entry["class"] = c;
    if (ss.sensitivity) {
      entry["sensitivity"] = *ss.sensitivity;
      recall_sum += *ss.sensitivity;
      ++recall_count;
    } else {
      entry["sensitivity"] = nullptr;
    }
    entry["specificity"] = ss.specificity;
    per_class.push_back(entry);
  }

  nlohmann::ordered_json report;
  report["k"] = eval.k;
  report["accuracy_overall"] = accuracy(pred, labels_test);
  report["accuracy_macro"] = recall_count > 0 ? recall_sum / recall_count : 0.0;
  report["per_class"] = per_class;
  return report;
}

std::string run(const ExperimentConfig& cfg, const std::string& out_dir) {
  fs::create_directories(out_dir);
  std::vector<std::string> written;
  auto track = [&](const std::string& p) {
    written.push_back(p);
    return p;
  };

  std::string stage = "setup";
  auto started = std::chrono::steady_clock::now();
  try {
    stage = "synth";
    SynthResult data;
    Rng data_rng = data_stream(cfg.seed);
    if (cfg.data.synthetic) {
      data = synth(cfg.data.synth, data_rng);
    } else {
      data.X = mat_read(cfg.data.path);
      if (!cfg.data.labels_path.empty()) {
        std::ifstream in(cfg.data.labels_path);
        if (!in) throw IoError("cannot open labels " + cfg.data.labels_path);
        nlohmann::json lj;
        in >> lj;
        data.labels = lj.get<std::vector<int>>();
        if (static_cast<Index>(data.labels.size()) != data.X.cols()) {
          throw DimensionError("labels length does not match data columns");
        }
      }
    }
    const Index n = data.X.rows();
    mat_write(data.X, track(out_dir + "/X.mat"));

    stage = "acquire";
    Index m = cfg.op.m ? *cfg.op.m
              : cfg.op.kind == OperatorKind::identity
                  ? n
                  : static_cast<Index>(
                        std::ceil(cfg.op.ratio * static_cast<double>(n)));
    std::uint64_t op_seed = derived_operator_seed(cfg.seed);
    MeasurementOperator op =
        build_operator(cfg.op.kind, m, n, op_seed, {.density = cfg.op.density});
    Matrix Y = op.apply(data.X);
    mat_write(Y, track(out_dir + "/Y.mat"));

    nlohmann::ordered_json report;
    report["version"] = kToolkitVersion;
    report["config"] = config_to_json(cfg);
    report["operator_seed"] = op_seed;

    Rng fit_rng = fit_stream(cfg.seed);

    if (data.labels.empty()) {
      // Reconstruction experiment.
      stage = "fit";
      FitOutput fit;
      Matrix x_hat;
      if (cfg.model.method == Method::dl) {
        Rng probe = fit_rng;
        LayerSpec spec{{n, cfg.model.layer_sizes.front()}};
        MeasurementOperator id = build_operator(OperatorKind::identity, n, n, 0);
        fit.lambda = cfg.model.lambda
                         ? *cfg.model.lambda
                         : resolve_lambda(cfg, id, spec, data.X, probe);
        ShallowFit s = dl_fit(data.X, cfg.model.layer_sizes.front(), fit.lambda,
                              cfg.model.sweeps, cfg.model.solver, fit_rng);
        fit.dictionaries = {std::move(s.dictionary)};
        fit.codes = std::move(s.codes);
        fit.trace = std::move(s.trace);
      } else {
        fit = fit_method(cfg, Y, op, fit_rng);
      }

      stage = "reconstruct";
      if (fit.dictionaries.empty()) {
        x_hat = fit.codes;  // cs_ista recovers the signal directly
      } else {
        // right-to-left, matching reconstruct() bit for bit
        x_hat = fit.codes;
        for (auto it = fit.dictionaries.rbegin(); it != fit.dictionaries.rend();
             ++it) {
          x_hat = *it * x_hat;
        }
      }
      mat_write(x_hat, track(out_dir + "/Xhat.mat"));

      stage = "report";
      if (!fit.dictionaries.empty()) {
        DbcsModel model;
        model.dictionaries = fit.dictionaries;
        model.codes = fit.codes;
        model.lambda = fit.lambda;
        model.seed = cfg.seed;
        model.layer_spec.sizes.push_back(fit.dictionaries.front().rows());
        for (const Matrix& d : fit.dictionaries) {
          model.layer_spec.sizes.push_back(d.cols());
        }
        model.objective_trace = fit.trace;
        save_model(model, track(out_dir + "/model"));
      } else {
        mat_write(fit.codes, track(out_dir + "/codes.mat"));
      }

      report["lambda_resolved"] = fit.lambda;
      report["objective_trace"] = fit.trace;
      nlohmann::ordered_json rec;
      rec["nmse"] = nmse(data.X, x_hat);
      rec["baseline_nmse_zero_code"] = 1.0;
      report["reconstruction"] = rec;
      report["classification"] = nullptr;
    } else {
      // Classification experiment.
      stage = "classify";
      Rng split_rng = split_stream(cfg.seed);
      auto [train_idx, test_idx] =
          split_indices(data.labels, cfg.eval.split_fraction, split_rng);
      std::vector<int> labels_train = select_labels(data.labels, train_idx);
      std::vector<int> labels_test = select_labels(data.labels, test_idx);
      Matrix Y_train = select_cols(Y, train_idx);
      Matrix Y_test = select_cols(Y, test_idx);

      stage = "fit";
      FitOutput fit;
      Matrix feat_train, feat_test;
      if (cfg.model.method == Method::dl) {
        Matrix X_train = select_cols(data.X, train_idx);
        Matrix X_test = select_cols(data.X, test_idx);
        Rng probe = fit_rng;
        LayerSpec spec{{n, cfg.model.layer_sizes.front()}};
        MeasurementOperator id = build_operator(OperatorKind::identity, n, n, 0);
        fit.lambda = cfg.model.lambda
                         ? *cfg.model.lambda
                         : resolve_lambda(cfg, id, spec, X_train, probe);
        ShallowFit s = dl_fit(X_train, cfg.model.layer_sizes.front(), fit.lambda,
                              cfg.model.sweeps, cfg.model.solver, fit_rng);
        fit.dictionaries = {std::move(s.dictionary)};
        fit.codes = std::move(s.codes);
        fit.trace = std::move(s.trace);
        feat_train = fit.codes;
        feat_test = encode(id, fit.dictionaries, X_test, fit.lambda,
                           cfg.model.solver);
      } else if (cfg.eval.protocol == FeatureProtocol::frozen_encode) {
        fit = fit_method(cfg, Y_train, op, fit_rng);
        stage = "encode";
        feat_train = fit.codes;
        feat_test = encode(op, fit.dictionaries, Y_test, fit.lambda,
                           cfg.model.solver);
      } else {
        fit = fit_method(cfg, Y, op, fit_rng);
        stage = "encode";
        std::vector<Index> local_train(train_idx.begin(), train_idx.end());
        feat_train = select_cols(fit.codes, local_train);
        std::vector<Index> local_test(test_idx.begin(), test_idx.end());
        feat_test = select_cols(fit.codes, local_test);
      }

      stage = "report";
      if (!fit.dictionaries.empty()) {
        DbcsModel model;
        model.dictionaries = fit.dictionaries;
        model.codes = fit.codes;
        model.lambda = fit.lambda;
        model.seed = cfg.seed;
        model.layer_spec.sizes.push_back(fit.dictionaries.front().rows());
        for (const Matrix& d : fit.dictionaries) {
          model.layer_spec.sizes.push_back(d.cols());
        }
        model.objective_trace = fit.trace;
        save_model(model, track(out_dir + "/model"));
      }
      mat_write(feat_train, track(out_dir + "/features_train.mat"));
      mat_write(feat_test, track(out_dir + "/features_test.mat"));

      report["lambda_resolved"] = fit.lambda;
      report["objective_trace"] = fit.trace;
      report["reconstruction"] = nullptr;
      report["classification"] = classification_report(
          cfg, labels_train, labels_test, feat_train, feat_test, Y_train, Y_test);
    }

    double wall = std::chrono::duration<double>(
                      std::chrono::steady_clock::now() - started)
                      .count();
    report["wall_time_seconds"] = wall;

    std::string report_path = out_dir + "/report.json";
    std::ofstream out(report_path);
    if (!out) throw IoError("cannot open " + report_path);
    out << report.dump(2) << "\n";
    return report_path;
  } catch (const std::exception& e) {
    for (const std::string& p : written) {
      std::error_code ec;
      fs::remove_all(p, ec);
    }
    throw Error("stage " + stage + ": " + e.what());
  }
}

void export_csv(const std::string& mat_path, const std::string& out_path) {
  Matrix m = mat_read(mat_path);
  std::ofstream out(out_path, std::ios::trunc);
  if (!out) throw IoError("export_csv: cannot open " + out_path);
  char buf[64];
  for (Index r = 0; r < m.rows(); ++r) {
    for (Index c = 0; c < m.cols(); ++c) {
      std::snprintf(buf, sizeof(buf), "%.17g", m(r, c));
      if (c > 0) out << ',';
      out << buf;
    }
    out << '\n';
  }
  if (!out) throw IoError("export_csv: write failed for " + out_path);
}

}  // namespace dbcs
