#include "dbcs/dbcs.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>

namespace dbcs {

namespace {

void validate_spec(const LayerSpec& spec, const MeasurementOperator& A) {
  if (spec.sizes.size() < 2) {
    throw ConfigError("layer spec needs at least [n, k1]");
  }
  for (Index s : spec.sizes) {
    if (s < 1) throw ConfigError("layer sizes must be positive");
  }
  if (spec.sizes.front() != A.n()) {
    throw DimensionError("layer spec signal dimension does not match operator");
  }
}

}  // namespace

Matrix dictionary_product(const std::vector<Matrix>& dicts) {
  if (dicts.empty()) {
    throw ConfigError("dictionary_product: empty dictionary list");
  }
  Matrix prod = dicts.front();
  for (std::size_t i = 1; i < dicts.size(); ++i) {
    prod = prod * dicts[i];
  }
  return prod;
}

double objective(const std::vector<Matrix>& dicts, const Matrix& Z,
                 const Matrix& Y, const MeasurementOperator& A, double lambda) {
  Matrix x = Z;
  for (auto it = dicts.rbegin(); it != dicts.rend(); ++it) {
    x = *it * x;
  }
  return (Y - A.apply(x)).squaredNorm() + lambda * Z.cwiseAbs().sum();
}

double default_lambda(const MeasurementOperator& A,
                      const std::vector<Matrix>& dicts, const Matrix& Y) {
  Matrix g = A.adjoint(Y);
  for (const Matrix& d : dicts) {
    g = d.transpose() * g;
  }
  return 0.1 * g.cwiseAbs().maxCoeff();
}

DbcsModel dbcs_fit(const Matrix& Y, const MeasurementOperator& A,
                   const LayerSpec& spec, double lambda, int sweeps,
                   const SolverOptions& opts, Rng& rng) {
  validate_spec(spec, A);
  if (Y.rows() != A.m() || Y.cols() < 1) {
    throw DimensionError("dbcs_fit: Y does not match the operator");
  }
  if (sweeps < 1) throw ConfigError("dbcs_fit: sweeps must be >= 1");
  if (lambda < 0.0) throw ConfigError("dbcs_fit: lambda must be nonnegative");

  const Index M = spec.depth();
  const Index N = Y.cols();
  const Matrix A_dense = A.materialize();

  DbcsModel model;
  model.layer_spec = spec;
  model.lambda = lambda;
  model.seed = rng.seed();
  model.dictionaries.reserve(static_cast<std::size_t>(M));
  for (Index i = 0; i < M; ++i) {
    Matrix d = gaussian_matrix(spec.sizes[static_cast<std::size_t>(i)],
                               spec.sizes[static_cast<std::size_t>(i) + 1], rng);
    normalize_columns(d, rng);
    model.dictionaries.push_back(std::move(d));
  }
  model.codes = Matrix::Zero(spec.sizes.back(), N);

  model.objective_trace.push_back(objective(model.dictionaries, model.codes, Y, A, lambda));

  for (int sweep = 0; sweep < sweeps; ++sweep) {
    // (a) dictionary subproblems, in order, warm-started
    for (Index j = 0; j < M; ++j) {
      Matrix left = A_dense;
      for (Index i = 0; i < j; ++i) {
        left = left * model.dictionaries[static_cast<std::size_t>(i)];
      }
      Matrix right = model.codes;
      for (Index i = M - 1; i > j; --i) {
        right = model.dictionaries[static_cast<std::size_t>(i)] * right;
      }
      model.dictionaries[static_cast<std::size_t>(j)] = sandwich_lsq(
          left, right, Y, model.dictionaries[static_cast<std::size_t>(j)], opts);
    }

    // (b) code subproblem
    LinearMap g = composed_map(A_dense, model.dictionaries);
    model.codes = ista(g, Y, lambda, model.codes, opts, rng).Z;

    // (c) normalize, pushing the scales into the downstream factor so the
    // product is unchanged
    for (Index i = 0; i < M; ++i) {
      Vector scales = normalize_columns(model.dictionaries[static_cast<std::size_t>(i)], rng);
      Matrix& downstream =
          (i + 1 < M) ? model.dictionaries[static_cast<std::size_t>(i) + 1] : model.codes;
      for (Index c = 0; c < scales.size(); ++c) {
        downstream.row(c) *= scales[c];
      }
    }

    // (d) trace
    double obj = objective(model.dictionaries, model.codes, Y, A, lambda);
    if (!std::isfinite(obj)) {
      throw NonFiniteError("dbcs_fit: non-finite objective");
    }
    double prev = model.objective_trace.back();
    model.objective_trace.push_back(obj);
    if (std::abs(prev - obj) < opts.tol * std::max(std::abs(prev), 1e-300)) {
      break;
    }
  }
  return model;
}

Matrix reconstruct(const DbcsModel& model) {
  Matrix x = model.codes;
  for (auto it = model.dictionaries.rbegin(); it != model.dictionaries.rend(); ++it) {
    x = *it * x;
  }
  return x;
}

Matrix encode(const MeasurementOperator& A, const std::vector<Matrix>& dicts,
              const Matrix& Y_new, double lambda, const SolverOptions& opts) {
  if (Y_new.rows() != A.m()) {
    throw DimensionError("encode: Y_new does not match the operator");
  }
  LinearMap g = composed_map(A.materialize(), dicts);
  // Fixed-seed power-iteration start: every call sees the same step size, so
  // per-column and batch encodings agree bitwise.
  Rng power_rng(0xDBC5u);
  double sigma = spectral_norm_estimate(g, power_rng, opts.power_iters);
  Matrix Z(g.cols, Y_new.cols());
  Matrix z0 = Matrix::Zero(g.cols, 1);
  for (Index c = 0; c < Y_new.cols(); ++c) {
    Z.col(c) = ista_with_norm(g, Y_new.col(c), lambda, z0, opts, sigma).Z;
  }
  return Z;
}

ShallowFit bcs_fit(const Matrix& Y, const MeasurementOperator& A, Index k,
                   double lambda, double mu, int sweeps,
                   const SolverOptions& opts, Rng& rng) {
  if (Y.rows() != A.m() || Y.cols() < 1) {
    throw DimensionError("bcs_fit: Y does not match the operator");
  }
  if (k < 1) throw ConfigError("bcs_fit: k must be >= 1");
  if (mu < 0.0 || lambda < 0.0) {
    throw ConfigError("bcs_fit: lambda and mu must be nonnegative");
  }
  if (sweeps < 1) throw ConfigError("bcs_fit: sweeps must be >= 1");

  const Matrix A_dense = A.materialize();
  ShallowFit fit;
  fit.dictionary = gaussian_matrix(A.n(), k, rng);
  normalize_columns(fit.dictionary, rng);
  fit.codes = Matrix::Zero(k, Y.cols());

  auto obj = [&]() {
    return (Y - A_dense * fit.dictionary * fit.codes).squaredNorm() +
           lambda * fit.codes.cwiseAbs().sum() +
           mu * fit.dictionary.squaredNorm();
  };
  fit.trace.push_back(obj());

  for (int sweep = 0; sweep < sweeps; ++sweep) {
    fit.dictionary =
        sandwich_lsq(A_dense, fit.codes, Y, fit.dictionary, opts, mu);
    LinearMap g = matrix_map(A_dense * fit.dictionary);
    fit.codes = ista(g, Y, lambda, fit.codes, opts, rng).Z;
    double value = obj();
    if (!std::isfinite(value)) {
      throw NonFiniteError("bcs_fit: non-finite objective");
    }
    double prev = fit.trace.back();
    fit.trace.push_back(value);
    if (std::abs(prev - value) < opts.tol * std::max(std::abs(prev), 1e-300)) {
      break;
    }
  }
  return fit;
}

ShallowFit dl_fit(const Matrix& X, Index k, double lambda, int sweeps,
                  const SolverOptions& opts, Rng& rng) {
  MeasurementOperator id =
      build_operator(OperatorKind::identity, X.rows(), X.rows(), 0);
  LayerSpec spec{{X.rows(), k}};
  DbcsModel model = dbcs_fit(X, id, spec, lambda, sweeps, opts, rng);
  return ShallowFit{std::move(model.dictionaries.front()), std::move(model.codes),
                    std::move(model.objective_trace)};
}

void save_model(const DbcsModel& model, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  for (std::size_t i = 0; i < model.dictionaries.size(); ++i) {
    mat_write(model.dictionaries[i], dir + "/D" + std::to_string(i + 1) + ".mat");
  }
  mat_write(model.codes, dir + "/Z.mat");
  nlohmann::ordered_json manifest;
  manifest["format"] = "dbcs-model";
  manifest["layer_sizes"] = model.layer_spec.sizes;
  manifest["lambda"] = model.lambda;
  manifest["seed"] = model.seed;
  manifest["objective_trace"] = model.objective_trace;
  std::ofstream out(dir + "/manifest.json");
  if (!out) throw IoError("save_model: cannot open " + dir + "/manifest.json");
  out << manifest.dump(2) << "\n";
}

DbcsModel load_model(const std::string& dir) {
  std::ifstream in(dir + "/manifest.json");
  if (!in) throw IoError("load_model: cannot open " + dir + "/manifest.json");
  nlohmann::json manifest;
  try {
    in >> manifest;
  } catch (const nlohmann::json::exception& e) {
    throw IoError("load_model: bad manifest in " + dir + ": " + e.what());
  }
  if (manifest.value("format", "") != "dbcs-model") {
    throw BadMagicError("load_model: not a dbcs-model manifest in " + dir);
  }
  DbcsModel model;
  model.layer_spec.sizes = manifest.at("layer_sizes").get<std::vector<Index>>();
  model.lambda = manifest.at("lambda").get<double>();
  model.seed = manifest.at("seed").get<std::uint64_t>();
  model.objective_trace = manifest.at("objective_trace").get<std::vector<double>>();
  for (Index i = 0; i < model.layer_spec.depth(); ++i) {
    model.dictionaries.push_back(
        mat_read(dir + "/D" + std::to_string(i + 1) + ".mat"));
  }
  model.codes = mat_read(dir + "/Z.mat");
  return model;
}

}  // namespace dbcs
