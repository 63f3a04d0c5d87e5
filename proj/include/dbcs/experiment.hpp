#pragma once

#include "dbcs/dbcs.hpp"
#include "dbcs/eval.hpp"
#include "dbcs/operators.hpp"
#include "dbcs/synth.hpp"

#include <nlohmann/json.hpp>

#include <optional>
#include <string>

namespace dbcs {

inline constexpr const char* kToolkitVersion = "dbcs-toolkit 0.1.0";

enum class Method { dbcs, bcs, dl, cs_ista };
enum class FeatureProtocol { frozen_encode, transductive };

Method method_from_string(std::string_view s);
std::string to_string(Method m);
FeatureProtocol protocol_from_string(std::string_view s);
std::string to_string(FeatureProtocol p);

struct DataSpec {
  bool synthetic = true;
  SyntheticSpec synth;
  std::string path;         // file source: DBCS1 matrix of signal columns
  std::string labels_path;  // optional JSON array of integer labels
};

struct ModelSpec {
  Method method = Method::dbcs;
  std::vector<Index> layer_sizes;   // [k1, ..., kM]; signal dimension prepended
  std::optional<double> lambda;     // unset: 0.1 * max |G^T Y| at init
  double mu = 0.1;                  // bcs only
  int sweeps = 10;
  SolverOptions solver;
};

struct OperatorSpec {
  OperatorKind kind = OperatorKind::dense_gaussian;
  double ratio = 0.25;       // m = ceil(ratio * n) unless m is set
  std::optional<Index> m;
  double density = 0.5;      // sparse_binary
};

struct EvalSpec {
  double split_fraction = 0.5;
  int k = 1;
  FeatureProtocol protocol = FeatureProtocol::frozen_encode;
};

struct ExperimentConfig {
  std::uint64_t seed = 0;
  DataSpec data;
  OperatorSpec op;
  ModelSpec model;
  EvalSpec eval;
  std::string output_dir = "out";
};

/// Stream derivation shared by run() and the stage subcommands, so running
/// stages individually reproduces the chained pipeline bit for bit.
Rng data_stream(std::uint64_t seed);
std::uint64_t derived_operator_seed(std::uint64_t seed);
Rng fit_stream(std::uint64_t seed);
Rng split_stream(std::uint64_t seed);

/// Stratified split + k-NN + metrics on an arbitrary feature matrix.
nlohmann::ordered_json evaluate_features(const EvalSpec& eval,
                                         const Matrix& features,
                                         const std::vector<int>& labels,
                                         Rng split_rng);

/// Parses a config document, filling documented defaults and rejecting
/// unknown keys. The DBCS_SEED environment variable, when set, overrides the
/// seed.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);

/// The fully resolved config (defaults expanded) as embedded in reports.
nlohmann::ordered_json config_to_json(const ExperimentConfig& cfg);

/// Runs the whole pipeline: synthesize or load data, acquire, fit, encode or
/// reconstruct, classify when labels exist, and write report.json plus model
/// artifacts into out_dir. Returns the report path. On failure the error names
/// the stage and partial outputs are removed.
std::string run(const ExperimentConfig& cfg, const std::string& out_dir);

/// DBCS1 matrix to plain CSV, one line per matrix row, %.17g rendering.
void export_csv(const std::string& mat_path, const std::string& out_path);

}  // namespace dbcs
