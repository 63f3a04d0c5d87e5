#pragma once

#include "dbcs/operators.hpp"
#include "dbcs/solvers.hpp"

#include <string>
#include <vector>

namespace dbcs {

/// Layer sizes [n, k1, ..., kM]; dictionary i has shape sizes[i-1] x sizes[i].
struct LayerSpec {
  std::vector<Index> sizes;
  Index depth() const { return static_cast<Index>(sizes.size()) - 1; }
};

struct DbcsModel {
  std::vector<Matrix> dictionaries;  // D1 ... DM, unit-norm columns after fit
  Matrix codes;                      // Z, kM x N
  double lambda = 0.0;
  LayerSpec layer_spec;
  std::vector<double> objective_trace;  // one entry per completed sweep
  std::uint64_t seed = 0;
};

/// D1 * D2 * ... * DM (identity-sized passthrough for an empty list is not
/// supported; at least one factor required).
Matrix dictionary_product(const std::vector<Matrix>& dicts);

/// ||Y - A D1...DM Z||_F^2 + lambda * sum |Z_ij|.
double objective(const std::vector<Matrix>& dicts, const Matrix& Z,
                 const Matrix& Y, const MeasurementOperator& A, double lambda);

/// Data-scaled default: 0.1 * max |(A D1...DM)^T Y|.
double default_lambda(const MeasurementOperator& A,
                      const std::vector<Matrix>& dicts, const Matrix& Y);

/// Alternating-minimization trainer for the multi-level synthesis model.
/// Initializes each dictionary as a normalized Gaussian draw and Z = 0, then
/// per sweep updates D1..DM by conjugate gradient on their sandwiched
/// least-squares subproblems (warm-started), updates Z by ISTA (warm-started),
/// and re-normalizes every dictionary's columns, compensating by scaling the
/// rows of the immediately downstream factor so the product D1...DM Z is
/// unchanged up to rounding. Stops after `sweeps` sweeps or when the relative
/// trace change drops below opts.tol. Deterministic from (inputs, rng seed).
DbcsModel dbcs_fit(const Matrix& Y, const MeasurementOperator& A,
                   const LayerSpec& spec, double lambda, int sweeps,
                   const SolverOptions& opts, Rng& rng);

/// X = D1 ... DM Z.
Matrix reconstruct(const DbcsModel& model);

/// Out-of-sample codes with frozen dictionaries: ISTA from zero on
/// min ||Y_new - A D1...DM Z||_F^2 + lambda ||Z||_1. Columns are encoded
/// independently with a shared step size, so batch and per-column calls give
/// identical results.
Matrix encode(const MeasurementOperator& A, const std::vector<Matrix>& dicts,
              const Matrix& Y_new, double lambda, const SolverOptions& opts);

struct ShallowFit {
  Matrix dictionary;
  Matrix codes;
  std::vector<double> trace;
};

/// Shallow blind compressed sensing: min ||Y - A D Z||_F^2 + lambda ||Z||_1
/// + mu ||D||_F^2, alternating a ridge-regularized CG dictionary update with
/// the ISTA code update. No column normalization (the mu term prevents the
/// degenerate scaling).
ShallowFit bcs_fit(const Matrix& Y, const MeasurementOperator& A, Index k,
                   double lambda, double mu, int sweeps,
                   const SolverOptions& opts, Rng& rng);

/// Single-layer dictionary learning: dbcs_fit with the identity operator and
/// M = 1, exposed as a wrapper so the equivalence is testable.
ShallowFit dl_fit(const Matrix& X, Index k, double lambda, int sweeps,
                  const SolverOptions& opts, Rng& rng);

/// Model serialization: D1.mat ... DM.mat and Z.mat in DBCS1 format plus a
/// manifest.json (layer sizes, lambda, seed, objective trace) in `dir`.
void save_model(const DbcsModel& model, const std::string& dir);
DbcsModel load_model(const std::string& dir);

}  // namespace dbcs
