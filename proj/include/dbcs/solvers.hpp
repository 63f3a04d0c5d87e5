#pragma once

#include "dbcs/core.hpp"

#include <functional>
#include <vector>

namespace dbcs {

struct SolverOptions {
  int max_iters = 100;     // ISTA iteration cap
  int cg_max_iters = 50;   // CG iteration cap for the dictionary subproblems
  double tol = 1e-6;       // relative-change stopping threshold
  double safety = 0.95;    // step-size safety factor in (0, 1]
  int power_iters = 50;    // power-iteration count for the Lipschitz estimate
};

/// Abstract (forward, adjoint) pair acting columnwise on matrices; composes
/// the sensing map with dictionary products without materializing them.
struct LinearMap {
  Index rows = 0;  // output dimension of forward
  Index cols = 0;  // input dimension of forward
  std::function<Matrix(const Matrix&)> forward;
  std::function<Matrix(const Matrix&)> adjoint;
};

/// Wraps an explicit matrix G (copied) as a LinearMap.
LinearMap matrix_map(Matrix G);

/// G = A * D1 * ... * DM applied factor by factor.
LinearMap composed_map(Matrix A, std::vector<Matrix> dicts);

/// sign(x) * max(|x| - tau, 0).
double soft_threshold(double x, double tau);
Matrix soft_threshold(Matrix x, double tau);

/// Largest singular value of the map, by power iteration on adjoint∘forward
/// from a random start. Returns 0 for the zero map.
double spectral_norm_estimate(const LinearMap& map, Rng& rng, int iters = 50);

struct IstaResult {
  Matrix Z;
  std::vector<double> trace;  // objective per iteration, starting at Z0
};

/// Minimizes ||Y - G Z||_F^2 + lambda * ||Z||_1 by iterative soft
/// thresholding with a fixed step 1/L, L = 2*sigma^2/safety and sigma the
/// power-iteration spectral-norm estimate. The trace is non-increasing.
IstaResult ista(const LinearMap& G, const Matrix& Y, double lambda,
                const Matrix& Z0, const SolverOptions& opts, Rng& rng);

/// Same with a caller-supplied spectral norm (skips the power iteration).
IstaResult ista_with_norm(const LinearMap& G, const Matrix& Y, double lambda,
                          const Matrix& Z0, const SolverOptions& opts,
                          double sigma);

/// Approximately minimizes ||Y - L D R||_F^2 + ridge * ||D||_F^2 over the
/// middle factor D (q x r), by conjugate gradient on the normal-equations map
/// D -> L^T L D R R^T + ridge * D with right-hand side L^T Y R^T, warm-started
/// at D0. Stops when the normal-equations residual drops below
/// tol * ||L^T Y R^T||_F or after cg_max_iters iterations. Never increases the
/// objective relative to D0.
Matrix sandwich_lsq(const Matrix& L, const Matrix& R, const Matrix& Y,
                    const Matrix& D0, const SolverOptions& opts,
                    double ridge = 0.0);

}  // namespace dbcs
