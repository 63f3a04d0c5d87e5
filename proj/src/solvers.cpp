#include "dbcs/solvers.hpp"

#include <cmath>
#include <memory>
#include <utility>

namespace dbcs {

LinearMap matrix_map(Matrix G) {
  auto held = std::make_shared<Matrix>(std::move(G));
  LinearMap map;
  map.rows = held->rows();
  map.cols = held->cols();
  map.forward = [held](const Matrix& X) -> Matrix { return *held * X; };
  map.adjoint = [held](const Matrix& Y) -> Matrix { return held->transpose() * Y; };
  return map;
}

LinearMap composed_map(Matrix A, std::vector<Matrix> dicts) {
  auto a = std::make_shared<Matrix>(std::move(A));
  auto ds = std::make_shared<std::vector<Matrix>>(std::move(dicts));
  LinearMap map;
  map.rows = a->rows();
  map.cols = ds->empty() ? a->cols() : ds->back().cols();
  map.forward = [a, ds](const Matrix& Z) -> Matrix {
    Matrix x = Z;
    for (auto it = ds->rbegin(); it != ds->rend(); ++it) {
      x = *it * x;
    }
    return *a * x;
  };
  map.adjoint = [a, ds](const Matrix& Y) -> Matrix {
    Matrix x = a->transpose() * Y;
    for (const Matrix& d : *ds) {
      x = d.transpose() * x;
    }
    return x;
  };
  return map;
}

double soft_threshold(double x, double tau) {
  if (x > tau) return x - tau;
  if (x < -tau) return x + tau;
  return 0.0;
}

Matrix soft_threshold(Matrix x, double tau) {
  for (Index c = 0; c < x.cols(); ++c) {
    for (Index r = 0; r < x.rows(); ++r) {
      x(r, c) = soft_threshold(x(r, c), tau);
    }
  }
  return x;
}

double spectral_norm_estimate(const LinearMap& map, Rng& rng, int iters) {
  if (iters < 1) {
    throw ConfigError("spectral_norm_estimate: iters must be >= 1");
  }
  Matrix b = gaussian_matrix(map.cols, 1, rng);
  b /= b.norm();
  for (int it = 0; it < iters; ++it) {
    Matrix next = map.adjoint(map.forward(b));
    double norm = next.norm();
    if (!(norm > 0.0)) {
      return 0.0;  // zero map, or b landed in the null space
    }
    b = next / norm;
  }
  return map.forward(b).norm();
}

namespace {

double lasso_objective(const LinearMap& G, const Matrix& Y, double lambda,
                       const Matrix& Z) {
  return (Y - G.forward(Z)).squaredNorm() + lambda * Z.cwiseAbs().sum();
}

}  // namespace

IstaResult ista_with_norm(const LinearMap& G, const Matrix& Y, double lambda,
                          const Matrix& Z0, const SolverOptions& opts,
                          double sigma) {
  if (Y.rows() != G.rows || Z0.rows() != G.cols || Z0.cols() != Y.cols()) {
    throw DimensionError("ista: inconsistent dimensions");
  }
  if (lambda < 0.0) {
    throw ConfigError("ista: lambda must be nonnegative");
  }
  IstaResult result;
  if (sigma <= 0.0) {
    // Zero map: the objective is ||Y||_F^2 + lambda*||Z||_1, minimized at 0.
    result.Z = Matrix::Zero(Z0.rows(), Z0.cols());
    result.trace.push_back(lasso_objective(G, Y, lambda, result.Z));
    return result;
  }
  double lipschitz = 2.0 * sigma * sigma / opts.safety;
  double step = 1.0 / lipschitz;
  result.Z = Z0;
  double obj = lasso_objective(G, Y, lambda, result.Z);
  if (!std::isfinite(obj)) {
    throw NonFiniteError("ista: non-finite objective at warm start");
  }
  result.trace.push_back(obj);
  for (int it = 0; it < opts.max_iters; ++it) {
    Matrix grad = 2.0 * G.adjoint(G.forward(result.Z) - Y);
    result.Z = soft_threshold(result.Z - step * grad, lambda * step);
    double next = lasso_objective(G, Y, lambda, result.Z);
    if (!std::isfinite(next)) {
      throw NonFiniteError("ista: non-finite objective (bad step size or corrupt input)");
    }
    result.trace.push_back(next);
    double denom = std::max(std::abs(obj), 1e-300);
    if (std::abs(obj - next) < opts.tol * denom) {
      break;
    }
    obj = next;
  }
  return result;
}

IstaResult ista(const LinearMap& G, const Matrix& Y, double lambda,
                const Matrix& Z0, const SolverOptions& opts, Rng& rng) {
  double sigma = spectral_norm_estimate(G, rng, opts.power_iters);
  return ista_with_norm(G, Y, lambda, Z0, opts, sigma);
}

Matrix sandwich_lsq(const Matrix& L, const Matrix& R, const Matrix& Y,
                    const Matrix& D0, const SolverOptions& opts, double ridge) {
  if (L.rows() != Y.rows() || R.cols() != Y.cols() || D0.rows() != L.cols() ||
      D0.cols() != R.rows()) {
    throw DimensionError("sandwich_lsq: inconsistent dimensions");
  }
  if (ridge < 0.0) {
    throw ConfigError("sandwich_lsq: ridge must be nonnegative");
  }
  const Matrix ltl = L.transpose() * L;
  const Matrix rrt = R * R.transpose();
  const Matrix rhs = L.transpose() * Y * R.transpose();
  if (rhs.cwiseAbs().maxCoeff() == 0.0) {
    // Degenerate subproblem (R or L vanishes): the data term does not
    // constrain D, so keep the warm start instead of letting the ridge
    // collapse it to zero. Happens at the Z = 0 initialization.
    return D0;
  }
  auto normal_map = [&](const Matrix& d) -> Matrix {
    Matrix out = ltl * d * rrt;
    if (ridge > 0.0) out += ridge * d;
    return out;
  };

  Matrix d = D0;
  Matrix resid = rhs - normal_map(d);
  Matrix p = resid;
  double rs = resid.squaredNorm();
  const double stop = opts.tol * rhs.norm();
  for (int it = 0; it < opts.cg_max_iters && std::sqrt(rs) > stop; ++it) {
    Matrix ap = normal_map(p);
    double denom = (p.array() * ap.array()).sum();
    if (!(denom > 0.0)) {
      break;  // p in the null space of the (PSD) normal map
    }
    double alpha = rs / denom;
    d += alpha * p;
    resid -= alpha * ap;
    double rs_next = resid.squaredNorm();
    p = resid + (rs_next / rs) * p;
    rs = rs_next;
    if (!d.allFinite()) {
      throw NonFiniteError("sandwich_lsq: non-finite iterate");
    }
  }
  return d;
}

}  // namespace dbcs
