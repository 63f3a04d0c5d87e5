#include "dbcs/operators.hpp"

#include <algorithm>
#include <cmath>

namespace dbcs {

OperatorKind operator_kind_from_string(std::string_view s) {
  if (s == "dense_gaussian") return OperatorKind::dense_gaussian;
  if (s == "sparse_binary") return OperatorKind::sparse_binary;
  if (s == "row_subsample") return OperatorKind::row_subsample;
  if (s == "identity") return OperatorKind::identity;
  throw ConfigError("unknown operator kind: " + std::string(s));
}

std::string to_string(OperatorKind kind) {
  switch (kind) {
    case OperatorKind::dense_gaussian: return "dense_gaussian";
    case OperatorKind::sparse_binary: return "sparse_binary";
    case OperatorKind::row_subsample: return "row_subsample";
    case OperatorKind::identity: return "identity";
  }
  throw ConfigError("invalid operator kind");
}

MeasurementOperator MeasurementOperator::build(OperatorKind kind, Index m, Index n,
                                               std::uint64_t seed,
                                               OperatorParams params) {
  if (m < 1 || n < 1 || m > n) {
    throw DimensionError("build_operator: need 1 <= m <= n");
  }
  MeasurementOperator op;
  op.kind_ = kind;
  op.m_ = m;
  op.n_ = n;
  op.seed_ = seed;
  op.density_ = params.density;

  Rng rng(seed);
  switch (kind) {
    case OperatorKind::identity: {
      if (m != n) throw DimensionError("build_operator: identity requires m == n");
      break;
    }
    case OperatorKind::dense_gaussian: {
      op.matrix_ = gaussian_matrix(m, n, rng) / std::sqrt(static_cast<double>(m));
      break;
    }
    case OperatorKind::sparse_binary: {
      if (!(params.density > 0.0 && params.density <= 1.0)) {
        throw ConfigError("build_operator: density must be in (0, 1]");
      }
      op.matrix_.resize(m, n);
      for (Index r = 0; r < m; ++r) {
        double norm = 0.0;
        do {
          for (Index c = 0; c < n; ++c) {
            op.matrix_(r, c) = rng.next_uniform() < params.density ? 1.0 : 0.0;
          }
          norm = op.matrix_.row(r).norm();
        } while (norm == 0.0);  // regenerate an all-zero row
        op.matrix_.row(r) /= norm;
      }
      break;
    }
    case OperatorKind::row_subsample: {
      if (params.kept_rows.empty()) {
        // Partial Fisher-Yates: first m entries of a seeded permutation of 0..n-1.
        std::vector<Index> perm(static_cast<std::size_t>(n));
        for (Index i = 0; i < n; ++i) perm[static_cast<std::size_t>(i)] = i;
        for (Index i = 0; i < m; ++i) {
          Index j = i + static_cast<Index>(rng.next_u64() % static_cast<std::uint64_t>(n - i));
          std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
        }
        op.kept_rows_.assign(perm.begin(), perm.begin() + m);
        std::sort(op.kept_rows_.begin(), op.kept_rows_.end());
      } else {
        op.kept_rows_ = std::move(params.kept_rows);
        if (static_cast<Index>(op.kept_rows_.size()) != m) {
          throw DimensionError("build_operator: kept_rows size must equal m");
        }
        if (!std::is_sorted(op.kept_rows_.begin(), op.kept_rows_.end()) ||
            std::adjacent_find(op.kept_rows_.begin(), op.kept_rows_.end()) !=
                op.kept_rows_.end()) {
          throw ConfigError("build_operator: kept_rows must be sorted and distinct");
        }
        if (op.kept_rows_.front() < 0 || op.kept_rows_.back() >= n) {
          throw ConfigError("build_operator: kept_rows index out of range");
        }
      }
      break;
    }
  }
  return op;
}

Matrix MeasurementOperator::apply(const Matrix& X) const {
  if (X.rows() != n_) {
    throw DimensionError("apply: X has " + std::to_string(X.rows()) +
                         " rows, operator expects " + std::to_string(n_));
  }
  switch (kind_) {
    case OperatorKind::identity:
      return X;
    case OperatorKind::row_subsample: {
      Matrix Y(m_, X.cols());
      for (Index i = 0; i < m_; ++i) {
        Y.row(i) = X.row(kept_rows_[static_cast<std::size_t>(i)]);
      }
      return Y;
    }
    default:
      return matrix_ * X;
  }
}

Matrix MeasurementOperator::adjoint(const Matrix& Y) const {
  if (Y.rows() != m_) {
    throw DimensionError("adjoint: Y has " + std::to_string(Y.rows()) +
                         " rows, operator expects " + std::to_string(m_));
  }
  switch (kind_) {
    case OperatorKind::identity:
      return Y;
    case OperatorKind::row_subsample: {
      Matrix X = Matrix::Zero(n_, Y.cols());
      for (Index i = 0; i < m_; ++i) {
        X.row(kept_rows_[static_cast<std::size_t>(i)]) = Y.row(i);
      }
      return X;
    }
    default:
      return matrix_.transpose() * Y;
  }
}

Matrix MeasurementOperator::materialize() const {
  switch (kind_) {
    case OperatorKind::identity:
      return Matrix::Identity(m_, n_);
    case OperatorKind::row_subsample: {
      Matrix A = Matrix::Zero(m_, n_);
      for (Index i = 0; i < m_; ++i) {
        A(i, kept_rows_[static_cast<std::size_t>(i)]) = 1.0;
      }
      return A;
    }
    default:
      return matrix_;
  }
}

}  // namespace dbcs
