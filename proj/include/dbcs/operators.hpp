#pragma once

#include "dbcs/core.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace dbcs {

enum class OperatorKind { dense_gaussian, sparse_binary, row_subsample, identity };

OperatorKind operator_kind_from_string(std::string_view s);
std::string to_string(OperatorKind kind);

struct OperatorParams {
  double density = 0.5;          // sparse_binary: probability of a 1 entry
  std::vector<Index> kept_rows;  // row_subsample: explicit coordinates; drawn from seed when empty
};

/// The sensing map A with an exact adjoint, in the four acquisition variants:
///   dense_gaussian  m x n i.i.d. normal entries scaled by 1/sqrt(m)
///   sparse_binary   0/1 entries with the given density, rows scaled to unit norm
///   row_subsample   selection of m coordinates (adjoint zero-pads)
///   identity        m = n, A = I
/// Fully deterministic from (kind, m, n, seed, params). Immutable after build;
/// apply/adjoint are pure.
class MeasurementOperator {
 public:
  static MeasurementOperator build(OperatorKind kind, Index m, Index n,
                                   std::uint64_t seed, OperatorParams params = {});

  /// Y = A X, columns independent.
  Matrix apply(const Matrix& X) const;

  /// A^T Y.
  Matrix adjoint(const Matrix& Y) const;

  /// The realized dense m x n matrix, for audit and oracle tests.
  Matrix materialize() const;

  OperatorKind kind() const { return kind_; }
  Index m() const { return m_; }
  Index n() const { return n_; }
  std::uint64_t seed() const { return seed_; }
  double density() const { return density_; }
  const std::vector<Index>& kept_rows() const { return kept_rows_; }

 private:
  MeasurementOperator() = default;

  OperatorKind kind_ = OperatorKind::identity;
  Index m_ = 0;
  Index n_ = 0;
  std::uint64_t seed_ = 0;
  double density_ = 0.5;
  std::vector<Index> kept_rows_;
  Matrix matrix_;  // realized for dense_gaussian and sparse_binary
};

inline MeasurementOperator build_operator(OperatorKind kind, Index m, Index n,
                                          std::uint64_t seed,
                                          OperatorParams params = {}) {
  return MeasurementOperator::build(kind, m, n, seed, std::move(params));
}

}  // namespace dbcs
