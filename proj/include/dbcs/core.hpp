#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace dbcs {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IoError : Error {
  using Error::Error;
};
struct BadMagicError : IoError {
  using IoError::IoError;
};
struct TruncatedFileError : IoError {
  using IoError::IoError;
};
struct NonFiniteError : Error {
  using Error::Error;
};
struct DimensionError : Error {
  using Error::Error;
};
struct ConfigError : Error {
  using Error::Error;
};

/// Deterministic counter-based generator: splitmix64 output function over an
/// incrementing Weyl sequence. The same seed (and stream index) yields the
/// same sequence on every platform. Normal deviates come from the Box-Muller
/// transform applied to 53-bit uniforms; the second deviate of each pair is
/// cached.
///
/// An Rng is single-owner. Code that needs independent randomness derives a
/// fresh generator with stream(); streams never overlap for distinct indices.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  /// Independent generator derived from the original seed and a stream index.
  Rng stream(std::uint64_t index) const;

  std::uint64_t next_u64();

  /// Uniform in [0, 1), 53 random bits.
  double next_uniform();

  /// Standard normal deviate.
  double next_normal();

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_ = 0;
  std::uint64_t state_ = 0;
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
};

/// Writes a matrix in the DBCS1 format: the 5 magic bytes "DBCS1", rows and
/// cols as 32-bit little-endian unsigned integers, then rows*cols IEEE-754
/// doubles, little-endian, column-major. Refuses non-finite entries.
void mat_write(const Matrix& m, const std::string& path);

/// Inverse of mat_write. Validates magic, dimensions, payload length and
/// finiteness, each with a distinct error type.
Matrix mat_read(const std::string& path);

/// rows x cols matrix of i.i.d. standard normal entries drawn from rng.
Matrix gaussian_matrix(Index rows, Index cols, Rng& rng);

/// Scales every column of m to unit Euclidean norm in place and returns the
/// original norms. A column with norm below 1e-10 is a dead atom: it is
/// replaced by a fresh random unit vector from rng and its scale reported
/// as 0.
Vector normalize_columns(Matrix& m, Rng& rng);

}  // namespace dbcs
