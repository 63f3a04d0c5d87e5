#include "dbcs/core.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <numbers>
#include <vector>

static_assert(std::endian::native == std::endian::little,
              "DBCS1 I/O assumes a little-endian host");
static_assert(std::numeric_limits<double>::is_iec559);

namespace dbcs {

namespace {

constexpr char kMagic[5] = {'D', 'B', 'C', 'S', '1'};

std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

std::uint64_t mix(std::uint64_t x) {
  return splitmix64(x);
}

}  // namespace

Rng::Rng(std::uint64_t seed) : seed_(seed), state_(mix(seed)) {}

Rng Rng::stream(std::uint64_t index) const {
  // Child seed mixes the parent seed with the stream index; distinct indices
  // give unrelated Weyl starting points.
  return Rng(mix(seed_ ^ mix(index ^ 0xA5A5A5A55A5A5A5Aull)));
}

std::uint64_t Rng::next_u64() {
  return splitmix64(state_);
}

double Rng::next_uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::next_normal() {
  if (has_cached_normal_) {
    has_cached_normal_ = false;
    return cached_normal_;
  }
  // Box-Muller on u1 in (0, 1] so the log argument never vanishes.
  double u1 = (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
  double u2 = next_uniform();
  double r = std::sqrt(-2.0 * std::log(u1));
  double angle = 2.0 * std::numbers::pi * u2;
  cached_normal_ = r * std::sin(angle);
  has_cached_normal_ = true;
  return r * std::cos(angle);
}

void mat_write(const Matrix& m, const std::string& path) {
  if (!m.allFinite()) {
    throw NonFiniteError("mat_write: refusing to write non-finite entries to " + path);
  }
  if (m.rows() <= 0 || m.cols() <= 0 ||
      m.rows() > std::numeric_limits<std::uint32_t>::max() ||
      m.cols() > std::numeric_limits<std::uint32_t>::max()) {
    throw DimensionError("mat_write: dimensions out of range for " + path);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw IoError("mat_write: cannot open " + path);
  }
  out.write(kMagic, sizeof(kMagic));
  std::uint32_t dims[2] = {static_cast<std::uint32_t>(m.rows()),
                           static_cast<std::uint32_t>(m.cols())};
  out.write(reinterpret_cast<const char*>(dims), sizeof(dims));
  // Eigen::MatrixXd is column-major, matching the on-disk layout.
  out.write(reinterpret_cast<const char*>(m.data()),
            static_cast<std::streamsize>(sizeof(double) * m.size()));
  if (!out) {
    throw IoError("mat_write: write failed for " + path);
  }
}

Matrix mat_read(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("mat_read: cannot open " + path);
  }
  char magic[5];
  if (!in.read(magic, sizeof(magic))) {
    throw TruncatedFileError("mat_read: file too short for magic in " + path);
  }
  if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw BadMagicError("mat_read: bad magic in " + path);
  }
  std::uint32_t dims[2];
  if (!in.read(reinterpret_cast<char*>(dims), sizeof(dims))) {
    throw TruncatedFileError("mat_read: file too short for dimensions in " + path);
  }
  if (dims[0] == 0 || dims[1] == 0) {
    throw DimensionError("mat_read: zero dimension in " + path);
  }
  Matrix m(static_cast<Index>(dims[0]), static_cast<Index>(dims[1]));
  std::streamsize payload = static_cast<std::streamsize>(sizeof(double) * m.size());
  if (!in.read(reinterpret_cast<char*>(m.data()), payload)) {
    throw TruncatedFileError("mat_read: truncated payload in " + path);
  }
  if (in.peek() != std::ifstream::traits_type::eof()) {
    throw TruncatedFileError("mat_read: payload length mismatch (trailing bytes) in " + path);
  }
  if (!m.allFinite()) {
    throw NonFiniteError("mat_read: non-finite entry in " + path);
  }
  return m;
}

Matrix gaussian_matrix(Index rows, Index cols, Rng& rng) {
  if (rows < 1 || cols < 1) {
    throw DimensionError("gaussian_matrix: dimensions must be positive");
  }
  Matrix m(rows, cols);
  for (Index c = 0; c < cols; ++c) {
    for (Index r = 0; r < rows; ++r) {
      m(r, c) = rng.next_normal();
    }
  }
  return m;
}

Vector normalize_columns(Matrix& m, Rng& rng) {
  if (m.size() == 0) {
    throw DimensionError("normalize_columns: empty matrix");
  }
  Vector scales(m.cols());
  for (Index c = 0; c < m.cols(); ++c) {
    double norm = m.col(c).norm();
    if (norm < 1e-10) {
      // Dead atom: re-randomize to a fresh unit direction.
      for (Index r = 0; r < m.rows(); ++r) {
        m(r, c) = rng.next_normal();
      }
      m.col(c) /= m.col(c).norm();
      scales[c] = 0.0;
    } else {
      m.col(c) /= norm;
      scales[c] = norm;
    }
  }
  return scales;
}

}  // namespace dbcs
