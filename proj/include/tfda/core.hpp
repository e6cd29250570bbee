#pragma once
// Shared grid types and the error taxonomy used across the library.

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace tfda {

inline constexpr double kTwoPi = 6.28318530717958647692528676655900577;

/* The CLI maps these onto its exit-code contract:
   io_error -> 1, cot_parse_error -> 2, degenerate_field_error -> 3,
   anything else -> 1 (generic failure). */
struct io_error : std::runtime_error { using std::runtime_error::runtime_error; };
struct argument_error : std::runtime_error { using std::runtime_error::runtime_error; };
struct degenerate_field_error : std::runtime_error { using std::runtime_error::runtime_error; };
struct topology_error : std::runtime_error { using std::runtime_error::runtime_error; };
struct numerical_tracing_error : std::runtime_error { using std::runtime_error::runtime_error; };
struct internal_consistency_error : std::runtime_error { using std::runtime_error::runtime_error; };
struct insufficient_data_error : std::runtime_error { using std::runtime_error::runtime_error; };

// COT string syntax/grammar violation; token_index is 0-based, -1 if unknown.
struct cot_parse_error : std::runtime_error {
  int token_index;
  cot_parse_error(const std::string& msg, int tok = -1)
      : std::runtime_error(msg), token_index(tok) {}
};

inline int wrap(int a, int n) {
  int r = a % n;
  return r < 0 ? r + n : r;
}

/* Doubly periodic scalar field on a regular grid.
   values is row-major: (i, j) -> j*nx + i; pixel (i,j) samples H at
   (i*lx/nx, j*ly/ny), origin bottom-left, y increasing upward.  Periodicity is
   implicit in the index arithmetic; no duplicated boundary row/column. */
struct ScalarField {
  std::uint32_t nx = 0, ny = 0;
  double lx = kTwoPi, ly = kTwoPi;
  std::vector<double> values;

  ScalarField() = default;
  ScalarField(std::uint32_t nx_, std::uint32_t ny_, double lx_ = kTwoPi, double ly_ = kTwoPi)
      : nx(nx_), ny(ny_), lx(lx_), ly(ly_), values(std::size_t(nx_) * ny_, 0.0) {}

  std::size_t size() const { return std::size_t(nx) * ny; }
  std::size_t index(int i, int j) const {
    return std::size_t(wrap(j, int(ny))) * nx + std::size_t(wrap(i, int(nx)));
  }
  double& at(int i, int j) { return values[index(i, j)]; }
  double at(int i, int j) const { return values[index(i, j)]; }
  double x_of(int i) const { return i * lx / nx; }
  double y_of(int j) const { return j * ly / ny; }
};

// Velocity samples on the same grid layout as the originating stream function.
struct VectorField {
  std::uint32_t nx = 0, ny = 0;
  double lx = kTwoPi, ly = kTwoPi;
  std::vector<double> u, v;

  VectorField() = default;
  VectorField(std::uint32_t nx_, std::uint32_t ny_, double lx_ = kTwoPi, double ly_ = kTwoPi)
      : nx(nx_), ny(ny_), lx(lx_), ly(ly_),
        u(std::size_t(nx_) * ny_, 0.0), v(std::size_t(nx_) * ny_, 0.0) {}

  std::size_t size() const { return std::size_t(nx) * ny; }
};

// Grid-size floor required by the analysis stages (Morse/Reeb/spectral); pure
// container ops (load/save/coarsen) accept anything non-empty.
inline void require_analysis_grid(const ScalarField& f, const char* who) {
  if (f.nx < 8 || f.ny < 8)
    throw argument_error(std::string(who) + ": grid must be at least 8x8, got " +
                         std::to_string(f.nx) + "x" + std::to_string(f.ny));
  if (f.values.size() != f.size())
    throw internal_consistency_error(std::string(who) + ": value buffer size mismatch");
}

inline bool all_finite(const std::vector<double>& v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

}  // namespace tfda
