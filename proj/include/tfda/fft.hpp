#pragma once
// Thin wrappers over FFTW's double-precision r2c/c2r transforms.
//
// Layout note: for an nx-by-ny real grid (row-major, j slow) the half-complex
// spectrum is ny rows of nx/2+1 coefficients; entry (kx_idx, j) holds the
// coefficient of frequency (kx = kx_idx, ky = j or j-ny for j > ny/2).
// FFTW transforms are unnormalized; callers divide by nx*ny where needed.

#include <complex>
#include <mutex>
#include <vector>

#include <fftw3.h>

#include "tfda/core.hpp"

namespace tfda::detail {

// FFTW plan creation/destruction is not thread-safe; execution is.
inline std::mutex& fftw_plan_mutex() {
  static std::mutex m;
  return m;
}

struct HalfSpectrum {
  std::uint32_t nx = 0, ny = 0;
  std::vector<std::complex<double>> c;  // size ny*(nx/2+1), index j*(nx/2+1)+kx

  HalfSpectrum() = default;
  HalfSpectrum(std::uint32_t nx_, std::uint32_t ny_)
      : nx(nx_), ny(ny_), c(std::size_t(ny_) * (nx_ / 2 + 1)) {}

  std::uint32_t ncols() const { return nx / 2 + 1; }
  std::complex<double>& at(int kx_idx, int j) { return c[std::size_t(j) * ncols() + kx_idx]; }
  const std::complex<double>& at(int kx_idx, int j) const {
    return c[std::size_t(j) * ncols() + kx_idx];
  }
  // signed ky for storage row j
  int ky_of(int j) const { return j <= int(ny) / 2 ? j : j - int(ny); }
};

inline HalfSpectrum forward_r2c(const ScalarField& f) {
  HalfSpectrum out(f.nx, f.ny);
  std::vector<double> in(f.values);  // FFTW wants a mutable buffer
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(fftw_plan_mutex());
    plan = fftw_plan_dft_r2c_2d(int(f.ny), int(f.nx), in.data(),
                                reinterpret_cast<fftw_complex*>(out.c.data()), FFTW_ESTIMATE);
  }
  if (!plan) throw internal_consistency_error("forward_r2c: FFTW planning failed");
  fftw_execute(plan);
  {
    std::lock_guard<std::mutex> lock(fftw_plan_mutex());
    fftw_destroy_plan(plan);
  }
  return out;
}

// Consumes the spectrum (multi-dimensional c2r clobbers its input).
inline std::vector<double> inverse_c2r(HalfSpectrum spec) {
  std::vector<double> out(std::size_t(spec.nx) * spec.ny);
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(fftw_plan_mutex());
    plan = fftw_plan_dft_c2r_2d(int(spec.ny), int(spec.nx),
                                reinterpret_cast<fftw_complex*>(spec.c.data()), out.data(),
                                FFTW_ESTIMATE);
  }
  if (!plan) throw internal_consistency_error("inverse_c2r: FFTW planning failed");
  fftw_execute(plan);
  {
    std::lock_guard<std::mutex> lock(fftw_plan_mutex());
    fftw_destroy_plan(plan);
  }
  return out;
}

}  // namespace tfda::detail
