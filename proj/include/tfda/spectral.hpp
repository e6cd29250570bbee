#pragma once
// Differential and spectral quantities derived from the stream function:
// velocity (u,v) = (dpsi/dy, -dpsi/dx), vorticity w = -laplacian(psi),
// shell-binned energy spectrum, pointwise energy/enstrophy densities.
//
// Derivatives are spectral by default (exact for band-limited data); a
// 2nd-order centered finite-difference fallback exists for non-smooth input.
// For even grids the unmatched Nyquist coefficient is zeroed before
// differentiation so derivatives stay real.

#include <cmath>
#include <complex>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "tfda/core.hpp"
#include "tfda/fft.hpp"

namespace tfda {

enum class DerivMethod { spectral, finite_difference };

struct Spectrum {
  double dk = 1.0;
  std::vector<double> k;  // left bin edges: k[m] = m*dk, bin covers [m*dk, (m+1)*dk)
  std::vector<double> E;
};

namespace detail {

// physical wavenumbers for storage indices
inline double kx_phys(int kx_idx, double lx) { return kTwoPi * kx_idx / lx; }
inline double ky_phys(int j, int ny, double ly) {
  int ky = j <= ny / 2 ? j : j - ny;
  return kTwoPi * ky / ly;
}

inline bool is_nyquist_x(int kx_idx, int nx) { return nx % 2 == 0 && kx_idx == nx / 2; }
inline bool is_nyquist_y(int j, int ny) { return ny % 2 == 0 && j == ny / 2; }

// Velocity spectrum pair (u_hat, v_hat) from psi, in FFTW (unnormalized) scale.
inline std::pair<HalfSpectrum, HalfSpectrum> velocity_spectrum(const ScalarField& psi) {
  HalfSpectrum ph = forward_r2c(psi);
  HalfSpectrum uh(psi.nx, psi.ny), vh(psi.nx, psi.ny);
  const std::complex<double> I(0.0, 1.0);
  for (int j = 0; j < int(psi.ny); ++j) {
    for (int kx = 0; kx < int(ph.ncols()); ++kx) {
      std::complex<double> c = ph.at(kx, j);
      if (is_nyquist_x(kx, int(psi.nx)) || is_nyquist_y(j, int(psi.ny))) c = 0.0;
      uh.at(kx, j) = I * ky_phys(j, int(psi.ny), psi.ly) * c;
      vh.at(kx, j) = -I * kx_phys(kx, psi.lx) * c;
    }
  }
  return {std::move(uh), std::move(vh)};
}

}  // namespace detail

inline VectorField velocity_from_stream(const ScalarField& psi,
                                        DerivMethod method = DerivMethod::spectral) {
  require_analysis_grid(psi, "velocity_from_stream");
  VectorField vel(psi.nx, psi.ny, psi.lx, psi.ly);
  if (method == DerivMethod::finite_difference) {
    double dx = psi.lx / psi.nx, dy = psi.ly / psi.ny;
    for (int j = 0; j < int(psi.ny); ++j)
      for (int i = 0; i < int(psi.nx); ++i) {
        std::size_t n = std::size_t(j) * psi.nx + i;
        vel.u[n] = (psi.at(i, j + 1) - psi.at(i, j - 1)) / (2 * dy);
        vel.v[n] = -(psi.at(i + 1, j) - psi.at(i - 1, j)) / (2 * dx);
      }
    return vel;
  }
  auto [uh, vh] = detail::velocity_spectrum(psi);
  vel.u = detail::inverse_c2r(std::move(uh));
  vel.v = detail::inverse_c2r(std::move(vh));
  double norm = double(psi.nx) * psi.ny;
  for (double& x : vel.u) x /= norm;
  for (double& x : vel.v) x /= norm;
  return vel;
}

inline ScalarField vorticity_from_stream(const ScalarField& psi,
                                         DerivMethod method = DerivMethod::spectral) {
  require_analysis_grid(psi, "vorticity_from_stream");
  ScalarField w(psi.nx, psi.ny, psi.lx, psi.ly);
  if (method == DerivMethod::finite_difference) {
    double dx2 = psi.lx / psi.nx * (psi.lx / psi.nx), dy2 = psi.ly / psi.ny * (psi.ly / psi.ny);
    for (int j = 0; j < int(psi.ny); ++j)
      for (int i = 0; i < int(psi.nx); ++i)
        w.values[std::size_t(j) * psi.nx + i] =
            -((psi.at(i + 1, j) - 2 * psi.at(i, j) + psi.at(i - 1, j)) / dx2 +
              (psi.at(i, j + 1) - 2 * psi.at(i, j) + psi.at(i, j - 1)) / dy2);
    return w;
  }
  detail::HalfSpectrum ph = detail::forward_r2c(psi);
  for (int j = 0; j < int(psi.ny); ++j)
    for (int kx = 0; kx < int(ph.ncols()); ++kx) {
      if (detail::is_nyquist_x(kx, int(psi.nx)) || detail::is_nyquist_y(j, int(psi.ny))) {
        ph.at(kx, j) = 0.0;
        continue;
      }
      double kxp = detail::kx_phys(kx, psi.lx), kyp = detail::ky_phys(j, int(psi.ny), psi.ly);
      ph.at(kx, j) *= kxp * kxp + kyp * kyp;  // -laplacian multiplies modes by |k|^2
    }
  w.values = detail::inverse_c2r(std::move(ph));
  double norm = double(psi.nx) * psi.ny;
  for (double& x : w.values) x /= norm;
  return w;
}

/* E(k) bins 0.5*|u_hat|^2 of the velocity over wave-vector modulus shells
   [m*dk, (m+1)*dk) and divides by dk, so that sum E(k)*dk equals the mean
   kinetic energy 0.5*<|u|^2> (Parseval). */
inline Spectrum energy_spectrum(const ScalarField& psi, double dk = 1.0) {
  require_analysis_grid(psi, "energy_spectrum");
  if (!(dk > 0)) throw argument_error("energy_spectrum: dk must be positive");
  auto [uh, vh] = detail::velocity_spectrum(psi);
  double norm = double(psi.nx) * psi.ny;  // physical coefficient = raw / (nx*ny)
  double kmax_corner =
      std::hypot(detail::kx_phys(int(psi.nx) / 2, psi.lx),
                 kTwoPi * (int(psi.ny) / 2) / psi.ly);
  Spectrum s;
  s.dk = dk;
  std::size_t nbins = std::size_t(kmax_corner / dk) + 1;
  s.k.resize(nbins);
  s.E.assign(nbins, 0.0);
  for (std::size_t m = 0; m < nbins; ++m) s.k[m] = double(m) * dk;
  for (int j = 0; j < int(psi.ny); ++j) {
    for (int kx = 0; kx < int(uh.ncols()); ++kx) {
      // interior kx columns represent a conjugate pair of lattice sites
      double weight = (kx == 0 || detail::is_nyquist_x(kx, int(psi.nx))) ? 1.0 : 2.0;
      double kmod = std::hypot(detail::kx_phys(kx, psi.lx),
                               detail::ky_phys(j, int(psi.ny), psi.ly));
      std::size_t m = std::size_t(kmod / dk);
      if (m >= nbins) m = nbins - 1;
      double e = 0.5 * (std::norm(uh.at(kx, j)) + std::norm(vh.at(kx, j))) / (norm * norm);
      s.E[m] += weight * e / dk;
    }
  }
  return s;
}

inline ScalarField pointwise_enstrophy(const ScalarField& psi,
                                       DerivMethod method = DerivMethod::spectral) {
  ScalarField w = vorticity_from_stream(psi, method);
  for (double& v : w.values) v *= v;
  return w;
}

inline ScalarField pointwise_energy(const ScalarField& psi,
                                    DerivMethod method = DerivMethod::spectral) {
  VectorField vel = velocity_from_stream(psi, method);
  ScalarField e(psi.nx, psi.ny, psi.lx, psi.ly);
  for (std::size_t n = 0; n < e.values.size(); ++n)
    e.values[n] = vel.u[n] * vel.u[n] + vel.v[n] * vel.v[n];
  return e;
}

inline void save_spectrum_csv(const Spectrum& s, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw io_error("cannot open '" + path + "' for writing");
  out << "k,E\n";
  char buf[80];
  for (std::size_t m = 0; m < s.k.size(); ++m) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", s.k[m], s.E[m]);
    out << buf;
  }
  if (!out) throw io_error("write failed for '" + path + "'");
}

}  // namespace tfda
