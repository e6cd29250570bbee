#pragma once
// Field ingest/emit (TFD1 binary and CSV), coarse-graining, normalization,
// and deterministic synthetic-field generation.
//
// TFD1 layout: bytes 0-3 ASCII "TFD1"; 4-7 u32le nx; 8-11 u32le ny;
// 12-19 / 20-27 f64le lx, ly; then nx*ny f64le values, row-major, row j=0
// first.  CSV: ny rows of nx comma-separated decimals, row j=0 first,
// lx = ly = 2*pi assumed.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "tfda/core.hpp"
#include "tfda/fft.hpp"

namespace tfda {

enum class FieldFormat { binary, csv };
enum class CoarseMethod { mean, subsample };

inline FieldFormat format_from_path(const std::string& path) {
  auto dot = path.find_last_of('.');
  std::string ext = dot == std::string::npos ? "" : path.substr(dot);
  return ext == ".csv" ? FieldFormat::csv : FieldFormat::binary;
}

namespace detail {

inline std::uint32_t read_u32le(const unsigned char* p) {
  return std::uint32_t(p[0]) | std::uint32_t(p[1]) << 8 | std::uint32_t(p[2]) << 16 |
         std::uint32_t(p[3]) << 24;
}

inline double read_f64le(const unsigned char* p) {
  std::uint64_t u = 0;
  for (int b = 7; b >= 0; --b) u = u << 8 | p[b];
  return std::bit_cast<double>(u);
}

inline void write_u32le(std::string& out, std::uint32_t v) {
  for (int b = 0; b < 4; ++b) out.push_back(char(v >> (8 * b) & 0xff));
}

inline void write_f64le(std::string& out, double d) {
  std::uint64_t u = std::bit_cast<std::uint64_t>(d);
  for (int b = 0; b < 8; ++b) out.push_back(char(u >> (8 * b) & 0xff));
}

inline ScalarField load_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open '" + path + "' for reading");
  std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const auto* p = reinterpret_cast<const unsigned char*>(data.data());
  if (data.size() < 4 || std::memcmp(p, "TFD1", 4) != 0)
    throw io_error("'" + path + "': bad magic at byte 0 (want TFD1)");
  if (data.size() < 28) throw io_error("'" + path + "': truncated header at byte " +
                                       std::to_string(data.size()));
  ScalarField f;
  f.nx = read_u32le(p + 4);
  f.ny = read_u32le(p + 8);
  f.lx = read_f64le(p + 12);
  f.ly = read_f64le(p + 20);
  if (f.nx == 0 || f.ny == 0 || std::uint64_t(f.nx) * f.ny > (std::uint64_t(1) << 28))
    throw io_error("'" + path + "': dimension overflow at byte 4 (" + std::to_string(f.nx) +
                   "x" + std::to_string(f.ny) + ")");
  if (!(std::isfinite(f.lx) && std::isfinite(f.ly) && f.lx > 0 && f.ly > 0))
    throw io_error("'" + path + "': invalid domain size at byte 12");
  std::size_t need = 28 + std::size_t(f.nx) * f.ny * 8;
  if (data.size() < need)
    throw io_error("'" + path + "': truncated at byte " + std::to_string(data.size()) +
                   " (need " + std::to_string(need) + ")");
  f.values.resize(std::size_t(f.nx) * f.ny);
  for (std::size_t n = 0; n < f.values.size(); ++n) {
    f.values[n] = read_f64le(p + 28 + n * 8);
    if (!std::isfinite(f.values[n]))
      throw io_error("'" + path + "': non-finite value at byte " + std::to_string(28 + n * 8));
  }
  return f;
}

inline ScalarField load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open '" + path + "' for reading");
  std::vector<std::vector<double>> rows;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() && in.peek() == std::char_traits<char>::eof()) break;
    std::vector<double> row;
    std::size_t pos = 0;
    while (pos <= line.size()) {
      std::size_t comma = line.find(',', pos);
      std::string cell = line.substr(pos, comma == std::string::npos ? std::string::npos
                                                                     : comma - pos);
      char* end = nullptr;
      double v = std::strtod(cell.c_str(), &end);
      if (end == cell.c_str() || !std::isfinite(v))
        throw io_error("'" + path + "': bad or non-finite value in row " +
                       std::to_string(lineno));
      row.push_back(v);
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw io_error("'" + path + "': non-rectangular CSV at row " + std::to_string(lineno));
    rows.push_back(std::move(row));
  }
  if (rows.empty() || rows.front().empty()) throw io_error("'" + path + "': empty CSV");
  ScalarField f(std::uint32_t(rows.front().size()), std::uint32_t(rows.size()));
  for (std::uint32_t j = 0; j < f.ny; ++j)
    for (std::uint32_t i = 0; i < f.nx; ++i) f.values[std::size_t(j) * f.nx + i] = rows[j][i];
  return f;
}

}  // namespace detail

inline ScalarField load_field(const std::string& path, FieldFormat format) {
  return format == FieldFormat::binary ? detail::load_binary(path) : detail::load_csv(path);
}

inline ScalarField load_field(const std::string& path) {
  return load_field(path, format_from_path(path));
}

inline void save_field(const ScalarField& f, const std::string& path, FieldFormat format) {
  if (f.values.size() != f.size())
    throw internal_consistency_error("save_field: value buffer size mismatch");
  std::string payload;
  if (format == FieldFormat::binary) {
    payload.reserve(28 + f.size() * 8);
    payload.append("TFD1", 4);
    detail::write_u32le(payload, f.nx);
    detail::write_u32le(payload, f.ny);
    detail::write_f64le(payload, f.lx);
    detail::write_f64le(payload, f.ly);
    for (double v : f.values) detail::write_f64le(payload, v);
  } else {
    char buf[40];
    for (std::uint32_t j = 0; j < f.ny; ++j) {
      for (std::uint32_t i = 0; i < f.nx; ++i) {
        std::snprintf(buf, sizeof buf, "%.17g", f.values[std::size_t(j) * f.nx + i]);
        payload += buf;
        payload.push_back(i + 1 == f.nx ? '\n' : ',');
      }
    }
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw io_error("cannot open '" + path + "' for writing");
  out.write(payload.data(), std::streamsize(payload.size()));
  if (!out) throw io_error("write failed for '" + path + "'");
}

inline void save_field(const ScalarField& f, const std::string& path) {
  save_field(f, path, format_from_path(path));
}

inline ScalarField coarse_grain(const ScalarField& f, int factor,
                                CoarseMethod method = CoarseMethod::mean) {
  if (factor < 1) throw argument_error("coarse_grain: factor must be >= 1");
  if (factor == 1) return f;
  if (f.nx % factor != 0 || f.ny % factor != 0)
    throw argument_error("coarse_grain: factor " + std::to_string(factor) +
                         " does not divide " + std::to_string(f.nx) + "x" +
                         std::to_string(f.ny));
  ScalarField out(f.nx / std::uint32_t(factor), f.ny / std::uint32_t(factor), f.lx, f.ly);
  for (std::uint32_t J = 0; J < out.ny; ++J) {
    for (std::uint32_t I = 0; I < out.nx; ++I) {
      if (method == CoarseMethod::subsample) {
        out.values[std::size_t(J) * out.nx + I] = f.at(int(I) * factor, int(J) * factor);
      } else {
        double sum = 0.0;
        for (int dj = 0; dj < factor; ++dj)
          for (int di = 0; di < factor; ++di)
            sum += f.at(int(I) * factor + di, int(J) * factor + dj);
        out.values[std::size_t(J) * out.nx + I] = sum / (double(factor) * factor);
      }
    }
  }
  return out;
}

// Divides by (max - min); no shift.  Constant input is degenerate.
inline ScalarField normalize(const ScalarField& f) {
  auto [lo, hi] = std::minmax_element(f.values.begin(), f.values.end());
  double extent = *hi - *lo;
  if (!(extent > 0.0)) throw degenerate_field_error("normalize: constant field");
  ScalarField out = f;
  for (double& v : out.values) v /= extent;
  return out;
}

/* Random superposition of Fourier modes: psi = sum a_k cos(k.x + phi_k) over
   the half lattice (kx > 0, or kx = 0 and ky > 0) restricted to the shell
   kmin <= |k| <= kmax.  Amplitudes a_k = |k|^((g-3)/2) give an energy
   spectrum E(k) proportional to k^g: per-mode kinetic energy is |k|^2 a_k^2/4
   and the shell population grows linearly with k.  Phases come from a seeded
   mt19937_64 drawn in a fixed lattice order, so the result is a pure function
   of its arguments. */
inline ScalarField synth_field(std::uint32_t nx, std::uint32_t ny, double spectrum_exponent,
                               int kmin, int kmax, std::uint64_t seed) {
  if (nx < 8 || ny < 8) throw argument_error("synth_field: grid must be at least 8x8");
  if (!(1 <= kmin && kmin <= kmax && kmax < int(std::min(nx, ny)) / 2))
    throw argument_error("synth_field: need 1 <= kmin <= kmax < min(nx,ny)/2");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> phase(0.0, kTwoPi);
  detail::HalfSpectrum spec(nx, ny);
  bool any = false;
  for (int kx = 0; kx <= kmax; ++kx) {
    for (int ky = (kx == 0 ? 1 : -kmax); ky <= kmax; ++ky) {
      double k2 = double(kx) * kx + double(ky) * ky;
      double k = std::sqrt(k2);
      if (k < double(kmin) - 1e-12 || k > double(kmax) + 1e-12) continue;
      double phi = phase(rng);
      double amp = std::pow(k, (spectrum_exponent - 3.0) / 2.0);
      std::complex<double> half = 0.5 * amp * std::complex<double>(std::cos(phi), std::sin(phi));
      if (kx == 0) {
        // kx = 0 column stores both (0, ky) and its conjugate partner (0, ny-ky)
        spec.at(0, ky) += half;
        spec.at(0, int(ny) - ky) += std::conj(half);
      } else {
        spec.at(kx, wrap(ky, int(ny))) += half;
      }
      any = true;
    }
  }
  if (!any) throw argument_error("synth_field: empty wavenumber shell");
  ScalarField f(nx, ny);
  f.values = detail::inverse_c2r(std::move(spec));  // c2r sums modes directly; no rescale
  return f;
}

}  // namespace tfda
