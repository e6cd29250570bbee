#pragma once
// Terminal vortices: the surviving σ leaves of a filtered COT together with
// the pixel regions folded into their terminal edges, plus per-vortex area,
// enstrophy, and energy integrals on the analysis grid.

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "tfda/core.hpp"
#include "tfda/cot.hpp"
#include "tfda/reeb.hpp"

namespace tfda {

enum class VortexOrientation { plus, minus };

inline const char* orientation_name(VortexOrientation o) {
  return o == VortexOrientation::plus ? "plus" : "minus";
}

struct TerminalVortex {
  VortexOrientation orientation = VortexOrientation::plus;
  std::vector<std::uint32_t> pixels;  // sorted linear indices, j*nx + i
  double area = 0.0;                  // |pixels| / (nx*ny)
  double enstrophy = 0.0;
  double energy = 0.0;
  double leaf_value = 0.0;
  double saddle_value = 0.0;
};

namespace detail {

inline void gather_vortices(const CotNode& n, const CotNode* parent, const Segmentation& seg,
                            const ScalarField& f, std::vector<TerminalVortex>& out) {
  if ((n.symbol == CotSymbol::sigma_p || n.symbol == CotSymbol::sigma_m) && n.children.empty()) {
    if (parent == nullptr)
      throw internal_consistency_error("terminal leaf without a parent saddle");
    TerminalVortex v;
    v.orientation =
        n.symbol == CotSymbol::sigma_p ? VortexOrientation::plus : VortexOrientation::minus;
    v.leaf_value = n.value;
    v.saddle_value = parent->value;
    std::vector<int> regions = n.absorbed_regions;
    regions.push_back(n.region);
    for (int r : regions) {
      if (r < 0 || r >= int(seg.regions.size()))
        throw internal_consistency_error("terminal edge references an unknown region");
      const std::vector<std::uint32_t>& px = seg.regions[std::size_t(r)].pixels;
      v.pixels.insert(v.pixels.end(), px.begin(), px.end());
    }
    std::sort(v.pixels.begin(), v.pixels.end());
    v.pixels.erase(std::unique(v.pixels.begin(), v.pixels.end()), v.pixels.end());
    v.area = double(v.pixels.size()) / double(f.size());
    out.push_back(std::move(v));
  }
  for (const CotNode& c : n.children) gather_vortices(c, &n, seg, f, out);
}

}  // namespace detail

/* One vortex per surviving σ leaf, in tree preorder.  The pixel set unions
   the leaf's own region with every region absorbed into the terminal edge
   during filtering.  Quantities other than area are left zero; see
   vortex_quantities. */
inline std::vector<TerminalVortex> extract_terminal_vortices(const CotTree& cot,
                                                             const Segmentation& seg,
                                                             const ScalarField& f) {
  std::vector<TerminalVortex> out;
  detail::gather_vortices(cot.root, nullptr, seg, f, out);
  return out;
}

/* Fills enstrophy and energy by summing the squared vorticity and squared
   speed over the vortex pixels, each divided by the total grid point count. */
inline TerminalVortex vortex_quantities(const TerminalVortex& v, const ScalarField& omega,
                                        const VectorField& vel) {
  if (omega.nx != vel.nx || omega.ny != vel.ny)
    throw argument_error("vortex_quantities: vorticity and velocity grids differ");
  TerminalVortex out = v;
  out.enstrophy = 0.0;
  out.energy = 0.0;
  const double denom = double(omega.size());
  for (std::uint32_t p : v.pixels) {
    if (p >= omega.size())
      throw argument_error("vortex_quantities: pixel outside the field grid");
    out.enstrophy += omega.values[p] * omega.values[p];
    out.energy += vel.u[p] * vel.u[p] + vel.v[p] * vel.v[p];
  }
  out.enstrophy /= denom;
  out.energy /= denom;
  return out;
}

inline void write_vortices_csv(const std::vector<TerminalVortex>& vs, std::ostream& out) {
  out << "id,orientation,area,enstrophy,energy,leaf_value,saddle_value\n";
  char buf[160];
  for (std::size_t k = 0; k < vs.size(); ++k) {
    const TerminalVortex& v = vs[k];
    std::snprintf(buf, sizeof buf, "%zu,%s,%.17g,%.17g,%.17g,%.17g,%.17g\n", k,
                  orientation_name(v.orientation), v.area, v.enstrophy, v.energy, v.leaf_value,
                  v.saddle_value);
    out << buf;
  }
}

inline void save_vortices_csv(const std::vector<TerminalVortex>& vs, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw io_error("cannot open '" + path + "' for writing");
  write_vortices_csv(vs, out);
  if (!out) throw io_error("write failed for '" + path + "'");
}

}  // namespace tfda
