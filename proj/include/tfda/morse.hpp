#pragma once
// Piecewise-linear Morse analysis on the periodic grid.
//
// The grid is triangulated with the same diagonal in every cell, (i,j) to
// (i+1,j+1), giving each vertex the 6-neighbor link E, NE, N, W, SW, S.
// Value ties are broken by lexicographic (value, linear index) comparison, so
// every vertex classifies deterministically: the number of connected runs of
// "lower" neighbors around the link is 0 for a minimum, 2 for a simple
// saddle, >= 3 for a multi-saddle; the whole link lower means a maximum.

#include <algorithm>
#include <array>
#include <string>
#include <vector>

#include <json.hpp>

#include "tfda/core.hpp"

namespace tfda {

enum class CritKind { minimum, maximum, saddle };

inline const char* to_string(CritKind k) {
  switch (k) {
    case CritKind::minimum: return "minimum";
    case CritKind::maximum: return "maximum";
    default: return "saddle";
  }
}

struct CriticalPoint {
  CritKind kind;
  int i, j;
  double value;
  int lower_link_components;
};

struct StabilityReport {
  int n_min = 0, n_max = 0, n_saddle = 0;
  std::vector<std::array<int, 2>> multi_saddles;
  bool stable = false;
  std::vector<std::string> reasons;
};

namespace detail {

// cyclic 6-neighbor link of the fixed-diagonal triangulation
inline constexpr std::array<std::array<int, 2>, 6> kLink = {
    {{1, 0}, {1, 1}, {0, 1}, {-1, 0}, {-1, -1}, {0, -1}}};

// symbolic perturbation: strict total order on vertices
struct VertexOrder {
  const ScalarField& f;
  bool below(std::size_t a, std::size_t b) const {
    double va = f.values[a], vb = f.values[b];
    return va < vb || (va == vb && a < b);
  }
};

}  // namespace detail

inline std::vector<CriticalPoint> detect_critical_points(const ScalarField& f) {
  require_analysis_grid(f, "detect_critical_points");
  if (!all_finite(f.values))
    throw argument_error("detect_critical_points: non-finite values in field");
  bool constant = true;
  for (double v : f.values)
    if (v != f.values[0]) {
      constant = false;
      break;
    }
  if (constant) throw degenerate_field_error("detect_critical_points: constant field");

  detail::VertexOrder ord{f};
  std::vector<CriticalPoint> out;
  const int nx = int(f.nx), ny = int(f.ny);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      std::size_t self = f.index(i, j);
      std::array<bool, 6> lower;
      int n_lower = 0;
      for (int d = 0; d < 6; ++d) {
        lower[d] = ord.below(f.index(i + detail::kLink[d][0], j + detail::kLink[d][1]), self);
        n_lower += lower[d];
      }
      if (n_lower == 6) {
        out.push_back({CritKind::maximum, i, j, f.values[self], 1});
        continue;
      }
      int components = 0;  // runs of consecutive lower neighbors around the cycle
      for (int d = 0; d < 6; ++d)
        if (lower[d] && !lower[(d + 5) % 6]) ++components;
      if (components == 0)
        out.push_back({CritKind::minimum, i, j, f.values[self], 0});
      else if (components >= 2)
        out.push_back({CritKind::saddle, i, j, f.values[self], components});
    }
  }
  return out;
}

/* Structural-stability proxy checks: no multi-saddles, center/saddle count
   balance (Euler characteristic 0), and pairwise distinct critical values.
   Value distinctness is checked across *all* critical points with exact
   comparison (ties can only survive symbolic perturbation as genuine exact
   duplicates, which signal a non-generic field such as a single cosine mode
   or a product of sines). */
inline StabilityReport validate_stability(const std::vector<CriticalPoint>& points) {
  StabilityReport r;
  for (const CriticalPoint& p : points) {
    switch (p.kind) {
      case CritKind::minimum: ++r.n_min; break;
      case CritKind::maximum: ++r.n_max; break;
      case CritKind::saddle:
        ++r.n_saddle;
        if (p.lower_link_components >= 3) r.multi_saddles.push_back({p.i, p.j});
        break;
    }
  }
  if (points.empty()) r.reasons.push_back("no critical points");
  if (!r.multi_saddles.empty())
    r.reasons.push_back(std::to_string(r.multi_saddles.size()) + " multi-saddle(s)");
  if (r.n_min + r.n_max != r.n_saddle)
    r.reasons.push_back("center/saddle count mismatch: " + std::to_string(r.n_min) + "+" +
                        std::to_string(r.n_max) + " centers vs " + std::to_string(r.n_saddle) +
                        " saddles");
  std::vector<double> vals;
  vals.reserve(points.size());
  for (const CriticalPoint& p : points) vals.push_back(p.value);
  std::sort(vals.begin(), vals.end());
  for (std::size_t n = 1; n < vals.size(); ++n)
    if (vals[n] == vals[n - 1]) {
      r.reasons.push_back("repeated critical value " + std::to_string(vals[n]));
      break;
    }
  r.stable = r.reasons.empty();
  return r;
}

inline nlohmann::json stability_to_json(const StabilityReport& r) {
  nlohmann::json j;
  j["n_min"] = r.n_min;
  j["n_max"] = r.n_max;
  j["n_saddle"] = r.n_saddle;
  j["multi_saddles"] = r.multi_saddles;
  j["verdict"] = r.stable ? "stable" : "degenerate";
  j["reasons"] = r.reasons;
  return j;
}

}  // namespace tfda
