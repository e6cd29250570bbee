#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "test_helpers.hpp"
#include "tfda/spectral.hpp"
#include "tfda/vortex.hpp"

using namespace tfda;
using namespace tfda_test;

TEST_SUITE_BEGIN("vortex");

namespace {

std::vector<TerminalVortex> vortices_at(const ScalarField& f, double eps0,
                                        const TopologyAnalysis& ta) {
  LabeledCot lc = analyze_cot(ta, f);
  CotTree ft = filter_cot(lc.tree, eps0);
  return extract_terminal_vortices(ft, ta.seg, f);
}

// fraction of the torus where cos(y) + 0.3 cos(x) < c, by 1-D quadrature in x
double shear_sublevel_fraction(double c) {
  const int n = 1 << 16;
  double acc = 0.0;
  for (int k = 0; k < n; ++k) {
    double x = (k + 0.5) * kTwoPi / n;
    double t = c - 0.3 * std::cos(x);  // need cos(y) < t
    double len = t <= -1.0 ? 0.0 : (t >= 1.0 ? kTwoPi : kTwoPi - 2.0 * std::acos(t));
    acc += len;
  }
  return acc / (kTwoPi * n);
}

// torus averages of g*1[psi<c] for g = psi^2 and g = |grad psi|^2
void shear_sublevel_integrals(double c, double& enst, double& ener) {
  const int n = 2048;
  double se = 0.0, sk = 0.0;
  for (int j = 0; j < n; ++j) {
    double y = (j + 0.5) * kTwoPi / n;
    for (int i = 0; i < n; ++i) {
      double x = (i + 0.5) * kTwoPi / n;
      double psi = std::cos(y) + 0.3 * std::cos(x);
      if (psi >= c) continue;
      se += psi * psi;  // vorticity -lap(psi) equals psi for this field
      double u = -std::sin(y), v = 0.3 * std::sin(x);
      sk += u * u + v * v;
    }
  }
  enst = se / (double(n) * n);
  ener = sk / (double(n) * n);
}

}  // namespace

TEST_CASE("plain shear field yields one vortex of each orientation") {
  ScalarField f = cos_field();
  TopologyAnalysis ta = analyze_topology(f);
  std::vector<TerminalVortex> vs = vortices_at(f, 0.1, ta);
  REQUIRE(vs.size() == 2);
  int plus = 0, minus = 0;
  for (auto& v : vs) (v.orientation == VortexOrientation::plus ? plus : minus)++;
  CHECK(plus == 1);
  CHECK(minus == 1);

  double expect = shear_sublevel_fraction(-0.7);  // = superlevel of +0.7 by symmetry
  for (auto& v : vs) {
    CHECK(v.area >= 0.2);
    CHECK(v.area <= 0.5);
    CHECK(std::fabs(v.area - expect) / expect < 0.02);
    CHECK(std::fabs(std::fabs(v.saddle_value) - 0.7) < 1e-9);
    CHECK(std::fabs(std::fabs(v.leaf_value) - 1.3) < 1e-9);
  }
}

TEST_CASE("vortex integrals match analytic quadrature on the shear field") {
  ScalarField f = cos_field();
  TopologyAnalysis ta = analyze_topology(f);
  std::vector<TerminalVortex> vs = vortices_at(f, 0.1, ta);
  REQUIRE(vs.size() == 2);
  ScalarField omega = vorticity_from_stream(f);
  VectorField vel = velocity_from_stream(f);

  double enst_ref, ener_ref;
  shear_sublevel_integrals(-0.7, enst_ref, ener_ref);
  for (auto& raw : vs) {
    if (raw.orientation != VortexOrientation::minus) continue;
    TerminalVortex v = vortex_quantities(raw, omega, vel);
    CHECK(std::fabs(v.enstrophy - enst_ref) / enst_ref < 0.02);
    CHECK(std::fabs(v.energy - ener_ref) / ener_ref < 0.02);
  }
}

TEST_CASE("two-bump field keeps only the bump cores at the default threshold") {
  ScalarField f = two_bump_field();
  TopologyAnalysis ta = analyze_topology(f);
  std::vector<TerminalVortex> vs = vortices_at(f, 0.1, ta);
  REQUIRE(vs.size() == 2);
  for (auto& v : vs) CHECK(v.orientation == VortexOrientation::plus);
}

TEST_CASE("a threshold above every weight leaves no vortices") {
  ScalarField f = cos_field(64);
  TopologyAnalysis ta = analyze_topology(f);
  CHECK(vortices_at(f, 5.0, ta).empty());
}

TEST_CASE("per-vortex integrals are plain pixel sums") {
  ScalarField omega(64, 64);
  std::fill(omega.values.begin(), omega.values.end(), 2.0);
  VectorField vel(64, 64);

  TerminalVortex whole;
  whole.pixels.resize(omega.size());
  std::iota(whole.pixels.begin(), whole.pixels.end(), 0u);
  whole.area = 1.0;
  TerminalVortex done = vortex_quantities(whole, omega, vel);
  CHECK(std::fabs(done.enstrophy - 4.0) < 1e-12);  // 4 * area
  CHECK(done.energy == 0.0);

  TerminalVortex half = whole;
  half.pixels.resize(omega.size() / 2);
  half.area = 0.5;
  CHECK(std::fabs(vortex_quantities(half, omega, vel).enstrophy - 2.0) < 1e-12);

  VectorField small(32, 32);
  CHECK_THROWS_AS(vortex_quantities(whole, omega, small), argument_error);
  TerminalVortex rogue = whole;
  rogue.pixels = {std::uint32_t(omega.size())};
  CHECK_THROWS_AS(vortex_quantities(rogue, omega, vel), argument_error);
}

TEST_CASE("vortex families shrink in count and grow in reach as the threshold rises") {
  for (const ScalarField& f : {cos_field(), two_bump_field(), decorated_field()}) {
    TopologyAnalysis ta = analyze_topology(f);
    std::size_t prev_count = std::size_t(-1);
    std::map<double, std::vector<std::uint32_t>> prev_pixels;
    for (double eps : {0.02, 0.05, 0.1, 0.2, 0.4}) {
      std::vector<TerminalVortex> vs = vortices_at(f, eps, ta);
      CHECK(vs.size() <= prev_count);
      prev_count = vs.size();

      // disjointness and total area
      std::vector<std::uint32_t> all;
      double total_area = 0.0;
      for (auto& v : vs) {
        all.insert(all.end(), v.pixels.begin(), v.pixels.end());
        total_area += v.area;
        CHECK(std::fabs(v.leaf_value - v.saddle_value) > eps);

        double mean = 0.0;
        for (std::uint32_t p : v.pixels) mean += f.values[p];
        REQUIRE(!v.pixels.empty());
        mean /= double(v.pixels.size());
        if (v.orientation == VortexOrientation::plus)
          CHECK(mean > v.saddle_value);
        else
          CHECK(mean < v.saddle_value);
      }
      std::sort(all.begin(), all.end());
      CHECK(std::adjacent_find(all.begin(), all.end()) == all.end());
      CHECK(total_area <= 1.0 + 1e-12);

      // survivors only ever gain pixels
      std::map<double, std::vector<std::uint32_t>> cur;
      for (auto& v : vs) cur[v.leaf_value] = v.pixels;
      for (auto& [leaf, pixels] : cur) {
        auto it = prev_pixels.find(leaf);
        if (it == prev_pixels.end()) continue;
        CHECK(std::includes(pixels.begin(), pixels.end(), it->second.begin(), it->second.end()));
      }
      prev_pixels = std::move(cur);
    }
  }
}

TEST_CASE("vortex table serializes with the fixed header") {
  ScalarField f = cos_field(64);
  TopologyAnalysis ta = analyze_topology(f);
  std::vector<TerminalVortex> vs = vortices_at(f, 0.1, ta);
  ScalarField omega = vorticity_from_stream(f);
  VectorField vel = velocity_from_stream(f);
  for (auto& v : vs) v = vortex_quantities(v, omega, vel);

  std::ostringstream os;
  write_vortices_csv(vs, os);
  std::istringstream is(os.str());
  std::string line;
  REQUIRE(std::getline(is, line));
  CHECK(line == "id,orientation,area,enstrophy,energy,leaf_value,saddle_value");
  int rows = 0;
  while (std::getline(is, line)) {
    ++rows;
    CHECK(std::count(line.begin(), line.end(), ',') == 6);
    CHECK((line.find("plus") != std::string::npos || line.find("minus") != std::string::npos));
  }
  CHECK(rows == 2);

  CHECK_THROWS_AS(save_vortices_csv(vs, "/nonexistent-dir/x.csv"), io_error);
}

TEST_SUITE_END();
