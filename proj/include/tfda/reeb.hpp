#pragma once
// Separatrix tracing, region segmentation, and Reeb graph construction for a
// doubly periodic stream function.
//
// Geometry: the fixed-diagonal triangulation from the critical-point stage.
// Level curves of the linear interpolant are traced combinatorially as
// (triangle, entry edge) -> exit edge marches; a symbolic level key
// (value, vertex index) keeps every decision exact, so curves never pass
// through grid vertices except at the saddle that owns them.
//
// Segmentation: the complement of the union of all separatrix loops is a
// disjoint set of open annuli.  Inside one triangle all separatrix chords are
// parallel segments (level sets of one linear function), so they slice the
// triangle into value-ordered slabs; a union-find over vertices and
// subdivided edge intervals, merged slab-by-slab, recovers the annuli without
// any floating-point region growing.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include <json.hpp>

#include "tfda/core.hpp"
#include "tfda/morse.hpp"

namespace tfda {

struct SeparatrixLoop {
  std::vector<int> edge_ids;  // canonical ids of crossed edges, in march order
  std::vector<double> ts;     // crossing parameter along each edge
  std::vector<std::array<double, 2>> points;  // unwrapped polyline, saddle to saddle
  int winding_x = 0, winding_y = 0;
};

// Both self-connected loops of one saddle.
struct Separatrices {
  int i = 0, j = 0;
  double value = 0.0;
  std::array<SeparatrixLoop, 2> loops;
};

struct Region {
  int id = 0;
  double lo = 0.0, hi = 0.0;  // value range; ends at the bounding node values
  int lower_node = -1, upper_node = -1;  // critical-point indices
  bool essential = false;
  int winding_x = 0, winding_y = 0;  // core-loop homology class, sign-normalized
  std::vector<std::array<int, 2>> lower_loops, upper_loops;  // (saddle cp, loop 0/1)
  std::vector<std::uint32_t> pixels;  // member vertex indices, ascending
};

struct Segmentation {
  std::vector<Region> regions;
  std::vector<int> region_of_vertex;  // -1 on saddle vertices
};

namespace detail {

// Symbolic level: compares below any vertex of equal value when idx == -1,
// and exactly at the owning saddle when idx is its linear index.
struct LevelKey {
  double v = 0.0;
  long long idx = -1;
  friend bool operator<(const LevelKey& a, const LevelKey& b) {
    return a.v < b.v || (a.v == b.v && a.idx < b.idx);
  }
  friend bool operator==(const LevelKey& a, const LevelKey& b) {
    return a.v == b.v && a.idx == b.idx;
  }
};

inline long long wrapll(long long a, long long n) {
  long long r = a % n;
  return r < 0 ? r + n : r;
}

struct TriRef {
  long long ti = 0, tj = 0;  // unwrapped anchor cell
  bool upper = false;
};

struct TriEdgeRef {
  int id = 0;                              // canonical edge id (wrapped)
  long long ai = 0, aj = 0, bi = 0, bj = 0;  // canonical endpoints, unwrapped
  TriRef nbr;                              // triangle across this edge
};

/* Combinatorial view of the periodic triangulation.  Canonical edge ids:
   3*(j*nx+i) + {0: east to (i+1,j), 1: north to (i,j+1), 2: diagonal to
   (i+1,j+1)}.  All TriEdgeRef endpoints are listed in canonical (low to
   high) order so crossing parameters are orientation-consistent. */
struct Mesh {
  const ScalarField& f;
  long long nx, ny;
  double hx, hy;

  explicit Mesh(const ScalarField& ff)
      : f(ff), nx(ff.nx), ny(ff.ny), hx(ff.lx / ff.nx), hy(ff.ly / ff.ny) {}

  long long vlin(long long i, long long j) const {
    return wrapll(j, ny) * nx + wrapll(i, nx);
  }
  double value(long long i, long long j) const { return f.values[std::size_t(vlin(i, j))]; }
  bool below(long long i, long long j, const LevelKey& k) const {
    double h = value(i, j);
    return h < k.v || (h == k.v && vlin(i, j) < k.idx);
  }
  int edge_id(long long i, long long j, int o) const { return int(3 * vlin(i, j) + o); }

  std::array<std::array<long long, 2>, 3> tri_verts(const TriRef& t) const {
    if (!t.upper) return {{{t.ti, t.tj}, {t.ti + 1, t.tj}, {t.ti + 1, t.tj + 1}}};
    return {{{t.ti, t.tj}, {t.ti + 1, t.tj + 1}, {t.ti, t.tj + 1}}};
  }
  bool tri_has_vertex(const TriRef& t, long long lin) const {
    for (auto& v : tri_verts(t))
      if (vlin(v[0], v[1]) == lin) return true;
    return false;
  }

  std::array<TriEdgeRef, 3> tri_edges(const TriRef& t) const {
    long long i = t.ti, j = t.tj;
    if (!t.upper)
      return {{{edge_id(i, j, 0), i, j, i + 1, j, {i, j - 1, true}},
               {edge_id(i + 1, j, 1), i + 1, j, i + 1, j + 1, {i + 1, j, true}},
               {edge_id(i, j, 2), i, j, i + 1, j + 1, {i, j, true}}}};
    return {{{edge_id(i, j, 2), i, j, i + 1, j + 1, {i, j, false}},
             {edge_id(i, j + 1, 0), i, j + 1, i + 1, j + 1, {i, j + 1, false}},
             {edge_id(i, j, 1), i, j, i, j + 1, {i - 1, j, false}}}};
  }

  bool crosses(const TriEdgeRef& e, const LevelKey& k) const {
    return below(e.ai, e.aj, k) != below(e.bi, e.bj, k);
  }

  // exit edge of the level curve through t, entered via edge in_id
  TriEdgeRef step(const TriRef& t, int in_id, const LevelKey& k) const {
    bool seen_in = false;
    const TriEdgeRef* out = nullptr;
    auto edges = tri_edges(t);
    for (auto& e : edges) {
      if (e.id == in_id) {
        seen_in = true;
        continue;
      }
      if (crosses(e, k)) out = &e;
    }
    if (!seen_in || !out)
      throw internal_consistency_error("level-curve march lost the curve");
    return *out;
  }

  double cross_t(const TriEdgeRef& e, double v) const {
    double va = value(e.ai, e.aj), vb = value(e.bi, e.bj);
    double t = (vb == va) ? 0.5 : (v - va) / (vb - va);
    return std::clamp(t, 1e-9, 1.0 - 1e-9);
  }
  std::array<double, 2> cross_pos(const TriEdgeRef& e, double t) const {
    return {(double(e.ai) + t * double(e.bi - e.ai)) * hx,
            (double(e.aj) + t * double(e.bj - e.aj)) * hy};
  }
};

struct DSU {
  std::vector<long long> p;
  explicit DSU(std::size_t n) : p(n) { std::iota(p.begin(), p.end(), 0); }
  long long find(long long a) {
    while (p[a] != a) a = p[a] = p[p[a]];
    return a;
  }
  void unite(long long a, long long b) {
    a = find(a);
    b = find(b);
    if (a != b) p[std::max(a, b)] = std::min(a, b);  // min root keeps ids deterministic
  }
};

}  // namespace detail

/* Trace the two self-connected separatrix loops of one saddle.  The level set
   at the saddle value leaves the saddle star through exactly four opposite
   edges (the sign alternations of its link); marching from one alternation
   follows the curve until it re-enters a star triangle, and the four rays
   pair into two closed loops. */
inline Separatrices trace_separatrices(const ScalarField& f, const CriticalPoint& saddle) {
  require_analysis_grid(f, "trace_separatrices");
  if (saddle.kind != CritKind::saddle)
    throw argument_error("trace_separatrices: critical point is not a saddle");
  detail::Mesh m(f);
  const long long si = saddle.i, sj = saddle.j;
  const long long s_lin = m.vlin(si, sj);
  const detail::LevelKey key{saddle.value, s_lin};
  const std::size_t cap = std::size_t(4) * f.size();

  // star triangles around the saddle, counterclockwise
  const std::array<detail::TriRef, 6> star = {{{si, sj, false},
                                               {si, sj, true},
                                               {si - 1, sj, false},
                                               {si - 1, sj - 1, true},
                                               {si - 1, sj - 1, false},
                                               {si, sj - 1, true}}};
  std::vector<int> alts;  // star positions whose opposite edge is crossed
  std::array<detail::TriEdgeRef, 6> opp{};
  for (int d = 0; d < 6; ++d) {
    bool found = false;
    for (auto& e : m.tri_edges(star[d])) {
      if (m.vlin(e.ai, e.aj) == s_lin || m.vlin(e.bi, e.bj) == s_lin) continue;
      opp[d] = e;
      found = true;
      break;
    }
    if (!found) throw internal_consistency_error("saddle star without opposite edge");
    if (m.crosses(opp[d], key)) alts.push_back(d);
  }
  if (alts.size() != 4)
    throw topology_error("saddle at (" + std::to_string(saddle.i) + "," +
                         std::to_string(saddle.j) + ") is not simple: " +
                         std::to_string(alts.size()) + " separatrix rays");

  auto trace_ray = [&](int d) -> std::pair<SeparatrixLoop, int> {
    SeparatrixLoop loop;
    loop.points.push_back({double(si) * m.hx, double(sj) * m.hy});
    detail::TriEdgeRef e = opp[d];
    std::size_t steps = 0;
    for (;;) {
      double t = m.cross_t(e, key.v);
      loop.edge_ids.push_back(e.id);
      loop.ts.push_back(t);
      loop.points.push_back(m.cross_pos(e, t));
      if (m.tri_has_vertex(e.nbr, s_lin)) break;
      e = m.step(e.nbr, e.id, key);
      if (++steps > cap)
        throw numerical_tracing_error("separatrix trace exceeded step cap");
    }
    // locate which alternation edge led back in, and the translated saddle image
    int back = -1;
    for (int d2 : alts)
      if (opp[d2].id == loop.edge_ids.back()) back = d2;
    if (back < 0 || back == d)
      throw internal_consistency_error("separatrix did not close through the saddle star");
    long long ei = 0, ej = 0;
    for (auto& v : m.tri_verts(e.nbr))
      if (m.vlin(v[0], v[1]) == s_lin) ei = v[0], ej = v[1];
    loop.points.push_back({double(ei) * m.hx, double(ej) * m.hy});
    if ((ei - si) % m.nx != 0 || (ej - sj) % m.ny != 0)
      throw internal_consistency_error("separatrix endpoint is not a saddle image");
    loop.winding_x = int((ei - si) / m.nx);
    loop.winding_y = int((ej - sj) / m.ny);
    return {std::move(loop), back};
  };

  Separatrices out;
  out.i = saddle.i;
  out.j = saddle.j;
  out.value = saddle.value;
  auto [loop0, back0] = trace_ray(alts[0]);
  out.loops[0] = std::move(loop0);
  std::vector<int> rest;
  for (int d : alts)
    if (d != alts[0] && d != back0) rest.push_back(d);
  if (rest.size() != 2)
    throw internal_consistency_error("separatrix rays did not pair into two loops");
  auto [loop1, back1] = trace_ray(rest[0]);
  if (back1 != rest[1])
    throw internal_consistency_error("separatrix rays did not pair into two loops");
  out.loops[1] = std::move(loop1);
  return out;
}

inline Segmentation segment_regions(const ScalarField& f, const std::vector<CriticalPoint>& cps,
                                    const std::vector<Separatrices>& seps) {
  require_analysis_grid(f, "segment_regions");
  detail::Mesh m(f);
  const long long n_vert = m.nx * m.ny;
  const long long n_edge = 3 * n_vert;

  std::vector<char> is_saddle(std::size_t(n_vert), 0);
  std::vector<int> cp_of_vertex(std::size_t(n_vert), -1);
  for (int c = 0; c < int(cps.size()); ++c) {
    long long lin = m.vlin(cps[c].i, cps[c].j);
    cp_of_vertex[std::size_t(lin)] = c;
    if (cps[c].kind == CritKind::saddle) is_saddle[std::size_t(lin)] = 1;
  }

  // separatrix crossings per canonical edge, sorted by symbolic level
  struct Cross {
    detail::LevelKey key;
    int sep, loop;
  };
  std::vector<std::vector<Cross>> cross((std::size_t)n_edge);
  for (int s = 0; s < int(seps.size()); ++s) {
    detail::LevelKey k{seps[s].value, m.vlin(seps[s].i, seps[s].j)};
    for (int l = 0; l < 2; ++l)
      for (int eid : seps[s].loops[l].edge_ids) {
        cross[std::size_t(eid)].push_back({k, s, l});
      }
  }
  for (auto& v : cross)
    std::sort(v.begin(), v.end(), [](const Cross& a, const Cross& b) { return a.key < b.key; });

  // items: vertices then per-edge value-ordered intervals
  std::vector<long long> base(std::size_t(n_edge) + 1);
  base[0] = n_vert;
  for (long long e = 0; e < n_edge; ++e)
    base[std::size_t(e) + 1] = base[std::size_t(e)] + (long long)cross[std::size_t(e)].size() + 1;
  detail::DSU dsu(std::size_t(base[std::size_t(n_edge)]));

  // endpoint keys of a canonical edge, value-ordered (lo, hi)
  auto edge_end_keys = [&](long long e) -> std::array<detail::LevelKey, 2> {
    long long lin = e / 3;
    int o = int(e % 3);
    long long i = lin % m.nx, j = lin / m.nx;
    long long bi = i + (o != 1 ? 1 : 0), bj = j + (o != 0 ? 1 : 0);
    detail::LevelKey ka{m.value(i, j), m.vlin(i, j)};
    detail::LevelKey kb{m.value(bi, bj), m.vlin(bi, bj)};
    return ka < kb ? std::array<detail::LevelKey, 2>{ka, kb}
                   : std::array<detail::LevelKey, 2>{kb, ka};
  };

  // merge items slab-by-slab inside every triangle
  std::vector<detail::LevelKey> chords;
  std::vector<int> chord_count;
  std::vector<std::pair<long long, long long>> slot;  // slab -> first item
  for (long long tj = 0; tj < m.ny; ++tj)
    for (long long ti = 0; ti < m.nx; ++ti)
      for (int up = 0; up < 2; ++up) {
        detail::TriRef tri{ti, tj, up != 0};
        auto edges = m.tri_edges(tri);

        chords.clear();
        chord_count.clear();
        for (auto& e : edges)
          for (auto& c : cross[std::size_t(e.id)]) chords.push_back(c.key);
        std::sort(chords.begin(), chords.end());
        {
          std::size_t w = 0;
          for (std::size_t r = 0; r < chords.size();) {
            std::size_t r2 = r;
            while (r2 < chords.size() && chords[r2] == chords[r]) ++r2;
            int cnt = int(r2 - r);
            if (cnt > 2 || (cnt == 1 && !m.tri_has_vertex(tri, chords[r].idx)))
              throw internal_consistency_error("inconsistent separatrix chord in triangle");
            chords[w++] = chords[r];
            chord_count.push_back(cnt);
            r = r2;
          }
          chords.resize(w);
        }
        auto slab_of = [&](const detail::LevelKey& lower_key) {
          return (long long)(std::upper_bound(chords.begin(), chords.end(), lower_key) -
                           chords.begin());
        };

        slot.clear();
        auto put = [&](long long slab, long long item) {
          for (auto& s : slot)
            if (s.first == slab) {
              dsu.unite(s.second, item);
              return;
            }
          slot.push_back({slab, item});
        };

        for (auto& v : m.tri_verts(tri)) {
          long long lin = m.vlin(v[0], v[1]);
          if (is_saddle[std::size_t(lin)]) continue;
          put(slab_of({m.value(v[0], v[1]), lin}), lin);
        }
        for (auto& e : edges) {
          auto ends = edge_end_keys(e.id);
          auto& cs = cross[std::size_t(e.id)];
          for (std::size_t q = 0; q <= cs.size(); ++q) {
            detail::LevelKey lower = (q == 0) ? ends[0] : cs[q - 1].key;
            put(slab_of(lower), base[std::size_t(e.id)] + (long long)q);
          }
        }
      }

  // deterministic region ids: ascending first-item order
  Segmentation seg;
  const long long n_item = base[std::size_t(n_edge)];
  std::vector<int> region_of_root(std::size_t(n_item), -1);
  auto region_of_item = [&](long long item) { return region_of_root[std::size_t(dsu.find(item))]; };
  int n_region = 0;
  for (long long it = 0; it < n_item; ++it) {
    if (it < n_vert && is_saddle[std::size_t(it)]) continue;
    long long r = dsu.find(it);
    if (region_of_root[std::size_t(r)] < 0) region_of_root[std::size_t(r)] = n_region++;
  }
  seg.regions.resize(std::size_t(n_region));
  for (int r = 0; r < n_region; ++r) seg.regions[std::size_t(r)].id = r;
  seg.region_of_vertex.assign(std::size_t(n_vert), -1);
  for (long long v = 0; v < n_vert; ++v) {
    if (is_saddle[std::size_t(v)]) continue;
    int r = region_of_item(v);
    seg.region_of_vertex[std::size_t(v)] = r;
    seg.regions[std::size_t(r)].pixels.push_back(std::uint32_t(v));
  }

  // bounding loops: each crossing separates the interval below from the one above
  struct Bound {
    bool set = false;
    detail::LevelKey key;
    std::vector<std::array<int, 2>> loops;
  };
  std::vector<Bound> lowers((std::size_t)n_region), uppers((std::size_t)n_region);
  auto add_bound = [&](std::vector<Bound>& side, int r, const Cross& c) {
    Bound& b = side[std::size_t(r)];
    if (b.set && !(b.key == c.key))
      throw topology_error("region bounded by two different separatrix levels");
    b.set = true;
    b.key = c.key;
    long long sad_lin = m.vlin(seps[std::size_t(c.sep)].i, seps[std::size_t(c.sep)].j);
    int cp = cp_of_vertex[std::size_t(sad_lin)];
    if (cp < 0) throw internal_consistency_error("separatrix saddle missing from point list");
    std::array<int, 2> ref{cp, c.loop};
    if (std::find(b.loops.begin(), b.loops.end(), ref) == b.loops.end()) b.loops.push_back(ref);
  };
  for (long long e = 0; e < n_edge; ++e) {
    auto& cs = cross[std::size_t(e)];
    for (std::size_t q = 0; q < cs.size(); ++q) {
      int r_below = region_of_item(base[std::size_t(e)] + (long long)q);
      int r_above = region_of_item(base[std::size_t(e)] + (long long)q + 1);
      add_bound(uppers, r_below, cs[q]);
      add_bound(lowers, r_above, cs[q]);
    }
  }

  // contained extrema resolve the loop-free side of a region
  std::vector<int> contained_min(std::size_t(n_region), -1), contained_max(std::size_t(n_region), -1);
  for (int c = 0; c < int(cps.size()); ++c) {
    if (cps[c].kind == CritKind::saddle) continue;
    int r = seg.region_of_vertex[std::size_t(m.vlin(cps[c].i, cps[c].j))];
    auto& slot2 = (cps[c].kind == CritKind::minimum) ? contained_min : contained_max;
    if (slot2[std::size_t(r)] >= 0)
      throw topology_error("two extrema inside one region");
    slot2[std::size_t(r)] = c;
  }
  for (int r = 0; r < n_region; ++r) {
    Region& rg = seg.regions[std::size_t(r)];
    if (lowers[std::size_t(r)].set) {
      if (contained_min[std::size_t(r)] >= 0)
        throw topology_error("region has both a bounding loop below and an interior minimum");
      rg.lo = lowers[std::size_t(r)].key.v;
      rg.lower_node = cp_of_vertex[std::size_t(lowers[std::size_t(r)].key.idx)];
      rg.lower_loops = lowers[std::size_t(r)].loops;
    } else {
      if (contained_min[std::size_t(r)] < 0)
        throw topology_error("region with no lower bound and no interior minimum");
      rg.lower_node = contained_min[std::size_t(r)];
      rg.lo = cps[std::size_t(rg.lower_node)].value;
    }
    if (uppers[std::size_t(r)].set) {
      if (contained_max[std::size_t(r)] >= 0)
        throw topology_error("region has both a bounding loop above and an interior maximum");
      rg.hi = uppers[std::size_t(r)].key.v;
      rg.upper_node = cp_of_vertex[std::size_t(uppers[std::size_t(r)].key.idx)];
      rg.upper_loops = uppers[std::size_t(r)].loops;
    } else {
      if (contained_max[std::size_t(r)] < 0)
        throw topology_error("region with no upper bound and no interior maximum");
      rg.upper_node = contained_max[std::size_t(r)];
      rg.hi = cps[std::size_t(rg.upper_node)].value;
    }
    if (!(rg.lo < rg.hi)) throw topology_error("region with empty value range");
  }

  // homology class of each region's core loop: trace the mid-range level set
  std::vector<int> start_edge(std::size_t(n_region), -1);
  for (long long e = 0; e < n_edge; ++e) {
    auto ends = edge_end_keys(e);
    auto& cs = cross[std::size_t(e)];
    for (std::size_t q = 0; q <= cs.size(); ++q) {
      int r = region_of_item(base[std::size_t(e)] + (long long)q);
      if (start_edge[std::size_t(r)] >= 0) continue;
      const Region& rg = seg.regions[std::size_t(r)];
      detail::LevelKey kr{0.5 * (rg.lo + rg.hi), -1};
      detail::LevelKey lower = (q == 0) ? ends[0] : cs[q - 1].key;
      detail::LevelKey upper = (q == cs.size()) ? ends[1] : cs[q].key;
      if (lower < kr && kr < upper) start_edge[std::size_t(r)] = int(e);
    }
  }
  for (int r = 0; r < n_region; ++r) {
    Region& rg = seg.regions[std::size_t(r)];
    if (start_edge[std::size_t(r)] < 0)
      throw topology_error("region without a transversal edge for its core loop");
    long long e = start_edge[std::size_t(r)];
    long long lin = e / 3;
    int o = int(e % 3);
    long long i = lin % m.nx, j = lin / m.nx;
    detail::TriRef tri = (o == 1) ? detail::TriRef{i, j, true} : detail::TriRef{i, j, false};
    detail::LevelKey kr{0.5 * (rg.lo + rg.hi), -1};
    // entry edge ref with this triangle's unwrapped frame
    detail::TriEdgeRef in{};
    bool found = false;
    for (auto& te : m.tri_edges(tri))
      if (te.id == int(e)) {
        in = te;
        found = true;
      }
    if (!found) throw internal_consistency_error("core-loop start edge not on its triangle");
    std::array<double, 2> p0 = m.cross_pos(in, m.cross_t(in, kr.v));
    std::array<double, 2> pend{};
    const std::size_t cap = std::size_t(4) * f.size();
    std::size_t steps = 0;
    detail::TriRef t = tri;
    int in_id = in.id;
    for (;;) {
      detail::TriEdgeRef ex = m.step(t, in_id, kr);
      if (ex.id == int(e)) {  // closed: same edge crossed again, one period later
        pend = m.cross_pos(ex, m.cross_t(ex, kr.v));
        break;
      }
      t = ex.nbr;
      in_id = ex.id;
      if (++steps > cap) throw numerical_tracing_error("core-loop trace exceeded step cap");
    }
    double dx = (pend[0] - p0[0]) / f.lx, dy = (pend[1] - p0[1]) / f.ly;
    int wx = int(std::lround(dx)), wy = int(std::lround(dy));
    if (std::fabs(dx - wx) > 1e-6 || std::fabs(dy - wy) > 1e-6)
      throw internal_consistency_error("core loop did not close on a lattice translate");
    if (wx < 0 || (wx == 0 && wy < 0)) {
      wx = -wx;
      wy = -wy;
    }
    rg.winding_x = wx;
    rg.winding_y = wy;
    rg.essential = (wx != 0 || wy != 0);
    if (rg.essential && (contained_min[std::size_t(r)] >= 0 || contained_max[std::size_t(r)] >= 0))
      throw topology_error("region with interior extremum has an essential core loop");
  }
  return seg;
}

inline Segmentation segment_regions(const ScalarField& f, const std::vector<Separatrices>& seps) {
  return segment_regions(f, detect_critical_points(f), seps);
}

struct ReebNode {
  int id = 0;       // == critical point index
  CritKind kind = CritKind::saddle;
  int i = 0, j = 0;
  double value = 0.0;
};

struct ReebEdge {
  int id = 0;  // == region id
  int lower = -1, upper = -1;
  double weight = 0.0;
  bool essential = false;
  int winding_x = 0, winding_y = 0;
  std::size_t n_pixels = 0;
};

struct ReebGraph {
  std::vector<ReebNode> nodes;
  std::vector<ReebEdge> edges;
  std::vector<std::vector<int>> incident;  // node -> edge ids

  int degree(int node) const { return int(incident[std::size_t(node)].size()); }
};

struct TopologyAnalysis {
  std::vector<CriticalPoint> cps;
  StabilityReport stability;
  std::vector<Separatrices> seps;  // one per saddle, in critical-point order
  std::vector<int> sep_of_cp;      // cp index -> seps index, -1 for extrema
  Segmentation seg;
  ReebGraph graph;
};

namespace detail {

inline void validate_reeb(const TopologyAnalysis& a) {
  const ReebGraph& g = a.graph;
  if (g.edges.size() != g.nodes.size())
    throw topology_error("Reeb graph is not a connected graph with one cycle: " +
                         std::to_string(g.nodes.size()) + " nodes vs " +
                         std::to_string(g.edges.size()) + " edges");
  for (const ReebNode& n : g.nodes) {
    int want = (n.kind == CritKind::saddle) ? 3 : 1;
    if (g.degree(n.id) != want)
      throw topology_error("Reeb node degree violation at node " + std::to_string(n.id));
  }
  for (const ReebEdge& e : g.edges) {
    if (e.lower < 0 || e.upper < 0 || e.lower == e.upper)
      throw topology_error("malformed Reeb edge " + std::to_string(e.id));
    if (!(g.nodes[std::size_t(e.lower)].value < g.nodes[std::size_t(e.upper)].value))
      throw topology_error("Reeb edge not increasing in value");
  }

  // connectivity
  std::vector<char> seen(g.nodes.size(), 0);
  std::vector<int> stack{0};
  seen[0] = 1;
  std::size_t n_seen = 1;
  while (!stack.empty()) {
    int n = stack.back();
    stack.pop_back();
    for (int e : g.incident[std::size_t(n)]) {
      int o = g.edges[std::size_t(e)].lower == n ? g.edges[std::size_t(e)].upper
                                                 : g.edges[std::size_t(e)].lower;
      if (!seen[std::size_t(o)]) {
        seen[std::size_t(o)] = 1;
        ++n_seen;
        stack.push_back(o);
      }
    }
  }
  if (n_seen != g.nodes.size()) throw topology_error("Reeb graph is disconnected");

  // unique cycle via leaf pruning; its edges must be exactly the essential ones
  std::vector<int> deg(g.nodes.size());
  std::vector<char> removed(g.edges.size(), 0);
  for (const ReebNode& n : g.nodes) deg[std::size_t(n.id)] = g.degree(n.id);
  std::vector<int> queue;
  for (const ReebNode& n : g.nodes)
    if (deg[std::size_t(n.id)] == 1) queue.push_back(n.id);
  while (!queue.empty()) {
    int n = queue.back();
    queue.pop_back();
    for (int e : g.incident[std::size_t(n)]) {
      if (removed[std::size_t(e)]) continue;
      removed[std::size_t(e)] = 1;
      int o = g.edges[std::size_t(e)].lower == n ? g.edges[std::size_t(e)].upper
                                                 : g.edges[std::size_t(e)].lower;
      if (--deg[std::size_t(o)] == 1) queue.push_back(o);
      --deg[std::size_t(n)];
    }
  }
  int wx = 0, wy = 0;
  for (const ReebEdge& e : g.edges) {
    bool on_cycle = !removed[std::size_t(e.id)];
    if (on_cycle != e.essential)
      throw topology_error("cycle edges and essential annuli disagree at edge " +
                           std::to_string(e.id));
    if (e.essential) {
      if (wx == 0 && wy == 0) {
        wx = e.winding_x;
        wy = e.winding_y;
      } else if (wx != e.winding_x || wy != e.winding_y) {
        throw topology_error("essential annuli with inconsistent homology classes");
      }
    }
  }
  if (wx == 0 && wy == 0) throw topology_error("Reeb graph has no essential cycle");
  if (std::gcd(std::abs(wx), std::abs(wy)) != 1)
    throw topology_error("essential annulus class is not primitive");
}

}  // namespace detail

inline TopologyAnalysis analyze_topology(const ScalarField& f) {
  TopologyAnalysis a;
  a.cps = detect_critical_points(f);
  a.stability = validate_stability(a.cps);
  if (!a.stability.stable) {
    std::string why = "field is not structurally stable:";
    for (const std::string& r : a.stability.reasons) why += " " + r + ";";
    throw degenerate_field_error(why);
  }
  a.sep_of_cp.assign(a.cps.size(), -1);
  for (int c = 0; c < int(a.cps.size()); ++c)
    if (a.cps[std::size_t(c)].kind == CritKind::saddle) {
      a.sep_of_cp[std::size_t(c)] = int(a.seps.size());
      a.seps.push_back(trace_separatrices(f, a.cps[std::size_t(c)]));
    }
  a.seg = segment_regions(f, a.cps, a.seps);
  if (a.seg.regions.size() != a.cps.size())
    throw topology_error("expected " + std::to_string(a.cps.size()) + " regions, found " +
                         std::to_string(a.seg.regions.size()));

  for (int c = 0; c < int(a.cps.size()); ++c) {
    const CriticalPoint& p = a.cps[std::size_t(c)];
    a.graph.nodes.push_back({c, p.kind, p.i, p.j, p.value});
  }
  a.graph.incident.assign(a.graph.nodes.size(), {});
  for (const Region& r : a.seg.regions) {
    ReebEdge e;
    e.id = r.id;
    e.lower = r.lower_node;
    e.upper = r.upper_node;
    e.weight = r.hi - r.lo;
    e.essential = r.essential;
    e.winding_x = r.winding_x;
    e.winding_y = r.winding_y;
    e.n_pixels = r.pixels.size();
    a.graph.incident[std::size_t(e.lower)].push_back(e.id);
    a.graph.incident[std::size_t(e.upper)].push_back(e.id);
    a.graph.edges.push_back(e);
  }
  detail::validate_reeb(a);

  // every saddle's two loops together bound four region sides
  for (int c = 0; c < int(a.cps.size()); ++c) {
    if (a.cps[std::size_t(c)].kind != CritKind::saddle) continue;
    int refs = 0;
    for (const Region& r : a.seg.regions) {
      for (auto& l : r.lower_loops) refs += (l[0] == c);
      for (auto& l : r.upper_loops) refs += (l[0] == c);
    }
    if (refs != 4)
      throw topology_error("saddle " + std::to_string(c) + " bounds " + std::to_string(refs) +
                           " region sides, expected 4");
  }
  return a;
}

inline ReebGraph build_reeb_graph(const ScalarField& f) { return analyze_topology(f).graph; }

inline nlohmann::json reeb_to_json(const ReebGraph& g) {
  nlohmann::json nodes = nlohmann::json::array(), edges = nlohmann::json::array();
  for (const ReebNode& n : g.nodes)
    nodes.push_back({{"id", n.id},
                     {"kind", to_string(n.kind)},
                     {"i", n.i},
                     {"j", n.j},
                     {"value", n.value}});
  for (const ReebEdge& e : g.edges)
    edges.push_back({{"id", e.id},
                     {"lower", e.lower},
                     {"upper", e.upper},
                     {"weight", e.weight},
                     {"kind", e.essential ? "annulus_essential" : "annulus_inessential"},
                     {"winding", {e.winding_x, e.winding_y}},
                     {"pixels", e.n_pixels}});
  return {{"nodes", nodes}, {"edges", edges}};
}

inline std::string reeb_to_dot(const ReebGraph& g) {
  std::string out = "graph reeb {\n";
  char buf[128];
  for (const ReebNode& n : g.nodes) {
    std::snprintf(buf, sizeof buf, "  n%d [label=\"%s %.6g\"];\n", n.id, to_string(n.kind),
                  n.value);
    out += buf;
  }
  for (const ReebEdge& e : g.edges) {
    std::snprintf(buf, sizeof buf, "  n%d -- n%d [label=\"%.6g\"%s];\n", e.lower, e.upper,
                  e.weight, e.essential ? ", penwidth=2" : "");
    out += buf;
  }
  out += "}\n";
  return out;
}

}  // namespace tfda
