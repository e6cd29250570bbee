#pragma once
// COT construction: cut selection on the essential cycle, rooting the cut
// Reeb graph, symbol labeling, epsilon-filtering, and the sign-flip involution.

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <string>
#include <vector>

#include <json.hpp>

#include "tfda/core.hpp"
#include "tfda/cot_lang.hpp"
#include "tfda/reeb.hpp"

namespace tfda {

struct CutChoice {
  int cut_edge = -1;      // ReebGraph edge id (== Region id)
  double cut_value = 0.0; // regular value of the cut orbit, midpoint of the edge
  int winding_x = 0, winding_y = 0;  // homology class of the cut orbit
  char shift_axis = 'y';  // transversal axis: 'x' when winding_x == 0, else 'y'
};

/* The governing saddle is the lowest-valued saddle on the essential cycle:
   growing sub-level sets from the global minimum, it is the first saddle whose
   level set carries an essential loop.  Both cycle edges at that saddle lie
   above it; the transversal-axis walk from the saddle vertex picks one
   deterministically.  The cut orbit sits at the midpoint of that edge. */
inline CutChoice choose_cut(const TopologyAnalysis& ta, const ScalarField& f) {
  const ReebGraph& g = ta.graph;
  int star = -1;
  for (const ReebNode& n : g.nodes) {
    if (n.kind != CritKind::saddle) continue;
    bool on_cycle = false;
    for (int e : g.incident[std::size_t(n.id)])
      if (g.edges[std::size_t(e)].essential) on_cycle = true;
    if (!on_cycle) continue;
    if (star < 0 || n.value < g.nodes[std::size_t(star)].value) star = n.id;
  }
  if (star < 0) throw topology_error("no essential saddle: the Reeb graph carries no cycle");

  std::vector<int> cands;
  for (int e : g.incident[std::size_t(star)])
    if (g.edges[std::size_t(e)].essential) cands.push_back(e);
  if (cands.size() != 2)
    throw internal_consistency_error("governing saddle must touch exactly two cycle edges");
  for (int e : cands)
    if (g.edges[std::size_t(e)].lower != star)
      throw internal_consistency_error("cycle edge dips below the governing saddle");

  CutChoice c;
  c.winding_x = g.edges[std::size_t(cands[0])].winding_x;
  c.winding_y = g.edges[std::size_t(cands[0])].winding_y;
  c.shift_axis = (c.winding_x == 0) ? 'x' : 'y';

  const ReebNode& s = g.nodes[std::size_t(star)];
  int chosen = -1;
  int cap = (c.shift_axis == 'x') ? f.nx : f.ny;
  for (int k = 1; k < cap && chosen < 0; ++k) {
    int i = s.i, j = s.j;
    if (c.shift_axis == 'x') i = wrap(i + k, f.nx);
    else j = wrap(j + k, f.ny);
    int r = ta.seg.region_of_vertex[std::size_t(j) * std::size_t(f.nx) + std::size_t(i)];
    if (r == cands[0] || r == cands[1]) chosen = r;
  }
  // at coarse grids an annulus can be thinner than a pixel along the scanned
  // line; fall back to the smaller edge id, which is just as deterministic
  if (chosen < 0) chosen = std::min(cands[0], cands[1]);
  c.cut_edge = chosen;
  const Region& r = ta.seg.regions[std::size_t(chosen)];
  c.cut_value = 0.5 * (r.lo + r.hi);
  return c;
}

/* Rooted tree produced by splitting the cut edge.  Node ids 0..V-1 mirror the
   Reeb nodes; node V is the new root (lower cut boundary) and node V+1 the
   other cut boundary. */
struct RootedNode {
  int reeb_node = -1;  // -1 for the two cut nodes
  CritKind kind = CritKind::saddle;
  double value = 0.0;
  int parent = -1;
  int region_to_parent = -1;  // region/edge id backing the edge toward the parent
  std::vector<int> children;
};

struct RootedTree {
  std::vector<RootedNode> nodes;
  int root = -1;        // lower cut boundary
  int beta_minus = -1;  // upper cut boundary
  CutChoice cut;
};

inline RootedTree cut_and_root(const TopologyAnalysis& ta, const CutChoice& cut) {
  const ReebGraph& g = ta.graph;
  if (cut.cut_edge < 0 || cut.cut_edge >= int(g.edges.size()))
    throw argument_error("cut edge out of range");
  const ReebEdge& ce = g.edges[std::size_t(cut.cut_edge)];
  if (!ce.essential) throw argument_error("cut edge is not on the essential cycle");
  double lo = g.nodes[std::size_t(ce.lower)].value, hi = g.nodes[std::size_t(ce.upper)].value;
  if (!(cut.cut_value > lo && cut.cut_value < hi))
    throw argument_error("cut value must lie strictly inside the cut edge's value interval");

  RootedTree rt;
  rt.cut = cut;
  int v = int(g.nodes.size());
  rt.nodes.resize(std::size_t(v) + 2);
  for (const ReebNode& n : g.nodes) {
    RootedNode& rn = rt.nodes[std::size_t(n.id)];
    rn.reeb_node = n.id;
    rn.kind = n.kind;
    rn.value = n.value;
  }
  rt.root = v;
  rt.beta_minus = v + 1;
  rt.nodes[std::size_t(rt.root)].value = cut.cut_value;
  rt.nodes[std::size_t(rt.beta_minus)].value = cut.cut_value;

  // undirected adjacency: every Reeb edge except the cut one, plus two halves
  std::vector<std::vector<std::array<int, 2>>> adj(rt.nodes.size());
  for (const ReebEdge& e : g.edges) {
    if (e.id == cut.cut_edge) continue;
    adj[std::size_t(e.lower)].push_back({e.upper, e.id});
    adj[std::size_t(e.upper)].push_back({e.lower, e.id});
  }
  adj[std::size_t(rt.root)].push_back({ce.lower, cut.cut_edge});
  adj[std::size_t(ce.lower)].push_back({rt.root, cut.cut_edge});
  adj[std::size_t(rt.beta_minus)].push_back({ce.upper, cut.cut_edge});
  adj[std::size_t(ce.upper)].push_back({rt.beta_minus, cut.cut_edge});

  std::vector<int> stack = {rt.root};
  std::vector<char> seen(rt.nodes.size(), 0);
  seen[std::size_t(rt.root)] = 1;
  while (!stack.empty()) {
    int u = stack.back();
    stack.pop_back();
    auto nbrs = adj[std::size_t(u)];
    std::sort(nbrs.begin(), nbrs.end(),
              [](const std::array<int, 2>& a, const std::array<int, 2>& b) { return a[1] < b[1]; });
    for (const auto& [w, region] : nbrs) {
      if (seen[std::size_t(w)]) continue;
      seen[std::size_t(w)] = 1;
      rt.nodes[std::size_t(w)].parent = u;
      rt.nodes[std::size_t(w)].region_to_parent = region;
      rt.nodes[std::size_t(u)].children.push_back(w);
      stack.push_back(w);
    }
  }
  for (std::size_t k = 0; k < rt.nodes.size(); ++k)
    if (!seen[k]) throw internal_consistency_error("cut tree is not connected");
  return rt;
}

struct LabeledCot {
  CotTree tree;
  CutChoice cut;
};

namespace detail {

inline int side_of(const RootedTree& rt, int node, int at) {
  return rt.nodes[std::size_t(node)].value > rt.nodes[std::size_t(at)].value ? 1 : -1;
}

inline void require_edge_class(const TopologyAnalysis& ta, int region, bool essential,
                               const char* what) {
  if (ta.graph.edges[std::size_t(region)].essential != essential)
    throw internal_consistency_error(std::string("edge class violation: ") + what);
}

// off-path subtree rooted at `c`, hanging from saddle `p`
inline CotNode build_slot(const TopologyAnalysis& ta, const RootedTree& rt, int c, int p) {
  const RootedNode& nc = rt.nodes[std::size_t(c)];
  CotNode n;
  n.value = nc.value;
  n.weight_to_parent = std::fabs(nc.value - rt.nodes[std::size_t(p)].value);
  n.region = nc.region_to_parent;
  require_edge_class(ta, nc.region_to_parent, false, "off-path edge must be inessential");
  if (nc.reeb_node < 0)
    throw internal_consistency_error("cut boundary found off the essential path");
  if (nc.kind != CritKind::saddle) {
    if (!nc.children.empty())
      throw internal_consistency_error("extremum with children in the cut tree");
    bool above = nc.value > rt.nodes[std::size_t(p)].value;
    if (above != (nc.kind == CritKind::maximum))
      throw internal_consistency_error("extremum on the wrong side of its saddle");
    n.symbol = above ? CotSymbol::sigma_p : CotSymbol::sigma_m;
    return n;
  }
  if (nc.children.size() != 2)
    throw internal_consistency_error("off-path saddle without two children");
  int c1 = nc.children[0], c2 = nc.children[1];
  int s1 = side_of(rt, c1, c), s2 = side_of(rt, c2, c);
  int sp = side_of(rt, p, c);
  if (s1 > 0 && s2 > 0) {
    if (sp > 0) throw internal_consistency_error("saddle with three upper edges");
    n.symbol = CotSymbol::b_pp;
    n.cyclic = true;
    n.children.push_back(build_slot(ta, rt, c1, c));
    n.children.push_back(build_slot(ta, rt, c2, c));
  } else if (s1 < 0 && s2 < 0) {
    if (sp < 0) throw internal_consistency_error("saddle with three lower edges");
    n.symbol = CotSymbol::b_mm;
    n.cyclic = true;
    n.children.push_back(build_slot(ta, rt, c1, c));
    n.children.push_back(build_slot(ta, rt, c2, c));
  } else {
    // mixed: the petal child shares the parent's side and nests inside the
    // saddle's own loop; it takes the second slot
    int outer = (s1 == -sp) ? c1 : c2;
    int petal = (outer == c1) ? c2 : c1;
    if (side_of(rt, petal, c) != sp)
      throw internal_consistency_error("mixed saddle without a parent-side child");
    n.symbol = (sp > 0) ? CotSymbol::b_mp : CotSymbol::b_pm;
    n.children.push_back(build_slot(ta, rt, outer, c));
    n.children.push_back(build_slot(ta, rt, petal, c));
  }
  return n;
}

inline CotNode build_chain(const TopologyAnalysis& ta, const RootedTree& rt,
                           const std::vector<int>& path, std::size_t k) {
  int cur = path[k];
  const RootedNode& nc = rt.nodes[std::size_t(cur)];
  CotNode n;
  n.value = nc.value;
  n.weight_to_parent = std::fabs(nc.value - rt.nodes[std::size_t(path[k - 1])].value);
  n.region = nc.region_to_parent;
  if (cur == rt.beta_minus) {
    n.symbol = CotSymbol::beta_m;
    return n;
  }
  if (nc.kind != CritKind::saddle)
    throw internal_consistency_error("non-saddle interior node on the essential path");
  int onward = path[k + 1];
  int branch = -1;
  for (int ch : nc.children)
    if (ch != onward) branch = ch;
  if (branch < 0 || nc.children.size() != 2)
    throw internal_consistency_error("essential-path saddle without a branch child");
  int sp = side_of(rt, path[k - 1], cur);
  int so = side_of(rt, onward, cur);
  int sb = side_of(rt, branch, cur);
  require_edge_class(ta, nc.region_to_parent, true, "essential-path edge must be essential");
  require_edge_class(ta, rt.nodes[std::size_t(onward)].region_to_parent, true,
                     "essential-path edge must be essential");
  if (sp == so) {
    if (sb != -sp) throw internal_consistency_error("degenerate sign triple at an essential saddle");
    n.symbol = (so > 0) ? CotSymbol::al_mp : CotSymbol::al_pm;
  } else {
    n.symbol = (sb > 0) ? (so > 0 ? CotSymbol::a_pp : CotSymbol::a_pm)
                        : (so > 0 ? CotSymbol::a_mp : CotSymbol::a_mm);
  }
  if (k == 1 && n.symbol != CotSymbol::al_mp)
    throw internal_consistency_error("first symbol on the essential chain must be α₋·₊");
  n.children.push_back(build_slot(ta, rt, branch, cur));
  n.children.push_back(build_chain(ta, rt, path, k + 1));
  return n;
}

}  // namespace detail

inline LabeledCot label_cot(const TopologyAnalysis& ta, const RootedTree& rt) {
  // essential path: root -> other cut boundary
  std::vector<int> path;
  for (int u = rt.beta_minus; u != -1; u = rt.nodes[std::size_t(u)].parent) path.push_back(u);
  std::reverse(path.begin(), path.end());
  if (path.front() != rt.root)
    throw internal_consistency_error("cut boundaries are not connected through the tree");

  LabeledCot out;
  out.cut = rt.cut;
  out.tree.root.symbol = CotSymbol::beta_p;
  out.tree.root.value = rt.cut.cut_value;
  out.tree.root.region = rt.cut.cut_edge;
  out.tree.root.children.push_back(detail::build_chain(ta, rt, path, 1));
  return out;
}

inline LabeledCot analyze_cot(const TopologyAnalysis& ta, const ScalarField& f) {
  CutChoice cut = choose_cut(ta, f);
  return label_cot(ta, cut_and_root(ta, cut));
}

/* Epsilon-filtering: repeatedly remove the lightest terminal σ edge of weight
   ≤ eps0; a non-β node left with a single child is replaced by that child,
   whose new weight is the value gap of the surviving endpoints.  Pixel regions
   of removed structure are folded into the absorbing node's parent edge. */
inline CotTree filter_cot(const CotTree& t, double eps0) {
  if (eps0 < 0) throw argument_error("filter threshold must be non-negative");
  CotTree out = t;
  if (eps0 == 0) return out;
  auto is_sigma = [](const CotNode& n) {
    return n.symbol == CotSymbol::sigma_p || n.symbol == CotSymbol::sigma_m;
  };
  for (;;) {
    // locate the lightest removable leaf (ties: first in preorder)
    std::vector<int> best;
    double best_w = 0.0;
    {
      std::vector<int> cur;
      long ord = 0;
      auto dfs = [&](auto&& self, CotNode& n) -> void {
        ++ord;
        if (is_sigma(n) && n.children.empty() && n.weight_to_parent <= eps0) {
          if (best.empty() || n.weight_to_parent < best_w) {
            best = cur;
            best_w = n.weight_to_parent;
          }
        }
        for (std::size_t i = 0; i < n.children.size(); ++i) {
          cur.push_back(int(i));
          self(self, n.children[i]);
          cur.pop_back();
        }
      };
      dfs(dfs, out.root);
    }
    if (best.empty()) break;

    // walk to the victim's parent
    CotNode* parent = &out.root;
    CotNode* grand = nullptr;
    for (std::size_t d = 0; d + 1 < best.size(); ++d) {
      grand = parent;
      parent = &parent->children[std::size_t(best[d])];
    }
    CotNode& victim = parent->children[std::size_t(best.back())];
    parent->absorbed_regions.push_back(victim.region);
    parent->absorbed_regions.insert(parent->absorbed_regions.end(),
                                    victim.absorbed_regions.begin(),
                                    victim.absorbed_regions.end());
    parent->children.erase(parent->children.begin() + best.back());

    // re-simplify: a non-β saddle with one child merges with it
    if (parent->symbol != CotSymbol::beta_p && parent->symbol != CotSymbol::beta_m &&
        parent->children.size() == 1 && grand != nullptr) {
      CotNode merged = std::move(parent->children[0]);
      merged.weight_to_parent = std::fabs(merged.value - grand->value);
      merged.absorbed_regions.push_back(parent->region);
      merged.absorbed_regions.insert(merged.absorbed_regions.end(),
                                     parent->absorbed_regions.begin(),
                                     parent->absorbed_regions.end());
      *parent = std::move(merged);
    }
  }
  return out;
}

// --- sign-flip involution -------------------------------------------------

inline CotSymbol involute_symbol(CotSymbol s) {
  using S = CotSymbol;
  switch (s) {
    case S::sigma_p: return S::sigma_m;
    case S::sigma_m: return S::sigma_p;
    case S::b_pp: return S::b_mm;
    case S::b_mm: return S::b_pp;
    case S::b_pm: return S::b_mp;
    case S::b_mp: return S::b_pm;
    case S::a_pp: return S::a_mm;
    case S::a_mm: return S::a_pp;
    case S::a_mp: return S::a_pm;
    case S::a_pm: return S::a_mp;
    case S::al_mp: return S::al_pm;
    case S::al_pm: return S::al_mp;
    case S::ad_pm: return S::ad_mp;
    case S::ad_mp: return S::ad_pm;
    case S::ald_pp: return S::ald_mm;
    case S::ald_mm: return S::ald_pp;
    case S::beta_p: return S::beta_m;
    case S::beta_m: return S::beta_p;
  }
  throw internal_consistency_error("unreachable symbol");
}

inline CotNode involute_node(const CotNode& n) {
  CotNode out = n;
  out.symbol = involute_symbol(n.symbol);
  out.value = -n.value;
  for (std::size_t i = 0; i < out.children.size(); ++i)
    out.children[i] = involute_node(n.children[i]);
  return out;
}

// chain saddles of a labeled tree, root side first, β nodes excluded
inline std::vector<const CotNode*> chain_nodes(const CotTree& t) {
  std::vector<const CotNode*> out;
  const CotNode* cur = t.root.children.empty() ? nullptr : &t.root.children[0];
  while (cur && cur->symbol != CotSymbol::beta_m) {
    out.push_back(cur);
    cur = cur->children.size() == 2 ? &cur->children[1] : nullptr;
  }
  return out;
}

/* Walking the chain in the opposite sense swaps the parent and onward
   essential edges at every pass-through saddle, flipping the onward sign of
   the a symbols; α and slot structure are direction-blind. */
inline CotSymbol reverse_chain_symbol(CotSymbol s) {
  using S = CotSymbol;
  switch (s) {
    case S::a_pp: return S::a_pm;
    case S::a_pm: return S::a_pp;
    case S::a_mp: return S::a_mm;
    case S::a_mm: return S::a_mp;
    default: return s;
  }
}

/* True when the COT of −H matches the symbol-involuted COT of H.  The cut of
   −H may land on either cycle edge at its governing saddle, which fixes both
   where the chain is opened and in which sense it runs around the cycle, so
   chains are compared as cyclic sequences of (symbol, branch subtree) links
   up to rotation and traversal direction. */
inline bool involuted_equal(const CotTree& of_h, const CotTree& of_neg_h) {
  auto link_keys = [](const CotTree& t, bool involute, bool reverse_dir) {
    std::vector<std::string> keys;
    for (const CotNode* n : chain_nodes(t)) {
      CotNode slot = involute ? involute_node(n->children[0]) : n->children[0];
      CotSymbol s = involute ? involute_symbol(n->symbol) : n->symbol;
      if (reverse_dir) s = reverse_chain_symbol(s);
      keys.push_back(std::string(symbol_name(s)) + "(" + emit_node(slot) + ")");
    }
    return keys;
  };
  const std::vector<std::string> b = link_keys(of_neg_h, false, false);
  auto matches_some_rotation = [&b](const std::vector<std::string>& x) {
    if (x.size() != b.size()) return false;
    if (x.empty()) return true;
    for (std::size_t r = 0; r < x.size(); ++r) {
      bool ok = true;
      for (std::size_t i = 0; i < x.size() && ok; ++i)
        ok = x[(i + r) % x.size()] == b[i];
      if (ok) return true;
    }
    return false;
  };
  if (matches_some_rotation(link_keys(of_h, true, false))) return true;
  std::vector<std::string> reflected = link_keys(of_h, true, true);
  std::reverse(reflected.begin(), reflected.end());
  return matches_some_rotation(reflected);
}

inline nlohmann::json labeled_cot_to_json(const LabeledCot& lc) {
  nlohmann::json j;
  j["cut"] = {{"edge", lc.cut.cut_edge},
              {"value", lc.cut.cut_value},
              {"winding", {lc.cut.winding_x, lc.cut.winding_y}},
              {"shift_axis", std::string(1, lc.cut.shift_axis)}};
  j["string"] = emit_cot(lc.tree);
  j["tree"] = cot_to_json(lc.tree.root);
  return j;
}

}  // namespace tfda
