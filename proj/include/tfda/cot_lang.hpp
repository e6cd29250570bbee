#pragma once
// The COT representation language: tokenizer over the Unicode and ASCII
// surface alphabets, strict/permissive recursive-descent parsers, canonical
// emitter, and structural equality with curly-brace children unordered.

#include <algorithm>
#include <cstddef>
#include <string>
#include <vector>

#include <json.hpp>

#include "tfda/core.hpp"

namespace tfda {

/* Symbols are named by their sign slots: p/m for the plus/minus subscripts,
   reading left to right.  `a`/`al` carry one dotted (chain-direction) sign;
   `ad`/`ald` are the dotted-pair forms whose both arguments are chains. */
enum class CotSymbol {
  sigma_p, sigma_m,
  b_pp, b_mm, b_pm, b_mp,
  a_pp, a_mp, a_pm, a_mm,
  ad_pm, ad_mp,
  al_pm, al_mp,
  ald_pp, ald_mm,
  beta_p, beta_m,
};

enum class SymbolArity { leaf, pair_slots, slot_chain, pair_chains };

struct CotNode {
  CotSymbol symbol = CotSymbol::beta_m;
  bool cyclic = false;       // curly-brace children, order-free
  double value = 0.0;        // H value at the node (0 for structure-only trees)
  double weight_to_parent = 0.0;
  int region = -1;           // Region id backing the parent edge, or -1
  std::vector<int> absorbed_regions;  // regions folded into the parent edge by filtering
  std::vector<CotNode> children;
};

struct CotTree {
  CotNode root;  // beta_p
};

enum class ParseMode { strict, permissive };

namespace detail {

struct SymbolInfo {
  CotSymbol sym;
  const char* uni;
  const char* ascii;
  SymbolArity arity;
  bool cyclic;
  bool lambda_alias;  // permissive-only spelling
};

inline const std::vector<SymbolInfo>& symbol_table() {
  static const std::vector<SymbolInfo> table = {
      {CotSymbol::sigma_p, "σ₊", "s+", SymbolArity::leaf, false, false},
      {CotSymbol::sigma_m, "σ₋", "s-", SymbolArity::leaf, false, false},
      {CotSymbol::b_pp, "b₊₊", "b++", SymbolArity::pair_slots, true, false},
      {CotSymbol::b_mm, "b₋₋", "b--", SymbolArity::pair_slots, true, false},
      {CotSymbol::b_pm, "b₊₋", "b+-", SymbolArity::pair_slots, false, false},
      {CotSymbol::b_mp, "b₋₊", "b-+", SymbolArity::pair_slots, false, false},
      {CotSymbol::a_pp, "a₊·₊", "a+.+", SymbolArity::slot_chain, false, false},
      {CotSymbol::a_mp, "a₋·₊", "a-.+", SymbolArity::slot_chain, false, false},
      {CotSymbol::a_pm, "a₊·₋", "a+.-", SymbolArity::slot_chain, false, false},
      {CotSymbol::a_mm, "a₋·₋", "a-.-", SymbolArity::slot_chain, false, false},
      {CotSymbol::ad_pm, "a·₊·₋", "a.+.-", SymbolArity::pair_chains, false, false},
      {CotSymbol::ad_mp, "a·₋·₊", "a.-.+", SymbolArity::pair_chains, false, false},
      {CotSymbol::al_pm, "α₊·₋", "o+.-", SymbolArity::slot_chain, false, false},
      {CotSymbol::al_mp, "α₋·₊", "o-.+", SymbolArity::slot_chain, false, false},
      {CotSymbol::ald_pp, "α·₊·₊", "o.+.+", SymbolArity::pair_chains, true, false},
      {CotSymbol::ald_mm, "α·₋·₋", "o.-.-", SymbolArity::pair_chains, true, false},
      {CotSymbol::beta_p, "β·₊", "B.+", SymbolArity::leaf, false, false},
      {CotSymbol::beta_m, "β·₋", "B.-", SymbolArity::leaf, false, false},
      {CotSymbol::beta_p, "λ·₊", "l.+", SymbolArity::leaf, false, true},
      {CotSymbol::beta_m, "λ·₋", "l.-", SymbolArity::leaf, false, true},
  };
  return table;
}

inline const SymbolInfo& info_of(CotSymbol s) {
  for (const SymbolInfo& i : symbol_table())
    if (i.sym == s && !i.lambda_alias) return i;
  throw internal_consistency_error("unknown COT symbol");
}

struct CotToken {
  enum Kind { symbol, lparen, rparen, lbrace, rbrace, comma, sep, end } kind = end;
  CotSymbol sym = CotSymbol::beta_m;
  bool lambda = false;
};

// Greedy longest-match over both alphabets; whitespace separates but is never
// required.  The standalone middle dot (or '*') is the chain separator.
inline std::vector<CotToken> tokenize_cot(const std::string& text) {
  struct Spelling {
    std::string s;
    CotSymbol sym;
    bool lambda;
  };
  static const std::vector<Spelling> spellings = [] {
    std::vector<Spelling> v;
    for (const SymbolInfo& i : symbol_table()) {
      v.push_back({i.uni, i.sym, i.lambda_alias});
      v.push_back({i.ascii, i.sym, i.lambda_alias});
    }
    std::sort(v.begin(), v.end(),
              [](const Spelling& a, const Spelling& b) { return a.s.size() > b.s.size(); });
    return v;
  }();

  std::vector<CotToken> out;
  std::size_t p = 0;
  while (p < text.size()) {
    char c = text[p];
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
      ++p;
      continue;
    }
    bool matched = false;
    for (const auto& sp : spellings) {
      if (text.compare(p, sp.s.size(), sp.s) == 0) {
        out.push_back({CotToken::symbol, sp.sym, sp.lambda});
        p += sp.s.size();
        matched = true;
        break;
      }
    }
    if (matched) continue;
    CotToken tok;
    if (c == '(') tok.kind = CotToken::lparen;
    else if (c == ')') tok.kind = CotToken::rparen;
    else if (c == '{') tok.kind = CotToken::lbrace;
    else if (c == '}') tok.kind = CotToken::rbrace;
    else if (c == ',') tok.kind = CotToken::comma;
    else if (c == '*') tok.kind = CotToken::sep;
    else if (text.compare(p, 2, "\xc2\xb7") == 0) {  // standalone middle dot
      tok.kind = CotToken::sep;
      ++p;  // second byte consumed below
    } else {
      throw cot_parse_error("unrecognized character '" + text.substr(p, 1) + "' in COT string",
                            int(out.size()));
    }
    out.push_back(tok);
    ++p;
  }
  out.push_back({CotToken::end, CotSymbol::beta_m, false});
  return out;
}

struct CotParser {
  const std::vector<CotToken>& toks;
  std::size_t pos = 0;
  ParseMode mode;

  const CotToken& cur() const { return toks[pos]; }
  [[noreturn]] void fail(const std::string& why) const {
    throw cot_parse_error(why + " (token " + std::to_string(pos) + ")", int(pos));
  }
  void expect(CotToken::Kind k, const char* what) {
    if (cur().kind != k) fail(std::string("expected ") + what);
    ++pos;
  }
  bool at_symbol(CotSymbol s) const {
    return cur().kind == CotToken::symbol && cur().sym == s;
  }
  void check_lambda() const {
    if (cur().lambda && mode == ParseMode::strict)
      fail("λ spellings are only accepted in permissive mode");
  }

  CotNode parse_root() {
    if (!at_symbol(CotSymbol::beta_p)) fail("expected the root symbol β·₊");
    check_lambda();
    ++pos;
    CotNode root;
    root.symbol = CotSymbol::beta_p;
    expect(CotToken::sep, "'·' after the root symbol");
    if (mode == ParseMode::strict && !at_symbol(CotSymbol::al_mp))
      fail("first symbol after the root must be α₋·₊");
    root.children.push_back(parse_chain_any());
    if (cur().kind != CotToken::end) fail("trailing tokens after the chain end");
    return root;
  }

  // entry point allowing either chain direction for the first symbol
  CotNode parse_chain_any() {
    if (cur().kind != CotToken::symbol) fail("expected a chain symbol");
    switch (cur().sym) {
      case CotSymbol::a_pm:
      case CotSymbol::a_mm:
      case CotSymbol::al_mp:
        return parse_chain(false);
      default:
        return parse_chain(true);
    }
  }

  CotNode parse_chain(bool upward) {
    if (cur().kind != CotToken::symbol) fail("expected a chain symbol");
    CotSymbol s = cur().sym;
    if (s == CotSymbol::beta_m) {
      check_lambda();
      ++pos;
      CotNode n;
      n.symbol = CotSymbol::beta_m;
      return n;
    }
    bool slot_plus = false, next_up = upward;
    if (upward) {
      if (s == CotSymbol::a_pp) slot_plus = true;
      else if (s == CotSymbol::a_mp) slot_plus = false;
      else if (s == CotSymbol::al_pm) slot_plus = true, next_up = false;
      else fail("expected an upward chain symbol (a₊·₊, a₋·₊, α₊·₋ or β·₋)");
    } else {
      if (s == CotSymbol::a_pm) slot_plus = true;
      else if (s == CotSymbol::a_mm) slot_plus = false;
      else if (s == CotSymbol::al_mp) slot_plus = false, next_up = true;
      else fail("expected a downward chain symbol (a₊·₋, a₋·₋, α₋·₊ or β·₋)");
    }
    ++pos;
    CotNode n;
    n.symbol = s;
    expect(CotToken::lparen, "'(' before the branch slot");
    n.children.push_back(parse_slot(slot_plus));
    expect(CotToken::rparen, "')' after the branch slot");
    expect(CotToken::sep, "'·' before the chain successor");
    n.children.push_back(parse_chain(next_up));
    return n;
  }

  CotNode parse_slot(bool plus) {
    if (cur().kind != CotToken::symbol) fail("expected a branch symbol");
    CotSymbol s = cur().sym;
    CotNode n;
    n.symbol = s;
    if (plus) {
      if (s == CotSymbol::sigma_p) {
        ++pos;
        return n;
      }
      if (s == CotSymbol::b_pp) return parse_pair_slots(true, true);
      if (s == CotSymbol::b_pm) return parse_pair_slots(true, false);
    } else {
      if (s == CotSymbol::sigma_m) {
        ++pos;
        return n;
      }
      if (s == CotSymbol::b_mm) return parse_pair_slots(false, true);
      if (s == CotSymbol::b_mp) return parse_pair_slots(false, false);
    }
    if (mode == ParseMode::permissive) {
      if (s == CotSymbol::ad_pm) return parse_pair_chains(s, false, true, false);
      if (s == CotSymbol::ad_mp) return parse_pair_chains(s, false, false, true);
      if (s == CotSymbol::ald_pp) return parse_pair_chains(s, true, true, true);
      if (s == CotSymbol::ald_mm) return parse_pair_chains(s, true, false, false);
    }
    fail(plus ? "expected a positive branch symbol (σ₊, b₊₊ or b₊₋)"
              : "expected a negative branch symbol (σ₋, b₋₋ or b₋₊)");
  }

  CotNode parse_pair_slots(bool first_plus, bool same_sign) {
    CotNode n;
    n.symbol = cur().sym;
    n.cyclic = same_sign;
    ++pos;
    const char* open = same_sign ? "'{'" : "'('";
    const char* close = same_sign ? "'}'" : "')'";
    expect(same_sign ? CotToken::lbrace : CotToken::lparen, open);
    n.children.push_back(parse_slot(first_plus));
    expect(CotToken::comma, "','");
    n.children.push_back(parse_slot(same_sign ? first_plus : !first_plus));
    expect(same_sign ? CotToken::rbrace : CotToken::rparen, close);
    return n;
  }

  CotNode parse_pair_chains(CotSymbol s, bool cyclic, bool first_up, bool second_up) {
    CotNode n;
    n.symbol = s;
    n.cyclic = cyclic;
    ++pos;
    expect(cyclic ? CotToken::lbrace : CotToken::lparen, cyclic ? "'{'" : "'('");
    n.children.push_back(parse_chain(first_up));
    expect(CotToken::comma, "','");
    n.children.push_back(parse_chain(second_up));
    expect(cyclic ? CotToken::rbrace : CotToken::rparen, cyclic ? "'}'" : "')'");
    return n;
  }
};

}  // namespace detail

inline const char* symbol_name(CotSymbol s, bool ascii = false) {
  const detail::SymbolInfo& i = detail::info_of(s);
  return ascii ? i.ascii : i.uni;
}

inline SymbolArity symbol_arity(CotSymbol s) { return detail::info_of(s).arity; }

inline CotTree parse_cot(const std::string& text, ParseMode mode = ParseMode::strict) {
  auto toks = detail::tokenize_cot(text);
  detail::CotParser p{toks, 0, mode};
  CotTree t;
  t.root = p.parse_root();
  return t;
}

/* Canonical emission: cyclic children are ordered by their Unicode emission so
   equal trees always print identically regardless of construction order (and
   of the requested output alphabet). */
inline std::string emit_node(const CotNode& n, bool ascii = false) {
  const detail::SymbolInfo& info = detail::info_of(n.symbol);
  const std::string sep = ascii ? "*" : " · ";
  auto arity_error = [&] {
    throw internal_consistency_error(std::string("malformed COT node for symbol ") + info.uni);
  };
  switch (info.arity) {
    case SymbolArity::leaf:
      if (n.symbol == CotSymbol::beta_p) {  // root: chain follows
        if (n.children.size() != 1) arity_error();
        return std::string(symbol_name(n.symbol, ascii)) + sep + emit_node(n.children[0], ascii);
      }
      if (!n.children.empty()) arity_error();
      return symbol_name(n.symbol, ascii);
    case SymbolArity::slot_chain: {
      if (n.children.size() != 2) arity_error();
      return std::string(symbol_name(n.symbol, ascii)) + "(" + emit_node(n.children[0], ascii) +
             ")" + sep + emit_node(n.children[1], ascii);
    }
    case SymbolArity::pair_slots:
    case SymbolArity::pair_chains: {
      if (n.children.size() != 2) arity_error();
      std::string a = emit_node(n.children[0], ascii), b = emit_node(n.children[1], ascii);
      if (info.cyclic) {
        std::string ka = ascii ? emit_node(n.children[0]) : a;
        std::string kb = ascii ? emit_node(n.children[1]) : b;
        if (kb < ka) std::swap(a, b);
      }
      return std::string(symbol_name(n.symbol, ascii)) + (info.cyclic ? "{" : "(") + a + "," + b +
             (info.cyclic ? "}" : ")");
    }
  }
  throw internal_consistency_error("unreachable COT arity");
}

inline std::string emit_cot(const CotTree& t, bool ascii = false) {
  if (t.root.symbol != CotSymbol::beta_p)
    throw internal_consistency_error("COT tree root must be β·₊");
  return emit_node(t.root, ascii);
}

// Structural equality: values ignored, cyclic children unordered.
inline bool cot_equal(const CotTree& a, const CotTree& b) {
  return emit_cot(a) == emit_cot(b);
}

inline std::size_t count_nodes(const CotNode& n) {
  std::size_t c = 1;
  for (const CotNode& k : n.children) c += count_nodes(k);
  return c;
}

inline nlohmann::json cot_to_json(const CotNode& n) {
  nlohmann::json j;
  j["symbol"] = symbol_name(n.symbol);
  j["value"] = n.value;
  j["weight"] = n.weight_to_parent;
  if (n.region >= 0) j["region"] = n.region;
  if (!n.children.empty()) {
    nlohmann::json kids = nlohmann::json::array();
    for (const CotNode& k : n.children) kids.push_back(cot_to_json(k));
    j["children"] = std::move(kids);
    j["cyclic"] = n.cyclic;
  }
  return j;
}

}  // namespace tfda
