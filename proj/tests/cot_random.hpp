#pragma once
// Random COT strings derived from the grammar, for round-trip testing.
// Cyclic children are emitted in random order so canonicalization is exercised.

#include <random>
#include <string>

#include "tfda/cot_lang.hpp"

namespace tfda_test {

class CotStringGen {
 public:
  CotStringGen(std::uint64_t seed, bool permissive, bool ascii = false)
      : rng_(seed), permissive_(permissive), ascii_(ascii) {}

  std::string operator()() {
    std::string s = name(tfda::CotSymbol::beta_p);
    s += sep();
    // strict grammar: the chain must open with the downward-to-upward turn
    s += name(tfda::CotSymbol::al_mp) + "(" + slot(false, 0) + ")" + sep();
    s += chain(true, 0);
    return s;
  }

 private:
  std::mt19937_64 rng_;
  bool permissive_, ascii_;

  int pick(int n) { return int(rng_() % std::uint64_t(n)); }
  std::string name(tfda::CotSymbol s) { return tfda::symbol_name(s, ascii_); }
  std::string sep() { return ascii_ ? "*" : " · "; }

  std::string chain(bool up, int depth) {
    using S = tfda::CotSymbol;
    if (depth > 5 || pick(3) == 0) return name(S::beta_m);
    int c = pick(3);
    if (up) {
      if (c == 0) return name(S::a_pp) + "(" + slot(true, depth + 1) + ")" + sep() + chain(true, depth + 1);
      if (c == 1) return name(S::a_mp) + "(" + slot(false, depth + 1) + ")" + sep() + chain(true, depth + 1);
      return name(S::al_pm) + "(" + slot(true, depth + 1) + ")" + sep() + chain(false, depth + 1);
    }
    if (c == 0) return name(S::a_pm) + "(" + slot(true, depth + 1) + ")" + sep() + chain(false, depth + 1);
    if (c == 1) return name(S::a_mm) + "(" + slot(false, depth + 1) + ")" + sep() + chain(false, depth + 1);
    return name(S::al_mp) + "(" + slot(false, depth + 1) + ")" + sep() + chain(true, depth + 1);
  }

  std::string slot(bool plus, int depth) {
    using S = tfda::CotSymbol;
    int n_choices = (permissive_ && depth <= 3) ? 7 : 3;
    int c = (depth > 4) ? 0 : pick(n_choices);
    if (c == 0) return name(plus ? S::sigma_p : S::sigma_m);
    if (c == 1)
      return name(plus ? S::b_pp : S::b_mm) + "{" + slot(plus, depth + 1) + "," +
             slot(plus, depth + 1) + "}";
    if (c == 2)
      return name(plus ? S::b_pm : S::b_mp) + "(" + slot(plus, depth + 1) + "," +
             slot(!plus, depth + 1) + ")";
    if (c == 3)
      return name(S::ad_pm) + "(" + chain(true, depth + 1) + "," + chain(false, depth + 1) + ")";
    if (c == 4)
      return name(S::ad_mp) + "(" + chain(false, depth + 1) + "," + chain(true, depth + 1) + ")";
    if (c == 5)
      return name(S::ald_pp) + "{" + chain(true, depth + 1) + "," + chain(true, depth + 1) + "}";
    return name(S::ald_mm) + "{" + chain(false, depth + 1) + "," + chain(false, depth + 1) + "}";
  }
};

}  // namespace tfda_test
