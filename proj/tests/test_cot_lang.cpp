#include <doctest.h>

#include <string>
#include <vector>

#include "cot_random.hpp"
#include "tfda/cot_lang.hpp"

using namespace tfda;

namespace {

const std::string kFreeDecay = "β·₊ · α₋·₊(σ₋) · α₊·₋(σ₊) · β·₋";
const std::string kEnstrophy =
    "β·₊ · α₋·₊(b₋₊(b₋₋{b₋₋{σ₋,σ₋},b₋₋{b₋₋{b₋₋{σ₋,σ₋},σ₋},σ₋}},σ₊)) · "
    "a₊·₊(σ₊) · α₊·₋(b₊₊{b₊₊{σ₊,σ₊},σ₊}) · β·₋";

int parse_error_token(const std::string& s, ParseMode mode) {
  try {
    parse_cot(s, mode);
  } catch (const cot_parse_error& e) {
    return e.token_index;
  }
  return -2;  // no error raised
}

}  // namespace

TEST_SUITE("cot_lang") {

TEST_CASE("free-decay string parses and re-emits verbatim") {
  CotTree t = parse_cot(kFreeDecay, ParseMode::strict);
  CHECK(count_nodes(t.root) == 6);
  CHECK(t.root.symbol == CotSymbol::beta_p);
  REQUIRE(t.root.children.size() == 1);
  const CotNode& first = t.root.children[0];
  CHECK(first.symbol == CotSymbol::al_mp);
  REQUIRE(first.children.size() == 2);
  CHECK(first.children[0].symbol == CotSymbol::sigma_m);
  CHECK(first.children[1].symbol == CotSymbol::al_pm);
  // no cyclic nodes, so canonical emission reproduces the input exactly
  CHECK(emit_cot(t) == kFreeDecay);
  CHECK(emit_cot(t, true) == "B.+*o-.+(s-)*o+.-(s+)*B.-");
}

TEST_CASE("nested 24-symbol string parses in strict mode") {
  CotTree t = parse_cot(kEnstrophy, ParseMode::strict);
  CHECK(count_nodes(t.root) == 24);
  // canonical emission may reorder curly children but stays equal and stable
  CotTree u = parse_cot(emit_cot(t), ParseMode::strict);
  CHECK(cot_equal(t, u));
  CHECK(emit_cot(u) == emit_cot(t));
  CotTree a = parse_cot(emit_cot(t, true), ParseMode::strict);
  CHECK(cot_equal(t, a));
}

TEST_CASE("alphabets mix freely within one string") {
  CotTree t = parse_cot("B.+ · o-.+(s-)*α₊·₋(σ₊) · B.-", ParseMode::strict);
  CHECK(cot_equal(t, parse_cot(kFreeDecay)));
}

TEST_CASE("curly children are unordered, round children are not") {
  CotTree a = parse_cot("β·₊ · α₋·₊(σ₋) · α₊·₋(b₊₊{σ₊,b₊₊{σ₊,σ₊}}) · β·₋");
  CotTree b = parse_cot("β·₊ · α₋·₊(σ₋) · α₊·₋(b₊₊{b₊₊{σ₊,σ₊},σ₊}) · β·₋");
  CHECK(cot_equal(a, b));
  CHECK(emit_cot(a) == emit_cot(b));

  CotTree c = parse_cot("β·₊ · α₋·₊(σ₋) · a₊·₊(σ₊) · a₋·₊(σ₋) · β·₋");
  CotTree d = parse_cot("β·₊ · α₋·₊(σ₋) · a₋·₊(σ₋) · a₊·₊(σ₊) · β·₋");
  CHECK_FALSE(cot_equal(c, d));
}

TEST_CASE("values and weights never affect equality") {
  CotTree a = parse_cot(kFreeDecay);
  CotTree b = parse_cot(kFreeDecay);
  b.root.children[0].value = 3.25;
  b.root.children[0].weight_to_parent = 17.0;
  b.root.children[0].children[0].value = -9.0;
  CHECK(cot_equal(a, b));
}

TEST_CASE("strict mode pins the first chain symbol") {
  CHECK(parse_error_token("β·₊ · σ₊", ParseMode::strict) == 2);
  CHECK(parse_error_token("β·₊ · σ₊", ParseMode::permissive) == 2);
  const std::string s = "β·₊ · a₊·₊(σ₊) · β·₋";
  CHECK(parse_error_token(s, ParseMode::strict) == 2);
  CHECK(count_nodes(parse_cot(s, ParseMode::permissive).root) == 4);
}

TEST_CASE("dotted-pair symbols are permissive-only") {
  const std::string s = "β·₊ · α₋·₊(a·₋·₊(β·₋,β·₋)) · β·₋";
  CHECK(parse_error_token(s, ParseMode::strict) == 4);
  CotTree t = parse_cot(s, ParseMode::permissive);
  CHECK(count_nodes(t.root) == 6);
  const CotNode& pair = t.root.children[0].children[0];
  CHECK(pair.symbol == CotSymbol::ad_mp);
  CHECK_FALSE(pair.cyclic);

  const std::string cyc = "β·₊ · α₋·₊(α·₋·₋{a₋·₋(σ₋) · β·₋,β·₋}) · β·₋";
  CotTree u = parse_cot(cyc, ParseMode::permissive);
  CHECK(parse_error_token(cyc, ParseMode::strict) == 4);
  CHECK(u.root.children[0].children[0].cyclic);
  // the two inner chains are order-free
  CotTree v = parse_cot("β·₊ · α₋·₊(α·₋·₋{β·₋,a₋·₋(σ₋) · β·₋}) · β·₋", ParseMode::permissive);
  CHECK(cot_equal(u, v));
}

TEST_CASE("lambda spellings alias beta in permissive mode only") {
  const std::string s = "β·₊ · α₋·₊(σ₋) · λ·₋";
  CHECK(parse_error_token(s, ParseMode::strict) == 7);
  CotTree t = parse_cot(s, ParseMode::permissive);
  CHECK(cot_equal(t, parse_cot("β·₊ · α₋·₊(σ₋) · β·₋", ParseMode::permissive)));
  CHECK(emit_cot(t) == "β·₊ · α₋·₊(σ₋) · β·₋");  // emitted as β, not λ
  CHECK(parse_error_token("l.+ · α₋·₊(σ₋) · β·₋", ParseMode::strict) == 0);
  CHECK(count_nodes(parse_cot("l.+*o-.+(s-)*l.-", ParseMode::permissive).root) == 4);
}

TEST_CASE("syntax errors carry the offending token index") {
  CHECK(parse_error_token("", ParseMode::strict) == 0);
  CHECK(parse_error_token("σ₊", ParseMode::strict) == 0);
  CHECK(parse_error_token("β·₊ x", ParseMode::strict) == 1);           // tokenizer
  CHECK(parse_error_token("β·₊ · α₋·₊(σ₋ · β·₋", ParseMode::strict) == 5);  // missing ')'
  CHECK(parse_error_token("β·₊ · α₋·₊(σ₊) · β·₋", ParseMode::strict) == 4);  // wrong slot sign
  CHECK(parse_error_token("β·₊ · α₋·₊(σ₋) · β·₋ · β·₋", ParseMode::strict) == 8);  // trailing
  CHECK(parse_error_token("β·₊ · α₋·₊(b₋₋(σ₋,σ₋)) · β·₋", ParseMode::strict) == 5);  // wrong bracket
  CHECK(parse_error_token("β·₊ · α₋·₊(b₋₊{σ₋,σ₊}) · β·₋", ParseMode::strict) == 5);
}

TEST_CASE("separator is required between chain symbols") {
  CHECK(parse_error_token("β·₊ α₋·₊(σ₋) · β·₋", ParseMode::strict) == 1);
  CHECK(parse_error_token("β·₊ · α₋·₊(σ₋) β·₋", ParseMode::strict) == 6);
}

TEST_CASE("random strict derivations round-trip") {
  for (std::uint64_t seed = 1; seed <= 150; ++seed) {
    tfda_test::CotStringGen gen(seed, false);
    std::string s = gen();
    CAPTURE(s);
    CotTree t = parse_cot(s, ParseMode::strict);
    std::string canon = emit_cot(t);
    CotTree t2 = parse_cot(canon, ParseMode::strict);
    CHECK(emit_cot(t2) == canon);
    CHECK(cot_equal(t, t2));
    // strict acceptance implies permissive acceptance
    CHECK(cot_equal(parse_cot(s, ParseMode::permissive), t));
    // ASCII surface form round-trips too
    CotTree ta = parse_cot(emit_cot(t, true), ParseMode::strict);
    CHECK(cot_equal(ta, t));
  }
}

TEST_CASE("random permissive derivations round-trip") {
  for (std::uint64_t seed = 1; seed <= 150; ++seed) {
    tfda_test::CotStringGen gen(seed, true);
    std::string s = gen();
    CAPTURE(s);
    CotTree t = parse_cot(s, ParseMode::permissive);
    std::string canon = emit_cot(t);
    CotTree t2 = parse_cot(canon, ParseMode::permissive);
    CHECK(emit_cot(t2) == canon);
    CotTree ta = parse_cot(emit_cot(t, true), ParseMode::permissive);
    CHECK(cot_equal(ta, t));
  }
}

TEST_CASE("ascii generator output parses identically") {
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    tfda_test::CotStringGen uni(seed, false, false), asc(seed, false, true);
    CHECK(cot_equal(parse_cot(uni(), ParseMode::strict), parse_cot(asc(), ParseMode::strict)));
  }
}

TEST_CASE("json serialization reflects structure") {
  CotTree t = parse_cot(kFreeDecay);
  t.root.children[0].value = -0.7;
  auto j = cot_to_json(t.root);
  CHECK(j["symbol"] == "β·₊");
  CHECK(j["children"].size() == 1);
  CHECK(j["children"][0]["symbol"] == "α₋·₊");
  CHECK(j["children"][0]["value"] == doctest::Approx(-0.7));
  CHECK(j["children"][0]["children"].size() == 2);
}

}  // TEST_SUITE
