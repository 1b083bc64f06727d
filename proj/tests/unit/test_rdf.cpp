#include <doctest.h>

#include <algorithm>
#include <map>
#include <random>
#include <set>

#include "ontoforge/rdf.hpp"
#include "ontoforge/vocab.hpp"
#include "support/support.hpp"

using namespace ontoforge;

namespace {

Term iri(const std::string& s) { return Term::iri("http://e/" + s); }

std::vector<Triple> linear_scan(const Graph& g, const std::optional<Term>& s,
                                const std::optional<Term>& p, const std::optional<Term>& o) {
  std::vector<Triple> out;
  for (const auto& t : g.triples()) {
    if ((!s || t.subject == *s) && (!p || t.predicate == *p) && (!o || t.object == *o)) {
      out.push_back(t);
    }
  }
  return out;
}

// Isomorphism oracle: try every bijection between the blank labels.
bool isomorphic_by_enumeration(const Graph& a, const Graph& b) {
  if (a.size() != b.size()) return false;
  auto labels = [](const Graph& g) {
    std::set<std::string> out;
    for (const auto& t : g.triples()) {
      if (t.subject.is_blank()) out.insert(t.subject.value());
      if (t.object.is_blank()) out.insert(t.object.value());
    }
    return std::vector<std::string>(out.begin(), out.end());
  };
  auto la = labels(a);
  auto lb = labels(b);
  if (la.size() != lb.size()) return false;
  std::sort(lb.begin(), lb.end());
  do {
    std::map<std::string, std::string> m;
    for (std::size_t i = 0; i < la.size(); ++i) m[la[i]] = lb[i];
    auto map_term = [&](const Term& t) { return t.is_blank() ? Term::blank(m[t.value()]) : t; };
    bool ok = std::all_of(a.triples().begin(), a.triples().end(), [&](const Triple& t) {
      return b.contains(Triple{map_term(t.subject), t.predicate, map_term(t.object)});
    });
    if (ok) return true;
  } while (std::next_permutation(lb.begin(), lb.end()));
  return false;
}

Graph random_blank_graph(std::mt19937& rng, std::size_t blanks, std::size_t triples) {
  std::uniform_int_distribution<std::size_t> pick_blank(0, blanks - 1);
  std::uniform_int_distribution<int> pick_pred(0, 2);
  std::uniform_int_distribution<int> coin(0, 2);
  Graph g;
  while (g.size() < triples) {
    Term s = Term::blank("b" + std::to_string(pick_blank(rng)));
    Term p = iri("p" + std::to_string(pick_pred(rng)));
    Term o = coin(rng) == 0 ? iri("x" + std::to_string(pick_pred(rng)))
                            : Term::blank("b" + std::to_string(pick_blank(rng)));
    g.insert(s, p, o);
  }
  return g;
}

Graph relabel(const Graph& g, std::mt19937& rng) {
  std::set<std::string> labels;
  for (const auto& t : g.triples()) {
    if (t.subject.is_blank()) labels.insert(t.subject.value());
    if (t.object.is_blank()) labels.insert(t.object.value());
  }
  std::vector<std::string> from(labels.begin(), labels.end());
  std::vector<std::string> to;
  for (std::size_t i = 0; i < from.size(); ++i) to.push_back("z" + std::to_string(i));
  std::shuffle(to.begin(), to.end(), rng);
  std::map<std::string, std::string> m;
  for (std::size_t i = 0; i < from.size(); ++i) m[from[i]] = to[i];
  Graph out;
  auto map_term = [&](const Term& t) { return t.is_blank() ? Term::blank(m[t.value()]) : t; };
  auto triples = g.triples();
  std::shuffle(triples.begin(), triples.end(), rng);
  for (const auto& t : triples) out.insert(map_term(t.subject), t.predicate, map_term(t.object));
  return out;
}

}  // namespace

TEST_CASE("terms enforce their invariants") {
  CHECK_THROWS_AS(Term::iri(""), InvalidTerm);
  CHECK_THROWS_AS(Term::iri("http://e/a b"), InvalidTerm);
  CHECK_THROWS_AS(Term::literal("x", vocab::kXsdString, "en"), InvalidTerm);
  CHECK_NOTHROW(Term::literal("x", vocab::kRdfLangString, "en"));
  Graph g;
  CHECK_THROWS_AS(g.insert(Term::literal("s"), iri("p"), iri("o")), InvalidTerm);
  CHECK_THROWS_AS(g.insert(iri("s"), Term::blank("p"), iri("o")), InvalidTerm);
}

TEST_CASE("parse_turtle: basic documents") {
  SUBCASE("single statement") {
    auto doc = parse_turtle("@prefix ex: <http://e/> . ex:a ex:b ex:c .");
    REQUIRE(doc.graph.size() == 1);
    CHECK(doc.graph.triples()[0] == Triple{iri("a"), iri("b"), iri("c")});
    CHECK(doc.prefixes.find("ex") == "http://e/");
  }
  SUBCASE("empty input") {
    auto doc = parse_turtle("");
    CHECK(doc.graph.empty());
    CHECK(doc.prefixes.empty());
  }
  SUBCASE("undeclared prefix") {
    try {
      parse_turtle("ex:a ex:b ex:c .");
      FAIL("expected UnknownPrefix");
    } catch (const UnknownPrefix& e) {
      CHECK(e.prefix() == "ex");
      CHECK(e.pos().line == 1);
      CHECK(e.pos().column == 1);
    }
  }
}

TEST_CASE("parse_turtle: subset features") {
  const char* doc_text = R"(# comment
@prefix ex: <http://e/> .
PREFIX xsd: <http://www.w3.org/2001/XMLSchema#>
ex:a a ex:Thing ;
     ex:name "A \"quoted\"\tname"@en , "plain" ;
     ex:age 42 ;
     ex:score -1.5 ;
     ex:big 1e3 ;
     ex:ok true ;
     ex:when "2024-01-01"^^xsd:date ;
     ex:link <http://other/x> ;
     ex:friend _:b1 .
_:b1 ex:name "friend". ex:c ex:d ex:e.
)";
  auto doc = parse_turtle(doc_text);
  const auto& g = doc.graph;
  CHECK(g.size() == 12);
  CHECK(g.has(iri("a"), Term::iri(vocab::kRdfType), iri("Thing")));
  CHECK(g.has(iri("a"), iri("name"), Term::literal("A \"quoted\"\tname", "", "en")));
  CHECK(g.has(iri("a"), iri("age"), Term::literal("42", vocab::kXsdInteger)));
  CHECK(g.has(iri("a"), iri("score"), Term::literal("-1.5", vocab::kXsdDecimal)));
  CHECK(g.has(iri("a"), iri("big"), Term::literal("1e3", vocab::kXsdDouble)));
  CHECK(g.has(iri("a"), iri("ok"), Term::literal("true", vocab::kXsdBoolean)));
  CHECK(g.has(iri("a"), iri("when"),
              Term::literal("2024-01-01", "http://www.w3.org/2001/XMLSchema#date")));
  CHECK(g.has(Term::blank("b1"), iri("name"), Term::literal("friend")));
  CHECK(g.has(iri("c"), iri("d"), iri("e")));
  CHECK(doc.prefixes.size() == 2);
}

TEST_CASE("parse_turtle: relative IRIs resolve against the base") {
  auto doc = parse_turtle("<#a> <p> <http://abs/o> .", std::string("http://base/doc"));
  REQUIRE(doc.graph.size() == 1);
  const auto& t = doc.graph.triples()[0];
  CHECK(t.subject.value() == "http://base/doc#a");
  CHECK(t.predicate.value() == "http://base/p");
  CHECK(t.object.value() == "http://abs/o");
}

TEST_CASE("parse_turtle: errors carry positions") {
  try {
    parse_turtle("@prefix ex: <http://e/> .\nex:a ex:b <http://e/c .\n");
    FAIL("expected SyntaxError");
  } catch (const SyntaxError& e) {
    CHECK(e.pos().line == 2);
    CHECK(e.pos().column == 11);
  }
  CHECK_THROWS_AS(parse_turtle("@prefix ex: <http://e/> .\nex:a ex:b ex:c"), SyntaxError);
  CHECK_THROWS_AS(parse_turtle("@prefix ex: <http://e/> . ex:a ex:b \"open ."), SyntaxError);
  CHECK_THROWS_AS(parse_turtle("@prefix ex: <http://e/> . ex:a ex:b [ ex:c ex:d ] ."), SyntaxError);
  CHECK_THROWS_AS(parse_turtle("@prefix ex: <http://e/> . \"lit\" ex:b ex:c ."), SyntaxError);
}

TEST_CASE("serialize_turtle: deterministic grouped output") {
  PrefixMap pm;
  pm.set("ex", "http://e/");
  SUBCASE("empty graph") {
    CHECK(serialize_turtle(Graph{}, pm) == "@prefix ex: <http://e/> .\n");
    CHECK(serialize_turtle(Graph{}, PrefixMap{}).empty());
  }
  SUBCASE("shared subject uses ';'") {
    Graph g;
    g.insert(iri("s"), iri("q"), Term::literal("x"));
    g.insert(iri("s"), iri("p"), iri("o"));
    auto text = serialize_turtle(g, pm);
    CHECK(text == "@prefix ex: <http://e/> .\n\nex:s ex:p ex:o ;\n    ex:q \"x\" .\n");
    auto back = parse_turtle(text);
    CHECK(back.graph == g);
  }
  SUBCASE("insertion order does not matter") {
    std::mt19937 rng(7);
    Graph g = testsupport::random_graph(rng, 40);
    auto triples = g.triples();
    std::shuffle(triples.begin(), triples.end(), rng);
    Graph h;
    for (const auto& t : triples) h.insert(t);
    CHECK(serialize_turtle(g, pm) == serialize_turtle(h, pm));
  }
}

TEST_CASE("Turtle round trip over random blank-free graphs") {
  std::mt19937 rng(11);
  PrefixMap pm;
  pm.set("r", "http://r/");
  for (int i = 0; i < 30; ++i) {
    Graph g = testsupport::random_graph(rng, 1 + i * 3);
    g.insert(Term::iri("http://r/n0"), Term::iri("http://r/label"),
             Term::literal("line\nbreak \"q\" \\", "", "fr"));
    g.insert(Term::iri("http://other/x"), Term::iri("http://r/v"),
             Term::literal("007", vocab::kXsdString));
    auto text = serialize_turtle(g, i % 2 == 0 ? pm : PrefixMap{});
    auto back = parse_turtle(text);
    CHECK(back.graph == g);
  }
}

TEST_CASE("match agrees with a linear scan") {
  std::mt19937 rng(2024);
  Graph g = testsupport::random_graph(rng, 200, 12, 4);
  REQUIRE(g.size() == 200);
  CHECK(match(g, std::nullopt, std::nullopt, std::nullopt) == g.triples());

  std::uniform_int_distribution<int> coin(0, 1);
  std::uniform_int_distribution<std::size_t> pick(0, g.size() - 1);
  for (int i = 0; i < 50; ++i) {
    const Triple& seed = g.triples()[pick(rng)];
    std::optional<Term> s, p, o;
    if (coin(rng)) s = seed.subject;
    if (coin(rng)) p = seed.predicate;
    if (coin(rng)) o = seed.object;
    if (i % 10 == 0) s = Term::iri("http://r/absent");
    CHECK(match(g, s, p, o) == linear_scan(g, s, p, o));
  }

  Graph one;
  one.insert(iri("a"), iri("b"), iri("c"));
  CHECK(match(one, iri("a"), std::nullopt, std::nullopt).size() == 1);
}

TEST_CASE("graph set semantics, erase and freeze") {
  Graph g;
  CHECK(g.insert(iri("a"), iri("b"), iri("c")));
  CHECK_FALSE(g.insert(iri("a"), iri("b"), iri("c")));
  g.insert(iri("a"), iri("b"), iri("d"));
  CHECK(g.erase(Triple{iri("a"), iri("b"), iri("c")}));
  CHECK(g.size() == 1);
  CHECK(match(g, iri("a"), std::nullopt, std::nullopt).size() == 1);
  g.freeze();
  CHECK_THROWS_AS(g.insert(iri("x"), iri("y"), iri("z")), Error);
}

TEST_CASE("merge") {
  Graph a;
  a.insert(iri("a1"), iri("p"), iri("x"));
  a.insert(iri("a2"), iri("p"), iri("x"));
  a.insert(iri("a3"), iri("p"), iri("x"));
  Graph b;
  for (int i = 0; i < 4; ++i) b.insert(iri("b" + std::to_string(i)), iri("p"), iri("y"));

  CHECK(merge(a, Graph{}) == a);
  CHECK(merge(a, b).size() == 7);
  CHECK(merge(a, a).size() == a.size());

  SUBCASE("blank nodes of the right operand are renamed") {
    Graph l;
    l.insert(Term::blank("b"), iri("p"), iri("x"));
    Graph r;
    r.insert(Term::blank("b"), iri("p"), iri("y"));
    Graph m = merge(l, r);
    CHECK(m.size() == 2);
    CHECK(m.match(Term::blank("b"), std::nullopt, std::nullopt).size() == 1);
    CHECK(m.match(std::nullopt, std::nullopt, iri("y"))[0].subject != Term::blank("b"));
  }

  SUBCASE("commutative and associative up to isomorphism") {
    std::mt19937 rng(5);
    for (int i = 0; i < 15; ++i) {
      Graph x = random_blank_graph(rng, 3, 4);
      Graph y = random_blank_graph(rng, 3, 4);
      Graph z = testsupport::random_graph(rng, 5);
      CHECK(graphs_equal(merge(x, y), merge(y, x)));
      CHECK(graphs_equal(merge(merge(x, y), z), merge(x, merge(y, z))));
    }
  }
}

TEST_CASE("graphs_equal") {
  std::mt19937 rng(99);
  Graph g = testsupport::random_graph(rng, 20);
  CHECK(graphs_equal(g, g));
  Graph smaller = g;
  smaller.erase(g.triples().front());
  CHECK_FALSE(graphs_equal(g, smaller));

  SUBCASE("agrees with exhaustive bijection search") {
    for (int i = 0; i < 60; ++i) {
      Graph a = random_blank_graph(rng, 4, 6);
      Graph b = (i % 3 == 0) ? random_blank_graph(rng, 4, 6) : relabel(a, rng);
      CHECK(graphs_equal(a, b) == isomorphic_by_enumeration(a, b));
      if (i % 3 != 0) CHECK(graphs_equal(a, b));
    }
  }
}

TEST_CASE("prefix map expand and compact are inverse") {
  PrefixMap pm;
  pm.set("ex", "http://e/");
  pm.set("exa", "http://e/a/");
  pm.set("", "http://default#");
  for (std::string q : {"ex:b", "exa:c", ":Thing", "ex:has-part", "ex:v1.2"}) {
    auto full = pm.expand(q);
    REQUIRE(full.has_value());
    CHECK(pm.compact(*full) == q);
  }
  CHECK_FALSE(pm.expand("nope:x").has_value());
  CHECK_FALSE(pm.compact("http://elsewhere/x").has_value());
  CHECK_FALSE(pm.compact("http://e/a b").has_value());
  pm.set("ex", "http://changed/");
  CHECK(pm.size() == 3);
}

TEST_CASE("numeric literals compare by value") {
  auto integer = [](const char* v) { return Term::literal(v, vocab::kXsdInteger); };
  auto decimal = [](const char* v) { return Term::literal(v, vocab::kXsdDecimal); };
  CHECK(compare_numeric(integer("30"), decimal("30.0")) == std::strong_ordering::equal);
  CHECK(compare_numeric(integer("100"), integer("30")) == std::strong_ordering::greater);
  CHECK(compare_numeric(decimal("-2.5"), integer("-2")) == std::strong_ordering::less);
  CHECK(compare_numeric(decimal("0.10"), decimal(".1")) == std::strong_ordering::equal);
  CHECK(compare_numeric(integer("-0"), integer("0")) == std::strong_ordering::equal);
  CHECK(compare_numeric(Term::literal("1e2", vocab::kXsdDouble), integer("99")) ==
        std::strong_ordering::greater);
  CHECK_FALSE(compare_numeric(Term::literal("abc"), integer("1")).has_value());
  CHECK_FALSE(is_numeric(Term::literal("12x", vocab::kXsdInteger)));
}
