#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>

#include "doctest.h"
#include "helpers.hpp"
#include "modelcc/grammar.hpp"

using namespace modelcc;

namespace {

// A selection with k basic alternatives.
Model selection_model(int k) {
  ModelBuilder b("Sel");
  b.add_element("Choice", ElementKind::Selection).start();
  for (int i = 0; i < k; ++i) {
    b.add_element("Alt" + std::to_string(i), ElementKind::Basic)
        .supertype("Choice")
        .pattern("a" + std::to_string(i));
  }
  return b.build().take();
}

size_t count_kind(const Grammar& g, ProductionKind kind) {
  return std::count_if(g.productions.begin(), g.productions.end(),
                       [&](const Production& p) { return p.kind == kind; });
}

}  // namespace

TEST_CASE("selection with k subelements yields k unit productions") {
  for (int k : {1, 2, 6}) {
    CAPTURE(k);
    Result<Grammar> g = generate_grammar(selection_model(k));
    REQUIRE(g.ok());
    CHECK(count_kind(g.value(), ProductionKind::SelectionUnit) == static_cast<size_t>(k));
  }
}

TEST_CASE("unbounded separated repetition yields the recursive-plus-base pair") {
  ModelBuilder b("Rep");
  b.add_element("Doc", ElementKind::Composite).start()
      .add_member("items", "Item").multiplicity(1, Multiplicity::kUnbounded).separator(",");
  b.add_element("Item", ElementKind::Basic).pattern("[a-z]+");
  Result<Grammar> g = generate_grammar(b.build().take());
  REQUIRE(g.ok());
  REQUIRE(count_kind(g.value(), ProductionKind::ListRecursive) == 1);
  REQUIRE(count_kind(g.value(), ProductionKind::ListBase) == 1);

  int sep = -1;
  for (size_t i = 0; i < g.value().terminals.size(); ++i) {
    if (g.value().terminals[i].fixed_text && g.value().terminals[i].id == ",")
      sep = static_cast<int>(i);
  }
  REQUIRE(sep >= 0);
  for (const Production& p : g.value().productions) {
    bool has_sep = std::any_of(p.rhs.begin(), p.rhs.end(), [&](Symbol s) {
      return s.kind == Symbol::Terminal && s.index == sep;
    });
    if (p.kind == ProductionKind::ListRecursive) {
      CHECK(has_sep);
      // Left-leaning: the list nonterminal recurses in the first slot.
      REQUIRE(p.rhs.size() == 3);
      CHECK(p.rhs[0] == Symbol::nt(p.lhs));
    }
    if (p.kind == ProductionKind::ListBase) CHECK_FALSE(has_sep);
  }
}

TEST_CASE("zero-minimum repetition derives the empty list") {
  ModelBuilder b("Rep0");
  b.add_element("Doc", ElementKind::Composite).start()
      .add_member("items", "Item").multiplicity(0, Multiplicity::kUnbounded);
  b.add_element("Item", ElementKind::Basic).pattern("[a-z]+");
  Result<Grammar> g = generate_grammar(b.build().take());
  REQUIRE(g.ok());
  bool has_epsilon_base = false;
  for (const Production& p : g.value().productions) {
    if (p.kind == ProductionKind::ListBase && p.rhs.empty()) has_epsilon_base = true;
  }
  CHECK(has_epsilon_base);
}

TEST_CASE("optional member doubles the containing production") {
  ModelBuilder b("Opt");
  b.add_element("Doc", ElementKind::Composite).start()
      .add_member("a", "Word").add_member("b", "Word").optional();
  b.add_element("Word", ElementKind::Basic).pattern("[a-z]+");
  Result<Grammar> g = generate_grammar(b.build().take());
  REQUIRE(g.ok());
  int doc_nt = g.value().nt_by_element.at("Doc");
  CHECK(g.value().prods_by_lhs[doc_nt].size() == 2);
}

TEST_CASE("composite member delimiters become fixed terminals") {
  Model json = testing::gallery_model("json");
  Result<Grammar> g = generate_grammar(json);
  REQUIRE(g.ok());
  std::string dump = dump_grammar(g.value());
  CHECK(dump.find("<JSONPair> ::= JSONString \":\" <JSONValue>") != std::string::npos);
  CHECK(dump.find("<JSONPairList>") != std::string::npos);
}

TEST_CASE("arith grammar lists the expected productions") {
  Model arith = testing::gallery_model("arith");
  Result<Grammar> g = generate_grammar(arith);
  REQUIRE(g.ok());
  std::string dump = dump_grammar(g.value());
  CHECK(dump.find("<Expression> ::= <BinaryExpression>") != std::string::npos);
  CHECK(dump.find("<BinaryExpression> ::= <Expression> <Operator> <Expression>") !=
        std::string::npos);
  CHECK(dump.find("<ExpressionGroup> ::= \"(\" <Expression> \")\"") != std::string::npos);
  // Deterministic: regenerating dumps the identical text.
  CHECK(dump == dump_grammar(generate_grammar(arith).value()));
}

TEST_CASE("left-recursive shapes are accepted untransformed") {
  // BinaryExpression keeps Expression as its first symbol; no factoring.
  Model arith = testing::gallery_model("arith");
  Grammar g = generate_grammar(arith).take();
  int bin = g.nt_by_element.at("BinaryExpression");
  REQUIRE(g.prods_by_lhs[bin].size() == 1);
  const Production& p = g.productions[g.prods_by_lhs[bin][0]];
  REQUIRE(p.rhs.size() == 3);
  CHECK(p.rhs[0] == Symbol::nt(g.nt_by_element.at("Expression")));
}

TEST_CASE("bounded multiplicity unrolls into alternatives") {
  ModelBuilder b("Bound");
  b.add_element("Doc", ElementKind::Composite).start()
      .add_member("xs", "Item").multiplicity(2, 4);
  b.add_element("Item", ElementKind::Basic).pattern("[a-z]");
  Result<Grammar> g = generate_grammar(b.build().take());
  REQUIRE(g.ok());
  int doc_nt = g.value().nt_by_element.at("Doc");
  CHECK(g.value().prods_by_lhs[doc_nt].size() == 3);  // 2, 3, or 4 items
}

TEST_CASE("generation guards against blowup and cycles") {
  {
    ModelBuilder b("Unroll");
    b.add_element("Doc", ElementKind::Composite).start()
        .add_member("xs", "Item").multiplicity(0, 100);
    b.add_element("Item", ElementKind::Basic).pattern("[a-z]");
    Result<Grammar> g = generate_grammar(b.build().take());
    REQUIRE_FALSE(g.ok());
    CHECK(g.error().message.find("unroll") != std::string::npos);
  }
  {
    ModelBuilder b("Cycle");
    b.add_element("A", ElementKind::Composite).start().add_member("b", "B").optional();
    b.add_element("B", ElementKind::Composite).add_member("a", "A").optional();
    Result<Grammar> g = generate_grammar(b.build().take());
    REQUIRE_FALSE(g.ok());
    CHECK(g.error().message.find("cycle") != std::string::npos);
  }
}

TEST_CASE("free order emits every permutation") {
  ModelBuilder b("Free");
  b.add_element("Doc", ElementKind::Composite).start().free_order()
      .add_member("a", "A").add_member("b", "B").add_member("c", "C");
  b.add_element("A", ElementKind::Basic).pattern("a");
  b.add_element("B", ElementKind::Basic).pattern("b");
  b.add_element("C", ElementKind::Basic).pattern("c");
  Result<Grammar> g = generate_grammar(b.build().take());
  REQUIRE(g.ok());
  int doc_nt = g.value().nt_by_element.at("Doc");
  CHECK(g.value().prods_by_lhs[doc_nt].size() == 6);  // 3!
}

TEST_CASE("every nonterminal except basics derives something") {
  for (const char* name : {"arith", "json", "awk", "sexpr", "prolog"}) {
    CAPTURE(name);
    Grammar g = generate_grammar(testing::gallery_model(name)).take();
    for (size_t nt = 0; nt < g.nonterminals.size(); ++nt) {
      CAPTURE(g.nonterminals[nt].name);
      CHECK_FALSE(g.prods_by_lhs[nt].empty());
    }
  }
}
