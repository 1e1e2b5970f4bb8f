#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>

#include "doctest.h"
#include "helpers.hpp"
#include "modelcc/model.hpp"

using namespace modelcc;

namespace {

bool has_issue(const ValidationReport& report, const std::string& constraint) {
  return std::any_of(report.issues.begin(), report.issues.end(),
                     [&](const ValidationIssue& i) { return i.constraint == constraint; });
}

}  // namespace

TEST_CASE("builder assembles a valid model") {
  ModelBuilder b("Demo");
  b.add_element("Doc", ElementKind::Composite).start().add_member("items", "Word")
      .multiplicity(1, Multiplicity::kUnbounded).separator(",");
  b.add_element("Word", ElementKind::Basic).pattern("[a-z]+").value(ValueType::Text);
  Result<Model> m = b.build();
  REQUIRE(m.ok());
  CHECK(m.value().name == "Demo");
  CHECK(m.value().start == "Doc");
  CHECK(m.value().elements.size() == 2);
  CHECK(validate_model(m.value()).empty());
}

TEST_CASE("builder supports forward references") {
  ModelBuilder b("Fwd");
  b.add_element("A", ElementKind::Composite).start().add_member("b", "B");  // B comes later
  b.add_element("B", ElementKind::Basic).pattern("b").value(ValueType::Text);
  CHECK(b.build().ok());
}

TEST_CASE("builder rejects conflicting annotations") {
  ModelBuilder b("Bad");
  b.add_element("A", ElementKind::Basic).pattern("a").priority(1).priority(2);
  Result<Model> m = b.build();
  REQUIRE_FALSE(m.ok());
  CHECK(m.error().kind == ErrorKind::Model);
}

TEST_CASE("validation flags structural mistakes") {
  Model m;
  m.name = "X";
  m.start = "A";
  ElementType a;
  a.name = "A";
  a.kind = ElementKind::Composite;
  a.members.push_back({.field_name = "b", .element_type = "Missing"});
  m.elements.push_back(a);
  CHECK(has_issue(validate_model(m), "unknown-member-type"));

  m.elements.push_back(m.elements[0]);
  CHECK(has_issue(validate_model(m), "duplicate-element-name"));

  m.elements.pop_back();
  m.start = "Nope";
  CHECK(has_issue(validate_model(m), "missing-start"));
}

TEST_CASE("supertypes must be selections") {
  ModelBuilder b("Super");
  b.add_element("A", ElementKind::Composite).start().add_member("w", "W");
  b.add_element("W", ElementKind::Basic).supertype("A").pattern("w");
  Result<Model> m = b.build();
  REQUIRE_FALSE(m.ok());
  CHECK(m.error().message.find("supertype") != std::string::npos);
}

TEST_CASE("id members must be text-valued basics") {
  // An id member whose target holds a number cannot key a symbol table.
  ModelBuilder b("Ids");
  b.add_element("Node", ElementKind::Composite).start().add_member("name", "Num").id();
  b.add_element("Num", ElementKind::Basic).pattern("[0-9]+").value(ValueType::Number);
  Result<Model> m = b.build();
  REQUIRE_FALSE(m.ok());
  CHECK(m.error().message.find("id-member-type") != std::string::npos);
}

TEST_CASE("derived views") {
  Model arith = testing::gallery_model("arith");
  CHECK(is_subtype_of(arith, "AdditionOperator", "Operator"));
  CHECK(is_subtype_of(arith, "Literal", "Expression"));
  CHECK_FALSE(is_subtype_of(arith, "Operator", "Expression"));

  std::vector<std::string> ops = concrete_subtypes(arith, "Operator");
  CHECK(ops == std::vector<std::string>{"AdditionOperator", "SubtractionOperator",
                                        "MultiplicationOperator", "DivisionOperator"});
  CHECK(concrete_subtypes(arith, "Literal") == std::vector<std::string>{"Literal"});

  std::vector<std::string> chain = supertype_chain(arith, "AdditionOperator");
  CHECK(chain == std::vector<std::string>{"AdditionOperator", "Operator"});

  MemberSpec opt;
  opt.optional = true;
  CHECK(effective_multiplicity(opt) == Multiplicity{0, 1});
  MemberSpec plain;
  CHECK(effective_multiplicity(plain) == Multiplicity{1, 1});
}

TEST_CASE("member ordering honors explicit positions") {
  ElementType e;
  e.name = "E";
  MemberSpec a{.field_name = "a", .element_type = "T"};
  MemberSpec b{.field_name = "b", .element_type = "T"};
  MemberSpec c{.field_name = "c", .element_type = "T"};
  b.position = 0;
  e.members = {a, b, c};  // declaration order a b c, but b pinned first
  std::vector<const MemberSpec*> ordered = ordered_members(e);
  REQUIRE(ordered.size() == 3);
  CHECK(ordered[0]->field_name == "b");
}

TEST_CASE("id_member finds the key field") {
  Model graph = testing::gallery_model("graph");
  const ElementType* node = graph.find("Node");
  REQUIRE(node != nullptr);
  const MemberSpec* id = id_member(graph, *node);
  REQUIRE(id != nullptr);
  CHECK(id->field_name == "name");
  const ElementType* name = graph.find("Name");
  REQUIRE(name != nullptr);
  CHECK(id_member(graph, *name) == nullptr);
}
