#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <string>

#include "doctest.h"
#include "helpers.hpp"
#include "modelcc/gallery.hpp"
#include "modelcc/model_text.hpp"

using namespace modelcc;

TEST_CASE("arith model declares the nine expression elements") {
  Model m = testing::gallery_model("arith");
  CHECK(m.elements.size() == 9);
  for (const char* name : {"Expression", "ExpressionGroup", "Literal", "BinaryExpression",
                           "Operator", "AdditionOperator", "SubtractionOperator",
                           "MultiplicationOperator", "DivisionOperator"}) {
    CAPTURE(name);
    CHECK(m.find(name) != nullptr);
  }
  CHECK(m.start == "Expression");
  CHECK(m.find("Expression")->kind == ElementKind::Selection);
  CHECK(m.find("Literal")->pattern->value_type == ValueType::Number);
  CHECK(m.find("MultiplicationOperator")->evaluation.priority == 1);
  CHECK(m.find("AdditionOperator")->evaluation.priority == 2);
  CHECK(m.find("Operator")->evaluation.associativity == Associativity::LeftToRight);
}

TEST_CASE("json model declares nine elements") {
  Model m = testing::gallery_model("json");
  CHECK(m.elements.size() == 9);
  CHECK(m.find("JSONValue")->kind == ElementKind::Selection);
  CHECK(direct_subtypes(m, "JSONValue").size() == 6);
}

TEST_CASE("empty input is a syntax error") {
  Result<ModelDocument> doc = read_model("");
  REQUIRE_FALSE(doc.ok());
  CHECK(doc.error().kind == ErrorKind::Model);
  CHECK(doc.error().message.find("language") != std::string::npos);
}

TEST_CASE("syntax errors carry positions") {
  Result<ModelDocument> doc = read_model("language X ;\nelement E {");
  REQUIRE_FALSE(doc.ok());
  CHECK(doc.error().offset != kNoOffset);
  CHECK(doc.error().message.find("2:") != std::string::npos);  // second line
}

TEST_CASE("read-write round trip over the gallery") {
  for (const GalleryEntry& entry : gallery()) {
    CAPTURE(entry.name);
    Result<ModelDocument> doc = read_model(entry.model_text);
    REQUIRE(doc.ok());
    std::string text = write_model(doc.value().model);
    Result<ModelDocument> again = read_model(text);
    REQUIRE(again.ok());
    CHECK(doc.value().model == again.value().model);
    // Canonical form is a fixed point.
    CHECK(write_model(again.value().model) == text);
  }
}

TEST_CASE("builder and text forms agree") {
  ModelBuilder b("Lists");
  b.skip("[ ]+");
  b.add_element("Doc", ElementKind::Composite).start()
      .add_member("words", "Word").multiplicity(0, Multiplicity::kUnbounded).separator(",");
  b.add_element("Word", ElementKind::Basic).pattern("[a-z]+").value(ValueType::Text);
  Model built = b.build().take();

  const char* text = R"(
language Lists @skip("[ ]+") ;

element Doc @start {
    words : Word @multiplicity(0, *) @separator(",") ;
}

basic element Word @pattern("[a-z]+") @value(text) ;
)";
  Result<ModelDocument> doc = read_model(text);
  REQUIRE(doc.ok());
  CHECK(doc.value().model == built);
}

TEST_CASE("source spans cover every element") {
  Result<ModelDocument> doc = read_model(find_gallery("graph")->model_text);
  REQUIRE(doc.ok());
  for (const ElementType& e : doc.value().model.elements) {
    CAPTURE(e.name);
    auto it = doc.value().source_spans.find(e.name);
    REQUIRE(it != doc.value().source_spans.end());
    CHECK(it->second.begin.line >= 1);
    CHECK(it->second.end.line >= it->second.begin.line);
  }
}

TEST_CASE("diagnostics format as file:line:col") {
  Diagnostic d{Severity::Error, {3, 7}, "boom"};
  CHECK(format_diagnostic("m.mcc", d) == "m.mcc:3:7: error: boom");
}

TEST_CASE("comments and escapes parse") {
  const char* text = R"(
// line comment
language C ;
element P @start { v : S ; } // trailing
basic element S @pattern("\"[^\"]*\"") @value(text) ;
)";
  Result<ModelDocument> doc = read_model(text);
  REQUIRE(doc.ok());
  CHECK(doc.value().model.find("S")->pattern->regexp == "\"[^\"]*\"");
}
