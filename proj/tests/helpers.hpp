#pragma once

// Shared fixtures for the test binaries: gallery model loading, arith token
// mapping, and a priority-free arithmetic model for raw-ambiguity tests.

#include <string>
#include <utility>
#include <vector>

#include "modelcc/gallery.hpp"
#include "modelcc/grammar.hpp"
#include "modelcc/model.hpp"
#include "modelcc/model_text.hpp"

namespace testing {

inline modelcc::Model gallery_model(const std::string& name) {
  const modelcc::GalleryEntry* entry = modelcc::find_gallery(name);
  if (!entry) throw std::runtime_error("no gallery entry " + name);
  modelcc::Result<modelcc::ModelDocument> doc = modelcc::read_model(entry->model_text);
  if (!doc.ok()) throw std::runtime_error(doc.error().to_string());
  return doc.take().model;
}

// Splits "10 / ( 2 + 3 )" into (terminal indices, texts) against an
// arith-shaped grammar. Operators and parens map by fixed text / class name,
// anything else is a Literal.
struct TokenString {
  std::vector<int> classes;
  std::vector<std::string> texts;
};

inline TokenString arith_tokens(const modelcc::Grammar& grammar, const std::string& spaced) {
  auto index_of = [&](const std::string& id) {
    for (size_t i = 0; i < grammar.terminals.size(); ++i) {
      if (grammar.terminals[i].id == id) return static_cast<int>(i);
    }
    throw std::runtime_error("no terminal " + id);
  };
  TokenString out;
  size_t i = 0;
  while (i < spaced.size()) {
    if (spaced[i] == ' ') {
      ++i;
      continue;
    }
    size_t end = spaced.find(' ', i);
    if (end == std::string::npos) end = spaced.size();
    std::string text = spaced.substr(i, end - i);
    i = end;
    std::string id;
    if (text == "+") id = "AdditionOperator";
    else if (text == "-") id = "SubtractionOperator";
    else if (text == "*") id = "MultiplicationOperator";
    else if (text == "/") id = "DivisionOperator";
    else if (text == "(" || text == ")") id = text;
    else id = "Literal";
    out.classes.push_back(index_of(id));
    out.texts.push_back(text);
  }
  return out;
}

// The arith shape with every evaluation-order annotation stripped, so the
// forest keeps all Catalan-many bracketings.
inline modelcc::Model unconstrained_arith() {
  modelcc::ModelBuilder b("RawArith");
  b.add_element("Expression", modelcc::ElementKind::Selection).start();
  b.add_element("ExpressionGroup", modelcc::ElementKind::Composite)
      .supertype("Expression")
      .prefix("\\(")
      .suffix("\\)")
      .add_member("expression", "Expression");
  b.add_element("BinaryExpression", modelcc::ElementKind::Composite)
      .supertype("Expression")
      .add_member("left", "Expression")
      .add_member("operator", "Operator")
      .add_member("right", "Expression");
  b.add_element("Operator", modelcc::ElementKind::Selection);
  b.add_element("AdditionOperator", modelcc::ElementKind::Basic)
      .supertype("Operator")
      .pattern("\\+");
  b.add_element("SubtractionOperator", modelcc::ElementKind::Basic)
      .supertype("Operator")
      .pattern("-");
  b.add_element("MultiplicationOperator", modelcc::ElementKind::Basic)
      .supertype("Operator")
      .pattern("\\*");
  b.add_element("DivisionOperator", modelcc::ElementKind::Basic)
      .supertype("Operator")
      .pattern("/");
  b.add_element("Literal", modelcc::ElementKind::Basic)
      .supertype("Expression")
      .pattern("[0-9]+(\\.[0-9]+)?")
      .value(modelcc::ValueType::Number);
  modelcc::Result<modelcc::Model> m = b.build();
  if (!m.ok()) throw std::runtime_error(m.error().to_string());
  return m.take();
}

// "1+1+...+1" with n operators.
inline std::string ones_chain(size_t n) {
  std::string out = "1";
  for (size_t i = 0; i < n; ++i) out += "+1";
  return out;
}

}  // namespace testing
