#pragma once

#include <map>
#include <string>

#include "modelcc/diag.hpp"
#include "modelcc/model.hpp"

namespace modelcc {

// A parsed model file: the model plus where each entity was declared.
// Span keys are "Element" for elements and "Element.member" for members.
struct ModelDocument {
  std::string source_text;
  Model model;
  std::map<std::string, SourceRange> source_spans;
};

// Parses the textual model format. Syntax errors carry "line:col: ..."
// messages (byte offset in Error::offset); invalid models return the full
// validation report with declaration positions prepended.
Result<ModelDocument> read_model(const std::string& text);

// Canonical, deterministic rendering; read_model(write_model(m)) is
// structurally equal to m for every valid model.
std::string write_model(const Model& model);

}  // namespace modelcc
