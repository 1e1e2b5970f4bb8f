#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "modelcc/binder.hpp"
#include "modelcc/diag.hpp"

namespace modelcc {

// One checked input of a gallery entry's corpus.
struct GalleryCase {
  enum class Kind {
    Value,   // evaluates to `expected` through the entry's semantic hooks
    Unique,  // parses to exactly one interpretation
    Tree,    // unique parse whose instance rendering equals `expected`
    Reject,  // fails with an error of kind `error`
  };
  std::string input;
  Kind kind = Kind::Unique;
  std::string expected;
  ErrorKind error = ErrorKind::Syntax;
};

// A shipped example language: model source, optional evaluation hooks,
// optional predefined symbols, and a corpus of expected behaviors.
struct GalleryEntry {
  std::string name;
  std::string description;
  std::string model_text;
  SemanticRegistry semantics;
  std::function<std::optional<Error>(SymbolTable&)> symbols;
  std::vector<GalleryCase> corpus;
};

struct GalleryReport {
  struct Item {
    std::string input;
    bool pass = false;
    std::string detail;
  };
  std::string entry;
  std::vector<Item> items;

  bool all_pass() const;
};

const std::vector<GalleryEntry>& gallery();
const GalleryEntry* find_gallery(std::string_view name);

// Runs the full pipeline over the entry's corpus; failures become report
// items rather than errors.
GalleryReport run_gallery(const GalleryEntry& entry);
std::string format_report(const GalleryReport& report);

}  // namespace modelcc
