#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "modelcc/diag.hpp"

namespace modelcc {

enum class ElementKind { Composite, Selection, Basic };
enum class ValueType { None, Text, Number, Boolean };
enum class Associativity { Unspecified, LeftToRight, RightToLeft, NonAssociative };
enum class Composition { Unspecified, Eager, Lazy };
enum class ReferenceKind { None, Id, Reference };

const char* to_string(ElementKind k);
const char* to_string(ValueType v);
const char* to_string(Associativity a);
const char* to_string(Composition c);

struct Multiplicity {
  static constexpr uint32_t kUnbounded = UINT32_MAX;
  uint32_t min = 1;
  uint32_t max = 1;

  bool bounded() const { return max != kUnbounded; }
  bool operator==(const Multiplicity&) const = default;
};

// One constituent of a Composite element. `element_type` names another
// element; lists/optionality/delimiters describe how it appears in text.
struct MemberSpec {
  std::string field_name;
  std::string element_type;
  bool optional = false;
  Multiplicity multiplicity;
  std::vector<std::string> separators;  // token sequence between repetitions
  std::vector<std::string> prefixes;    // tokens before this member
  std::vector<std::string> suffixes;    // tokens after this member
  std::optional<uint32_t> position;
  bool value_field = false;  // Basic elements only: receives the matched text
  ReferenceKind reference_kind = ReferenceKind::None;

  bool operator==(const MemberSpec&) const = default;
};

struct PatternSpec {
  std::string regexp;
  ValueType value_type = ValueType::None;

  bool operator==(const PatternSpec&) const = default;
};

struct DelimiterSpec {
  std::vector<std::string> prefixes;
  std::vector<std::string> suffixes;

  bool operator==(const DelimiterSpec&) const = default;
};

struct EvaluationSpec {
  Associativity associativity = Associativity::Unspecified;
  std::optional<int> priority;  // lower value binds tighter
  Composition composition = Composition::Unspecified;
  bool free_order = false;

  bool operator==(const EvaluationSpec&) const = default;
};

struct ReferenceSpec {
  std::optional<std::string> id_field;  // set iff some member is marked @id

  bool referenceable() const { return id_field.has_value(); }
  bool operator==(const ReferenceSpec&) const = default;
};

struct ElementType {
  std::string name;
  ElementKind kind = ElementKind::Composite;
  std::optional<std::string> supertype;  // must name a Selection element
  std::vector<MemberSpec> members;       // Composite; Basic may hold one value member
  std::optional<PatternSpec> pattern;    // Basic only
  DelimiterSpec delimiters;
  EvaluationSpec evaluation;
  ReferenceSpec reference;
  std::optional<std::string> custom;  // hook name into the custom-constraint registry

  bool operator==(const ElementType&) const = default;
};

struct Model {
  std::string name;
  std::vector<ElementType> elements;
  std::string start;
  std::optional<std::string> skip;  // token-separator pattern; default below

  static constexpr std::string_view kDefaultSkip = "[ \\t\\r\\n]+";

  std::string effective_skip() const {
    return skip ? *skip : std::string(kDefaultSkip);
  }
  const ElementType* find(std::string_view element_name) const;
  int index_of(std::string_view element_name) const;  // -1 when absent

  bool operator==(const Model&) const = default;
};

// -- Derived views -----------------------------------------------------------

// Member order per tooling rules: explicit positions are 0-based slots;
// members without a position use their declaration index; ties prefer the
// explicit position.
std::vector<const MemberSpec*> ordered_members(const ElementType& element);

// Effective multiplicity with `optional` folded in (optional => min 0, max 1).
Multiplicity effective_multiplicity(const MemberSpec& member);

// Names of elements whose supertype chain reaches `ancestor` (inclusive).
bool is_subtype_of(const Model& model, std::string_view sub, std::string_view ancestor);
std::vector<std::string> direct_subtypes(const Model& model, std::string_view super);
// Non-Selection descendants of `name` (name itself when not a Selection).
std::vector<std::string> concrete_subtypes(const Model& model, std::string_view name);
// Supertype chain starting at the element itself, ending at the topmost ancestor.
std::vector<std::string> supertype_chain(const Model& model, std::string_view name);

// The member marked @id, when the element is referenceable.
const MemberSpec* id_member(const Model& model, const ElementType& element);

// -- Validation --------------------------------------------------------------

struct ValidationIssue {
  std::string element;     // offending element name ("" for model-level issues)
  std::string constraint;  // short machine-readable tag, e.g. "duplicate-element-name"
  std::string message;
};

struct ValidationReport {
  std::vector<ValidationIssue> issues;

  bool empty() const { return issues.empty(); }
  std::string to_string() const;
};

// Checks every structural invariant; collects all violations instead of
// stopping at the first. An empty report marks the model safe for grammar
// generation.
ValidationReport validate_model(const Model& model);

// -- Builder -----------------------------------------------------------------

// Imperative construction with forward references: member and supertype names
// may be declared later; everything is checked in build(). Annotation setters
// apply to the most recently added element or member and reject repeats.
class ModelBuilder {
 public:
  explicit ModelBuilder(std::string language_name);

  ModelBuilder& skip(std::string pattern);
  ModelBuilder& add_element(std::string name, ElementKind kind);
  ModelBuilder& supertype(std::string super_name);
  ModelBuilder& pattern(std::string regexp);
  ModelBuilder& value(ValueType type);
  ModelBuilder& prefix(std::string pat);
  ModelBuilder& suffix(std::string pat);
  ModelBuilder& associativity(Associativity a);
  ModelBuilder& priority(int level);
  ModelBuilder& composition(Composition c);
  ModelBuilder& free_order();
  ModelBuilder& constraint_hook(std::string hook_name);
  ModelBuilder& start();  // marks the current element; default is the first one

  ModelBuilder& add_member(std::string field_name, std::string element_type);
  ModelBuilder& optional();
  ModelBuilder& multiplicity(uint32_t min, uint32_t max);
  ModelBuilder& separator(std::string pat);
  ModelBuilder& member_prefix(std::string pat);
  ModelBuilder& member_suffix(std::string pat);
  ModelBuilder& at_position(uint32_t index);
  ModelBuilder& id();
  ModelBuilder& reference();

  // Validates and returns the model; reports the first builder mistake
  // (unknown name, conflicting constraint) or the full validation report.
  Result<Model> build() const;

 private:
  ModelBuilder& fail(const std::string& message);
  ElementType* current_element();
  MemberSpec* current_member();
  ModelBuilder& set_once(const char* what, bool& flag);

  Model model_;
  std::string error_;
  bool explicit_start_ = false;
  // per-current-element / per-current-member "already set" latches
  struct Latches {
    bool supertype = false, pattern = false, value = false, assoc = false,
         prio = false, comp = false, freeorder = false, hook = false;
  } elem_latch_;
  struct MemberLatches {
    bool optional = false, mult = false, position = false, refkind = false;
  } member_latch_;
};

}  // namespace modelcc
