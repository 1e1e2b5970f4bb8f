#pragma once

#include <map>
#include <string>
#include <vector>

#include "modelcc/diag.hpp"
#include "modelcc/model.hpp"

namespace modelcc {

struct Symbol {
  enum Kind { Nonterminal, Terminal } kind = Terminal;
  int index = -1;

  static Symbol nt(int i) { return Symbol{Nonterminal, i}; }
  static Symbol term(int i) { return Symbol{Terminal, i}; }
  bool operator==(const Symbol&) const = default;
};

// What the lexer must recognize for one terminal symbol.
struct TokenClassDef {
  std::string id;            // display name (element name, or the literal text)
  std::string pattern;       // regex source
  bool fixed_text = false;   // delimiter/separator/keyword class
  std::string origin_element;  // basic element that owns it ("" for fixed classes)
  ValueType value_type = ValueType::None;
};

struct NonterminalInfo {
  std::string name;
  std::string element;  // "" for synthesized list / augmented-start symbols
  bool is_list = false;
  std::string list_item;                 // element held by the list
  std::vector<std::string> list_separators;
};

enum class ProductionKind {
  Composite,       // one variant of a composite element's body
  SelectionUnit,   // Super ::= Sub
  ListRecursive,   // L ::= item seps L
  ListBase,        // L ::= item  |  L ::= epsilon
  AugmentedStart,  // %start ::= <start element>
};

struct Production {
  int lhs = -1;
  std::vector<Symbol> rhs;  // empty = epsilon
  ProductionKind kind = ProductionKind::Composite;
  std::string origin_element;  // element this production realizes ("" when synthesized)
  std::string origin_member;   // member behind a list production
  int variant = 0;             // distinguishes doubled/unrolled/permuted bodies
  // Parallel to rhs: member index within the origin element (-1 for delimiters).
  // List productions use 0 for the item slot and 1 for the nested-list slot.
  std::vector<int> binding;
};

struct Grammar {
  std::vector<NonterminalInfo> nonterminals;
  std::vector<TokenClassDef> terminals;
  std::vector<Production> productions;
  int start = -1;  // the augmented %start nonterminal

  std::map<std::string, int> nt_by_element;
  std::map<std::string, int> term_by_element;  // basic elements
  std::vector<std::vector<int>> prods_by_lhs;  // nonterminal -> production indices
  std::vector<bool> nullable;                  // per nonterminal

  std::string symbol_name(Symbol s) const;  // "<NT>", bare basic name, or "text"
};

// Applies the derivation rules: composite concatenation, selection unit
// productions, list synthesis for repeated members, optional-member doubling,
// free-order permutations, bounded-multiplicity unrolling. Fails on permutation
// or unroll blowup and on grammars that derive a cycle over an empty span.
Result<Grammar> generate_grammar(const Model& model);

// One production per line, "<LHS> ::= sym sym ..." (epsilon body printed as
// nothing after "::="), ordered by (lhs name, generation order); the internal
// start production is omitted.
std::string dump_grammar(const Grammar& grammar);

}  // namespace modelcc
