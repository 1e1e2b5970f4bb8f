#include "oracles.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <map>
#include <regex>
#include <set>
#include <stdexcept>

using modelcc::Grammar;
using modelcc::Production;
using modelcc::Symbol;

namespace oracle {

uint64_t catalan(unsigned n) {
  std::vector<uint64_t> c(n + 1, 0);
  c[0] = 1;
  for (unsigned i = 1; i <= n; ++i) {
    for (unsigned j = 0; j < i; ++j) c[i] += c[j] * c[i - 1 - j];
  }
  return c[n];
}

namespace {

// Bottom-up tabulation over span lengths. Shorter spans are final before a
// longer span is computed; cells of the current span (reachable through unit
// chains and nullable prefixes) are iterated to a fixpoint, so left recursion
// needs no special casing. Tree sets only grow and are finite for grammars
// without derivation cycles, which generation rejects, so the loop ends.
struct Tabulator {
  const Grammar& grammar;
  const std::vector<int>& classes;
  const std::vector<std::string>& texts;
  size_t n = 0;
  std::vector<std::set<std::string>> cells;  // nt-major, then (i, j)

  Tabulator(const Grammar& g, const std::vector<int>& c, const std::vector<std::string>& t)
      : grammar(g), classes(c), texts(t), n(c.size()) {
    cells.resize(grammar.nonterminals.size() * (n + 1) * (n + 1));
    for (size_t len = 0; len <= n; ++len) {
      bool changed = true;
      while (changed) {
        changed = false;
        for (size_t i = 0; i + len <= n; ++i) {
          for (size_t nt = 0; nt < grammar.nonterminals.size(); ++nt) {
            std::set<std::string>& out = cell(nt, i, i + len);
            size_t before = out.size();
            std::string name = grammar.nonterminals[nt].name;
            for (int pi : grammar.prods_by_lhs[nt]) {
              for (const std::string& body :
                   derive_seq(grammar.productions[pi].rhs, 0, i, i + len)) {
                out.insert(name + "(" + body + ")");
              }
            }
            if (out.size() != before) changed = true;
          }
        }
      }
    }
  }

  std::set<std::string>& cell(size_t nt, size_t i, size_t j) {
    return cells[(nt * (n + 1) + i) * (n + 1) + j];
  }

  std::string render_terminal(size_t at) const {
    const modelcc::TokenClassDef& def = grammar.terminals[classes[at]];
    if (def.fixed_text) return "\"" + def.id + "\"";
    return def.id + "\"" + texts[at] + "\"";
  }

  // All ways of deriving rhs[from..] over tokens [i, j): cartesian product of
  // per-symbol derivations over every split point, read from settled cells.
  std::vector<std::string> derive_seq(const std::vector<Symbol>& rhs, size_t from, size_t i,
                                      size_t j) {
    if (from == rhs.size()) {
      return i == j ? std::vector<std::string>{""} : std::vector<std::string>{};
    }
    std::vector<std::string> out;
    Symbol sym = rhs[from];
    if (sym.kind == Symbol::Terminal) {
      if (i < j && classes[i] == sym.index) {
        for (const std::string& r : derive_seq(rhs, from + 1, i + 1, j)) {
          out.push_back(r.empty() ? render_terminal(i) : render_terminal(i) + " " + r);
        }
      }
      return out;
    }
    for (size_t k = i; k <= j; ++k) {
      const std::set<std::string>& heads = cell(sym.index, i, k);
      if (heads.empty()) continue;
      std::vector<std::string> rest = derive_seq(rhs, from + 1, k, j);
      for (const std::string& h : heads) {
        for (const std::string& r : rest) out.push_back(r.empty() ? h : h + " " + r);
      }
    }
    return out;
  }
};

}  // namespace

BruteForest parse_bruteforce(const Grammar& grammar, const std::vector<int>& classes,
                             const std::vector<std::string>& texts) {
  // Start from the element the augmented start wraps, matching the parser's
  // rendering which elides the wrapper.
  int start_nt = -1;
  for (const Production& p : grammar.productions) {
    if (p.kind == modelcc::ProductionKind::AugmentedStart && p.rhs.size() == 1) {
      start_nt = p.rhs[0].index;
    }
  }
  BruteForest result;
  if (start_nt < 0) return result;
  Tabulator tab(grammar, classes, texts);
  const std::set<std::string>& trees = tab.cell(start_nt, 0, classes.size());
  result.count = trees.size();
  result.trees.assign(trees.begin(), trees.end());
  return result;
}

uint64_t count_trees_bruteforce(const Grammar& grammar, const std::vector<int>& classes,
                                const std::vector<std::string>& texts) {
  return parse_bruteforce(grammar, classes, texts).count;
}

int terminal_index(const Grammar& grammar, const std::string& id) {
  for (size_t i = 0; i < grammar.terminals.size(); ++i) {
    if (grammar.terminals[i].id == id) return static_cast<int>(i);
  }
  return -1;
}

namespace {

struct ExprToken {
  char op = 0;       // 0 for numbers
  double value = 0;  // numbers only
};

std::vector<ExprToken> scan_expr(const std::string& expr) {
  std::vector<ExprToken> out;
  size_t i = 0;
  while (i < expr.size()) {
    char c = expr[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      char* end = nullptr;
      double v = std::strtod(expr.c_str() + i, &end);
      out.push_back({0, v});
      i = end - expr.c_str();
    } else {
      out.push_back({c, 0});
      ++i;
    }
  }
  return out;
}

int precedence(char op) { return (op == '*' || op == '/') ? 2 : 1; }

double apply(char op, double a, double b) {
  switch (op) {
    case '+': return a + b;
    case '-': return a - b;
    case '*': return a * b;
    default: return a / b;
  }
}

}  // namespace

double eval_conventional(const std::string& expr) {
  std::vector<double> values;
  std::vector<char> ops;
  auto pop_op = [&] {
    char op = ops.back();
    ops.pop_back();
    double b = values.back();
    values.pop_back();
    double a = values.back();
    values.pop_back();
    values.push_back(apply(op, a, b));
  };
  for (const ExprToken& t : scan_expr(expr)) {
    if (t.op == 0) {
      values.push_back(t.value);
    } else if (t.op == '(') {
      ops.push_back('(');
    } else if (t.op == ')') {
      while (!ops.empty() && ops.back() != '(') pop_op();
      if (ops.empty()) throw std::invalid_argument("unbalanced ')' in oracle expression");
      ops.pop_back();
    } else {
      while (!ops.empty() && ops.back() != '(' && precedence(ops.back()) >= precedence(t.op)) {
        pop_op();
      }
      ops.push_back(t.op);
    }
  }
  while (!ops.empty()) {
    if (ops.back() == '(') throw std::invalid_argument("unbalanced '(' in oracle expression");
    pop_op();
  }
  if (values.size() != 1) throw std::invalid_argument("malformed oracle expression");
  return values.back();
}

std::vector<TokenSpan> max_match_tokens(
    const std::vector<std::pair<std::string, std::string>>& classes, const std::string& input) {
  std::vector<TokenSpan> out;
  for (const auto& [name, pattern] : classes) {
    std::regex re(pattern, std::regex::ECMAScript);
    for (size_t start = 0; start < input.size(); ++start) {
      // Longest match by definition: test every end, longest first.
      for (size_t end = input.size(); end > start; --end) {
        if (std::regex_match(input.begin() + start, input.begin() + end, re)) {
          out.push_back({name, start, end});
          break;
        }
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace oracle
