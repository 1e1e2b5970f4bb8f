#include "modelcc/grammar.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <tuple>

#include "modelcc/regex.hpp"

namespace modelcc {

std::string Grammar::symbol_name(Symbol s) const {
  if (s.kind == Symbol::Nonterminal) return "<" + nonterminals[s.index].name + ">";
  const TokenClassDef& t = terminals[s.index];
  if (t.fixed_text) return "\"" + t.id + "\"";
  return t.id;
}

namespace {

// A partial right-hand side with its member bindings.
struct Seq {
  std::vector<Symbol> syms;
  std::vector<int> binds;

  void push(Symbol s, int b) {
    syms.push_back(s);
    binds.push_back(b);
  }
  void append(const Seq& o) {
    syms.insert(syms.end(), o.syms.begin(), o.syms.end());
    binds.insert(binds.end(), o.binds.begin(), o.binds.end());
  }
};

std::vector<Seq> cross(const std::vector<Seq>& lefts, const std::vector<Seq>& rights) {
  std::vector<Seq> out;
  out.reserve(lefts.size() * rights.size());
  for (const Seq& l : lefts)
    for (const Seq& r : rights) {
      Seq s = l;
      s.append(r);
      out.push_back(std::move(s));
    }
  return out;
}

constexpr size_t kUnrollBound = 64;
constexpr size_t kPermutationBound = 6;
constexpr size_t kGroupAlternativeCap = 1024;
constexpr size_t kElementProductionCap = 65536;

class GrammarGen {
 public:
  explicit GrammarGen(const Model& model) : m_(model) {}

  Result<Grammar> run() {
    for (const ElementType& e : m_.elements) {
      if (e.kind == ElementKind::Basic) {
        TokenClassDef t;
        t.id = e.name;
        t.pattern = e.pattern ? e.pattern->regexp : "";
        t.fixed_text = false;
        t.origin_element = e.name;
        t.value_type = e.pattern ? e.pattern->value_type : ValueType::None;
        g_.term_by_element[e.name] = static_cast<int>(g_.terminals.size());
        g_.terminals.push_back(std::move(t));
      } else {
        g_.nt_by_element[e.name] = new_nt(e.name, e.name);
      }
    }
    for (const ElementType& e : m_.elements) {
      if (err_) break;
      if (e.kind == ElementKind::Selection) gen_selection(e);
      else if (e.kind == ElementKind::Composite) gen_composite(e);
    }
    if (!err_) gen_start();
    if (!err_) finalize();
    if (err_) return *err_;
    return std::move(g_);
  }

 private:
  const Model& m_;
  Grammar g_;
  std::optional<Error> err_;
  std::set<std::string> nt_names_;
  std::map<std::string, int> fixed_terms_;  // pattern -> terminal index
  // (item element, separators, zero-flavor, is-reference) -> list nonterminal
  std::map<std::tuple<std::string, std::vector<std::string>, bool, bool>, int> lists_;

  void fail(std::string msg) {
    if (!err_) err_ = Error{ErrorKind::Model, std::move(msg)};
  }

  int new_nt(std::string base, std::string element) {
    std::string name = base;
    for (int n = 2; !nt_names_.insert(name).second; ++n)
      name = base + std::to_string(n);
    NonterminalInfo info;
    info.name = name;
    info.element = std::move(element);
    g_.nonterminals.push_back(std::move(info));
    return static_cast<int>(g_.nonterminals.size()) - 1;
  }

  int fixed_terminal(const std::string& pattern) {
    auto it = fixed_terms_.find(pattern);
    if (it != fixed_terms_.end()) return it->second;
    TokenClassDef t;
    t.pattern = pattern;
    t.fixed_text = true;
    auto re = Regex::compile(pattern);
    std::string lit = re.ok() ? re.value().literal_text() : "";
    t.id = lit.empty() ? pattern : lit;
    int idx = static_cast<int>(g_.terminals.size());
    g_.terminals.push_back(std::move(t));
    fixed_terms_[pattern] = idx;
    return idx;
  }

  Seq fixed_seq(const std::vector<std::string>& patterns) {
    Seq s;
    for (const std::string& p : patterns) s.push(Symbol::term(fixed_terminal(p)), -1);
    return s;
  }

  // One appearance of `element_name` bound to member slot `bind`. Basic
  // elements expand to their delimiters around the terminal; others are a
  // single nonterminal (their own productions carry their delimiters).
  void append_occurrence(const std::string& element_name, int bind, Seq& out) {
    const ElementType* e = m_.find(element_name);
    if (!e) return;  // validated models never hit this
    if (e->kind == ElementKind::Basic) {
      out.append(fixed_seq(e->delimiters.prefixes));
      out.push(Symbol::term(g_.term_by_element.at(element_name)), bind);
      out.append(fixed_seq(e->delimiters.suffixes));
    } else {
      out.push(Symbol::nt(g_.nt_by_element.at(element_name)), bind);
    }
  }

  // Alternative expansions of one occurrence of member `m`. Reference members
  // appear in text as the id token of any referenceable target type.
  std::vector<Seq> occurrence_alts(const MemberSpec& m, int bind) {
    std::vector<Seq> out;
    if (m.reference_kind == ReferenceKind::Reference) {
      std::set<std::string> seen;
      for (const std::string& sub : concrete_subtypes(m_, m.element_type)) {
        const ElementType* c = m_.find(sub);
        if (!c || !c->reference.referenceable()) continue;
        const MemberSpec* idm = id_member(m_, *c);
        if (!idm || !seen.insert(idm->element_type).second) continue;
        Seq s;
        s.push(Symbol::term(g_.term_by_element.at(idm->element_type)), bind);
        out.push_back(std::move(s));
      }
    } else {
      Seq s;
      append_occurrence(m.element_type, bind, s);
      out.push_back(std::move(s));
    }
    return out;
  }

  // Synthesized list nonterminal for an unbounded member. Zero-flavor lists
  // (min 0, no separator) derive epsilon; the one-or-more flavor carries the
  // separator in the recursive production. Recursion leans left: Earley
  // charts stay linear on long lists that way, where a right-leaning list
  // would complete every suffix at every anchor.
  int list_nt(const MemberSpec& m, bool zero_flavor) {
    auto key = std::make_tuple(m.element_type, m.separators, zero_flavor,
                               m.reference_kind == ReferenceKind::Reference);
    auto it = lists_.find(key);
    if (it != lists_.end()) return it->second;
    int nt = new_nt(m.element_type + "List", "");
    NonterminalInfo& info = g_.nonterminals[nt];
    info.is_list = true;
    info.list_item = m.element_type;
    info.list_separators = m.separators;
    lists_[key] = nt;

    std::vector<Seq> occs = occurrence_alts(m, 0);
    Seq sep = fixed_seq(m.separators);
    for (const Seq& occ : occs) {
      Production rec;
      rec.lhs = nt;
      rec.kind = ProductionKind::ListRecursive;
      Seq body;
      body.push(Symbol::nt(nt), 1);
      if (!zero_flavor) body.append(sep);
      body.append(occ);
      rec.rhs = std::move(body.syms);
      rec.binding = std::move(body.binds);
      g_.productions.push_back(std::move(rec));
    }
    if (zero_flavor) {
      Production base;
      base.lhs = nt;
      base.kind = ProductionKind::ListBase;
      g_.productions.push_back(std::move(base));  // epsilon
    } else {
      for (const Seq& occ : occs) {
        Production base;
        base.lhs = nt;
        base.kind = ProductionKind::ListBase;
        base.rhs = occ.syms;
        base.binding = occ.binds;
        g_.productions.push_back(std::move(base));
      }
    }
    return nt;
  }

  // All right-hand-side variants contributed by one member.
  std::vector<Seq> member_group(const ElementType& e, int member_index) {
    const MemberSpec& m = e.members[member_index];
    Seq prefix = fixed_seq(m.prefixes);
    Seq suffix = fixed_seq(m.suffixes);
    Seq sep = fixed_seq(m.separators);
    std::vector<Seq> occs = occurrence_alts(m, member_index);
    Multiplicity mult = effective_multiplicity(m);

    // prefix occ (sep occ)^(n-1) suffix
    auto n_occurrences = [&](uint32_t n) {
      std::vector<Seq> acc{prefix};
      for (uint32_t k = 0; k < n && !err_; ++k) {
        if (k > 0) acc = cross(acc, {sep});
        acc = cross(acc, occs);
        if (acc.size() > kGroupAlternativeCap)
          fail("member '" + m.field_name + "' of '" + e.name +
               "' expands to too many alternatives");
      }
      return cross(acc, {suffix});
    };

    std::vector<Seq> out;
    if (mult.bounded()) {
      if (mult.max - mult.min > kUnrollBound) {
        fail("member '" + m.field_name + "' of '" + e.name +
             "' exceeds the bounded-multiplicity unroll bound (" +
             std::to_string(kUnrollBound) + ")");
        return out;
      }
      for (uint32_t n = mult.min; n <= mult.max && !err_; ++n) {
        if (n == 0) {
          out.emplace_back();  // member absent
          continue;
        }
        for (Seq& s : n_occurrences(n)) out.push_back(std::move(s));
      }
    } else {
      bool zero_flavor = mult.min == 0 && m.separators.empty();
      int nt = list_nt(m, zero_flavor);
      if (mult.min == 0 && !zero_flavor) out.emplace_back();  // member absent
      std::vector<Seq> acc{prefix};
      for (uint32_t k = 0; mult.min > 0 && k + 1 < mult.min && !err_; ++k) {
        acc = cross(acc, occs);
        acc = cross(acc, {sep});
        if (acc.size() > kGroupAlternativeCap)
          fail("member '" + m.field_name + "' of '" + e.name +
               "' expands to too many alternatives");
      }
      Seq tail;
      tail.push(Symbol::nt(nt), member_index);
      acc = cross(acc, {tail});
      acc = cross(acc, {suffix});
      for (Seq& s : acc) out.push_back(std::move(s));
    }
    return out;
  }

  void add_composite_production(const ElementType& e, Seq body, int& variant,
                                std::set<std::string>& dedupe) {
    std::string key;
    for (size_t i = 0; i < body.syms.size(); ++i) {
      key += std::to_string(body.syms[i].kind) + ":" + std::to_string(body.syms[i].index) +
             ":" + std::to_string(body.binds[i]) + ";";
    }
    if (!dedupe.insert(key).second) return;
    Production p;
    p.lhs = g_.nt_by_element.at(e.name);
    p.kind = ProductionKind::Composite;
    p.origin_element = e.name;
    p.variant = variant++;
    p.rhs = std::move(body.syms);
    p.binding = std::move(body.binds);
    g_.productions.push_back(std::move(p));
  }

  void gen_composite(const ElementType& e) {
    // declaration indices in effective order (positions honored)
    std::vector<int> order;
    for (const MemberSpec* m : ordered_members(e))
      order.push_back(static_cast<int>(m - e.members.data()));

    std::vector<std::vector<Seq>> groups;
    for (int idx : order) {
      groups.push_back(member_group(e, idx));
      if (err_) return;
    }

    std::vector<std::vector<int>> permutations;
    if (e.evaluation.free_order) {
      if (groups.size() > kPermutationBound) {
        fail("free-order element '" + e.name + "' has " + std::to_string(groups.size()) +
             " members, above the permutation bound (" +
             std::to_string(kPermutationBound) + ")");
        return;
      }
      std::vector<int> perm(groups.size());
      std::iota(perm.begin(), perm.end(), 0);
      do {
        permutations.push_back(perm);
      } while (std::next_permutation(perm.begin(), perm.end()));
    } else {
      std::vector<int> perm(groups.size());
      std::iota(perm.begin(), perm.end(), 0);
      permutations.push_back(std::move(perm));
    }

    Seq pre = fixed_seq(e.delimiters.prefixes);
    Seq post = fixed_seq(e.delimiters.suffixes);
    int variant = 0;
    std::set<std::string> dedupe;
    for (const std::vector<int>& perm : permutations) {
      std::vector<Seq> acc{pre};
      for (int gi : perm) {
        acc = cross(acc, groups[gi]);
        if (acc.size() > kElementProductionCap) {
          fail("element '" + e.name + "' expands to too many productions");
          return;
        }
      }
      acc = cross(acc, {post});
      for (Seq& body : acc) add_composite_production(e, std::move(body), variant, dedupe);
      if (g_.productions.size() > 4 * kElementProductionCap) {
        fail("element '" + e.name + "' expands to too many productions");
        return;
      }
    }
  }

  void gen_selection(const ElementType& e) {
    Seq pre = fixed_seq(e.delimiters.prefixes);
    Seq post = fixed_seq(e.delimiters.suffixes);
    int variant = 0;
    for (const std::string& sub : direct_subtypes(m_, e.name)) {
      Seq body = pre;
      append_occurrence(sub, 0, body);
      body.append(post);
      Production p;
      p.lhs = g_.nt_by_element.at(e.name);
      p.kind = ProductionKind::SelectionUnit;
      p.origin_element = e.name;
      p.origin_member = sub;  // the chosen subtype
      p.variant = variant++;
      p.rhs = std::move(body.syms);
      p.binding = std::move(body.binds);
      g_.productions.push_back(std::move(p));
    }
  }

  void gen_start() {
    int nt = new_nt("%start", "");
    g_.start = nt;
    Seq body;
    append_occurrence(m_.start, 0, body);
    Production p;
    p.lhs = nt;
    p.kind = ProductionKind::AugmentedStart;
    p.rhs = std::move(body.syms);
    p.binding = std::move(body.binds);
    g_.productions.push_back(std::move(p));
  }

  void finalize() {
    g_.prods_by_lhs.assign(g_.nonterminals.size(), {});
    for (size_t i = 0; i < g_.productions.size(); ++i)
      g_.prods_by_lhs[g_.productions[i].lhs].push_back(static_cast<int>(i));

    g_.nullable.assign(g_.nonterminals.size(), false);
    bool changed = true;
    while (changed) {
      changed = false;
      for (const Production& p : g_.productions) {
        if (g_.nullable[p.lhs]) continue;
        bool all = true;
        for (Symbol s : p.rhs)
          if (s.kind == Symbol::Terminal || !g_.nullable[s.index]) all = false;
        if (all) {
          g_.nullable[p.lhs] = true;
          changed = true;
        }
      }
    }

    // Reject cycles over an empty span: A =>+ A deriving no tokens. Edge
    // A -> B exists when a production A ::= alpha B beta has alpha and beta
    // all nullable.
    std::vector<std::vector<int>> edges(g_.nonterminals.size());
    for (const Production& p : g_.productions) {
      for (size_t i = 0; i < p.rhs.size(); ++i) {
        if (p.rhs[i].kind != Symbol::Nonterminal) continue;
        bool others_nullable = true;
        for (size_t j = 0; j < p.rhs.size(); ++j) {
          if (j == i) continue;
          if (p.rhs[j].kind == Symbol::Terminal || !g_.nullable[p.rhs[j].index])
            others_nullable = false;
        }
        if (others_nullable) edges[p.lhs].push_back(p.rhs[i].index);
      }
    }
    std::vector<int> color(g_.nonterminals.size(), 0);  // 0 new, 1 active, 2 done
    for (size_t root = 0; root < edges.size() && !err_; ++root) {
      if (color[root] != 0) continue;
      // iterative DFS
      std::vector<std::pair<int, size_t>> stack{{static_cast<int>(root), 0}};
      color[root] = 1;
      while (!stack.empty() && !err_) {
        auto& [node, next] = stack.back();
        if (next < edges[node].size()) {
          int to = edges[node][next++];
          if (color[to] == 1) {
            fail("grammar derives a cycle over an empty span through <" +
                 g_.nonterminals[to].name + ">");
            break;
          }
          if (color[to] == 0) {
            color[to] = 1;
            stack.push_back({to, 0});
          }
        } else {
          color[node] = 2;
          stack.pop_back();
        }
      }
    }
  }
};

}  // namespace

Result<Grammar> generate_grammar(const Model& model) {
  return GrammarGen(model).run();
}

std::string dump_grammar(const Grammar& grammar) {
  std::vector<int> order;
  for (size_t i = 0; i < grammar.productions.size(); ++i)
    if (grammar.productions[i].kind != ProductionKind::AugmentedStart)
      order.push_back(static_cast<int>(i));
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    const std::string& na = grammar.nonterminals[grammar.productions[a].lhs].name;
    const std::string& nb = grammar.nonterminals[grammar.productions[b].lhs].name;
    if (na != nb) return na < nb;
    return a < b;
  });
  std::string out;
  for (int i : order) {
    const Production& p = grammar.productions[i];
    out += "<" + grammar.nonterminals[p.lhs].name + "> ::=";
    if (p.rhs.empty()) {
      out += " ε";
    } else {
      for (Symbol s : p.rhs) out += " " + grammar.symbol_name(s);
    }
    out += '\n';
  }
  return out;
}

}  // namespace modelcc
