#include "modelcc/parser.hpp"

#include <algorithm>
#include <cassert>
#include <set>
#include <tuple>
#include <unordered_map>
#include <unordered_set>

namespace modelcc {

namespace {

constexpr uint64_t make_item(uint32_t group, uint32_t origin) {
  return (static_cast<uint64_t>(group) << 32) | origin;
}
constexpr uint32_t item_group(uint64_t item) { return static_cast<uint32_t>(item >> 32); }
constexpr uint32_t item_origin(uint64_t item) { return static_cast<uint32_t>(item); }

using Range = std::pair<uint32_t, uint32_t>;

// Contiguous slice of a sorted chart column holding the given group range.
struct ChartSlice {
  const uint64_t* begin;
  const uint64_t* end;
};

ChartSlice slice(const std::vector<uint64_t>& column, Range groups) {
  auto lo = std::lower_bound(column.begin(), column.end(), make_item(groups.first, 0));
  auto hi = std::lower_bound(lo, column.end(), make_item(groups.second, 0));
  return {column.data() + (lo - column.begin()), column.data() + (hi - column.begin())};
}

uint64_t sat_add(uint64_t a, uint64_t b) {
  return (a > kTreeCountCap - b) ? kTreeCountCap : a + b;
}
uint64_t sat_mul(uint64_t a, uint64_t b) {
  if (a == 0 || b == 0) return 0;
  if (a > kTreeCountCap / b) return kTreeCountCap;
  return a * b;
}

}  // namespace

// Dotted positions (production, dot) are numbered so that chart columns —
// sorted vectors of (group << 32 | origin) — keep items grouped by the symbol
// after the dot: first all items waiting on each nonterminal, then on each
// terminal, then completed items grouped by their lhs.
struct EarleyParser::Tables {
  const Grammar* grammar = nullptr;
  std::vector<std::pair<int, int>> groups;       // id -> (production, dot)
  std::vector<std::vector<uint32_t>> group_of;   // [production][dot] -> id
  std::vector<int32_t> advance_of;               // id -> id after the dot moves, -1 at end
  std::vector<Range> waiting_nt;                 // per nonterminal
  std::vector<Range> waiting_term;               // per terminal
  std::vector<Range> complete_nt;                // per lhs nonterminal
  std::vector<std::vector<int>> first_terms;     // per nonterminal, sorted terminals
};

EarleyParser::EarleyParser(const Grammar& grammar) : tables_(std::make_unique<Tables>()) {
  Tables& t = *tables_;
  t.grammar = &grammar;

  struct Key {
    int kind;  // 0 = next is NT, 1 = next is terminal, 2 = complete
    int index; // NT / terminal / lhs index
    int prod, dot;
  };
  std::vector<Key> keys;
  for (size_t p = 0; p < grammar.productions.size(); ++p) {
    const auto& rhs = grammar.productions[p].rhs;
    for (size_t dot = 0; dot <= rhs.size(); ++dot) {
      Key k{2, grammar.productions[p].lhs, static_cast<int>(p), static_cast<int>(dot)};
      if (dot < rhs.size()) {
        k.kind = rhs[dot].kind == Symbol::Nonterminal ? 0 : 1;
        k.index = rhs[dot].index;
      }
      keys.push_back(k);
    }
  }
  std::sort(keys.begin(), keys.end(), [](const Key& a, const Key& b) {
    return std::tie(a.kind, a.index, a.prod, a.dot) < std::tie(b.kind, b.index, b.prod, b.dot);
  });

  t.groups.resize(keys.size());
  t.group_of.resize(grammar.productions.size());
  for (size_t p = 0; p < grammar.productions.size(); ++p)
    t.group_of[p].resize(grammar.productions[p].rhs.size() + 1);
  t.waiting_nt.assign(grammar.nonterminals.size(), {0, 0});
  t.waiting_term.assign(grammar.terminals.size(), {0, 0});
  t.complete_nt.assign(grammar.nonterminals.size(), {0, 0});

  auto range_for = [&](int kind, int index) -> Range& {
    if (kind == 0) return t.waiting_nt[index];
    if (kind == 1) return t.waiting_term[index];
    return t.complete_nt[index];
  };
  for (int kind = 0; kind < 3; ++kind) {
    size_t count = kind == 1 ? grammar.terminals.size() : grammar.nonterminals.size();
    for (size_t i = 0; i < count; ++i) range_for(kind, static_cast<int>(i)) = {0, 0};
  }
  for (size_t id = 0; id < keys.size(); ++id) {
    const Key& k = keys[id];
    t.groups[id] = {k.prod, k.dot};
    t.group_of[k.prod][k.dot] = static_cast<uint32_t>(id);
    Range& r = range_for(k.kind, k.index);
    if (r.first == r.second) r = {static_cast<uint32_t>(id), static_cast<uint32_t>(id + 1)};
    else r.second = static_cast<uint32_t>(id + 1);
  }
  t.advance_of.resize(keys.size());
  for (size_t id = 0; id < keys.size(); ++id) {
    auto [p, dot] = t.groups[id];
    t.advance_of[id] = dot < static_cast<int>(grammar.productions[p].rhs.size())
                           ? static_cast<int32_t>(t.group_of[p][dot + 1])
                           : -1;
  }

  // FIRST sets through nullable prefixes.
  std::vector<std::set<int>> first(grammar.nonterminals.size());
  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& prod : grammar.productions) {
      auto& dst = first[prod.lhs];
      for (const Symbol& s : prod.rhs) {
        if (s.kind == Symbol::Terminal) {
          changed |= dst.insert(s.index).second;
          break;
        }
        for (int term : first[s.index]) changed |= dst.insert(term).second;
        if (!grammar.nullable[s.index]) break;
      }
    }
  }
  t.first_terms.resize(first.size());
  for (size_t i = 0; i < first.size(); ++i)
    t.first_terms[i].assign(first[i].begin(), first[i].end());
}

EarleyParser::~EarleyParser() = default;
EarleyParser::EarleyParser(EarleyParser&&) noexcept = default;
EarleyParser& EarleyParser::operator=(EarleyParser&&) noexcept = default;

const Grammar& EarleyParser::grammar() const { return *tables_->grammar; }

namespace {

// Top-down forest materialization: only nodes reachable from the accepted
// start item become forest nodes, so heavily ambiguous charts do not force
// exponential work for filtered parses.
struct ForestBuilder {
  const Grammar& grammar;
  const EarleyParser::Tables& tables;
  const TokenGraph& graph;
  const std::vector<std::vector<uint64_t>>& chart;

  ParseForest forest;
  std::unordered_map<uint64_t, int> interned;
  std::vector<int> expand_queue;
  // item -> columns containing it, ascending; lets expansion walk a prefix
  // item forward instead of scanning a column's completions when that side
  // is cheaper (right recursion piles all completions into one column).
  std::unordered_map<uint64_t, std::vector<int>> item_columns;

  void build_index() {
    size_t total = 0;
    for (const auto& column : chart) total += column.size();
    item_columns.reserve(total);
    for (size_t a = 0; a < chart.size(); ++a)
      for (uint64_t item : chart[a]) item_columns[item].push_back(static_cast<int>(a));
  }

  static uint64_t node_key(Symbol s, int from, int to) {
    return (static_cast<uint64_t>(s.kind) << 62) |
           (static_cast<uint64_t>(static_cast<uint32_t>(s.index)) << 40) |
           (static_cast<uint64_t>(static_cast<uint32_t>(from)) << 20) |
           static_cast<uint64_t>(static_cast<uint32_t>(to));
  }

  bool has_item(int anchor, int prod, int dot, int origin) const {
    uint64_t item = make_item(tables.group_of[prod][dot], static_cast<uint32_t>(origin));
    const auto& column = chart[anchor];
    return std::binary_search(column.begin(), column.end(), item);
  }

  int intern_nt(Symbol s, int from, int to) {
    uint64_t key = node_key(s, from, to);
    auto [it, fresh] = interned.emplace(key, static_cast<int>(forest.nodes.size()));
    if (!fresh) return it->second;
    ForestNode node;
    node.symbol = s;
    node.from_anchor = from;
    node.to_anchor = to;
    node.start = graph.anchors[from];
    node.end = graph.anchors[to];
    forest.nodes.push_back(std::move(node));
    expand_queue.push_back(it->second);
    return it->second;
  }

  int intern_leaf(int candidate) {
    const TokenCandidate& c = graph.candidates[candidate];
    Symbol s = Symbol::term(c.cls);
    uint64_t key = node_key(s, c.from_anchor, c.to_anchor);
    auto [it, fresh] = interned.emplace(key, static_cast<int>(forest.nodes.size()));
    if (!fresh) return it->second;
    ForestNode node;
    node.symbol = s;
    node.from_anchor = c.from_anchor;
    node.to_anchor = c.to_anchor;
    node.start = c.start;
    node.end = c.end;
    node.token = candidate;
    forest.nodes.push_back(std::move(node));
    return it->second;
  }

  // Origins k' such that nonterminal `nt` completes over [k', at].
  void complete_origins(int nt, int at, std::vector<int>& out) const {
    out.clear();
    ChartSlice s = slice(chart[at], tables.complete_nt[nt]);
    for (const uint64_t* it = s.begin; it != s.end; ++it)
      out.push_back(static_cast<int>(item_origin(*it)));
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
  }

  bool completes(int nt, int from, int to) const {
    for (int q : grammar.prods_by_lhs[nt]) {
      int len = static_cast<int>(grammar.productions[q].rhs.size());
      if (has_item(to, q, len, from)) return true;
    }
    return false;
  }

  // Enumerates every split of production p over [i, j] by walking the dots
  // backwards with an explicit stack; each complete path emits one derivation.
  void expand_production(int node, int p, int i, int j) {
    const auto& rhs = grammar.productions[p].rhs;
    const int len = static_cast<int>(rhs.size());
    if (len == 0) {
      if (i == j) forest.nodes[node].derivations.push_back({p, {}});
      return;
    }

    struct Option {
      int child;
      int pred_anchor;
    };
    struct Frame {
      int dot;
      int anchor;
      std::vector<Option> options;
      size_t next = 0;
    };
    std::vector<int> path(static_cast<size_t>(len));
    std::vector<Frame> stack;
    std::vector<int> origins;

    auto make_frame = [&](int dot, int anchor) {
      Frame f{dot, anchor, {}, 0};
      if (dot == 0) return f;  // no options; emission handled on push
      const Symbol s = rhs[dot - 1];
      if (s.kind == Symbol::Terminal) {
        for (int cid : graph.into_anchor[anchor]) {
          const TokenCandidate& c = graph.candidates[cid];
          if (c.cls != s.index) continue;
          if (!has_item(c.from_anchor, p, dot - 1, i)) continue;
          f.options.push_back({~cid, c.from_anchor});  // leaf marker
        }
      } else {
        // The child's start anchor can be enumerated from either side: all
        // complete spans of the nonterminal ending at `anchor`, or all
        // columns where the prefix item lives. Walk the cheaper list.
        auto pit = item_columns.find(
            make_item(tables.group_of[p][dot - 1], static_cast<uint32_t>(i)));
        if (pit == item_columns.end()) return f;  // prefix unreachable
        const std::vector<int>& cols = pit->second;
        ChartSlice comp = slice(chart[anchor], tables.complete_nt[s.index]);
        size_t comp_cost = static_cast<size_t>(comp.end - comp.begin);
        size_t pred_cost = cols.size() * grammar.prods_by_lhs[s.index].size();
        if (pred_cost <= comp_cost) {
          for (int k : cols) {
            if (k < i) continue;
            if (k > anchor) break;
            if (!completes(s.index, k, anchor)) continue;
            f.options.push_back({intern_nt(s, k, anchor), k});
          }
        } else {
          complete_origins(s.index, anchor, origins);
          for (int k : origins) {
            if (k < i) continue;
            if (!has_item(k, p, dot - 1, i)) continue;
            f.options.push_back({intern_nt(s, k, anchor), k});
          }
        }
      }
      return f;
    };

    stack.push_back(make_frame(len, j));
    while (!stack.empty()) {
      Frame& top = stack.back();
      if (top.dot == 0) {
        if (top.anchor == i) {
          Derivation d;
          d.production = p;
          d.children.assign(path.begin(), path.end());
          forest.nodes[node].derivations.push_back(std::move(d));
        }
        stack.pop_back();
        continue;
      }
      if (top.next >= top.options.size()) {
        stack.pop_back();
        continue;
      }
      Option opt = top.options[top.next++];
      int child = opt.child < 0 ? intern_leaf(~opt.child) : opt.child;
      path[static_cast<size_t>(top.dot - 1)] = child;
      stack.push_back(make_frame(top.dot - 1, opt.pred_anchor));
    }
  }

  void expand(int node) {
    ForestNode& n = forest.nodes[node];
    const int i = n.from_anchor, j = n.to_anchor;
    const int nt = n.symbol.index;
    for (int p : grammar.prods_by_lhs[nt]) {
      int len = static_cast<int>(grammar.productions[p].rhs.size());
      if (!has_item(j, p, len, i)) continue;
      expand_production(node, p, i, j);
    }
  }

  void normalize() {
    // Deterministic derivation order: by production, then child spans/tokens.
    auto child_key = [&](int id) {
      const ForestNode& c = forest.nodes[id];
      return std::tuple(c.from_anchor, c.to_anchor, static_cast<int>(c.symbol.kind),
                        c.symbol.index, c.token);
    };
    for (auto& node : forest.nodes) {
      std::sort(node.derivations.begin(), node.derivations.end(),
                [&](const Derivation& a, const Derivation& b) {
                  if (a.production != b.production) return a.production < b.production;
                  return std::lexicographical_compare(
                      a.children.begin(), a.children.end(), b.children.begin(), b.children.end(),
                      [&](int x, int y) { return child_key(x) < child_key(y); });
                });
    }

    // Tighten byte spans bottom-up: a node ends where its last token ends,
    // not where the next one starts. Iterative post-order over the DAG
    // (states: 0 unvisited, 1 children pending, 2 done).
    std::vector<char> state(forest.nodes.size(), 0);
    std::vector<int> stack;
    for (size_t seed = 0; seed < forest.nodes.size(); ++seed) {
      if (state[seed] == 2) continue;
      stack.push_back(static_cast<int>(seed));
      while (!stack.empty()) {
        int id = stack.back();
        ForestNode& n = forest.nodes[id];
        if (state[id] == 2) {
          stack.pop_back();
          continue;
        }
        if (n.token >= 0) {
          state[id] = 2;
          stack.pop_back();
          continue;
        }
        if (state[id] == 0) {
          state[id] = 1;
          for (const auto& d : n.derivations)
            for (int child : d.children)
              if (state[child] != 2) stack.push_back(child);
          continue;
        }
        size_t end = n.start;
        for (const auto& d : n.derivations)
          for (int child : d.children) end = std::max(end, forest.nodes[child].end);
        n.end = end;
        state[id] = 2;
        stack.pop_back();
      }
    }
  }
};

}  // namespace

Result<ParseForest> EarleyParser::parse(const TokenGraph& graph) const {
  const Tables& t = *tables_;
  const Grammar& g = *t.grammar;
  const int anchor_count = static_cast<int>(graph.anchors.size());
  if (anchor_count == 0 || graph.start_anchor < 0)
    return Error{ErrorKind::Syntax, "token graph has no anchors"};
  if (anchor_count >= (1 << 20))
    return Error{ErrorKind::Syntax, "input too large (over 2^20 token positions)"};

  std::vector<std::vector<uint64_t>> chart(anchor_count);
  std::vector<std::vector<uint64_t>> pending(anchor_count);

  std::vector<uint64_t> queue;
  std::unordered_set<uint64_t> present;
  std::vector<char> predicted(g.nonterminals.size(), 0);
  int furthest = graph.start_anchor;

  auto add = [&](uint64_t item) {
    if (present.insert(item).second) queue.push_back(item);
  };

  for (int a = 0; a < anchor_count; ++a) {
    queue.clear();
    present.clear();
    std::fill(predicted.begin(), predicted.end(), 0);
    for (uint64_t item : pending[a]) add(item);
    pending[a].clear();
    pending[a].shrink_to_fit();
    if (a == graph.start_anchor)
      for (int p : g.prods_by_lhs[g.start])
        add(make_item(t.group_of[p][0], static_cast<uint32_t>(a)));
    if (!queue.empty() && a > furthest) furthest = a;

    for (size_t qi = 0; qi < queue.size(); ++qi) {
      const uint64_t item = queue[qi];
      const uint32_t group = item_group(item);
      const uint32_t origin = item_origin(item);
      const auto [p, dot] = t.groups[group];
      const auto& rhs = g.productions[p].rhs;
      if (dot < static_cast<int>(rhs.size())) {
        const Symbol s = rhs[dot];
        if (s.kind == Symbol::Nonterminal) {
          if (!predicted[s.index]) {
            predicted[s.index] = 1;
            for (int q : g.prods_by_lhs[s.index])
              add(make_item(t.group_of[q][0], static_cast<uint32_t>(a)));
          }
          // Nullable completion: advance over the nonterminal immediately so
          // empty derivations never need same-column completion.
          if (g.nullable[s.index]) add(make_item(t.advance_of[group], origin));
        }
      } else if (static_cast<int>(origin) != a) {
        ChartSlice waiting = slice(chart[origin], t.waiting_nt[g.productions[p].lhs]);
        for (const uint64_t* w = waiting.begin; w != waiting.end; ++w)
          add(make_item(t.advance_of[item_group(*w)], item_origin(*w)));
      }
    }

    std::sort(queue.begin(), queue.end());
    chart[a] = queue;
    chart[a].shrink_to_fit();

    for (int cid : graph.at_anchor[a]) {
      const TokenCandidate& c = graph.candidates[cid];
      ChartSlice waiting = slice(chart[a], t.waiting_term[c.cls]);
      for (const uint64_t* w = waiting.begin; w != waiting.end; ++w)
        pending[c.to_anchor].push_back(make_item(t.advance_of[item_group(*w)], item_origin(*w)));
    }
  }

  const int start_anchor = graph.start_anchor;
  const int end_anchor = graph.end_anchor >= 0 ? graph.end_anchor : start_anchor;
  bool accepted = false;
  for (int p : g.prods_by_lhs[g.start]) {
    int len = static_cast<int>(g.productions[p].rhs.size());
    uint64_t item = make_item(t.group_of[p][len], static_cast<uint32_t>(start_anchor));
    if (std::binary_search(chart[end_anchor].begin(), chart[end_anchor].end(), item)) {
      accepted = true;
      break;
    }
  }

  if (!accepted) {
    std::set<std::string> expected;
    for (uint64_t item : chart[furthest]) {
      const auto [p, dot] = t.groups[item_group(item)];
      const auto& rhs = g.productions[p].rhs;
      if (dot >= static_cast<int>(rhs.size())) continue;
      const Symbol s = rhs[dot];
      if (s.kind == Symbol::Terminal) {
        expected.insert(g.symbol_name(s));
      } else {
        for (int term : t.first_terms[s.index]) expected.insert(g.symbol_name(Symbol::term(term)));
      }
    }
    Error err;
    err.kind = ErrorKind::Syntax;
    err.offset = graph.anchors[furthest];
    err.expected.assign(expected.begin(), expected.end());
    if (err.expected.empty()) {
      err.message = "unexpected input";
    } else {
      err.message = "expected ";
      for (size_t i = 0; i < err.expected.size(); ++i) {
        if (i) err.message += i + 1 == err.expected.size() ? " or " : ", ";
        err.message += err.expected[i];
      }
    }
    return err;
  }

  ForestBuilder builder{g, t, graph, chart};
  builder.build_index();
  int root = builder.intern_nt(Symbol::nt(g.start), start_anchor, end_anchor);
  for (size_t i = 0; i < builder.expand_queue.size(); ++i) builder.expand(builder.expand_queue[i]);
  builder.normalize();
  builder.forest.root = root;
  return std::move(builder.forest);
}

namespace {

std::vector<uint64_t> node_counts(const ParseForest& forest) {
  std::vector<uint64_t> counts(forest.nodes.size(), 0);
  if (forest.root < 0) return counts;
  std::vector<std::pair<int, bool>> stack{{forest.root, false}};
  while (!stack.empty()) {
    auto [id, ready] = stack.back();
    stack.pop_back();
    const ForestNode& n = forest.nodes[id];
    if (counts[id] != 0) continue;
    if (n.token >= 0) {
      counts[id] = 1;
      continue;
    }
    if (!ready) {
      stack.emplace_back(id, true);
      for (const auto& d : n.derivations)
        for (int child : d.children)
          if (counts[child] == 0) stack.emplace_back(child, false);
      continue;
    }
    uint64_t total = 0;
    for (const auto& d : n.derivations) {
      uint64_t ways = 1;
      for (int child : d.children) ways = sat_mul(ways, counts[child]);
      total = sat_add(total, ways);
    }
    counts[id] = total;
  }
  return counts;
}

// Materializes the k-th interpretation (0-based) under the enumeration order.
ParseTree build_kth_tree(const ParseForest& forest, const std::vector<uint64_t>& counts,
                         uint64_t k) {
  ParseTree tree;
  struct Job {
    int fnode;
    uint64_t index;
    int parent, slot;
  };
  std::vector<Job> jobs{{forest.root, k, -1, -1}};
  while (!jobs.empty()) {
    Job job = jobs.back();
    jobs.pop_back();
    const ForestNode& n = forest.nodes[job.fnode];
    int id = static_cast<int>(tree.nodes.size());
    TreeNode out;
    out.symbol = n.symbol;
    out.start = n.start;
    out.end = n.end;
    out.token = n.token;
    tree.nodes.push_back(std::move(out));
    if (job.parent >= 0)
      tree.nodes[job.parent].children[job.slot] = id;
    else
      tree.root = id;
    if (n.token >= 0) continue;

    uint64_t rest = job.index;
    const Derivation* chosen = nullptr;
    for (const auto& d : n.derivations) {
      uint64_t ways = 1;
      for (int child : d.children) ways = sat_mul(ways, counts[child]);
      if (rest < ways) {
        chosen = &d;
        break;
      }
      rest -= ways;
    }
    assert(chosen && "tree index out of range");
    tree.nodes[id].production = chosen->production;
    tree.nodes[id].children.assign(chosen->children.size(), -1);
    std::vector<uint64_t> sub(chosen->children.size());
    for (size_t ci = chosen->children.size(); ci-- > 0;) {
      uint64_t c = counts[chosen->children[ci]];
      sub[ci] = rest % c;
      rest /= c;
    }
    for (size_t ci = chosen->children.size(); ci-- > 0;)
      jobs.push_back({chosen->children[ci], sub[ci], id, static_cast<int>(ci)});
  }
  return tree;
}

}  // namespace

uint64_t count_trees(const ParseForest& forest) {
  if (forest.root < 0) return 0;
  return node_counts(forest)[forest.root];
}

TreeEnumeration enumerate_trees(const ParseForest& forest, size_t limit) {
  TreeEnumeration out;
  if (forest.root < 0) return out;
  auto counts = node_counts(forest);
  out.total = counts[forest.root];
  uint64_t take = std::min<uint64_t>(out.total, limit);
  out.trees.reserve(take);
  for (uint64_t k = 0; k < take; ++k) out.trees.push_back(build_kth_tree(forest, counts, k));
  out.more = out.total > take;
  return out;
}

Result<ParseTree> unique_tree(const ParseForest& forest) {
  auto counts = node_counts(forest);
  uint64_t total = forest.root >= 0 ? counts[forest.root] : 0;
  if (total == 1) return build_kth_tree(forest, counts, 0);
  Error err;
  err.kind = ErrorKind::Ambiguity;
  err.interpretation_count = total;
  err.message = total == 0 ? "no interpretation"
                           : std::to_string(total) + (total >= kTreeCountCap ? "+" : "") +
                                 " interpretations";
  return err;
}

std::string format_tree(const ParseTree& tree, const Grammar& grammar, std::string_view input) {
  if (tree.root < 0) return "";
  std::string out;
  // (node, emitted-children-count); -1 cursor means "emit label first".
  std::vector<std::pair<int, int>> stack{{tree.root, -1}};
  while (!stack.empty()) {
    auto& [id, cursor] = stack.back();
    const TreeNode& n = tree.nodes[id];
    // Elide the augmented wrapper.
    if (id == tree.root && n.symbol.kind == Symbol::Nonterminal &&
        n.symbol.index == grammar.start && n.children.size() == 1) {
      int child = n.children[0];
      stack.back() = {child, -1};
      continue;
    }
    if (cursor < 0) {
      std::string name = grammar.symbol_name(n.symbol);
      if (!name.empty() && name.front() == '<') name = name.substr(1, name.size() - 2);
      if (n.token >= 0 || n.symbol.kind == Symbol::Terminal) {
        if (!name.empty() && name.front() == '"')
          out += name;
        else
          out += name + "\"" + std::string(input.substr(n.start, n.end - n.start)) + "\"";
        stack.pop_back();
        continue;
      }
      out += name + "(";
      cursor = 0;
      continue;
    }
    if (cursor >= static_cast<int>(n.children.size())) {
      out += ")";
      stack.pop_back();
      continue;
    }
    if (cursor > 0) out += " ";
    int child = n.children[cursor];
    ++cursor;
    stack.emplace_back(child, -1);
  }
  return out;
}

std::string dump_forest(const ParseForest& forest, const Grammar& grammar) {
  std::vector<int> order(forest.nodes.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    const ForestNode& x = forest.nodes[a];
    const ForestNode& y = forest.nodes[b];
    return std::tuple(x.start, x.end, grammar.symbol_name(x.symbol)) <
           std::tuple(y.start, y.end, grammar.symbol_name(y.symbol));
  });
  std::string out;
  for (int id : order) {
    const ForestNode& n = forest.nodes[id];
    if (n.token >= 0) continue;
    std::string head = grammar.symbol_name(n.symbol) + "[" + std::to_string(n.start) + "," +
                       std::to_string(n.end) + ")";
    for (const auto& d : n.derivations) {
      out += head + " ::=";
      if (d.children.empty()) out += " <empty>";
      for (int child : d.children) {
        const ForestNode& c = forest.nodes[child];
        out += " " + grammar.symbol_name(c.symbol) + "[" + std::to_string(c.start) + "," +
               std::to_string(c.end) + ")";
      }
      out += "\n";
    }
  }
  return out;
}

}  // namespace modelcc
