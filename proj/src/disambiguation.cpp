#include "modelcc/disambiguation.hpp"

#include <algorithm>
#include <cassert>
#include <climits>
#include <deque>
#include <map>
#include <set>
#include <string>
#include <tuple>
#include <unordered_map>
#include <utility>
#include <vector>

namespace modelcc {

namespace {

const ConstraintSet::ElementInfo kNoInfo{};
const std::vector<std::string> kNoNames{};

bool sets_intersect(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    int c = a[i].compare(b[j]);
    if (c == 0) return true;
    (c < 0 ? i : j)++;
  }
  return false;
}

// Interned reconstruction contexts. Top (id 0) imposes nothing. Operand
// carries the enclosing operator's constraint surface plus whether equal
// priority is tolerated in this slot. Resolve pins which concrete elements may
// realize an operator slot, so each surviving alternative keeps the operand
// constraints of the operator it actually resolved to.
struct CtxSpace {
  struct Behavior {
    int family = -1;  // interned comparability set: the element + Selection ancestors
    std::optional<int> priority;
    Associativity assoc = Associativity::Unspecified;
  };
  enum Kind : int { kTop = 0, kOperand = 1, kResolve = 2 };
  struct Ctx {
    int kind = kTop;
    int behavior = -1;  // kOperand
    bool allow_eq = true;
    int nameset = -1;  // kResolve
  };

  std::vector<std::vector<std::string>> sets;
  std::map<std::vector<std::string>, int> set_ids;
  std::vector<Behavior> behaviors;
  std::map<std::tuple<int, long long, int>, int> behavior_ids;
  std::vector<Ctx> ctxs;
  std::map<std::tuple<int, int, bool, int>, int> ctx_ids;

  CtxSpace() {
    ctxs.push_back(Ctx{});
    ctx_ids[{kTop, -1, true, -1}] = 0;
  }

  int intern_set(std::vector<std::string> v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    auto it = set_ids.find(v);
    if (it != set_ids.end()) return it->second;
    int id = static_cast<int>(sets.size());
    sets.push_back(v);
    set_ids.emplace(std::move(v), id);
    return id;
  }

  int intern_behavior(const Behavior& b) {
    auto key = std::make_tuple(b.family, b.priority ? static_cast<long long>(*b.priority) : LLONG_MIN,
                               static_cast<int>(b.assoc));
    auto it = behavior_ids.find(key);
    if (it != behavior_ids.end()) return it->second;
    int id = static_cast<int>(behaviors.size());
    behaviors.push_back(b);
    behavior_ids.emplace(key, id);
    return id;
  }

  int intern_ctx(const Ctx& c) {
    auto key = std::make_tuple(c.kind, c.behavior, c.allow_eq, c.nameset);
    auto it = ctx_ids.find(key);
    if (it != ctx_ids.end()) return it->second;
    int id = static_cast<int>(ctxs.size());
    ctxs.push_back(c);
    ctx_ids.emplace(key, id);
    return id;
  }

  int operand(int behavior, bool allow_eq) { return intern_ctx({kOperand, behavior, allow_eq, -1}); }
  int resolve(int nameset) { return intern_ctx({kResolve, -1, true, nameset}); }
};

// Interned behavior per element; -1 for elements that carry no spec.
struct BehaviorCache {
  const ConstraintSet& cs;
  CtxSpace& sp;
  std::map<std::string, int> ids;

  int of(const std::string& element) {
    auto it = ids.find(element);
    if (it != ids.end()) return it->second;
    const auto& inf = cs.info(element);
    int id = -1;
    if (inf.spec_bearing) {
      CtxSpace::Behavior b;
      b.family = sp.intern_set(inf.selection_ancestors);
      b.priority = inf.priority;
      b.assoc = inf.assoc;
      id = sp.intern_behavior(b);
    }
    ids.emplace(element, id);
    return id;
  }
};

// 0 pass; 1 = priority violation (child binds looser); 2 = equal priority in a
// slot closed by associativity. Constraints only compare within a shared
// family, and only between spec-carrying operators.
int check_operand(const CtxSpace& sp, const CtxSpace::Ctx& c, int child_behavior) {
  if (c.kind != CtxSpace::kOperand || child_behavior < 0) return 0;
  const CtxSpace::Behavior& pb = sp.behaviors[c.behavior];
  const CtxSpace::Behavior& cb = sp.behaviors[child_behavior];
  if (!sets_intersect(sp.sets[pb.family], sp.sets[cb.family])) return 0;
  if (pb.priority && cb.priority && *cb.priority > *pb.priority) return 1;
  if (!c.allow_eq) {
    bool same = (pb.priority && cb.priority) ? *pb.priority == *cb.priority
                                             : (!pb.priority && !cb.priority);
    if (same) return 2;
  }
  return 0;
}

// Which operand slots tolerate a same-priority operator: the recursion side of
// the declared associativity, every slot when none is declared, none when
// non-associative.
std::vector<char> slot_allow(Associativity assoc, size_t n) {
  std::vector<char> v(n, assoc == Associativity::Unspecified ? 1 : 0);
  if (n == 0) return v;
  if (assoc == Associativity::LeftToRight) v.front() = 1;
  if (assoc == Associativity::RightToLeft) v.back() = 1;
  return v;
}

// Checks a terminal occurring in a constrained slot. 0 keep, 1/2 as
// check_operand, 3 = excluded by a Resolve pin (not a rule violation: the
// interpretation survives under the sibling alternative that pinned it).
int leaf_check(const CtxSpace& sp, BehaviorCache& beh, const ConstraintSet& cs, int ctx_id,
               const std::string& origin) {
  const CtxSpace::Ctx c = sp.ctxs[ctx_id];
  if (c.kind == CtxSpace::kResolve) {
    const auto& set = sp.sets[c.nameset];
    return std::binary_search(set.begin(), set.end(), origin) ? 0 : 3;
  }
  if (c.kind == CtxSpace::kOperand && !origin.empty() && !cs.info(origin).delimited) {
    int b = beh.of(origin);
    return check_operand(sp, sp.ctxs[ctx_id], b);
  }
  return 0;
}

// One concrete way to emit a production under a context: the contexts its rhs
// symbols must be rebuilt under. Member-carrier composites emit one variant
// per operator behavior class, with the operator slot pinned to that class.
struct Emission {
  std::vector<int> ctx;  // per rhs position; 0 = unconstrained
};

struct Plan {
  std::vector<Emission> emissions;
  bool dropped_r1 = false;
  bool dropped_r2 = false;
  bool resolve_miss = false;  // the element is outside a Resolve pin
};

// Shared by the forest filter (dynamic candidates from the node) and the
// grammar refiner (static candidates from the member's concrete closure).
struct Planner {
  const Grammar& g;
  const ConstraintSet& cs;
  CtxSpace& sp;
  BehaviorCache& beh;
  bool structural;

  Plan plan(const Production& p, int ctx_id, const std::vector<std::string>& candidates) {
    Plan out;
    size_t n = p.rhs.size();
    auto plain = [&] {
      Emission e;
      e.ctx.assign(n, 0);
      return e;
    };
    if (!structural) {
      out.emissions.push_back(plain());
      return out;
    }
    const CtxSpace::Ctx c = sp.ctxs[ctx_id];  // copy: interning below may grow the pool
    switch (p.kind) {
      case ProductionKind::AugmentedStart: {
        out.emissions.push_back(plain());
        return out;
      }
      case ProductionKind::SelectionUnit: {
        // Operand constraints stop at a delimited selection (its own
        // delimiters make the nesting explicit); Resolve pins pass through
        // regardless, they only name the operator.
        int pass = ctx_id;
        if (c.kind == CtxSpace::kOperand && cs.info(p.origin_element).delimited) pass = 0;
        Emission e = plain();
        for (size_t i = 0; i < n; ++i)
          if (p.binding[i] == 0) e.ctx[i] = pass;
        out.emissions.push_back(std::move(e));
        return out;
      }
      case ProductionKind::ListRecursive:
      case ProductionKind::ListBase: {
        Emission e = plain();
        for (size_t i = 0; i < n; ++i)
          if (p.binding[i] >= 0) e.ctx[i] = ctx_id;
        out.emissions.push_back(std::move(e));
        return out;
      }
      case ProductionKind::Composite:
        break;
    }

    const auto& inf = cs.info(p.origin_element);
    if (c.kind == CtxSpace::kResolve) {
      const auto& set = sp.sets[c.nameset];
      if (!std::binary_search(set.begin(), set.end(), p.origin_element)) {
        out.resolve_miss = true;
        return out;
      }
    }
    bool checked = c.kind == CtxSpace::kOperand && !inf.delimited;

    // operand slots in rhs order
    std::vector<size_t> slots;
    for (size_t i = 0; i < n; ++i) {
      int m = p.binding[i];
      if (m >= 0 && m < static_cast<int>(inf.operand_slots.size()) && inf.operand_slots[m])
        slots.push_back(i);
    }

    if (inf.self_carrier) {
      int b = beh.of(p.origin_element);
      if (checked) {
        int rc = check_operand(sp, sp.ctxs[ctx_id], b);
        if (rc == 1) out.dropped_r1 = true;
        if (rc == 2) out.dropped_r2 = true;
        if (rc) return out;
      }
      Emission e = plain();
      const CtxSpace::Behavior& sb = sp.behaviors[b];
      std::vector<char> allow = slot_allow(sb.assoc, slots.size());
      for (size_t k = 0; k < slots.size(); ++k) e.ctx[slots[k]] = sp.operand(b, allow[k] != 0);
      out.emissions.push_back(std::move(e));
      return out;
    }

    if (inf.carrier_member < 0) {  // no operator anywhere in this composite
      out.emissions.push_back(plain());
      return out;
    }

    int cpos = -1;
    for (size_t i = 0; i < n; ++i)
      if (p.binding[i] == inf.carrier_member) {
        cpos = static_cast<int>(i);
        break;
      }
    if (cpos < 0) {  // defensive: variant without the carrier cannot occur
      out.emissions.push_back(plain());
      return out;
    }

    // Partition the operator candidates by constraint behavior; each class
    // yields one emission whose operand slots follow that class's spec.
    std::vector<std::pair<int, std::vector<std::string>>> classes;
    for (const std::string& cand : candidates) {
      int b = beh.of(cand);
      auto it = std::find_if(classes.begin(), classes.end(),
                             [&](const auto& cl) { return cl.first == b; });
      if (it == classes.end())
        classes.push_back({b, {cand}});
      else
        it->second.push_back(cand);
    }
    for (auto& [b, names] : classes) {
      if (checked) {
        int rc = check_operand(sp, sp.ctxs[ctx_id], b);
        if (rc == 1) {
          out.dropped_r1 = true;
          continue;
        }
        if (rc == 2) {
          out.dropped_r2 = true;
          continue;
        }
      }
      Emission e = plain();
      bool restrict_slot = p.rhs[cpos].kind == Symbol::Nonterminal && classes.size() > 1;
      if (b >= 0) {
        if (p.rhs[cpos].kind == Symbol::Nonterminal) e.ctx[cpos] = sp.resolve(sp.intern_set(names));
        const CtxSpace::Behavior cb = sp.behaviors[b];
        std::vector<char> allow = slot_allow(cb.assoc, slots.size());
        for (size_t k = 0; k < slots.size(); ++k) e.ctx[slots[k]] = sp.operand(b, allow[k] != 0);
      } else if (restrict_slot) {
        // spec-free candidates: pin the slot so classes stay disjoint,
        // leave the operands unconstrained
        e.ctx[cpos] = sp.resolve(sp.intern_set(names));
      }
      out.emissions.push_back(std::move(e));
    }
    return out;
  }
};

const char* rule_name(const FilterStats& st) {
  if (st.r4_custom) return "custom";
  if (st.r3_composition) return "composition";
  if (st.r2_associativity) return "associativity";
  if (st.r1_priority) return "priority";
  return nullptr;
}

Error over_constrained(const FilterStats& st) {
  const char* rule = rule_name(st);
  Error err;
  err.kind = ErrorKind::OverConstrained;
  err.message = std::string("every interpretation violates the declared constraints") +
                (rule ? std::string(" (last applied rule: ") + rule + ")" : "");
  return err;
}

// Rebuilds the forest top-down, splitting nodes per context and dropping
// derivations that fail the structural checks; then applies composition and
// custom rules as a grouped post-pass, cascades liveness, and compacts.
struct Filter {
  const ParseForest& in;
  const ConstraintSet& cs;
  const Grammar& g;
  std::string_view input;
  bool structural;

  CtxSpace sp;
  BehaviorCache beh{cs, sp};
  Planner planner{g, cs, sp, beh, structural};
  FilterStats stats;

  ParseForest out;
  std::vector<int> out_origin;  // out node -> in node
  std::unordered_map<uint64_t, int> memo;  // (in node, ctx) -> out id, -1 dead
  std::unordered_map<int, int> leaf_memo;
  std::map<int, std::vector<std::string>> resolve_memo;

  static uint64_t key_of(int node, int ctx) {
    return (static_cast<uint64_t>(static_cast<uint32_t>(node)) << 24) | static_cast<uint32_t>(ctx);
  }

  // Concrete elements a node can realize (operator-candidate resolution).
  const std::vector<std::string>& resolve_set(int id) {
    auto it = resolve_memo.find(id);
    if (it != resolve_memo.end()) return it->second;
    std::vector<std::string>& slot = resolve_memo[id];
    const ForestNode& n = in.nodes[id];
    std::vector<std::string> acc;
    if (n.symbol.kind == Symbol::Terminal) {
      const std::string& o = g.terminals[n.symbol.index].origin_element;
      if (!o.empty()) acc.push_back(o);
    } else {
      for (const Derivation& d : n.derivations) {
        const Production& p = g.productions[d.production];
        if (p.kind == ProductionKind::Composite) {
          acc.push_back(p.origin_element);
        } else if (p.kind == ProductionKind::SelectionUnit ||
                   p.kind == ProductionKind::AugmentedStart) {
          for (size_t i = 0; i < p.rhs.size(); ++i) {
            if (p.binding[i] != 0) continue;
            const auto& sub = resolve_set(d.children[i]);
            acc.insert(acc.end(), sub.begin(), sub.end());
          }
        }
      }
    }
    std::sort(acc.begin(), acc.end());
    acc.erase(std::unique(acc.begin(), acc.end()), acc.end());
    slot = std::move(acc);
    return slot;
  }

  int leaf_out(int in_leaf) {
    auto it = leaf_memo.find(in_leaf);
    if (it != leaf_memo.end()) return it->second;
    int id = static_cast<int>(out.nodes.size());
    out.nodes.push_back(in.nodes[in_leaf]);
    out_origin.push_back(in_leaf);
    leaf_memo.emplace(in_leaf, id);
    return id;
  }

  struct ChildRef {
    int pos;
    int in_child;
    int ctx;
  };
  struct Variant {
    int production;
    int deriv;
    std::vector<int> children;
    std::vector<ChildRef> pending;
    bool dead = false;
  };
  struct Frame {
    int in_node;
    uint64_t key;
    std::vector<Variant> variants;
    size_t vi = 0, pi = 0;
  };
  std::deque<Frame> stack;

  void note(const Plan& p) {
    if (p.dropped_r1) stats.r1_priority = true;
    if (p.dropped_r2) stats.r2_associativity = true;
  }

  void push(int node, int ctx) {
    Frame f;
    f.in_node = node;
    f.key = key_of(node, ctx);
    const ForestNode& n = in.nodes[node];
    for (size_t di = 0; di < n.derivations.size(); ++di) {
      const Derivation& d = n.derivations[di];
      const Production& p = g.productions[d.production];
      const std::vector<std::string>* cands = &kNoNames;
      if (structural && p.kind == ProductionKind::Composite) {
        const auto& inf = cs.info(p.origin_element);
        if (!inf.self_carrier && inf.carrier_member >= 0) {
          for (size_t i = 0; i < p.rhs.size(); ++i)
            if (p.binding[i] == inf.carrier_member) {
              cands = &resolve_set(d.children[i]);
              break;
            }
        }
      }
      Plan plan = planner.plan(p, ctx, *cands);
      note(plan);
      for (Emission& e : plan.emissions) {
        Variant v;
        v.production = d.production;
        v.deriv = static_cast<int>(di);
        v.children.assign(d.children.size(), -1);
        bool ok = true;
        for (size_t i = 0; i < d.children.size() && ok; ++i) {
          int ch = d.children[i];
          const ForestNode& cn = in.nodes[ch];
          if (cn.symbol.kind == Symbol::Terminal) {
            int rc = e.ctx[i] == 0 ? 0
                                   : leaf_check(sp, beh, cs, e.ctx[i],
                                                g.terminals[cn.symbol.index].origin_element);
            if (rc == 1) stats.r1_priority = true;
            if (rc == 2) stats.r2_associativity = true;
            if (rc != 0)
              ok = false;
            else
              v.children[i] = leaf_out(ch);
          } else {
            v.pending.push_back({static_cast<int>(i), ch, e.ctx[i]});
          }
        }
        if (ok) f.variants.push_back(std::move(v));
      }
    }
    stack.push_back(std::move(f));
  }

  // Returns true when a child frame was pushed and this frame must wait.
  bool advance(Frame& f) {
    while (f.vi < f.variants.size()) {
      Variant& v = f.variants[f.vi];
      if (!v.dead) {
        while (f.pi < v.pending.size()) {
          const ChildRef& cr = v.pending[f.pi];
          auto it = memo.find(key_of(cr.in_child, cr.ctx));
          if (it == memo.end()) {
            push(cr.in_child, cr.ctx);
            return true;
          }
          if (it->second < 0) {
            v.dead = true;
            break;
          }
          v.children[cr.pos] = it->second;
          ++f.pi;
        }
      }
      ++f.vi;
      f.pi = 0;
    }
    return false;
  }

  void complete(Frame& f) {
    std::vector<Derivation> ds;
    for (Variant& v : f.variants) {
      if (v.dead) continue;
      ds.push_back({v.production, std::move(v.children)});
    }
    if (ds.empty()) {
      memo[f.key] = -1;
      return;
    }
    int id = static_cast<int>(out.nodes.size());
    ForestNode n = in.nodes[f.in_node];
    n.derivations = std::move(ds);
    out.nodes.push_back(std::move(n));
    out_origin.push_back(f.in_node);
    memo[f.key] = id;
  }

  int eval(int node, int ctx) {
    push(node, ctx);
    while (!stack.empty()) {
      Frame& f = stack.back();
      if (advance(f)) continue;
      complete(f);
      stack.pop_back();
    }
    return memo.at(key_of(node, ctx));
  }

  const std::string& element_of(int out_node) const {
    static const std::string kNone;
    const ForestNode& n = out.nodes[out_node];
    if (n.symbol.kind != Symbol::Nonterminal) return kNone;
    return g.nonterminals[n.symbol.index].element;
  }

  // True when this derivation realizes the trailing member with content.
  bool binds_trailing(const Derivation& d, int trailing) const {
    const Production& p = g.productions[d.production];
    for (size_t i = 0; i < p.rhs.size(); ++i) {
      if (p.binding[i] != trailing) continue;
      const ForestNode& ch = out.nodes[d.children[i]];
      if (ch.symbol.kind == Symbol::Terminal || ch.to_anchor > ch.from_anchor) return true;
    }
    return false;
  }

  CustomContext make_context(int node_id, const Derivation& d, const ElementType& element) {
    const ForestNode& n = out.nodes[node_id];
    const Production& p = g.productions[d.production];
    CustomContext ctx;
    ctx.model = &cs.model();
    ctx.element = &element;
    ctx.variant = p.variant;
    ctx.input = input;
    ctx.start = n.start;
    ctx.end = n.end;
    ctx.text = input.substr(n.start, n.end - n.start);
    for (size_t i = 0; i < p.rhs.size(); ++i) {
      if (p.binding[i] < 0) continue;
      const ForestNode& ch = out.nodes[d.children[i]];
      CustomContext::Child c;
      c.member = &element.members[p.binding[i]];
      const auto& types = resolve_set(out_origin[d.children[i]]);
      if (types.size() == 1) c.type = cs.model().find(types[0]);
      c.start = ch.start;
      c.end = ch.end;
      c.text = input.substr(ch.start, ch.end - ch.start);
      ctx.children.push_back(std::move(c));
    }
    return ctx;
  }

  Result<ParseForest> run() {
    int root = eval(in.root, 0);
    if (root < 0) return over_constrained(stats);
    out.root = root;

    std::vector<std::vector<char>> drop(out.nodes.size());
    for (size_t i = 0; i < out.nodes.size(); ++i) drop[i].assign(out.nodes[i].derivations.size(), 0);

    // Composition settles where an optional trailing member attaches. Two
    // coordinated preferences per (element, start anchor):
    //  - same span derived both with and without the member: the text was
    //    absorbed deeper on the "without" side, so eager defers (drops
    //    "with") and lazy binds here (drops "without");
    //  - spans that only bind vs spans that only omit: eager keeps the
    //    binding (shift-like) span, lazy the non-binding one.
    if (cs.any_composition()) {
      std::map<std::pair<int, int>, std::map<int, std::vector<int>>> groups;
      for (size_t i = 0; i < out.nodes.size(); ++i) {
        const std::string& el = element_of(static_cast<int>(i));
        if (el.empty()) continue;
        const auto& inf = cs.info(el);
        if (inf.composition == Composition::Unspecified || inf.trailing_optional < 0) continue;
        const ForestNode& n = out.nodes[i];
        groups[{n.symbol.index, n.from_anchor}][n.to_anchor].push_back(static_cast<int>(i));
      }
      for (auto& [key, spans] : groups) {
        (void)key;
        const auto& inf = cs.info(element_of(spans.begin()->second.front()));
        bool eager = inf.composition == Composition::Eager;
        int trailing = inf.trailing_optional;
        bool any_pure_with = false, any_pure_without = false;
        for (auto& [to, ids] : spans) {
          (void)to;
          bool has_with = false, has_without = false;
          for (int id : ids)
            for (const Derivation& d : out.nodes[id].derivations)
              (binds_trailing(d, trailing) ? has_with : has_without) = true;
          if (has_with && has_without) {
            for (int id : ids) {
              auto& node = out.nodes[id];
              for (size_t di = 0; di < node.derivations.size(); ++di)
                if (binds_trailing(node.derivations[di], trailing) == eager) {
                  drop[id][di] = 1;
                  stats.r3_composition = true;
                }
            }
          } else if (has_with) {
            any_pure_with = true;
          } else if (has_without) {
            any_pure_without = true;
          }
        }
        if (!(any_pure_with && any_pure_without)) continue;
        for (auto& [to, ids] : spans) {
          (void)to;
          bool has_with = false, has_without = false;
          for (int id : ids)
            for (const Derivation& d : out.nodes[id].derivations)
              (binds_trailing(d, trailing) ? has_with : has_without) = true;
          if (has_with == has_without) continue;  // mixed spans already settled
          if (has_with != eager) {
            for (int id : ids) {
              auto& node = out.nodes[id];
              for (size_t di = 0; di < node.derivations.size(); ++di) drop[id][di] = 1;
              stats.r3_composition = true;
            }
          }
        }
      }
    }

    // Custom predicates veto individual derivations.
    if (cs.any_custom()) {
      for (size_t i = 0; i < out.nodes.size(); ++i) {
        const std::string& el = element_of(static_cast<int>(i));
        if (el.empty()) continue;
        const CustomHook* hook = cs.hook(el);
        if (!hook) continue;
        const ElementType* et = cs.model().find(el);
        for (size_t di = 0; di < out.nodes[i].derivations.size(); ++di) {
          if (drop[i][di]) continue;
          if (g.productions[out.nodes[i].derivations[di].production].kind !=
              ProductionKind::Composite)
            continue;
          CustomContext c = make_context(static_cast<int>(i), out.nodes[i].derivations[di], *et);
          if (!(*hook)(c)) {
            drop[i][di] = 1;
            stats.r4_custom = true;
          }
        }
      }
    }

    // Liveness cascade: ids are post-order, so one ascending pass settles it.
    std::vector<char> dead(out.nodes.size(), 0);
    for (size_t i = 0; i < out.nodes.size(); ++i) {
      ForestNode& n = out.nodes[i];
      if (n.symbol.kind == Symbol::Terminal) continue;
      std::vector<Derivation> kept;
      for (size_t di = 0; di < n.derivations.size(); ++di) {
        if (drop[i][di]) continue;
        const Derivation& d = n.derivations[di];
        bool ok = true;
        for (int ch : d.children)
          if (dead[ch]) {
            ok = false;
            break;
          }
        if (ok) kept.push_back(d);
      }
      n.derivations = std::move(kept);
      if (n.derivations.empty()) dead[i] = 1;
    }
    if (dead[out.root]) return over_constrained(stats);

    // Compact to the nodes reachable from the root. Parents have higher ids,
    // so one descending pass marks reachability.
    std::vector<char> keep(out.nodes.size(), 0);
    keep[out.root] = 1;
    for (size_t i = out.nodes.size(); i-- > 0;) {
      if (!keep[i]) continue;
      for (const Derivation& d : out.nodes[i].derivations)
        for (int ch : d.children) keep[ch] = 1;
    }
    std::vector<int> remap(out.nodes.size(), -1);
    ParseForest packed;
    for (size_t i = 0; i < out.nodes.size(); ++i) {
      if (!keep[i]) continue;
      remap[i] = static_cast<int>(packed.nodes.size());
      packed.nodes.push_back(std::move(out.nodes[i]));
      for (Derivation& d : packed.nodes.back().derivations)
        for (int& ch : d.children) ch = remap[ch];
    }
    packed.root = remap[out.root];
    return packed;
  }
};

void index_grammar(Grammar& gr) {
  gr.prods_by_lhs.assign(gr.nonterminals.size(), {});
  for (size_t i = 0; i < gr.productions.size(); ++i)
    gr.prods_by_lhs[gr.productions[i].lhs].push_back(static_cast<int>(i));
  gr.nullable.assign(gr.nonterminals.size(), false);
  bool changed = true;
  while (changed) {
    changed = false;
    for (const Production& p : gr.productions) {
      if (gr.nullable[p.lhs]) continue;
      bool all = true;
      for (const Symbol& s : p.rhs)
        if (s.kind == Symbol::Terminal || !gr.nullable[s.index]) {
          all = false;
          break;
        }
      if (all) {
        gr.nullable[p.lhs] = true;
        changed = true;
      }
    }
  }
}

}  // namespace

EvaluationSpec effective_evaluation(const Model& model, const ElementType& element) {
  EvaluationSpec out;
  for (const std::string& name : supertype_chain(model, element.name)) {
    const ElementType* e = model.find(name);
    if (!e) continue;
    const EvaluationSpec& s = e->evaluation;
    if (!out.priority && s.priority) out.priority = s.priority;
    if (out.associativity == Associativity::Unspecified) out.associativity = s.associativity;
    if (out.composition == Composition::Unspecified) out.composition = s.composition;
    if (s.free_order) out.free_order = true;
  }
  return out;
}

const ConstraintSet::ElementInfo& ConstraintSet::info(const std::string& element) const {
  auto it = info_.find(element);
  return it == info_.end() ? kNoInfo : it->second;
}

const CustomHook* ConstraintSet::hook(const std::string& element) const {
  const ElementInfo& inf = info(element);
  if (inf.hook_name.empty()) return nullptr;
  auto it = hooks_.find(inf.hook_name);
  return it == hooks_.end() ? nullptr : &it->second;
}

const std::vector<std::string>& ConstraintSet::carrier_closure(const std::string& member_type) const {
  auto it = closure_.find(member_type);
  return it == closure_.end() ? kNoNames : it->second;
}

Result<ConstraintSet> ConstraintSet::analyze(const Model& model, const CustomRegistry& hooks) {
  ConstraintSet cs;
  cs.model_ = &model;
  cs.hooks_ = hooks;

  for (const ElementType& e : model.elements) {
    ElementInfo inf;
    EvaluationSpec eff = effective_evaluation(model, e);
    inf.priority = eff.priority;
    inf.assoc = eff.associativity;
    inf.composition = eff.composition;
    inf.delimited = !e.delimiters.prefixes.empty() || !e.delimiters.suffixes.empty();
    inf.spec_bearing = inf.priority.has_value() || inf.assoc != Associativity::Unspecified;
    inf.selection_ancestors.push_back(e.name);
    for (const std::string& a : supertype_chain(model, e.name)) {
      const ElementType* s = model.find(a);
      if (s && s->kind == ElementKind::Selection) inf.selection_ancestors.push_back(a);
    }
    std::sort(inf.selection_ancestors.begin(), inf.selection_ancestors.end());
    if (e.custom) {
      if (hooks.find(*e.custom) == hooks.end()) {
        Error err;
        err.kind = ErrorKind::Model;
        err.message =
            "custom constraint '" + *e.custom + "' on element '" + e.name + "' has no registered hook";
        return err;
      }
      inf.hook_name = *e.custom;
      cs.any_custom_ = true;
    }
    if (e.kind == ElementKind::Composite) {
      const auto om = ordered_members(e);
      if (!om.empty()) {
        const MemberSpec& last = *om.back();
        if (last.optional || effective_multiplicity(last).min == 0)
          inf.trailing_optional = static_cast<int>(om.back() - e.members.data());
      }
      if (inf.composition != Composition::Unspecified && inf.trailing_optional >= 0)
        cs.any_composition_ = true;
    }
    cs.info_.emplace(e.name, std::move(inf));
  }

  // Concrete realizations per element name, used for operator candidates.
  for (const ElementType& e : model.elements) {
    std::vector<std::string> c = concrete_subtypes(model, e.name);
    std::sort(c.begin(), c.end());
    cs.closure_.emplace(e.name, std::move(c));
  }

  // Operator-carrying member: the first required single-occurrence member
  // whose concrete types include a spec-carrying element.
  for (const ElementType& e : model.elements) {
    if (e.kind != ElementKind::Composite) continue;
    ElementInfo& inf = cs.info_.at(e.name);
    if (inf.spec_bearing) {
      inf.self_carrier = true;
    } else {
      for (size_t i = 0; i < e.members.size(); ++i) {
        const MemberSpec& m = e.members[i];
        if (m.reference_kind != ReferenceKind::None || m.optional) continue;
        Multiplicity mult = effective_multiplicity(m);
        if (mult.min != 1 || mult.max != 1) continue;
        bool carries = false;
        for (const std::string& cand : cs.carrier_closure(m.element_type))
          if (cs.info_.at(cand).spec_bearing) {
            carries = true;
            break;
          }
        if (carries) {
          inf.carrier_member = static_cast<int>(i);
          break;
        }
      }
    }
    if (inf.self_carrier || inf.carrier_member >= 0) cs.any_structural_ = true;
  }

  // Slots whose content can realize a construct the checks apply to.
  for (const ElementType& e : model.elements) {
    if (e.kind != ElementKind::Composite) continue;
    ElementInfo& inf = cs.info_.at(e.name);
    inf.operand_slots.assign(e.members.size(), 0);
    for (size_t i = 0; i < e.members.size(); ++i) {
      const MemberSpec& m = e.members[i];
      if (m.reference_kind != ReferenceKind::None) continue;
      if (static_cast<int>(i) == inf.carrier_member) continue;
      for (const std::string& cand : cs.carrier_closure(m.element_type)) {
        const ElementInfo& ci = cs.info_.at(cand);
        if (!ci.delimited && (ci.spec_bearing || ci.carrier_member >= 0)) {
          inf.operand_slots[i] = 1;
          break;
        }
      }
    }
  }
  return cs;
}

const char* FilterStats::last_applied() const { return rule_name(*this); }

Result<ParseForest> filter_forest(const ParseForest& forest, const ConstraintSet& constraints,
                                  const Grammar& grammar, std::string_view input, bool structural,
                                  FilterStats* stats) {
  Filter f{forest, constraints, grammar, input, structural && constraints.any_structural()};
  Result<ParseForest> r = f.run();
  if (stats) *stats = f.stats;
  return r;
}

Result<RefinedGrammar> refine_grammar(const Grammar& grammar, const ConstraintSet& constraints) {
  struct Refiner {
    const Grammar& g;
    const ConstraintSet& cs;
    CtxSpace sp;
    BehaviorCache beh{cs, sp};
    Planner planner{g, cs, sp, beh, true};
    RefinedGrammar out;
    std::map<std::pair<int, int>, int> nt_ids;
    std::vector<int> nt_ctx;
    std::vector<int> queue;

    int refined_nt(int orig, int ctx) {
      auto it = nt_ids.find({orig, ctx});
      if (it != nt_ids.end()) return it->second;
      int id = static_cast<int>(out.grammar.nonterminals.size());
      NonterminalInfo info = g.nonterminals[orig];
      if (ctx != 0) info.name += "~" + std::to_string(ctx);
      out.grammar.nonterminals.push_back(std::move(info));
      out.nt_origin.push_back(orig);
      nt_ctx.push_back(ctx);
      nt_ids.emplace(std::make_pair(orig, ctx), id);
      queue.push_back(id);
      return id;
    }

    void expand(int rid, int pi) {
      const Production& p = g.productions[pi];
      int ctx = nt_ctx[rid];
      const std::vector<std::string>* cands = &kNoNames;
      if (p.kind == ProductionKind::Composite) {
        const auto& inf = cs.info(p.origin_element);
        if (!inf.self_carrier && inf.carrier_member >= 0) {
          const ElementType* et = cs.model().find(p.origin_element);
          cands = &cs.carrier_closure(et->members[inf.carrier_member].element_type);
        }
      }
      Plan plan = planner.plan(p, ctx, *cands);
      for (const Emission& e : plan.emissions) {
        Production np;
        np.lhs = rid;
        np.kind = p.kind;
        np.origin_element = p.origin_element;
        np.origin_member = p.origin_member;
        np.variant = p.variant;
        np.binding = p.binding;
        np.rhs.reserve(p.rhs.size());
        bool ok = true;
        for (size_t i = 0; i < p.rhs.size(); ++i) {
          Symbol s = p.rhs[i];
          if (s.kind == Symbol::Terminal) {
            if (e.ctx[i] != 0 &&
                leaf_check(sp, beh, cs, e.ctx[i], g.terminals[s.index].origin_element) != 0) {
              ok = false;
              break;
            }
            np.rhs.push_back(s);
          } else {
            np.rhs.push_back(Symbol::nt(refined_nt(s.index, e.ctx[i])));
          }
        }
        if (!ok) continue;
        out.prod_origin.push_back(pi);
        out.grammar.productions.push_back(std::move(np));
      }
    }
  };

  Refiner r{grammar, constraints};
  r.out.grammar.terminals = grammar.terminals;
  r.out.grammar.term_by_element = grammar.term_by_element;
  r.out.grammar.start = r.refined_nt(grammar.start, 0);
  for (size_t qi = 0; qi < r.queue.size(); ++qi) {
    int rid = r.queue[qi];
    for (int pi : grammar.prods_by_lhs[r.out.nt_origin[rid]]) r.expand(rid, pi);
  }
  for (const auto& [key, id] : r.nt_ids) {
    if (key.second != 0) continue;
    const std::string& el = grammar.nonterminals[key.first].element;
    if (!el.empty()) r.out.grammar.nt_by_element.emplace(el, id);
  }
  index_grammar(r.out.grammar);
  return std::move(r.out);
}

ParseForest derefine_forest(const ParseForest& forest, const RefinedGrammar& refined) {
  ParseForest out;
  if (forest.root < 0) return out;
  std::unordered_map<uint64_t, int> ids;
  std::vector<int> mapped(forest.nodes.size(), -1);
  auto key_of = [&](Symbol s, const ForestNode& n) {
    return (static_cast<uint64_t>(s.kind == Symbol::Nonterminal) << 63) |
           (static_cast<uint64_t>(static_cast<uint32_t>(s.index)) << 40) |
           (static_cast<uint64_t>(static_cast<uint32_t>(n.from_anchor)) << 20) |
           static_cast<uint32_t>(n.to_anchor);
  };
  std::vector<int> work;
  auto map_node = [&](int rid) {
    if (mapped[rid] >= 0) return mapped[rid];
    const ForestNode& n = forest.nodes[rid];
    Symbol s = n.symbol.kind == Symbol::Nonterminal ? Symbol::nt(refined.nt_origin[n.symbol.index])
                                                    : n.symbol;
    uint64_t k = key_of(s, n);
    auto it = ids.find(k);
    int id;
    if (it != ids.end()) {
      id = it->second;
    } else {
      id = static_cast<int>(out.nodes.size());
      ForestNode copy = n;
      copy.symbol = s;
      copy.derivations.clear();
      out.nodes.push_back(std::move(copy));
      ids.emplace(k, id);
    }
    mapped[rid] = id;
    work.push_back(rid);
    return id;
  };
  out.root = map_node(forest.root);
  for (size_t wi = 0; wi < work.size(); ++wi) {
    int src = work[wi];
    int dst = mapped[src];
    for (const Derivation& d : forest.nodes[src].derivations) {
      Derivation nd;
      nd.production = refined.prod_origin[d.production];
      nd.children.reserve(d.children.size());
      for (int ch : d.children) nd.children.push_back(map_node(ch));  // may grow out.nodes
      out.nodes[dst].derivations.push_back(std::move(nd));
    }
  }
  // Contexts merged onto one node can contribute identical derivations.
  for (ForestNode& n : out.nodes) {
    std::sort(n.derivations.begin(), n.derivations.end(),
              [](const Derivation& a, const Derivation& b) {
                return std::tie(a.production, a.children) < std::tie(b.production, b.children);
              });
    n.derivations.erase(std::unique(n.derivations.begin(), n.derivations.end()),
                        n.derivations.end());
  }
  return out;
}

}  // namespace modelcc
