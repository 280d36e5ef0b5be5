#include <algorithm>
#include <cstring>
#include <unordered_map>
#include <unordered_set>

#include "coast/task_planner.hpp"

namespace coast {

std::string GroundedAction::str() const {
  std::string out = schema_name + "(";
  for (size_t i = 0; i < arguments.size(); ++i) {
    if (i) out += ", ";
    out += arguments[i];
  }
  return out + ")";
}

GroundedAction instantiate(const ActionSchema& schema, const std::vector<std::string>& arguments,
                           const ObjectUniverse& universe) {
  if (arguments.size() != schema.parameters.size())
    throw GroundingError("wrong argument count for " + schema.name);
  Bindings b;
  for (size_t i = 0; i < arguments.size(); ++i) b[schema.parameters[i].name] = arguments[i];
  GroundedAction a;
  a.schema_name = schema.name;
  a.arguments = arguments;
  a.precondition = expand_quantifiers(substitute(schema.precondition, b), universe);
  a.effect = expand_quantifiers(substitute(schema.effect, b), universe);
  return a;
}

namespace {

using K = Formula::Kind;

struct LTerm {
  bool var = false;
  int id = -1;  // slot for variables, object id otherwise
};

// Formula with predicates, objects and variables replaced by integers.
struct LNode {
  K kind = K::And;
  int pred = -1;
  std::vector<LTerm> terms;
  std::vector<LNode> kids;
  std::vector<std::pair<int, int>> qvars;  // (slot, type index)
};

void append_int(std::string& key, int v) { key.append(reinterpret_cast<const char*>(&v), sizeof v); }

class Compiler {
 public:
  Compiler(const Domain& d, const ObjectUniverse& u) : d_(d), u_(u) {
    for (const auto& o : u.objects()) {
      obj_id_.emplace(o.name, static_cast<int>(objects_.size()));
      objects_.push_back(o.name);
    }
    for (const auto& p : d.predicates) pred(p.name);
    for (const auto& a : d.actions) {
      mark_effect(a.effect);
      mark_condition(a.precondition, true);
    }
  }

  int pred(const std::string& name) {
    auto [it, inserted] = pred_id_.emplace(name, static_cast<int>(pred_names_.size()));
    if (inserted) {
      pred_names_.push_back(name);
      fluent_.push_back(0);
      pos_use_.push_back(0);
      neg_use_.push_back(0);
    }
    return it->second;
  }

  void mark_goal(const Formula& goal) { mark_condition(goal, true); }

  bool folded(int p) const { return !fluent_[p] && pos_use_[p]; }
  bool folded(const std::string& name) const {
    auto it = pred_id_.find(name);
    return it != pred_id_.end() && folded(it->second);
  }

  std::set<std::string> kept_predicates() const {
    std::set<std::string> out;
    for (size_t p = 0; p < pred_names_.size(); ++p)
      if (!folded(static_cast<int>(p))) out.insert(pred_names_[p]);
    return out;
  }

  const std::vector<int>& objects_of(const std::string& type) {
    auto it = type_objs_.find(type);
    if (it != type_objs_.end()) return it->second;
    std::vector<int> ids;
    for (const auto& n : u_.objects_of(type)) ids.push_back(obj_id_.at(n));
    return type_objs_.emplace(type, std::move(ids)).first->second;
  }

  int type_index(const std::string& type) {
    auto [it, inserted] = type_index_.emplace(type, static_cast<int>(type_names_.size()));
    if (inserted) type_names_.push_back(type);
    return it->second;
  }

  LNode lift(const Formula& f, std::map<std::string, int>& vars) {
    LNode n;
    n.kind = f.kind;
    switch (f.kind) {
      case K::Atom:
      case K::Equal:
        if (f.kind == K::Atom) n.pred = pred(f.predicate);
        for (const auto& t : f.terms) {
          LTerm lt;
          if (is_variable(t)) {
            auto it = vars.find(t);
            if (it == vars.end()) throw UnboundVariableError(t);
            lt.var = true;
            lt.id = it->second;
          } else {
            auto it = obj_id_.find(t);
            if (it == obj_id_.end()) throw GroundingError("unknown object " + t);
            lt.id = it->second;
          }
          n.terms.push_back(lt);
        }
        return n;
      case K::Forall: {
        auto saved = vars;
        for (const auto& v : f.vars) {
          int slot = next_slot(vars);
          vars[v.name] = slot;
          n.qvars.emplace_back(slot, type_index(v.type));
        }
        n.kids.push_back(lift(f.children.at(0), vars));
        vars = std::move(saved);
        return n;
      }
      default:
        for (const auto& c : f.children) n.kids.push_back(lift(c, vars));
        return n;
    }
  }

  int next_slot(const std::map<std::string, int>& vars) {
    int slot = 0;
    for (const auto& [_, s] : vars) slot = std::max(slot, s + 1);
    max_slots_ = std::max(max_slots_, slot + 1);
    return slot;
  }

  int max_slots() const { return max_slots_; }
  void reserve_slots(int n) { max_slots_ = std::max(max_slots_, n); }

  // Static facts of folded predicates, as encoded keys.
  void load_static(const State& init) {
    static_tuples_.assign(pred_names_.size(), {});
    static_index_.assign(pred_names_.size(), {});
    for (const auto& a : init) {
      auto it = pred_id_.find(a.predicate);
      if (it == pred_id_.end() || !folded(it->second)) continue;
      std::vector<int> args;
      bool known = true;
      for (const auto& x : a.args) {
        auto o = obj_id_.find(x);
        if (o == obj_id_.end()) {
          known = false;
          break;
        }
        args.push_back(o->second);
      }
      if (!known) continue;
      std::string key;
      append_int(key, it->second);
      for (int x : args) append_int(key, x);
      if (!static_set_.insert(key).second) continue;
      int p = it->second;
      auto& idx = static_index_[p];
      if (idx.size() < args.size()) idx.resize(args.size());
      for (size_t i = 0; i < args.size(); ++i) idx[i][args[i]].push_back(static_cast<int>(static_tuples_[p].size()));
      static_tuples_[p].push_back(std::move(args));
    }
  }

  bool static_holds(int p, const std::vector<int>& args) const {
    std::string key;
    append_int(key, p);
    for (int x : args) append_int(key, x);
    return static_set_.count(key) != 0;
  }

  int fact(int p, const std::vector<int>& args) {
    std::string key;
    append_int(key, p);
    for (int x : args) append_int(key, x);
    auto [it, inserted] = fact_id_.emplace(std::move(key), static_cast<int>(facts_.size()));
    if (inserted) {
      Atom a;
      a.predicate = pred_names_[p];
      for (int x : args) a.args.push_back(objects_[x]);
      facts_.push_back(std::move(a));
    }
    return it->second;
  }

  Condition ground_condition(const LNode& n, std::vector<int>& slots) {
    Condition c;
    switch (n.kind) {
      case K::Atom: {
        std::vector<int> args;
        args.reserve(n.terms.size());
        for (const auto& t : n.terms) args.push_back(t.var ? slots[t.id] : t.id);
        if (folded(n.pred)) {
          c.kind = static_holds(n.pred, args) ? Condition::Kind::True : Condition::Kind::False;
        } else {
          c.kind = Condition::Kind::Fact;
          c.fact = fact(n.pred, args);
        }
        return c;
      }
      case K::Equal: {
        int a = n.terms[0].var ? slots[n.terms[0].id] : n.terms[0].id;
        int b = n.terms[1].var ? slots[n.terms[1].id] : n.terms[1].id;
        c.kind = a == b ? Condition::Kind::True : Condition::Kind::False;
        return c;
      }
      case K::Not: {
        Condition k = ground_condition(n.kids.at(0), slots);
        if (k.kind == Condition::Kind::True) return {Condition::Kind::False, -1, {}};
        if (k.kind == Condition::Kind::False) return {Condition::Kind::True, -1, {}};
        if (k.kind == Condition::Kind::Not) return std::move(k.kids[0]);
        c.kind = Condition::Kind::Not;
        c.kids.push_back(std::move(k));
        return c;
      }
      case K::When: {
        // Implication: (not c) or e.
        LNode neg;
        neg.kind = K::Not;
        neg.kids.push_back(n.kids.at(0));
        std::vector<Condition> parts;
        parts.push_back(ground_condition(neg, slots));
        parts.push_back(ground_condition(n.kids.at(1), slots));
        return make_or(std::move(parts));
      }
      case K::And:
      case K::Or: {
        std::vector<Condition> parts;
        for (const auto& k : n.kids) {
          Condition g = ground_condition(k, slots);
          if (n.kind == K::And && g.kind == Condition::Kind::False) return g;
          if (n.kind == K::Or && g.kind == Condition::Kind::True) return g;
          parts.push_back(std::move(g));
        }
        return n.kind == K::And ? make_and(std::move(parts)) : make_or(std::move(parts));
      }
      case K::Forall: {
        std::vector<Condition> parts;
        bool dead = false;
        for_each_tuple(n.qvars, slots, [&] {
          if (dead) return;
          Condition g = ground_condition(n.kids.at(0), slots);
          if (g.kind == Condition::Kind::False) dead = true;
          parts.push_back(std::move(g));
        });
        if (dead) return {Condition::Kind::False, -1, {}};
        return make_and(std::move(parts));
      }
    }
    return c;
  }

  template <typename Fn>
  void for_each_tuple(const std::vector<std::pair<int, int>>& qvars, std::vector<int>& slots, Fn&& fn) {
    std::vector<const std::vector<int>*> doms;
    for (const auto& [slot, ti] : qvars) {
      doms.push_back(&objects_of(type_names_[ti]));
      if (doms.back()->empty()) return;
    }
    std::vector<size_t> idx(qvars.size(), 0);
    while (true) {
      for (size_t i = 0; i < qvars.size(); ++i) slots[qvars[i].first] = (*doms[i])[idx[i]];
      fn();
      size_t k = 0;
      while (k < idx.size() && ++idx[k] == doms[k]->size()) idx[k++] = 0;
      if (k == idx.size()) return;
    }
  }

  static Condition make_and(std::vector<Condition> parts) {
    Condition c;
    c.kind = Condition::Kind::And;
    for (auto& p : parts) {
      if (p.kind == Condition::Kind::True) continue;
      if (p.kind == Condition::Kind::False) return p;
      if (p.kind == Condition::Kind::And) {
        for (auto& k : p.kids) c.kids.push_back(std::move(k));
      } else {
        c.kids.push_back(std::move(p));
      }
    }
    if (c.kids.empty()) return {Condition::Kind::True, -1, {}};
    if (c.kids.size() == 1) return std::move(c.kids[0]);
    return c;
  }

  static Condition make_or(std::vector<Condition> parts) {
    Condition c;
    c.kind = Condition::Kind::Or;
    for (auto& p : parts) {
      if (p.kind == Condition::Kind::False) continue;
      if (p.kind == Condition::Kind::True) return p;
      if (p.kind == Condition::Kind::Or) {
        for (auto& k : p.kids) c.kids.push_back(std::move(k));
      } else {
        c.kids.push_back(std::move(p));
      }
    }
    if (c.kids.empty()) return {Condition::Kind::False, -1, {}};
    if (c.kids.size() == 1) return std::move(c.kids[0]);
    return c;
  }

  // Effects grouped by (ground) condition; the first group is unconditional.
  void ground_effect(const LNode& n, std::vector<int>& slots, const Condition& cond, size_t group,
                     std::vector<CompiledEffect>& out) {
    switch (n.kind) {
      case K::Atom:
      case K::Not: {
        const LNode& at = n.kind == K::Atom ? n : n.kids.at(0);
        if (at.kind != K::Atom) throw GroundingError("non-literal negated effect");
        std::vector<int> args;
        for (const auto& t : at.terms) args.push_back(t.var ? slots[t.id] : t.id);
        int f = fact(at.pred, args);
        (n.kind == K::Atom ? out[group].adds : out[group].dels).push_back(f);
        return;
      }
      case K::And:
        for (const auto& k : n.kids) ground_effect(k, slots, cond, group, out);
        return;
      case K::Forall:
        for_each_tuple(n.qvars, slots, [&] { ground_effect(n.kids.at(0), slots, cond, group, out); });
        return;
      case K::When: {
        Condition c = ground_condition(n.kids.at(0), slots);
        if (c.kind == Condition::Kind::False) return;
        if (group != 0) c = make_and({cond, std::move(c)});
        if (c.kind == Condition::Kind::False) return;
        if (c.kind == Condition::Kind::True) {
          ground_effect(n.kids.at(1), slots, c, 0, out);
          return;
        }
        out.emplace_back();
        out.back().conditional = true;
        out.back().condition = compile(c);
        size_t at = out.size() - 1;
        ground_effect(n.kids.at(1), slots, c, at, out);
        // Nested whens push after `at`; drop this group if it stayed empty.
        if (out[at].adds.empty() && out[at].dels.empty()) out.erase(out.begin() + static_cast<long>(at));
        return;
      }
      default:
        throw GroundingError("unsupported effect construct");
    }
  }

  static CompiledCondition compile(const Condition& c) {
    CompiledCondition out;
    auto literal = [&](const Condition& l) {
      if (l.kind == Condition::Kind::Fact) {
        out.pos.push_back(l.fact);
        return true;
      }
      if (l.kind == Condition::Kind::Not && l.kids[0].kind == Condition::Kind::Fact) {
        out.neg.push_back(l.kids[0].fact);
        return true;
      }
      return false;
    };
    if (c.kind == Condition::Kind::True) return out;
    bool simple = c.kind == Condition::Kind::And ? std::all_of(c.kids.begin(), c.kids.end(), literal) : literal(c);
    if (!simple) {
      out.pos.clear();
      out.neg.clear();
      out.complex = c;
    }
    return out;
  }

  // Enumerates parameter assignments consistent with types and with the
  // positive folded-static conjuncts of the precondition.
  template <typename Emit>
  size_t enumerate(const ActionSchema& a, const LNode& pre, Emit&& emit) {
    size_t k = a.parameters.size();
    std::vector<const std::vector<int>*> doms;
    for (const auto& p : a.parameters) doms.push_back(&objects_of(p.type));
    std::vector<const LNode*> joins;
    collect_joins(pre, joins);
    std::vector<int> slots(static_cast<size_t>(std::max(max_slots_, static_cast<int>(k))), -1);
    std::vector<char> bound(k, 0);
    std::vector<std::vector<char>> member(k);
    for (size_t i = 0; i < k; ++i) {
      member[i].assign(objects_.size(), 0);
      for (int o : *doms[i]) member[i][o] = 1;
    }
    size_t count = 0;
    std::vector<int> cand_buf;
    std::function<void(size_t)> rec = [&](size_t nbound) {
      if (nbound == k) {
        ++count;
        emit(slots);
        return;
      }
      // Pick the unbound variable with the fewest candidates.
      int best = -1;
      std::vector<int> best_cands;
      bool best_from_domain = true;
      for (size_t v = 0; v < k; ++v) {
        if (bound[v]) continue;
        std::vector<int> cands;
        bool from_domain = !candidates(static_cast<int>(v), joins, slots, bound, cands);
        if (from_domain) cands = *doms[v];
        if (best < 0 || cands.size() < best_cands.size()) {
          best = static_cast<int>(v);
          best_cands = std::move(cands);
          best_from_domain = from_domain;
        }
      }
      for (int o : best_cands) {
        if (!best_from_domain && !member[best][o]) continue;
        slots[best] = o;
        bound[best] = 1;
        if (joins_hold(best, joins, slots, bound)) rec(nbound + 1);
        bound[best] = 0;
      }
      slots[best] = -1;
    };
    if (k == 0) {
      ++count;
      emit(slots);
    } else {
      rec(0);
    }
    return count;
  }

  void collect_joins(const LNode& n, std::vector<const LNode*>& out) {
    if (n.kind == K::And) {
      for (const auto& c : n.kids) collect_joins(c, out);
    } else if (n.kind == K::Atom && folded(n.pred)) {
      out.push_back(&n);
    }
  }

  // Candidate values for variable v from the most selective join atom in
  // which every other variable is bound. Returns false when no atom applies.
  bool candidates(int v, const std::vector<const LNode*>& joins, const std::vector<int>& slots,
                  const std::vector<char>& bound, std::vector<int>& out) {
    const std::vector<int>* best_list = nullptr;
    const LNode* best_atom = nullptr;
    bool best_all = false;
    size_t best_size = 0;
    for (const LNode* j : joins) {
      bool has_v = false, ok = true;
      int sel_pos = -1, sel_val = -1;
      for (size_t i = 0; i < j->terms.size(); ++i) {
        const auto& t = j->terms[i];
        if (t.var && t.id == v) {
          has_v = true;
        } else if (t.var && (t.id >= static_cast<int>(bound.size()) || !bound[t.id])) {
          ok = false;
        } else if (sel_pos < 0) {
          sel_pos = static_cast<int>(i);
          sel_val = t.var ? slots[t.id] : t.id;
        }
      }
      if (!has_v || !ok) continue;
      const auto& tuples = static_tuples_[j->pred];
      const std::vector<int>* list = nullptr;
      size_t size = tuples.size();
      bool all = true;
      if (sel_pos >= 0) {
        all = false;
        const auto& idx = static_index_[j->pred];
        static const std::vector<int> empty;
        if (static_cast<size_t>(sel_pos) >= idx.size()) {
          list = &empty;
        } else {
          auto it = idx[sel_pos].find(sel_val);
          list = it == idx[sel_pos].end() ? &empty : &it->second;
        }
        size = list->size();
      }
      if (!best_atom || size < best_size) {
        best_atom = j;
        best_list = list;
        best_all = all;
        best_size = size;
      }
    }
    if (!best_atom) return false;
    const auto& tuples = static_tuples_[best_atom->pred];
    auto consider = [&](const std::vector<int>& tup) {
      int val = -1;
      for (size_t i = 0; i < best_atom->terms.size(); ++i) {
        const auto& t = best_atom->terms[i];
        if (t.var && t.id == v) {
          if (val >= 0 && tup[i] != val) return;
          val = tup[i];
        } else if (tup[i] != (t.var ? slots[t.id] : t.id)) {
          return;
        }
      }
      out.push_back(val);
    };
    if (best_all) {
      for (const auto& tup : tuples) consider(tup);
    } else {
      for (int ti : *best_list) consider(tuples[ti]);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return true;
  }

  bool joins_hold(int v, const std::vector<const LNode*>& joins, const std::vector<int>& slots,
                  const std::vector<char>& bound) {
    std::vector<int> args;
    for (const LNode* j : joins) {
      bool has_v = false, ready = true;
      for (const auto& t : j->terms) {
        if (!t.var) continue;
        if (t.id == v) has_v = true;
        else if (!bound[t.id]) ready = false;
      }
      if (!has_v || !ready) continue;
      args.clear();
      for (const auto& t : j->terms) args.push_back(t.var ? slots[t.id] : t.id);
      if (!static_holds(j->pred, args)) return false;
    }
    return true;
  }

  const std::vector<std::string>& objects() const { return objects_; }
  std::vector<Atom>& facts() { return facts_; }

 private:
  void mark_effect(const Formula& f) {
    switch (f.kind) {
      case K::Atom:
        fluent_[pred(f.predicate)] = 1;
        return;
      case K::When:
        mark_condition(f.children.at(0), true);
        mark_effect(f.children.at(1));
        return;
      default:
        for (const auto& c : f.children) mark_effect(c);
    }
  }

  void mark_condition(const Formula& f, bool positive) {
    switch (f.kind) {
      case K::Atom:
        (positive ? pos_use_ : neg_use_)[pred(f.predicate)] = 1;
        return;
      case K::Not:
        mark_condition(f.children.at(0), !positive);
        return;
      case K::When:
        mark_condition(f.children.at(0), !positive);
        mark_condition(f.children.at(1), positive);
        return;
      default:
        for (const auto& c : f.children) mark_condition(c, positive);
    }
  }

  const Domain& d_;
  const ObjectUniverse& u_;
  std::vector<std::string> objects_;
  std::unordered_map<std::string, int> obj_id_;
  std::map<std::string, std::vector<int>> type_objs_;
  std::map<std::string, int> type_index_;
  std::vector<std::string> type_names_;
  std::unordered_map<std::string, int> pred_id_;
  std::vector<std::string> pred_names_;
  std::vector<char> fluent_, pos_use_, neg_use_;
  int max_slots_ = 0;
  std::unordered_set<std::string> static_set_;
  std::vector<std::vector<std::vector<int>>> static_tuples_;
  std::vector<std::vector<std::unordered_map<int, std::vector<int>>>> static_index_;
  std::unordered_map<std::string, int> fact_id_;
  std::vector<Atom> facts_;
};

void remap(std::vector<int>& v, const std::vector<int>& m) {
  for (auto& x : v) x = m[x];
}

void remap(Condition& c, const std::vector<int>& m) {
  if (c.kind == Condition::Kind::Fact) c.fact = m[c.fact];
  for (auto& k : c.kids) remap(k, m);
}

void remap(CompiledCondition& c, const std::vector<int>& m) {
  remap(c.pos, m);
  remap(c.neg, m);
  if (c.complex) remap(*c.complex, m);
}

void mark(const Condition& c, std::vector<char>& used) {
  if (c.kind == Condition::Kind::Fact) used[c.fact] = 1;
  for (const auto& k : c.kids) mark(k, used);
}

void mark(const CompiledCondition& c, std::vector<char>& used) {
  for (int f : c.pos) used[f] = 1;
  for (int f : c.neg) used[f] = 1;
  if (c.complex) mark(*c.complex, used);
}

struct Prepared {
  std::unique_ptr<Compiler> compiler;
  std::shared_ptr<Domain> domain;
  std::shared_ptr<ObjectUniverse> universe;
};

std::string cache_key(const Domain& d, const Problem& p, const Compiler& c) {
  std::string key = to_pddl(d);
  key += "\n;objects";
  for (const auto& o : p.objects) key += " " + o.name + ":" + o.type;
  key += "\n;static";
  for (const auto& a : p.init)
    if (c.folded(a.predicate)) key += a.str();
  key += "\n;goal " + to_string(p.goal);
  return key;
}

std::shared_ptr<const CompiledOps> compile_ops(Compiler& comp, std::shared_ptr<const Domain> domain,
                                               std::shared_ptr<const ObjectUniverse> universe, const Problem& problem,
                                               size_t cap) {
  const Domain& d = *domain;
  comp.load_static(problem.init);
  auto out = std::make_shared<CompiledOps>();
  out->domain = domain;
  out->universe = universe;
  out->object_names = comp.objects();

  std::vector<LNode> pres, effs;
  for (const auto& a : d.actions) {
    std::map<std::string, int> vars;
    for (size_t i = 0; i < a.parameters.size(); ++i) vars[a.parameters[i].name] = static_cast<int>(i);
    comp.reserve_slots(static_cast<int>(a.parameters.size()));
    pres.push_back(comp.lift(a.precondition, vars));
    effs.push_back(comp.lift(a.effect, vars));
  }

  size_t instances = 0;
  for (size_t ai = 0; ai < d.actions.size(); ++ai) {
    const auto& a = d.actions[ai];
    size_t product = 1;
    for (const auto& p : a.parameters) {
      size_t n = comp.objects_of(p.type).size();
      product = (n != 0 && product > (size_t(-1) / n)) ? size_t(-1) : product * n;
    }
    out->stats.type_consistent = std::min(size_t(-1) - product, out->stats.type_consistent) + product;
    comp.enumerate(a, pres[ai], [&](std::vector<int>& slots) {
      if (++instances > cap) throw GroundingError("grounding exceeds instance cap of " + std::to_string(cap));
      Condition pre = comp.ground_condition(pres[ai], slots);
      if (pre.kind == Condition::Kind::False) return;
      CompiledOp op;
      op.schema = static_cast<int>(ai);
      op.args.assign(slots.begin(), slots.begin() + static_cast<long>(a.parameters.size()));
      op.pre = Compiler::compile(pre);
      op.effects.emplace_back();
      comp.ground_effect(effs[ai], slots, Condition{}, 0, op.effects);
      out->ops.push_back(std::move(op));
    });
  }

  std::map<std::string, int> no_vars;
  LNode lifted_goal = comp.lift(problem.goal, no_vars);
  std::vector<int> goal_slots(static_cast<size_t>(comp.max_slots() + 1), -1);
  out->goal = Compiler::compile(comp.ground_condition(lifted_goal, goal_slots));

  // Keep only facts that some condition or the goal reads.
  auto& facts = comp.facts();
  std::vector<char> used(facts.size(), 0);
  for (const auto& op : out->ops) {
    mark(op.pre, used);
    for (const auto& e : op.effects) mark(e.condition, used);
  }
  mark(out->goal, used);
  std::vector<int> m(facts.size(), -1);
  for (size_t f = 0; f < facts.size(); ++f) {
    if (!used[f]) continue;
    m[f] = static_cast<int>(out->facts.size());
    out->fact_index.emplace(facts[f], m[f]);
    out->facts.push_back(facts[f]);
  }
  auto keep = [&](std::vector<int>& v) {
    std::vector<int> r;
    for (int f : v)
      if (m[f] >= 0) r.push_back(m[f]);
    std::sort(r.begin(), r.end());
    r.erase(std::unique(r.begin(), r.end()), r.end());
    v = std::move(r);
  };
  for (auto& op : out->ops) {
    remap(op.pre, m);
    std::vector<CompiledEffect> kept;
    for (size_t i = 0; i < op.effects.size(); ++i) {
      auto& e = op.effects[i];
      keep(e.adds);
      keep(e.dels);
      if (e.adds.empty() && e.dels.empty() && i > 0) continue;
      remap(e.condition, m);
      kept.push_back(std::move(e));
    }
    op.effects = std::move(kept);
  }
  remap(out->goal, m);
  out->kept_predicates = comp.kept_predicates();
  out->stats.actions = out->ops.size();
  out->stats.facts = out->facts.size();
  return out;
}

}  // namespace

GroundedTask::GroundedTask(std::shared_ptr<const CompiledOps> ops, State init, Formula goal)
    : ops_(std::move(ops)), init_(std::move(init)), goal_(std::move(goal)), stats_(ops_->stats) {
  init_bits_ = pack(init_);
}

std::vector<std::uint64_t> GroundedTask::pack(const State& s) const {
  std::vector<std::uint64_t> bits((ops_->facts.size() + 63) / 64, 0);
  for (const auto& a : s) {
    auto it = ops_->fact_index.find(a);
    if (it != ops_->fact_index.end()) bits[it->second >> 6] |= std::uint64_t{1} << (it->second & 63);
  }
  return bits;
}

GroundedAction GroundedTask::action(size_t i) const {
  const auto& op = ops_->ops.at(i);
  std::vector<std::string> args;
  for (int a : op.args) args.push_back(ops_->object_names[a]);
  return instantiate(ops_->domain->actions[op.schema], args, *ops_->universe);
}

GroundedTask ground(const Domain& domain, const Problem& problem, size_t instance_cap) {
  auto d = std::make_shared<const Domain>(domain);
  auto u = std::make_shared<const ObjectUniverse>(domain, problem);
  Compiler comp(*d, *u);
  comp.mark_goal(problem.goal);
  auto ops = compile_ops(comp, d, u, problem, instance_cap);
  return GroundedTask(ops, problem.init, problem.goal);
}

GroundedTask Grounder::ground(const Domain& domain, const Problem& problem) {
  auto d = std::make_shared<const Domain>(domain);
  auto u = std::make_shared<const ObjectUniverse>(domain, problem);
  Compiler comp(*d, *u);
  comp.mark_goal(problem.goal);
  std::string key = cache_key(domain, problem, comp);
  auto it = cache_.find(key);
  if (it != cache_.end()) {
    GroundedTask task(it->second, problem.init, problem.goal);
    task.mark_cache_hit();
    return task;
  }
  auto ops = compile_ops(comp, d, u, problem, cap_);
  if (cache_.size() > 64) cache_.clear();
  cache_.emplace(std::move(key), ops);
  return GroundedTask(ops, problem.init, problem.goal);
}

}  // namespace coast
