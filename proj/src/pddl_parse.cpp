#include <set>

#include "coast/pddl.hpp"

namespace coast {

namespace {

[[noreturn]] void fail(const SExpr& at, const std::string& message) { throw ParseError(message, at.loc); }

const SExpr& expect_list(const SExpr& e, const std::string& what) {
  if (!e.is_list) fail(e, "expected list for " + what);
  return e;
}

const std::string& expect_atom(const SExpr& e, const std::string& what) {
  if (e.is_list) fail(e, "expected identifier for " + what);
  return e.atom;
}

/// Parses `a b - t c - u d` style typed lists from items[begin, end).
TypedList parse_typed_list(const std::vector<SExpr>& items, size_t begin, size_t end) {
  TypedList out;
  std::vector<std::string> pending;
  for (size_t i = begin; i < end; ++i) {
    const SExpr& it = items[i];
    const std::string& tok = expect_atom(it, "typed list");
    if (tok == "-") {
      if (i + 1 >= end) fail(it, "dangling '-' in typed list");
      const std::string& type = expect_atom(items[i + 1], "type name");
      if (pending.empty()) fail(it, "type without names");
      for (auto& n : pending) out.push_back({std::move(n), type});
      pending.clear();
      ++i;
    } else {
      pending.push_back(tok);
    }
  }
  for (auto& n : pending) out.push_back({std::move(n), "object"});
  return out;
}

TypedList parse_typed_list(const SExpr& list) {
  expect_list(list, "typed list");
  return parse_typed_list(list.items, 0, list.items.size());
}

/// Vocabulary checks applied while parsing formulas. Null members skip the
/// corresponding check.
struct FormulaContext {
  const Domain* domain = nullptr;
  const std::set<std::string>* objects = nullptr;
  std::set<std::string> extra_predicates;  // certified facts, geometric atoms
  bool allow_unknown_predicates = false;
  bool allow_when = false;
  bool effect = false;
};

void check_atom(const SExpr& at, const std::string& pred, const std::vector<std::string>& terms,
                const std::set<std::string>& scope, const FormulaContext& ctx) {
  for (const auto& t : terms) {
    if (is_variable(t)) {
      if (!scope.count(t)) fail(at, "unbound variable " + t);
    } else if (ctx.objects && !ctx.objects->count(t)) {
      fail(at, "undeclared object " + t);
    }
  }
  if (!ctx.domain || ctx.allow_unknown_predicates || ctx.extra_predicates.count(pred)) return;
  const PredicateSig* sig = ctx.domain->find_predicate(pred);
  if (!sig) fail(at, "undeclared predicate " + pred);
  if (sig->params.size() != terms.size())
    fail(at, "arity mismatch for " + pred + ": expected " + std::to_string(sig->params.size()) + ", got " +
                 std::to_string(terms.size()));
}

Formula parse_formula(const SExpr& e, std::set<std::string>& scope, const FormulaContext& ctx) {
  if (!e.is_list) {
    fail(e, "expected formula, got '" + e.atom + "'");
  }
  if (e.items.empty()) return Formula::conj();
  const SExpr& head = e.items[0];
  if (head.is_list) fail(head, "expected operator or predicate name");
  std::string op = to_lower(head.atom);
  auto sub = [&](size_t i) { return parse_formula(e.items.at(i), scope, ctx); };

  if (op == "and" || op == "or") {
    std::vector<Formula> kids;
    for (size_t i = 1; i < e.items.size(); ++i) kids.push_back(sub(i));
    if (op == "or" && ctx.effect) fail(e, "disjunction not allowed in effects");
    return op == "and" ? Formula::conj(std::move(kids)) : Formula::disj(std::move(kids));
  }
  if (op == "not") {
    if (e.items.size() != 2) fail(e, "not expects one argument");
    Formula inner = sub(1);
    if (ctx.effect && inner.kind != Formula::Kind::Atom) fail(e, "only atoms may be negated in effects");
    return Formula::negate(std::move(inner));
  }
  if (op == "imply") {
    if (ctx.effect) fail(e, "imply not allowed in effects");
    if (e.items.size() != 3) fail(e, "imply expects two arguments");
    return Formula::disj({Formula::negate(sub(1)), sub(2)});
  }
  if (op == "when") {
    if (!ctx.allow_when && !ctx.effect) fail(e, "when is only allowed in effects");
    if (e.items.size() != 3) fail(e, "when expects condition and effect");
    FormulaContext cond_ctx = ctx;
    cond_ctx.effect = false;
    cond_ctx.allow_when = false;
    Formula cond = parse_formula(e.items[1], scope, cond_ctx);
    return Formula::when(std::move(cond), sub(2));
  }
  if (op == "=") {
    if (ctx.effect) fail(e, "equality not allowed in effects");
    if (e.items.size() != 3) fail(e, "= expects two terms");
    std::vector<std::string> terms{expect_atom(e.items[1], "term"), expect_atom(e.items[2], "term")};
    check_atom(e, "=", terms, scope, FormulaContext{nullptr, ctx.objects, {}, true});
    return Formula::equal(terms[0], terms[1]);
  }
  if (op == "forall") {
    if (e.items.size() < 3) fail(e, "forall expects variables and a body");
    TypedList vars;
    size_t body_index;
    if (e.items[1].is_list) {
      vars = parse_typed_list(e.items[1]);
      body_index = 2;
    } else {
      // Unparenthesized form: (forall ?x - t body)
      body_index = 1;
      while (body_index < e.items.size() && !e.items[body_index].is_list) ++body_index;
      vars = parse_typed_list(e.items, 1, body_index);
    }
    if (body_index + 1 != e.items.size()) fail(e, "forall expects exactly one body");
    for (const auto& v : vars) {
      if (!is_variable(v.name)) fail(e, "quantified name must be a variable: " + v.name);
      if (ctx.domain && !ctx.domain->types.contains(v.type) && !ctx.allow_unknown_predicates)
        fail(e, "undeclared type " + v.type);
    }
    std::vector<std::string> added;
    for (const auto& v : vars)
      if (scope.insert(v.name).second) added.push_back(v.name);
    Formula body = parse_formula(e.items[body_index], scope, ctx);
    for (const auto& v : added) scope.erase(v);
    return Formula::forall(std::move(vars), std::move(body));
  }
  if (op == "exists") fail(e, "exists is not supported");

  std::vector<std::string> terms;
  for (size_t i = 1; i < e.items.size(); ++i) terms.push_back(expect_atom(e.items[i], "term"));
  check_atom(e, head.atom, terms, scope, ctx);
  return Formula::atom(head.atom, std::move(terms));
}

std::set<std::string> scope_of(const TypedList& list) {
  std::set<std::string> s;
  for (const auto& t : list) s.insert(t.name);
  return s;
}

void check_types(const SExpr& at, const TypedList& list, const TypeHierarchy& types) {
  for (const auto& t : list)
    if (!types.contains(t.type)) fail(at, "undeclared type " + t.type);
}

/// Returns the top-level body of a (define (kind name) ...) file, or the file
/// itself when the sections appear bare.
std::vector<const SExpr*> sections(const std::vector<SExpr>& top, const std::string& kind,
                                   std::string* name) {
  std::vector<const SExpr*> out;
  for (const auto& e : top) {
    if (e.is_list && !e.items.empty() && e.items[0].is_keyword("define")) {
      if (e.items.size() < 2 || !e.items[1].is_list || e.items[1].items.size() != 2 ||
          !e.items[1].items[0].is_keyword(kind))
        fail(e, "expected (define (" + kind + " <name>) ...)");
      if (name) *name = expect_atom(e.items[1].items[1], kind + " name");
      for (size_t i = 2; i < e.items.size(); ++i) out.push_back(&e.items[i]);
    } else {
      out.push_back(&e);
    }
  }
  return out;
}

/// Reads `:key value` pairs following the head items of a section.
std::map<std::string, const SExpr*> keyed_fields(const SExpr& section, size_t begin) {
  std::map<std::string, const SExpr*> out;
  for (size_t i = begin; i < section.items.size(); i += 2) {
    const SExpr& key = section.items[i];
    if (key.is_list || key.atom.empty() || key.atom[0] != ':') fail(key, "expected :keyword");
    if (i + 1 >= section.items.size()) fail(key, "missing value for " + key.atom);
    std::string k = to_lower(key.atom);
    if (out.count(k)) fail(key, "duplicate field " + key.atom);
    out[k] = &section.items[i + 1];
  }
  return out;
}

ActionSchema parse_action(const SExpr& section, const Domain& domain) {
  if (section.items.size() < 2) fail(section, "action without name");
  ActionSchema a;
  a.name = expect_atom(section.items[1], "action name");
  auto fields = keyed_fields(section, 2);
  if (fields.count(":parameters")) a.parameters = parse_typed_list(*fields[":parameters"]);
  check_types(section, a.parameters, domain.types);
  std::set<std::string> scope = scope_of(a.parameters);
  FormulaContext pre_ctx;
  pre_ctx.domain = &domain;
  a.precondition = fields.count(":precondition") ? parse_formula(*fields[":precondition"], scope, pre_ctx)
                                                  : Formula::conj();
  FormulaContext eff_ctx = pre_ctx;
  eff_ctx.effect = true;
  a.effect = fields.count(":effect") ? parse_formula(*fields[":effect"], scope, eff_ctx) : Formula::conj();
  for (const auto& [k, v] : fields)
    if (k != ":parameters" && k != ":precondition" && k != ":effect") fail(*v, "unknown action field " + k);
  return a;
}

}  // namespace

Domain parse_domain(std::string_view text) {
  auto top = read_sexprs(text);
  Domain d;
  auto secs = sections(top, "domain", &d.name);
  if (top.empty() || d.name.empty()) throw ParseError("missing (define (domain ...))", {1, 1});
  std::vector<const SExpr*> action_secs;
  for (const SExpr* s : secs) {
    expect_list(*s, "domain section");
    if (s->items.empty()) fail(*s, "empty section");
    const SExpr& head = s->items[0];
    if (head.is_keyword(":requirements")) {
      for (size_t i = 1; i < s->items.size(); ++i) d.requirements.push_back(expect_atom(s->items[i], "requirement"));
    } else if (head.is_keyword(":types")) {
      TypedList types = parse_typed_list(s->items, 1, s->items.size());
      for (const auto& t : types) d.types.add(t.name, t.type);
      for (const auto& t : types)
        if (!d.types.contains(t.type)) fail(*s, "undeclared parent type " + t.type);
    } else if (head.is_keyword(":constants")) {
      d.constants = parse_typed_list(s->items, 1, s->items.size());
    } else if (head.is_keyword(":predicates")) {
      for (size_t i = 1; i < s->items.size(); ++i) {
        const SExpr& p = expect_list(s->items[i], "predicate");
        if (p.items.empty()) fail(p, "empty predicate declaration");
        PredicateSig sig;
        sig.name = expect_atom(p.items[0], "predicate name");
        sig.params = parse_typed_list(p.items, 1, p.items.size());
        if (d.find_predicate(sig.name)) fail(p, "duplicate predicate " + sig.name);
        d.predicates.push_back(std::move(sig));
      }
    } else if (head.is_keyword(":action")) {
      action_secs.push_back(s);
    } else {
      fail(head, "unsupported domain section " + (head.is_list ? std::string("(list)") : head.atom));
    }
  }
  check_types(top.front(), d.constants, d.types);
  for (const auto& p : d.predicates) check_types(top.front(), p.params, d.types);
  for (const SExpr* s : action_secs) {
    ActionSchema a = parse_action(*s, d);
    if (d.find_action(a.name)) fail(*s, "duplicate action " + a.name);
    d.actions.push_back(std::move(a));
  }
  return d;
}

Problem parse_problem(std::string_view text, const Domain& domain) {
  auto top = read_sexprs(text);
  Problem p;
  auto secs = sections(top, "problem", &p.name);
  if (top.empty() || p.name.empty()) throw ParseError("missing (define (problem ...))", {1, 1});
  std::set<std::string> objects;
  for (const auto& c : domain.constants) objects.insert(c.name);
  const SExpr* init = nullptr;
  const SExpr* goal = nullptr;
  for (const SExpr* s : secs) {
    expect_list(*s, "problem section");
    if (s->items.empty()) fail(*s, "empty section");
    const SExpr& head = s->items[0];
    if (head.is_keyword(":domain")) {
      p.domain_name = expect_atom(s->items.at(1), "domain name");
      if (p.domain_name != domain.name) fail(*s, "problem targets domain " + p.domain_name);
    } else if (head.is_keyword(":objects")) {
      p.objects = parse_typed_list(s->items, 1, s->items.size());
      check_types(*s, p.objects, domain.types);
      for (const auto& o : p.objects) objects.insert(o.name);
    } else if (head.is_keyword(":init")) {
      init = s;
    } else if (head.is_keyword(":goal")) {
      goal = s;
    } else if (head.is_keyword(":requirements")) {
    } else {
      fail(head, "unsupported problem section");
    }
  }
  FormulaContext ctx;
  ctx.domain = &domain;
  ctx.objects = &objects;
  std::set<std::string> scope;
  if (init) {
    for (size_t i = 1; i < init->items.size(); ++i) {
      Formula f = parse_formula(init->items[i], scope, ctx);
      if (f.kind != Formula::Kind::Atom) fail(init->items[i], "init entries must be ground atoms");
      p.init.add(Atom{f.predicate, f.terms});
    }
  }
  if (goal) {
    if (goal->items.size() != 2) fail(*goal, ":goal expects one formula");
    p.goal = parse_formula(goal->items[1], scope, ctx);
  } else {
    p.goal = Formula::conj();
  }
  return p;
}

std::vector<StreamDef> parse_streams(std::string_view text) {
  auto top = read_sexprs(text);
  std::vector<StreamDef> out;
  for (const SExpr* s : sections(top, "stream", nullptr)) {
    expect_list(*s, "stream section");
    if (s->items.empty()) fail(*s, "empty section");
    if (!s->items[0].is_keyword(":stream")) {
      if (s->items[0].is_keyword(":types") || s->items[0].is_keyword(":requirements")) continue;
      fail(s->items[0], "expected :stream");
    }
    if (s->items.size() < 2) fail(*s, "stream without name");
    StreamDef def;
    def.name = expect_atom(s->items[1], "stream name");
    for (const auto& other : out)
      if (other.name == def.name) fail(*s, "duplicate stream " + def.name);
    auto fields = keyed_fields(*s, 2);
    if (fields.count(":inputs")) def.inputs = parse_typed_list(*fields[":inputs"]);
    if (fields.count(":outputs")) def.outputs = parse_typed_list(*fields[":outputs"]);
    for (const auto& o : def.outputs)
      for (const auto& i : def.inputs)
        if (o.name == i.name) fail(*s, "output " + o.name + " shadows an input of " + def.name);
    FormulaContext ctx;
    ctx.allow_unknown_predicates = true;
    if (fields.count(":domain")) {
      std::set<std::string> scope = scope_of(def.inputs);
      // Existential helper variables may appear in :domain.
      std::function<void(const SExpr&)> gather = [&](const SExpr& e) {
        if (e.is_list) {
          for (const auto& c : e.items) gather(c);
        } else if (is_variable(e.atom)) {
          scope.insert(e.atom);
        }
      };
      gather(*fields[":domain"]);
      def.domain = parse_formula(*fields[":domain"], scope, ctx);
    }
    if (fields.count(":fail-effect")) {
      std::set<std::string> scope = scope_of(def.inputs);
      for (const auto& o : def.outputs) scope.insert(o.name);
      FormulaContext eff = ctx;
      eff.effect = true;
      def.fail_effect = parse_formula(*fields[":fail-effect"], scope, eff);
    }
    for (const auto& [k, v] : fields)
      if (k != ":inputs" && k != ":outputs" && k != ":domain" && k != ":fail-effect" && k != ":certified")
        fail(*v, "unknown stream field " + k);
    out.push_back(std::move(def));
  }
  return out;
}

std::vector<GeomActionDef> parse_geometric(std::string_view text, const Domain& domain) {
  auto top = read_sexprs(text);
  std::vector<GeomActionDef> out;
  for (const SExpr* s : sections(top, "geometric", nullptr)) {
    expect_list(*s, "geometric section");
    if (s->items.empty() || !s->items[0].is_keyword(":geom-action")) {
      if (!s->items.empty() && (s->items[0].is_keyword(":types") || s->items[0].is_keyword(":requirements")))
        continue;
      fail(*s, "expected :geom-action");
    }
    if (s->items.size() < 2) fail(*s, "geom-action without name");
    GeomActionDef g;
    g.name = expect_atom(s->items[1], "geom-action name");
    const ActionSchema* schema = domain.find_action(g.name);
    if (!schema) fail(*s, "geom-action " + g.name + " has no matching action");
    for (const auto& other : out)
      if (other.name == g.name) fail(*s, "duplicate geom-action " + g.name);
    auto fields = keyed_fields(*s, 2);
    if (fields.count(":parameters")) g.parameters = parse_typed_list(*fields[":parameters"]);
    if (g.parameters != schema->parameters)
      fail(*s, "parameters of geom-action " + g.name + " differ from the action's parameters");
    if (fields.count(":inputs")) g.inputs = parse_typed_list(*fields[":inputs"]);
    if (fields.count(":outputs")) g.outputs = parse_typed_list(*fields[":outputs"]);
    std::set<std::string> scope = scope_of(g.parameters);
    for (const auto& v : g.inputs) scope.insert(v.name);
    for (const auto& v : g.outputs) scope.insert(v.name);
    FormulaContext ctx;
    ctx.allow_unknown_predicates = true;
    ctx.allow_when = true;
    g.precondition = fields.count(":geom-precondition") ? parse_formula(*fields[":geom-precondition"], scope, ctx)
                                                         : Formula::conj();
    FormulaContext eff = ctx;
    eff.effect = true;
    g.effect = fields.count(":geom-effect") ? parse_formula(*fields[":geom-effect"], scope, eff) : Formula::conj();
    for (const auto& [k, v] : fields)
      if (k != ":parameters" && k != ":inputs" && k != ":outputs" && k != ":geom-precondition" &&
          k != ":geom-effect")
        fail(*v, "unknown geom-action field " + k);
    out.push_back(std::move(g));
  }
  return out;
}

namespace {

void certified_atoms(const Formula& f, const std::map<std::string, const StreamDef*>& streams,
                     std::vector<const Formula*>& out) {
  if (f.kind == Formula::Kind::Atom) {
    if (streams.count(f.predicate)) out.push_back(&f);
    return;
  }
  for (const auto& c : f.children) certified_atoms(c, streams, out);
}

}  // namespace

void check_geometric_streams(const std::vector<GeomActionDef>& geoms, const std::vector<StreamDef>& streams) {
  std::map<std::string, const StreamDef*> by_name;
  for (const auto& s : streams) by_name[s.name] = &s;
  for (const auto& g : geoms) {
    std::vector<const Formula*> atoms;
    certified_atoms(g.precondition, by_name, atoms);
    for (const Formula* a : atoms) {
      const StreamDef* def = by_name.at(a->predicate);
      if (a->terms.size() != def->arity())
        throw ParseError("certified fact " + to_string(*a) + " in " + g.name + " has arity " +
                         std::to_string(a->terms.size()) + ", stream expects " + std::to_string(def->arity()));
    }
    for (const auto& out : g.outputs) {
      bool certified = false;
      for (const Formula* a : atoms)
        for (const auto& t : a->terms) certified |= (t == out.name);
      if (!certified) throw ParseError("output " + out.name + " of " + g.name + " is not certified by any stream");
    }
  }
}

}  // namespace coast
