#include <sstream>

#include "coast/pddl.hpp"

namespace coast {

std::string Atom::str() const {
  std::string out = "(" + predicate;
  for (const auto& a : args) out += " " + a;
  return out + ")";
}

Formula Formula::atom(std::string predicate, std::vector<std::string> terms) {
  Formula f;
  f.kind = Kind::Atom;
  f.predicate = std::move(predicate);
  f.terms = std::move(terms);
  return f;
}

Formula Formula::conj(std::vector<Formula> children) {
  Formula f;
  f.kind = Kind::And;
  f.children = std::move(children);
  return f;
}

Formula Formula::disj(std::vector<Formula> children) {
  Formula f;
  f.kind = Kind::Or;
  f.children = std::move(children);
  return f;
}

Formula Formula::negate(Formula child) {
  Formula f;
  f.kind = Kind::Not;
  f.children.push_back(std::move(child));
  return f;
}

Formula Formula::forall(TypedList vars, Formula body) {
  Formula f;
  f.kind = Kind::Forall;
  f.vars = std::move(vars);
  f.children.push_back(std::move(body));
  return f;
}

Formula Formula::when(Formula condition, Formula effect) {
  Formula f;
  f.kind = Kind::When;
  f.children.push_back(std::move(condition));
  f.children.push_back(std::move(effect));
  return f;
}

Formula Formula::equal(std::string lhs, std::string rhs) {
  Formula f;
  f.kind = Kind::Equal;
  f.terms = {std::move(lhs), std::move(rhs)};
  return f;
}

namespace {

void write_formula(std::ostream& os, const Formula& f) {
  using K = Formula::Kind;
  switch (f.kind) {
    case K::Atom:
      os << "(" << f.predicate;
      for (const auto& t : f.terms) os << " " << t;
      os << ")";
      return;
    case K::Equal:
      os << "(= " << f.terms.at(0) << " " << f.terms.at(1) << ")";
      return;
    case K::And:
    case K::Or:
      os << (f.kind == K::And ? "(and" : "(or");
      for (const auto& c : f.children) {
        os << " ";
        write_formula(os, c);
      }
      os << ")";
      return;
    case K::Not:
      os << "(not ";
      write_formula(os, f.children.at(0));
      os << ")";
      return;
    case K::Forall:
      os << "(forall (";
      for (size_t i = 0; i < f.vars.size(); ++i) {
        if (i) os << " ";
        os << f.vars[i].name << " - " << f.vars[i].type;
      }
      os << ") ";
      write_formula(os, f.children.at(0));
      os << ")";
      return;
    case K::When:
      os << "(when ";
      write_formula(os, f.children.at(0));
      os << " ";
      write_formula(os, f.children.at(1));
      os << ")";
      return;
  }
}

}  // namespace

std::string to_string(const Formula& f) {
  std::ostringstream os;
  write_formula(os, f);
  return os.str();
}

TypeHierarchy::TypeHierarchy() { parent_["object"] = ""; }

void TypeHierarchy::add(const std::string& type, const std::string& parent) {
  if (type == "object") return;
  if (!parent_.count(type)) order_.push_back(type);
  parent_[type] = parent;
}

bool TypeHierarchy::is_subtype(const std::string& type, const std::string& ancestor) const {
  std::string t = type;
  for (int guard = 0; guard < 64; ++guard) {
    if (t == ancestor) return true;
    auto it = parent_.find(t);
    if (it == parent_.end() || it->second.empty()) return ancestor == "object";
    t = it->second;
  }
  return false;
}

const std::string& TypeHierarchy::parent(const std::string& type) const { return parent_.at(type); }

const ActionSchema* Domain::find_action(std::string_view name) const {
  for (const auto& a : actions)
    if (a.name == name) return &a;
  return nullptr;
}

ActionSchema* Domain::find_action(std::string_view name) {
  for (auto& a : actions)
    if (a.name == name) return &a;
  return nullptr;
}

const PredicateSig* Domain::find_predicate(std::string_view name) const {
  for (const auto& p : predicates)
    if (p.name == name) return &p;
  return nullptr;
}

ObjectUniverse::ObjectUniverse(const Domain& domain, const Problem& problem) : types_(domain.types) {
  for (const auto& c : domain.constants) add(c.name, c.type);
  for (const auto& o : problem.objects) add(o.name, o.type);
}

void ObjectUniverse::add(const std::string& name, const std::string& type) {
  if (!types_.contains(type)) types_.add(type);
  auto [it, inserted] = type_of_.emplace(name, type);
  if (inserted) objects_.push_back({name, type});
}

const std::string* ObjectUniverse::type_of(const std::string& name) const {
  auto it = type_of_.find(name);
  return it == type_of_.end() ? nullptr : &it->second;
}

std::vector<std::string> ObjectUniverse::objects_of(const std::string& type) const {
  std::vector<std::string> out;
  for (const auto& o : objects_)
    if (types_.is_subtype(o.type, type)) out.push_back(o.name);
  return out;
}

std::string resolve_term(const std::string& term, const Bindings& bindings) {
  if (!is_variable(term)) return term;
  auto it = bindings.find(term);
  if (it == bindings.end()) throw UnboundVariableError(term);
  return it->second;
}

Atom ground_atom(const Formula& atom, const Bindings& bindings) {
  Atom a;
  a.predicate = atom.predicate;
  a.args.reserve(atom.terms.size());
  for (const auto& t : atom.terms) a.args.push_back(resolve_term(t, bindings));
  return a;
}

bool eval_formula(const Formula& f, const State& s, const Bindings& bindings,
                  const ObjectUniverse& universe, const AtomOracle* oracle) {
  using K = Formula::Kind;
  switch (f.kind) {
    case K::Atom: {
      Atom a = ground_atom(f, bindings);
      if (oracle) {
        if (auto v = (*oracle)(a)) return *v;
      }
      return s.contains(a);
    }
    case K::Equal:
      return resolve_term(f.terms.at(0), bindings) == resolve_term(f.terms.at(1), bindings);
    case K::And:
      for (const auto& c : f.children)
        if (!eval_formula(c, s, bindings, universe, oracle)) return false;
      return true;
    case K::Or:
      for (const auto& c : f.children)
        if (eval_formula(c, s, bindings, universe, oracle)) return true;
      return false;
    case K::Not:
      return !eval_formula(f.children.at(0), s, bindings, universe, oracle);
    case K::When:
      return !eval_formula(f.children.at(0), s, bindings, universe, oracle) ||
             eval_formula(f.children.at(1), s, bindings, universe, oracle);
    case K::Forall: {
      // Enumerate the cartesian product of the quantified variables.
      Bindings b = bindings;
      std::vector<std::vector<std::string>> domains;
      for (const auto& v : f.vars) domains.push_back(universe.objects_of(v.type));
      std::vector<size_t> idx(f.vars.size(), 0);
      for (const auto& d : domains)
        if (d.empty()) return true;
      while (true) {
        for (size_t i = 0; i < f.vars.size(); ++i) b[f.vars[i].name] = domains[i][idx[i]];
        if (!eval_formula(f.children.at(0), s, b, universe, oracle)) return false;
        size_t k = 0;
        while (k < idx.size() && ++idx[k] == domains[k].size()) idx[k++] = 0;
        if (k == idx.size()) return true;
      }
    }
  }
  return false;
}

Formula substitute(const Formula& f, const Bindings& bindings) {
  Formula out = f;
  if (f.kind == Formula::Kind::Atom || f.kind == Formula::Kind::Equal) {
    for (auto& t : out.terms) {
      if (!is_variable(t)) continue;
      auto it = bindings.find(t);
      if (it != bindings.end()) t = it->second;
    }
    return out;
  }
  Bindings inner = bindings;
  for (const auto& v : f.vars) inner.erase(v.name);
  for (auto& c : out.children) c = substitute(c, f.vars.empty() ? bindings : inner);
  return out;
}

Formula expand_quantifiers(const Formula& f, const ObjectUniverse& universe) {
  if (f.kind == Formula::Kind::Atom || f.kind == Formula::Kind::Equal) return f;
  if (f.kind != Formula::Kind::Forall) {
    Formula out = f;
    for (auto& c : out.children) c = expand_quantifiers(c, universe);
    return out;
  }
  std::vector<std::vector<std::string>> domains;
  for (const auto& v : f.vars) domains.push_back(universe.objects_of(v.type));
  std::vector<Formula> parts;
  bool any_empty = false;
  for (const auto& d : domains) any_empty |= d.empty();
  if (!any_empty) {
    std::vector<size_t> idx(f.vars.size(), 0);
    while (true) {
      Bindings b;
      for (size_t i = 0; i < f.vars.size(); ++i) b[f.vars[i].name] = domains[i][idx[i]];
      parts.push_back(expand_quantifiers(substitute(f.children.at(0), b), universe));
      size_t k = 0;
      while (k < idx.size() && ++idx[k] == domains[k].size()) idx[k++] = 0;
      if (k == idx.size()) break;
    }
  }
  return Formula::conj(std::move(parts));
}

namespace {

void collect(const Formula& f, const State& s, Bindings& bindings, const ObjectUniverse& universe,
             EffectSet& out) {
  using K = Formula::Kind;
  switch (f.kind) {
    case K::Atom:
      out.adds.push_back(ground_atom(f, bindings));
      return;
    case K::Not:
      if (f.children.at(0).kind != K::Atom) throw std::invalid_argument("non-literal negated effect");
      out.dels.push_back(ground_atom(f.children[0], bindings));
      return;
    case K::And:
      for (const auto& c : f.children) collect(c, s, bindings, universe, out);
      return;
    case K::When:
      if (eval_formula(f.children.at(0), s, bindings, universe)) collect(f.children.at(1), s, bindings, universe, out);
      return;
    case K::Forall: {
      std::vector<std::vector<std::string>> domains;
      for (const auto& v : f.vars) domains.push_back(universe.objects_of(v.type));
      for (const auto& d : domains)
        if (d.empty()) return;
      Bindings saved = bindings;
      std::vector<size_t> idx(f.vars.size(), 0);
      while (true) {
        for (size_t i = 0; i < f.vars.size(); ++i) bindings[f.vars[i].name] = domains[i][idx[i]];
        collect(f.children.at(0), s, bindings, universe, out);
        size_t k = 0;
        while (k < idx.size() && ++idx[k] == domains[k].size()) idx[k++] = 0;
        if (k == idx.size()) break;
      }
      bindings = std::move(saved);
      return;
    }
    case K::Or:
    case K::Equal:
      throw std::invalid_argument("unsupported effect construct: " + to_string(f));
  }
}

}  // namespace

EffectSet collect_effects(const Formula& effect, const State& s, const Bindings& bindings,
                          const ObjectUniverse& universe) {
  EffectSet out;
  Bindings b = bindings;
  collect(effect, s, b, universe, out);
  return out;
}

State apply_effects(const State& s, const EffectSet& effects) {
  State next = s;
  for (const auto& d : effects.dels) next.remove(d);
  for (const auto& a : effects.adds) next.add(a);
  return next;
}

}  // namespace coast
