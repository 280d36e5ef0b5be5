#include <sstream>

#include "coast/pddl.hpp"

namespace coast {

namespace {

std::string typed(const TypedList& list) {
  std::string out;
  for (size_t i = 0; i < list.size(); ++i) {
    if (i) out += " ";
    out += list[i].name + " - " + list[i].type;
  }
  return out;
}

}  // namespace

std::string to_pddl(const Domain& d) {
  std::ostringstream os;
  os << "(define (domain " << d.name << ")\n";
  if (!d.requirements.empty()) {
    os << "  (:requirements";
    for (const auto& r : d.requirements) os << " " << r;
    os << ")\n";
  }
  if (!d.types.declared().empty()) {
    os << "  (:types";
    for (const auto& t : d.types.declared()) os << " " << t << " - " << d.types.parent(t);
    os << ")\n";
  }
  if (!d.constants.empty()) os << "  (:constants " << typed(d.constants) << ")\n";
  os << "  (:predicates";
  for (const auto& p : d.predicates) {
    os << "\n    (" << p.name;
    if (!p.params.empty()) os << " " << typed(p.params);
    os << ")";
  }
  os << ")\n";
  for (const auto& a : d.actions) {
    os << "  (:action " << a.name << "\n";
    os << "    :parameters (" << typed(a.parameters) << ")\n";
    os << "    :precondition " << to_string(a.precondition) << "\n";
    os << "    :effect " << to_string(a.effect) << ")\n";
  }
  os << ")\n";
  return os.str();
}

std::string to_pddl(const Problem& p) {
  std::ostringstream os;
  os << "(define (problem " << p.name << ")\n";
  os << "  (:domain " << p.domain_name << ")\n";
  os << "  (:objects " << typed(p.objects) << ")\n";
  os << "  (:init";
  for (const auto& a : p.init) os << "\n    " << a.str();
  os << ")\n";
  os << "  (:goal " << to_string(p.goal) << "))\n";
  return os.str();
}

std::string streams_to_pddl(const std::vector<StreamDef>& streams, const std::string& name) {
  std::ostringstream os;
  os << "(define (stream " << name << ")\n";
  for (const auto& s : streams) {
    os << "  (:stream " << s.name << "\n";
    os << "    :inputs (" << typed(s.inputs) << ")\n";
    os << "    :outputs (" << typed(s.outputs) << ")";
    if (s.domain) os << "\n    :domain " << to_string(*s.domain);
    if (s.fail_effect) os << "\n    :fail-effect " << to_string(*s.fail_effect);
    os << ")\n";
  }
  os << ")\n";
  return os.str();
}

std::string geometric_to_pddl(const std::vector<GeomActionDef>& geoms, const std::string& name) {
  std::ostringstream os;
  os << "(define (geometric " << name << ")\n";
  for (const auto& g : geoms) {
    os << "  (:geom-action " << g.name << "\n";
    os << "    :parameters (" << typed(g.parameters) << ")\n";
    os << "    :inputs (" << typed(g.inputs) << ")\n";
    os << "    :outputs (" << typed(g.outputs) << ")\n";
    os << "    :geom-precondition " << to_string(g.precondition) << "\n";
    os << "    :geom-effect " << to_string(g.effect) << ")\n";
  }
  os << ")\n";
  return os.str();
}

}  // namespace coast
