#include <cstdio>
#include <istream>
#include <sstream>

#include "coast/engine.hpp"

namespace coast {

// Format, one record per line:
//   instance <kind> <parameter> <seed> <feasible 0|1>
//   step <action> <args...>
//   geom <step> in|out <var> <object> <type>
//   object <name> <type>
//   value <name> <doubles...>
//   certified <predicate> <args...>

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> words(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

}  // namespace

void write_solution(std::ostream& out, const Solution& sol, const InstanceInfo& info) {
  out << "instance " << info.kind << ' ' << info.parameter << ' ' << info.seed << ' ' << (info.feasible ? 1 : 0)
      << '\n';
  std::map<std::string, std::string> types;
  for (const auto& o : sol.stream_objects) types[o.name] = o.type;
  for (size_t t = 0; t < sol.plan.steps.size(); ++t) {
    const auto& a = sol.plan.steps[t];
    out << "step " << a.schema_name;
    for (const auto& x : a.arguments) out << ' ' << x;
    out << '\n';
    if (t < sol.geom_plan.size()) {
      for (const auto& [var, ref] : sol.geom_plan[t].input_bindings)
        out << "geom " << t << " in " << var << ' ' << ref.name << ' ' << ref.type_name << '\n';
      for (const auto& [var, ref] : sol.geom_plan[t].output_bindings)
        out << "geom " << t << " out " << var << ' ' << ref.name << ' ' << ref.type_name << '\n';
    }
  }
  for (const auto& o : sol.stream_objects) out << "object " << o.name << ' ' << o.type << '\n';
  for (const auto& [name, v] : sol.bindings) {
    out << "value " << name;
    for (double x : v) out << ' ' << fmt(x);
    out << '\n';
  }
  for (const auto& a : sol.certified) {
    out << "certified " << a.predicate;
    for (const auto& x : a.args) out << ' ' << x;
    out << '\n';
  }
}

std::pair<Solution, InstanceInfo> read_solution(std::istream& in) {
  Solution sol;
  InstanceInfo info;
  std::string line;
  size_t lineno = 0;
  auto bad = [&](const std::string& why) {
    return std::runtime_error("solution line " + std::to_string(lineno) + ": " + why);
  };
  while (std::getline(in, line)) {
    ++lineno;
    auto w = words(line);
    if (w.empty() || w[0][0] == '#') continue;
    const std::string& tag = w[0];
    if (tag == "instance") {
      if (w.size() != 5) throw bad("instance expects 4 fields");
      info.kind = w[1];
      info.parameter = std::stoi(w[2]);
      info.seed = std::stoull(w[3]);
      info.feasible = w[4] == "1";
    } else if (tag == "step") {
      if (w.size() < 2) throw bad("step without action");
      GroundedAction a;
      a.schema_name = w[1];
      a.arguments.assign(w.begin() + 2, w.end());
      GroundedGeomAction ga;
      ga.base = a;
      sol.plan.steps.push_back(std::move(a));
      sol.geom_plan.push_back(std::move(ga));
    } else if (tag == "geom") {
      if (w.size() != 6) throw bad("geom expects 5 fields");
      size_t t = std::stoul(w[1]);
      if (t >= sol.geom_plan.size()) throw bad("geom refers to an unknown step");
      ObjectRef ref{w[4], ObjectKind::StreamObject, w[5]};
      auto& ga = sol.geom_plan[t];
      ga.has_geometry = true;
      if (w[2] == "in") {
        ga.input_bindings.emplace_back(w[3], ref);
      } else if (w[2] == "out") {
        ga.output_bindings.emplace_back(w[3], ref);
      } else {
        throw bad("geom direction must be in or out");
      }
    } else if (tag == "object") {
      if (w.size() != 3) throw bad("object expects 2 fields");
      sol.stream_objects.push_back({w[1], w[2]});
    } else if (tag == "value") {
      if (w.size() < 2) throw bad("value without name");
      Value v;
      for (size_t i = 2; i < w.size(); ++i) v.push_back(std::stod(w[i]));
      sol.bindings[w[1]] = std::move(v);
    } else if (tag == "certified") {
      if (w.size() < 2) throw bad("certified without predicate");
      sol.certified.insert({w[1], {w.begin() + 2, w.end()}});
    } else {
      throw bad("unknown record " + tag);
    }
  }
  return {std::move(sol), std::move(info)};
}

}  // namespace coast
