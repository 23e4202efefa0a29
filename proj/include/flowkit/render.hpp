#pragma once

// Graphviz output.  Spheres render as nested clusters, machines as
// clusters of stage nodes, Storage as a cylinder, junctions as small
// filled black bars.  Flow arcs are solid edges and trigger arcs dashed
// ones; every edge line ends in a "// flow N" or "// trigger N" comment
// so diagrams stay mechanically checkable against the model.
//
// A snapshot render marks every endpoint that has a trace record at the
// requested tick with a double border.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <set>
#include <variant>
#include <vector>

#include "flowkit/core.hpp"
#include "flowkit/dsl.hpp"
#include "flowkit/sim.hpp"

namespace flowkit {

class RenderError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RenderOptions {
  enum class RankDir : std::uint8_t { LR, TB };
  bool show_spheres = true;
  RankDir rankdir = RankDir::LR;
};

namespace detail {

inline std::string junction_node(const Model& m, JunctionId j) {
  return "\"junction " + m.junctions[j].name + "\"";
}

inline std::string endpoint_node(const Model& m, const Endpoint& e) {
  return "\"" + m.endpoint_str(e) + "\"";
}

inline void emit_machine(const Model& m, MachineId mid, const std::string& pad,
                         const std::set<std::string>& marked, std::string& out) {
  const Machine& mc = m.machines[mid];
  out += pad + "subgraph cluster_m" + std::to_string(mid) + " {\n";
  out += pad + "  label=\"" + mc.name + "\";\n";
  for (StageKind k : all_stage_kinds) {
    if (!mc.has_stage(k)) continue;
    Endpoint e{mid, k};
    out += pad + "  " + endpoint_node(m, e) + " [label=\"" + std::string(stage_name(k)) + "\"";
    if (k == StageKind::Storage) out += ", shape=cylinder";
    if (marked.count(m.endpoint_str(e))) out += ", peripheries=2";
    out += "];\n";
  }
  out += pad + "}\n";
}

inline void emit_sphere(const Model& m, SphereId sid, const std::string& pad,
                        const std::set<std::string>& marked, std::string& out) {
  const Sphere& s = m.spheres[sid];
  out += pad + "subgraph cluster_s" + std::to_string(sid) + " {\n";
  out += pad + "  label=\"" + s.name + "\";\n";
  struct Item {
    std::uint32_t seq;
    bool is_machine;
    std::uint32_t id;
  };
  std::vector<Item> items;
  for (MachineId mid : s.machines) items.push_back({m.machines[mid].decl_seq, true, mid});
  for (SphereId cid : s.children) items.push_back({m.spheres[cid].decl_seq, false, cid});
  std::sort(items.begin(), items.end(), [](const Item& a, const Item& b) { return a.seq < b.seq; });
  for (const Item& it : items) {
    if (it.is_machine)
      emit_machine(m, it.id, pad + "  ", marked, out);
    else
      emit_sphere(m, it.id, pad + "  ", marked, out);
  }
  out += pad + "}\n";
}

inline std::string render_dot(const Model& m, const RenderOptions& opts,
                              const std::set<std::string>& marked) {
  std::string out = "digraph model {\n";
  out += opts.rankdir == RenderOptions::RankDir::TB ? "  rankdir=TB;\n" : "  rankdir=LR;\n";
  out += "  compound=true;\n";
  out += "  node [shape=box];\n";

  if (opts.show_spheres) {
    for (SphereId c : m.spheres[root_sphere].children) emit_sphere(m, c, "  ", marked, out);
    for (MachineId mid : m.spheres[root_sphere].machines) emit_machine(m, mid, "  ", marked, out);
  } else {
    for (MachineId mid = 0; mid < m.machines.size(); ++mid) emit_machine(m, mid, "  ", marked, out);
  }

  for (JunctionId j = 0; j < m.junctions.size(); ++j)
    out += "  " + junction_node(m, j) +
           " [shape=box, style=filled, fillcolor=black, label=\"\", height=0.1, width=0.5];\n";

  for (const FlowArc& f : m.flows)
    out += "  " + endpoint_node(m, f.source) + " -> " + endpoint_node(m, f.target) +
           "; // flow " + std::to_string(f.index) + "\n";

  for (const TriggerArc& t : m.triggers) {
    std::string src = std::holds_alternative<Endpoint>(t.source)
                          ? endpoint_node(m, std::get<Endpoint>(t.source))
                          : junction_node(m, std::get<JunctionRef>(t.source).id);
    std::string dst = std::holds_alternative<Endpoint>(t.target)
                          ? endpoint_node(m, std::get<Endpoint>(t.target))
                          : junction_node(m, std::get<JunctionRef>(t.target).id);
    std::string attrs = "style=dashed";
    if (t.guard) attrs += ", label=\"when " + serialize_guard(*t.guard) + "\"";
    out += "  " + src + " -> " + dst + " [" + attrs + "]; // trigger " +
           std::to_string(t.index) + "\n";
  }

  out += "}\n";
  return out;
}

}  // namespace detail

inline std::string to_dot(const Model& m, const RenderOptions& opts = {}) {
  return detail::render_dot(m, opts, {});
}

// Renders the model with a double border on every endpoint that has a
// trace record at `tick`.
inline std::string to_dot_snapshot(const Model& m, const SimTrace& trace, std::uint32_t tick,
                                   const RenderOptions& opts = {}) {
  if (tick > trace.last_tick)
    throw RenderError("tick " + std::to_string(tick) + " is outside the trace (last tick " +
                      std::to_string(trace.last_tick) + ")");
  std::set<std::string> marked;
  for (const TraceRecord& r : trace.records)
    if (r.tick == tick && !r.machine.empty()) marked.insert(r.machine + "." + r.stage);
  return detail::render_dot(m, opts, marked);
}

}  // namespace flowkit
