#pragma once

// Core model for flowthings machines: things that flow, spheres that scope,
// machines made of stages, and the arcs that connect stages.
//
// A model is built through ModelBuilder, which rejects every construction
// the stage tables forbid, and is immutable afterwards.  All analysis and
// simulation code treats Model as plain data.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace flowkit {

// ---------------------------------------------------------------------------
// Stages

enum class StageKind : std::uint8_t {
  Create,
  Arrive,
  Accept,
  Receive,
  Process,
  Release,
  Transfer,
  Storage,
};

inline constexpr StageKind all_stage_kinds[] = {
    StageKind::Create,  StageKind::Arrive,  StageKind::Accept,
    StageKind::Receive, StageKind::Process, StageKind::Release,
    StageKind::Transfer, StageKind::Storage,
};

inline constexpr std::string_view stage_name(StageKind k) {
  switch (k) {
    case StageKind::Create:   return "Create";
    case StageKind::Arrive:   return "Arrive";
    case StageKind::Accept:   return "Accept";
    case StageKind::Receive:  return "Receive";
    case StageKind::Process:  return "Process";
    case StageKind::Release:  return "Release";
    case StageKind::Transfer: return "Transfer";
    case StageKind::Storage:  return "Storage";
  }
  return "?";
}

inline std::optional<StageKind> stage_from_name(std::string_view s) {
  for (StageKind k : all_stage_kinds)
    if (stage_name(k) == s) return k;
  return std::nullopt;
}

// Legal stage-to-stage pairs for flow arcs inside one machine.  Receive is
// the merged Arrive+Accept stage, so it mirrors Accept's connections, and
// Storage connects both ways with every stage that can hold or produce a
// thing.  Everything not listed here is rejected.
inline constexpr bool legal_intra_pair(StageKind from, StageKind to) {
  using S = StageKind;
  switch (from) {
    case S::Arrive:   return to == S::Accept;
    case S::Accept:   return to == S::Process || to == S::Release || to == S::Storage;
    case S::Receive:  return to == S::Process || to == S::Release || to == S::Storage;
    case S::Process:  return to == S::Release || to == S::Storage;
    case S::Create:   return to == S::Process || to == S::Release || to == S::Storage;
    case S::Release:  return to == S::Transfer || to == S::Storage;
    case S::Transfer: return to == S::Arrive || to == S::Receive;
    case S::Storage:
      return to == S::Accept || to == S::Receive || to == S::Process ||
             to == S::Create || to == S::Release;
  }
  return false;
}

// Stages a release-targeting trigger may pull a token out of: every stage
// with a legal hop into Release.
inline constexpr bool pre_release_stage(StageKind k) {
  return legal_intra_pair(k, StageKind::Release);
}

// ---------------------------------------------------------------------------
// Things and attributes

struct AttrDomain {
  enum class Kind { Symbols, Integer };
  Kind kind = Kind::Symbols;
  std::vector<std::string> symbols;  // populated for Kind::Symbols

  friend bool operator==(const AttrDomain&, const AttrDomain&) = default;
};

struct ThingAttr {
  std::string name;
  AttrDomain domain;

  friend bool operator==(const ThingAttr&, const ThingAttr&) = default;
};

struct ThingKind {
  std::string name;
  std::vector<ThingAttr> attributes;

  const ThingAttr* find_attr(std::string_view n) const {
    for (const auto& a : attributes)
      if (a.name == n) return &a;
    return nullptr;
  }

  friend bool operator==(const ThingKind&, const ThingKind&) = default;
};

// ---------------------------------------------------------------------------
// Spheres and machines

using ThingId = std::uint32_t;
using SphereId = std::uint32_t;
using MachineId = std::uint32_t;
using ArcId = std::uint32_t;      // shared index space for flow and trigger arcs
using JunctionId = std::uint32_t;

inline constexpr SphereId root_sphere = 0;

struct Sphere {
  std::string name;                    // empty for the root
  std::optional<SphereId> parent;      // nullopt only for the root
  std::vector<SphereId> children;
  std::vector<MachineId> machines;
  std::uint32_t decl_seq = 0;          // position among its parent's children
};

struct Machine {
  std::string name;
  SphereId owner = root_sphere;
  ThingId thing = 0;                   // kind this machine handles
  std::vector<StageKind> stages;       // unique; Receive excludes Arrive/Accept
  std::vector<SphereId> subspheres;    // always empty in a well-formed model
  std::uint32_t decl_seq = 0;

  bool has_stage(StageKind k) const {
    for (StageKind s : stages)
      if (s == k) return true;
    return false;
  }
};

// A resolved stage position: machine plus one of its stages.
struct Endpoint {
  MachineId machine = 0;
  StageKind stage = StageKind::Create;

  friend bool operator==(const Endpoint&, const Endpoint&) = default;
  friend auto operator<=>(const Endpoint&, const Endpoint&) = default;
};

// ---------------------------------------------------------------------------
// Guards

// Guard expressions form a small tree kept in one vector; node 'root' is the
// top.  AttrEq compares a token attribute (or scenario binding) to a symbol
// or number; ClockLe compares the current tick to a named scenario deadline.
struct GuardNode {
  enum class Op { AttrEq, ClockLe, And, Or, Not };
  Op op = Op::AttrEq;
  std::string name;        // AttrEq: attribute; ClockLe: deadline name
  std::string symbol;      // AttrEq rhs when symbolic
  std::int64_t number = 0; // AttrEq rhs when numeric
  bool numeric = false;
  std::uint32_t lhs = 0;   // child indices for And/Or/Not
  std::uint32_t rhs = 0;

  friend bool operator==(const GuardNode&, const GuardNode&) = default;
};

struct Guard {
  std::vector<GuardNode> nodes;
  std::uint32_t root = 0;

  friend bool operator==(const Guard&, const Guard&) = default;

  // Attribute names referenced by AttrEq atoms (deadline names excluded).
  std::vector<std::string> attr_names() const {
    std::vector<std::string> out;
    for (const auto& n : nodes)
      if (n.op == GuardNode::Op::AttrEq) out.push_back(n.name);
    return out;
  }
  std::vector<std::string> deadline_names() const {
    std::vector<std::string> out;
    for (const auto& n : nodes)
      if (n.op == GuardNode::Op::ClockLe) out.push_back(n.name);
    return out;
  }
};

// ---------------------------------------------------------------------------
// Arcs and junctions

struct FlowArc {
  ArcId index = 0;  // declaration index, shared with trigger arcs
  Endpoint source;
  Endpoint target;
};

struct JunctionRef {
  JunctionId id = 0;
  friend bool operator==(const JunctionRef&, const JunctionRef&) = default;
  friend auto operator<=>(const JunctionRef&, const JunctionRef&) = default;
};

// A trigger arc never carries tokens; it wakes its target.  Inputs into a
// junction have an Endpoint source and a JunctionRef target; the junction's
// own output arc has a JunctionRef source and an Endpoint target.
struct TriggerArc {
  ArcId index = 0;
  std::variant<Endpoint, JunctionRef> source;
  std::variant<Endpoint, JunctionRef> target;
  std::optional<Guard> guard;
};

// Synchronizes several trigger inputs: the output fires only after every
// input has fired at least once since the last output.
struct Junction {
  std::string name;
  std::vector<ArcId> inputs;  // trigger arc indices
  ArcId output = 0;           // trigger arc index
  std::uint32_t decl_seq = 0;
};

// ---------------------------------------------------------------------------
// Model

class BuildError : public std::runtime_error {
 public:
  explicit BuildError(const std::string& what) : std::runtime_error(what) {}
};

struct Model {
  std::vector<ThingKind> things;
  std::vector<Sphere> spheres;    // [0] is always the root
  std::vector<Machine> machines;
  std::vector<FlowArc> flows;     // declaration order
  std::vector<TriggerArc> triggers;
  std::vector<Junction> junctions;
  std::uint32_t arc_count = 0;    // next shared arc index

  Model() { spheres.push_back(Sphere{}); }

  const ThingKind* find_thing(std::string_view name) const {
    for (const auto& t : things)
      if (t.name == name) return &t;
    return nullptr;
  }
  std::optional<ThingId> thing_id(std::string_view name) const {
    for (ThingId i = 0; i < things.size(); ++i)
      if (things[i].name == name) return i;
    return std::nullopt;
  }

  std::optional<SphereId> child_sphere(SphereId parent, std::string_view name) const {
    for (SphereId c : spheres[parent].children)
      if (spheres[c].name == name) return c;
    return std::nullopt;
  }
  std::optional<MachineId> machine_in(SphereId sphere, std::string_view name) const {
    for (MachineId m : spheres[sphere].machines)
      if (machines[m].name == name) return m;
    return std::nullopt;
  }

  // Follows a chain of sphere names from the root.
  std::optional<SphereId> resolve_sphere(const std::vector<std::string>& path) const {
    SphereId cur = root_sphere;
    for (const auto& seg : path) {
      auto next = child_sphere(cur, seg);
      if (!next) return std::nullopt;
      cur = *next;
    }
    return cur;
  }

  // Resolves "Sphere....Machine" (dotted, no stage suffix).
  std::optional<MachineId> resolve_machine(std::string_view dotted) const {
    std::vector<std::string> segs;
    std::size_t pos = 0;
    while (pos <= dotted.size()) {
      std::size_t dot = dotted.find('.', pos);
      if (dot == std::string_view::npos) {
        segs.emplace_back(dotted.substr(pos));
        break;
      }
      segs.emplace_back(dotted.substr(pos, dot - pos));
      pos = dot + 1;
    }
    if (segs.empty()) return std::nullopt;
    std::string mname = segs.back();
    segs.pop_back();
    auto sp = resolve_sphere(segs);
    if (!sp) return std::nullopt;
    return machine_in(*sp, mname);
  }

  bool endpoint_ok(const Endpoint& e) const {
    return e.machine < machines.size() && machines[e.machine].has_stage(e.stage);
  }

  // Dotted path of a machine from the root sphere, e.g. "Recruiter.Offer".
  // Falls back to the bare machine name when the sphere links are broken
  // (out of range or cyclic), so diagnostics about such models still print.
  std::string machine_path(MachineId m) const {
    std::vector<std::string_view> parts;
    parts.push_back(machines[m].name);
    SphereId s = machines[m].owner;
    std::size_t steps = 0;
    if (s >= spheres.size()) return std::string(machines[m].name);
    while (spheres[s].parent) {
      if (++steps > spheres.size() || *spheres[s].parent >= spheres.size())
        return std::string(machines[m].name);
      parts.push_back(spheres[s].name);
      s = *spheres[s].parent;
    }
    std::string out;
    for (auto it = parts.rbegin(); it != parts.rend(); ++it) {
      if (!out.empty()) out += '.';
      out += *it;
    }
    return out;
  }

  std::string endpoint_str(const Endpoint& e) const {
    std::string out = machine_path(e.machine);
    out += '.';
    out += stage_name(e.stage);
    return out;
  }

  std::optional<JunctionId> junction_id(std::string_view name) const {
    for (JunctionId i = 0; i < junctions.size(); ++i)
      if (junctions[i].name == name) return i;
    return std::nullopt;
  }
};

// ---------------------------------------------------------------------------
// Arc legality over a model

inline bool same_machine(const Endpoint& a, const Endpoint& b) {
  return a.machine == b.machine;
}

// Checks one flow arc against the stage tables.  Returns an error message,
// or nullopt when the arc is legal.
inline std::optional<std::string> flow_arc_error(const Model& m,
                                                 const Endpoint& source,
                                                 const Endpoint& target) {
  if (!m.endpoint_ok(source)) return "flow source does not name a stage of its machine";
  if (!m.endpoint_ok(target)) return "flow target does not name a stage of its machine";
  if (same_machine(source, target)) {
    if (!legal_intra_pair(source.stage, target.stage))
      return "illegal stage pair " + std::string(stage_name(source.stage)) + " -> " +
             std::string(stage_name(target.stage));
    return std::nullopt;
  }
  if (source.stage != StageKind::Transfer || target.stage != StageKind::Transfer)
    return "flow between machines must connect Transfer to Transfer";
  if (m.machines[source.machine].thing != m.machines[target.machine].thing)
    return "flow between machines carrying different thing kinds";
  return std::nullopt;
}

inline std::optional<std::string> trigger_target_error(const Model& m,
                                                       const Endpoint& target) {
  if (!m.endpoint_ok(target)) return "trigger target does not name a stage of its machine";
  if (target.stage != StageKind::Create && target.stage != StageKind::Release)
    return "trigger target must be a Create or Release stage";
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Builder

class ModelBuilder {
 public:
  ModelBuilder() = default;

  ThingId add_thing(std::string name, std::vector<ThingAttr> attrs = {}) {
    if (model_.find_thing(name)) throw BuildError("duplicate thing '" + name + "'");
    for (std::size_t i = 0; i < attrs.size(); ++i) {
      if (attrs[i].domain.kind == AttrDomain::Kind::Symbols && attrs[i].domain.symbols.empty())
        throw BuildError("attribute '" + attrs[i].name + "' has an empty symbol domain");
      for (std::size_t j = i + 1; j < attrs.size(); ++j)
        if (attrs[i].name == attrs[j].name)
          throw BuildError("duplicate attribute '" + attrs[i].name + "' on thing '" + name + "'");
    }
    model_.things.push_back(ThingKind{std::move(name), std::move(attrs)});
    return ThingId(model_.things.size() - 1);
  }

  SphereId add_sphere(const std::vector<std::string>& parent_path, std::string name) {
    auto parent = model_.resolve_sphere(parent_path);
    if (!parent) throw BuildError("unknown parent sphere for '" + name + "'");
    return add_sphere_in(*parent, std::move(name));
  }

  SphereId add_sphere_in(SphereId parent, std::string name) {
    require_fresh_name(parent, name);
    Sphere s;
    s.name = std::move(name);
    s.parent = parent;
    s.decl_seq = next_decl_seq_++;
    model_.spheres.push_back(std::move(s));
    SphereId id = SphereId(model_.spheres.size() - 1);
    model_.spheres[parent].children.push_back(id);
    return id;
  }

  MachineId add_machine(const std::vector<std::string>& sphere_path, std::string name,
                        std::string_view thing, std::vector<StageKind> stages) {
    auto sphere = model_.resolve_sphere(sphere_path);
    if (!sphere) throw BuildError("unknown sphere for machine '" + name + "'");
    return add_machine_in(*sphere, std::move(name), thing, std::move(stages));
  }

  MachineId add_machine_in(SphereId sphere, std::string name, std::string_view thing,
                           std::vector<StageKind> stages) {
    require_fresh_name(sphere, name);
    auto tid = model_.thing_id(thing);
    if (!tid) throw BuildError("machine '" + name + "' names unknown thing '" + std::string(thing) + "'");
    bool merged = false, split = false;
    for (std::size_t i = 0; i < stages.size(); ++i) {
      if (stages[i] == StageKind::Receive) merged = true;
      if (stages[i] == StageKind::Arrive || stages[i] == StageKind::Accept) split = true;
      for (std::size_t j = i + 1; j < stages.size(); ++j)
        if (stages[i] == stages[j])
          throw BuildError("machine '" + name + "' repeats stage " + std::string(stage_name(stages[i])));
    }
    if (merged && split)
      throw BuildError("machine '" + name + "' mixes Receive with Arrive/Accept");
    Machine m;
    m.name = std::move(name);
    m.owner = sphere;
    m.thing = *tid;
    m.stages = std::move(stages);
    m.decl_seq = next_decl_seq_++;
    model_.machines.push_back(std::move(m));
    MachineId id = MachineId(model_.machines.size() - 1);
    model_.spheres[sphere].machines.push_back(id);
    return id;
  }

  // Resolves "Sphere.....Machine.Stage" into an Endpoint.
  Endpoint endpoint(std::string_view dotted) const {
    std::size_t dot = dotted.rfind('.');
    if (dot == std::string_view::npos)
      throw BuildError("endpoint path '" + std::string(dotted) + "' has no stage");
    auto stage = stage_from_name(dotted.substr(dot + 1));
    if (!stage)
      throw BuildError("endpoint path '" + std::string(dotted) + "' ends in an unknown stage");
    auto machine = model_.resolve_machine(dotted.substr(0, dot));
    if (!machine)
      throw BuildError("endpoint path '" + std::string(dotted) + "' names an unknown machine");
    Endpoint e{*machine, *stage};
    if (!model_.endpoint_ok(e))
      throw BuildError("machine '" + model_.machine_path(*machine) + "' has no " +
                       std::string(stage_name(*stage)) + " stage");
    return e;
  }

  ArcId add_flow_arc(const Endpoint& source, const Endpoint& target) {
    if (auto err = flow_arc_error(model_, source, target)) throw BuildError(*err);
    model_.flows.push_back(FlowArc{model_.arc_count, source, target});
    return model_.arc_count++;
  }
  ArcId add_flow_arc(std::string_view source, std::string_view target) {
    return add_flow_arc(endpoint(source), endpoint(target));
  }

  JunctionId add_junction(std::string name, const Endpoint& output_target) {
    if (model_.junction_id(name)) throw BuildError("duplicate junction '" + name + "'");
    if (auto err = trigger_target_error(model_, output_target))
      throw BuildError("junction '" + name + "': " + *err);
    JunctionId id = JunctionId(model_.junctions.size());
    TriggerArc out;
    out.index = model_.arc_count++;
    out.source = JunctionRef{id};
    out.target = output_target;
    model_.triggers.push_back(std::move(out));
    Junction j;
    j.name = std::move(name);
    j.output = model_.triggers.back().index;
    j.decl_seq = next_decl_seq_++;
    model_.junctions.push_back(std::move(j));
    return id;
  }
  JunctionId add_junction(std::string name, std::string_view output_target) {
    return add_junction(std::move(name), endpoint(output_target));
  }

  ArcId add_trigger_arc(const Endpoint& source, const Endpoint& target,
                        std::optional<Guard> guard = std::nullopt) {
    if (!model_.endpoint_ok(source))
      throw BuildError("trigger source does not name a stage of its machine");
    if (auto err = trigger_target_error(model_, target)) throw BuildError(*err);
    check_guard(source, guard);
    model_.triggers.push_back(TriggerArc{model_.arc_count, source, target, std::move(guard)});
    return model_.arc_count++;
  }

  ArcId add_trigger_arc(const Endpoint& source, JunctionId junction,
                        std::optional<Guard> guard = std::nullopt) {
    if (!model_.endpoint_ok(source))
      throw BuildError("trigger source does not name a stage of its machine");
    if (junction >= model_.junctions.size()) throw BuildError("trigger names an unknown junction");
    check_guard(source, guard);
    ArcId id = model_.arc_count++;
    model_.triggers.push_back(TriggerArc{id, source, JunctionRef{junction}, std::move(guard)});
    model_.junctions[junction].inputs.push_back(id);
    return id;
  }

  ArcId add_trigger_arc(std::string_view source, std::string_view target,
                        std::optional<Guard> guard = std::nullopt) {
    return add_trigger_arc(endpoint(source), endpoint(target), std::move(guard));
  }

  const Model& peek() const { return model_; }

  // Final well-formedness that only holds once declarations are complete.
  Model finish() {
    for (const auto& j : model_.junctions)
      if (j.inputs.size() < 2)
        throw BuildError("junction '" + j.name + "' has " + std::to_string(j.inputs.size()) +
                         " trigger input(s); at least 2 required");
    return std::move(model_);
  }

 private:
  void require_fresh_name(SphereId sphere, const std::string& name) const {
    if (model_.child_sphere(sphere, name) || model_.machine_in(sphere, name))
      throw BuildError("name '" + name + "' already declared in this sphere");
  }

  // Guards may only mention attributes of the source machine's thing kind,
  // plus the reserved clock; deadline names are scenario data and are
  // checked when a simulation is set up.
  void check_guard(const Endpoint& source, const std::optional<Guard>& guard) const {
    if (!guard) return;
    const ThingKind& kind = model_.things[model_.machines[source.machine].thing];
    for (const auto& name : guard->attr_names())
      if (!kind.find_attr(name))
        throw BuildError("guard references unknown attribute '" + name + "' of thing '" +
                         kind.name + "'");
  }

  Model model_;
  std::uint32_t next_decl_seq_ = 0;
};

// ---------------------------------------------------------------------------
// Stage graph

// One node per stage endpoint, plus one per junction.  Every arc in the
// model appears as exactly one labeled edge.
struct StageGraph {
  using Node = std::variant<Endpoint, JunctionRef>;
  enum class EdgeKind { Flow, Trigger };

  struct Edge {
    Node source;
    Node target;
    EdgeKind kind = EdgeKind::Flow;
    ArcId arc = 0;
  };

  std::vector<Edge> edges;

  std::size_t edge_count() const { return edges.size(); }

  template <typename Fn>
  void for_each_from(const Node& n, Fn&& fn) const {
    for (const auto& e : edges)
      if (e.source == n) fn(e);
  }
};

inline StageGraph stage_graph(const Model& m) {
  StageGraph g;
  for (const auto& f : m.flows)
    g.edges.push_back({f.source, f.target, StageGraph::EdgeKind::Flow, f.index});
  for (const auto& t : m.triggers) {
    StageGraph::Node src = std::holds_alternative<Endpoint>(t.source)
                               ? StageGraph::Node(std::get<Endpoint>(t.source))
                               : StageGraph::Node(std::get<JunctionRef>(t.source));
    StageGraph::Node dst = std::holds_alternative<Endpoint>(t.target)
                               ? StageGraph::Node(std::get<Endpoint>(t.target))
                               : StageGraph::Node(std::get<JunctionRef>(t.target));
    g.edges.push_back({src, dst, StageGraph::EdgeKind::Trigger, t.index});
  }
  return g;
}

// All stage endpoints of a model, in machine then stage declaration order.
inline std::vector<Endpoint> all_endpoints(const Model& m) {
  std::vector<Endpoint> out;
  for (MachineId i = 0; i < m.machines.size(); ++i)
    for (StageKind k : m.machines[i].stages) out.push_back(Endpoint{i, k});
  return out;
}

}  // namespace flowkit
