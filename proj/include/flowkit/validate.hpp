#pragma once

// Whole-model validation.  validate() accepts any Model, including ones
// assembled by hand that violate invariants ModelBuilder would have
// enforced, and reports every violation it finds.  Codes:
//
//   FM-E001  duplicate stage within a machine
//   FM-E002  illegal flow arc
//   FM-E003  machine contains a subsphere
//   FM-E004  arc endpoint does not exist
//   FM-E005  machine mixes Receive with Arrive/Accept
//   FM-E006  sphere tree malformed (cycle, orphan, inconsistent links)
//   FM-E007  trigger target is not Create or Release
//   FM-E008  junction with fewer than two inputs
//   FM-E009  guard references an unknown attribute
//   FM-W001  endpoint can never participate in any flow (inert)
//   FM-W002  storage that can never drain
//
// Errors sort before warnings, then by code, then by declaration order.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "flowkit/core.hpp"

namespace flowkit {

struct Diagnostic {
  enum class Severity : std::uint8_t { Error, Warning };
  Severity severity = Severity::Error;
  std::string code;
  std::string subject;  // dotted machine path, endpoint, or arc description
  std::string message;
  std::uint32_t order = 0;  // declaration index of the subject, for sorting
};

inline bool any_errors(const std::vector<Diagnostic>& diags) {
  return std::any_of(diags.begin(), diags.end(), [](const Diagnostic& d) {
    return d.severity == Diagnostic::Severity::Error;
  });
}

namespace detail {

// Endpoint validity that tolerates out-of-range ids.
inline bool endpoint_exists(const Model& m, const Endpoint& e) {
  return e.machine < m.machines.size() && m.machines[e.machine].has_stage(e.stage);
}

inline std::string arc_subject(const Model& m, const std::variant<Endpoint, JunctionRef>& source,
                               const std::variant<Endpoint, JunctionRef>& target,
                               const char* arrow) {
  auto side = [&](const std::variant<Endpoint, JunctionRef>& v) -> std::string {
    if (std::holds_alternative<JunctionRef>(v)) {
      JunctionId id = std::get<JunctionRef>(v).id;
      return id < m.junctions.size() ? "junction " + m.junctions[id].name : "junction ?";
    }
    const Endpoint& e = std::get<Endpoint>(v);
    if (!endpoint_exists(m, e))
      return e.machine < m.machines.size()
                 ? m.machine_path(e.machine) + "." + std::string(stage_name(e.stage))
                 : "<missing machine>." + std::string(stage_name(e.stage));
    return m.endpoint_str(e);
  };
  return side(source) + " " + arrow + " " + side(target);
}

// Causal reachability: flow arcs, trigger arcs, and junction in/out edges
// all conduct.  A junction passes as soon as any input is reachable; for a
// may-happen warning that is the safe direction.
inline std::set<std::string> causal_reach(const Model& m, const StageGraph& g,
                                          const std::vector<Endpoint>& origins) {
  auto key = [&](const StageGraph::Node& n) -> std::string {
    if (std::holds_alternative<JunctionRef>(n))
      return "\x01" + std::to_string(std::get<JunctionRef>(n).id);
    return m.endpoint_str(std::get<Endpoint>(n));
  };
  std::set<std::string> seen;
  std::vector<StageGraph::Node> frontier;
  for (const Endpoint& e : origins)
    if (seen.insert(key(e)).second) frontier.push_back(e);
  while (!frontier.empty()) {
    StageGraph::Node n = frontier.back();
    frontier.pop_back();
    g.for_each_from(n, [&](const StageGraph::Edge& edge) {
      if (seen.insert(key(edge.target)).second) frontier.push_back(edge.target);
    });
  }
  return seen;
}

}  // namespace detail

// Endpoints a token at `origin` could ever visit by flow arcs alone,
// including the origin itself.  Sorted by (machine, stage).
inline std::vector<Endpoint> reachable_stages(const Model& m, Endpoint origin) {
  std::set<Endpoint> seen{origin};
  std::vector<Endpoint> frontier{origin};
  while (!frontier.empty()) {
    Endpoint e = frontier.back();
    frontier.pop_back();
    for (const FlowArc& f : m.flows)
      if (f.source == e && seen.insert(f.target).second) frontier.push_back(f.target);
  }
  return {seen.begin(), seen.end()};
}

// Endpoints no token can ever reach by flow arcs from any token source:
// Create stages, Transfer stages fed from another machine, and Storage
// stages (initial stock enters there).  Storage endpoints themselves are
// never reported.  Sorted by (machine, stage).
inline std::vector<Endpoint> dead_stages(const Model& m) {
  std::set<Endpoint> reached;
  std::vector<Endpoint> frontier;
  auto seed = [&](Endpoint e) {
    if (reached.insert(e).second) frontier.push_back(e);
  };
  for (MachineId mid = 0; mid < m.machines.size(); ++mid) {
    for (StageKind k : m.machines[mid].stages) {
      if (k == StageKind::Create || k == StageKind::Storage) seed({mid, k});
      if (k == StageKind::Transfer) {
        for (const FlowArc& f : m.flows)
          if (f.target == Endpoint{mid, k} && f.source.machine != mid) {
            seed({mid, k});
            break;
          }
      }
    }
  }
  while (!frontier.empty()) {
    Endpoint e = frontier.back();
    frontier.pop_back();
    for (const FlowArc& f : m.flows)
      if (f.source == e) seed(f.target);
  }
  std::vector<Endpoint> dead;
  for (const Endpoint& e : all_endpoints(m))
    if (e.stage != StageKind::Storage && !reached.count(e)) dead.push_back(e);
  return dead;
}

inline std::vector<Diagnostic> validate(const Model& m) {
  std::vector<Diagnostic> out;
  auto err = [&](std::string code, std::string subject, std::string msg, std::uint32_t order) {
    out.push_back({Diagnostic::Severity::Error, std::move(code), std::move(subject),
                   std::move(msg), order});
  };
  auto warn = [&](std::string code, std::string subject, std::string msg, std::uint32_t order) {
    out.push_back({Diagnostic::Severity::Warning, std::move(code), std::move(subject),
                   std::move(msg), order});
  };

  // E006: the sphere tree must be exactly a tree rooted at sphere 0.
  bool tree_ok = true;
  auto tree_bad = [&](SphereId s, std::string msg) {
    tree_ok = false;
    std::string name = s < m.spheres.size() ? m.spheres[s].name : "?";
    err("FM-E006", "sphere " + name, std::move(msg), s);
  };
  if (m.spheres.empty()) {
    tree_bad(0, "model has no root sphere");
  } else {
    if (m.spheres[root_sphere].parent)
      tree_bad(root_sphere, "root sphere must not have a parent");
    for (SphereId s = 1; s < m.spheres.size(); ++s) {
      const Sphere& sp = m.spheres[s];
      if (!sp.parent) {
        tree_bad(s, "sphere has no parent; only the root may be parentless");
        continue;
      }
      if (*sp.parent >= m.spheres.size()) {
        tree_bad(s, "sphere's parent does not exist");
        continue;
      }
      const auto& siblings = m.spheres[*sp.parent].children;
      if (std::find(siblings.begin(), siblings.end(), s) == siblings.end())
        tree_bad(s, "sphere is missing from its parent's child list");
    }
    for (SphereId s = 0; s < m.spheres.size(); ++s) {
      for (SphereId c : m.spheres[s].children) {
        if (c >= m.spheres.size()) {
          tree_bad(s, "child sphere does not exist");
        } else if (!m.spheres[c].parent || *m.spheres[c].parent != s) {
          tree_bad(c, "sphere's parent link disagrees with its parent's child list");
        }
      }
      // Walking up more steps than there are spheres means a cycle.
      SphereId cur = s;
      std::size_t steps = 0;
      while (cur < m.spheres.size() && m.spheres[cur].parent) {
        cur = *m.spheres[cur].parent;
        if (++steps > m.spheres.size()) {
          tree_bad(s, "sphere parent chain forms a cycle");
          break;
        }
      }
    }
  }

  // Per-machine checks.
  for (MachineId mid = 0; mid < m.machines.size(); ++mid) {
    const Machine& mc = m.machines[mid];
    std::string path = tree_ok ? m.machine_path(mid) : mc.name;
    for (std::size_t i = 0; i < mc.stages.size(); ++i)
      for (std::size_t j = i + 1; j < mc.stages.size(); ++j)
        if (mc.stages[i] == mc.stages[j]) {
          err("FM-E001", path,
              "stage " + std::string(stage_name(mc.stages[i])) + " declared more than once", mid);
          j = mc.stages.size();
          i = mc.stages.size();
        }
    if (!mc.subspheres.empty())
      err("FM-E003", path, "a machine cannot contain spheres", mid);
    if (mc.has_stage(StageKind::Receive) &&
        (mc.has_stage(StageKind::Arrive) || mc.has_stage(StageKind::Accept)))
      err("FM-E005", path, "Receive stands for Arrive plus Accept; a machine has one or the other",
          mid);
  }

  // Flow arcs: endpoints must exist (E004), then the pair must be legal
  // (E002).  Cross-machine flow is Transfer to Transfer over one thing.
  for (const FlowArc& f : m.flows) {
    std::string subject = detail::arc_subject(m, f.source, f.target, "->");
    bool src_ok = detail::endpoint_exists(m, f.source);
    bool dst_ok = detail::endpoint_exists(m, f.target);
    if (!src_ok)
      err("FM-E004", subject, "flow source endpoint does not exist", f.index);
    if (!dst_ok)
      err("FM-E004", subject, "flow target endpoint does not exist", f.index);
    if (src_ok && dst_ok) {
      if (auto why = flow_arc_error(m, f.source, f.target))
        err("FM-E002", subject, *why, f.index);
    }
  }

  // Trigger arcs: endpoint-form sources/targets must exist (E004);
  // endpoint targets must be Create or Release (E007); guards may only
  // name attributes of the source machine's thing (E009).
  for (const TriggerArc& t : m.triggers) {
    std::string subject = detail::arc_subject(m, t.source, t.target, "=>");
    bool src_ok = true;
    if (const Endpoint* src = std::get_if<Endpoint>(&t.source)) {
      src_ok = detail::endpoint_exists(m, *src);
      if (!src_ok) err("FM-E004", subject, "trigger source endpoint does not exist", t.index);
    }
    if (const Endpoint* dst = std::get_if<Endpoint>(&t.target)) {
      if (!detail::endpoint_exists(m, *dst)) {
        err("FM-E004", subject, "trigger target endpoint does not exist", t.index);
      } else if (auto why = trigger_target_error(m, *dst)) {
        err("FM-E007", subject, *why, t.index);
      }
    }
    if (t.guard) {
      if (const Endpoint* src = std::get_if<Endpoint>(&t.source); src && src_ok) {
        const ThingKind& kind = m.things[m.machines[src->machine].thing];
        for (const std::string& name : t.guard->attr_names())
          if (!kind.find_attr(name))
            err("FM-E009", subject,
                "guard references unknown attribute '" + name + "' of thing '" + kind.name + "'",
                t.index);
      } else if (!std::holds_alternative<Endpoint>(t.source)) {
        err("FM-E009", subject, "a junction output cannot carry a guard", t.index);
      }
    }
  }

  // E008: a junction synchronizes at least two triggers.
  for (JunctionId j = 0; j < m.junctions.size(); ++j)
    if (m.junctions[j].inputs.size() < 2)
      err("FM-E008", "junction " + m.junctions[j].name,
          "junction has " + std::to_string(m.junctions[j].inputs.size()) +
              " trigger input(s); at least 2 required",
          j);

  // Warnings only make sense on a structurally sound model.
  if (!any_errors(out) && tree_ok) {
    StageGraph g = stage_graph(m);
    std::vector<Endpoint> origins;
    for (MachineId mid = 0; mid < m.machines.size(); ++mid)
      for (StageKind k : m.machines[mid].stages) {
        Endpoint e{mid, k};
        bool origin = k == StageKind::Create || k == StageKind::Storage;
        if (k == StageKind::Transfer)
          for (const FlowArc& f : m.flows)
            if (f.target == e && f.source.machine != mid) origin = true;
        if (origin) origins.push_back(e);
      }
    std::set<std::string> reach = detail::causal_reach(m, g, origins);

    for (MachineId mid = 0; mid < m.machines.size(); ++mid) {
      for (StageKind k : m.machines[mid].stages) {
        Endpoint e{mid, k};
        std::uint32_t order = mid * 16 + std::uint32_t(k);
        if (k == StageKind::Storage) {
          bool drains = false;
          for (const FlowArc& f : m.flows)
            if (f.source == e) drains = true;
          // A trigger into this machine's Release can pull from storage.
          if (m.machines[mid].has_stage(StageKind::Release)) {
            Endpoint rel{mid, StageKind::Release};
            for (const TriggerArc& t : m.triggers)
              if (const Endpoint* dst = std::get_if<Endpoint>(&t.target); dst && *dst == rel)
                drains = true;
          }
          if (!drains)
            warn("FM-W002", m.endpoint_str(e), "storage can take tokens in but never out", order);
          continue;
        }
        bool incident = false;
        for (const FlowArc& f : m.flows)
          if (f.source == e || f.target == e) incident = true;
        for (const TriggerArc& t : m.triggers) {
          if (const Endpoint* s = std::get_if<Endpoint>(&t.source); s && *s == e) incident = true;
          if (const Endpoint* d = std::get_if<Endpoint>(&t.target); d && *d == e) incident = true;
        }
        if (!incident || !reach.count(m.endpoint_str(e)))
          warn("FM-W001", m.endpoint_str(e), "no token can ever act at this stage", order);
      }
    }
  }

  std::stable_sort(out.begin(), out.end(), [](const Diagnostic& a, const Diagnostic& b) {
    if (a.severity != b.severity) return a.severity < b.severity;
    if (a.code != b.code) return a.code < b.code;
    return a.order < b.order;
  });
  return out;
}

}  // namespace flowkit
