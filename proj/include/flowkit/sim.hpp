#pragma once

// Deterministic token-flow simulation.
//
// A scenario places initial tokens and supplies the knobs a model leaves
// open (symbol bindings, deadlines, acceptance rules, tick budget).  The
// simulator then advances in whole ticks; each tick emits a batch of trace
// records describing everything that happened.  Identical model + scenario
// always yields byte-identical traces: token ids are assigned in order,
// arcs act in declaration order, and every container iterates in a fixed
// order.
//
// Each tick runs four phases:
//   1. flows      every live token takes its lowest-numbered enabled flow
//                 arc (at most one move per token per tick)
//   2. acceptance tokens that just reached an Accept stage pass or are
//                 rejected against the scenario's acceptance rules
//   3. triggers   a trigger arc fires when its source stage saw activity
//                 on the previous tick and the guard passes; it mints at a
//                 Create, pulls a token to a Release, or latches a junction
//   4. junctions  a junction with all inputs latched fires once and clears
//
// Trigger arcs never carry tokens.  A Transfer stage routes by provenance:
// a token that arrived over a cross-machine arc continues on arcs inside
// the machine, and one that arrived from inside continues on cross-machine
// arcs, so chains like Release -> Transfer -> Transfer -> Receive read the
// way they are drawn.

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "flowkit/core.hpp"

namespace flowkit {

class SimError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Attribute values are symbols or integers.
using AttrValue = std::variant<long long, std::string>;

inline bool attr_fits(const AttrDomain& d, const AttrValue& v) {
  if (d.kind == AttrDomain::Kind::Integer) return std::holds_alternative<long long>(v);
  if (!std::holds_alternative<std::string>(v)) return false;
  const std::string& s = std::get<std::string>(v);
  return std::find(d.symbols.begin(), d.symbols.end(), s) != d.symbols.end();
}

inline AttrValue attr_default(const AttrDomain& d) {
  if (d.kind == AttrDomain::Kind::Integer) return AttrValue{0LL};
  return AttrValue{d.symbols.front()};
}

// ---------------------------------------------------------------------------
// Trace records

struct TraceRecord {
  std::uint32_t tick = 0;
  std::string machine;  // dotted path
  std::string stage;
  std::optional<std::uint32_t> token;
  std::string action;  // created|moved|stored|accepted|rejected|triggered|junction-fired

  friend bool operator==(const TraceRecord&, const TraceRecord&) = default;
};

struct SimTrace {
  std::vector<TraceRecord> records;
  std::uint32_t last_tick = 0;
  bool truncated = false;
};

// Actions that place a token somewhere.  Per tick a token appears at no
// more than one endpoint across these; "triggered" and "rejected" describe
// a token without placing it.
inline bool location_action(std::string_view a) {
  return a == "created" || a == "moved" || a == "accepted" || a == "stored" ||
         a == "junction-fired";
}

// Actions that count as activity for arming a trigger on the next tick.
// Trigger firings themselves do not, which is what stops a trigger from
// re-arming off its own record forever.
inline bool activity_action(std::string_view a) {
  return a == "created" || a == "moved" || a == "accepted" || a == "stored";
}

// ---------------------------------------------------------------------------
// Scenario

struct Scenario {
  struct InitialToken {
    std::string machine;  // dotted path, no stage
    std::string stage;
    std::string kind;
    std::map<std::string, AttrValue> attributes;
  };
  struct AcceptRule {
    std::string attribute;
    AttrValue equals;
  };

  std::vector<InitialToken> initial_tokens;
  std::map<std::string, AttrValue> bindings;
  std::map<std::string, std::uint32_t> deadlines;
  std::uint32_t max_ticks = 1000;
  std::map<std::string, AcceptRule> accept_policy;  // keyed by machine path
};

namespace detail {

inline AttrValue attr_from_json(const nlohmann::json& j, const std::string& where) {
  if (j.is_string()) return AttrValue{j.get<std::string>()};
  if (j.is_number_integer()) return AttrValue{j.get<long long>()};
  throw SimError(where + ": attribute values must be symbols or integers");
}

}  // namespace detail

inline Scenario scenario_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw SimError("scenario must be a JSON object");
  static const std::set<std::string> known{"initial_tokens", "bindings", "deadlines",
                                           "max_ticks", "accept_policy"};
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!known.count(it.key())) throw SimError("unknown scenario field '" + it.key() + "'");

  Scenario sc;
  if (j.contains("initial_tokens")) {
    if (!j["initial_tokens"].is_array()) throw SimError("initial_tokens must be an array");
    for (const auto& tj : j["initial_tokens"]) {
      Scenario::InitialToken t;
      if (!tj.is_object() || !tj.contains("machine") || !tj.contains("stage") ||
          !tj.contains("kind"))
        throw SimError("each initial token needs machine, stage, and kind");
      t.machine = tj["machine"].get<std::string>();
      t.stage = tj["stage"].get<std::string>();
      t.kind = tj["kind"].get<std::string>();
      if (tj.contains("attributes")) {
        for (auto it = tj["attributes"].begin(); it != tj["attributes"].end(); ++it)
          t.attributes[it.key()] = detail::attr_from_json(*it, "initial token");
      }
      sc.initial_tokens.push_back(std::move(t));
    }
  }
  if (j.contains("bindings"))
    for (auto it = j["bindings"].begin(); it != j["bindings"].end(); ++it)
      sc.bindings[it.key()] = detail::attr_from_json(*it, "binding '" + it.key() + "'");
  if (j.contains("deadlines"))
    for (auto it = j["deadlines"].begin(); it != j["deadlines"].end(); ++it) {
      if (!it->is_number_integer() || it->get<long long>() < 0)
        throw SimError("deadline '" + it.key() + "' must be a non-negative tick");
      sc.deadlines[it.key()] = it->get<std::uint32_t>();
    }
  if (j.contains("max_ticks")) {
    if (!j["max_ticks"].is_number_integer() || j["max_ticks"].get<long long>() < 1)
      throw SimError("max_ticks must be at least 1");
    sc.max_ticks = j["max_ticks"].get<std::uint32_t>();
  }
  if (j.contains("accept_policy")) {
    for (auto it = j["accept_policy"].begin(); it != j["accept_policy"].end(); ++it) {
      const auto& rj = *it;
      if (!rj.is_object() || !rj.contains("attribute") || !rj.contains("equals"))
        throw SimError("accept_policy entries need attribute and equals");
      Scenario::AcceptRule r;
      r.attribute = rj["attribute"].get<std::string>();
      r.equals = detail::attr_from_json(rj["equals"], "accept_policy");
      sc.accept_policy[it.key()] = std::move(r);
    }
  }
  return sc;
}

// ---------------------------------------------------------------------------
// Simulator

struct SimToken {
  std::uint32_t id = 0;
  ThingId kind = 0;
  std::map<std::string, AttrValue> attributes;
  Endpoint at{};
  bool rejected = false;
  // How the token last moved; steers arc choice at Transfer stages.
  enum class Came : std::uint8_t { Nowhere, Intra, Cross } came = Came::Nowhere;

  bool live() const { return !rejected; }
};

class Simulator {
 public:
  Simulator(const Model& model, Scenario scenario)
      : model_(model), sc_(std::move(scenario)) {
    if (sc_.max_ticks < 1) throw SimError("max_ticks must be at least 1");
    check_deadlines();
    check_policy();
    check_initial_tokens();
  }

  std::uint32_t tick() const { return tick_; }
  const std::vector<SimToken>& tokens() const { return tokens_; }

  // Places the scenario's initial tokens; the tick-0 batch.
  std::vector<TraceRecord> init() {
    std::vector<TraceRecord> batch;
    for (const auto& spec : sc_.initial_tokens) {
      MachineId mid = *model_.resolve_machine(spec.machine);
      const ThingKind& kind = model_.things[model_.machines[mid].thing];
      SimToken t;
      t.id = next_id_++;
      t.kind = model_.machines[mid].thing;
      t.at = Endpoint{mid, *stage_from_name(spec.stage)};
      for (const ThingAttr& a : kind.attributes) {
        auto it = spec.attributes.find(a.name);
        t.attributes[a.name] = it != spec.attributes.end() ? it->second : attr_default(a.domain);
      }
      batch.push_back({0, model_.machine_path(mid), spec.stage, t.id, "created"});
      tokens_.push_back(std::move(t));
    }
    tick_ = 0;
    last_batch_ = batch;
    return batch;
  }

  // Advances one tick.  An empty batch means the run has quiesced: nothing
  // moved and nothing fired, and with no fresh activity nothing ever will.
  std::vector<TraceRecord> step() {
    const std::uint32_t now = tick_ + 1;
    std::vector<TraceRecord> batch;
    std::set<std::uint32_t> located;  // tokens already placed this tick

    // Phase 1: all move decisions are taken from pre-step positions, then
    // applied together.
    struct Move {
      std::size_t arc_pos;  // position in model_.flows, not the global arc index
      std::uint32_t token;
    };
    std::vector<Move> moves;
    for (const SimToken& t : tokens_) {
      if (!t.live()) continue;
      std::optional<std::size_t> chosen;
      for (std::size_t pos = 0; pos < model_.flows.size(); ++pos) {
        const FlowArc& f = model_.flows[pos];
        if (f.source != t.at) continue;
        if (t.at.stage == StageKind::Transfer && t.came != SimToken::Came::Nowhere) {
          bool cross = f.target.machine != t.at.machine;
          if (t.came == SimToken::Came::Cross && cross) continue;
          if (t.came == SimToken::Came::Intra && !cross) continue;
        }
        if (!chosen || f.index < model_.flows[*chosen].index) chosen = pos;
      }
      if (chosen) moves.push_back({*chosen, t.id});
    }
    std::sort(moves.begin(), moves.end(), [this](const Move& a, const Move& b) {
      ArcId ai = model_.flows[a.arc_pos].index, bi = model_.flows[b.arc_pos].index;
      return ai != bi ? ai < bi : a.token < b.token;
    });
    std::vector<std::uint32_t> entered_accept;
    for (const Move& mv : moves) {
      const FlowArc& f = model_.flows[mv.arc_pos];
      SimToken& t = tokens_[mv.token];
      bool cross = f.target.machine != f.source.machine;
      t.at = f.target;
      t.came = cross ? SimToken::Came::Cross : SimToken::Came::Intra;
      located.insert(t.id);
      if (f.target.stage == StageKind::Accept) {
        entered_accept.push_back(t.id);  // record decided in phase 2
      } else {
        const char* action = f.target.stage == StageKind::Storage ? "stored" : "moved";
        batch.push_back({now, model_.machine_path(f.target.machine),
                         std::string(stage_name(f.target.stage)), t.id, action});
      }
    }

    // Phase 2: acceptance.  One record per arrival: accepted, or rejected
    // (rejection is absorbing; the token never acts again).
    for (std::uint32_t id : entered_accept) {
      SimToken& t = tokens_[id];
      std::string mpath = model_.machine_path(t.at.machine);
      bool pass = true;
      auto rule = sc_.accept_policy.find(mpath);
      if (rule != sc_.accept_policy.end()) {
        auto attr = t.attributes.find(rule->second.attribute);
        pass = attr != t.attributes.end() && attr->second == rule->second.equals;
      }
      if (!pass) {
        t.rejected = true;
        located.erase(id);
      }
      batch.push_back({now, mpath, std::string(stage_name(StageKind::Accept)), id,
                       pass ? "accepted" : "rejected"});
    }

    // Phase 3: triggers fire off the previous tick's activity at their
    // source stage, at most once per arc per tick.
    for (const TriggerArc& tr : model_.triggers) {
      const Endpoint* src = std::get_if<Endpoint>(&tr.source);
      if (!src) continue;  // junction outputs fire in phase 4
      std::string src_machine = model_.machine_path(src->machine);
      std::string src_stage(stage_name(src->stage));
      std::optional<std::uint32_t> armed_by;
      for (const TraceRecord& r : last_batch_) {
        if (r.machine != src_machine || r.stage != src_stage) continue;
        if (!activity_action(r.action) || !r.token) continue;
        if (tr.guard && !eval_guard(*tr.guard, tokens_[*r.token].attributes, now)) continue;
        armed_by = r.token;
        break;
      }
      if (!armed_by) continue;

      if (const JunctionRef* jr = std::get_if<JunctionRef>(&tr.target)) {
        latches_[jr->id].insert(tr.index);
        batch.push_back({now, src_machine, src_stage, armed_by, "triggered"});
        continue;
      }
      const Endpoint& dst = std::get<Endpoint>(tr.target);
      if (dst.stage == StageKind::Create) {
        batch.push_back({now, src_machine, src_stage, armed_by, "triggered"});
        auto inherited = tokens_[*armed_by].attributes;  // mint() may grow tokens_
        std::uint32_t id = mint(dst.machine, &inherited);
        located.insert(id);
        batch.push_back({now, model_.machine_path(dst.machine),
                         std::string(stage_name(StageKind::Create)), id, "created"});
      } else {  // Release: pull the oldest idle token forward; no token, no fire
        auto pick = releasable(dst.machine, located);
        if (!pick) continue;
        batch.push_back({now, src_machine, src_stage, armed_by, "triggered"});
        SimToken& t = tokens_[*pick];
        t.at = dst;
        t.came = SimToken::Came::Intra;
        located.insert(t.id);
        batch.push_back({now, model_.machine_path(dst.machine),
                         std::string(stage_name(StageKind::Release)), t.id, "moved"});
      }
    }

    // Phase 4: junctions with every input latched fire once and clear.
    for (JunctionId j = 0; j < model_.junctions.size(); ++j) {
      const Junction& jn = model_.junctions[j];
      if (jn.inputs.empty() || latches_[j].size() != jn.inputs.size()) continue;
      latches_[j].clear();
      const TriggerArc* out = nullptr;
      for (const TriggerArc& tr : model_.triggers)
        if (tr.index == jn.output) out = &tr;
      const Endpoint& dst = std::get<Endpoint>(out->target);
      std::string dmachine = model_.machine_path(dst.machine);
      std::string dstage(stage_name(dst.stage));
      if (dst.stage == StageKind::Create) {
        std::uint32_t id = mint(dst.machine, nullptr);
        located.insert(id);
        batch.push_back({now, dmachine, dstage, id, "junction-fired"});
        batch.push_back({now, dmachine, dstage, id, "created"});
      } else {
        auto pick = releasable(dst.machine, located);
        batch.push_back({now, dmachine, dstage, pick, "junction-fired"});
        if (pick) {
          SimToken& t = tokens_[*pick];
          t.at = dst;
          t.came = SimToken::Came::Intra;
          located.insert(t.id);
          batch.push_back({now, dmachine, dstage, t.id, "moved"});
        }
      }
    }

    if (!batch.empty()) {
      tick_ = now;
      last_batch_ = batch;
    }
    return batch;
  }

  // init() plus step() until quiescence or the tick budget runs out.
  SimTrace run() {
    SimTrace trace;
    auto first = init();
    trace.records.insert(trace.records.end(), first.begin(), first.end());
    while (true) {
      if (tick_ >= sc_.max_ticks) {
        trace.truncated = true;
        break;
      }
      auto batch = step();
      if (batch.empty()) break;
      trace.records.insert(trace.records.end(), batch.begin(), batch.end());
    }
    trace.last_tick = tick_;
    return trace;
  }

  static bool eval_guard(const Guard& g, const std::map<std::string, AttrValue>& attrs,
                         std::uint32_t now, const std::map<std::string, std::uint32_t>& deadlines) {
    return eval_node(g, g.root, attrs, now, deadlines);
  }

 private:
  bool eval_guard(const Guard& g, const std::map<std::string, AttrValue>& attrs,
                  std::uint32_t now) const {
    return eval_node(g, g.root, attrs, now, sc_.deadlines);
  }

  static bool eval_node(const Guard& g, std::uint32_t at,
                        const std::map<std::string, AttrValue>& attrs, std::uint32_t now,
                        const std::map<std::string, std::uint32_t>& deadlines) {
    const GuardNode& n = g.nodes[at];
    switch (n.op) {
      case GuardNode::Op::AttrEq: {
        auto it = attrs.find(n.name);
        if (it == attrs.end()) return false;
        if (n.numeric) return it->second == AttrValue{n.number};
        return it->second == AttrValue{n.symbol};
      }
      case GuardNode::Op::ClockLe: {
        auto it = deadlines.find(n.name);
        return it != deadlines.end() && now <= it->second;
      }
      case GuardNode::Op::Not:
        return !eval_node(g, n.lhs, attrs, now, deadlines);
      case GuardNode::Op::And:
        return eval_node(g, n.lhs, attrs, now, deadlines) &&
               eval_node(g, n.rhs, attrs, now, deadlines);
      case GuardNode::Op::Or:
        return eval_node(g, n.lhs, attrs, now, deadlines) ||
               eval_node(g, n.rhs, attrs, now, deadlines);
    }
    return false;
  }

  // Mint a fresh token at a machine's Create stage.  Attribute values come
  // from the arming token when the name and domain line up, then from
  // scenario bindings, then from the domain default (first symbol, or 0).
  std::uint32_t mint(MachineId machine, const std::map<std::string, AttrValue>* inherit) {
    const ThingKind& kind = model_.things[model_.machines[machine].thing];
    SimToken t;
    t.id = next_id_++;
    t.kind = model_.machines[machine].thing;
    t.at = Endpoint{machine, StageKind::Create};
    for (const ThingAttr& a : kind.attributes) {
      AttrValue v = attr_default(a.domain);
      auto b = sc_.bindings.find(a.name);
      if (b != sc_.bindings.end() && attr_fits(a.domain, b->second)) v = b->second;
      if (inherit) {
        auto it = inherit->find(a.name);
        if (it != inherit->end() && attr_fits(a.domain, it->second)) v = it->second;
      }
      t.attributes[a.name] = v;
    }
    tokens_.push_back(t);
    return t.id;
  }

  // Oldest live token in this machine sitting at a stage that may feed
  // Release, and not already placed this tick.
  std::optional<std::uint32_t> releasable(MachineId machine,
                                          const std::set<std::uint32_t>& located) const {
    for (const SimToken& t : tokens_) {
      if (!t.live() || t.at.machine != machine) continue;
      if (!pre_release_stage(t.at.stage)) continue;
      if (located.count(t.id)) continue;
      return t.id;
    }
    return std::nullopt;
  }

  void check_deadlines() const {
    for (const TriggerArc& t : model_.triggers) {
      if (!t.guard) continue;
      for (const std::string& name : t.guard->deadline_names())
        if (!sc_.deadlines.count(name))
          throw SimError("guard deadline '" + name + "' is not set by the scenario");
    }
  }

  void check_policy() const {
    for (const auto& [mpath, rule] : sc_.accept_policy) {
      auto mid = model_.resolve_machine(mpath);
      if (!mid) throw SimError("accept_policy names unknown machine '" + mpath + "'");
      const ThingKind& kind = model_.things[model_.machines[*mid].thing];
      const ThingAttr* attr = kind.find_attr(rule.attribute);
      if (!attr)
        throw SimError("accept_policy for '" + mpath + "' names unknown attribute '" +
                       rule.attribute + "'");
      if (!attr_fits(attr->domain, rule.equals))
        throw SimError("accept_policy for '" + mpath + "' compares '" + rule.attribute +
                       "' against a value outside its domain");
    }
  }

  void check_initial_tokens() const {
    for (const auto& spec : sc_.initial_tokens) {
      auto mid = model_.resolve_machine(spec.machine);
      if (!mid) throw SimError("initial token names unknown machine '" + spec.machine + "'");
      auto stage = stage_from_name(spec.stage);
      if (!stage || !model_.machines[*mid].has_stage(*stage))
        throw SimError("machine '" + spec.machine + "' has no stage '" + spec.stage + "'");
      auto kind = model_.find_thing(spec.kind);
      if (!kind) throw SimError("initial token names unknown thing '" + spec.kind + "'");
      if (*model_.thing_id(spec.kind) != model_.machines[*mid].thing)
        throw SimError("machine '" + spec.machine + "' handles '" +
                       model_.things[model_.machines[*mid].thing].name + "', not '" + spec.kind +
                       "'");
      for (const auto& [name, value] : spec.attributes) {
        const ThingAttr* attr = kind->find_attr(name);
        if (!attr)
          throw SimError("thing '" + spec.kind + "' has no attribute '" + name + "'");
        if (!attr_fits(attr->domain, value))
          throw SimError("initial token value for '" + name + "' is outside its domain");
      }
    }
  }

  const Model& model_;
  Scenario sc_;
  std::vector<SimToken> tokens_;
  std::map<JunctionId, std::set<ArcId>> latches_;
  std::vector<TraceRecord> last_batch_;
  std::uint32_t tick_ = 0;
  std::uint32_t next_id_ = 0;
};

inline SimTrace run_scenario(const Model& model, Scenario scenario) {
  return Simulator(model, std::move(scenario)).run();
}

// ---------------------------------------------------------------------------
// Trace serialization: one JSON object per line, fixed key order.  A
// truncated run ends with a marker line whose action is "truncated".

inline std::string trace_to_jsonl(const SimTrace& trace) {
  std::string out;
  auto line = [&](const TraceRecord& r) {
    nlohmann::ordered_json j;
    j["tick"] = r.tick;
    j["machine"] = r.machine;
    j["stage"] = r.stage;
    if (r.token)
      j["token"] = *r.token;
    else
      j["token"] = nullptr;
    j["action"] = r.action;
    out += j.dump();
    out += '\n';
  };
  for (const TraceRecord& r : trace.records) line(r);
  if (trace.truncated) line({trace.last_tick, "", "", std::nullopt, "truncated"});
  return out;
}

inline SimTrace trace_from_jsonl(std::string_view text) {
  SimTrace trace;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    if (line.empty() || line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    TraceRecord r;
    try {
      nlohmann::json j = nlohmann::json::parse(line);
      if (!j.is_object() || !j.contains("tick") || !j.contains("action"))
        throw SimError("missing tick or action");
      r.tick = j["tick"].get<std::uint32_t>();
      r.action = j["action"].get<std::string>();
      r.machine = j.value("machine", std::string());
      r.stage = j.value("stage", std::string());
      if (j.contains("token") && !j["token"].is_null()) r.token = j["token"].get<std::uint32_t>();
    } catch (const nlohmann::json::exception& e) {
      throw SimError(std::string("bad trace line: ") + e.what());
    }
    trace.last_tick = std::max(trace.last_tick, r.tick);
    if (r.action == "truncated") {
      trace.truncated = true;
      continue;
    }
    trace.records.push_back(std::move(r));
  }
  return trace;
}

// ---------------------------------------------------------------------------
// Event extraction
//
// An event is a maximal run of consecutive ticks during which one machine
// has trace records.  Events are causally linked through their records:
// a token carries causality between its consecutive records, a trigger
// record causes the mint/move it produced, and the latest firing on each
// junction input causes the junction's output.  An event depends on
// another only through records at its own starting tick (what activated
// it), which keeps the relation acyclic even for looping models.

struct Event {
  std::string machine;
  std::uint32_t start = 0;
  std::uint32_t end = 0;
  std::vector<std::size_t> records;  // indices into the trace
};

struct Process {
  std::vector<Event> events;
  std::vector<std::pair<std::size_t, std::size_t>> links;  // (from, to) event indices

  std::optional<std::size_t> first_event_of(std::string_view machine) const {
    for (std::size_t i = 0; i < events.size(); ++i)
      if (events[i].machine == machine) return i;
    return std::nullopt;
  }

  // Strict transitive causal order.
  bool precedes(std::size_t a, std::size_t b) const {
    std::vector<std::size_t> frontier{a};
    std::set<std::size_t> seen{a};
    while (!frontier.empty()) {
      std::size_t cur = frontier.back();
      frontier.pop_back();
      for (const auto& [from, to] : links)
        if (from == cur && seen.insert(to).second) {
          if (to == b) return true;
          frontier.push_back(to);
        }
    }
    return false;
  }
};

inline Process extract_events(const Model& model, const SimTrace& trace) {
  Process p;

  // Group records by machine, then split each group at tick gaps.
  std::map<std::string, std::vector<std::size_t>> by_machine;
  for (std::size_t i = 0; i < trace.records.size(); ++i)
    by_machine[trace.records[i].machine].push_back(i);
  for (const auto& [machine, idxs] : by_machine) {
    Event ev;
    ev.machine = machine;
    for (std::size_t i : idxs) {
      std::uint32_t t = trace.records[i].tick;
      if (!ev.records.empty() && t > ev.end + 1) {
        p.events.push_back(ev);
        ev.records.clear();
      }
      if (ev.records.empty()) ev.start = t;
      ev.end = t;
      ev.records.push_back(i);
    }
    if (!ev.records.empty()) p.events.push_back(ev);
  }
  std::sort(p.events.begin(), p.events.end(),
            [](const Event& a, const Event& b) { return a.records.front() < b.records.front(); });

  std::vector<std::size_t> event_of(trace.records.size());
  for (std::size_t e = 0; e < p.events.size(); ++e)
    for (std::size_t i : p.events[e].records) event_of[i] = e;

  // Record-level causality.
  std::vector<std::pair<std::size_t, std::size_t>> rlinks;

  std::map<std::uint32_t, std::size_t> last_of_token;
  for (std::size_t i = 0; i < trace.records.size(); ++i) {
    const TraceRecord& r = trace.records[i];
    if (!r.token) continue;
    auto it = last_of_token.find(*r.token);
    if (it != last_of_token.end()) rlinks.emplace_back(it->second, i);
    last_of_token[*r.token] = i;
  }

  // A firing record is immediately followed by its effect; confirm the pair
  // against the model's trigger arcs before linking.
  auto arc_matches = [&](const TraceRecord& from, const TraceRecord& to) {
    for (const TriggerArc& t : model.triggers) {
      const Endpoint* src = std::get_if<Endpoint>(&t.source);
      const Endpoint* dst = std::get_if<Endpoint>(&t.target);
      if (!src || !dst) continue;
      if (model.machine_path(src->machine) != from.machine ||
          stage_name(src->stage) != from.stage)
        continue;
      if (model.machine_path(dst->machine) == to.machine && stage_name(dst->stage) == to.stage)
        return true;
    }
    return false;
  };
  for (std::size_t i = 0; i + 1 < trace.records.size(); ++i) {
    const TraceRecord& r = trace.records[i];
    const TraceRecord& next = trace.records[i + 1];
    if (r.action != "triggered" || next.tick != r.tick) continue;
    if (next.action != "created" && next.action != "moved") continue;
    if (arc_matches(r, next)) rlinks.emplace_back(i, i + 1);
  }

  // Junction output: link the latest firing on each input arc.
  for (std::size_t i = 0; i < trace.records.size(); ++i) {
    const TraceRecord& r = trace.records[i];
    if (r.action != "junction-fired") continue;
    for (const Junction& jn : model.junctions) {
      const TriggerArc* out = nullptr;
      for (const TriggerArc& t : model.triggers)
        if (t.index == jn.output) out = &t;
      if (!out) continue;
      const Endpoint& dst = std::get<Endpoint>(out->target);
      if (model.machine_path(dst.machine) != r.machine || stage_name(dst.stage) != r.stage)
        continue;
      for (ArcId input : jn.inputs) {
        const TriggerArc* in = nullptr;
        for (const TriggerArc& t : model.triggers)
          if (t.index == input) in = &t;
        if (!in) continue;
        const Endpoint* src = std::get_if<Endpoint>(&in->source);
        if (!src) continue;
        std::string smachine = model.machine_path(src->machine);
        std::string sstage(stage_name(src->stage));
        for (std::size_t k = i; k-- > 0;) {
          const TraceRecord& cand = trace.records[k];
          if (cand.action == "triggered" && cand.machine == smachine && cand.stage == sstage) {
            rlinks.emplace_back(k, i);
            break;
          }
        }
      }
      break;
    }
  }

  // Lift to events: only links into a record at the target event's first
  // tick establish causal order; anything later is internal progress.
  std::set<std::pair<std::size_t, std::size_t>> elinks;
  for (const auto& [from, to] : rlinks) {
    std::size_t ef = event_of[from];
    std::size_t et = event_of[to];
    if (ef == et) continue;
    if (trace.records[to].tick != p.events[et].start) continue;
    elinks.insert({ef, et});
  }
  p.links.assign(elinks.begin(), elinks.end());
  return p;
}

inline nlohmann::ordered_json events_to_json(const Process& p) {
  nlohmann::ordered_json out;
  out["events"] = nlohmann::ordered_json::array();
  for (const Event& e : p.events) {
    nlohmann::ordered_json ej;
    ej["machine"] = e.machine;
    ej["start"] = e.start;
    ej["end"] = e.end;
    ej["records"] = e.records.size();
    out["events"].push_back(std::move(ej));
  }
  out["links"] = nlohmann::ordered_json::array();
  for (const auto& [from, to] : p.links)
    out["links"].push_back(nlohmann::ordered_json::array({from, to}));
  return out;
}

}  // namespace flowkit
