#pragma once

// Shared helpers for the test suite: corpus access, scenario loading, and a
// couple of small models assembled in one place so individual tests stay
// short.

#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "flowkit/core.hpp"
#include "flowkit/corpus.hpp"
#include "flowkit/dsl.hpp"
#include "flowkit/sim.hpp"

#ifndef FLOWKIT_CORPUS_DIR
#error "FLOWKIT_CORPUS_DIR must point at the corpus directory"
#endif

namespace testsup {

inline std::string corpus_dir() { return FLOWKIT_CORPUS_DIR; }

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Parses a bundled model and asserts success the hard way; tests that expect
// diagnostics call flowkit::parse directly.
inline flowkit::Model corpus_model(const std::string& name) {
  const flowkit::CorpusModel* cm = flowkit::corpus_find(name);
  if (!cm) throw std::runtime_error("no corpus model " + name);
  flowkit::ParseResult pr = flowkit::parse(cm->text);
  if (!pr.model) throw std::runtime_error(name + " failed to parse");
  return std::move(*pr.model);
}

inline flowkit::Scenario corpus_scenario(const std::string& name) {
  for (const auto& s : flowkit::corpus_scenarios())
    if (s.name == name)
      return flowkit::scenario_from_json(nlohmann::json::parse(std::string(s.text)));
  throw std::runtime_error("no corpus scenario " + name);
}

// Every bundled scenario paired with its model, for corpus-wide sweeps.
struct NamedRun {
  std::string scenario;
  std::string model;
};

inline std::vector<NamedRun> all_runs() {
  std::vector<NamedRun> out;
  for (const auto& s : flowkit::corpus_scenarios())
    out.push_back(NamedRun{std::string(s.name), std::string(s.model)});
  return out;
}

// A two-machine pipeline exercising cross-machine transfer, acceptance, and
// storage:
//   Source: Create -> Release -> Transfer
//   Sink:   Transfer -> Arrive -> Accept -> Process -> Storage
inline flowkit::Model pipeline_model() {
  using namespace flowkit;
  ModelBuilder b;
  b.add_thing("item", {{"grade", AttrDomain{AttrDomain::Kind::Symbols, {"good", "bad"}}}});
  b.add_sphere({}, "Source");
  b.add_sphere({}, "Sink");
  b.add_machine({"Source"}, "Out", "item",
                {StageKind::Create, StageKind::Release, StageKind::Transfer});
  b.add_machine({"Sink"}, "In", "item",
                {StageKind::Transfer, StageKind::Arrive, StageKind::Accept,
                 StageKind::Process, StageKind::Storage});
  b.add_flow_arc("Source.Out.Create", "Source.Out.Release");
  b.add_flow_arc("Source.Out.Release", "Source.Out.Transfer");
  b.add_flow_arc("Source.Out.Transfer", "Sink.In.Transfer");
  b.add_flow_arc("Sink.In.Transfer", "Sink.In.Arrive");
  b.add_flow_arc("Sink.In.Arrive", "Sink.In.Accept");
  b.add_flow_arc("Sink.In.Accept", "Sink.In.Process");
  b.add_flow_arc("Sink.In.Process", "Sink.In.Storage");
  return b.finish();
}

inline flowkit::Scenario pipeline_scenario() {
  flowkit::Scenario sc;
  sc.initial_tokens.push_back({"Source.Out", "Create", "item", {}});
  sc.max_ticks = 50;
  return sc;
}

// Two producers that must both report before a junction mints a result:
//   A: Create -> Process        trigger A.Process => junction J
//   B: Create -> Process        trigger B.Process => junction J
//   J => R.Create               R: Create -> Process
inline flowkit::Model junction_model() {
  using namespace flowkit;
  ModelBuilder b;
  b.add_thing("msg");
  b.add_thing("result");
  b.add_sphere({}, "S");
  b.add_machine({"S"}, "A", "msg", {StageKind::Create, StageKind::Process});
  b.add_machine({"S"}, "B", "msg", {StageKind::Create, StageKind::Process});
  b.add_machine({"S"}, "R", "result", {StageKind::Create, StageKind::Process});
  b.add_flow_arc("S.A.Create", "S.A.Process");
  b.add_flow_arc("S.B.Create", "S.B.Process");
  b.add_flow_arc("S.R.Create", "S.R.Process");
  JunctionId j = b.add_junction("Both", "S.R.Create");
  b.add_trigger_arc(b.endpoint("S.A.Process"), j);
  b.add_trigger_arc(b.endpoint("S.B.Process"), j);
  return b.finish();
}

inline std::string jsonl(const flowkit::Model& m, const flowkit::Scenario& sc) {
  return flowkit::trace_to_jsonl(flowkit::run_scenario(m, sc));
}

// Live-token conservation and at-most-one-place-per-tick, checked by
// stepping the simulator and comparing its token table against the records
// it emitted.  Used by both the unit tests and the acceptance gate.
struct TraceAudit {
  bool conserved = true;
  bool exclusive = true;
  std::string detail;
};

inline TraceAudit audit_run(const flowkit::Model& m, const flowkit::Scenario& sc) {
  using namespace flowkit;
  TraceAudit audit;
  Simulator sim(m, sc);
  auto live_count = [&sim]() {
    std::size_t n = 0;
    for (const auto& t : sim.tokens())
      if (t.live()) ++n;
    return n;
  };
  auto check_batch = [&](const std::vector<TraceRecord>& batch, std::size_t before,
                         std::size_t after) {
    long long created = 0, rejected = 0;
    std::map<std::pair<std::uint64_t, std::uint32_t>, std::set<std::string>> places;
    for (const auto& r : batch) {
      if (r.action == "created") ++created;
      if (r.action == "rejected") ++rejected;
      if (location_action(r.action) && r.token)
        places[{r.tick, *r.token}].insert(r.machine + "." + r.stage);
    }
    // Rejection is the only sink; everything else just stops moving.
    long long delta = static_cast<long long>(after) - static_cast<long long>(before);
    if (delta != created - rejected) {
      audit.conserved = false;
      audit.detail = "delta " + std::to_string(delta) + " != created " +
                     std::to_string(created) + " - rejected " + std::to_string(rejected);
    }
    for (const auto& [key, eps] : places)
      if (eps.size() > 1) {
        audit.exclusive = false;
        audit.detail = "token " + std::to_string(key.second) + " at " +
                       std::to_string(eps.size()) + " places on tick " +
                       std::to_string(key.first);
      }
  };
  std::size_t before = live_count();
  std::vector<TraceRecord> batch = sim.init();
  check_batch(batch, before, live_count());
  for (int i = 0; i < 2000; ++i) {
    before = live_count();
    batch = sim.step();
    check_batch(batch, before, live_count());
    if (batch.empty()) break;
  }
  return audit;
}

}  // namespace testsup
