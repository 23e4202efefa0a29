#include <catch2/catch_amalgamated.hpp>

#include <set>
#include <string>
#include <vector>

#include "flowkit/sim.hpp"
#include "support.hpp"

using namespace flowkit;

namespace {

Scenario one_token(const std::string& machine, const std::string& stage,
                   const std::string& kind,
                   std::map<std::string, AttrValue> attrs = {}) {
  Scenario sc;
  sc.initial_tokens.push_back({machine, stage, kind, std::move(attrs)});
  sc.max_ticks = 50;
  return sc;
}

}  // namespace

TEST_CASE("a stored book reaches the borrower through the librarian") {
  Model m = testsup::corpus_model("book-flow");
  SimTrace t = run_scenario(m, testsup::corpus_scenario("book"));
  std::vector<TraceRecord> expect{
      {0, "Shelf.Book", "Storage", 0, "created"},
      {1, "Shelf.Book", "Release", 0, "moved"},
      {2, "Shelf.Book", "Transfer", 0, "moved"},
      {3, "Librarian.Book", "Transfer", 0, "moved"},
      {4, "Librarian.Book", "Receive", 0, "moved"},
      {5, "Librarian.Book", "Release", 0, "moved"},
      {6, "Librarian.Book", "Transfer", 0, "moved"},
      {7, "Borrower.Book", "Transfer", 0, "moved"},
  };
  CHECK(t.records == expect);
  CHECK(t.last_tick == 7);
  CHECK_FALSE(t.truncated);
}

TEST_CASE("speech mints words and the listener builds understanding") {
  Model m = testsup::corpus_model("speaker-listener");
  SimTrace t = run_scenario(m, testsup::corpus_scenario("speaker"));
  std::vector<TraceRecord> expect{
      {0, "Speaker.Concepts", "Create", 0, "created"},
      {1, "Speaker.Concepts", "Create", 0, "triggered"},
      {1, "Speaker.Words", "Create", 1, "created"},
      {2, "Speaker.Words", "Release", 1, "moved"},
      {3, "Speaker.Words", "Transfer", 1, "moved"},
      {4, "Listener.Words", "Transfer", 1, "moved"},
      {5, "Listener.Words", "Receive", 1, "moved"},
      {6, "Listener.Words", "Receive", 1, "triggered"},
      {6, "Listener.Understanding", "Create", 2, "created"},
  };
  CHECK(t.records == expect);
  CHECK(t.last_tick == 6);
}

TEST_CASE("an offer is stored until its deadline run releases it") {
  Model m = testsup::corpus_model("job-offer-events");
  SimTrace t = run_scenario(m, testsup::corpus_scenario("joboffer"));
  std::vector<TraceRecord> expect{
      {0, "Recruitment.Selection", "Create", 0, "created"},
      {1, "Recruitment.Selection", "Process", 0, "moved"},
      {2, "Recruitment.Selection", "Process", 0, "triggered"},
      {2, "Recruitment.Offers", "Create", 1, "created"},
      {3, "Recruitment.Offers", "Storage", 1, "stored"},
      {3, "Recruitment.Offers", "Create", 1, "triggered"},
      {3, "Recruitment.Deadlines", "Create", 2, "created"},
      {4, "Recruitment.Deadlines", "Process", 2, "moved"},
      {5, "Recruitment.Deadlines", "Process", 2, "triggered"},
      {5, "Recruitment.Offers", "Release", 1, "moved"},
      {6, "Recruitment.Offers", "Transfer", 1, "moved"},
  };
  CHECK(t.records == expect);
  CHECK(t.last_tick == 6);
}

TEST_CASE("runs are deterministic") {
  for (const auto& run : testsup::all_runs()) {
    Model m = testsup::corpus_model(run.model);
    Scenario sc = testsup::corpus_scenario(run.scenario);
    std::string first = testsup::jsonl(m, sc);
    for (int i = 0; i < 4; ++i) {
      INFO(run.scenario);
      CHECK(testsup::jsonl(m, sc) == first);
    }
  }
}

TEST_CASE("tokens are conserved and never in two places at once") {
  for (const auto& run : testsup::all_runs()) {
    Model m = testsup::corpus_model(run.model);
    testsup::TraceAudit audit = testsup::audit_run(m, testsup::corpus_scenario(run.scenario));
    INFO(run.scenario << ": " << audit.detail);
    CHECK(audit.conserved);
    CHECK(audit.exclusive);
  }
}

TEST_CASE("an endless cycle is cut off at the tick budget") {
  Model m = testsup::corpus_model("phosphorus-cycle");
  Scenario sc = testsup::corpus_scenario("phosphorus");
  SimTrace t = run_scenario(m, sc);
  CHECK(t.truncated);
  CHECK(t.last_tick == sc.max_ticks);
  std::string text = trace_to_jsonl(t);
  std::string last = text.substr(text.rfind('\n', text.size() - 2) + 1);
  CHECK(last == "{\"tick\":40,\"machine\":\"\",\"stage\":\"\",\"token\":null,\"action\":\"truncated\"}\n");
}

TEST_CASE("traces survive the jsonl round trip") {
  for (const auto& run : testsup::all_runs()) {
    Model m = testsup::corpus_model(run.model);
    SimTrace t = run_scenario(m, testsup::corpus_scenario(run.scenario));
    SimTrace back = trace_from_jsonl(trace_to_jsonl(t));
    INFO(run.scenario);
    CHECK(back.records == t.records);
    CHECK(back.last_tick == t.last_tick);
    CHECK(back.truncated == t.truncated);
  }
}

TEST_CASE("malformed trace lines are rejected") {
  CHECK_THROWS_AS(trace_from_jsonl("not json\n"), SimError);
  CHECK_THROWS_AS(trace_from_jsonl("{\"tick\":\"one\",\"action\":\"moved\"}\n"), SimError);
  CHECK_THROWS_AS(trace_from_jsonl("{\"machine\":\"M\"}\n"), SimError);
  CHECK_THROWS_AS(trace_from_jsonl("[1,2,3]\n"), SimError);
  SimTrace empty = trace_from_jsonl("\n  \n");
  CHECK(empty.records.empty());
}

TEST_CASE("acceptance policy admits matching tokens and absorbs the rest") {
  Model m = testsup::pipeline_model();

  SECTION("matching grade passes and the token gets stored") {
    Scenario sc = testsup::pipeline_scenario();
    sc.accept_policy["Sink.In"] = {"grade", AttrValue{std::string("good")}};
    SimTrace t = run_scenario(m, sc);
    REQUIRE(t.records.size() == 8);
    CHECK(t.records[5] == TraceRecord{5, "Sink.In", "Accept", 0, "accepted"});
    CHECK(t.records[7] == TraceRecord{7, "Sink.In", "Storage", 0, "stored"});
  }
  SECTION("mismatched grade is rejected once and never moves again") {
    Scenario sc = testsup::pipeline_scenario();
    sc.accept_policy["Sink.In"] = {"grade", AttrValue{std::string("bad")}};
    SimTrace t = run_scenario(m, sc);
    REQUIRE(t.records.size() == 6);
    CHECK(t.records[5] == TraceRecord{5, "Sink.In", "Accept", 0, "rejected"});
    CHECK(t.last_tick == 5);
  }
  SECTION("no policy means every arrival is accepted") {
    SimTrace t = run_scenario(m, testsup::pipeline_scenario());
    CHECK(t.records[5].action == "accepted");
  }
}

TEST_CASE("receive stages take tokens without consulting the policy") {
  ModelBuilder b;
  b.add_thing("item", {{"grade", AttrDomain{AttrDomain::Kind::Symbols, {"good", "bad"}}}});
  b.add_sphere({}, "S");
  b.add_machine({"S"}, "Out", "item",
                {StageKind::Create, StageKind::Release, StageKind::Transfer});
  b.add_machine({"S"}, "In", "item",
                {StageKind::Transfer, StageKind::Receive, StageKind::Storage});
  b.add_flow_arc("S.Out.Create", "S.Out.Release");
  b.add_flow_arc("S.Out.Release", "S.Out.Transfer");
  b.add_flow_arc("S.Out.Transfer", "S.In.Transfer");
  b.add_flow_arc("S.In.Transfer", "S.In.Receive");
  b.add_flow_arc("S.In.Receive", "S.In.Storage");
  Model m = b.finish();

  Scenario sc = one_token("S.Out", "Create", "item");
  sc.accept_policy["S.In"] = {"grade", AttrValue{std::string("bad")}};
  SimTrace t = run_scenario(m, sc);
  for (const auto& r : t.records) {
    CHECK(r.action != "rejected");
    CHECK(r.action != "accepted");
  }
  CHECK(t.records.back().action == "stored");
}

TEST_CASE("transfer arcs alternate between machines") {
  // A token dropped onto a Transfer stage has no history, so the lowest
  // arc index wins; after an intra-machine hop only cross arcs qualify.
  Model m = testsup::corpus_model("book-flow");
  SimTrace t = run_scenario(m, one_token("Librarian.Book", "Transfer", "book"));
  std::vector<TraceRecord> expect{
      {0, "Librarian.Book", "Transfer", 0, "created"},
      {1, "Librarian.Book", "Receive", 0, "moved"},
      {2, "Librarian.Book", "Release", 0, "moved"},
      {3, "Librarian.Book", "Transfer", 0, "moved"},
      {4, "Borrower.Book", "Transfer", 0, "moved"},
  };
  CHECK(t.records == expect);
}

TEST_CASE("guards gate triggers by attribute") {
  ParseResult pr = parse(R"(thing t { f: {no, yes} }
sphere S {
  machine M of t { stages { Create Process } }
  machine N of t { stages { Create } }
}
flow S.M.Create -> S.M.Process
trigger S.M.Process => S.N.Create when f = yes
)");
  REQUIRE(pr.ok());
  const Model& m = *pr.model;

  SECTION("non-matching token never fires it") {
    SimTrace t = run_scenario(m, one_token("S.M", "Create", "t", {{"f", AttrValue{std::string("no")}}}));
    CHECK(t.records.size() == 2);
    CHECK(t.last_tick == 1);
  }
  SECTION("matching token fires it and the mint inherits the attribute") {
    Scenario sc = one_token("S.M", "Create", "t", {{"f", AttrValue{std::string("yes")}}});
    Simulator sim(m, sc);
    SimTrace t = sim.run();
    REQUIRE(t.records.size() == 4);
    CHECK(t.records[2] == TraceRecord{2, "S.M", "Process", 0, "triggered"});
    CHECK(t.records[3] == TraceRecord{2, "S.N", "Create", 1, "created"});
    CHECK(sim.tokens()[1].attributes.at("f") == AttrValue{std::string("yes")});
  }
  SECTION("the first qualifying token arms the trigger, not the first record") {
    Scenario sc;
    sc.initial_tokens.push_back({"S.M", "Create", "t", {{"f", AttrValue{std::string("no")}}}});
    sc.initial_tokens.push_back({"S.M", "Create", "t", {{"f", AttrValue{std::string("yes")}}}});
    sc.max_ticks = 10;
    SimTrace t = run_scenario(m, sc);
    bool found = false;
    for (const auto& r : t.records)
      if (r.action == "triggered") {
        found = true;
        CHECK(r.token == 1);
      }
    CHECK(found);
  }
}

TEST_CASE("clock guards compare the firing tick against a scenario deadline") {
  ParseResult pr = parse(R"(thing t
sphere S {
  machine M of t { stages { Create Process } }
  machine N of t { stages { Create } }
}
flow S.M.Create -> S.M.Process
trigger S.M.Process => S.N.Create when tick <= d
)");
  REQUIRE(pr.ok());
  const Model& m = *pr.model;

  // Activity lands at tick 1; the trigger would fire at tick 2.
  Scenario hit = one_token("S.M", "Create", "t");
  hit.deadlines["d"] = 2;
  CHECK(run_scenario(m, hit).records.size() == 4);

  Scenario miss = one_token("S.M", "Create", "t");
  miss.deadlines["d"] = 1;
  CHECK(run_scenario(m, miss).records.size() == 2);
}

TEST_CASE("eval_guard handles composition") {
  Guard g;  // (a = x and tick <= d) or not b = 3
  g.nodes.push_back({GuardNode::Op::AttrEq, "a", "x", 0, false, 0, 0});   // 0
  g.nodes.push_back({GuardNode::Op::ClockLe, "d", "", 0, false, 0, 0});   // 1
  g.nodes.push_back({GuardNode::Op::And, "", "", 0, false, 0, 1});        // 2
  g.nodes.push_back({GuardNode::Op::AttrEq, "b", "", 3, true, 0, 0});     // 3
  g.nodes.push_back({GuardNode::Op::Not, "", "", 0, false, 3, 0});        // 4
  g.nodes.push_back({GuardNode::Op::Or, "", "", 0, false, 2, 4});         // 5
  g.root = 5;

  std::map<std::string, AttrValue> attrs{{"a", AttrValue{std::string("x")}},
                                         {"b", AttrValue{3LL}}};
  std::map<std::string, std::uint32_t> deadlines{{"d", 10}};
  CHECK(Simulator::eval_guard(g, attrs, 5, deadlines));    // left arm holds
  CHECK_FALSE(Simulator::eval_guard(g, attrs, 11, deadlines));  // both arms fail
  attrs["b"] = AttrValue{4LL};
  CHECK(Simulator::eval_guard(g, attrs, 11, deadlines));   // right arm holds

  Guard missing;  // references an attribute the token lacks
  missing.nodes.push_back({GuardNode::Op::AttrEq, "zzz", "x", 0, false, 0, 0});
  CHECK_FALSE(Simulator::eval_guard(missing, attrs, 0, deadlines));
  Guard nodl;  // references a deadline the scenario lacks
  nodl.nodes.push_back({GuardNode::Op::ClockLe, "other", "", 0, false, 0, 0});
  CHECK_FALSE(Simulator::eval_guard(nodl, attrs, 0, deadlines));
}

TEST_CASE("a junction keeps its latches until the last input arrives") {
  ModelBuilder b;
  b.add_thing("msg");
  b.add_thing("result", {{"ok", AttrDomain{AttrDomain::Kind::Symbols, {"n", "y"}}}});
  b.add_sphere({}, "S");
  b.add_machine({"S"}, "A", "msg", {StageKind::Create, StageKind::Process});
  b.add_machine({"S"}, "B", "msg",
                {StageKind::Create, StageKind::Process, StageKind::Release});
  b.add_machine({"S"}, "R", "result", {StageKind::Create, StageKind::Process});
  b.add_flow_arc("S.A.Create", "S.A.Process");
  b.add_flow_arc("S.B.Create", "S.B.Process");
  b.add_flow_arc("S.B.Process", "S.B.Release");
  b.add_flow_arc("S.R.Create", "S.R.Process");
  JunctionId j = b.add_junction("Both", "S.R.Create");
  b.add_trigger_arc(b.endpoint("S.A.Process"), j);
  b.add_trigger_arc(b.endpoint("S.B.Release"), j);
  Model m = b.finish();

  Scenario sc;
  sc.initial_tokens.push_back({"S.A", "Create", "msg", {}});
  sc.initial_tokens.push_back({"S.B", "Create", "msg", {}});
  sc.max_ticks = 20;
  sc.bindings["ok"] = AttrValue{std::string("y")};

  Simulator sim(m, sc);
  SimTrace t = sim.run();
  std::vector<TraceRecord> expect{
      {0, "S.A", "Create", 0, "created"},
      {0, "S.B", "Create", 1, "created"},
      {1, "S.A", "Process", 0, "moved"},
      {1, "S.B", "Process", 1, "moved"},
      {2, "S.B", "Release", 1, "moved"},      // flows land before triggers
      {2, "S.A", "Process", 0, "triggered"},  // first input latches, no fire yet
      {3, "S.B", "Release", 1, "triggered"},  // second input completes the set
      {3, "S.R", "Create", 2, "junction-fired"},
      {3, "S.R", "Create", 2, "created"},
      {4, "S.R", "Process", 2, "moved"},
  };
  CHECK(t.records == expect);
  CHECK(t.last_tick == 4);
  // Junction mints take scenario bindings, never the arming token's values.
  CHECK(sim.tokens()[2].attributes.at("ok") == AttrValue{std::string("y")});

  Scenario defaults = sc;
  defaults.bindings.clear();
  Simulator sim2(m, defaults);
  sim2.run();
  CHECK(sim2.tokens()[2].attributes.at("ok") == AttrValue{std::string("n")});
}

TEST_CASE("one armed input alone never fires a junction") {
  Model m = testsup::junction_model();
  Scenario sc;
  sc.initial_tokens.push_back({"S.A", "Create", "msg", {}});
  sc.max_ticks = 20;
  SimTrace t = run_scenario(m, sc);
  for (const auto& r : t.records) CHECK(r.action != "junction-fired");
  CHECK(t.records.back().action == "triggered");  // the latch is the last act
}

TEST_CASE("release triggers pull the oldest waiting token or stay silent") {
  ModelBuilder b;
  b.add_thing("t");
  b.add_sphere({}, "S");
  b.add_machine({"S"}, "P", "t", {StageKind::Create, StageKind::Process});
  b.add_machine({"S"}, "Q", "t",
                {StageKind::Release, StageKind::Transfer, StageKind::Storage});
  b.add_flow_arc("S.P.Create", "S.P.Process");
  b.add_flow_arc("S.Q.Release", "S.Q.Transfer");
  b.add_trigger_arc("S.P.Process", "S.Q.Release");
  Model m = b.finish();

  SECTION("nothing to release, nothing recorded") {
    SimTrace t = run_scenario(m, one_token("S.P", "Create", "t"));
    CHECK(t.records.size() == 2);  // created, moved; the trigger never fires
    CHECK(t.last_tick == 1);
  }
  SECTION("the oldest stored token moves") {
    Scenario sc = one_token("S.P", "Create", "t");
    sc.initial_tokens.push_back({"S.Q", "Storage", "t", {}});
    sc.initial_tokens.push_back({"S.Q", "Storage", "t", {}});
    SimTrace t = run_scenario(m, sc);
    std::vector<TraceRecord> expect{
        {0, "S.P", "Create", 0, "created"},
        {0, "S.Q", "Storage", 1, "created"},
        {0, "S.Q", "Storage", 2, "created"},
        {1, "S.P", "Process", 0, "moved"},
        {2, "S.P", "Process", 0, "triggered"},
        {2, "S.Q", "Release", 1, "moved"},
        {3, "S.Q", "Transfer", 1, "moved"},
    };
    CHECK(t.records == expect);
  }
}

TEST_CASE("minted attribute values fall back from token to binding to default") {
  ParseResult pr = parse(R"(thing src { x: {a, b} y: {c, d} }
thing dst { x: {a, b} z: integer }
thing strict { x: {q} }
sphere S {
  machine M of src { stages { Create Process } }
  machine N of dst { stages { Create } }
  machine O of strict { stages { Create } }
}
flow S.M.Create -> S.M.Process
trigger S.M.Process => S.N.Create
trigger S.M.Process => S.O.Create
)");
  REQUIRE(pr.ok());
  const Model& m = *pr.model;
  Scenario sc = one_token("S.M", "Create", "src", {{"x", AttrValue{std::string("b")}}});
  sc.bindings["x"] = AttrValue{std::string("a")};
  sc.bindings["z"] = AttrValue{7LL};
  Simulator sim(m, sc);
  sim.run();
  REQUIRE(sim.tokens().size() == 3);
  // dst.x: default a, binding a, inherited b; the token wins.
  CHECK(sim.tokens()[1].attributes.at("x") == AttrValue{std::string("b")});
  // dst.z: no inherited value, binding 7 beats default 0.
  CHECK(sim.tokens()[1].attributes.at("z") == AttrValue{7LL});
  // strict.x: neither binding "a" nor inherited "b" fits {q}; default stands.
  CHECK(sim.tokens()[2].attributes.at("x") == AttrValue{std::string("q")});
  // src.y was never copied anywhere.
  CHECK(sim.tokens()[1].attributes.count("y") == 0);
}

TEST_CASE("scenario construction rejects inconsistent setups") {
  Model m = testsup::pipeline_model();

  Scenario zero;
  zero.max_ticks = 0;
  CHECK_THROWS_AS(Simulator(m, zero), SimError);

  Scenario ghost = testsup::pipeline_scenario();
  ghost.initial_tokens[0].machine = "Nowhere.Out";
  CHECK_THROWS_AS(Simulator(m, ghost), SimError);

  Scenario badstage = testsup::pipeline_scenario();
  badstage.initial_tokens[0].stage = "Storage";
  CHECK_THROWS_AS(Simulator(m, badstage), SimError);

  Scenario badkind = testsup::pipeline_scenario();
  badkind.initial_tokens[0].kind = "widget";
  CHECK_THROWS_AS(Simulator(m, badkind), SimError);

  Scenario badattr = testsup::pipeline_scenario();
  badattr.initial_tokens[0].attributes["grade"] = AttrValue{std::string("superb")};
  CHECK_THROWS_AS(Simulator(m, badattr), SimError);

  Scenario badpolicy = testsup::pipeline_scenario();
  badpolicy.accept_policy["Sink.In"] = {"color", AttrValue{std::string("red")}};
  CHECK_THROWS_AS(Simulator(m, badpolicy), SimError);

  Scenario outside = testsup::pipeline_scenario();
  outside.accept_policy["Sink.In"] = {"grade", AttrValue{std::string("superb")}};
  CHECK_THROWS_AS(Simulator(m, outside), SimError);

  // Every deadline a guard mentions must be bound.
  Model cc = testsup::corpus_model("call-center");
  Scenario nod = testsup::corpus_scenario("callcenter-accept");
  nod.deadlines.clear();
  CHECK_THROWS_AS(Simulator(cc, nod), SimError);
}

TEST_CASE("scenario json is strict about its fields") {
  auto parse_sc = [](const char* text) { return scenario_from_json(nlohmann::json::parse(text)); };

  Scenario sc = parse_sc(R"({
    "initial_tokens": [{"machine": "S.M", "stage": "Create", "kind": "t",
                        "attributes": {"f": "yes", "n": 3}}],
    "bindings": {"answer": "accept"},
    "deadlines": {"d": 9},
    "max_ticks": 25,
    "accept_policy": {"S.M": {"attribute": "f", "equals": "yes"}}
  })");
  CHECK(sc.initial_tokens.size() == 1);
  CHECK(sc.initial_tokens[0].attributes.at("n") == AttrValue{3LL});
  CHECK(sc.bindings.at("answer") == AttrValue{std::string("accept")});
  CHECK(sc.deadlines.at("d") == 9);
  CHECK(sc.max_ticks == 25);
  CHECK(sc.accept_policy.at("S.M").attribute == "f");

  CHECK_THROWS_AS(parse_sc(R"({"tokens": []})"), SimError);
  CHECK_THROWS_AS(parse_sc(R"([])"), SimError);
  CHECK_THROWS_AS(parse_sc(R"({"initial_tokens": [{"machine": "M"}]})"), SimError);
  CHECK_THROWS_AS(parse_sc(R"({"initial_tokens": [{"machine": "M", "stage": "Create",
                               "kind": "t", "attributes": {"f": 1.5}}]})"), SimError);
  CHECK_THROWS_AS(parse_sc(R"({"max_ticks": 0})"), SimError);
  CHECK_THROWS_AS(parse_sc(R"({"deadlines": {"d": -1}})"), SimError);
  CHECK_THROWS_AS(parse_sc(R"({"accept_policy": {"M": {"attribute": "f"}}})"), SimError);
}

TEST_CASE("events partition each machine's records into tick runs") {
  Model m = testsup::corpus_model("job-offer-events");
  SimTrace t = run_scenario(m, testsup::corpus_scenario("joboffer"));
  Process p = extract_events(m, t);

  REQUIRE(p.events.size() == 4);
  CHECK(p.events[0].machine == "Recruitment.Selection");
  CHECK(p.events[1].machine == "Recruitment.Offers");
  CHECK(p.events[2].machine == "Recruitment.Deadlines");
  CHECK(p.events[3].machine == "Recruitment.Offers");
  CHECK(p.events[1].start == 2);
  CHECK(p.events[1].end == 3);
  CHECK(p.events[3].start == 5);
  CHECK(p.events[3].end == 6);
  for (const auto& ev : p.events) CHECK(ev.start <= ev.end);

  std::set<std::pair<std::size_t, std::size_t>> links(p.links.begin(), p.links.end());
  std::set<std::pair<std::size_t, std::size_t>> expect{{0, 1}, {1, 2}, {1, 3}, {2, 3}};
  CHECK(links == expect);

  CHECK(p.precedes(0, 3));
  CHECK_FALSE(p.precedes(3, 0));
  CHECK_FALSE(p.precedes(0, 0));
  REQUIRE(p.first_event_of("Recruitment.Offers").has_value());
  CHECK(*p.first_event_of("Recruitment.Offers") == 1);
  CHECK_FALSE(p.first_event_of("Recruitment.Ghost").has_value());

  nlohmann::ordered_json j = events_to_json(p);
  CHECK(j["events"].size() == 4);
  CHECK(j["events"][1] == nlohmann::ordered_json({{"machine", "Recruitment.Offers"},
                                                  {"start", 2},
                                                  {"end", 3},
                                                  {"records", 3}}));
  CHECK(j["links"].size() == 4);
}

TEST_CASE("event links always point forward") {
  for (const auto& run : testsup::all_runs()) {
    Model m = testsup::corpus_model(run.model);
    SimTrace t = run_scenario(m, testsup::corpus_scenario(run.scenario));
    Process p = extract_events(m, t);
    INFO(run.scenario);
    for (const auto& [from, to] : p.links) {
      CHECK(from < to);
      CHECK(from < p.events.size());
      CHECK(to < p.events.size());
    }
  }
}

TEST_CASE("junction firings enter the event chain") {
  Model m = testsup::corpus_model("call-center");
  SimTrace t = run_scenario(m, testsup::corpus_scenario("callcenter-accept"));
  Process p = extract_events(m, t);
  // The decision event is caused by both response firings through the
  // junction, so the response event precedes it.
  auto resp = p.first_event_of("Recruiter.Response");
  auto dec = p.first_event_of("System.Decision");
  REQUIRE(resp.has_value());
  REQUIRE(dec.has_value());
  CHECK(p.precedes(*resp, *dec));
}
