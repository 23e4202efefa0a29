#include <catch2/catch_amalgamated.hpp>

#include <set>
#include <utility>

#include "flowkit/core.hpp"
#include "support.hpp"

using namespace flowkit;

namespace {

using Pair = std::pair<StageKind, StageKind>;

std::set<Pair> expected_intra_pairs() {
  using S = StageKind;
  return {
      {S::Arrive, S::Accept},
      {S::Accept, S::Process}, {S::Accept, S::Release}, {S::Accept, S::Storage},
      {S::Receive, S::Process}, {S::Receive, S::Release}, {S::Receive, S::Storage},
      {S::Process, S::Release}, {S::Process, S::Storage},
      {S::Create, S::Process}, {S::Create, S::Release}, {S::Create, S::Storage},
      {S::Release, S::Transfer}, {S::Release, S::Storage},
      {S::Transfer, S::Arrive}, {S::Transfer, S::Receive},
      {S::Storage, S::Accept}, {S::Storage, S::Receive}, {S::Storage, S::Process},
      {S::Storage, S::Create}, {S::Storage, S::Release},
  };
}

}  // namespace

TEST_CASE("intra-machine arc table matches the connection rules exactly") {
  auto expected = expected_intra_pairs();
  std::size_t legal = 0;
  for (StageKind from : all_stage_kinds)
    for (StageKind to : all_stage_kinds) {
      bool want = expected.count({from, to}) > 0;
      INFO(stage_name(from) << " -> " << stage_name(to));
      CHECK(legal_intra_pair(from, to) == want);
      if (want) ++legal;
    }
  CHECK(legal == 21);
}

TEST_CASE("receive mirrors accept in the arc table") {
  for (StageKind to : all_stage_kinds) {
    INFO("to " << stage_name(to));
    CHECK(legal_intra_pair(StageKind::Receive, to) ==
          legal_intra_pair(StageKind::Accept, to));
  }
  for (StageKind from : all_stage_kinds) {
    if (from == StageKind::Arrive || from == StageKind::Transfer) continue;
    INFO("from " << stage_name(from));
    CHECK(legal_intra_pair(from, StageKind::Receive) ==
          legal_intra_pair(from, StageKind::Accept));
  }
}

TEST_CASE("a release pull is legal exactly where a flow into Release is") {
  for (StageKind k : all_stage_kinds) {
    INFO(stage_name(k));
    CHECK(pre_release_stage(k) == legal_intra_pair(k, StageKind::Release));
  }
}

TEST_CASE("stage names round-trip and are distinct") {
  std::set<std::string_view> seen;
  for (StageKind k : all_stage_kinds) {
    auto n = stage_name(k);
    CHECK(seen.insert(n).second);
    REQUIRE(stage_from_name(n).has_value());
    CHECK(*stage_from_name(n) == k);
  }
  CHECK(seen.size() == 8);
  CHECK_FALSE(stage_from_name("Creates").has_value());
  CHECK_FALSE(stage_from_name("create").has_value());
  CHECK_FALSE(stage_from_name("").has_value());
}

TEST_CASE("builder assembles paths, endpoints, and arcs") {
  Model m = testsup::pipeline_model();
  REQUIRE(m.machines.size() == 2);
  CHECK(m.machine_path(0) == "Source.Out");
  CHECK(m.machine_path(1) == "Sink.In");
  CHECK(m.endpoint_str(Endpoint{1, StageKind::Storage}) == "Sink.In.Storage");
  CHECK(m.flows.size() == 7);
  CHECK(m.arc_count == 7);
  for (std::size_t i = 0; i < m.flows.size(); ++i)
    CHECK(m.flows[i].index == i);  // no triggers declared, so indices are dense
  CHECK(m.endpoint_ok(Endpoint{0, StageKind::Create}));
  CHECK_FALSE(m.endpoint_ok(Endpoint{0, StageKind::Storage}));
  CHECK_FALSE(m.endpoint_ok(Endpoint{9, StageKind::Create}));
  REQUIRE(m.resolve_machine("Sink.In").has_value());
  CHECK(*m.resolve_machine("Sink.In") == 1);
  CHECK_FALSE(m.resolve_machine("Sink.Out").has_value());
  CHECK_FALSE(m.resolve_machine("In").has_value());
}

TEST_CASE("builder rejects malformed declarations") {
  ModelBuilder b;
  b.add_thing("item");
  CHECK_THROWS_AS(b.add_thing("item"), BuildError);
  CHECK_THROWS_AS(
      b.add_thing("bad", {{"empty", AttrDomain{AttrDomain::Kind::Symbols, {}}}}),
      BuildError);
  CHECK_THROWS_AS(
      b.add_thing("dup", {{"a", AttrDomain{AttrDomain::Kind::Integer, {}}},
                          {"a", AttrDomain{AttrDomain::Kind::Integer, {}}}}),
      BuildError);

  b.add_sphere({}, "S");
  CHECK_THROWS_AS(b.add_sphere({}, "S"), BuildError);
  CHECK_THROWS_AS(b.add_sphere({"Nowhere"}, "T"), BuildError);

  b.add_machine({"S"}, "M", "item", {StageKind::Create, StageKind::Process});
  CHECK_THROWS_AS(b.add_sphere({"S"}, "M"), BuildError);  // machine M occupies the name
  CHECK_THROWS_AS(b.add_machine({"S"}, "M", "item", {StageKind::Create}), BuildError);
  CHECK_THROWS_AS(b.add_machine({"S"}, "N", "ghost", {StageKind::Create}), BuildError);
  CHECK_THROWS_AS(
      b.add_machine({"S"}, "N", "item", {StageKind::Create, StageKind::Create}),
      BuildError);
  CHECK_THROWS_AS(b.add_machine({"S"}, "N", "item",
                                {StageKind::Receive, StageKind::Arrive}),
                  BuildError);
  CHECK_THROWS_AS(b.add_machine({"S"}, "N", "item",
                                {StageKind::Receive, StageKind::Accept}),
                  BuildError);
}

TEST_CASE("builder rejects illegal arcs") {
  ModelBuilder b;
  b.add_thing("item");
  b.add_thing("other");
  b.add_sphere({}, "S");
  b.add_machine({"S"}, "A", "item",
                {StageKind::Create, StageKind::Process, StageKind::Release,
                 StageKind::Transfer});
  b.add_machine({"S"}, "B", "item", {StageKind::Transfer, StageKind::Receive});
  b.add_machine({"S"}, "C", "other", {StageKind::Transfer, StageKind::Receive});

  CHECK_THROWS_AS(b.add_flow_arc("S.A.Process", "S.A.Create"), BuildError);
  CHECK_THROWS_AS(b.add_flow_arc("S.A.Process", "S.B.Receive"), BuildError);
  CHECK_THROWS_AS(b.add_flow_arc("S.A.Transfer", "S.C.Transfer"), BuildError);
  CHECK_NOTHROW(b.add_flow_arc("S.A.Transfer", "S.B.Transfer"));

  CHECK_THROWS_AS(b.add_trigger_arc("S.A.Process", "S.B.Transfer"), BuildError);
  CHECK_THROWS_AS(b.add_trigger_arc("S.A.Process", "S.A.Process"), BuildError);
  CHECK_NOTHROW(b.add_trigger_arc("S.A.Process", "S.A.Create"));
  CHECK_NOTHROW(b.add_trigger_arc("S.B.Receive", "S.A.Release"));

  CHECK_THROWS_AS(b.endpoint("S.A"), BuildError);
  CHECK_THROWS_AS(b.endpoint("S.A.Exist"), BuildError);
  CHECK_THROWS_AS(b.endpoint("S.Z.Create"), BuildError);
  CHECK_THROWS_AS(b.endpoint("S.A.Storage"), BuildError);
}

TEST_CASE("guards may only name attributes of the source thing") {
  ModelBuilder b;
  b.add_thing("item", {{"grade", AttrDomain{AttrDomain::Kind::Symbols, {"good", "bad"}}}});
  b.add_sphere({}, "S");
  b.add_machine({"S"}, "A", "item", {StageKind::Create, StageKind::Process});
  b.add_flow_arc("S.A.Create", "S.A.Process");

  Guard ok;
  ok.nodes.push_back({GuardNode::Op::AttrEq, "grade", "good", 0, false, 0, 0});
  CHECK_NOTHROW(b.add_trigger_arc("S.A.Process", "S.A.Create", ok));

  Guard bad;
  bad.nodes.push_back({GuardNode::Op::AttrEq, "color", "red", 0, false, 0, 0});
  CHECK_THROWS_AS(b.add_trigger_arc("S.A.Process", "S.A.Create", bad), BuildError);

  Guard clock;  // deadline names are scenario data, not thing attributes
  clock.nodes.push_back({GuardNode::Op::ClockLe, "cutoff", "", 0, false, 0, 0});
  CHECK_NOTHROW(b.add_trigger_arc("S.A.Process", "S.A.Create", clock));
}

TEST_CASE("junctions need two inputs by the time the model is finished") {
  {
    ModelBuilder b;
    b.add_thing("t");
    b.add_sphere({}, "S");
    b.add_machine({"S"}, "R", "t", {StageKind::Create, StageKind::Process});
    b.add_flow_arc("S.R.Create", "S.R.Process");
    b.add_junction("J", "S.R.Create");
    CHECK_THROWS_AS(b.finish(), BuildError);
  }
  Model m = testsup::junction_model();
  REQUIRE(m.junctions.size() == 1);
  CHECK(m.junctions[0].inputs.size() == 2);
  // The output arc is a trigger arc with the junction as source.
  const TriggerArc* out = nullptr;
  for (const auto& t : m.triggers)
    if (t.index == m.junctions[0].output) out = &t;
  REQUIRE(out != nullptr);
  CHECK(std::holds_alternative<JunctionRef>(out->source));
  CHECK_THROWS_AS([] {
    ModelBuilder b;
    b.add_thing("t");
    b.add_sphere({}, "S");
    b.add_machine({"S"}, "R", "t", {StageKind::Create, StageKind::Process});
    b.add_junction("J", "S.R.Create");
    b.add_junction("J", "S.R.Create");
  }(), BuildError);
}

TEST_CASE("stage graph carries every arc exactly once") {
  Model pm = testsup::pipeline_model();
  CHECK(stage_graph(pm).edge_count() == pm.flows.size() + pm.triggers.size());

  Model jm = testsup::junction_model();
  StageGraph g = stage_graph(jm);
  CHECK(g.edge_count() == jm.flows.size() + jm.triggers.size());
  std::size_t junction_edges = 0;
  for (const auto& e : g.edges) {
    if (std::holds_alternative<JunctionRef>(e.source)) ++junction_edges;
    if (std::holds_alternative<JunctionRef>(e.target)) ++junction_edges;
  }
  CHECK(junction_edges == 3);  // two inputs point at it, one output leaves it
}

TEST_CASE("all_endpoints walks machines in order") {
  Model m = testsup::pipeline_model();
  auto eps = all_endpoints(m);
  REQUIRE(eps.size() == 8);
  CHECK(eps.front() == Endpoint{0, StageKind::Create});
  CHECK(eps.back() == Endpoint{1, StageKind::Storage});
  for (std::size_t i = 1; i < eps.size(); ++i)
    CHECK(eps[i - 1].machine <= eps[i].machine);
}

TEST_CASE("machine_path survives a broken sphere tree") {
  Model m = testsup::pipeline_model();
  // Point the two spheres at each other; paths fall back to bare names
  // instead of walking the cycle forever.
  m.spheres[1].parent = 2;
  m.spheres[2].parent = 1;
  CHECK(m.machine_path(0) == "Out");
  m.spheres[1].parent = 99;
  CHECK(m.machine_path(0) == "Out");
}
