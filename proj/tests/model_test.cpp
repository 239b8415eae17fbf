#include "ahc/model.hpp"

#include <gtest/gtest.h>

#include "ahc/util.hpp"
#include "oracle.hpp"

namespace {

using namespace ahc;

NodeSpec valid_node(const std::string& id) {
  NodeSpec n;
  n.id = id;
  n.processing_power = 2400;
  n.available_energy = 100;
  n.proc_energy_rate = 1.2;
  n.tx_energy_per_packet = 0.002;
  n.x = 0;
  n.y = 0;
  n.radio_range = 200;
  n.go_intent = 7;
  return n;
}

TaskSpec valid_task(const std::string& id) {
  TaskSpec t;
  t.id = id;
  t.size = 100;
  t.input_data = 50;
  t.output_data = 10;
  t.deadline = 5;
  t.real_time = true;
  return t;
}

Scenario table2_scenario() {
  // The reference three-node roster with a small pipeline.
  Scenario s;
  NodeSpec s7 = valid_node("s7");
  s7.processing_power = 16000;  // octa: 4 x 2400 + 4 x 1600
  s7.x = 50;
  NodeSpec s2 = valid_node("s2");
  s2.processing_power = 2400;  // dual 1.2 GHz
  NodeSpec vega = valid_node("vega");
  vega.processing_power = 3000;  // dual 1.5 GHz
  vega.x = 100;
  s.nodes = {s7, s2, vega};
  s.workload.tasks = {valid_task("detect"), valid_task("track"), valid_task("classify")};
  s.workload.edges = {{"detect", "track"}, {"track", "classify"}};
  s.source_node = "s2";
  return s;
}

TEST(Model, EmptyNodeListRejected) {
  Scenario s;
  s.workload.tasks = {valid_task("a")};
  s.source_node = "a";
  try {
    validate_scenario(s);
    FAIL() << "expected rejection";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("nodes: empty"), std::string::npos);
  }
}

TEST(Model, Table2RosterAccepted) {
  Scenario s = table2_scenario();
  EXPECT_NO_THROW(validate_scenario(s));
}

TEST(Model, TwoCycleRejected) {
  Scenario s = table2_scenario();
  s.workload.edges = {{"detect", "track"}, {"track", "detect"}};
  try {
    validate_scenario(s);
    FAIL() << "expected rejection";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("cycle detected"), std::string::npos);
  }
}

TEST(Model, FieldPathsInErrors) {
  Scenario s = table2_scenario();
  s.nodes[1].processing_power = 0;
  try {
    validate_scenario(s);
    FAIL() << "expected rejection";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("nodes[1].processing_power"), std::string::npos);
  }
}

TEST(Model, UnknownSourceRejected) {
  Scenario s = table2_scenario();
  s.source_node = "ghost";
  EXPECT_THROW(validate_scenario(s), ValidationError);
}

TEST(Model, NodeInThreeGroupsRejected) {
  Scenario s = table2_scenario();
  NodeSpec d = valid_node("d");
  NodeSpec e = valid_node("e");
  s.nodes.push_back(d);
  s.nodes.push_back(e);
  s.groups = {{"s7", {"s2"}}, {"vega", {"s2"}}, {"d", {"s2", "e"}}};
  try {
    validate_scenario(s);
    FAIL() << "expected rejection";
  } catch (const ValidationError& e2) {
    EXPECT_NE(std::string(e2.what()).find("more than 2 groups"), std::string::npos);
  }
}

// Random single-field perturbations are rejected exactly when they violate
// an invariant.
TEST(Model, PerturbationProperty) {
  Rng rng(20240811);
  for (int iter = 0; iter < 500; ++iter) {
    Scenario s = table2_scenario();
    const int which = static_cast<int>(rng.uniform_int(0, 5));
    bool should_fail = true;
    switch (which) {
      case 0:
        s.nodes[rng.uniform_int(0, 2)].processing_power = -rng.uniform(0.0, 10.0);
        break;
      case 1:
        s.nodes[rng.uniform_int(0, 2)].go_intent = rng.next_bool() ? 16 : -1;
        break;
      case 2:
        s.workload.tasks[rng.uniform_int(0, 2)].deadline = 0;
        break;
      case 3:
        s.packet_size = 0;
        break;
      case 4:
        s.nodes[rng.uniform_int(0, 2)].available_energy = -1;
        break;
      case 5: {
        // A benign perturbation must keep validating.
        s.nodes[rng.uniform_int(0, 2)].available_energy = rng.uniform(0.0, 1e6);
        should_fail = false;
        break;
      }
    }
    if (should_fail)
      EXPECT_THROW(validate_scenario(s), ValidationError) << "case " << which;
    else
      EXPECT_NO_THROW(validate_scenario(s)) << "case " << which;
  }
}

// Topological order exists iff validation accepts the graph, checked against
// an independent DFS cycle detector over random graphs.
TEST(Model, TopoOrderIffAcyclic) {
  Rng rng(77);
  for (int iter = 0; iter < 300; ++iter) {
    TaskGraph g;
    const int n = static_cast<int>(rng.uniform_int(1, 6));
    for (int i = 0; i < n; ++i) g.tasks.push_back(valid_task("t" + std::to_string(i)));
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        if (a != b && rng.next_double() < 0.25)
          g.edges.emplace_back(g.tasks[a].id, g.tasks[b].id);

    const bool cyclic = oracle::has_cycle(g);
    EXPECT_EQ(g.topological_order().has_value(), !cyclic);
    if (cyclic) {
      EXPECT_THROW(validate_graph(g, "workload"), ValidationError);
    } else {
      EXPECT_NO_THROW(validate_graph(g, "workload"));
      // The produced order must respect every edge.
      const auto order = *g.topological_order();
      std::map<std::string, std::size_t> pos;
      for (std::size_t i = 0; i < order.size(); ++i) pos[g.tasks[order[i]].id] = i;
      for (const auto& [p, sidx] : g.edges) EXPECT_LT(pos[p], pos[sidx]);
    }
  }
}

}  // namespace
