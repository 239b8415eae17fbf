#include "ahc/scheduler.hpp"

#include <gtest/gtest.h>

#include "ahc/util.hpp"
#include "gen.hpp"
#include "oracle.hpp"

namespace {

using namespace ahc;

TaskSpec mk_task(const std::string& id, double size, double deadline, double in_kb = 0,
                 double out_kb = 0) {
  TaskSpec t;
  t.id = id;
  t.size = size;
  t.input_data = in_kb;
  t.output_data = out_kb;
  t.deadline = deadline;
  return t;
}

NodeSpec mk_node(const std::string& id, double power, double energy = 1e6, double a = 1.0,
                 double b = 0.001) {
  NodeSpec n;
  n.id = id;
  n.processing_power = power;
  n.available_energy = energy;
  n.proc_energy_rate = a;
  n.tx_energy_per_packet = b;
  n.radio_range = 200;
  return n;
}

BandwidthFn flat_bandwidth(double mbps) {
  return [mbps](const NodeId&) -> std::optional<double> { return mbps; };
}

TEST(SortTasks, EmptyGraph) {
  TaskGraph g;
  EXPECT_TRUE(sort_tasks(g).empty());
}

TEST(SortTasks, ChainDominatesDeadlines) {
  TaskGraph g;
  g.tasks = {mk_task("detect", 10, 9), mk_task("track", 10, 1), mk_task("classify", 10, 5)};
  g.edges = {{"detect", "track"}, {"track", "classify"}};
  const auto order = sort_tasks(g);
  ASSERT_EQ(order.size(), 3u);
  EXPECT_EQ(g.tasks[order[0]].id, "detect");
  EXPECT_EQ(g.tasks[order[1]].id, "track");
  EXPECT_EQ(g.tasks[order[2]].id, "classify");
}

TEST(SortTasks, IndependentTasksByDeadline) {
  TaskGraph g;
  g.tasks = {mk_task("a", 10, 5), mk_task("b", 10, 2)};
  const auto order = sort_tasks(g);
  EXPECT_EQ(g.tasks[order[0]].id, "b");
  EXPECT_EQ(g.tasks[order[1]].id, "a");
}

TEST(SortTasks, DeadlineTieBrokenById) {
  TaskGraph g;
  g.tasks = {mk_task("z", 10, 2), mk_task("a", 10, 2)};
  const auto order = sort_tasks(g);
  EXPECT_EQ(g.tasks[order[0]].id, "a");
}

TEST(FeasibleNodes, NoConstraintBinds) {
  const auto task = mk_task("t", 100, 1e9);
  std::vector<NodeSpec> nodes = {mk_node("a", 100), mk_node("b", 200)};
  AllocationParams params;
  params.source_node = "a";
  std::map<NodeId, double> energies = {{"a", 1e6}, {"b", 1e6}};
  const auto out = feasible_nodes(task, nodes, flat_bandwidth(250), params, energies);
  EXPECT_EQ(out.size(), 2u);
}

TEST(FeasibleNodes, ImpossibleDeadline) {
  const auto task = mk_task("t", 100, 0.001);
  std::vector<NodeSpec> nodes = {mk_node("a", 100), mk_node("b", 200)};
  AllocationParams params;
  params.source_node = "a";
  std::map<NodeId, double> energies = {{"a", 1e6}, {"b", 1e6}};
  EXPECT_TRUE(feasible_nodes(task, nodes, flat_bandwidth(250), params, energies).empty());
}

TEST(FeasibleNodes, Table2FasterSubset) {
  // Data-free task sized so only the two faster devices meet the deadline.
  const auto task = mk_task("t", 4800, 1.9);
  std::vector<NodeSpec> nodes = {mk_node("s7", 16000), mk_node("s2", 2400),
                                 mk_node("vega", 3000)};
  AllocationParams params;
  params.source_node = "s2";
  std::map<NodeId, double> energies = {{"s7", 1e6}, {"s2", 1e6}, {"vega", 1e6}};
  const auto out = feasible_nodes(task, nodes, flat_bandwidth(250), params, energies);
  // 4800/16000 = 0.3s, 4800/3000 = 1.6s, 4800/2400 = 2.0s
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[0], "s7");
  EXPECT_EQ(out[1], "vega");
}

TEST(Allocate, SingleNodeSingleTask) {
  TaskGraph g;
  g.tasks = {mk_task("t", 100, 10)};
  std::vector<NodeSpec> nodes = {mk_node("a", 100)};
  AllocationParams params;
  params.source_node = "a";
  const auto out = allocate(g, nodes, flat_bandwidth(250), params);
  ASSERT_EQ(out.assigned.size(), 1u);
  EXPECT_EQ(out.assigned.at("t").node, "a");
  EXPECT_TRUE(out.unassigned.empty());
}

TEST(Allocate, TieGoesToLowerNodeId) {
  TaskGraph g;
  g.tasks = {mk_task("t", 100, 10)};
  std::vector<NodeSpec> nodes = {mk_node("b", 100), mk_node("a", 100)};
  AllocationParams params;
  params.source_node = "zz-absent";  // neither node is the source
  const auto out = allocate(g, nodes, flat_bandwidth(250), params);
  EXPECT_EQ(out.assigned.at("t").node, "a");
}

TEST(Allocate, DeadlineReasonReported) {
  TaskGraph g;
  g.tasks = {mk_task("t", 1000, 0.0001)};
  std::vector<NodeSpec> nodes = {mk_node("a", 100)};
  AllocationParams params;
  params.source_node = "a";
  const auto out = allocate(g, nodes, flat_bandwidth(250), params);
  ASSERT_EQ(out.unassigned.size(), 1u);
  EXPECT_EQ(out.unassigned[0].reason, "deadline");
}

TEST(Allocate, EnergyReasonReported) {
  TaskGraph g;
  g.tasks = {mk_task("t", 100, 10)};
  std::vector<NodeSpec> nodes = {mk_node("a", 100, /*energy=*/0.1, /*a=*/1.0)};
  AllocationParams params;
  params.source_node = "a";
  const auto out = allocate(g, nodes, flat_bandwidth(250), params);
  ASSERT_EQ(out.unassigned.size(), 1u);
  EXPECT_EQ(out.unassigned[0].reason, "energy");
}

TEST(Allocate, EnergyBookkeepingBlocksSecondTask) {
  TaskGraph g;
  g.tasks = {mk_task("t1", 100, 10), mk_task("t2", 100, 10)};
  // Battery covers one task only (1 J each at a=1, power=100).
  std::vector<NodeSpec> nodes = {mk_node("a", 100, 1.5, 1.0, 0.0)};
  AllocationParams params;
  params.source_node = "a";
  auto out = allocate(g, nodes, flat_bandwidth(250), params);
  EXPECT_EQ(out.assigned.size(), 1u);
  ASSERT_EQ(out.unassigned.size(), 1u);
  EXPECT_EQ(out.unassigned[0].reason, "energy");

  params.static_energy = true;  // paper-literal stateless allocation
  out = allocate(g, nodes, flat_bandwidth(250), params);
  EXPECT_EQ(out.assigned.size(), 2u);
}

TEST(Allocate, DeadlineSafetyInvariant) {
  Rng rng(31);
  for (int i = 0; i < 300; ++i) {
    auto inst = gen::random_scheduler_instance(rng);
    const auto out = allocate(inst.graph, inst.nodes, gen::bandwidth_fn(inst), inst.params);
    for (const auto& [task_id, a] : out.assigned) {
      const auto& t = inst.graph.tasks[*inst.graph.index_of(task_id)];
      EXPECT_LE(a.estimated_time, t.deadline);
    }
  }
}

TEST(Allocate, EnergyConservation) {
  Rng rng(32);
  for (int i = 0; i < 300; ++i) {
    auto inst = gen::random_scheduler_instance(rng);
    inst.params.static_energy = false;
    const auto out = allocate(inst.graph, inst.nodes, gen::bandwidth_fn(inst), inst.params);
    std::map<NodeId, double> spent;
    double total = 0;
    for (const auto& [task_id, a] : out.assigned) {
      spent[a.node] += a.estimated_energy;
      total += a.estimated_energy;
    }
    EXPECT_NEAR(total, out.total_energy(), 1e-9);
    for (const auto& n : inst.nodes) {
      // A node is never committed past its battery.
      EXPECT_LE(spent[n.id], n.available_energy + 1e-9);
    }
  }
}

TEST(Allocate, ArgminInvariantUnderCoefficientScaling) {
  Rng rng(33);
  const double scales[] = {0.25, 4.0, 17.5};
  for (int i = 0; i < 200; ++i) {
    auto inst = gen::random_scheduler_instance(rng);
    // Ample batteries so scaling cannot change feasibility.
    for (auto& n : inst.nodes) n.available_energy = 1e12;
    inst.params.energy_threshold = 0;
    const auto base = allocate(inst.graph, inst.nodes, gen::bandwidth_fn(inst), inst.params);
    for (double c : scales) {
      auto scaled = inst;
      for (auto& n : scaled.nodes) {
        n.proc_energy_rate *= c;
        n.tx_energy_per_packet *= c;
      }
      const auto out =
          allocate(scaled.graph, scaled.nodes, gen::bandwidth_fn(scaled), scaled.params);
      ASSERT_EQ(out.assigned.size(), base.assigned.size());
      for (const auto& [task_id, a] : base.assigned)
        EXPECT_EQ(out.assigned.at(task_id).node, a.node) << "scale " << c;
    }
  }
}

TEST(Allocate, MatchesOracleOnSmallSweep) {
  Rng rng(34);
  for (int i = 0; i < 300; ++i) {
    auto inst = gen::random_scheduler_instance(rng);
    const auto got = allocate(inst.graph, inst.nodes, gen::bandwidth_fn(inst), inst.params);
    const auto want =
        oracle::oracle_allocate(inst.graph, inst.nodes, gen::bandwidth_fn(inst), inst.params);
    std::string why;
    EXPECT_TRUE(oracle::assignments_equivalent(got, want, &why)) << "instance " << i << ": " << why;
  }
}

TEST(Allocate, EmptyTaskSetGivesEmptyAssignment) {
  TaskGraph g;
  std::vector<NodeSpec> nodes = {mk_node("a", 100)};
  AllocationParams params;
  params.source_node = "a";
  const auto got = allocate(g, nodes, flat_bandwidth(250), params);
  const auto want = oracle::oracle_allocate(g, nodes, flat_bandwidth(250), params);
  EXPECT_TRUE(got.assigned.empty());
  EXPECT_TRUE(got.unassigned.empty());
  EXPECT_TRUE(oracle::assignments_equivalent(got, want));
}

TEST(Allocate, OracleRefusesOversizedInstances) {
  TaskGraph g;
  for (int i = 0; i < 9; ++i) g.tasks.push_back(mk_task("t" + std::to_string(i), 1, 1));
  std::vector<NodeSpec> nodes = {mk_node("a", 100)};
  AllocationParams params;
  params.source_node = "a";
  EXPECT_THROW(oracle::oracle_allocate(g, nodes, flat_bandwidth(10), params),
               std::invalid_argument);
}

TEST(Allocate, Deterministic) {
  Rng rng(35);
  auto inst = gen::random_scheduler_instance(rng);
  const auto a = allocate(inst.graph, inst.nodes, gen::bandwidth_fn(inst), inst.params);
  const auto b = allocate(inst.graph, inst.nodes, gen::bandwidth_fn(inst), inst.params);
  EXPECT_EQ(a, b);
}

}  // namespace
