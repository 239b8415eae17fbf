#pragma once

// Random instance generators shared by the scheduler and acceptance suites.

#include <map>
#include <string>
#include <vector>

#include "ahc/model.hpp"
#include "ahc/scheduler.hpp"
#include "ahc/util.hpp"

namespace gen {

struct SchedulerInstance {
  ahc::TaskGraph graph;
  std::vector<ahc::NodeSpec> nodes;
  std::map<std::string, double> bandwidths;  // per node, from the source
  ahc::AllocationParams params;
};

inline SchedulerInstance random_scheduler_instance(ahc::Rng& rng, int max_tasks = 6,
                                                   int max_nodes = 5) {
  SchedulerInstance inst;
  const int n_tasks = static_cast<int>(rng.uniform_int(0, max_tasks));
  const int n_nodes = static_cast<int>(rng.uniform_int(1, max_nodes));

  for (int i = 0; i < n_tasks; ++i) {
    ahc::TaskSpec t;
    t.id = "t" + std::to_string(i);
    t.size = rng.uniform(1, 500);
    t.input_data = rng.uniform(0, 3000);
    t.output_data = rng.uniform(0, 1500);
    t.deadline = rng.uniform(0.05, 20);
    t.real_time = rng.next_bool();
    inst.graph.tasks.push_back(std::move(t));
  }
  // Forward edges only, so the graph stays acyclic.
  for (int a = 0; a < n_tasks; ++a)
    for (int b = a + 1; b < n_tasks; ++b)
      if (rng.next_double() < 0.3)
        inst.graph.edges.emplace_back("t" + std::to_string(a), "t" + std::to_string(b));

  for (int i = 0; i < n_nodes; ++i) {
    ahc::NodeSpec n;
    n.id = "n" + std::to_string(i);
    n.processing_power = rng.uniform(20, 16000);
    n.available_energy = rng.uniform(0, 80);
    n.proc_energy_rate = rng.uniform(0, 5);
    n.tx_energy_per_packet = rng.uniform(0, 0.01);
    n.radio_range = 200;
    n.go_intent = static_cast<int>(rng.uniform_int(0, 15));
    inst.nodes.push_back(std::move(n));
    inst.bandwidths[inst.nodes.back().id] = rng.uniform(5, 250);
  }

  inst.params.source_node = inst.nodes[rng.uniform_int(0, n_nodes - 1)].id;
  inst.params.packet_size = rng.uniform(0.5, 4);
  inst.params.energy_threshold = rng.uniform(0, 5);
  inst.params.static_energy = rng.next_bool();
  return inst;
}

inline ahc::BandwidthFn bandwidth_fn(const SchedulerInstance& inst) {
  return [&inst](const ahc::NodeId& id) -> std::optional<double> {
    auto it = inst.bandwidths.find(id);
    if (it == inst.bandwidths.end()) return std::nullopt;
    return it->second;
  };
}

}  // namespace gen
