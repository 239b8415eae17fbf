#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ahc/cost.hpp"
#include "ahc/model.hpp"

namespace ahc {

// Two-step allocation: filter nodes by deadline and energy, then pick the
// candidate with minimum estimated energy (ties: lower estimated execution
// time, then lower node id).

struct TaskAssignment {
  NodeId node;
  double estimated_time = 0.0;    // s
  double estimated_energy = 0.0;  // J
  bool operator==(const TaskAssignment&) const = default;
};

struct UnassignedTask {
  TaskId task;
  std::string reason;  // "deadline" or "energy"
  bool operator==(const UnassignedTask&) const = default;
};

struct Assignment {
  std::map<TaskId, TaskAssignment> assigned;
  std::vector<UnassignedTask> unassigned;

  bool operator==(const Assignment&) const = default;

  double total_energy() const {
    double sum = 0.0;
    for (const auto& [id, a] : assigned) sum += a.estimated_energy;
    return sum;
  }
};

// Bottleneck bandwidth (Mbps) of the route from the data source to a node;
// nullopt marks an unreachable node.
using BandwidthFn = std::function<std::optional<double>(const NodeId&)>;

struct AllocationParams {
  NodeId source_node;       // executes with zero transfer time
  double packet_size = 1.5; // KB
  double energy_threshold = 0.0;
  bool static_energy = false;  // skip per-task energy bookkeeping
};

// Topological order; among ready tasks, earliest deadline first, ties by id.
inline std::vector<std::size_t> sort_tasks(const TaskGraph& graph) {
  const std::size_t n = graph.tasks.size();
  std::vector<int> indegree(n, 0);
  for (const auto& [p, s] : graph.edges) ++indegree[*graph.index_of(s)];

  auto later = [&](std::size_t a, std::size_t b) {
    const auto& ta = graph.tasks[a];
    const auto& tb = graph.tasks[b];
    if (ta.deadline != tb.deadline) return ta.deadline > tb.deadline;
    return ta.id > tb.id;
  };
  std::priority_queue<std::size_t, std::vector<std::size_t>, decltype(later)> ready(later);
  for (std::size_t i = 0; i < n; ++i)
    if (indegree[i] == 0) ready.push(i);

  std::vector<std::size_t> order;
  order.reserve(n);
  while (!ready.empty()) {
    std::size_t i = ready.top();
    ready.pop();
    order.push_back(i);
    for (std::size_t s : graph.successors(i))
      if (--indegree[s] == 0) ready.push(s);
  }
  return order;  // cycles are rejected by validation upstream
}

inline double estimate_time_on(const TaskSpec& task, const NodeSpec& node,
                               const AllocationParams& params, double bandwidth_mbps) {
  const double dtt = node.id == params.source_node
                         ? 0.0
                         : data_transfer_time(task.input_data, task.output_data, bandwidth_mbps);
  return execution_time_estimate(task, node, dtt);
}

// Step 1 of the allocation scheme: nodes whose estimated execution time
// meets the deadline and whose battery clears both the threshold and the
// estimated energy draw. `energies` carries current (possibly decremented)
// levels keyed by node id.
inline std::vector<NodeId> feasible_nodes(const TaskSpec& task,
                                          const std::vector<NodeSpec>& nodes,
                                          const BandwidthFn& bandwidth_of,
                                          const AllocationParams& params,
                                          const std::map<NodeId, double>& energies) {
  std::vector<NodeId> out;
  for (const auto& node : nodes) {
    std::optional<double> bw =
        node.id == params.source_node ? std::optional<double>(1.0) : bandwidth_of(node.id);
    if (!bw) continue;  // unreachable
    const double ee = estimate_time_on(task, node, params, *bw);
    if (ee > task.deadline) continue;
    const double eec = energy_estimate(task, node, params.packet_size);
    const double avail = energies.at(node.id);
    if (avail <= params.energy_threshold || avail < eec) continue;
    out.push_back(node.id);
  }
  return out;
}

// Full pass over the sorted task list. Tasks with an empty candidate set are
// reported, not thrown: reason is "energy" when at least one node met the
// deadline but failed an energy check, "deadline" otherwise.
inline Assignment allocate(const TaskGraph& graph, const std::vector<NodeSpec>& nodes,
                           const BandwidthFn& bandwidth_of, const AllocationParams& params) {
  Assignment result;
  std::map<NodeId, double> energies;
  std::map<NodeId, const NodeSpec*> by_id;
  for (const auto& n : nodes) {
    energies[n.id] = n.available_energy;
    by_id[n.id] = &n;
  }

  for (std::size_t idx : sort_tasks(graph)) {
    const TaskSpec& task = graph.tasks[idx];
    const NodeSpec* best = nullptr;
    double best_eec = 0.0;
    double best_ee = 0.0;
    bool any_deadline_ok = false;

    for (const auto& node : nodes) {
      std::optional<double> bw =
          node.id == params.source_node ? std::optional<double>(1.0) : bandwidth_of(node.id);
      if (!bw) continue;
      const double ee = estimate_time_on(task, node, params, *bw);
      if (ee > task.deadline) continue;
      any_deadline_ok = true;
      const double eec = energy_estimate(task, node, params.packet_size);
      const double avail = energies.at(node.id);
      if (avail <= params.energy_threshold || avail < eec) continue;
      const bool better = best == nullptr || eec < best_eec ||
                          (eec == best_eec && ee < best_ee) ||
                          (eec == best_eec && ee == best_ee && node.id < best->id);
      if (better) {
        best = &node;
        best_eec = eec;
        best_ee = ee;
      }
    }

    if (best == nullptr) {
      result.unassigned.push_back({task.id, any_deadline_ok ? "energy" : "deadline"});
      continue;
    }
    result.assigned[task.id] = {best->id, best_ee, best_eec};
    if (!params.static_energy) energies[best->id] -= best_eec;
  }
  return result;
}

}  // namespace ahc
