#pragma once

// Independent test oracles. These deliberately re-derive behavior from the
// definitions (brute force, BFS, DFS) and share no code with the library
// implementations they check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "ahc/model.hpp"
#include "ahc/scheduler.hpp"

namespace oracle {

// Brute-force replay of the greedy allocation semantics: same task order,
// full scan over nodes with a running best candidate, explicit filters.
// Refuses instances beyond the exhaustive bound.
inline ahc::Assignment oracle_allocate(const ahc::TaskGraph& graph,
                                       const std::vector<ahc::NodeSpec>& nodes,
                                       const ahc::BandwidthFn& bandwidth_of,
                                       const ahc::AllocationParams& params) {
  if (graph.tasks.size() > 8 || nodes.size() > 6)
    throw std::invalid_argument("oracle_allocate: instance too large");

  // Task order: repeatedly scan for the unemitted task whose predecessors
  // are all emitted, with the smallest (deadline, id).
  std::vector<std::size_t> order;
  std::set<std::string> emitted;
  while (order.size() < graph.tasks.size()) {
    std::optional<std::size_t> pick;
    for (std::size_t i = 0; i < graph.tasks.size(); ++i) {
      if (emitted.count(graph.tasks[i].id)) continue;
      bool ready = true;
      for (const auto& [p, s] : graph.edges)
        if (s == graph.tasks[i].id && !emitted.count(p)) ready = false;
      if (!ready) continue;
      if (!pick) {
        pick = i;
        continue;
      }
      const auto& cand = graph.tasks[i];
      const auto& best = graph.tasks[*pick];
      if (cand.deadline < best.deadline ||
          (cand.deadline == best.deadline && cand.id < best.id))
        pick = i;
    }
    if (!pick) throw std::logic_error("oracle_allocate: cycle in task graph");
    emitted.insert(graph.tasks[*pick].id);
    order.push_back(*pick);
  }

  std::map<std::string, double> battery;
  for (const auto& n : nodes) battery[n.id] = n.available_energy;

  ahc::Assignment result;
  for (std::size_t idx : order) {
    const ahc::TaskSpec& task = graph.tasks[idx];
    const ahc::NodeSpec* chosen = nullptr;
    double chosen_time = 0.0;
    double chosen_energy = 0.0;
    bool deadline_ok_somewhere = false;

    for (const auto& node : nodes) {
      // Estimated execution time, written out from the definitions.
      double transfer = 0.0;
      if (node.id != params.source_node) {
        auto bw = bandwidth_of(node.id);
        if (!bw) continue;
        transfer = (task.input_data * 8.0 / 1000.0 + task.output_data * 8.0 / 1000.0) / *bw;
      }
      const double exec_time = task.size / node.processing_power + transfer;
      if (exec_time > task.deadline) continue;
      deadline_ok_somewhere = true;

      const double packets = std::ceil(task.input_data / params.packet_size) +
                             std::ceil(task.output_data / params.packet_size);
      const double energy = node.proc_energy_rate * task.size / node.processing_power +
                            node.tx_energy_per_packet * packets;
      if (battery[node.id] <= params.energy_threshold) continue;
      if (battery[node.id] < energy) continue;

      bool take = false;
      if (chosen == nullptr) take = true;
      else if (energy < chosen_energy) take = true;
      else if (energy == chosen_energy && exec_time < chosen_time) take = true;
      else if (energy == chosen_energy && exec_time == chosen_time && node.id < chosen->id)
        take = true;
      if (take) {
        chosen = &node;
        chosen_time = exec_time;
        chosen_energy = energy;
      }
    }

    if (chosen == nullptr) {
      result.unassigned.push_back({task.id, deadline_ok_somewhere ? "energy" : "deadline"});
    } else {
      result.assigned[task.id] = {chosen->id, chosen_time, chosen_energy};
      if (!params.static_energy) battery[chosen->id] -= chosen_energy;
    }
  }
  return result;
}

// Equivalence comparison for allocator-vs-oracle checks: node choices and
// rejection reasons must match exactly; the independently computed cost
// values may differ by floating-point association only.
inline bool assignments_equivalent(const ahc::Assignment& got, const ahc::Assignment& want,
                                   std::string* why = nullptr) {
  auto fail = [&](const std::string& msg) {
    if (why) *why = msg;
    return false;
  };
  if (got.assigned.size() != want.assigned.size()) return fail("assigned-size mismatch");
  for (const auto& [id, w] : want.assigned) {
    auto it = got.assigned.find(id);
    if (it == got.assigned.end()) return fail("missing assignment for " + id);
    if (it->second.node != w.node)
      return fail("task " + id + ": node " + it->second.node + " vs " + w.node);
    const double t_tol = 1e-9 * std::max(1.0, std::abs(w.estimated_time));
    const double e_tol = 1e-9 * std::max(1.0, std::abs(w.estimated_energy));
    if (std::abs(it->second.estimated_time - w.estimated_time) > t_tol)
      return fail("task " + id + ": time estimate drift");
    if (std::abs(it->second.estimated_energy - w.estimated_energy) > e_tol)
      return fail("task " + id + ": energy estimate drift");
  }
  if (got.unassigned.size() != want.unassigned.size()) return fail("unassigned-size mismatch");
  for (std::size_t i = 0; i < want.unassigned.size(); ++i) {
    if (got.unassigned[i].task != want.unassigned[i].task ||
        got.unassigned[i].reason != want.unassigned[i].reason)
      return fail("unassigned row " + std::to_string(i) + " differs");
  }
  return true;
}

// Breadth-first hop distances over an undirected adjacency list.
inline std::map<std::string, int> bfs_distances(
    const std::map<std::string, std::set<std::string>>& adj, const std::string& start) {
  std::map<std::string, int> dist{{start, 0}};
  std::deque<std::string> queue{start};
  while (!queue.empty()) {
    const std::string cur = queue.front();
    queue.pop_front();
    auto it = adj.find(cur);
    if (it == adj.end()) continue;
    for (const auto& nbr : it->second) {
      if (dist.count(nbr)) continue;
      dist[nbr] = dist[cur] + 1;
      queue.push_back(nbr);
    }
  }
  return dist;
}

inline int graph_diameter(const std::map<std::string, std::set<std::string>>& adj) {
  int diameter = 0;
  for (const auto& [start, ignored] : adj) {
    for (const auto& [node, d] : bfs_distances(adj, start)) diameter = std::max(diameter, d);
  }
  return diameter;
}

// DFS three-color cycle detection, independent of Kahn's algorithm.
inline bool has_cycle(const ahc::TaskGraph& g) {
  std::map<std::string, std::vector<std::string>> next;
  for (const auto& [p, s] : g.edges) next[p].push_back(s);
  std::map<std::string, int> color;  // 0 white, 1 gray, 2 black
  bool cyclic = false;
  std::function<void(const std::string&)> visit = [&](const std::string& u) {
    color[u] = 1;
    for (const auto& v : next[u]) {
      if (color[v] == 1) cyclic = true;
      else if (color[v] == 0) visit(v);
      if (cyclic) return;
    }
    color[u] = 2;
  };
  for (const auto& t : g.tasks) {
    if (color[t.id] == 0) visit(t.id);
    if (cyclic) return true;
  }
  return false;
}

}  // namespace oracle
