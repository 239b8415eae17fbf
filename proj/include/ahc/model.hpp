#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <queue>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace ahc {

using NodeId = std::string;
using TaskId = std::string;

// Thrown when a domain object violates one of its invariants. The message
// names the offending field path.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// A mobile device: compute rate, battery, energy coefficients, placement.
// processing_power is in work-units (mega-instructions) per second; the
// scenario reference documents the clock-rate-times-cores convention used
// to derive it from a device's CPU spec.
struct NodeSpec {
  NodeId id;
  double processing_power = 0.0;    // work-units per second
  double available_energy = 0.0;    // joules
  double proc_energy_rate = 0.0;    // joules per second of computation
  double tx_energy_per_packet = 0.0;  // joules per transmitted packet
  double x = 0.0;                   // meters
  double y = 0.0;                   // meters
  double radio_range = 0.0;         // meters
  int go_intent = 0;                // 0..15

  bool operator==(const NodeSpec&) const = default;
};

// One unit of workload. Data sizes are kilobytes, deadline is seconds
// measured against the task's own estimated execution time.
struct TaskSpec {
  TaskId id;
  double size = 0.0;         // work-units
  double input_data = 0.0;   // KB
  double output_data = 0.0;  // KB
  double deadline = 0.0;     // seconds
  bool real_time = false;

  bool operator==(const TaskSpec&) const = default;
};

struct TaskGraph {
  std::vector<TaskSpec> tasks;
  std::vector<std::pair<TaskId, TaskId>> edges;  // (predecessor, successor)

  bool operator==(const TaskGraph&) const = default;

  std::optional<std::size_t> index_of(const TaskId& id) const {
    for (std::size_t i = 0; i < tasks.size(); ++i)
      if (tasks[i].id == id) return i;
    return std::nullopt;
  }

  std::vector<std::size_t> predecessors(std::size_t task_index) const {
    std::vector<std::size_t> out;
    for (const auto& [p, s] : edges)
      if (s == tasks[task_index].id) out.push_back(*index_of(p));
    return out;
  }

  std::vector<std::size_t> successors(std::size_t task_index) const {
    std::vector<std::size_t> out;
    for (const auto& [p, s] : edges)
      if (p == tasks[task_index].id) out.push_back(*index_of(s));
    return out;
  }

  // Kahn's algorithm; nullopt when the edge set contains a cycle.
  std::optional<std::vector<std::size_t>> topological_order() const {
    std::vector<std::size_t> indegree(tasks.size(), 0);
    for (const auto& [p, s] : edges) {
      auto si = index_of(s);
      if (!si) return std::nullopt;
      ++indegree[*si];
    }
    std::queue<std::size_t> ready;
    for (std::size_t i = 0; i < tasks.size(); ++i)
      if (indegree[i] == 0) ready.push(i);
    std::vector<std::size_t> order;
    while (!ready.empty()) {
      std::size_t i = ready.front();
      ready.pop();
      order.push_back(i);
      for (std::size_t s : successors(i))
        if (--indegree[s] == 0) ready.push(s);
    }
    if (order.size() != tasks.size()) return std::nullopt;
    return order;
  }
};

// A direct radio link. Bandwidth is megabits per second (1 KB = 8 kilobits,
// 1 Mbps = 1000 kilobits/s); latency is seconds per hop.
struct LinkSpec {
  NodeId a;
  NodeId b;
  double bandwidth = 0.0;  // Mbps
  double latency = 0.0;    // s

  bool operator==(const LinkSpec&) const = default;
};

// Explicit group assignment: owner plus clients. A bridge node may appear
// as a client in at most two groups.
struct GroupSpec {
  NodeId owner;
  std::vector<NodeId> clients;

  bool operator==(const GroupSpec&) const = default;
};

// Optional timed perturbations, relative to workload release.
struct ScenarioEvent {
  enum class Kind { node_down, move };
  double time = 0.0;
  Kind kind = Kind::node_down;
  NodeId node;
  double x = 0.0;
  double y = 0.0;

  bool operator==(const ScenarioEvent&) const = default;
};

// Complete experiment description.
struct Scenario {
  std::vector<NodeSpec> nodes;
  std::vector<LinkSpec> links;    // overrides for specific pairs
  std::vector<GroupSpec> groups;  // empty: discovery-driven formation
  TaskGraph workload;
  NodeId source_node;

  double packet_size = 1.5;       // KB
  double energy_threshold = 0.0;  // J
  std::uint64_t rng_seed = 1;

  double discovery_period = 1.0;   // s
  int ttl = 16;                    // hop budget for data frames
  double entry_timeout = 3.0;      // s; default 3 x discovery_period
  double default_bandwidth = 250;  // Mbps
  double default_latency = 0.002;  // s per hop
  double scan_duration = 0.125;    // s before the find phase
  double path_loss_exponent = 2.0;
  bool static_energy = false;      // disable allocator energy bookkeeping

  // Workload provenance, kept so the canonical writer can reproduce the
  // file. Empty profile_name means the task table is inline.
  std::string profile_name;
  double input_mb = 0.0;

  std::vector<ScenarioEvent> events;

  bool operator==(const Scenario&) const = default;

  const NodeSpec* find_node(const NodeId& id) const {
    for (const auto& n : nodes)
      if (n.id == id) return &n;
    return nullptr;
  }
};

namespace detail {
inline void require(bool ok, const std::string& msg) {
  if (!ok) throw ValidationError(msg);
}
}  // namespace detail

inline void validate_node(const NodeSpec& n, const std::string& path) {
  using detail::require;
  require(!n.id.empty(), path + ".id: empty");
  require(n.processing_power > 0, path + ".processing_power: must be > 0");
  require(n.radio_range > 0, path + ".radio_range: must be > 0");
  require(n.proc_energy_rate >= 0, path + ".proc_energy_rate: must be >= 0");
  require(n.tx_energy_per_packet >= 0, path + ".tx_energy_per_packet: must be >= 0");
  require(n.available_energy >= 0, path + ".available_energy: must be >= 0");
  require(n.go_intent >= 0 && n.go_intent <= 15, path + ".go_intent: must be in [0, 15]");
}

inline void validate_task(const TaskSpec& t, const std::string& path) {
  using detail::require;
  require(!t.id.empty(), path + ".id: empty");
  require(t.size > 0, path + ".size: must be > 0");
  require(t.input_data >= 0, path + ".input_data: must be >= 0");
  require(t.output_data >= 0, path + ".output_data: must be >= 0");
  require(t.deadline > 0, path + ".deadline: must be > 0");
}

inline void validate_link(const LinkSpec& l, const std::string& path) {
  using detail::require;
  require(l.a != l.b, path + ".endpoints: must be distinct");
  require(l.bandwidth > 0, path + ".bandwidth: must be > 0");
  require(l.latency >= 0, path + ".latency: must be >= 0");
}

inline void validate_graph(const TaskGraph& g, const std::string& path) {
  using detail::require;
  std::set<TaskId> ids;
  for (std::size_t i = 0; i < g.tasks.size(); ++i) {
    const std::string tp = path + ".tasks[" + std::to_string(i) + "]";
    validate_task(g.tasks[i], tp);
    require(ids.insert(g.tasks[i].id).second, tp + ".id: duplicate '" + g.tasks[i].id + "'");
  }
  for (std::size_t i = 0; i < g.edges.size(); ++i) {
    const auto& [p, s] = g.edges[i];
    const std::string ep = path + ".edges[" + std::to_string(i) + "]";
    require(ids.count(p) != 0, ep + ": unknown task '" + p + "'");
    require(ids.count(s) != 0, ep + ": unknown task '" + s + "'");
    require(p != s, ep + ": self edge on '" + p + "'");
  }
  require(g.topological_order().has_value(), path + ".edges: cycle detected");
}

// Returns its argument unchanged when every invariant holds; throws
// ValidationError naming the first violated field otherwise.
inline const Scenario& validate_scenario(const Scenario& s) {
  using detail::require;
  require(!s.nodes.empty(), "nodes: empty");
  std::set<NodeId> ids;
  for (std::size_t i = 0; i < s.nodes.size(); ++i) {
    const std::string path = "nodes[" + std::to_string(i) + "]";
    validate_node(s.nodes[i], path);
    require(ids.insert(s.nodes[i].id).second,
            path + ".id: duplicate '" + s.nodes[i].id + "'");
  }
  for (std::size_t i = 0; i < s.links.size(); ++i) {
    const std::string path = "links[" + std::to_string(i) + "]";
    validate_link(s.links[i], path);
    require(ids.count(s.links[i].a) != 0, path + ".a: unknown node '" + s.links[i].a + "'");
    require(ids.count(s.links[i].b) != 0, path + ".b: unknown node '" + s.links[i].b + "'");
  }
  std::map<NodeId, int> group_membership;
  for (std::size_t i = 0; i < s.groups.size(); ++i) {
    const std::string path = "groups[" + std::to_string(i) + "]";
    const auto& g = s.groups[i];
    require(ids.count(g.owner) != 0, path + ".owner: unknown node '" + g.owner + "'");
    ++group_membership[g.owner];
    std::set<NodeId> members{g.owner};
    for (const auto& c : g.clients) {
      require(ids.count(c) != 0, path + ".clients: unknown node '" + c + "'");
      require(members.insert(c).second, path + ".clients: duplicate member '" + c + "'");
      ++group_membership[c];
    }
  }
  for (const auto& [id, count] : group_membership)
    require(count <= 2, "groups: node '" + id + "' appears in more than 2 groups");
  validate_graph(s.workload, "workload");
  require(ids.count(s.source_node) != 0,
          "source_node: unknown node '" + s.source_node + "'");
  require(s.packet_size > 0, "packet_size: must be > 0");
  require(s.energy_threshold >= 0, "energy_threshold: must be >= 0");
  require(s.discovery_period > 0, "discovery_period: must be > 0");
  require(s.ttl >= 1, "ttl: must be >= 1");
  require(s.entry_timeout > 0, "entry_timeout: must be > 0");
  require(s.default_bandwidth > 0, "default_bandwidth: must be > 0");
  require(s.default_latency >= 0, "default_latency: must be >= 0");
  require(s.scan_duration >= 0, "scan_duration: must be >= 0");
  require(s.path_loss_exponent > 0, "path_loss_exponent: must be > 0");
  for (std::size_t i = 0; i < s.events.size(); ++i) {
    const std::string path = "events[" + std::to_string(i) + "]";
    require(s.events[i].time >= 0, path + ".time: must be >= 0");
    require(ids.count(s.events[i].node) != 0,
            path + ".node: unknown node '" + s.events[i].node + "'");
  }
  return s;
}

inline double distance(const NodeSpec& a, const NodeSpec& b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return std::sqrt(dx * dx + dy * dy);
}

inline bool in_radio_range(const NodeSpec& a, const NodeSpec& b) {
  const double d = distance(a, b);
  return d <= a.radio_range && d <= b.radio_range;
}

}  // namespace ahc
