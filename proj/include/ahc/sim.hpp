#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <queue>
#include <set>
#include <string>
#include <vector>

#include "ahc/cost.hpp"
#include "ahc/group.hpp"
#include "ahc/model.hpp"
#include "ahc/routing.hpp"
#include "ahc/scheduler.hpp"
#include "ahc/trace.hpp"
#include "ahc/util.hpp"

namespace ahc {

// Deterministic discrete-event engine. Events run in (time, sequence)
// order; sequence is the insertion counter, so equal-time events run in
// the order they were scheduled.

enum class EventKind { timer, message_delivery, task_start, task_complete, transfer_complete };

class Engine {
 public:
  struct Event {
    double time = 0.0;
    std::uint64_t sequence = 0;
    EventKind kind = EventKind::timer;
    std::function<void()> fn;
  };

  double now() const { return now_; }
  std::size_t pending() const { return queue_.size(); }

  void schedule(double time, EventKind kind, std::function<void()> fn) {
    if (time < now_)
      throw std::logic_error("engine: event scheduled in the past");
    queue_.push(std::make_shared<Event>(Event{time, next_sequence_++, kind, std::move(fn)}));
  }

  // Process all events with time <= t_end, then settle the clock at t_end.
  void run_until(double t_end) {
    if (t_end < now_) throw std::logic_error("engine: run_until into the past");
    while (!queue_.empty() && queue_.top()->time <= t_end) {
      auto ev = queue_.top();
      queue_.pop();
      now_ = ev->time;
      ev->fn();
    }
    now_ = t_end;
  }

  void run_all() {
    while (!queue_.empty()) {
      auto ev = queue_.top();
      queue_.pop();
      now_ = ev->time;
      ev->fn();
    }
  }

 private:
  struct Later {
    bool operator()(const std::shared_ptr<Event>& a, const std::shared_ptr<Event>& b) const {
      if (a->time != b->time) return a->time > b->time;
      return a->sequence > b->sequence;
    }
  };
  double now_ = 0.0;
  std::uint64_t next_sequence_ = 0;
  std::priority_queue<std::shared_ptr<Event>, std::vector<std::shared_ptr<Event>>, Later> queue_;
};

// Per-task outcome row.
struct TaskResult {
  TaskId task;
  NodeId node;                 // empty when unassigned
  std::string state;           // completed | failed | unassigned
  std::string detail;          // failure or rejection reason
  double start = 0.0;          // dispatch instant (first input byte moves)
  double end = 0.0;            // completion (leaf: result returned to source)
  double estimated = 0.0;      // scheduler's execution-time estimate
  double measured = 0.0;       // end - start
};

struct NodeEnergyReport {
  NodeId node;
  double compute_j = 0.0;
  double tx_j = 0.0;     // frames originated here
  double relay_j = 0.0;  // frames forwarded for others
  double remaining_j = 0.0;
};

struct PacketCounters {
  long long sent = 0;
  long long forwarded = 0;
  long long dropped = 0;
};

struct MetricsReport {
  bool infeasible = false;  // at least one task had no feasible node
  double makespan = 0.0;
  double baseline_makespan = 0.0;
  double release_time = 0.0;
  std::vector<TaskResult> per_task;
  std::vector<NodeEnergyReport> per_node;
  PacketCounters packets;
  Assignment assignment;

  double improvement_percent() const {
    if (baseline_makespan <= 0.0) return 0.0;
    return (baseline_makespan - makespan) / baseline_makespan * 100.0;
  }
};

struct SimOptions {
  bool trace = true;
  bool compute_baseline = true;
  // Force every task onto the source node with zero transfer; used for the
  // single-node baseline replay.
  bool force_single_node = false;
};

// Binds group formation, the routing mesh and the allocator into one
// engine-driven run.
class NetworkSim {
 public:
  NetworkSim(Scenario scenario, SimOptions opts = {})
      : scenario_(std::move(scenario)), opts_(opts), trace_(opts.trace) {
    validate_scenario(scenario_);
  }

  const TraceLog& trace() const { return trace_; }
  TraceLog& trace() { return trace_; }
  Engine& engine() { return engine_; }
  RoutingMesh& mesh() { return mesh_; }
  const std::vector<Group>& groups() const { return groups_; }
  double release_time() const { return release_; }

  // Formation + routing convergence; afterwards the mesh answers route
  // queries and send_payload may be used directly.
  void prepare() {
    for (const auto& n : scenario_.nodes) {
      NodeRt rt;
      rt.spec = n;
      rt.energy = n.available_energy;
      nodes_.emplace(n.id, std::move(rt));
    }

    FormationResult formed = form_groups(scenario_, trace_);
    groups_ = std::move(formed.groups);
    const double t0 = formed.end_time;
    engine_.run_until(t0);

    for (const auto& n : scenario_.nodes) mesh_.add_node(n.id, n.x, n.y);
    mesh_.set_entry_timeout(scenario_.entry_timeout);
    mesh_.set_path_loss_exponent(scenario_.path_loss_exponent);
    for (const auto& g : groups_)
      for (const auto& c : g.clients) add_group_link(g.owner, c);

    const int diameter = topology_diameter();
    const int rounds = std::max(1, 2 * diameter);
    for (int k = 0; k < rounds; ++k) {
      const double t = t0 + k * scenario_.discovery_period;
      engine_.run_until(t);
      mesh_.run_discovery_round(t, trace_.enabled() ? &trace_ : nullptr);
    }
    release_ = t0 + rounds * scenario_.discovery_period;
    engine_.run_until(release_);
    next_round_ = release_;
  }

  // Full pipeline: formation, convergence, allocation, execution, metrics.
  MetricsReport run() {
    prepare();
    allocate_tasks();
    schedule_scenario_events();
    dispatch_roots();
    drain();
    return finalize();
  }

  // Application-level send along the routing layer. Opens the connection on
  // first use; the callback reports delivery or failure.
  void send_payload(const NodeId& from, const NodeId& to, double payload_kb,
                    TrafficClass cls, std::function<void(bool, const std::string&)> done,
                    const std::string& tag = "payload") {
    start_transfer(from, to, payload_kb, cls, tag, std::move(done));
  }

  // Run engine + periodic discovery until transfers and tasks settle.
  void drain() {
    while (true) {
      engine_.run_until(next_round_);
      if (settled()) break;
      mesh_.run_discovery_round(next_round_, trace_.enabled() ? &trace_ : nullptr);
      for (const auto& [a, b] : connections_.maintain(mesh_, next_round_))
        trace_.emit(next_round_, a, "conn_degraded", {{"peer", b}});
      next_round_ += scenario_.discovery_period;
      if (next_round_ > release_ + 1e7)
        throw std::logic_error("sim: workload failed to settle");
    }
  }

  ConnectionManager& connections() { return connections_; }

 private:
  struct NodeRt {
    NodeSpec spec;
    double energy = 0.0;
    bool down = false;
    bool exhausted = false;
    bool busy = false;
    double compute_j = 0.0;
    double tx_j = 0.0;
    double relay_j = 0.0;
    std::deque<std::size_t> fifo;  // ready task indices
  };

  struct TaskRt {
    std::string state = "pending";  // pending | running | completed | failed | unassigned
    std::string detail;
    NodeId node;
    int pending_inputs = 0;
    bool dispatched = false;
    double dispatch_time = -1.0;
    double complete_time = -1.0;  // compute completion
    double end_time = -1.0;       // after leaf return
    double estimated = 0.0;
  };

  struct Transfer {
    int id = 0;
    NodeId origin;
    NodeId dest;
    double payload_kb = 0.0;
    double packet_kb = 1.5;
    int frames = 0;
    std::vector<NodeId> path;
    TrafficClass cls = TrafficClass::real_time;
    std::string tag;
    bool failed = false;
    bool finished = false;
    std::function<void(bool, const std::string&)> done;
  };

  void add_group_link(const NodeId& a, const NodeId& b) {
    double bw = scenario_.default_bandwidth;
    double lat = scenario_.default_latency;
    for (const auto& l : scenario_.links) {
      if ((l.a == a && l.b == b) || (l.a == b && l.b == a)) {
        bw = l.bandwidth;
        lat = l.latency;
        break;
      }
    }
    mesh_.add_link(a, b, bw, lat);
  }

  int topology_diameter() const {
    const auto ids = mesh_.node_ids();
    int diameter = 0;
    for (const auto& start : ids) {
      std::map<NodeId, int> dist{{start, 0}};
      std::deque<NodeId> queue{start};
      while (!queue.empty()) {
        NodeId cur = queue.front();
        queue.pop_front();
        for (const auto& nbr : mesh_.neighbors(cur)) {
          if (dist.count(nbr)) continue;
          dist[nbr] = dist[cur] + 1;
          queue.push_back(nbr);
        }
      }
      for (const auto& [id, d] : dist) diameter = std::max(diameter, d);
    }
    return diameter;
  }

  void allocate_tasks() {
    task_rt_.assign(scenario_.workload.tasks.size(), TaskRt{});
    order_ = sort_tasks(scenario_.workload);

    if (opts_.force_single_node) {
      for (std::size_t i = 0; i < scenario_.workload.tasks.size(); ++i) {
        const auto& t = scenario_.workload.tasks[i];
        const NodeSpec& src = *scenario_.find_node(scenario_.source_node);
        task_rt_[i].node = scenario_.source_node;
        task_rt_[i].estimated = t.size / src.processing_power;
        assignment_.assigned[t.id] = {scenario_.source_node, task_rt_[i].estimated,
                                      energy_estimate(t, src, scenario_.packet_size)};
      }
    } else {
      AllocationParams params;
      params.source_node = scenario_.source_node;
      params.packet_size = scenario_.packet_size;
      params.energy_threshold = scenario_.energy_threshold;
      params.static_energy = scenario_.static_energy;
      const auto& source_router = mesh_.router(scenario_.source_node);
      BandwidthFn bandwidth_of = [&](const NodeId& id) -> std::optional<double> {
        const RoutingTableEntry* e = source_router.find(id);
        if (e == nullptr) return std::nullopt;
        return e->available_bandwidth;
      };
      assignment_ = allocate(scenario_.workload, scenario_.nodes, bandwidth_of, params);
      for (std::size_t i = 0; i < scenario_.workload.tasks.size(); ++i) {
        const auto& t = scenario_.workload.tasks[i];
        auto it = assignment_.assigned.find(t.id);
        if (it != assignment_.assigned.end()) {
          task_rt_[i].node = it->second.node;
          task_rt_[i].estimated = it->second.estimated_time;
        }
      }
    }

    for (const auto& u : assignment_.unassigned) {
      const std::size_t i = *scenario_.workload.index_of(u.task);
      task_rt_[i].state = "unassigned";
      task_rt_[i].detail = u.reason;
      trace_.emit(release_, "-", "unassigned", {{"task", u.task}, {"reason", u.reason}});
    }
    for (const auto& [id, a] : assignment_.assigned)
      trace_.emit(release_, a.node, "assign",
                  {{"task", id},
                   {"ee", format_fixed(a.estimated_time)},
                   {"eec", format_fixed(a.estimated_energy)}});
    for (const auto& [p, s] : scenario_.workload.edges)
      trace_.emit(release_, "-", "dag_edge", {{"pred", p}, {"succ", s}});

    // Tasks below an unassigned or failed ancestor can never run.
    propagate_dead_ancestors();
  }

  void propagate_dead_ancestors() {
    const auto& g = scenario_.workload;
    bool changed = true;
    while (changed) {
      changed = false;
      for (std::size_t i = 0; i < g.tasks.size(); ++i) {
        if (task_rt_[i].state != "pending") continue;
        for (std::size_t p : g.predecessors(i)) {
          const auto& st = task_rt_[p].state;
          if (st == "unassigned" || st == "failed") {
            task_rt_[i].state = "failed";
            task_rt_[i].detail = "predecessor";
            trace_.emit(engine_.now(), task_rt_[i].node.empty() ? "-" : task_rt_[i].node,
                        "task_failed", {{"task", g.tasks[i].id}, {"reason", "predecessor"}});
            changed = true;
            break;
          }
        }
      }
    }
  }

  void schedule_scenario_events() {
    for (const auto& ev : scenario_.events) {
      const double t = release_ + ev.time;
      if (ev.kind == ScenarioEvent::Kind::node_down) {
        engine_.schedule(t, EventKind::timer, [this, ev] { node_down(ev.node); });
      } else {
        engine_.schedule(t, EventKind::timer, [this, ev] {
          mesh_.set_position(ev.node, ev.x, ev.y);
          nodes_.at(ev.node).spec.x = ev.x;
          nodes_.at(ev.node).spec.y = ev.y;
          trace_.emit(engine_.now(), ev.node, "move",
                      {{"x", format_fixed(ev.x)}, {"y", format_fixed(ev.y)}});
        });
      }
    }
  }

  void node_down(const NodeId& id) {
    auto& rt = nodes_.at(id);
    if (rt.down) return;
    rt.down = true;
    mesh_.remove_node(id);
    trace_.emit(engine_.now(), id, "node_down");
    for (std::size_t i = 0; i < task_rt_.size(); ++i) {
      auto& t = task_rt_[i];
      if (t.node == id && (t.state == "pending" || t.state == "running"))
        fail_task(i, "node_down");
    }
  }

  void dispatch_roots() {
    const auto& g = scenario_.workload;
    for (std::size_t pos = 0; pos < order_.size(); ++pos) {
      const std::size_t i = order_[pos];
      if (task_rt_[i].state != "pending") continue;
      task_rt_[i].pending_inputs = static_cast<int>(g.predecessors(i).size());
      if (task_rt_[i].pending_inputs == 0) ++task_rt_[i].pending_inputs;  // root input feed
    }
    for (std::size_t pos = 0; pos < order_.size(); ++pos) {
      const std::size_t i = order_[pos];
      if (task_rt_[i].state != "pending") continue;
      if (!g.predecessors(i).empty()) continue;
      dispatch_input(i, scenario_.source_node, g.tasks[i].input_data, "input");
    }
  }

  // Begin moving one input toward task i's node; marks the dispatch instant.
  void dispatch_input(std::size_t i, const NodeId& from, double kb, const std::string& tag) {
    auto& rt = task_rt_[i];
    const auto& task = scenario_.workload.tasks[i];
    if (!rt.dispatched) {
      rt.dispatched = true;
      rt.dispatch_time = engine_.now();
      trace_.emit(engine_.now(), rt.node, "task_dispatch", {{"task", task.id}});
    }
    start_transfer(from, rt.node, kb,
                   task.real_time ? TrafficClass::real_time : TrafficClass::bulk,
                   tag + ":" + task.id, [this, i](bool ok, const std::string& why) {
                     if (!ok) {
                       fail_task(i, why);
                       return;
                     }
                     input_arrived(i);
                   });
  }

  void input_arrived(std::size_t i) {
    auto& rt = task_rt_[i];
    if (rt.state != "pending") return;
    if (--rt.pending_inputs > 0) return;
    auto& node = nodes_.at(rt.node);
    node.fifo.push_back(i);
    pump_node(rt.node);
  }

  void pump_node(const NodeId& id) {
    auto& node = nodes_.at(id);
    if (node.busy || node.down || node.fifo.empty()) return;
    const std::size_t i = node.fifo.front();
    node.fifo.pop_front();
    if (task_rt_[i].state != "pending") {
      pump_node(id);
      return;
    }
    node.busy = true;
    task_rt_[i].state = "running";
    const auto& task = scenario_.workload.tasks[i];
    const double duration = task.size / node.spec.processing_power;
    trace_.emit(engine_.now(), id, "task_start", {{"task", task.id}});
    engine_.schedule(engine_.now() + duration, EventKind::task_complete,
                     [this, i, id, duration] { complete_task(i, id, duration); });
  }

  void complete_task(std::size_t i, const NodeId& id, double duration) {
    auto& node = nodes_.at(id);
    node.busy = false;
    auto& rt = task_rt_[i];
    const auto& task = scenario_.workload.tasks[i];
    const double joules = node.spec.proc_energy_rate * duration;
    if (node.down) {
      pump_node(id);
      return;  // already failed via node_down
    }
    if (node.energy < joules) {
      node.compute_j += node.energy;
      node.energy = 0.0;
      node.exhausted = true;
      fail_task(i, "exhausted");
      pump_node(id);
      return;
    }
    node.energy -= joules;
    node.compute_j += joules;
    rt.complete_time = engine_.now();
    trace_.emit(engine_.now(), id, "task_complete", {{"task", task.id}});

    const auto succs = scenario_.workload.successors(i);
    if (succs.empty()) {
      // Leaf: results return to the source node.
      if (rt.node == scenario_.source_node || task.output_data <= 0.0) {
        finish_task(i, engine_.now());
      } else {
        start_transfer(rt.node, scenario_.source_node, task.output_data,
                       task.real_time ? TrafficClass::real_time : TrafficClass::bulk,
                       "return:" + task.id, [this, i](bool ok, const std::string& why) {
                         if (!ok)
                           fail_task(i, why);
                         else
                           finish_task(i, engine_.now());
                       });
      }
    } else {
      rt.state = "completed";  // provisional; leaf finish sets end time
      rt.end_time = engine_.now();
      for (std::size_t s : succs) {
        if (task_rt_[s].state != "pending") continue;
        dispatch_input(s, rt.node, task.output_data, "edge:" + task.id);
      }
    }
    pump_node(id);
  }

  void finish_task(std::size_t i, double t) {
    auto& rt = task_rt_[i];
    rt.state = "completed";
    rt.end_time = t;
    const auto& task = scenario_.workload.tasks[i];
    if (rt.node != scenario_.source_node && task.output_data > 0.0)
      trace_.emit(t, scenario_.source_node, "task_return", {{"task", task.id}});
  }

  void fail_task(std::size_t i, const std::string& why) {
    auto& rt = task_rt_[i];
    if (rt.state == "completed" || rt.state == "failed" || rt.state == "unassigned") return;
    rt.state = "failed";
    rt.detail = why;
    trace_.emit(engine_.now(), rt.node.empty() ? "-" : rt.node, "task_failed",
                {{"task", scenario_.workload.tasks[i].id}, {"reason", why}});
    propagate_dead_ancestors();
  }

  // ---- data plane ----

  static std::pair<NodeId, NodeId> link_key(const NodeId& a, const NodeId& b) {
    return a < b ? std::make_pair(a, b) : std::make_pair(b, a);
  }

  void start_transfer(const NodeId& from, const NodeId& to, double payload_kb,
                      TrafficClass cls, const std::string& tag,
                      std::function<void(bool, const std::string&)> done) {
    auto t = std::make_shared<Transfer>();
    t->id = ++next_transfer_;
    t->origin = from;
    t->dest = to;
    t->payload_kb = payload_kb;
    t->packet_kb = scenario_.packet_size;
    t->cls = cls;
    t->tag = tag;
    t->done = std::move(done);
    ++outstanding_;

    if (from == to || payload_kb <= 0.0) {
      trace_.emit(engine_.now(), from, "transfer_start",
                  {{"transfer", std::to_string(t->id)}, {"dst", to},
                   {"kb", format_fixed(payload_kb)}, {"frames", "0"}, {"tag", tag}});
      engine_.schedule(engine_.now(), EventKind::transfer_complete,
                       [this, t] { complete_transfer(t, true, ""); });
      return;
    }

    const auto conn_state = connections_.state(from, to);
    if (conn_state && *conn_state == ConnectionState::terminated) {
      engine_.schedule(engine_.now(), EventKind::transfer_complete,
                       [this, t] { complete_transfer(t, false, "terminated"); });
      return;
    }
    if (!connections_.is_open(from, to)) {
      if (!connections_.open(from, to, mesh_, engine_.now())) {
        trace_.emit(engine_.now(), from, "transfer_start",
                    {{"transfer", std::to_string(t->id)}, {"dst", to},
                     {"kb", format_fixed(payload_kb)}, {"tag", tag}});
        engine_.schedule(engine_.now(), EventKind::transfer_complete,
                         [this, t] { complete_transfer(t, false, "no_route"); });
        return;
      }
      trace_.emit(engine_.now(), from, "conn_open", {{"peer", to}});
    }

    auto route = mesh_.select_route(from, to, cls);
    if (!route) {
      engine_.schedule(engine_.now(), EventKind::transfer_complete,
                       [this, t] { complete_transfer(t, false, "no_route"); });
      return;
    }
    t->path = *route;
    t->frames = static_cast<int>(std::ceil(payload_kb / t->packet_kb));

    std::string path_str = t->path.front();
    for (std::size_t k = 1; k < t->path.size(); ++k) path_str += ">" + t->path[k];
    trace_.emit(engine_.now(), from, "transfer_start",
                {{"transfer", std::to_string(t->id)}, {"dst", to},
                 {"kb", format_fixed(payload_kb)}, {"frames", std::to_string(t->frames)},
                 {"class", cls == TrafficClass::real_time ? "rt" : "bulk"},
                 {"path", path_str}, {"tag", tag}});

    send_frame(t, 0, 0, engine_.now());
  }

  double frame_kb(const Transfer& t, int frame) const {
    if (frame + 1 < t.frames) return t.packet_kb;
    return t.payload_kb - t.packet_kb * (t.frames - 1);
  }

  // Reserve the next link slot for one frame and schedule its transmission.
  void send_frame(const std::shared_ptr<Transfer>& t, int frame, int hop, double ready) {
    if (t->failed || t->finished) return;
    if (hop >= scenario_.ttl) {
      drop_frame(t, frame, t->path[hop], "ttl");
      return;
    }
    const NodeId& sender = t->path[hop];
    const NodeId& next = t->path[hop + 1];
    const LinkState* link = mesh_.link(sender, next);
    if (link == nullptr) {
      drop_frame(t, frame, sender, "no_route");
      return;
    }
    auto key = link_key(sender, next);
    double& free_at = link_free_[key];
    const double start = std::max(ready, free_at);
    const double duration = kb_to_megabits(frame_kb(*t, frame)) / link->bandwidth;
    free_at = start + duration;
    const double latency = link->latency;
    engine_.schedule(start, EventKind::message_delivery, [this, t, frame, hop, start, duration,
                                                          latency] {
      transmit_frame(t, frame, hop, start + duration, latency);
    });
  }

  void transmit_frame(const std::shared_ptr<Transfer>& t, int frame, int hop, double occupancy_end,
                      double latency) {
    if (t->failed || t->finished) return;
    const NodeId& sender = t->path[hop];
    const NodeId& next = t->path[hop + 1];
    auto& rt = nodes_.at(sender);
    if (rt.down || nodes_.at(next).down) {
      drop_frame(t, frame, sender, "node_down");
      return;
    }
    if (rt.energy < rt.spec.tx_energy_per_packet) {
      rt.energy = 0.0;
      rt.exhausted = true;
      drop_frame(t, frame, sender, "exhausted");
      return;
    }
    rt.energy -= rt.spec.tx_energy_per_packet;
    const bool origin_hop = hop == 0;
    if (origin_hop) {
      rt.tx_j += rt.spec.tx_energy_per_packet;
      ++packets_.sent;
      trace_.emit(engine_.now(), sender, "frame_send",
                  {{"transfer", std::to_string(t->id)},
                   {"frame", std::to_string(frame)},
                   {"to", next}});
    } else {
      rt.relay_j += rt.spec.tx_energy_per_packet;
      ++packets_.forwarded;
      trace_.emit(engine_.now(), sender, "frame_relay",
                  {{"transfer", std::to_string(t->id)},
                   {"frame", std::to_string(frame)},
                   {"to", next},
                   {"ttl", std::to_string(scenario_.ttl - hop)}});
    }
    // Pipeline: the next frame takes this link right after this one clears.
    if (origin_hop && frame + 1 < t->frames) {
      engine_.schedule(occupancy_end, EventKind::message_delivery,
                       [this, t, frame] { send_frame(t, frame + 1, 0, engine_.now()); });
    }
    engine_.schedule(occupancy_end + latency, EventKind::message_delivery,
                     [this, t, frame, hop] { frame_arrived(t, frame, hop + 1); });
  }

  void frame_arrived(const std::shared_ptr<Transfer>& t, int frame, int hop) {
    if (t->failed || t->finished) return;
    const NodeId& here = t->path[hop];
    if (nodes_.at(here).down) {
      drop_frame(t, frame, here, "node_down");
      return;
    }
    if (hop + 1 < static_cast<int>(t->path.size())) {
      send_frame(t, frame, hop, engine_.now());
      return;
    }
    trace_.emit(engine_.now(), here, "frame_recv",
                {{"transfer", std::to_string(t->id)},
                 {"frame", std::to_string(frame)},
                 {"from", t->path[hop - 1]}});
    if (frame + 1 == t->frames) {
      trace_.emit(engine_.now(), here, "transfer_done",
                  {{"transfer", std::to_string(t->id)}});
      complete_transfer(t, true, "");
    }
  }

  void drop_frame(const std::shared_ptr<Transfer>& t, int frame, const NodeId& where,
                  const std::string& reason) {
    ++packets_.dropped;
    trace_.emit(engine_.now(), where, "frame_drop",
                {{"transfer", std::to_string(t->id)},
                 {"frame", std::to_string(frame)},
                 {"reason", reason}});
    complete_transfer(t, false, reason == "ttl" ? "ttl_exceeded" : reason);
  }

  void complete_transfer(const std::shared_ptr<Transfer>& t, bool ok, const std::string& why) {
    if (t->finished) return;
    t->finished = true;
    t->failed = !ok;
    --outstanding_;
    if (t->done) t->done(ok, why);
  }

  bool settled() const {
    if (outstanding_ > 0) return false;
    for (const auto& rt : task_rt_) {
      if (rt.state == "pending" || rt.state == "running") return false;
    }
    return true;
  }

  MetricsReport finalize() {
    MetricsReport report;
    report.infeasible = !assignment_.unassigned.empty();
    report.assignment = assignment_;
    report.release_time = release_;

    double min_start = std::numeric_limits<double>::infinity();
    double max_end = 0.0;
    bool any = false;
    const auto& g = scenario_.workload;
    for (std::size_t i = 0; i < g.tasks.size(); ++i) {
      const auto& rt = task_rt_[i];
      TaskResult row;
      row.task = g.tasks[i].id;
      row.node = rt.node;
      row.state = rt.state == "pending" || rt.state == "running" ? "failed" : rt.state;
      row.detail = rt.detail;
      row.estimated = rt.estimated;
      if (rt.state == "completed") {
        row.start = rt.dispatch_time;
        row.end = rt.end_time;
        row.measured = rt.end_time - rt.dispatch_time;
        min_start = std::min(min_start, row.start);
        max_end = std::max(max_end, row.end);
        any = true;
      }
      report.per_task.push_back(std::move(row));
    }
    report.makespan = any ? max_end - min_start : 0.0;

    for (const auto& n : scenario_.nodes) {
      const auto& rt = nodes_.at(n.id);
      report.per_node.push_back({n.id, rt.compute_j, rt.tx_j, rt.relay_j, rt.energy});
    }
    report.packets = packets_;

    if (opts_.compute_baseline) {
      if (opts_.force_single_node) {
        report.baseline_makespan = report.makespan;
      } else {
        Scenario base = scenario_;
        base.nodes = {*scenario_.find_node(scenario_.source_node)};
        base.links.clear();
        base.groups.clear();
        base.events.clear();
        SimOptions opts;
        opts.trace = false;
        opts.compute_baseline = false;
        opts.force_single_node = true;
        NetworkSim baseline(std::move(base), opts);
        report.baseline_makespan = baseline.run().makespan;
      }
    }
    return report;
  }

  Scenario scenario_;
  SimOptions opts_;
  TraceLog trace_;
  Engine engine_;
  RoutingMesh mesh_;
  std::vector<Group> groups_;
  ConnectionManager connections_;

  std::map<NodeId, NodeRt> nodes_;
  std::vector<TaskRt> task_rt_;
  std::vector<std::size_t> order_;
  Assignment assignment_;

  std::map<std::pair<NodeId, NodeId>, double> link_free_;
  int next_transfer_ = 0;
  int outstanding_ = 0;
  PacketCounters packets_;
  double release_ = 0.0;
  double next_round_ = 0.0;
};

// Convenience wrapper for the common case.
inline MetricsReport run_scenario(const Scenario& scenario, SimOptions opts = {}) {
  NetworkSim sim(scenario, opts);
  return sim.run();
}

// Scenario run returning both the metrics and the trace text.
struct ScenarioRun {
  MetricsReport report;
  std::string trace_text;
};

inline ScenarioRun run_scenario_with_trace(const Scenario& scenario, SimOptions opts = {}) {
  NetworkSim sim(scenario, opts);
  ScenarioRun out;
  out.report = sim.run();
  out.trace_text = sim.trace().to_text();
  return out;
}

}  // namespace ahc
