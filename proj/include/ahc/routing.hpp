#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ahc/model.hpp"
#include "ahc/trace.hpp"
#include "ahc/util.hpp"

namespace ahc {

// Distance-vector routing layer. Nodes periodically broadcast discovery
// requests to direct neighbors; a neighbor answers with a digest of routing
// rows that are new or changed since its last reply to that peer. Rows are
// stamped with the replier's emission counter, so within one wave equal
// sequence numbers compare by hop count.

struct RoutingTableEntry {
  NodeId destination;
  NodeId next_node;
  std::uint64_t sequence_no = 0;
  int hops = 0;
  double available_bandwidth = 0.0;  // bottleneck Mbps along the path
  double last_updated = 0.0;         // sim time of last adoption
};

struct DiscoveryRequest {
  NodeId source;
  std::uint64_t sequence_no = 0;
};

struct DigestRow {
  NodeId destination;
  int hops = 0;
  double available_bandwidth = 0.0;
};

struct DiscoveryReply {
  NodeId source;
  NodeId destination;
  std::uint64_t sequence_no = 0;
  std::vector<DigestRow> entries;
};

enum class TrafficClass { real_time, bulk };

struct DataFrame {
  NodeId source;
  NodeId final_destination;
  double payload_kb = 0.0;
  int ttl = 0;
  TrafficClass traffic_class = TrafficClass::real_time;
  std::vector<NodeId> path_so_far;
};

// Per-device routing state: the table plus the bookkeeping needed for
// duplicate suppression and incremental replies.
class RouterNode {
 public:
  RouterNode() = default;
  explicit RouterNode(NodeId id) : id_(std::move(id)) {}

  const NodeId& id() const { return id_; }
  const std::map<NodeId, RoutingTableEntry>& table() const { return table_; }

  const RoutingTableEntry* find(const NodeId& dest) const {
    auto it = table_.find(dest);
    return it == table_.end() ? nullptr : &it->second;
  }

  // Periodic broadcast; bumps the emission counter.
  DiscoveryRequest emit_discovery() {
    ++seq_;
    return DiscoveryRequest{id_, seq_};
  }

  std::uint64_t current_seq() const { return seq_; }

  // Handle a request from a direct neighbor. Duplicates (same source and
  // sequence) are dropped; otherwise refreshes the 1-hop route back to the
  // requester and returns the incremental digest reply.
  std::optional<DiscoveryReply> handle_discovery_request(const DiscoveryRequest& req,
                                                         double link_bandwidth, double now,
                                                         double contact_timeout) {
    auto seen = seen_requests_.find(req.source);
    if (seen != seen_requests_.end() && req.sequence_no <= seen->second) return std::nullopt;
    seen_requests_[req.source] = req.sequence_no;
    touch_peer(req.source, now, contact_timeout);
    install_neighbor(req.source, req.sequence_no, link_bandwidth, now);

    DiscoveryReply reply;
    reply.source = id_;
    reply.destination = req.source;
    reply.sequence_no = seq_;
    auto& sent = advertised_[req.source];
    for (const auto& [dest, entry] : table_) {
      if (dest == req.source) continue;
      auto prev = sent.find(dest);
      if (prev != sent.end() && prev->second.first == entry.hops &&
          prev->second.second == entry.available_bandwidth)
        continue;  // unchanged since last reply to this peer
      reply.entries.push_back({dest, entry.hops, entry.available_bandwidth});
      sent[dest] = {entry.hops, entry.available_bandwidth};
    }
    return reply;
  }

  // Merge a reply from direct neighbor reply.source. Adopts a row when its
  // sequence number is newer, or equal with fewer hops. Returns the number
  // of adopted rows.
  int merge_reply(const DiscoveryReply& reply, double link_bandwidth, double now,
                  double contact_timeout, TraceLog* trace = nullptr) {
    touch_peer(reply.source, now, contact_timeout);
    install_neighbor(reply.source, reply.sequence_no, link_bandwidth, now);
    int adopted = 0;
    for (const auto& row : reply.entries) {
      if (row.destination == id_) continue;
      const double bw = std::min(row.available_bandwidth, link_bandwidth);
      RoutingTableEntry candidate{row.destination, reply.source, reply.sequence_no,
                                  row.hops + 1, bw, now};
      auto it = table_.find(row.destination);
      bool adopt = false;
      if (it == table_.end()) {
        adopt = true;
      } else if (candidate.sequence_no > it->second.sequence_no) {
        adopt = true;
      } else if (candidate.sequence_no == it->second.sequence_no &&
                 candidate.hops < it->second.hops) {
        adopt = true;
      }
      if (adopt) {
        table_[row.destination] = candidate;
        ++adopted;
        if (trace)
          trace->emit(now, id_, "route_update",
                      {{"dest", candidate.destination},
                       {"next", candidate.next_node},
                       {"hops", std::to_string(candidate.hops)},
                       {"bw", format_fixed(candidate.available_bandwidth)},
                       {"seq", std::to_string(candidate.sequence_no)}});
      }
    }
    return adopted;
  }

  // Drop routes whose next hop has gone silent for longer than the entry
  // timeout. Returns purged destinations.
  std::vector<NodeId> purge_stale(double now, double entry_timeout) {
    std::vector<NodeId> purged;
    for (auto it = table_.begin(); it != table_.end();) {
      auto contact = last_contact_.find(it->second.next_node);
      const double last = contact == last_contact_.end() ? -1.0 : contact->second;
      if (last < 0.0 || now - last > entry_timeout) {
        purged.push_back(it->first);
        it = table_.erase(it);
      } else {
        ++it;
      }
    }
    return purged;
  }

  double last_contact(const NodeId& peer) const {
    auto it = last_contact_.find(peer);
    return it == last_contact_.end() ? -1.0 : it->second;
  }

 private:
  void touch_peer(const NodeId& peer, double now, double contact_timeout) {
    auto it = last_contact_.find(peer);
    // A peer returning after silence gets a full dump again.
    if (it != last_contact_.end() && now - it->second > contact_timeout)
      advertised_[peer].clear();
    last_contact_[peer] = now;
  }

  void install_neighbor(const NodeId& peer, std::uint64_t seq, double link_bandwidth,
                        double now) {
    auto it = table_.find(peer);
    if (it == table_.end() || seq >= it->second.sequence_no || it->second.hops > 1)
      table_[peer] = RoutingTableEntry{peer, peer, seq, 1, link_bandwidth, now};
  }

  NodeId id_;
  std::uint64_t seq_ = 0;
  std::map<NodeId, RoutingTableEntry> table_;
  std::map<NodeId, std::uint64_t> seen_requests_;
  std::map<NodeId, std::map<NodeId, std::pair<int, double>>> advertised_;
  std::map<NodeId, double> last_contact_;
};

struct LinkState {
  double bandwidth = 0.0;  // Mbps
  double latency = 0.0;    // s per hop
};

// Network-wide routing fabric over a static neighbor graph: owns one
// RouterNode per device, delivers discovery traffic in deterministic order,
// and answers route queries. The neighbor graph is fed in by the caller
// (the simulator derives it from group topology; tests use arbitrary
// graphs).
class RoutingMesh {
 public:
  struct Position {
    double x = 0.0;
    double y = 0.0;
  };

  void add_node(const NodeId& id, double x = 0.0, double y = 0.0) {
    routers_.emplace(id, RouterNode(id));
    positions_[id] = {x, y};
  }

  void add_link(const NodeId& a, const NodeId& b, double bandwidth, double latency) {
    links_[key(a, b)] = {bandwidth, latency};
  }

  void remove_node(const NodeId& id) {
    down_.insert(id);
  }

  bool is_down(const NodeId& id) const { return down_.count(id) != 0; }

  void set_position(const NodeId& id, double x, double y) { positions_[id] = {x, y}; }

  const LinkState* link(const NodeId& a, const NodeId& b) const {
    auto it = links_.find(key(a, b));
    return it == links_.end() ? nullptr : &it->second;
  }

  std::vector<NodeId> neighbors(const NodeId& id) const {
    std::vector<NodeId> out;
    if (down_.count(id)) return out;
    for (const auto& [k, v] : links_) {
      if (k.first == id && !down_.count(k.second)) out.push_back(k.second);
      if (k.second == id && !down_.count(k.first)) out.push_back(k.first);
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  std::vector<NodeId> node_ids() const {
    std::vector<NodeId> out;
    for (const auto& [id, r] : routers_)
      if (!down_.count(id)) out.push_back(id);
    return out;
  }

  RouterNode& router(const NodeId& id) { return routers_.at(id); }
  const RouterNode& router(const NodeId& id) const { return routers_.at(id); }

  double entry_timeout() const { return entry_timeout_; }
  void set_entry_timeout(double t) { entry_timeout_ = t; }

  // One synchronous discovery wave: every live node broadcasts a request;
  // neighbors reply; replies are merged immediately. Processing order is
  // sorted node id, so results are deterministic. Returns replies sent.
  int run_discovery_round(double now, TraceLog* trace = nullptr) {
    for (const auto& id : node_ids()) routers_.at(id).purge_stale(now, entry_timeout_);
    int replies = 0;
    for (const auto& id : node_ids()) {
      auto& node = routers_.at(id);
      const DiscoveryRequest req = node.emit_discovery();
      const auto nbrs = neighbors(id);
      if (trace)
        trace->emit(now, id, "disc_request",
                    {{"seq", std::to_string(req.sequence_no)},
                     {"fanout", std::to_string(nbrs.size())}});
      for (const auto& nbr : nbrs) {
        const LinkState* l = link(id, nbr);
        auto reply = routers_.at(nbr).handle_discovery_request(req, l->bandwidth, now,
                                                               entry_timeout_);
        if (!reply) continue;
        ++replies;
        if (trace)
          trace->emit(now, nbr, "disc_reply",
                      {{"peer", id},
                       {"seq", std::to_string(reply->sequence_no)},
                       {"entries", std::to_string(reply->entries.size())}});
        node.merge_reply(*reply, l->bandwidth, now, entry_timeout_, trace);
      }
    }
    return replies;
  }

  void run_discovery_rounds(int rounds, double period, double start = 0.0,
                            TraceLog* trace = nullptr) {
    for (int k = 0; k < rounds; ++k) run_discovery_round(start + k * period, trace);
  }

  // Follow next-hop pointers from `from` toward `dest`. Empty when there is
  // no entry or the chain fails to terminate within N-1 steps.
  std::vector<NodeId> next_hop_chain(const NodeId& from, const NodeId& dest) const {
    std::vector<NodeId> path{from};
    NodeId cur = from;
    const std::size_t limit = routers_.size();
    while (cur != dest) {
      const RoutingTableEntry* e = routers_.at(cur).find(dest);
      if (e == nullptr) return {};
      cur = e->next_node;
      path.push_back(cur);
      if (path.size() > limit) return {};
    }
    return path;
  }

  // Route selection. Real-time traffic takes the table's minimum-hop route
  // (next-hop chain). Bulk traffic minimizes the sum of squared hop
  // distances over the 1-hop neighbor graph (transmission-energy proxy),
  // ties by fewer hops then lexicographic path.
  std::optional<std::vector<NodeId>> select_route(const NodeId& from, const NodeId& dest,
                                                  TrafficClass traffic_class) const {
    if (from == dest) return std::vector<NodeId>{from};
    if (traffic_class == TrafficClass::real_time) {
      auto path = next_hop_chain(from, dest);
      if (path.empty()) return std::nullopt;
      return path;
    }
    return min_energy_path(from, dest);
  }

  double hop_cost(const NodeId& a, const NodeId& b) const {
    const auto& pa = positions_.at(a);
    const auto& pb = positions_.at(b);
    const double dx = pa.x - pb.x;
    const double dy = pa.y - pb.y;
    const double d = std::sqrt(dx * dx + dy * dy);
    return std::pow(d, path_loss_exponent_);
  }

  void set_path_loss_exponent(double e) { path_loss_exponent_ = e; }

 private:
  static std::pair<NodeId, NodeId> key(const NodeId& a, const NodeId& b) {
    return a < b ? std::make_pair(a, b) : std::make_pair(b, a);
  }

  std::optional<std::vector<NodeId>> min_energy_path(const NodeId& from,
                                                     const NodeId& dest) const {
    struct Label {
      double cost = std::numeric_limits<double>::infinity();
      int hops = std::numeric_limits<int>::max();
      std::vector<NodeId> path;
    };
    std::map<NodeId, Label> labels;
    labels[from] = {0.0, 0, {from}};
    std::set<NodeId> done;
    while (true) {
      // Extract the unfinished label with minimal (cost, hops, path).
      const NodeId* cur = nullptr;
      for (const auto& [id, lab] : labels) {
        if (done.count(id) || lab.path.empty()) continue;
        if (cur == nullptr) {
          cur = &id;
          continue;
        }
        const Label& best = labels.at(*cur);
        if (lab.cost < best.cost ||
            (lab.cost == best.cost && lab.hops < best.hops) ||
            (lab.cost == best.cost && lab.hops == best.hops && lab.path < best.path))
          cur = &id;
      }
      if (cur == nullptr) return std::nullopt;
      const NodeId u = *cur;
      if (u == dest) return labels.at(u).path;
      done.insert(u);
      const Label base = labels.at(u);
      for (const auto& v : neighbors(u)) {
        if (done.count(v)) continue;
        Label cand;
        cand.cost = base.cost + hop_cost(u, v);
        cand.hops = base.hops + 1;
        cand.path = base.path;
        cand.path.push_back(v);
        auto it = labels.find(v);
        const bool better = it == labels.end() || cand.cost < it->second.cost ||
                            (cand.cost == it->second.cost && cand.hops < it->second.hops) ||
                            (cand.cost == it->second.cost && cand.hops == it->second.hops &&
                             cand.path < it->second.path);
        if (better) labels[v] = std::move(cand);
      }
    }
  }

  std::map<NodeId, RouterNode> routers_;
  std::map<NodeId, Position> positions_;
  std::map<std::pair<NodeId, NodeId>, LinkState> links_;
  std::set<NodeId> down_;
  double entry_timeout_ = 3.0;
  double path_loss_exponent_ = 2.0;
};

// Connection manager: creation, liveness maintenance, termination.
enum class ConnectionState { open, degraded, terminated };

class ConnectionManager {
 public:
  // Open requires a current route between the endpoints.
  bool open(const NodeId& a, const NodeId& b, const RoutingMesh& mesh, double now) {
    if (a != b && !mesh.select_route(a, b, TrafficClass::real_time)) return false;
    conns_[key(a, b)] = {ConnectionState::open, now};
    return true;
  }

  // Refresh liveness each discovery period; a lost route degrades the
  // connection. Returns the pairs that degraded on this pass.
  std::vector<std::pair<NodeId, NodeId>> maintain(const RoutingMesh& mesh, double now) {
    std::vector<std::pair<NodeId, NodeId>> degraded;
    for (auto& [k, c] : conns_) {
      if (c.state != ConnectionState::open) continue;
      if (k.first != k.second && !mesh.select_route(k.first, k.second, TrafficClass::real_time)) {
        c.state = ConnectionState::degraded;
        degraded.push_back(k);
      } else {
        c.last_ok = now;
      }
    }
    return degraded;
  }

  void terminate(const NodeId& a, const NodeId& b) {
    auto it = conns_.find(key(a, b));
    if (it != conns_.end()) it->second.state = ConnectionState::terminated;
  }

  std::optional<ConnectionState> state(const NodeId& a, const NodeId& b) const {
    auto it = conns_.find(key(a, b));
    if (it == conns_.end()) return std::nullopt;
    return it->second.state;
  }

  bool is_open(const NodeId& a, const NodeId& b) const {
    auto s = state(a, b);
    return s && *s == ConnectionState::open;
  }

 private:
  struct Conn {
    ConnectionState state = ConnectionState::open;
    double last_ok = 0.0;
  };
  static std::pair<NodeId, NodeId> key(const NodeId& a, const NodeId& b) {
    return a < b ? std::make_pair(a, b) : std::make_pair(b, a);
  }
  std::map<std::pair<NodeId, NodeId>, Conn> conns_;
};

}  // namespace ahc
