#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ahc/model.hpp"
#include "ahc/trace.hpp"
#include "ahc/util.hpp"

namespace ahc {

// Device discovery and standard group formation: a scan phase, then an
// alternating search/listen find phase, then a Request-Response-Confirmation
// owner negotiation decided by intent value. Owners keep responding to
// probes so later devices can join as clients.

enum class DevicePhase { idle, scan, find_search, find_listen, negotiating, grouped };
enum class DeviceRole { none, owner, client };

struct DeviceState {
  NodeId node;
  DevicePhase phase = DevicePhase::idle;
  std::set<NodeId> discovered_peers;
  DeviceRole role = DeviceRole::none;
  std::optional<int> group_id;
};

struct Group {
  int id = 0;
  NodeId owner;
  std::vector<NodeId> clients;          // join order
  std::map<NodeId, int> addresses;      // owner fixed at 1, clients 2, 3, ...
};

inline constexpr double kFindDwellMin = 0.100;  // s
inline constexpr double kFindDwellMax = 0.300;  // s

// Toggle between search and listen; the dwell in the new state is uniform
// in [100, 300] ms.
inline double find_phase_step(DeviceState& state, Rng& rng) {
  if (state.phase != DevicePhase::find_search && state.phase != DevicePhase::find_listen)
    throw std::logic_error("find_phase_step: device not in find phase");
  state.phase = state.phase == DevicePhase::find_search ? DevicePhase::find_listen
                                                        : DevicePhase::find_search;
  return rng.uniform(kFindDwellMin, kFindDwellMax);
}

// Equal-intent tie: a seeded bit keyed to the lexicographically lower id.
inline bool intent_tie_break(std::uint64_t seed, const NodeId& lower_id) {
  return (splitmix64(seed ^ fnv1a64(lower_id)) & 1u) != 0;
}

// The device with the larger intent owns; ties resolved by the seeded bit
// (set: lower id wins).
inline NodeId negotiate_group_owner(const NodeSpec& a, const NodeSpec& b, std::uint64_t seed) {
  if (a.go_intent != b.go_intent) return a.go_intent > b.go_intent ? a.id : b.id;
  const NodeId& lower = a.id < b.id ? a.id : b.id;
  const NodeId& higher = a.id < b.id ? b.id : a.id;
  return intent_tie_break(seed, lower) ? lower : higher;
}

namespace detail {

struct FormationDevice {
  const NodeSpec* spec = nullptr;
  DeviceState state;
  Rng rng{0};
  double next_toggle = 0.0;
};

inline void emit_handshake(TraceLog& trace, double t, double latency, const NodeSpec& a,
                           const NodeSpec& b, const NodeId& winner, bool tie) {
  trace.emit(t, a.id, "nego_request",
             {{"peer", b.id}, {"intent", std::to_string(a.go_intent)}});
  trace.emit(t + latency, b.id, "nego_response",
             {{"peer", a.id}, {"intent", std::to_string(b.go_intent)}});
  trace.emit(t + 2 * latency, a.id, "nego_confirm",
             {{"peer", b.id}, {"owner", winner}, {"tie", tie ? "1" : "0"}});
}

}  // namespace detail

// Realize an explicit group list: owner gets address 1, clients 2, 3, ... in
// listed order. Emitted at t = 0.
inline std::vector<Group> realize_explicit_groups(const Scenario& scenario, TraceLog& trace) {
  std::vector<Group> groups;
  int next_id = 1;
  for (const auto& gs : scenario.groups) {
    Group g;
    g.id = next_id++;
    g.owner = gs.owner;
    g.clients = gs.clients;
    g.addresses[gs.owner] = 1;
    trace.emit(0.0, gs.owner, "role_owner", {{"group", std::to_string(g.id)}});
    trace.emit(0.0, gs.owner, "addr_assign",
               {{"group", std::to_string(g.id)}, {"addr", "1"}});
    int addr = 2;
    for (const auto& c : gs.clients) {
      g.addresses[c] = addr;
      trace.emit(0.0, c, "role_client",
                 {{"group", std::to_string(g.id)}, {"owner", gs.owner}});
      trace.emit(0.0, c, "addr_assign",
                 {{"group", std::to_string(g.id)}, {"addr", std::to_string(addr)}});
      ++addr;
    }
    groups.push_back(std::move(g));
  }
  return groups;
}

// Discovery-driven formation. Every device scans, then alternates
// search/listen; the first in-range complementary pair negotiates ownership
// and later devices entering search join the nearest-formed owner in range.
// Returns groups plus the instant formation settled.
struct FormationResult {
  std::vector<Group> groups;
  double end_time = 0.0;
};

inline FormationResult form_groups(const Scenario& scenario, TraceLog& trace) {
  if (!scenario.groups.empty())
    return {realize_explicit_groups(scenario, trace), 0.0};

  const double latency = scenario.default_latency;
  std::vector<detail::FormationDevice> devices;
  devices.reserve(scenario.nodes.size());
  for (const auto& n : scenario.nodes) {
    detail::FormationDevice d;
    d.spec = &n;
    d.state.node = n.id;
    d.state.phase = DevicePhase::scan;
    d.rng = substream(scenario.rng_seed, "find/" + n.id);
    d.next_toggle = scenario.scan_duration;
    devices.push_back(std::move(d));
  }

  std::vector<Group> groups;
  std::map<NodeId, std::size_t> index;
  for (std::size_t i = 0; i < devices.size(); ++i) index[devices[i].state.node] = i;

  std::map<int, double> group_formed_at;
  double now = 0.0;

  auto in_range = [&](std::size_t i, std::size_t j) {
    return in_radio_range(*devices[i].spec, *devices[j].spec);
  };

  auto grant_address = [&](Group& g, detail::FormationDevice& d, double t) {
    const int addr = static_cast<int>(g.clients.size()) + 2;
    g.clients.push_back(d.state.node);
    g.addresses[d.state.node] = addr;
    d.state.role = DeviceRole::client;
    d.state.phase = DevicePhase::grouped;
    d.state.group_id = g.id;
    trace.emit(t, d.state.node, "role_client",
               {{"group", std::to_string(g.id)}, {"owner", g.owner}});
    trace.emit(t, d.state.node, "addr_assign",
               {{"group", std::to_string(g.id)}, {"addr", std::to_string(addr)}});
  };

  auto form_pair = [&](std::size_t i, std::size_t j, double t) {
    auto& a = devices[i];
    auto& b = devices[j];
    a.state.phase = DevicePhase::negotiating;
    b.state.phase = DevicePhase::negotiating;
    const NodeId winner = negotiate_group_owner(*a.spec, *b.spec, scenario.rng_seed);
    const bool tie = a.spec->go_intent == b.spec->go_intent;
    detail::emit_handshake(trace, t, latency, *a.spec, *b.spec, winner, tie);
    const double done = t + 2 * latency;

    Group g;
    g.id = static_cast<int>(groups.size()) + 1;
    g.owner = winner;
    g.addresses[winner] = 1;
    auto& owner_dev = devices[index[winner]];
    auto& client_dev = winner == a.state.node ? b : a;
    owner_dev.state.role = DeviceRole::owner;
    owner_dev.state.phase = DevicePhase::grouped;
    owner_dev.state.group_id = g.id;
    trace.emit(done, winner, "role_owner", {{"group", std::to_string(g.id)}});
    trace.emit(done, winner, "addr_assign",
               {{"group", std::to_string(g.id)}, {"addr", "1"}});
    groups.push_back(std::move(g));
    grant_address(groups.back(), client_dev, done);
    group_formed_at[groups.back().id] = done;
    now = std::max(now, done);
  };

  // A device still looking has hope while some ungrouped device or owner is
  // in range.
  auto hopeful = [&]() {
    for (std::size_t i = 0; i < devices.size(); ++i) {
      if (devices[i].state.phase == DevicePhase::grouped) continue;
      for (std::size_t j = 0; j < devices.size(); ++j) {
        if (i == j || !in_range(i, j)) continue;
        if (devices[j].state.phase != DevicePhase::grouped) return true;
        if (devices[j].state.role == DeviceRole::owner) return true;
      }
    }
    return false;
  };

  const double formation_deadline = 60.0;
  while (hopeful() && now < formation_deadline) {
    // Next toggle among devices still discovering, ties by id.
    std::size_t next = devices.size();
    for (std::size_t i = 0; i < devices.size(); ++i) {
      const auto phase = devices[i].state.phase;
      if (phase == DevicePhase::grouped || phase == DevicePhase::negotiating) continue;
      if (next == devices.size() || devices[i].next_toggle < devices[next].next_toggle ||
          (devices[i].next_toggle == devices[next].next_toggle &&
           devices[i].state.node < devices[next].state.node))
        next = i;
    }
    if (next == devices.size()) break;

    auto& dev = devices[next];
    now = std::max(now, dev.next_toggle);
    if (dev.state.phase == DevicePhase::scan) {
      dev.state.phase = DevicePhase::find_listen;  // first step lands in search
    }
    const double dwell = find_phase_step(dev.state, dev.rng);
    dev.next_toggle = now + dwell;

    auto record_probe = [&](std::size_t searcher, std::size_t listener) {
      trace.emit(now, devices[searcher].state.node, "probe_request",
                 {{"peer", devices[listener].state.node}});
      trace.emit(now, devices[listener].state.node, "probe_response",
                 {{"peer", devices[searcher].state.node}});
      devices[searcher].state.discovered_peers.insert(devices[listener].state.node);
      devices[listener].state.discovered_peers.insert(devices[searcher].state.node);
    };

    if (dev.state.phase == DevicePhase::find_search) {
      // Probe on entering search: owners respond first (join), then a
      // complementary ungrouped device (negotiate). Earliest-formed owner
      // wins, ties by id.
      std::optional<std::size_t> best_owner;
      for (std::size_t j = 0; j < devices.size(); ++j) {
        if (j == next || !in_range(next, j)) continue;
        if (devices[j].state.role != DeviceRole::owner) continue;
        if (!best_owner) {
          best_owner = j;
          continue;
        }
        const double tj = group_formed_at[*devices[j].state.group_id];
        const double tb = group_formed_at[*devices[*best_owner].state.group_id];
        if (tj < tb || (tj == tb && devices[j].state.node < devices[*best_owner].state.node))
          best_owner = j;
      }
      if (best_owner) {
        auto& owner_dev = devices[*best_owner];
        record_probe(next, *best_owner);
        for (auto& g : groups) {
          if (g.id == *owner_dev.state.group_id) {
            grant_address(g, dev, now);
            break;
          }
        }
        continue;
      }
      for (std::size_t j = 0; j < devices.size(); ++j) {
        if (j == next || !in_range(next, j)) continue;
        if (devices[j].state.phase != DevicePhase::find_listen) continue;
        record_probe(next, j);
        form_pair(next, j, now);
        break;
      }
    } else if (dev.state.phase == DevicePhase::find_listen) {
      // A device already in search hears the new listener at this instant.
      for (std::size_t j = 0; j < devices.size(); ++j) {
        if (j == next || !in_range(next, j)) continue;
        if (devices[j].state.phase != DevicePhase::find_search) continue;
        record_probe(j, next);
        form_pair(j, next, now);
        break;
      }
    }
  }

  FormationResult result;
  result.groups = std::move(groups);
  result.end_time = now;
  return result;
}

}  // namespace ahc
