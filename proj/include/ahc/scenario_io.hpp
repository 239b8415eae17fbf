#pragma once

#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "ahc/model.hpp"
#include "ahc/profiles.hpp"
#include "ahc/util.hpp"

namespace ahc {

// Plain-text scenario files. Sections: [params], [nodes], [links],
// [groups], [workload], [tasks], [edges], [events]; '#' starts a comment.
// Parsing is strict by default: unknown sections or keys are errors with
// the offending line number. The writer emits the canonical form, and
// parse(write(s)) == s for every valid scenario.

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& origin, int line, const std::string& msg)
      : std::runtime_error(origin + ":" + std::to_string(line) + ": " + msg), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

namespace io_detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline double parse_double(const std::string& tok, const std::string& origin, int line) {
  char* end = nullptr;
  const double v = std::strtod(tok.c_str(), &end);
  if (end == nullptr || *end != '\0' || tok.empty())
    throw ParseError(origin, line, "expected a number, got '" + tok + "'");
  return v;
}

inline long long parse_int(const std::string& tok, const std::string& origin, int line) {
  char* end = nullptr;
  const long long v = std::strtoll(tok.c_str(), &end, 10);
  if (end == nullptr || *end != '\0' || tok.empty())
    throw ParseError(origin, line, "expected an integer, got '" + tok + "'");
  return v;
}

inline bool parse_bool(const std::string& tok, const std::string& origin, int line) {
  if (tok == "yes" || tok == "true" || tok == "1") return true;
  if (tok == "no" || tok == "false" || tok == "0") return false;
  throw ParseError(origin, line, "expected yes/no, got '" + tok + "'");
}

inline std::vector<std::string> split_ws(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

}  // namespace io_detail

struct ParseOptions {
  bool lenient = false;               // downgrade unknown keys to warnings
  std::vector<std::string>* warnings = nullptr;
};

inline Scenario parse_scenario_text(const std::string& text, const std::string& origin,
                                    ParseOptions opts = {}) {
  using namespace io_detail;
  Scenario s;
  s.entry_timeout = -1.0;  // sentinel: default derives from discovery_period

  struct InlineTask {
    TaskSpec spec;
  };
  std::vector<TaskSpec> inline_tasks;
  std::vector<std::pair<TaskId, TaskId>> inline_edges;
  std::string profile_name;
  std::string profile_file;
  bool saw_anything = false;

  auto warn_or_throw = [&](int line, const std::string& msg) {
    if (opts.lenient) {
      if (opts.warnings) opts.warnings->push_back(origin + ":" + std::to_string(line) + ": " + msg);
      return;
    }
    throw ParseError(origin, line, msg);
  };

  std::istringstream in(text);
  std::string raw;
  std::string section;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    const auto hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    const std::string line = trim(raw);
    if (line.empty()) continue;
    saw_anything = true;

    if (line.front() == '[') {
      if (line.back() != ']') throw ParseError(origin, lineno, "malformed section header");
      section = line.substr(1, line.size() - 2);
      static const std::set<std::string> known = {"params",   "nodes", "links", "groups",
                                                  "workload", "tasks", "edges", "events"};
      if (!known.count(section)) {
        warn_or_throw(lineno, "unknown section '" + section + "'");
        section = "!skip";
      }
      continue;
    }
    if (section.empty()) throw ParseError(origin, lineno, "content before any section header");
    if (section == "!skip") continue;

    if (section == "params" || section == "workload") {
      const auto eq = line.find('=');
      if (eq == std::string::npos)
        throw ParseError(origin, lineno, "expected 'key = value'");
      const std::string key = trim(line.substr(0, eq));
      const std::string val = trim(line.substr(eq + 1));
      if (section == "params") {
        if (key == "packet_size") s.packet_size = parse_double(val, origin, lineno);
        else if (key == "energy_threshold") s.energy_threshold = parse_double(val, origin, lineno);
        else if (key == "seed") s.rng_seed = static_cast<std::uint64_t>(parse_int(val, origin, lineno));
        else if (key == "discovery_period") s.discovery_period = parse_double(val, origin, lineno);
        else if (key == "ttl") s.ttl = static_cast<int>(parse_int(val, origin, lineno));
        else if (key == "entry_timeout") s.entry_timeout = parse_double(val, origin, lineno);
        else if (key == "default_bandwidth") s.default_bandwidth = parse_double(val, origin, lineno);
        else if (key == "default_latency") s.default_latency = parse_double(val, origin, lineno);
        else if (key == "scan_duration") s.scan_duration = parse_double(val, origin, lineno);
        else if (key == "path_loss_exponent") s.path_loss_exponent = parse_double(val, origin, lineno);
        else if (key == "static_energy") s.static_energy = parse_bool(val, origin, lineno);
        else warn_or_throw(lineno, "unknown params key '" + key + "'");
      } else {
        if (key == "profile") profile_name = val;
        else if (key == "profile_file") profile_file = val;
        else if (key == "input_mb") s.input_mb = parse_double(val, origin, lineno);
        else if (key == "source") s.source_node = val;
        else warn_or_throw(lineno, "unknown workload key '" + key + "'");
      }
      continue;
    }

    if (section == "nodes") {
      const auto cols = split_ws(line);
      if (cols.size() != 9)
        throw ParseError(origin, lineno,
                         "node row needs 9 columns: id power energy proc_rate tx_per_pkt x y "
                         "range intent");
      NodeSpec n;
      n.id = cols[0];
      n.processing_power = parse_double(cols[1], origin, lineno);
      n.available_energy = parse_double(cols[2], origin, lineno);
      n.proc_energy_rate = parse_double(cols[3], origin, lineno);
      n.tx_energy_per_packet = parse_double(cols[4], origin, lineno);
      n.x = parse_double(cols[5], origin, lineno);
      n.y = parse_double(cols[6], origin, lineno);
      n.radio_range = parse_double(cols[7], origin, lineno);
      n.go_intent = static_cast<int>(parse_int(cols[8], origin, lineno));
      s.nodes.push_back(std::move(n));
      continue;
    }

    if (section == "links") {
      const auto cols = split_ws(line);
      if (cols.size() != 4)
        throw ParseError(origin, lineno, "link row needs 4 columns: a b bandwidth latency");
      LinkSpec l;
      l.a = cols[0];
      l.b = cols[1];
      l.bandwidth = parse_double(cols[2], origin, lineno);
      l.latency = parse_double(cols[3], origin, lineno);
      s.links.push_back(std::move(l));
      continue;
    }

    if (section == "groups") {
      const auto colon = line.find(':');
      if (colon == std::string::npos)
        throw ParseError(origin, lineno, "group row needs 'owner: client client ...'");
      GroupSpec g;
      g.owner = trim(line.substr(0, colon));
      g.clients = split_ws(line.substr(colon + 1));
      if (g.owner.empty() || g.clients.empty())
        throw ParseError(origin, lineno, "group row needs an owner and at least one client");
      s.groups.push_back(std::move(g));
      continue;
    }

    if (section == "tasks") {
      const auto cols = split_ws(line);
      if (cols.size() != 6)
        throw ParseError(origin, lineno,
                         "task row needs 6 columns: id size input_kb output_kb deadline real_time");
      TaskSpec t;
      t.id = cols[0];
      t.size = parse_double(cols[1], origin, lineno);
      t.input_data = parse_double(cols[2], origin, lineno);
      t.output_data = parse_double(cols[3], origin, lineno);
      t.deadline = parse_double(cols[4], origin, lineno);
      t.real_time = parse_bool(cols[5], origin, lineno);
      inline_tasks.push_back(std::move(t));
      continue;
    }

    if (section == "edges") {
      const auto cols = split_ws(line);
      if (cols.size() != 3 || cols[1] != "->")
        throw ParseError(origin, lineno, "edge row needs 'pred -> succ'");
      inline_edges.emplace_back(cols[0], cols[2]);
      continue;
    }

    if (section == "events") {
      const auto cols = split_ws(line);
      if (cols.size() < 2) throw ParseError(origin, lineno, "event row too short");
      ScenarioEvent ev;
      ev.time = parse_double(cols[0], origin, lineno);
      if (cols[1] == "node_down") {
        if (cols.size() != 3)
          throw ParseError(origin, lineno, "node_down needs: time node_down id");
        ev.kind = ScenarioEvent::Kind::node_down;
        ev.node = cols[2];
      } else if (cols[1] == "move") {
        if (cols.size() != 5)
          throw ParseError(origin, lineno, "move needs: time move id x y");
        ev.kind = ScenarioEvent::Kind::move;
        ev.node = cols[2];
        ev.x = parse_double(cols[3], origin, lineno);
        ev.y = parse_double(cols[4], origin, lineno);
      } else {
        throw ParseError(origin, lineno, "unknown event kind '" + cols[1] + "'");
      }
      s.events.push_back(std::move(ev));
      continue;
    }
  }

  if (!saw_anything) throw ParseError(origin, 1, "empty scenario file");

  if (s.entry_timeout < 0) s.entry_timeout = 3.0 * s.discovery_period;

  const bool has_inline = !inline_tasks.empty();
  if (!profile_name.empty() && !profile_file.empty())
    throw ParseError(origin, 1, "workload: give either profile or profile_file, not both");
  if ((!profile_name.empty() || !profile_file.empty()) && has_inline)
    throw ParseError(origin, 1, "workload: profile and inline [tasks] are mutually exclusive");
  if (profile_name.empty() && profile_file.empty() && s.input_mb != 0.0)
    throw ParseError(origin, 1, "workload: input_mb requires a profile");
  if (!profile_name.empty() || !profile_file.empty()) {
    if (s.input_mb <= 0) throw ParseError(origin, 1, "workload: profile needs input_mb > 0");
    try {
      const WorkloadProfile profile =
          profile_file.empty() ? find_profile(profile_name) : load_profile_file(profile_file);
      s.workload = build_avss_workload(s.input_mb, profile);
    } catch (const std::exception& e) {
      throw ParseError(origin, 1, e.what());
    }
    s.profile_name = profile_name;  // builtins only; file-loaded expands inline
  } else {
    s.workload.tasks = std::move(inline_tasks);
    s.workload.edges = std::move(inline_edges);
    s.profile_name.clear();
  }

  validate_scenario(s);
  return s;
}

inline Scenario parse_scenario(const std::string& path, ParseOptions opts = {}) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open scenario file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario_text(buf.str(), path, opts);
}

// Canonical serializer; the inverse of parse_scenario_text.
inline std::string write_scenario(const Scenario& s) {
  std::string out;
  auto kv = [&](const std::string& k, const std::string& v) { out += k + " = " + v + "\n"; };

  out += "[params]\n";
  kv("packet_size", format_full(s.packet_size));
  kv("energy_threshold", format_full(s.energy_threshold));
  kv("seed", std::to_string(s.rng_seed));
  kv("discovery_period", format_full(s.discovery_period));
  kv("ttl", std::to_string(s.ttl));
  kv("entry_timeout", format_full(s.entry_timeout));
  kv("default_bandwidth", format_full(s.default_bandwidth));
  kv("default_latency", format_full(s.default_latency));
  kv("scan_duration", format_full(s.scan_duration));
  kv("path_loss_exponent", format_full(s.path_loss_exponent));
  kv("static_energy", s.static_energy ? "yes" : "no");

  out += "\n[nodes]\n";
  for (const auto& n : s.nodes) {
    out += n.id + " " + format_full(n.processing_power) + " " + format_full(n.available_energy) +
           " " + format_full(n.proc_energy_rate) + " " + format_full(n.tx_energy_per_packet) +
           " " + format_full(n.x) + " " + format_full(n.y) + " " + format_full(n.radio_range) +
           " " + std::to_string(n.go_intent) + "\n";
  }

  if (!s.links.empty()) {
    out += "\n[links]\n";
    for (const auto& l : s.links)
      out += l.a + " " + l.b + " " + format_full(l.bandwidth) + " " + format_full(l.latency) + "\n";
  }

  if (!s.groups.empty()) {
    out += "\n[groups]\n";
    for (const auto& g : s.groups) {
      out += g.owner + ":";
      for (const auto& c : g.clients) out += " " + c;
      out += "\n";
    }
  }

  out += "\n[workload]\n";
  kv("source", s.source_node);
  if (!s.profile_name.empty()) {
    kv("profile", s.profile_name);
    kv("input_mb", format_full(s.input_mb));
  }

  if (s.profile_name.empty()) {
    out += "\n[tasks]\n";
    for (const auto& t : s.workload.tasks)
      out += t.id + " " + format_full(t.size) + " " + format_full(t.input_data) + " " +
             format_full(t.output_data) + " " + format_full(t.deadline) + " " +
             (t.real_time ? "yes" : "no") + "\n";
    if (!s.workload.edges.empty()) {
      out += "\n[edges]\n";
      for (const auto& [a, b] : s.workload.edges) out += a + " -> " + b + "\n";
    }
  }

  if (!s.events.empty()) {
    out += "\n[events]\n";
    for (const auto& ev : s.events) {
      if (ev.kind == ScenarioEvent::Kind::node_down)
        out += format_full(ev.time) + " node_down " + ev.node + "\n";
      else
        out += format_full(ev.time) + " move " + ev.node + " " + format_full(ev.x) + " " +
               format_full(ev.y) + "\n";
    }
  }
  return out;
}

}  // namespace ahc
