#pragma once

#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "ahc/model.hpp"

namespace ahc {

// A workload profile declares, per task type, work-units per MB of input,
// output kilobytes per MB, and an affine deadline (base seconds plus
// seconds per MB). The builder scales everything by the scenario's input
// size; in-degree-zero tasks additionally consume the raw input stream at
// input_kb_per_mb.

struct ProfileTask {
  std::string name;
  double work_per_mb = 0.0;       // work-units per MB of input
  double output_kb_per_mb = 0.0;  // KB of output per MB of input
  double deadline_base_s = 0.0;
  double deadline_per_mb_s = 0.0;
  bool real_time = true;

  bool operator==(const ProfileTask&) const = default;
};

struct WorkloadProfile {
  std::string name;
  double input_kb_per_mb = 1000.0;
  std::vector<ProfileTask> tasks;
  std::vector<std::pair<std::string, std::string>> edges;

  bool operator==(const WorkloadProfile&) const = default;
};

// Three-task surveillance pipeline (detection feeding tracking and
// classification) calibrated against the reference three-node roster; the
// derivation of these constants is documented in docs/calibration.md.
inline WorkloadProfile profile_avss3_table2() {
  WorkloadProfile p;
  p.name = "avss3-table2";
  p.input_kb_per_mb = 1000.0;
  p.tasks = {
      {"detect", 136.0, 150.0, 0.0, 0.05, true},
      {"track", 75.0, 3.0, 0.0, 0.0306, true},
      {"classify", 393.0, 3.0, 7.0, 0.0, true},
  };
  p.edges = {{"detect", "track"}, {"detect", "classify"}};
  return p;
}

// Full six-task pipeline: detection fans out to tracking, classification
// and indexing; tracking and classification feed behavior analysis, which
// feeds the action stage. Indexing is bulk (archival) traffic.
inline WorkloadProfile profile_avss6() {
  WorkloadProfile p;
  p.name = "avss6";
  p.input_kb_per_mb = 1000.0;
  p.tasks = {
      {"detect", 140.0, 150.0, 2.0, 0.1, true},
      {"track", 80.0, 12.0, 4.0, 0.1, true},
      {"classify", 120.0, 8.0, 4.0, 0.1, true},
      {"index", 45.0, 60.0, 30.0, 0.5, false},
      {"behavior", 160.0, 4.0, 8.0, 0.15, true},
      {"action", 10.0, 1.0, 10.0, 0.05, true},
  };
  p.edges = {{"detect", "track"},    {"detect", "classify"}, {"detect", "index"},
             {"track", "behavior"},  {"classify", "behavior"}, {"behavior", "action"}};
  return p;
}

inline const std::map<std::string, WorkloadProfile>& builtin_profiles() {
  static const std::map<std::string, WorkloadProfile> profiles = {
      {"avss3-table2", profile_avss3_table2()},
      {"avss6", profile_avss6()},
  };
  return profiles;
}

inline WorkloadProfile find_profile(const std::string& name) {
  const auto& all = builtin_profiles();
  auto it = all.find(name);
  if (it == all.end()) throw std::invalid_argument("unknown profile '" + name + "'");
  return it->second;
}

// Plain-text profile file: `name`, `input_kb_per_mb`, `task <id> k=v...`
// and `edge a -> b` lines.
inline WorkloadProfile load_profile_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open profile file '" + path + "'");
  WorkloadProfile p;
  p.input_kb_per_mb = 1000.0;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string word;
    if (!(ls >> word)) continue;
    const std::string where = path + ":" + std::to_string(lineno);
    if (word == "name") {
      ls >> p.name;
    } else if (word == "input_kb_per_mb") {
      ls >> p.input_kb_per_mb;
    } else if (word == "task") {
      ProfileTask t;
      if (!(ls >> t.name)) throw std::runtime_error(where + ": task line missing name");
      std::string kv;
      while (ls >> kv) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos)
          throw std::runtime_error(where + ": expected key=value, got '" + kv + "'");
        const std::string key = kv.substr(0, eq);
        const std::string val = kv.substr(eq + 1);
        if (key == "work_per_mb") t.work_per_mb = std::stod(val);
        else if (key == "output_kb_per_mb") t.output_kb_per_mb = std::stod(val);
        else if (key == "deadline_base_s") t.deadline_base_s = std::stod(val);
        else if (key == "deadline_per_mb_s") t.deadline_per_mb_s = std::stod(val);
        else if (key == "real_time") t.real_time = val == "yes" || val == "true" || val == "1";
        else throw std::runtime_error(where + ": unknown task key '" + key + "'");
      }
      p.tasks.push_back(std::move(t));
    } else if (word == "edge") {
      std::string a, arrow, b;
      if (!(ls >> a >> arrow >> b) || arrow != "->")
        throw std::runtime_error(where + ": expected 'edge a -> b'");
      p.edges.emplace_back(a, b);
    } else {
      throw std::runtime_error(where + ": unknown directive '" + word + "'");
    }
  }
  if (p.name.empty()) throw std::runtime_error(path + ": profile has no name");
  return p;
}

// Instantiate the profile DAG for a given input size (MB). Task sizes and
// all data fields scale linearly; a task's input is the raw stream for
// roots and the sum of predecessor outputs otherwise.
inline TaskGraph build_avss_workload(double input_mb, const WorkloadProfile& profile) {
  if (input_mb <= 0) throw std::invalid_argument("input_mb must be > 0");
  if (profile.tasks.empty()) throw std::invalid_argument("profile has no tasks");
  TaskGraph g;
  std::map<std::string, std::size_t> index;
  for (const auto& pt : profile.tasks) {
    TaskSpec t;
    t.id = pt.name;
    t.size = pt.work_per_mb * input_mb;
    t.output_data = pt.output_kb_per_mb * input_mb;
    t.deadline = pt.deadline_base_s + pt.deadline_per_mb_s * input_mb;
    t.real_time = pt.real_time;
    index[pt.name] = g.tasks.size();
    g.tasks.push_back(std::move(t));
  }
  std::map<std::string, double> incoming_kb;
  for (const auto& [a, b] : profile.edges) {
    if (!index.count(a) || !index.count(b))
      throw std::invalid_argument("profile edge references unknown task");
    g.edges.emplace_back(a, b);
    incoming_kb[b] += g.tasks[index[a]].output_data;
  }
  for (auto& t : g.tasks) {
    auto it = incoming_kb.find(t.id);
    t.input_data = it == incoming_kb.end() ? profile.input_kb_per_mb * input_mb : it->second;
  }
  return g;
}

inline TaskGraph build_avss_workload(double input_mb, const std::string& profile_name) {
  return build_avss_workload(input_mb, find_profile(profile_name));
}

}  // namespace ahc
