#pragma once

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ahc/report.hpp"
#include "ahc/scenario_io.hpp"
#include "ahc/sim.hpp"

namespace ahc {

// Exit codes shared by every subcommand.
enum ExitCode {
  kExitOk = 0,
  kExitUsage = 1,
  kExitValidation = 2,
  kExitInfeasible = 3,
  kExitInternal = 4,
};

namespace cli_detail {

inline void write_file_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + tmp + "'");
    out << content;
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw std::runtime_error("cannot rename '" + tmp + "' to '" + path + "'");
}

inline std::string default_out_dir() {
  const char* env = std::getenv("AHCSIM_OUT");
  return env != nullptr && *env != '\0' ? std::string(env) : std::string(".");
}

inline std::string join_path(const std::string& dir, const std::string& name) {
  if (dir.empty() || dir == ".") return name;
  return dir.back() == '/' ? dir + name : dir + "/" + name;
}

inline std::string size_label(double mb) {
  std::string s = format_full(mb);
  for (auto& c : s)
    if (c == '.') c = 'p';
  return s;
}

struct ParsedTrace {
  struct Rec {
    double time = 0.0;
    std::string node;
    std::string kind;
    std::map<std::string, std::string> fields;
  };
  std::vector<Rec> records;
};

inline ParsedTrace parse_trace_text(const std::string& text) {
  ParsedTrace out;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ls(line);
    ParsedTrace::Rec rec;
    std::string time_tok;
    if (!(ls >> time_tok >> rec.node >> rec.kind))
      throw std::runtime_error("trace:" + std::to_string(lineno) + ": malformed record");
    char* end = nullptr;
    rec.time = std::strtod(time_tok.c_str(), &end);
    if (end == nullptr || *end != '\0')
      throw std::runtime_error("trace:" + std::to_string(lineno) + ": bad time field");
    std::string kv;
    while (ls >> kv) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos)
        throw std::runtime_error("trace:" + std::to_string(lineno) + ": bad payload '" + kv + "'");
      rec.fields[kv.substr(0, eq)] = kv.substr(eq + 1);
    }
    out.records.push_back(std::move(rec));
  }
  return out;
}

// Split an `a:b:c` tag into parts.
inline std::vector<std::string> split_tag(const std::string& tag) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : tag) {
    if (c == ':') {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  parts.push_back(cur);
  return parts;
}

}  // namespace cli_detail

// Re-verify trace invariants offline: time ordering, per-frame loop
// freedom, and task causality along the recorded DAG edges. Returns
// human-readable violations; empty means the trace checks out.
inline std::vector<std::string> check_trace(const std::string& trace_text) {
  using cli_detail::ParsedTrace;
  std::vector<std::string> violations;
  ParsedTrace trace = cli_detail::parse_trace_text(trace_text);

  double prev = -1.0;
  for (const auto& r : trace.records) {
    if (r.time < prev) {
      violations.push_back("time ordering violated at t=" + format_fixed(r.time));
      break;
    }
    prev = r.time;
  }

  // Loop freedom: a frame must never visit the same node twice.
  std::map<std::string, std::vector<std::string>> frame_nodes;
  std::map<std::string, std::string> transfer_tag;
  std::map<std::string, double> transfer_done_at;
  for (const auto& r : trace.records) {
    if (r.kind == "transfer_start") {
      auto tag = r.fields.find("tag");
      if (tag != r.fields.end()) transfer_tag[r.fields.at("transfer")] = tag->second;
    } else if (r.kind == "frame_send" || r.kind == "frame_relay" || r.kind == "frame_recv") {
      frame_nodes[r.fields.at("transfer") + "/" + r.fields.at("frame")].push_back(r.node);
    } else if (r.kind == "transfer_done") {
      transfer_done_at[r.fields.at("transfer")] = r.time;
    }
  }
  for (const auto& [key, nodes] : frame_nodes) {
    std::set<std::string> seen;
    for (const auto& n : nodes) {
      if (!seen.insert(n).second) {
        violations.push_back("frame " + key + " revisits node " + n);
        break;
      }
    }
  }

  // Causality: predecessor completes before the edge payload finishes, and
  // the successor starts only after that payload arrived.
  std::map<std::string, double> task_start, task_complete;
  for (const auto& r : trace.records) {
    if (r.kind == "task_start") task_start[r.fields.at("task")] = r.time;
    if (r.kind == "task_complete") task_complete[r.fields.at("task")] = r.time;
  }
  std::vector<std::pair<std::string, std::string>> edges;
  for (const auto& r : trace.records)
    if (r.kind == "dag_edge") edges.emplace_back(r.fields.at("pred"), r.fields.at("succ"));

  for (const auto& [p, s] : edges) {
    auto pc = task_complete.find(p);
    auto ss = task_start.find(s);
    if (pc == task_complete.end() || ss == task_start.end()) continue;
    if (ss->second < pc->second)
      violations.push_back("task " + s + " started before predecessor " + p + " completed");
  }
  for (const auto& [id, tag] : transfer_tag) {
    const auto parts = cli_detail::split_tag(tag);
    if (parts.size() == 3 && parts[0] == "edge") {
      auto done = transfer_done_at.find(id);
      auto ss = task_start.find(parts[2]);
      if (done == transfer_done_at.end() || ss == task_start.end()) continue;
      if (ss->second < done->second)
        violations.push_back("task " + parts[2] + " started before its input transfer " + id +
                             " arrived");
    }
  }
  return violations;
}

// Command-line front end; returns the process exit code.
inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"mobile ad hoc cloud simulator"};
  app.require_subcommand(1);

  std::string scenario_path;
  std::string out_dir = cli_detail::default_out_dir();
  std::string trace_path;
  std::string sizes_arg;
  std::uint64_t seed_override = 0;
  bool has_seed = false;
  bool no_trace = false;
  bool lenient = false;

  auto add_common = [&](CLI::App* cmd, bool needs_scenario) {
    if (needs_scenario)
      cmd->add_option("--scenario", scenario_path, "scenario file")->required();
    cmd->add_option("--out", out_dir, "output directory (default: $AHCSIM_OUT or .)");
    cmd->add_flag("--lenient", lenient, "warn on unknown scenario keys instead of failing");
  };

  CLI::App* cmd_run = app.add_subcommand("run", "run a scenario and write report + trace");
  add_common(cmd_run, true);
  cmd_run->add_option("--seed", seed_override, "override the scenario seed")
      ->each([&](const std::string&) { has_seed = true; });
  cmd_run->add_flag("--no-trace", no_trace, "skip trace collection and output");

  CLI::App* cmd_baseline =
      app.add_subcommand("baseline", "run the workload on the source node only");
  add_common(cmd_baseline, true);

  CLI::App* cmd_sweep =
      app.add_subcommand("sweep", "vary workload input size and compare against baseline");
  add_common(cmd_sweep, true);
  cmd_sweep->add_option("--sizes", sizes_arg, "comma-separated input sizes in MB")->required();
  cmd_sweep->add_flag("--no-trace", no_trace, "skip trace collection and output");

  CLI::App* cmd_validate = app.add_subcommand("validate", "check a scenario file");
  add_common(cmd_validate, true);

  CLI::App* cmd_check = app.add_subcommand("trace-check", "re-verify invariants from a trace");
  cmd_check->add_option("--trace", trace_path, "trace file")->required();

  std::vector<const char*> argv;
  argv.push_back("ahcsim");
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  ParseOptions popts;
  std::vector<std::string> warnings;
  popts.lenient = lenient;
  popts.warnings = &warnings;

  try {
    if (cmd_validate->parsed()) {
      parse_scenario(scenario_path, popts);
      for (const auto& w : warnings) err << "warning: " << w << "\n";
      out << "ok\n";
      return kExitOk;
    }

    if (cmd_check->parsed()) {
      std::ifstream in(trace_path);
      if (!in) throw std::runtime_error("cannot open trace file '" + trace_path + "'");
      std::ostringstream buf;
      buf << in.rdbuf();
      const auto violations = check_trace(buf.str());
      if (violations.empty()) {
        out << "ok\n";
        return kExitOk;
      }
      for (const auto& v : violations) err << "violation: " << v << "\n";
      return kExitInternal;
    }

    Scenario scenario = parse_scenario(scenario_path, popts);
    for (const auto& w : warnings) err << "warning: " << w << "\n";
    if (has_seed) scenario.rng_seed = seed_override;

    if (cmd_run->parsed()) {
      SimOptions opts;
      opts.trace = !no_trace;
      NetworkSim sim(scenario, opts);
      const MetricsReport report = sim.run();
      cli_detail::write_file_atomic(cli_detail::join_path(out_dir, "report.txt"),
                                    render_report(report));
      if (!no_trace)
        cli_detail::write_file_atomic(cli_detail::join_path(out_dir, "trace.log"),
                                      sim.trace().to_text());
      out << "makespan " << format_fixed(report.makespan) << "\n";
      out << "baseline " << format_fixed(report.baseline_makespan) << "\n";
      out << "improvement_percent " << format_fixed(report.improvement_percent()) << "\n";
      return report.infeasible ? kExitInfeasible : kExitOk;
    }

    if (cmd_baseline->parsed()) {
      SimOptions opts;
      opts.trace = false;
      opts.compute_baseline = false;
      opts.force_single_node = true;
      NetworkSim sim(scenario, opts);
      const MetricsReport report = sim.run();
      std::string text = "# single-node baseline\n";
      text += "makespan " + format_fixed(report.makespan) + "\n";
      cli_detail::write_file_atomic(cli_detail::join_path(out_dir, "baseline.txt"), text);
      out << "baseline " << format_fixed(report.makespan) << "\n";
      return kExitOk;
    }

    if (cmd_sweep->parsed()) {
      if (scenario.profile_name.empty())
        throw ValidationError("sweep requires a profile-based workload");
      std::vector<double> sizes;
      std::istringstream ss(sizes_arg);
      std::string tok;
      while (std::getline(ss, tok, ',')) {
        char* end = nullptr;
        const double v = std::strtod(tok.c_str(), &end);
        if (end == nullptr || *end != '\0' || v <= 0)
          throw std::runtime_error("bad --sizes entry '" + tok + "'");
        sizes.push_back(v);
      }
      std::vector<SweepRow> rows;
      bool any_infeasible = false;
      for (double mb : sizes) {
        Scenario variant = scenario;
        variant.input_mb = mb;
        variant.workload = build_avss_workload(mb, find_profile(variant.profile_name));
        SimOptions opts;
        opts.trace = !no_trace;
        NetworkSim sim(variant, opts);
        const MetricsReport report = sim.run();
        rows.push_back({mb, report.baseline_makespan, report.makespan,
                        report.improvement_percent(), report.infeasible});
        any_infeasible = any_infeasible || report.infeasible;
        const std::string label = cli_detail::size_label(mb);
        cli_detail::write_file_atomic(
            cli_detail::join_path(out_dir, "report_" + label + "mb.txt"), render_report(report));
        if (!no_trace)
          cli_detail::write_file_atomic(cli_detail::join_path(out_dir, "trace_" + label + "mb.log"),
                                        sim.trace().to_text());
      }
      cli_detail::write_file_atomic(cli_detail::join_path(out_dir, "sweep.txt"),
                                    render_sweep(rows));
      out << render_sweep(rows);
      return any_infeasible ? kExitInfeasible : kExitOk;
    }
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::logic_error& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitInternal;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  return kExitUsage;
}

}  // namespace ahc
