#pragma once

#include <string>
#include <vector>

#include "ahc/sim.hpp"
#include "ahc/util.hpp"

namespace ahc {

// Plain-text report rendering. Numbers are printed with fixed 6-decimal
// precision straight from the metrics fields, so identical runs produce
// identical bytes.

inline std::string render_report(const MetricsReport& r) {
  std::string out;
  out += "# simulation report\n";
  out += "status " + std::string(r.infeasible ? "infeasible" : "ok") + "\n";
  out += "release_time " + format_fixed(r.release_time) + "\n";
  out += "makespan " + format_fixed(r.makespan) + "\n";
  out += "baseline_makespan " + format_fixed(r.baseline_makespan) + "\n";
  out += "improvement_percent " + format_fixed(r.improvement_percent()) + "\n";

  out += "\n[assignment]\n";
  out += "# task node estimated_time_s estimated_energy_j\n";
  for (const auto& [task, a] : r.assignment.assigned)
    out += task + " " + a.node + " " + format_fixed(a.estimated_time) + " " +
           format_fixed(a.estimated_energy) + "\n";
  for (const auto& u : r.assignment.unassigned)
    out += u.task + " - unassigned " + u.reason + "\n";

  out += "\n[tasks]\n";
  out += "# task node state start_s end_s estimated_s measured_s\n";
  for (const auto& t : r.per_task) {
    out += t.task + " " + (t.node.empty() ? "-" : t.node) + " " + t.state;
    if (!t.detail.empty()) out += ":" + t.detail;
    out += " " + format_fixed(t.start) + " " + format_fixed(t.end) + " " +
           format_fixed(t.estimated) + " " + format_fixed(t.measured) + "\n";
  }

  out += "\n[energy]\n";
  out += "# node compute_j tx_j relay_j remaining_j\n";
  for (const auto& n : r.per_node)
    out += n.node + " " + format_fixed(n.compute_j) + " " + format_fixed(n.tx_j) + " " +
           format_fixed(n.relay_j) + " " + format_fixed(n.remaining_j) + "\n";

  out += "\n[packets]\n";
  out += "sent " + std::to_string(r.packets.sent) + "\n";
  out += "forwarded " + std::to_string(r.packets.forwarded) + "\n";
  out += "dropped " + std::to_string(r.packets.dropped) + "\n";
  return out;
}

struct SweepRow {
  double input_mb = 0.0;
  double baseline_makespan = 0.0;
  double makespan = 0.0;
  double improvement_percent = 0.0;
  bool infeasible = false;
};

// Comparison table across input sizes (single-node vs cluster).
inline std::string render_sweep(const std::vector<SweepRow>& rows) {
  std::string out;
  out += "# input_mb baseline_s distributed_s improvement_percent\n";
  for (const auto& row : rows) {
    out += format_fixed(row.input_mb, 2) + " " + format_fixed(row.baseline_makespan) + " " +
           format_fixed(row.makespan) + " " + format_fixed(row.improvement_percent);
    if (row.infeasible) out += " infeasible";
    out += "\n";
  }
  return out;
}

}  // namespace ahc
