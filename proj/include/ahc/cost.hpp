#pragma once

#include <cmath>
#include <stdexcept>

#include "ahc/model.hpp"

namespace ahc {

// Cost estimation for one task on one node. All functions are pure.
//
// Unit conventions: data sizes in KB, bandwidth in Mbps, with
// 1 KB = 8 kilobits and 1 Mbps = 1000 kilobits/s.

struct CostEstimate {
  double execution_time = 0.0;  // s, includes transfer
  double transfer_time = 0.0;   // s
  double energy = 0.0;          // J
  double packets = 0.0;         // count
};

inline double kb_to_megabits(double kb) { return kb * 8.0 / 1000.0; }

// Per-direction packet ceilings: fractional packets round up.
inline double packet_count(double input_data_kb, double output_data_kb, double packet_size_kb) {
  if (packet_size_kb <= 0) throw std::invalid_argument("packet_count: packet_size must be > 0");
  if (input_data_kb < 0 || output_data_kb < 0)
    throw std::invalid_argument("packet_count: data sizes must be >= 0");
  return std::ceil(input_data_kb / packet_size_kb) + std::ceil(output_data_kb / packet_size_kb);
}

inline double data_transfer_time(double input_data_kb, double output_data_kb, double bandwidth_mbps) {
  if (bandwidth_mbps <= 0)
    throw std::invalid_argument("data_transfer_time: bandwidth must be > 0");
  return (kb_to_megabits(input_data_kb) + kb_to_megabits(output_data_kb)) / bandwidth_mbps;
}

inline double execution_time_estimate(const TaskSpec& task, const NodeSpec& node,
                                      double transfer_time_s) {
  return task.size / node.processing_power + transfer_time_s;
}

inline double energy_estimate(const TaskSpec& task, const NodeSpec& node, double packet_size_kb) {
  const double compute = node.proc_energy_rate * (task.size / node.processing_power);
  const double tx = node.tx_energy_per_packet *
                    packet_count(task.input_data, task.output_data, packet_size_kb);
  return compute + tx;
}

// Convenience bundle used by the scheduler and reports.
inline CostEstimate estimate_cost(const TaskSpec& task, const NodeSpec& node,
                                  double bandwidth_mbps, double packet_size_kb) {
  CostEstimate c;
  c.transfer_time = data_transfer_time(task.input_data, task.output_data, bandwidth_mbps);
  c.execution_time = execution_time_estimate(task, node, c.transfer_time);
  c.energy = energy_estimate(task, node, packet_size_kb);
  c.packets = packet_count(task.input_data, task.output_data, packet_size_kb);
  return c;
}

}  // namespace ahc
