#pragma once

#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "ahc/util.hpp"

namespace ahc {

// One line of the simulation trace: time, acting node, event kind and a
// stable-ordered key=value payload.
struct TraceRecord {
  double time = 0.0;
  std::string node;
  std::string kind;
  std::vector<std::pair<std::string, std::string>> fields;
};

inline std::string format_trace_line(const TraceRecord& r) {
  std::string line = format_fixed(r.time, 6);
  line += ' ';
  line += r.node.empty() ? "-" : r.node;
  line += ' ';
  line += r.kind;
  for (const auto& [k, v] : r.fields) {
    line += ' ';
    line += k;
    line += '=';
    line += v;
  }
  return line;
}

// Append-only event log. Producers append in event-processing order, which
// the engine guarantees is (time, sequence) order.
class TraceLog {
 public:
  explicit TraceLog(bool enabled = true) : enabled_(enabled) {}

  bool enabled() const { return enabled_; }
  void set_enabled(bool on) { enabled_ = on; }

  void emit(TraceRecord rec) {
    if (enabled_) records_.push_back(std::move(rec));
  }

  void emit(double time, std::string node, std::string kind,
            std::vector<std::pair<std::string, std::string>> fields = {}) {
    if (enabled_) records_.push_back({time, std::move(node), std::move(kind), std::move(fields)});
  }

  const std::vector<TraceRecord>& records() const { return records_; }
  void clear() { records_.clear(); }

  std::string to_text() const {
    std::string out;
    for (const auto& r : records_) {
      out += format_trace_line(r);
      out += '\n';
    }
    return out;
  }

  void write(std::ostream& os) const { os << to_text(); }

 private:
  bool enabled_;
  std::vector<TraceRecord> records_;
};

}  // namespace ahc
