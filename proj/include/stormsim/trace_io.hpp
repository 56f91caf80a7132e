#pragma once

#include <iosfwd>
#include <string>

#include "stormsim/sim.hpp"

namespace stormsim {

/// Stable JSON encoding of a single trace event (sorted keys, kind-dependent
/// fields). The xApp verdict log and the in-process trace share this format.
std::string event_json(const Event& e);

Event make_verdict_event(SimTime t, std::uint64_t window_id, const DetectionVerdict& verdict);

/// trace.jsonl: one meta line followed by one line per event, fields in
/// stable (sorted-key) order so equal traces are byte-equal.
void write_trace_jsonl(const EventTrace& trace, std::ostream& out);
void write_trace_jsonl(const EventTrace& trace, const std::string& path);

EventTrace read_trace_jsonl(std::istream& in);
EventTrace read_trace_jsonl_file(const std::string& path);

/// windows.csv: per-window counts, ratios and verdicts.
void write_windows_csv(const EventTrace& trace, std::ostream& out);
void write_windows_csv(const EventTrace& trace, const std::string& path);

}  // namespace stormsim
