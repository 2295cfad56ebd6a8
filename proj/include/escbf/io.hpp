#pragma once

#include <string>
#include <vector>

#include "escbf/sim.hpp"

namespace escbf {

class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

class UnknownPanel : public std::invalid_argument {
public:
    explicit UnknownPanel(const std::string& name)
        : std::invalid_argument("unknown plot panel: " + name) {}
};

/// Scenario files are JSON with schema_version 1; unknown fields anywhere in
/// the document are rejected so typos fail loudly.
inline constexpr int kSchemaVersion = 1;

Scenario scenario_from_json_text(const std::string& text);
std::string scenario_to_json_text(const Scenario& scenario);

Scenario load_scenario(const std::string& path);

/// One JSON object per line, field names matching TraceRecord.
std::string trace_to_jsonl(const std::vector<TraceRecord>& trace);
std::vector<TraceRecord> trace_from_jsonl(const std::string& text);

/// Same columns as the JSONL records, header row first.
std::string trace_to_csv(const std::vector<TraceRecord>& trace);

std::string metrics_to_json_text(const Metrics& metrics, double budget);

/// Writes via a temporary file in the same directory plus an atomic rename.
void write_file_atomic(const std::string& path, const std::string& content);

std::string read_file(const std::string& path);

/// Panels: "he", "energy", "s", "length" plot the column against time;
/// "traj" draws the x-y track with the final path waypoints overlaid.
std::string render_panel(const std::vector<TraceRecord>& trace, const std::string& panel,
                         const std::vector<Vec2>& waypoints = {});

}  // namespace escbf
