#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace modval::cli {

using json = nlohmann::json;

/// Result document for one run. Serialized as JSON it carries the tool
/// name and version, the command, the seed, a timestamp, the fully
/// resolved problem document (every default filled in, so the run can be
/// replayed from the echo alone), and the command's results. The CSV
/// rendering is a flat table and carries no timestamp.
struct RunOutput {
    std::string command;
    std::uint64_t seed = 0;
    json resolved_spec = json::object();
    json results = json::object();
    std::string csv_text;
    // extra CSV tables written next to --out as <base>.<suffix>
    std::vector<std::pair<std::string, std::string>> sidecars;

    json document() const;
    std::string json_text() const;
};

/// Writes the chosen rendering to out_path (or stdout when empty) and any
/// sidecars next to it. format is "json" or "csv".
void emit(const RunOutput& out, const std::string& out_path, const std::string& format);

std::string iso8601_utc_now();

/// "%.17g" rendering, enough digits to round-trip a double.
std::string fmt_double(double x);

}  // namespace modval::cli
