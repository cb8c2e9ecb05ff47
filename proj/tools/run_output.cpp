#include "run_output.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>

#include "modval/errors.hpp"

#ifndef MODVAL_VERSION
#define MODVAL_VERSION "0.0.0"
#endif

namespace modval::cli {

std::string iso8601_utc_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string fmt_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

json RunOutput::document() const {
    json doc;
    doc["tool"] = "modval";
    doc["version"] = MODVAL_VERSION;
    doc["command"] = command;
    doc["seed"] = seed;
    doc["timestamp"] = iso8601_utc_now();
    doc["resolved_spec"] = resolved_spec;
    doc["results"] = results;
    return doc;
}

std::string RunOutput::json_text() const { return document().dump(2) + "\n"; }

namespace {

void write_file(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ValidationError("cannot open output file '" + path + "'");
    f << text;
    if (!f) throw ValidationError("failed writing output file '" + path + "'");
}

std::string sidecar_base(const std::string& path) {
    const auto slash = path.find_last_of('/');
    const auto dot = path.find_last_of('.');
    if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) return path;
    return path.substr(0, dot);
}

}  // namespace

void emit(const RunOutput& out, const std::string& out_path, const std::string& format) {
    if (format != "json" && format != "csv")
        throw ValidationError("unknown output format '" + format + "' (expected json or csv)");
    const std::string text = format == "json" ? out.json_text() : out.csv_text;
    if (out_path.empty()) {
        std::cout << text;
    } else {
        write_file(out_path, text);
        const std::string base = sidecar_base(out_path);
        for (const auto& [suffix, csv] : out.sidecars) write_file(base + "." + suffix, csv);
    }
}

}  // namespace modval::cli
