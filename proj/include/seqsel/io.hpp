#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace seqsel {

// 17 significant digits: enough to round-trip any double, so identical
// computations serialize to identical bytes.
std::string fmt17(double v);

// Single-column numeric CSV, optional header line. Throws data_error with the
// offending line number on anything non-numeric or multi-column.
std::vector<double> read_observation_csv(const std::string& path);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

using ConfigMap = std::map<std::string, std::string>;

// Accepts either `key = value` lines (# comments allowed) or a manifest JSON
// produced by this tool, whose embedded config object is extracted, making
// every manifest directly re-runnable.
ConfigMap read_config_file(const std::string& path);

struct RunManifest {
    std::string command;
    ConfigMap config;
    std::uint64_t seed = 0;
    std::string version;
    std::string started;
    std::string finished;
    std::vector<std::string> outputs;

    std::string to_json() const;
};

void write_manifest(const std::string& path, const RunManifest& manifest);

std::string iso8601_utc_now();

// SEQSEL_THREADS when set to a positive integer, hardware concurrency
// otherwise, never zero.
std::size_t worker_thread_count();

}  // namespace seqsel
