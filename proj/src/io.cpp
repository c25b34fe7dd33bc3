#include "seqsel/io.hpp"

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <ctime>
#include <fstream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "seqsel/errors.hpp"

namespace seqsel {

std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

bool parse_double(const std::string& s, double& out) {
    const char* c = s.c_str();
    char* end = nullptr;
    errno = 0;
    out = std::strtod(c, &end);
    return end != c && *end == '\0' && errno != ERANGE;
}

}  // namespace

std::vector<double> read_observation_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw data_error("cannot open " + path);
    std::vector<double> obs;
    std::string line;
    std::size_t lineno = 0;
    bool first_content = true;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::string t = trim(line);
        if (t.empty()) continue;
        if (t.find(',') != std::string::npos)
            throw data_error(path + ":" + std::to_string(lineno) +
                             ": expected a single column of observations");
        double v;
        if (parse_double(t, v)) {
            obs.push_back(v);
        } else if (first_content) {
            // header line ("y" or similar)
        } else {
            throw data_error(path + ":" + std::to_string(lineno) + ": not a number: '" + t + "'");
        }
        first_content = false;
    }
    if (obs.empty()) throw data_error(path + ": no observations found");
    return obs;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw data_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw data_error("cannot write " + path);
    out << content;
    if (!out) throw data_error("write failed for " + path);
}

ConfigMap read_config_file(const std::string& path) {
    std::string raw = read_text_file(path);
    std::size_t first = raw.find_first_not_of(" \t\r\n");
    ConfigMap cfg;
    if (first != std::string::npos && raw[first] == '{') {
        nlohmann::json j = nlohmann::json::parse(raw, nullptr, false);
        if (j.is_discarded()) throw config_error(path + ": invalid JSON");
        nlohmann::json conf = j.contains("config") ? j["config"] : j;
        if (!conf.is_object()) throw config_error(path + ": expected a config object");
        for (auto it = conf.begin(); it != conf.end(); ++it) {
            if (it.value().is_string())
                cfg[it.key()] = it.value().get<std::string>();
            else
                cfg[it.key()] = it.value().dump();
        }
        return cfg;
    }
    std::istringstream in(raw);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        std::size_t eq = t.find('=');
        if (eq == std::string::npos)
            throw config_error(path + ":" + std::to_string(lineno) + ": expected key = value");
        std::string key = trim(t.substr(0, eq));
        std::string val = trim(t.substr(eq + 1));
        if (key.empty()) throw config_error(path + ":" + std::to_string(lineno) + ": empty key");
        cfg[key] = val;
    }
    return cfg;
}

std::string RunManifest::to_json() const {
    nlohmann::json j;
    j["command"] = command;
    nlohmann::json conf = nlohmann::json::object();
    for (const auto& [k, v] : config) conf[k] = v;
    j["config"] = conf;
    j["seed"] = seed;
    j["version"] = version;
    j["started"] = started;
    j["finished"] = finished;
    j["outputs"] = outputs;
    return j.dump(2) + "\n";
}

void write_manifest(const std::string& path, const RunManifest& manifest) {
    write_text_file(path, manifest.to_json());
}

std::string iso8601_utc_now() {
    std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::size_t worker_thread_count() {
    if (const char* env = std::getenv("SEQSEL_THREADS")) {
        char* end = nullptr;
        long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? hw : 1;
}

}  // namespace seqsel
