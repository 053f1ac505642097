#pragma once

// Flat key=value configuration, run reports and their on-disk form:
// one directory per run holding CSV tables, report.json and a manifest
// with per-file FNV-1a hashes.

#include <spikevol/errors.hpp>

#include <json.hpp>

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace spikevol::io {

inline constexpr const char* code_version = "spikevol 1.0.0";
inline constexpr int interface_revision = 1;

inline std::uint64_t fnv1a64(const std::string& bytes)
{
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

inline std::string hex64(std::uint64_t v)
{
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

// Shortest round-trip decimal form.
inline std::string num(double x)
{
    char buf[32];
    for (int prec = 15; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, x);
        if (std::strtod(buf, nullptr) == x) break;
    }
    return buf;
}

inline std::string num(long long x) { return std::to_string(x); }

// ------------------------------------------------------------ key=value --

using KeyValues = std::map<std::string, std::string>;

inline std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline KeyValues parse_key_values(const std::string& text)
{
    KeyValues kv;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw DomainError("config line " + std::to_string(lineno) + " is not key=value");
        const auto key = trim(line.substr(0, eq));
        if (key.empty()) throw DomainError("config line " + std::to_string(lineno) + " has an empty key");
        kv[key] = trim(line.substr(eq + 1));
    }
    return kv;
}

inline std::string read_file(const std::filesystem::path& p)
{
    std::ifstream in(p, std::ios::binary);
    if (!in) throw DomainError("cannot read " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline KeyValues load_key_values(const std::filesystem::path& p) { return parse_key_values(read_file(p)); }

inline std::string canonical(const KeyValues& kv)
{
    std::string out;
    for (const auto& [k, v] : kv) out += k + "=" + v + "\n";
    return out;
}

inline std::vector<std::string> split_list(const std::string& s)
{
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, ',')) {
        cur = trim(cur);
        if (!cur.empty()) out.push_back(cur);
    }
    return out;
}

inline double to_double(const std::string& key, const std::string& v)
{
    std::size_t used = 0;
    double x = 0.0;
    try {
        x = std::stod(v, &used);
    } catch (const std::exception&) {
        throw DomainError(key + " must be a number (got '" + v + "')");
    }
    if (used != v.size()) throw DomainError(key + " must be a number (got '" + v + "')");
    return x;
}

inline long long to_int(const std::string& key, const std::string& v)
{
    std::size_t used = 0;
    long long x = 0;
    try {
        x = std::stoll(v, &used);
    } catch (const std::exception&) {
        throw DomainError(key + " must be an integer (got '" + v + "')");
    }
    if (used != v.size()) throw DomainError(key + " must be an integer (got '" + v + "')");
    return x;
}

inline std::uint64_t to_u64(const std::string& key, const std::string& v)
{
    std::size_t used = 0;
    unsigned long long x = 0;
    try {
        if (!v.empty() && v[0] == '-') throw std::invalid_argument("negative");
        x = std::stoull(v, &used);
    } catch (const std::exception&) {
        throw DomainError(key + " must be an unsigned 64-bit integer (got '" + v + "')");
    }
    if (used != v.size()) throw DomainError(key + " must be an unsigned 64-bit integer (got '" + v + "')");
    return x;
}

// --------------------------------------------------------------- report --

struct Table {
    std::string name;
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    void add(std::vector<std::string> row)
    {
        if (row.size() != header.size()) throw DomainError("table " + name + ": row width does not match header");
        rows.push_back(std::move(row));
    }
    bool operator==(const Table&) const = default;
};

struct Verdict {
    int criterion = 0;
    std::string name;
    bool passed = false;
    bool diagnostic = false; // statistical diagnostics never gate
    std::string detail;
    bool operator==(const Verdict&) const = default;
};

struct SeedEntry {
    std::string stream;
    std::uint64_t seed = 0;
    long long paths = 0;
    bool operator==(const SeedEntry&) const = default;
};

struct RunReport {
    std::string kind;
    KeyValues config;
    std::string config_hash;
    std::uint64_t seed = 0;
    std::vector<Table> tables;
    std::vector<Verdict> verdicts;
    std::vector<SeedEntry> seed_manifest;
    std::vector<std::pair<std::string, std::string>> summary; // scalar results, in report.json
    double wall_clock = 0.0; // seconds; kept out of the hashed files

    bool operator==(const RunReport& o) const
    {
        return kind == o.kind && config == o.config && config_hash == o.config_hash && seed == o.seed &&
               tables == o.tables && verdicts == o.verdicts && seed_manifest == o.seed_manifest &&
               summary == o.summary;
    }
    bool gating_passed() const
    {
        for (const auto& v : verdicts)
            if (!v.diagnostic && !v.passed) return false;
        return true;
    }
    const Table& table(const std::string& name) const
    {
        for (const auto& t : tables)
            if (t.name == name) return t;
        throw DomainError("report has no table " + name);
    }
};

inline std::string config_hash(const KeyValues& kv) { return hex64(fnv1a64(canonical(kv))); }

// ---------------------------------------------------------------- files --

inline std::string to_csv(const Table& t)
{
    auto line = [](const std::vector<std::string>& cells) {
        std::string s;
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (cells[i].find_first_of(",\"\n") != std::string::npos)
                throw DomainError("CSV cell contains a reserved character: " + cells[i]);
            if (i) s += ',';
            s += cells[i];
        }
        return s + "\n";
    };
    std::string out = line(t.header);
    for (const auto& r : t.rows) out += line(r);
    return out;
}

inline Table from_csv(const std::string& name, const std::string& text)
{
    Table t;
    t.name = name;
    std::istringstream in(text);
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream ls(line);
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        if (!line.empty() && line.back() == ',') cells.emplace_back();
        if (first) {
            t.header = cells;
            first = false;
        } else {
            t.add(cells);
        }
    }
    return t;
}

inline std::string report_json(const RunReport& r)
{
    nlohmann::ordered_json j;
    j["kind"] = r.kind;
    j["config_hash"] = r.config_hash;
    j["seed"] = r.seed;
    auto& vs = j["verdicts"] = nlohmann::ordered_json::array();
    for (const auto& v : r.verdicts) {
        nlohmann::ordered_json e;
        e["criterion"] = v.criterion;
        e["name"] = v.name;
        e["passed"] = v.passed;
        e["diagnostic"] = v.diagnostic;
        e["detail"] = v.detail;
        vs.push_back(e);
    }
    auto& ts = j["tables"] = nlohmann::ordered_json::array();
    for (const auto& t : r.tables) ts.push_back(t.name);
    nlohmann::ordered_json sm = nlohmann::ordered_json::object();
    for (const auto& [k, v] : r.summary) sm[k] = v;
    j["summary"] = sm;
    return j.dump(2) + "\n";
}

inline std::string manifest_json(const RunReport& r, const std::vector<std::pair<std::string, std::string>>& files)
{
    nlohmann::ordered_json j;
    j["code_version"] = code_version;
    j["interface_revision"] = interface_revision;
    j["kind"] = r.kind;
    j["config_hash"] = r.config_hash;
    j["seed"] = r.seed;
    nlohmann::ordered_json cfg = nlohmann::ordered_json::object();
    for (const auto& [k, v] : r.config) cfg[k] = v;
    j["config"] = cfg;
    auto& sm = j["seed_manifest"] = nlohmann::ordered_json::array();
    for (const auto& s : r.seed_manifest) sm.push_back({{"stream", s.stream}, {"seed", s.seed}, {"paths", s.paths}});
    nlohmann::ordered_json fs = nlohmann::ordered_json::object();
    for (const auto& [name, body] : files) fs[name] = hex64(fnv1a64(body));
    j["files"] = fs;
    return j.dump(2) + "\n";
}

inline std::string run_directory_name(const RunReport& r)
{
    return r.kind + "-" + r.config_hash + "-s" + std::to_string(r.seed);
}

// Writes the run under out_dir and returns its directory. Files are never
// overwritten: an existing run with an identical manifest is left as is,
// any other existing content is an integrity error.
inline std::filesystem::path persist(const RunReport& r, const std::filesystem::path& out_dir)
{
    namespace fs = std::filesystem;
    std::vector<std::pair<std::string, std::string>> files;
    for (const auto& t : r.tables) files.emplace_back(t.name + ".csv", to_csv(t));
    files.emplace_back("report.json", report_json(r));
    const std::string manifest = manifest_json(r, files);
    const fs::path dir = out_dir / run_directory_name(r);
    if (fs::exists(dir / "manifest.json")) {
        if (read_file(dir / "manifest.json") == manifest) return dir;
        throw IntegrityError("run directory " + dir.string() + " exists with different content");
    }
    fs::create_directories(dir);
    for (const auto& [name, body] : files) {
        if (fs::exists(dir / name)) throw IntegrityError("refusing to overwrite " + (dir / name).string());
        std::ofstream(dir / name, std::ios::binary) << body;
    }
    std::ofstream(dir / "manifest.json", std::ios::binary) << manifest;
    std::ofstream(dir / "timing.log", std::ios::binary | std::ios::app) << "wall_clock_seconds=" << r.wall_clock << "\n";
    return dir;
}

inline RunReport load(const std::filesystem::path& dir)
{
    const auto m = nlohmann::json::parse(read_file(dir / "manifest.json"));
    RunReport r;
    r.kind = m.at("kind").get<std::string>();
    r.config_hash = m.at("config_hash").get<std::string>();
    r.seed = m.at("seed").get<std::uint64_t>();
    for (const auto& [k, v] : m.at("config").items()) r.config[k] = v.get<std::string>();
    if (config_hash(r.config) != r.config_hash) throw IntegrityError("config hash mismatch in " + dir.string());
    for (const auto& s : m.at("seed_manifest"))
        r.seed_manifest.push_back({s.at("stream").get<std::string>(), s.at("seed").get<std::uint64_t>(),
                                   s.at("paths").get<long long>()});
    std::map<std::string, std::string> bodies;
    for (const auto& [name, h] : m.at("files").items()) {
        const auto body = read_file(dir / name);
        if (hex64(fnv1a64(body)) != h.get<std::string>())
            throw IntegrityError("hash mismatch for " + (dir / name).string());
        bodies[name] = body;
    }
    const auto rep = nlohmann::ordered_json::parse(bodies.at("report.json"));
    for (const auto& v : rep.at("verdicts"))
        r.verdicts.push_back({v.at("criterion").get<int>(), v.at("name").get<std::string>(), v.at("passed").get<bool>(),
                              v.at("diagnostic").get<bool>(), v.at("detail").get<std::string>()});
    for (const auto& t : rep.at("tables")) {
        const auto name = t.get<std::string>();
        r.tables.push_back(from_csv(name, bodies.at(name + ".csv")));
    }
    for (const auto& [k, v] : rep.at("summary").items()) r.summary.emplace_back(k, v.get<std::string>());
    if (std::filesystem::exists(dir / "timing.log")) {
        const auto text = read_file(dir / "timing.log");
        const auto pos = text.rfind("wall_clock_seconds=");
        if (pos != std::string::npos) r.wall_clock = std::strtod(text.c_str() + pos + 19, nullptr);
    }
    return r;
}

} // namespace spikevol::io
