#include "levypide/config.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "levypide/errors.hpp"

namespace levypide {

namespace {

std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

bool parse_number(std::string_view tok, double& out) {
    const std::string t(tok);
    errno = 0;
    char* end = nullptr;
    out = std::strtod(t.c_str(), &end);
    return end != t.c_str() && *end == '\0' && errno == 0;
}

std::vector<double> parse_numbers(std::string_view text, bool& ok) {
    std::vector<double> v;
    std::istringstream in{std::string(text)};
    std::string tok;
    ok = true;
    while (in >> tok) {
        double d;
        if (!parse_number(tok, d)) {
            ok = false;
            return {};
        }
        v.push_back(d);
    }
    return v;
}

std::string format_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

std::uint64_t fnv1a64(std::string_view data) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

bool ConfigSection::has(std::string_view key) const { return find(key).has_value(); }

std::optional<std::string> ConfigSection::find(std::string_view key) const {
    // Later entries override earlier ones.
    for (auto it = entries.rbegin(); it != entries.rend(); ++it)
        if (it->first == key) return it->second;
    return std::nullopt;
}

std::string ConfigSection::get_string(std::string_view key) const {
    auto v = find(key);
    if (!v) throw ConfigError("[" + name + "] missing key '" + std::string(key) + "'");
    return *v;
}

std::string ConfigSection::get_string(std::string_view key, std::string_view fallback) const {
    auto v = find(key);
    return v ? *v : std::string(fallback);
}

double ConfigSection::get_double(std::string_view key) const {
    const std::string s = get_string(key);
    double d;
    if (!parse_number(s, d)) throw ConfigError("[" + name + "] key '" + std::string(key) + "' is not a number: " + s);
    return d;
}

double ConfigSection::get_double(std::string_view key, double fallback) const {
    return has(key) ? get_double(key) : fallback;
}

int ConfigSection::get_int(std::string_view key, int fallback) const {
    if (!has(key)) return fallback;
    const double d = get_double(key);
    if (d != static_cast<double>(static_cast<int>(d)))
        throw ConfigError("[" + name + "] key '" + std::string(key) + "' must be an integer");
    return static_cast<int>(d);
}

bool ConfigSection::get_bool(std::string_view key, bool fallback) const {
    auto v = find(key);
    if (!v) return fallback;
    if (*v == "true" || *v == "1" || *v == "yes") return true;
    if (*v == "false" || *v == "0" || *v == "no") return false;
    throw ConfigError("[" + name + "] key '" + std::string(key) + "' must be true or false");
}

std::vector<double> ConfigSection::get_list(std::string_view key) const {
    bool ok;
    auto v = parse_numbers(get_string(key), ok);
    if (!ok) throw ConfigError("[" + name + "] key '" + std::string(key) + "' must be a list of numbers");
    return v;
}

Config Config::parse(std::string_view text, const std::string& origin) {
    Config cfg;
    cfg.sections_.push_back(ConfigSection{});
    std::size_t lineno = 0, pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto where = [&] { return origin + ":" + std::to_string(lineno) + ": "; };
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError(where() + "unterminated section header");
            const auto name = trim(line.substr(1, line.size() - 2));
            if (name.empty()) throw ConfigError(where() + "empty section name");
            cfg.sections_.push_back(ConfigSection{std::string(name), {}, {}});
            continue;
        }
        const auto eq = line.find('=');
        if (eq != std::string_view::npos) {
            const auto key = trim(line.substr(0, eq));
            if (key.empty()) throw ConfigError(where() + "empty key");
            cfg.sections_.back().entries.emplace_back(std::string(key), std::string(trim(line.substr(eq + 1))));
            continue;
        }
        bool ok;
        auto row = parse_numbers(line, ok);
        if (!ok) throw ConfigError(where() + "expected 'key = value', '[section]' or a numeric row");
        cfg.sections_.back().rows.push_back(std::move(row));
    }
    if (cfg.sections_.front().entries.empty() && cfg.sections_.front().rows.empty())
        cfg.sections_.erase(cfg.sections_.begin());
    return cfg;
}

Config Config::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    Config cfg = parse(ss.str(), path);
    cfg.base_dir_ = std::filesystem::path(path).parent_path().string();
    return cfg;
}

std::string Config::serialize() const {
    std::string out;
    bool first = true;
    for (const auto& s : sections_) {
        if (!first) out += '\n';
        first = false;
        if (!s.name.empty()) out += "[" + s.name + "]\n";
        for (const auto& [k, v] : s.entries) out += k + " = " + v + "\n";
        for (const auto& row : s.rows) {
            for (std::size_t j = 0; j < row.size(); ++j) {
                if (j) out += ' ';
                out += format_g17(row[j]);
            }
            out += '\n';
        }
    }
    return out;
}

std::string Config::hash() const {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(serialize())));
    return buf;
}

bool Config::has_section(std::string_view name) const {
    for (const auto& s : sections_)
        if (s.name == name) return true;
    return false;
}

const ConfigSection& Config::section(std::string_view name) const {
    for (const auto& s : sections_)
        if (s.name == name) return s;
    throw ConfigError("missing section [" + std::string(name) + "]");
}

std::vector<const ConfigSection*> Config::all(std::string_view name) const {
    std::vector<const ConfigSection*> v;
    for (const auto& s : sections_)
        if (s.name == name) v.push_back(&s);
    return v;
}

std::string Config::resolve(const std::string& path) const {
    const std::filesystem::path p(path);
    if (p.is_absolute() || base_dir_.empty()) return path;
    return (std::filesystem::path(base_dir_) / p).string();
}

}  // namespace levypide
