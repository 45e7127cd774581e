#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace levypide {

/// One `[name]` block: key = value entries and bare numeric rows, both in file order.
struct ConfigSection {
    std::string name;
    std::vector<std::pair<std::string, std::string>> entries;
    std::vector<std::vector<double>> rows;

    bool has(std::string_view key) const;
    std::optional<std::string> find(std::string_view key) const;
    std::string get_string(std::string_view key) const;  ///< ConfigError if missing
    std::string get_string(std::string_view key, std::string_view fallback) const;
    double get_double(std::string_view key) const;
    double get_double(std::string_view key, double fallback) const;
    int get_int(std::string_view key, int fallback) const;
    bool get_bool(std::string_view key, bool fallback) const;
    /// Whitespace-separated numbers in a value, e.g. `spots = 90 100 110`.
    std::vector<double> get_list(std::string_view key) const;
};

/// Grammar, one construct per line:
///   `# comment` (also trailing after a value), `[section]`, `key = value`,
///   or a row of whitespace-separated numbers belonging to the current section.
/// Lines before the first header belong to an unnamed section. Sections may repeat.
class Config {
public:
    static Config parse(std::string_view text, const std::string& origin = "<string>");
    static Config load(const std::string& path);

    /// Canonical text: one blank line between sections, `key = value`, rows with %.17g.
    std::string serialize() const;
    /// FNV-1a 64 of serialize(), as 16 hex digits.
    std::string hash() const;

    const std::vector<ConfigSection>& sections() const { return sections_; }
    std::vector<ConfigSection>& sections() { return sections_; }
    bool has_section(std::string_view name) const;
    const ConfigSection& section(std::string_view name) const;  ///< first match; ConfigError if absent
    std::vector<const ConfigSection*> all(std::string_view name) const;
    /// Directory of the loaded file, for resolving relative paths ("" for parsed strings).
    const std::string& base_dir() const { return base_dir_; }
    std::string resolve(const std::string& path) const;

private:
    std::vector<ConfigSection> sections_;
    std::string base_dir_;
};

std::uint64_t fnv1a64(std::string_view data);

}  // namespace levypide
