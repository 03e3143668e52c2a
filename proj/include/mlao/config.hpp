#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <ostream>
#include <set>
#include <string>
#include <vector>

namespace mlao {

/// Plain-text key=value settings. Blank lines and lines starting with '#'
/// are ignored; keys and values are trimmed. Typed getters throw
/// std::invalid_argument naming the key on malformed values.
class KeyValueConfig {
public:
    KeyValueConfig() = default;
    static KeyValueConfig parse(const std::string& text);
    static KeyValueConfig load(const std::filesystem::path& path);

    bool has(const std::string& key) const;
    void set(const std::string& key, const std::string& value);

    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key, double fallback) const;
    long long get_int(const std::string& key, long long fallback) const;
    std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    std::vector<double> get_doubles(const std::string& key, const std::vector<double>& fallback) const;

    /// Keys that were present but never read.
    std::vector<std::string> unused_keys() const;
    const std::map<std::string, std::string>& entries() const { return entries_; }
    std::string serialize() const;

private:
    std::map<std::string, std::string> entries_;
    mutable std::set<std::string> used_;
};

std::string format_double(double v);
std::vector<double> parse_double_list(const std::string& s);

/// RFC-4180 style CSV: fields containing comma, quote or newline are quoted
/// with embedded quotes doubled; records end with "\n".
class CsvWriter {
public:
    explicit CsvWriter(std::ostream& out) : out_(out) {}
    void row(const std::vector<std::string>& fields);
    /// Lines written before the header as "# key=value" comments.
    void comment(const std::string& text);

    static std::string quote(const std::string& field);

private:
    std::ostream& out_;
};

std::vector<std::vector<std::string>> parse_csv(const std::string& text);

} // namespace mlao
