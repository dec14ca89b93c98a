#pragma once

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "pdeconv/errors.hpp"

namespace pdeconv {

/// Line-oriented key=value store: '#' starts a comment, keys may repeat,
/// insertion order is preserved. Used for plans, tuning specs, sidecar
/// metadata, and solver overrides.
class KeyValues {
public:
    KeyValues() = default;

    static KeyValues parse_text(const std::string& text, const std::string& origin = "<string>") {
        KeyValues kv;
        std::istringstream in(text);
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const std::string trimmed = trim(strip_comment(line));
            if (trimmed.empty()) continue;
            const auto eq = trimmed.find('=');
            if (eq == std::string::npos)
                throw ParseError(origin + ":" + std::to_string(lineno) + ": expected key=value");
            const std::string key = trim(trimmed.substr(0, eq));
            const std::string value = trim(trimmed.substr(eq + 1));
            if (key.empty())
                throw ParseError(origin + ":" + std::to_string(lineno) + ": empty key");
            kv.items_.emplace_back(key, value);
        }
        return kv;
    }

    static KeyValues parse_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ParseError(path + ": cannot open for reading");
        std::ostringstream ss;
        ss << in.rdbuf();
        return parse_text(ss.str(), path);
    }

    void set(const std::string& key, const std::string& value) { items_.emplace_back(key, value); }
    void set_double(const std::string& key, double value) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.17g", value);
        set(key, buf);
    }

    bool has(const std::string& key) const { return get(key).has_value(); }

    std::optional<std::string> get(const std::string& key) const {
        std::optional<std::string> found;
        for (const auto& [k, v] : items_)
            if (k == key) found = v; // last occurrence wins
        return found;
    }

    std::vector<std::string> get_all(const std::string& key) const {
        std::vector<std::string> out;
        for (const auto& [k, v] : items_)
            if (k == key) out.push_back(v);
        return out;
    }

    std::string get_or(const std::string& key, const std::string& fallback) const {
        auto v = get(key);
        return v ? *v : fallback;
    }

    double get_double(const std::string& key) const {
        auto v = get(key);
        if (!v) throw ConfigError("missing key '" + key + "'");
        return to_double(key, *v);
    }

    double get_double_or(const std::string& key, double fallback) const {
        auto v = get(key);
        return v ? to_double(key, *v) : fallback;
    }

    long get_int_or(const std::string& key, long fallback) const {
        auto v = get(key);
        if (!v) return fallback;
        return static_cast<long>(to_double(key, *v));
    }

    bool get_bool_or(const std::string& key, bool fallback) const {
        auto v = get(key);
        if (!v) return fallback;
        if (*v == "true" || *v == "1" || *v == "on" || *v == "yes") return true;
        if (*v == "false" || *v == "0" || *v == "off" || *v == "no") return false;
        throw ConfigError("key '" + key + "': expected boolean, got '" + *v + "'");
    }

    std::vector<double> get_double_list(const std::string& key) const {
        auto v = get(key);
        if (!v) throw ConfigError("missing key '" + key + "'");
        return split_doubles(key, *v);
    }

    std::vector<double> get_double_list_or(const std::string& key, std::vector<double> fallback) const {
        auto v = get(key);
        if (!v) return fallback;
        return split_doubles(key, *v);
    }

    std::vector<std::string> get_string_list_or(const std::string& key,
                                                std::vector<std::string> fallback) const {
        auto v = get(key);
        if (!v) return fallback;
        std::vector<std::string> out;
        for (const auto& tok : split(*v, ','))
            if (!trim(tok).empty()) out.push_back(trim(tok));
        return out;
    }

    const std::vector<std::pair<std::string, std::string>>& items() const { return items_; }

    std::string serialize() const {
        std::ostringstream out;
        for (const auto& [k, v] : items_) out << k << " = " << v << "\n";
        return out.str();
    }

    void write_file(const std::string& path) const {
        std::ofstream out(path);
        if (!out) throw ParseError(path + ": cannot open for writing");
        out << serialize();
        if (!out) throw ParseError(path + ": write failed");
    }

    static std::string trim(const std::string& s) {
        std::size_t b = s.find_first_not_of(" \t\r\n");
        if (b == std::string::npos) return "";
        std::size_t e = s.find_last_not_of(" \t\r\n");
        return s.substr(b, e - b + 1);
    }

    static std::vector<std::string> split(const std::string& s, char sep) {
        std::vector<std::string> out;
        std::string cur;
        for (char c : s) {
            if (c == sep) {
                out.push_back(cur);
                cur.clear();
            } else {
                cur.push_back(c);
            }
        }
        out.push_back(cur);
        return out;
    }

private:
    static std::string strip_comment(const std::string& s) {
        const auto pos = s.find('#');
        return pos == std::string::npos ? s : s.substr(0, pos);
    }

    static double to_double(const std::string& key, const std::string& value) {
        char* end = nullptr;
        const double d = std::strtod(value.c_str(), &end);
        if (end == value.c_str() || *end != '\0')
            throw ConfigError("key '" + key + "': expected number, got '" + value + "'");
        return d;
    }

    static std::vector<double> split_doubles(const std::string& key, const std::string& value) {
        std::vector<double> out;
        for (const auto& tok : split(value, ',')) {
            const std::string t = trim(tok);
            if (t.empty()) continue;
            out.push_back(to_double(key, t));
        }
        if (out.empty()) throw ConfigError("key '" + key + "': empty list");
        return out;
    }

    std::vector<std::pair<std::string, std::string>> items_;
};

} // namespace pdeconv
