#pragma once

#include <charconv>
#include <cstdio>
#include <string>
#include <string_view>
#include <vector>

namespace har::detail {

inline std::vector<std::string> split(std::string_view line, char delim) {
    std::vector<std::string> out;
    size_t pos = 0;
    while (true) {
        size_t next = line.find(delim, pos);
        if (next == std::string_view::npos) {
            out.emplace_back(line.substr(pos));
            break;
        }
        out.emplace_back(line.substr(pos, next - pos));
        pos = next + 1;
    }
    return out;
}

// Whitespace-separated split (PAMAP2 style), skipping runs of blanks.
inline std::vector<std::string> split_ws(std::string_view line) {
    std::vector<std::string> out;
    size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
        size_t start = i;
        while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
        if (i > start) out.emplace_back(line.substr(start, i - start));
    }
    return out;
}

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

// Strict full-token parse; rejects trailing garbage. NaN/Inf tokens parse as
// non-finite values and are left to the caller's finiteness policy.
inline bool parse_double(std::string_view tok, double& out) {
    tok = trim(tok);
    if (tok.empty()) return false;
    const char* first = tok.data();
    const char* last = tok.data() + tok.size();
    auto res = std::from_chars(first, last, out);
    return res.ec == std::errc() && res.ptr == last;
}

inline bool parse_long(std::string_view tok, long& out) {
    tok = trim(tok);
    if (tok.empty()) return false;
    auto res = std::from_chars(tok.data(), tok.data() + tok.size(), out);
    return res.ec == std::errc() && res.ptr == tok.data() + tok.size();
}

// Deterministic float formatting for CSV artifacts (round-trip precision).
inline std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::string fmt_float(float v) {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%.9g", static_cast<double>(v));
    return buf;
}

} // namespace har::detail
