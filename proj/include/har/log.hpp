#pragma once

#include <cstdio>
#include <iostream>
#include <string>

#include <json.hpp>

namespace har::log {

// Structured events as line-delimited JSON on stderr; human-readable summary
// lines on stdout.
inline void event(const std::string& name, const nlohmann::json& fields = nlohmann::json::object()) {
    nlohmann::json j = fields;
    j["event"] = name;
    std::cerr << j.dump() << "\n";
}

inline void info(const std::string& message) { std::cout << message << "\n"; }

} // namespace har::log
