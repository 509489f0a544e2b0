#pragma once

#include <fstream>
#include <string>

#include <json.hpp>

#include "har/errors.hpp"
#include "har/eval.hpp"

namespace har {

// Mapping file schema:
//   {
//     "target_classes": ["sleep", "sit-stand", ...],
//     "unmapped_policy": "drop" | "error",
//     "target": { "walking": { "sources": ["walk", "run", ...] }, ... }
//   }
inline LabelMapping mapping_from_json(const nlohmann::json& j) {
    LabelMapping m;
    m.target_classes = j.at("target_classes").get<std::vector<std::string>>();
    if (j.contains("unmapped_policy")) {
        const std::string p = j.at("unmapped_policy").get<std::string>();
        if (p == "drop")
            m.unmapped_policy = UnmappedPolicy::Drop;
        else if (p == "error")
            m.unmapped_policy = UnmappedPolicy::Error;
        else
            throw ConfigError("mapping: unknown unmapped_policy '" + p + "'");
    }
    for (const auto& [target, body] : j.at("target").items()) {
        for (const auto& src : body.at("sources")) {
            const std::string s = src.get<std::string>();
            if (m.source_to_target.count(s))
                throw ConfigError("mapping: source '" + s + "' mapped twice");
            m.source_to_target[s] = target;
        }
    }
    validate(m);
    return m;
}

inline nlohmann::json mapping_to_json(const LabelMapping& m) {
    nlohmann::json j;
    j["target_classes"] = m.target_classes;
    j["unmapped_policy"] = m.unmapped_policy == UnmappedPolicy::Drop ? "drop" : "error";
    nlohmann::json targets = nlohmann::json::object();
    for (const auto& t : m.target_classes) targets[t] = {{"sources", nlohmann::json::array()}};
    for (const auto& [src, dst] : m.source_to_target) targets[dst]["sources"].push_back(src);
    j["target"] = targets;
    return j;
}

inline LabelMapping load_mapping(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("mapping: cannot open '" + path + "'");
    nlohmann::json j;
    try {
        is >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("mapping: bad JSON in '" + path + "': " + e.what());
    }
    return mapping_from_json(j);
}

inline void save_mapping(const LabelMapping& m, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw DataError("mapping: cannot write '" + path + "'");
    os << mapping_to_json(m).dump(2) << "\n";
}

} // namespace har
