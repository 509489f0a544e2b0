#pragma once

#include <cstdio>
#include <fstream>
#include <string>

#include <json.hpp>

#include "har/errors.hpp"
#include "har/eval.hpp"

namespace har {

inline nlohmann::json report_to_json(const EvalReport& rep) {
    nlohmann::json j;
    j["target_classes"] = rep.target_classes;
    j["row_convention"] = "truth";
    j["col_convention"] = "predicted";
    j["confusion"] = rep.confusion;
    j["accuracy"] = rep.accuracy;
    j["kappa"] = rep.kappa;
    j["kappa_degenerate"] = rep.kappa_degenerate;
    nlohmann::json pc = nlohmann::json::array();
    for (const auto& c : rep.per_class)
        pc.push_back({{"class", c.name},
                      {"support", c.support},
                      {"precision", c.precision},
                      {"recall", c.recall}});
    j["per_class"] = pc;
    j["n_windows"] = rep.n_windows;
    j["n_dropped_unmapped"] = rep.n_dropped_unmapped;
    j["class_coverage"] = rep.covered_classes;
    return j;
}

inline EvalReport report_from_json(const nlohmann::json& j) {
    EvalReport rep;
    rep.target_classes = j.at("target_classes").get<std::vector<std::string>>();
    rep.confusion = j.at("confusion").get<std::vector<std::vector<long>>>();
    rep.accuracy = j.at("accuracy").get<double>();
    rep.kappa = j.at("kappa").get<double>();
    rep.kappa_degenerate = j.at("kappa_degenerate").get<bool>();
    for (const auto& c : j.at("per_class")) {
        PerClassMetrics pc;
        pc.name = c.at("class").get<std::string>();
        pc.support = c.at("support").get<long>();
        pc.precision = c.at("precision").get<double>();
        pc.recall = c.at("recall").get<double>();
        rep.per_class.push_back(pc);
    }
    rep.n_windows = j.at("n_windows").get<long>();
    rep.n_dropped_unmapped = j.at("n_dropped_unmapped").get<long>();
    rep.covered_classes = j.at("class_coverage").get<std::vector<std::string>>();
    return rep;
}

inline std::string report_summary_text(const EvalReport& rep) {
    char buf[128];
    std::string s;
    s += "classes (rows = truth, cols = predicted): ";
    for (size_t i = 0; i < rep.target_classes.size(); ++i) {
        if (i) s += ", ";
        s += rep.target_classes[i];
    }
    s += "\n";
    for (const auto& row : rep.confusion) {
        for (size_t i = 0; i < row.size(); ++i) {
            std::snprintf(buf, sizeof(buf), "%8ld", row[i]);
            s += buf;
        }
        s += "\n";
    }
    std::snprintf(buf, sizeof(buf), "accuracy: %.3f\n", rep.accuracy);
    s += buf;
    std::snprintf(buf, sizeof(buf), "kappa: %.3f%s\n", rep.kappa,
                  rep.kappa_degenerate ? " (degenerate)" : "");
    s += buf;
    std::snprintf(buf, sizeof(buf), "windows: %ld (dropped unmapped: %ld)\n", rep.n_windows,
                  rep.n_dropped_unmapped);
    s += buf;
    return s;
}

// Writes <base>.json, <base>.confusion.csv and <base>.txt where base strips a
// trailing ".json" from `path` if present. Byte-stable for a given report.
inline void emit_report(const EvalReport& rep, const std::string& path) {
    std::string base = path;
    if (base.size() > 5 && base.substr(base.size() - 5) == ".json") base = base.substr(0, base.size() - 5);

    {
        std::ofstream os(base + ".json");
        if (!os) throw DataError("report: cannot write '" + base + ".json'");
        os << report_to_json(rep).dump(2) << "\n";
    }
    {
        std::ofstream os(base + ".confusion.csv");
        if (!os) throw DataError("report: cannot write '" + base + ".confusion.csv'");
        os << "truth\\pred";
        for (const auto& c : rep.target_classes) os << "," << c;
        os << "\n";
        for (size_t t = 0; t < rep.confusion.size(); ++t) {
            os << rep.target_classes[t];
            for (long v : rep.confusion[t]) os << "," << v;
            os << "\n";
        }
    }
    {
        std::ofstream os(base + ".txt");
        if (!os) throw DataError("report: cannot write '" + base + ".txt'");
        os << report_summary_text(rep);
    }
}

inline EvalReport load_report(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw DataError("report: cannot open '" + path + "'");
    nlohmann::json j;
    is >> j;
    return report_from_json(j);
}

} // namespace har
