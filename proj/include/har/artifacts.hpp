#pragma once

#include <fstream>
#include <string>
#include <vector>

#include "har/baseline.hpp"
#include "har/detail/csv.hpp"
#include "har/errors.hpp"
#include "har/head.hpp"
#include "har/series.hpp"

namespace har {

// CSV artifact schemas shared by the CLI subcommands.

// preds.csv: subject_id, start_time, pred_class, logit_0..logit_{K-1}
inline void write_preds_csv(const std::string& path, const std::vector<Prediction>& preds, int num_classes) {
    std::ofstream os(path);
    if (!os) throw DataError("preds: cannot write '" + path + "'");
    os << "subject_id,start_time,pred_class";
    for (int k = 0; k < num_classes; ++k) os << ",logit_" << k;
    os << "\n";
    for (const auto& p : preds) {
        os << p.subject_id << ',' << detail::fmt_double(p.start_time) << ',' << p.pred_class;
        for (float v : p.logits) os << ',' << detail::fmt_float(v);
        os << "\n";
    }
}

inline std::vector<Prediction> read_preds_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw DataError("preds: cannot open '" + path + "'");
    std::string line;
    if (!std::getline(is, line)) throw DataError("preds: empty file '" + path + "'");
    const auto header = detail::split(line, ',');
    if (header.size() < 4 || header[0] != "subject_id")
        throw DataError("preds: unexpected header in '" + path + "'");
    const int K = static_cast<int>(header.size()) - 3;
    std::vector<Prediction> out;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const auto cells = detail::split(line, ',');
        if (static_cast<int>(cells.size()) != 3 + K)
            throw DataError("preds: bad row in '" + path + "'");
        Prediction p;
        p.subject_id = cells[0];
        double t;
        long cls;
        if (!detail::parse_double(cells[1], t) || !detail::parse_long(cells[2], cls))
            throw DataError("preds: bad numerics in '" + path + "'");
        p.start_time = t;
        p.pred_class = static_cast<int>(cls);
        for (int k = 0; k < K; ++k) {
            double v;
            if (!detail::parse_double(cells[3 + k], v)) throw DataError("preds: bad logit in '" + path + "'");
            p.logits.push_back(static_cast<float>(v));
        }
        out.push_back(std::move(p));
    }
    return out;
}

struct TruthRow {
    std::string subject_id;
    double start_time = 0.0;
    std::string label; // source class name
};

// truth.csv: subject_id, start_time, label (source class name)
inline void write_truth_csv(const std::string& path, const std::vector<TruthRow>& rows) {
    std::ofstream os(path);
    if (!os) throw DataError("truth: cannot write '" + path + "'");
    os << "subject_id,start_time,label\n";
    for (const auto& r : rows)
        os << r.subject_id << ',' << detail::fmt_double(r.start_time) << ',' << r.label << "\n";
}

inline std::vector<TruthRow> read_truth_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw DataError("truth: cannot open '" + path + "'");
    std::string line;
    if (!std::getline(is, line)) throw DataError("truth: empty file '" + path + "'");
    std::vector<TruthRow> out;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const auto cells = detail::split(line, ',');
        if (cells.size() != 3) throw DataError("truth: bad row in '" + path + "'");
        TruthRow r;
        r.subject_id = cells[0];
        if (!detail::parse_double(cells[1], r.start_time))
            throw DataError("truth: bad start_time in '" + path + "'");
        r.label = cells[2];
        out.push_back(std::move(r));
    }
    return out;
}

// features.csv: subject, start_time, the 8 statistics, label (-1 = none)
inline void write_features_csv(const std::string& path, const std::vector<Window>& windows) {
    std::ofstream os(path);
    if (!os) throw DataError("features: cannot write '" + path + "'");
    os << "subject_id,start_time,mean_x,mean_y,mean_z,std_x,std_y,std_z,mean_norm,std_norm,label\n";
    for (const auto& w : windows) {
        const StatFeatures f = stat_features(w);
        os << w.subject_id << ',' << detail::fmt_double(w.start_time);
        for (float v : f.as_vector()) os << ',' << detail::fmt_float(v);
        os << ',' << w.label << "\n";
    }
}

// embeddings.csv: subject_id, start_time, label, e0..e{d-1}
inline void write_embeddings_csv(const std::string& path, const std::vector<Window>& windows,
                                 const std::vector<std::vector<float>>& embeddings) {
    if (windows.size() != embeddings.size()) throw DataError("embeddings: size mismatch");
    std::ofstream os(path);
    if (!os) throw DataError("embeddings: cannot write '" + path + "'");
    const size_t d = embeddings.empty() ? 0 : embeddings[0].size();
    os << "subject_id,start_time,label";
    for (size_t k = 0; k < d; ++k) os << ",e" << k;
    os << "\n";
    for (size_t i = 0; i < windows.size(); ++i) {
        os << windows[i].subject_id << ',' << detail::fmt_double(windows[i].start_time) << ','
           << windows[i].label;
        for (float v : embeddings[i]) os << ',' << detail::fmt_float(v);
        os << "\n";
    }
}

} // namespace har
