#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "har/errors.hpp"
#include "har/rng.hpp"

namespace har {

// ============================================================================
// Label-semantics mapping (cross-dataset class translation)
// ============================================================================

enum class UnmappedPolicy { Drop, Error };

struct LabelMapping {
    std::vector<std::string> target_classes;             // ordered; defines class ids
    std::map<std::string, std::string> source_to_target; // source name -> target name
    UnmappedPolicy unmapped_policy = UnmappedPolicy::Drop;

    int target_index(const std::string& target) const {
        for (size_t i = 0; i < target_classes.size(); ++i)
            if (target_classes[i] == target) return static_cast<int>(i);
        return -1;
    }

    static LabelMapping identity(const std::vector<std::string>& classes) {
        LabelMapping m;
        m.target_classes = classes;
        for (const auto& c : classes) m.source_to_target[c] = c;
        return m;
    }
};

inline void validate(const LabelMapping& m) {
    if (m.target_classes.empty()) throw ConfigError("mapping: no target classes");
    std::set<std::string> seen(m.target_classes.begin(), m.target_classes.end());
    if (seen.size() != m.target_classes.size()) throw ConfigError("mapping: duplicate target class");
    for (const auto& [src, dst] : m.source_to_target)
        if (!seen.count(dst))
            throw ConfigError("mapping: source '" + src + "' maps to unknown target '" + dst + "'");
}

struct MappedLabels {
    std::vector<std::optional<int>> target_ids; // nullopt = dropped
    size_t n_dropped = 0;
};

inline MappedLabels apply_mapping(const std::vector<std::string>& labels, const LabelMapping& m) {
    validate(m);
    MappedLabels out;
    out.target_ids.reserve(labels.size());
    for (const auto& lbl : labels) {
        auto it = m.source_to_target.find(lbl);
        if (it == m.source_to_target.end()) {
            if (m.unmapped_policy == UnmappedPolicy::Error)
                throw DataError("mapping: unmapped source label '" + lbl + "'");
            out.target_ids.push_back(std::nullopt);
            ++out.n_dropped;
        } else {
            out.target_ids.push_back(m.target_index(it->second));
        }
    }
    return out;
}

// ============================================================================
// Metrics
// ============================================================================

// counts[t][p]: rows are truth, columns are predictions.
inline std::vector<std::vector<long>> confusion_matrix(const std::vector<int>& truth,
                                                       const std::vector<int>& pred, int num_classes) {
    if (truth.size() != pred.size())
        throw DataError("confusion: truth/pred length mismatch (" + std::to_string(truth.size()) +
                        " vs " + std::to_string(pred.size()) + ")");
    std::vector<std::vector<long>> m(static_cast<size_t>(num_classes),
                                     std::vector<long>(static_cast<size_t>(num_classes), 0));
    for (size_t i = 0; i < truth.size(); ++i) {
        if (truth[i] < 0 || truth[i] >= num_classes || pred[i] < 0 || pred[i] >= num_classes)
            throw DataError("confusion: label out of range at index " + std::to_string(i));
        ++m[truth[i]][pred[i]];
    }
    return m;
}

struct KappaResult {
    double kappa = 0.0;
    bool degenerate = false; // expected agreement p_e == 1 (single populated cell layout)
};

// Cohen's kappa: (p_o - p_e) / (1 - p_e) with p_e from row/column marginals.
inline KappaResult cohens_kappa(const std::vector<std::vector<long>>& confusion) {
    const size_t k = confusion.size();
    if (k == 0) throw DataError("kappa: empty confusion matrix");
    long total = 0, diag = 0;
    std::vector<long> row(k, 0), col(k, 0);
    for (size_t t = 0; t < k; ++t) {
        if (confusion[t].size() != k) throw DataError("kappa: ragged confusion matrix");
        for (size_t p = 0; p < k; ++p) {
            const long c = confusion[t][p];
            if (c < 0) throw DataError("kappa: negative count");
            total += c;
            row[t] += c;
            col[p] += c;
            if (t == p) diag += c;
        }
    }
    if (total == 0) throw DataError("kappa: empty confusion matrix");
    const double n = static_cast<double>(total);
    const double p_o = static_cast<double>(diag) / n;
    double p_e = 0.0;
    for (size_t i = 0; i < k; ++i) p_e += (static_cast<double>(row[i]) / n) * (static_cast<double>(col[i]) / n);
    KappaResult r;
    if (p_e >= 1.0) {
        r.degenerate = true;
        r.kappa = (p_o >= 1.0) ? 1.0 : 0.0;
        return r;
    }
    r.kappa = (p_o - p_e) / (1.0 - p_e);
    return r;
}

struct PerClassMetrics {
    std::string name;
    long support = 0;    // truth count
    double precision = 0.0;
    double recall = 0.0;
};

struct EvalReport {
    std::vector<std::string> target_classes;
    std::vector<std::vector<long>> confusion; // rows = truth, cols = predicted
    double accuracy = 0.0;
    double kappa = 0.0;
    bool kappa_degenerate = false;
    std::vector<PerClassMetrics> per_class;
    long n_windows = 0;
    long n_dropped_unmapped = 0;
    std::vector<std::string> covered_classes; // target classes with truth support
};

inline EvalReport evaluate(const std::vector<int>& truth, const std::vector<int>& pred,
                           const std::vector<std::string>& target_classes, long n_dropped_unmapped = 0) {
    const int K = static_cast<int>(target_classes.size());
    EvalReport rep;
    rep.target_classes = target_classes;
    rep.confusion = confusion_matrix(truth, pred, K);
    rep.n_windows = static_cast<long>(truth.size());
    rep.n_dropped_unmapped = n_dropped_unmapped;

    long diag = 0;
    std::vector<long> row(K, 0), col(K, 0);
    for (int t = 0; t < K; ++t)
        for (int p = 0; p < K; ++p) {
            row[t] += rep.confusion[t][p];
            col[p] += rep.confusion[t][p];
            if (t == p) diag += rep.confusion[t][p];
        }
    rep.accuracy = rep.n_windows ? static_cast<double>(diag) / static_cast<double>(rep.n_windows) : 0.0;
    auto kr = cohens_kappa(rep.confusion);
    rep.kappa = kr.kappa;
    rep.kappa_degenerate = kr.degenerate;
    for (int k = 0; k < K; ++k) {
        PerClassMetrics pc;
        pc.name = target_classes[k];
        pc.support = row[k];
        pc.precision = col[k] ? static_cast<double>(rep.confusion[k][k]) / static_cast<double>(col[k]) : 0.0;
        pc.recall = row[k] ? static_cast<double>(rep.confusion[k][k]) / static_cast<double>(row[k]) : 0.0;
        rep.per_class.push_back(pc);
        if (row[k] > 0) rep.covered_classes.push_back(target_classes[k]);
    }
    return rep;
}

// ============================================================================
// Subject-wise splits
// ============================================================================

enum class SplitPolicy { RandomWindows, HeldOutSubjects };

struct SplitConfig {
    SplitPolicy policy = SplitPolicy::HeldOutSubjects;
    double test_fraction = 0.2;
    uint64_t seed = 0;
};

struct SplitResult {
    std::vector<size_t> train_idx;
    std::vector<size_t> test_idx;
};

// subjects[i] names item i's subject. held_out_subjects guarantees no subject
// appears on both sides.
inline SplitResult subject_split(const std::vector<std::string>& subjects, const SplitConfig& cfg) {
    if (cfg.test_fraction <= 0.0 || cfg.test_fraction >= 1.0)
        throw ConfigError("split: test_fraction must be in (0, 1)");
    SplitResult res;
    Rng rng = Rng(cfg.seed).split(0x5B117);
    if (cfg.policy == SplitPolicy::RandomWindows) {
        std::vector<size_t> order(subjects.size());
        for (size_t i = 0; i < order.size(); ++i) order[i] = i;
        rng.shuffle(order);
        const size_t n_test = static_cast<size_t>(std::llround(cfg.test_fraction * order.size()));
        for (size_t i = 0; i < order.size(); ++i)
            (i < n_test ? res.test_idx : res.train_idx).push_back(order[i]);
    } else {
        std::vector<std::string> uniq;
        std::set<std::string> seen;
        for (const auto& s : subjects)
            if (seen.insert(s).second) uniq.push_back(s);
        if (uniq.size() < 2) throw DataError("split: held_out_subjects needs at least 2 subjects");
        rng.shuffle(uniq);
        size_t n_test = static_cast<size_t>(std::llround(cfg.test_fraction * uniq.size()));
        n_test = std::clamp<size_t>(n_test, 1, uniq.size() - 1);
        std::set<std::string> test_subjects(uniq.begin(), uniq.begin() + n_test);
        for (size_t i = 0; i < subjects.size(); ++i)
            (test_subjects.count(subjects[i]) ? res.test_idx : res.train_idx).push_back(i);
    }
    std::sort(res.train_idx.begin(), res.train_idx.end());
    std::sort(res.test_idx.begin(), res.test_idx.end());
    return res;
}

} // namespace har
