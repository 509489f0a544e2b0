#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "har/augment.hpp"
#include "har/detail/csv.hpp"
#include "har/errors.hpp"
#include "har/rng.hpp"
#include "har/series.hpp"

namespace har {

struct PairingConfig {
    double delta_t_max = 60.0; // temporal proximity horizon, seconds
    int batch_pairs = 128;     // b: positive pairs per batch
    double aug_fraction = 0.5; // fraction of positives built by augmentation
    uint64_t seed = 0;
};

inline void validate(const PairingConfig& cfg) {
    if (cfg.delta_t_max <= 0.0) throw ConfigError("pairing: delta_t_max must be > 0");
    if (cfg.batch_pairs < 2) throw ConfigError("pairing: batch_pairs must be >= 2");
    if (cfg.aug_fraction < 0.0 || cfg.aug_fraction > 1.0)
        throw ConfigError("pairing: aug_fraction must be in [0, 1]");
}

// Read-only view of a window corpus grouped by subject, time-sorted.
struct CorpusIndex {
    std::vector<Window> windows;
    std::vector<std::string> subjects;                    // sorted unique
    std::map<std::string, std::vector<size_t>> by_subject; // window indices, by start_time

    size_t size() const { return windows.size(); }
};

inline CorpusIndex build_corpus_index(std::vector<Window> windows) {
    CorpusIndex idx;
    idx.windows = std::move(windows);
    for (size_t i = 0; i < idx.windows.size(); ++i)
        idx.by_subject[idx.windows[i].subject_id].push_back(i);
    for (auto& [subject, v] : idx.by_subject) {
        std::sort(v.begin(), v.end(), [&](size_t a, size_t b) {
            return idx.windows[a].start_time < idx.windows[b].start_time;
        });
        idx.subjects.push_back(subject);
    }
    return idx;
}

// Uniform subject -> uniform eligible anchor -> uniform eligible partner.
// Sampling subjects first keeps long recordings from dominating.
class TemporalPairSampler {
public:
    TemporalPairSampler(const CorpusIndex& index, double delta_t_max)
        : index_(&index), dt_(delta_t_max) {
        for (const auto& subject : index.subjects) {
            const auto& wins = index.by_subject.at(subject);
            std::vector<size_t> anchors; // positions within wins
            for (size_t i = 0; i < wins.size(); ++i)
                if (!partners_of(wins, i).empty()) anchors.push_back(i);
            if (!anchors.empty()) {
                eligible_subjects_.push_back(subject);
                anchors_.push_back(std::move(anchors));
            }
        }
        if (eligible_subjects_.empty())
            throw DataError("pairing: no subject has two windows within " + std::to_string(dt_) +
                            " s of each other");
    }

    std::pair<size_t, size_t> sample(Rng& rng) const {
        const size_t si = rng.index(eligible_subjects_.size());
        const auto& wins = index_->by_subject.at(eligible_subjects_[si]);
        const auto& anchors = anchors_[si];
        const size_t ai = anchors[rng.index(anchors.size())];
        const auto partners = partners_of(wins, ai);
        const size_t pi = partners[rng.index(partners.size())];
        return {wins[ai], wins[pi]};
    }

    const std::vector<std::string>& eligible_subjects() const { return eligible_subjects_; }

    // Positions (within the subject's sorted list) of windows with
    // 0 < |dt| <= delta_t_max relative to the anchor position.
    std::vector<size_t> partners_of(const std::vector<size_t>& wins, size_t anchor_pos) const {
        std::vector<size_t> out;
        const double t0 = index_->windows[wins[anchor_pos]].start_time;
        for (size_t j = anchor_pos; j-- > 0;) {
            const double d = t0 - index_->windows[wins[j]].start_time;
            if (d > dt_) break;
            if (d > 0.0) out.push_back(j);
        }
        std::reverse(out.begin(), out.end());
        for (size_t j = anchor_pos + 1; j < wins.size(); ++j) {
            const double d = index_->windows[wins[j]].start_time - t0;
            if (d > dt_) break;
            if (d > 0.0) out.push_back(j);
        }
        return out;
    }

private:
    const CorpusIndex* index_;
    double dt_;
    std::vector<std::string> eligible_subjects_;
    std::vector<std::vector<size_t>> anchors_; // per eligible subject
};

inline std::pair<Window, Window> sample_temporal_pair(const CorpusIndex& index, const PairingConfig& cfg,
                                                      Rng& rng) {
    validate(cfg);
    TemporalPairSampler sampler(index, cfg.delta_t_max);
    auto [a, b] = sampler.sample(rng);
    return {index.windows[a], index.windows[b]};
}

// ============================================================================
// Batch label/weight matrices
// ============================================================================

// labels[i][j] = 1 iff {i, j} = {k, k+b} for some k < b, or i = j.
inline std::vector<float> pair_label_matrix(int b) {
    const int n = 2 * b;
    std::vector<float> m(static_cast<size_t>(n) * n, 0.0f);
    for (int i = 0; i < n; ++i) m[static_cast<size_t>(i) * n + i] = 1.0f;
    for (int k = 0; k < b; ++k) {
        m[static_cast<size_t>(k) * n + (k + b)] = 1.0f;
        m[static_cast<size_t>(k + b) * n + k] = 1.0f;
    }
    return m;
}

// 1 on the 2b positive off-diagonal cells, 0 on the diagonal, 1/(2b-2)
// elsewhere, so total positive weight equals total negative weight (= 2b).
// Stored at double precision: the cell value 1/(2b-2) rounds systematically
// in f32 and the (2b)^2-cell mass drifts past tolerance for large b.
inline std::vector<double> pair_weight_matrix(int b) {
    const int n = 2 * b;
    const double neg = 1.0 / static_cast<double>(n - 2);
    std::vector<double> m(static_cast<size_t>(n) * n, neg);
    for (int i = 0; i < n; ++i) m[static_cast<size_t>(i) * n + i] = 0.0;
    for (int k = 0; k < b; ++k) {
        m[static_cast<size_t>(k) * n + (k + b)] = 1.0;
        m[static_cast<size_t>(k + b) * n + k] = 1.0;
    }
    return m;
}

enum class PairSource { Temporal, Augmentation };

struct PairProvenance {
    PairSource source;
    std::string subject_id;
    double t_anchor = 0.0;
    double t_partner = 0.0;
    std::string augmentation; // empty for temporal pairs
};

// 2b windows ordered so (i, i+b) are the sampled coincident pairs, plus the
// (2b)x(2b) label and weight matrices.
struct PairBatch {
    std::vector<Window> windows;  // size 2b
    std::vector<float> labels;    // (2b)^2, row-major
    std::vector<double> weights;  // (2b)^2, row-major
    std::vector<PairProvenance> provenance; // size b

    int pairs() const { return static_cast<int>(windows.size() / 2); }
};

// Uniform window draw for augmentation anchors, subject-first like the
// temporal sampler.
inline const Window& sample_any_window(const CorpusIndex& index, Rng& rng) {
    const auto& subject = index.subjects[rng.index(index.subjects.size())];
    const auto& wins = index.by_subject.at(subject);
    return index.windows[wins[rng.index(wins.size())]];
}

inline PairBatch build_pair_batch(const CorpusIndex& index, const PairingConfig& cfg,
                                  const std::vector<AugmentationSpec>& aug_menu, Rng& rng) {
    validate(cfg);
    const int b = cfg.batch_pairs;
    const int n_aug = static_cast<int>(std::llround(cfg.aug_fraction * b));
    const int n_temporal = b - n_aug;
    if (n_aug > 0 && aug_menu.empty()) throw ConfigError("pairing: augmentation requested with empty menu");

    TemporalPairSampler sampler(index, cfg.delta_t_max);

    PairBatch batch;
    batch.windows.resize(static_cast<size_t>(2) * b);
    batch.provenance.resize(static_cast<size_t>(b));
    for (int k = 0; k < b; ++k) {
        if (k < n_temporal) {
            auto [ai, pi] = sampler.sample(rng);
            const Window& a = index.windows[ai];
            const Window& p = index.windows[pi];
            batch.windows[k] = a;
            batch.windows[k + b] = p;
            batch.provenance[k] = {PairSource::Temporal, a.subject_id, a.start_time, p.start_time, ""};
        } else {
            const Window& w = sample_any_window(index, rng);
            AugChoice choice;
            auto [orig, aug] = make_augmented_pair(w, aug_menu, rng, &choice);
            batch.windows[k] = std::move(orig);
            batch.windows[k + b] = std::move(aug);
            batch.provenance[k] = {PairSource::Augmentation, w.subject_id, w.start_time, w.start_time,
                                   choice.description};
        }
    }
    batch.labels = pair_label_matrix(b);
    batch.weights = pair_weight_matrix(b);
    return batch;
}

// Debug dump: subject ids, start times and augmentation choices, one line of
// JSON per batch (kept hand-rolled so the hot path stays header-local).
inline std::string dump_batch_provenance_json(const PairBatch& batch) {
    std::string s = "{\"pairs\":[";
    for (size_t k = 0; k < batch.provenance.size(); ++k) {
        const auto& p = batch.provenance[k];
        if (k) s += ',';
        s += "{\"source\":\"";
        s += (p.source == PairSource::Temporal ? "temporal" : "augmentation");
        s += "\",\"subject\":\"" + p.subject_id + "\"";
        s += ",\"t_anchor\":" + detail::fmt_double(p.t_anchor);
        s += ",\"t_partner\":" + detail::fmt_double(p.t_partner);
        if (!p.augmentation.empty()) s += ",\"augmentation\":\"" + p.augmentation + "\"";
        s += "}";
    }
    s += "]}";
    return s;
}

} // namespace har
