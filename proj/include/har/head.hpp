#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "har/encoder.hpp"
#include "har/errors.hpp"
#include "har/nn/layers.hpp"
#include "har/nn/loss.hpp"
#include "har/nn/optimizer.hpp"

namespace har {

enum class SmoothKind { Mean, Median };

struct HeadConfig {
    int layers = 5;           // dense layers including the output layer
    int units = 128;
    int num_classes = 0;      // K, required
    int input_dim = 256;
    double imbalance_cap = 5.0;
    double smoothing_seconds = 120.0;
    double segment_gap_seconds = 20.0;
    SmoothKind smooth_kind = SmoothKind::Mean;
    bool smooth_centered = true; // false = trailing window
    int epochs = 100;
    double lr = 1e-3;
    int batch = 256;
    uint64_t seed = 0;
};

inline void validate(const HeadConfig& cfg) {
    if (cfg.layers < 1) throw ConfigError("head: layers must be >= 1");
    if (cfg.num_classes < 2) throw ConfigError("head: num_classes must be >= 2");
    if (cfg.imbalance_cap < 1.0) throw ConfigError("head: imbalance_cap must be >= 1");
}

// Minority-class re-weighting: w_k = max(1, max_count / (cap * count_k)),
// so every class's effective count reaches at least max_count / cap. Classes
// already within the cap keep weight 1; absent classes get weight 0.
inline std::vector<float> class_weights(const std::vector<long>& counts, double cap) {
    long max_count = 0;
    int nonzero = 0;
    for (long c : counts) {
        if (c < 0) throw ConfigError("class_weights: negative count");
        if (c > 0) ++nonzero;
        max_count = std::max(max_count, c);
    }
    if (nonzero < 2) throw DataError("class_weights: need at least two non-empty classes");
    std::vector<float> w(counts.size());
    for (size_t k = 0; k < counts.size(); ++k) {
        if (counts[k] == 0) {
            w[k] = 0.0f; // caller should warn: class absent from training data
        } else {
            const double ideal = static_cast<double>(max_count) / (cap * static_cast<double>(counts[k]));
            w[k] = static_cast<float>(std::max(1.0, ideal));
        }
    }
    return w;
}

struct LabeledEmbedding {
    std::vector<float> embedding;
    int label = 0;
    std::string subject_id;
    double start_time = 0.0;
};

struct HeadModel {
    HeadConfig cfg;
    nn::Network net;
    nn::ParamStore<float> params;
};

// input_dim -> units x (layers-1) -> K with ReLU between dense layers.
inline nn::Network build_head_net(const HeadConfig& cfg) {
    nn::Network net;
    net.prefix = "head.";
    int in = cfg.input_dim;
    for (int i = 0; i < cfg.layers - 1; ++i) {
        net.layers.push_back(nn::dense(in, cfg.units));
        net.layers.push_back(nn::relu());
        in = cfg.units;
    }
    net.layers.push_back(nn::dense(in, cfg.num_classes));
    return net;
}

struct HeadTrainResult {
    HeadModel model;
    std::vector<TrainLogRow> log; // per epoch: mean loss
};

// Class-weighted categorical cross-entropy over mini-batches of a seeded
// shuffled order. Evaluation never applies the weights; they exist only to
// keep minority classes from collapsing during training.
inline HeadTrainResult train_head(const std::vector<LabeledEmbedding>& data, const HeadConfig& cfg,
                                  const std::function<void(const TrainLogRow&)>& on_log = nullptr) {
    validate(cfg);
    if (data.empty()) throw DataError("train_head: no labeled embeddings");
    const int K = cfg.num_classes;
    std::vector<long> counts(static_cast<size_t>(K), 0);
    for (const auto& e : data) {
        if (e.label < 0 || e.label >= K)
            throw DataError("train_head: label " + std::to_string(e.label) + " out of range");
        ++counts[e.label];
    }
    const std::vector<float> cw = class_weights(counts, cfg.imbalance_cap);

    HeadTrainResult res;
    res.model.cfg = cfg;
    res.model.net = build_head_net(cfg);
    res.model.params = nn::init_params<float>(res.model.net, cfg.seed);

    nn::Adam<float> opt(nn::AdamConfig{cfg.lr, 0.9, 0.999, 1e-8});
    Rng rng = Rng(cfg.seed).split(0x5EAD);
    std::vector<size_t> order(data.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;

    const int d = cfg.input_dim;
    const auto t0 = std::chrono::steady_clock::now();
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        rng.shuffle(order);
        double epoch_loss = 0.0;
        long batches = 0;
        for (size_t at = 0; at < order.size(); at += static_cast<size_t>(cfg.batch)) {
            const size_t n = std::min(static_cast<size_t>(cfg.batch), order.size() - at);
            auto x = nn::Tensor<float>::zeros({static_cast<int>(n), d});
            std::vector<int> labels(n);
            for (size_t i = 0; i < n; ++i) {
                const auto& e = data[order[at + i]];
                if (static_cast<int>(e.embedding.size()) != d)
                    throw DataError("train_head: embedding dim mismatch");
                std::copy(e.embedding.begin(), e.embedding.end(), x.data.begin() + i * d);
                labels[i] = e.label;
            }
            auto [logits, tape] = nn::forward(res.model.net, res.model.params, x);
            auto loss = nn::categorical_xent(logits, labels, cw);
            nn::backward(tape, loss.dlogits);
            opt.step(res.model.params);
            epoch_loss += loss.value;
            ++batches;
        }
        const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                            std::chrono::steady_clock::now() - t0)
                            .count();
        TrainLogRow row{epoch + 1, batches ? epoch_loss / static_cast<double>(batches) : 0.0,
                        static_cast<long>(ms)};
        res.log.push_back(row);
        if (on_log) on_log(row);
    }
    return res;
}

struct TimedLogits {
    double start_time = 0.0;
    std::vector<float> logits;
};

// Temporal smoothing of one subject's time-sorted logits. An entry j joins
// entry i's window when both sit in the same contiguous segment (gaps larger
// than segment_gap_seconds split segments) and t_j falls in
// [t_i - S/2, t_i + S/2) for centered mode, (t_i - S, t_i] for trailing.
// The half-open bound keeps a 120 s window at 10 s stride to at most 12
// entries. smoothing_seconds <= 0 disables smoothing.
inline std::vector<TimedLogits> smooth_logits(const std::vector<TimedLogits>& seq, const HeadConfig& cfg) {
    if (seq.empty() || cfg.smoothing_seconds <= 0.0) return seq;
    const size_t n = seq.size();
    for (size_t i = 1; i < n; ++i)
        if (seq[i].start_time < seq[i - 1].start_time)
            throw DataError("smooth_logits: entries not time-sorted");

    // segment id per entry
    std::vector<int> seg(n, 0);
    for (size_t i = 1; i < n; ++i)
        seg[i] = seg[i - 1] + (seq[i].start_time - seq[i - 1].start_time > cfg.segment_gap_seconds ? 1 : 0);

    std::vector<TimedLogits> out(n);
    const size_t K = seq[0].logits.size();
    std::vector<float> buf;
    for (size_t i = 0; i < n; ++i) {
        const double t = seq[i].start_time;
        double lo, hi;
        if (cfg.smooth_centered) {
            lo = t - cfg.smoothing_seconds / 2.0;
            hi = t + cfg.smoothing_seconds / 2.0; // exclusive
        } else {
            lo = t - cfg.smoothing_seconds;
            hi = t; // handled inclusively below
        }
        std::vector<size_t> members;
        members.push_back(i);
        for (size_t j = i; j-- > 0;) {
            if (seg[j] != seg[i]) break;
            const double tj = seq[j].start_time;
            if (tj < lo) break;
            if (cfg.smooth_centered ? (tj < hi) : (tj <= hi)) members.push_back(j);
        }
        for (size_t j = i + 1; j < n; ++j) {
            if (seg[j] != seg[i]) break;
            const double tj = seq[j].start_time;
            if (cfg.smooth_centered ? (tj >= hi) : (tj > hi)) break;
            if (tj >= lo) members.push_back(j);
        }

        out[i].start_time = t;
        out[i].logits.assign(K, 0.0f);
        if (cfg.smooth_kind == SmoothKind::Mean) {
            // double accumulation keeps constant sequences exact fixed points
            for (size_t k = 0; k < K; ++k) {
                double acc = 0.0;
                for (size_t j : members) acc += static_cast<double>(seq[j].logits[k]);
                out[i].logits[k] = static_cast<float>(acc / static_cast<double>(members.size()));
            }
        } else {
            for (size_t k = 0; k < K; ++k) {
                buf.clear();
                for (size_t j : members) buf.push_back(seq[j].logits[k]);
                const size_t mid = buf.size() / 2;
                std::nth_element(buf.begin(), buf.begin() + mid, buf.end());
                float med = buf[mid];
                if (buf.size() % 2 == 0) {
                    const float lower = *std::max_element(buf.begin(), buf.begin() + mid);
                    med = 0.5f * (lower + med);
                }
                out[i].logits[k] = med;
            }
        }
    }
    return out;
}

struct Prediction {
    std::string subject_id;
    double start_time = 0.0;
    int pred_class = 0;
    std::vector<float> logits; // post-smoothing
};

inline int argmax_lowest(const std::vector<float>& v) {
    int best = 0;
    for (int k = 1; k < static_cast<int>(v.size()); ++k)
        if (v[k] > v[best]) best = k; // ties resolve to the lowest class id
    return best;
}

// embed -> head logits -> temporal smoothing per subject -> argmax.
inline std::vector<Prediction> predict(const EncoderModel& encoder, const HeadModel& head,
                                       const std::vector<Window>& windows) {
    auto embeddings = embed(encoder, windows);
    auto& params = const_cast<nn::ParamStore<float>&>(head.params);
    const int d = head.cfg.input_dim;

    // head logits in bulk
    auto x = nn::Tensor<float>::zeros({static_cast<int>(embeddings.size()), d});
    for (size_t i = 0; i < embeddings.size(); ++i)
        std::copy(embeddings[i].begin(), embeddings[i].end(), x.data.begin() + i * d);
    auto [logits, tape] = nn::forward(head.net, params, x);
    const int K = head.cfg.num_classes;

    // group by subject, sort by time, smooth, emit
    std::map<std::string, std::vector<size_t>> by_subject;
    for (size_t i = 0; i < windows.size(); ++i) by_subject[windows[i].subject_id].push_back(i);

    std::vector<Prediction> out(windows.size());
    for (auto& [subject, idxs] : by_subject) {
        std::sort(idxs.begin(), idxs.end(),
                  [&](size_t a, size_t b) { return windows[a].start_time < windows[b].start_time; });
        std::vector<TimedLogits> seq(idxs.size());
        for (size_t j = 0; j < idxs.size(); ++j) {
            seq[j].start_time = windows[idxs[j]].start_time;
            const float* row = logits.data.data() + idxs[j] * static_cast<size_t>(K);
            seq[j].logits.assign(row, row + K);
        }
        auto smoothed = smooth_logits(seq, head.cfg);
        for (size_t j = 0; j < idxs.size(); ++j) {
            Prediction& p = out[idxs[j]];
            p.subject_id = subject;
            p.start_time = smoothed[j].start_time;
            p.logits = smoothed[j].logits;
            p.pred_class = argmax_lowest(p.logits);
        }
    }
    return out;
}

} // namespace har
