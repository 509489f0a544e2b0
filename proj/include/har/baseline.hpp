#pragma once

#include <cmath>
#include <vector>

#include "har/errors.hpp"
#include "har/head.hpp"
#include "har/nn/layers.hpp"
#include "har/nn/loss.hpp"
#include "har/nn/optimizer.hpp"
#include "har/series.hpp"

namespace har {

// The 8 benchmark statistics: per-axis mean and population std over the
// window, plus mean and std of the per-sample vector norm. Order-free by
// construction, so this baseline cannot see dynamics.
struct StatFeatures {
    float mean_x, mean_y, mean_z;
    float std_x, std_y, std_z;
    float mean_norm, std_norm;

    std::vector<float> as_vector() const {
        return {mean_x, mean_y, mean_z, std_x, std_y, std_z, mean_norm, std_norm};
    }
    static constexpr int kCount = 8;
};

inline StatFeatures stat_features(const Window& w) {
    const int n = w.length();
    double sum[3] = {0, 0, 0}, sumsq[3] = {0, 0, 0};
    double nsum = 0, nsumsq = 0;
    for (int i = 0; i < n; ++i) {
        double norm2 = 0;
        for (int a = 0; a < 3; ++a) {
            const double v = w.at(i, a);
            sum[a] += v;
            sumsq[a] += v * v;
            norm2 += v * v;
        }
        const double norm = std::sqrt(norm2);
        nsum += norm;
        nsumsq += norm * norm;
    }
    const double inv = 1.0 / n;
    auto pop_std = [&](double s, double ss) {
        const double var = std::max(0.0, ss * inv - (s * inv) * (s * inv));
        return std::sqrt(var);
    };
    StatFeatures f;
    f.mean_x = static_cast<float>(sum[0] * inv);
    f.mean_y = static_cast<float>(sum[1] * inv);
    f.mean_z = static_cast<float>(sum[2] * inv);
    f.std_x = static_cast<float>(pop_std(sum[0], sumsq[0]));
    f.std_y = static_cast<float>(pop_std(sum[1], sumsq[1]));
    f.std_z = static_cast<float>(pop_std(sum[2], sumsq[2]));
    f.mean_norm = static_cast<float>(nsum * inv);
    f.std_norm = static_cast<float>(pop_std(nsum, nsumsq));
    return f;
}

struct ProbeConfig {
    int epochs = 200;
    double lr = 1e-2;
    int batch = 64;
    double imbalance_cap = 5.0;
    uint64_t seed = 0;
};

// Single dense layer with softmax cross-entropy on z-scored features. The
// z-score parameters are fitted on the training split and stored with the
// model.
struct ProbeModel {
    int num_classes = 0;
    std::vector<float> z_mean; // per feature
    std::vector<float> z_std;
    nn::Network net;
    nn::ParamStore<float> params;

    std::vector<float> standardize(const std::vector<float>& x) const {
        std::vector<float> out(x.size());
        for (size_t i = 0; i < x.size(); ++i) out[i] = (x[i] - z_mean[i]) / z_std[i];
        return out;
    }
};

inline ProbeModel train_linear_probe(const std::vector<std::vector<float>>& features,
                                     const std::vector<int>& labels, int num_classes,
                                     const ProbeConfig& cfg) {
    if (features.empty() || features.size() != labels.size())
        throw DataError("probe: features/labels size mismatch or empty");
    const int dim = static_cast<int>(features[0].size());

    ProbeModel model;
    model.num_classes = num_classes;
    model.z_mean.assign(dim, 0.0f);
    model.z_std.assign(dim, 1.0f);
    {
        std::vector<double> sum(dim, 0.0), sumsq(dim, 0.0);
        for (const auto& f : features)
            for (int i = 0; i < dim; ++i) {
                sum[i] += f[i];
                sumsq[i] += static_cast<double>(f[i]) * f[i];
            }
        const double inv = 1.0 / static_cast<double>(features.size());
        for (int i = 0; i < dim; ++i) {
            const double mean = sum[i] * inv;
            const double var = std::max(0.0, sumsq[i] * inv - mean * mean);
            model.z_mean[i] = static_cast<float>(mean);
            model.z_std[i] = static_cast<float>(var > 1e-12 ? std::sqrt(var) : 1.0);
        }
    }

    std::vector<long> counts(static_cast<size_t>(num_classes), 0);
    for (int y : labels) {
        if (y < 0 || y >= num_classes) throw DataError("probe: label out of range");
        ++counts[y];
    }
    const std::vector<float> cw = class_weights(counts, cfg.imbalance_cap);

    model.net.prefix = "probe.";
    model.net.layers.push_back(nn::dense(dim, num_classes));
    model.params = nn::init_params<float>(model.net, cfg.seed);

    nn::Adam<float> opt(nn::AdamConfig{cfg.lr, 0.9, 0.999, 1e-8});
    Rng rng = Rng(cfg.seed).split(0xBA5E);
    std::vector<size_t> order(features.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        rng.shuffle(order);
        for (size_t at = 0; at < order.size(); at += static_cast<size_t>(cfg.batch)) {
            const size_t n = std::min(static_cast<size_t>(cfg.batch), order.size() - at);
            auto x = nn::Tensor<float>::zeros({static_cast<int>(n), dim});
            std::vector<int> ybatch(n);
            for (size_t i = 0; i < n; ++i) {
                const auto z = model.standardize(features[order[at + i]]);
                std::copy(z.begin(), z.end(), x.data.begin() + i * dim);
                ybatch[i] = labels[order[at + i]];
            }
            auto [logits, tape] = nn::forward(model.net, model.params, x);
            auto loss = nn::categorical_xent(logits, ybatch, cw);
            nn::backward(tape, loss.dlogits);
            opt.step(model.params);
        }
    }
    return model;
}

inline std::vector<int> probe_predict(const ProbeModel& model,
                                      const std::vector<std::vector<float>>& features) {
    if (features.empty()) return {};
    const int dim = static_cast<int>(model.z_mean.size());
    auto x = nn::Tensor<float>::zeros({static_cast<int>(features.size()), dim});
    for (size_t i = 0; i < features.size(); ++i) {
        const auto z = model.standardize(features[i]);
        std::copy(z.begin(), z.end(), x.data.begin() + i * dim);
    }
    auto& params = const_cast<nn::ParamStore<float>&>(model.params);
    auto [logits, tape] = nn::forward(model.net, params, x);
    std::vector<int> out(features.size());
    const int K = model.num_classes;
    for (size_t i = 0; i < features.size(); ++i) {
        std::vector<float> row(logits.data.begin() + i * K, logits.data.begin() + (i + 1) * K);
        out[i] = argmax_lowest(row);
    }
    return out;
}

// The reference benchmark: 8 statistics + 1-layer perceptron.
inline ProbeModel train_baseline(const std::vector<Window>& windows, const std::vector<int>& labels,
                                 int num_classes, const ProbeConfig& cfg) {
    std::vector<std::vector<float>> feats;
    feats.reserve(windows.size());
    for (const auto& w : windows) feats.push_back(stat_features(w).as_vector());
    return train_linear_probe(feats, labels, num_classes, cfg);
}

} // namespace har
