#pragma once

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "har/errors.hpp"
#include "har/nn/layers.hpp"
#include "har/nn/loss.hpp"
#include "har/nn/optimizer.hpp"
#include "har/nn/serialize.hpp"
#include "har/pairing.hpp"
#include "har/series.hpp"

namespace har {

struct EncoderConfig {
    int conv_blocks = 5;
    std::vector<int> channels = {32, 64, 64, 128, 128}; // per block
    std::vector<int> kernels = {5, 5, 5, 5, 5};
    std::vector<int> pools = {2, 2, 2, 2, 2};
    int embedding_dim = 256;
    int projector_hidden = 256;
    int input_len = 300;
    int input_channels = 3;
    long steps = 2000;
    double lr = 1e-3;
    int log_every = 100;
    int checkpoint_every = 500;
    uint64_t seed = 0;
};

namespace detail {

inline int block_param(const std::vector<int>& v, int i, const char* what) {
    if (v.empty()) throw ConfigError(std::string("encoder: empty ") + what + " list");
    if (static_cast<int>(v.size()) == 1) return v[0];
    if (i >= static_cast<int>(v.size()))
        throw ConfigError(std::string("encoder: ") + what + " list shorter than conv_blocks");
    return v[i];
}

} // namespace detail

inline void validate(const EncoderConfig& cfg) {
    if (cfg.conv_blocks < 1) throw ConfigError("encoder: conv_blocks must be >= 1");
    if (cfg.embedding_dim < 1) throw ConfigError("encoder: embedding_dim must be >= 1");
    int len = cfg.input_len;
    for (int i = 0; i < cfg.conv_blocks; ++i) {
        len /= detail::block_param(cfg.pools, i, "pools");
        if (len < 1)
            throw ConfigError("encoder: pooling collapses sequence length to 0 at block " +
                              std::to_string(i));
    }
}

// Conv tower: conv_blocks x [conv1d(same padding) -> relu -> maxpool] ->
// flatten -> dense(embedding_dim).
inline nn::Network build_encoder_net(const EncoderConfig& cfg) {
    validate(cfg);
    nn::Network net;
    net.prefix = "enc.";
    int ch = cfg.input_channels;
    int len = cfg.input_len;
    for (int i = 0; i < cfg.conv_blocks; ++i) {
        const int out_ch = detail::block_param(cfg.channels, i, "channels");
        const int kernel = detail::block_param(cfg.kernels, i, "kernels");
        const int pool = detail::block_param(cfg.pools, i, "pools");
        net.layers.push_back(nn::conv1d(ch, out_ch, kernel));
        net.layers.push_back(nn::relu());
        net.layers.push_back(nn::maxpool1d(pool));
        ch = out_ch;
        len /= pool;
    }
    net.layers.push_back(nn::flatten());
    net.layers.push_back(nn::dense(ch * len, cfg.embedding_dim));
    return net;
}

// Pair scorer: dense(2d -> hidden) -> relu -> dense(hidden -> 2).
inline nn::Network build_projector_net(const EncoderConfig& cfg) {
    nn::Network net;
    net.prefix = "proj.";
    net.layers.push_back(nn::dense(2 * cfg.embedding_dim, cfg.projector_hidden));
    net.layers.push_back(nn::relu());
    net.layers.push_back(nn::dense(cfg.projector_hidden, 2));
    return net;
}

template <typename Real = float>
std::pair<nn::Network, nn::ParamStore<Real>> build_encoder(const EncoderConfig& cfg) {
    nn::Network net = build_encoder_net(cfg);
    return {net, nn::init_params<Real>(net, cfg.seed)};
}

template <typename Real = float>
std::pair<nn::Network, nn::ParamStore<Real>> build_projector(const EncoderConfig& cfg) {
    nn::Network net = build_projector_net(cfg);
    return {net, nn::init_params<Real>(net, cfg.seed ^ 0x70726F6Aull)};
}

// Frozen after pretraining; embed() requires the frozen flag.
struct EncoderModel {
    EncoderConfig cfg;
    nn::Network net;
    nn::ParamStore<float> params;
    bool frozen = false;
};

// [N, 3, input_len] channel-major input tensor from row-major windows.
template <typename Real = float>
nn::Tensor<Real> windows_to_input(const std::vector<Window>& windows, int expect_len) {
    const int n = static_cast<int>(windows.size());
    auto x = nn::Tensor<Real>::zeros({n, 3, expect_len});
    for (int i = 0; i < n; ++i) {
        if (windows[i].length() != expect_len)
            throw DataError("encoder: window '" + windows[i].subject_id + "' has length " +
                            std::to_string(windows[i].length()) + ", expected " +
                            std::to_string(expect_len));
        for (int a = 0; a < 3; ++a) {
            Real* row = x.data.data() + (static_cast<size_t>(i) * 3 + a) * expect_len;
            for (int t = 0; t < expect_len; ++t)
                row[t] = static_cast<Real>(windows[i].samples[static_cast<size_t>(t) * 3 + a]);
        }
    }
    return x;
}

namespace detail {

// Concatenated embeddings of every (i, j) pair: row i*n + j is [emb_i, emb_j].
template <typename Real>
nn::Tensor<Real> all_pair_concat(const nn::Tensor<Real>& emb) {
    const int n = emb.shape[0], d = emb.shape[1];
    auto pairs = nn::Tensor<Real>::zeros({n * n, 2 * d});
    for (int i = 0; i < n; ++i) {
        const Real* ei = emb.data.data() + static_cast<size_t>(i) * d;
        for (int j = 0; j < n; ++j) {
            const Real* ej = emb.data.data() + static_cast<size_t>(j) * d;
            Real* row = pairs.data.data() + (static_cast<size_t>(i) * n + j) * 2 * d;
            std::copy(ei, ei + d, row);
            std::copy(ej, ej + d, row + d);
        }
    }
    return pairs;
}

// Scatter-add pair-row gradients back onto the 2b embeddings.
template <typename Real>
nn::Tensor<Real> scatter_pair_grad(const nn::Tensor<Real>& dpairs, int n, int d) {
    auto demb = nn::Tensor<Real>::zeros({n, d});
    for (int i = 0; i < n; ++i) {
        Real* di = demb.data.data() + static_cast<size_t>(i) * d;
        for (int j = 0; j < n; ++j) {
            const Real* row = dpairs.data.data() + (static_cast<size_t>(i) * n + j) * 2 * d;
            Real* dj = demb.data.data() + static_cast<size_t>(j) * d;
            for (int k = 0; k < d; ++k) {
                di[k] += row[k];
                dj[k] += row[d + k];
            }
        }
    }
    return demb;
}

} // namespace detail

struct TrainLogRow {
    long step;
    double loss;
    long wall_ms;
};

struct PretrainOptions {
    std::string checkpoint_dir; // empty = no checkpoints
    std::string log_csv_path;   // empty = no CSV log
    // Pre-draw every batch's sampling decisions before the loop starts
    // instead of sampling per step (statistically equivalent; reproduces the
    // "pairs created before training" procedure).
    bool materialize_pairs = false;
    // Debug dump: one JSON line of pair provenance per batch.
    std::string batch_dump_path;
};

struct PretrainResult {
    EncoderModel model;
    std::vector<TrainLogRow> log;
};

// One training step on a prepared batch; returns the loss. Parameters for
// encoder and projector live in one store so a single optimizer step covers
// both.
inline double pretrain_step(const nn::Network& enc_net, const nn::Network& proj_net,
                            nn::ParamStore<float>& params, nn::Adam<float>& opt,
                            const PairBatch& batch, int input_len) {
    const int n = static_cast<int>(batch.windows.size()); // 2b
    auto x = windows_to_input<float>(batch.windows, input_len);
    auto [emb, enc_tape] = nn::forward(enc_net, params, x);
    auto pairs = detail::all_pair_concat(emb);
    auto [logits, proj_tape] = nn::forward(proj_net, params, pairs);

    std::vector<int> labels(batch.labels.size());
    std::vector<float> weights(batch.weights.size());
    for (size_t i = 0; i < batch.labels.size(); ++i) {
        labels[i] = batch.labels[i] > 0.5f ? 1 : 0;
        weights[i] = static_cast<float>(batch.weights[i]);
    }
    auto loss = nn::weighted_binary_softmax_xent(logits, labels, weights);

    nn::backward(proj_tape, loss.dlogits);
    auto demb = detail::scatter_pair_grad(proj_tape.input_grad, n, emb.shape[1]);
    nn::backward(enc_tape, demb);
    opt.step(params);
    return loss.value;
}

// Contrastive pre-training (coincidence pairs -> binary softmax). Returns the
// frozen encoder; projector parameters are dropped from the result.
inline PretrainResult pretrain(const CorpusIndex& corpus, const EncoderConfig& enc_cfg,
                               const PairingConfig& pair_cfg, const std::vector<AugmentationSpec>& menu,
                               const PretrainOptions& opts = {},
                               const std::function<void(const TrainLogRow&)>& on_log = nullptr) {
    validate(enc_cfg);
    validate(pair_cfg);

    nn::Network enc_net = build_encoder_net(enc_cfg);
    nn::Network proj_net = build_projector_net(enc_cfg);
    nn::ParamStore<float> params;
    params.seed = enc_cfg.seed;
    Rng init_rng(enc_cfg.seed);
    nn::init_params_into(params, enc_net, init_rng);
    nn::init_params_into(params, proj_net, init_rng);

    nn::Adam<float> opt(nn::AdamConfig{enc_cfg.lr, 0.9, 0.999, 1e-8});
    Rng batch_rng = Rng(pair_cfg.seed).split(0xBA7C4);

    std::vector<PairBatch> materialized;
    if (opts.materialize_pairs) {
        materialized.reserve(static_cast<size_t>(enc_cfg.steps));
        for (long s = 0; s < enc_cfg.steps; ++s)
            materialized.push_back(build_pair_batch(corpus, pair_cfg, menu, batch_rng));
    }

    std::ofstream log_csv;
    if (!opts.log_csv_path.empty()) {
        log_csv.open(opts.log_csv_path);
        if (!log_csv) throw DataError("pretrain: cannot write log '" + opts.log_csv_path + "'");
        log_csv << "step,loss,wall_ms\n";
    }
    std::ofstream batch_dump;
    if (!opts.batch_dump_path.empty()) {
        batch_dump.open(opts.batch_dump_path);
        if (!batch_dump) throw DataError("pretrain: cannot write dump '" + opts.batch_dump_path + "'");
    }

    auto save_checkpoint = [&](long s) {
        if (opts.checkpoint_dir.empty()) return;
        std::filesystem::create_directories(opts.checkpoint_dir);
        nn::save_params(opts.checkpoint_dir + "/checkpoint_" + std::to_string(s) + ".model", params);
    };

    PretrainResult result;
    const auto t0 = std::chrono::steady_clock::now();
    for (long s = 0; s < enc_cfg.steps; ++s) {
        const PairBatch batch = opts.materialize_pairs
                                    ? std::move(materialized[static_cast<size_t>(s)])
                                    : build_pair_batch(corpus, pair_cfg, menu, batch_rng);
        if (batch_dump) batch_dump << dump_batch_provenance_json(batch) << "\n";
        const double loss = pretrain_step(enc_net, proj_net, params, opt, batch, enc_cfg.input_len);
        if (!std::isfinite(loss))
            throw NumericError("pretrain: non-finite loss at step " + std::to_string(s) +
                               (opts.checkpoint_dir.empty() ? "" : "; last checkpoint retained"));
        const bool log_now = (s + 1) % enc_cfg.log_every == 0 || s + 1 == enc_cfg.steps;
        if (log_now) {
            const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                                std::chrono::steady_clock::now() - t0)
                                .count();
            TrainLogRow row{s + 1, loss, static_cast<long>(ms)};
            result.log.push_back(row);
            if (log_csv)
                log_csv << row.step << ',' << detail::fmt_double(row.loss) << ',' << row.wall_ms << '\n';
            if (on_log) on_log(row);
        }
        if (enc_cfg.checkpoint_every > 0 && (s + 1) % enc_cfg.checkpoint_every == 0)
            save_checkpoint(s + 1);
    }

    // keep only encoder parameters in the frozen model
    nn::ParamStore<float> enc_params;
    enc_params.seed = params.seed;
    enc_params.step = params.step;
    for (size_t i = 0; i < params.size(); ++i) {
        const std::string& name = params.names()[i];
        if (name.rfind("enc.", 0) == 0) {
            nn::Tensor<float> t = params.tensor(i);
            t.grad.clear();
            enc_params.add(name, std::move(t));
        }
    }
    result.model = EncoderModel{enc_cfg, enc_net, std::move(enc_params), true};
    return result;
}

// Embedding inference over frozen parameters, batched internally.
inline std::vector<std::vector<float>> embed(const EncoderModel& model, const std::vector<Window>& windows,
                                             int batch_size = 256) {
    if (!model.frozen) throw ConfigError("embed: encoder is not frozen");
    std::vector<std::vector<float>> out;
    out.reserve(windows.size());
    // forward() takes a mutable store (shared tape plumbing); embedding reads
    // parameters only, so the const_cast below never mutates.
    auto& params = const_cast<nn::ParamStore<float>&>(model.params);
    const int d = model.cfg.embedding_dim;
    for (size_t at = 0; at < windows.size(); at += static_cast<size_t>(batch_size)) {
        const size_t n = std::min(static_cast<size_t>(batch_size), windows.size() - at);
        std::vector<Window> chunk(windows.begin() + at, windows.begin() + at + n);
        auto x = windows_to_input<float>(chunk, model.cfg.input_len);
        auto [emb, tape] = nn::forward(model.net, params, x);
        for (size_t i = 0; i < n; ++i) {
            std::vector<float> v(emb.data.begin() + i * d, emb.data.begin() + (i + 1) * d);
            out.push_back(std::move(v));
        }
    }
    return out;
}

} // namespace har
