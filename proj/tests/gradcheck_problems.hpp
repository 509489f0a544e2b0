#pragma once

// Gradient-check problem definitions shared by the unit suite and the
// acceptance suite. Inputs ride inside the ParamStore as "__x__" so input
// gradients are sampled through the same path as parameter gradients.

#include <functional>
#include <vector>

#include "gradcheck.hpp"
#include "har/encoder.hpp"
#include "har/head.hpp"
#include "har/nn/layers.hpp"
#include "har/nn/loss.hpp"
#include "har/pairing.hpp"

namespace gradcheck {

enum class InputCond { None, ReluMargin, PoolMargin };

// Draw an input and keep it clear of relu/pool kinks so finite differences
// stay valid (FD is meaningless at non-differentiable points).
inline har::nn::Tensor<float> conditioned_input(std::vector<int> shape, har::Rng& rng, InputCond cond,
                                                int pool = 2) {
    auto x = har::nn::Tensor<float>::zeros(std::move(shape));
    for (auto& v : x.data) v = static_cast<float>(rng.uniform(-1.0, 1.0));
    if (cond == InputCond::ReluMargin) {
        for (auto& v : x.data)
            if (std::fabs(v) < 0.05f) v = v < 0 ? v - 0.05f : v + 0.05f;
    } else if (cond == InputCond::PoolMargin) {
        const int L = x.shape[2];
        const int rows = static_cast<int>(x.data.size()) / L;
        for (int r = 0; r < rows; ++r) {
            float* row = x.data.data() + static_cast<size_t>(r) * L;
            for (int p = 0; p + pool <= L; p += pool) {
                int best = 0;
                for (int q = 1; q < pool; ++q)
                    if (row[p + q] > row[p + best]) best = q;
                float second = -1e30f;
                for (int q = 0; q < pool; ++q)
                    if (q != best) second = std::max(second, row[p + q]);
                if (row[p + best] - second < 0.05f) row[p + best] += 0.1f;
            }
        }
    }
    return x;
}

// loss = sum_i coef_i * y_i over the net output; linear, so the upstream
// gradient is just coef.
template <typename Real>
double run_net_linear_loss(const har::nn::Network& net, har::nn::ParamStore<Real>& store,
                           const std::vector<double>& coef, bool do_backward) {
    auto& xt = store.at("__x__");
    har::nn::Tensor<Real> x;
    x.shape = xt.shape;
    x.data = xt.data;
    auto [y, tape] = har::nn::forward(net, store, x);
    double loss = 0.0;
    for (size_t i = 0; i < y.data.size(); ++i) loss += coef[i] * static_cast<double>(y.data[i]);
    if (do_backward) {
        auto up = har::nn::Tensor<Real>::zeros(y.shape);
        for (size_t i = 0; i < up.data.size(); ++i) up.data[i] = static_cast<Real>(coef[i]);
        har::nn::backward(tape, up);
        auto& xin = store.at("__x__");
        xin.ensure_grad();
        for (size_t i = 0; i < xin.grad.size(); ++i) xin.grad[i] += tape.input_grad.data[i];
    }
    return loss;
}

struct LayerProblem {
    har::nn::Network net;
    har::nn::ParamStore<float> store; // params + "__x__"
    std::vector<double> coef;
};

inline LayerProblem make_layer_problem(har::nn::Network net, std::vector<int> xshape, uint64_t seed,
                                       InputCond cond, int pool = 2) {
    LayerProblem p;
    p.net = std::move(net);
    p.store = har::nn::init_params<float>(p.net, seed);
    har::Rng rng(seed ^ 0xC0FFEE);
    p.store.add("__x__", conditioned_input(std::move(xshape), rng, cond, pool));
    const auto shapes = har::nn::infer_shapes(p.net, p.store.at("__x__").shape);
    size_t out_count = 1;
    for (int d : shapes.back()) out_count *= static_cast<size_t>(d);
    for (size_t i = 0; i < out_count; ++i) p.coef.push_back(rng.uniform(-1.0, 1.0));
    return p;
}

inline Stats check_layer_problem(LayerProblem& p, double eps, int n_coords, har::Rng& rng) {
    std::function<double(har::nn::ParamStore<float>&, bool)> run_a =
        [&](har::nn::ParamStore<float>& s, bool bw) { return run_net_linear_loss(p.net, s, p.coef, bw); };
    std::function<double(har::nn::ParamStore<double>&)> run_fd =
        [&](har::nn::ParamStore<double>& s) { return run_net_linear_loss(p.net, s, p.coef, false); };
    return fd_max_rel_err<float>(p.store, run_a, run_fd, eps, n_coords, rng);
}

// ---------------------------------------------------------------------------
// Full encoder+projector composition with the coincidence loss
// ---------------------------------------------------------------------------

struct PretrainProblem {
    har::nn::Network enc, proj;
    har::nn::ParamStore<float> store;
    std::vector<int> labels;
    std::vector<double> weights;
    int b = 2;
    int input_len = 300;

    template <typename Real>
    double run(har::nn::ParamStore<Real>& s, bool do_backward) const {
        auto& xt = s.at("__x__");
        har::nn::Tensor<Real> x;
        x.shape = xt.shape;
        x.data = xt.data;
        auto [emb, enc_tape] = har::nn::forward(enc, s, x);
        auto pairs = har::detail::all_pair_concat(emb);
        auto [logits, proj_tape] = har::nn::forward(proj, s, pairs);
        std::vector<Real> w(weights.begin(), weights.end());
        auto loss = har::nn::weighted_binary_softmax_xent(logits, labels, w);
        if (do_backward) {
            har::nn::backward(proj_tape, loss.dlogits);
            auto demb = har::detail::scatter_pair_grad(proj_tape.input_grad, emb.shape[0], emb.shape[1]);
            har::nn::backward(enc_tape, demb);
            auto& xin = s.at("__x__");
            xin.ensure_grad();
            for (size_t i = 0; i < xin.grad.size(); ++i) xin.grad[i] += enc_tape.input_grad.data[i];
        }
        return loss.value;
    }
};

// Full 5-block tower and 2-layer projector at reduced widths (the composition
// under test is the architecture, not the parameter count).
inline PretrainProblem make_pretrain_problem(uint64_t seed) {
    har::EncoderConfig cfg;
    cfg.channels = {6, 8, 8, 10, 10};
    cfg.embedding_dim = 16;
    cfg.projector_hidden = 16;
    cfg.seed = seed;
    PretrainProblem p;
    p.enc = har::build_encoder_net(cfg);
    p.proj = har::build_projector_net(cfg);
    p.store = har::nn::init_params<float>(p.enc, seed);
    har::Rng init2(seed ^ 0x9999);
    har::nn::init_params_into(p.store, p.proj, init2);
    har::Rng rng(seed ^ 0xAB);
    p.store.add("__x__", conditioned_input({2 * p.b, 3, cfg.input_len}, rng, InputCond::None));
    auto lm = har::pair_label_matrix(p.b);
    p.weights = har::pair_weight_matrix(p.b);
    for (float v : lm) p.labels.push_back(v > 0.5f ? 1 : 0);
    return p;
}

inline Stats check_pretrain_problem(PretrainProblem& p, double eps, int n_coords, har::Rng& rng) {
    std::function<double(har::nn::ParamStore<float>&, bool)> run_a =
        [&](har::nn::ParamStore<float>& s, bool bw) { return p.run(s, bw); };
    std::function<double(har::nn::ParamStore<double>&)> run_fd =
        [&](har::nn::ParamStore<double>& s) { return p.run(s, false); };
    return fd_max_rel_err<float>(p.store, run_a, run_fd, eps, n_coords, rng);
}

// ---------------------------------------------------------------------------
// Head composition (5-layer MLP + weighted categorical cross-entropy)
// ---------------------------------------------------------------------------

struct HeadProblem {
    har::nn::Network net;
    har::nn::ParamStore<float> store;
    std::vector<int> labels;
    std::vector<float> class_weights;

    template <typename Real>
    double run(har::nn::ParamStore<Real>& s, bool do_backward) const {
        auto& xt = s.at("__x__");
        har::nn::Tensor<Real> x;
        x.shape = xt.shape;
        x.data = xt.data;
        auto [logits, tape] = har::nn::forward(net, s, x);
        std::vector<Real> cw(class_weights.begin(), class_weights.end());
        auto loss = har::nn::categorical_xent(logits, labels, cw);
        if (do_backward) {
            har::nn::backward(tape, loss.dlogits);
            auto& xin = s.at("__x__");
            xin.ensure_grad();
            for (size_t i = 0; i < xin.grad.size(); ++i) xin.grad[i] += tape.input_grad.data[i];
        }
        return loss.value;
    }
};

inline HeadProblem make_head_problem(uint64_t seed) {
    har::HeadConfig cfg;
    cfg.num_classes = 3;
    cfg.units = 16;
    cfg.input_dim = 12;
    HeadProblem p;
    p.net = har::build_head_net(cfg);
    p.store = har::nn::init_params<float>(p.net, seed);
    har::Rng rng(seed ^ 0xBEAD);
    p.store.add("__x__", conditioned_input({5, cfg.input_dim}, rng, InputCond::None));
    for (int i = 0; i < 5; ++i) p.labels.push_back(static_cast<int>(rng.index(3)));
    p.class_weights = {1.0f, 2.0f, 1.5f};
    return p;
}

inline Stats check_head_problem(HeadProblem& p, double eps, int n_coords, har::Rng& rng) {
    std::function<double(har::nn::ParamStore<float>&, bool)> run_a =
        [&](har::nn::ParamStore<float>& s, bool bw) { return p.run(s, bw); };
    std::function<double(har::nn::ParamStore<double>&)> run_fd =
        [&](har::nn::ParamStore<double>& s) { return p.run(s, false); };
    return fd_max_rel_err<float>(p.store, run_a, run_fd, eps, n_coords, rng);
}

// Layer-kind problem catalog used by both suites.
inline std::vector<std::pair<std::string, LayerProblem>> layer_problem_catalog(uint64_t seed) {
    using namespace har::nn;
    std::vector<std::pair<std::string, LayerProblem>> out;
    {
        Network n;
        n.prefix = "g.";
        n.layers.push_back(conv1d(3, 4, 5));
        out.emplace_back("conv1d/s1", make_layer_problem(n, {2, 3, 17}, seed, InputCond::None));
    }
    {
        Network n;
        n.prefix = "g.";
        n.layers.push_back(conv1d(2, 3, 3, 2));
        out.emplace_back("conv1d/s2", make_layer_problem(n, {2, 2, 15}, seed + 1, InputCond::None));
    }
    {
        Network n;
        n.prefix = "g.";
        n.layers.push_back(conv1d(4, 24, 5));
        out.emplace_back("conv1d/chmajor", make_layer_problem(n, {2, 4, 10}, seed + 7, InputCond::None));
    }
    {
        Network n;
        n.layers.push_back(relu());
        out.emplace_back("relu", make_layer_problem(n, {3, 11}, seed + 2, InputCond::ReluMargin));
    }
    {
        Network n;
        n.prefix = "g.";
        n.layers.push_back(dense(7, 5));
        out.emplace_back("dense", make_layer_problem(n, {3, 7}, seed + 3, InputCond::None));
    }
    {
        Network n;
        n.layers.push_back(maxpool1d(2));
        out.emplace_back("maxpool1d", make_layer_problem(n, {2, 3, 12}, seed + 4, InputCond::PoolMargin));
    }
    {
        Network n;
        n.layers.push_back(flatten());
        out.emplace_back("flatten", make_layer_problem(n, {2, 3, 6}, seed + 5, InputCond::None));
    }
    {
        Network n;
        n.layers.push_back(softmax());
        out.emplace_back("softmax", make_layer_problem(n, {3, 6}, seed + 6, InputCond::None));
    }
    return out;
}

} // namespace gradcheck
