#include <catch2/catch_amalgamated.hpp>

#include <cstring>
#include <filesystem>
#include <sstream>

#include "har/encoder.hpp"
#include "har/model_io.hpp"
#include "support.hpp"

using namespace har;
using test_support::grid_corpus;
using test_support::random_window;
using test_support::temp_dir;

namespace {

EncoderConfig tiny_encoder_cfg(uint64_t seed) {
    EncoderConfig cfg;
    cfg.channels = {4, 6, 6, 8, 8};
    cfg.embedding_dim = 16;
    cfg.projector_hidden = 16;
    cfg.steps = 40;
    cfg.log_every = 10;
    cfg.checkpoint_every = 20;
    cfg.seed = seed;
    return cfg;
}

} // namespace

TEST_CASE("default tower maps a 300x3 window to exactly 256 values") {
    EncoderConfig cfg;
    cfg.seed = 1;
    auto [net, params] = build_encoder(cfg);
    auto shapes = nn::infer_shapes(net, {1, 3, 300});
    CHECK(shapes.back() == std::vector<int>{1, 256});
    // position plan 300 -> 150 -> 75 -> 37 -> 18 -> 9, flatten 9*128 = 1152
    CHECK(net.layers[net.layers.size() - 1].in_features == 1152);

    Rng rng(2);
    auto w = random_window(rng, "a", 0.0);
    EncoderModel model{cfg, net, std::move(params), true};
    auto e = embed(model, {w});
    REQUIRE(e.size() == 1);
    REQUIRE(e[0].size() == 256);
    for (float v : e[0]) REQUIRE(std::isfinite(v));

    auto e2 = embed(model, {w});
    CHECK(e[0] == e2[0]); // purity
}

TEST_CASE("single-block tower has length 150 before flatten") {
    EncoderConfig cfg;
    cfg.conv_blocks = 1;
    cfg.channels = {8};
    cfg.kernels = {5};
    cfg.pools = {2};
    auto net = build_encoder_net(cfg);
    auto shapes = nn::infer_shapes(net, {1, 3, 300});
    // conv -> relu -> pool is layers 0..2; shape after pooling:
    CHECK(shapes[3] == std::vector<int>{1, 8, 150});
}

TEST_CASE("over-pooled config is rejected") {
    EncoderConfig cfg;
    cfg.conv_blocks = 5;
    cfg.pools = {4, 4, 4, 4, 4}; // 300 / 4^5 < 1
    CHECK_THROWS_AS(validate(cfg), ConfigError);
}

TEST_CASE("projector maps concatenated pairs to two logits") {
    EncoderConfig cfg;
    cfg.seed = 3;
    auto [net, params] = build_projector(cfg);
    auto shapes = nn::infer_shapes(net, {4, 512});
    CHECK(shapes.back() == std::vector<int>{4, 2});

    // zero weights -> logits equal the biases
    for (const auto& name : params.names())
        std::fill(params.at(name).data.begin(), params.at(name).data.end(), 0.0f);
    params.at("proj.l2.b").data = {0.25f, -0.5f};
    auto x = nn::Tensor<float>::zeros({3, 512});
    Rng rng(4);
    for (auto& v : x.data) v = static_cast<float>(rng.uniform(-1, 1));
    auto [y, tape] = nn::forward(net, params, x);
    for (int n = 0; n < 3; ++n) {
        CHECK(y.data[n * 2 + 0] == 0.25f);
        CHECK(y.data[n * 2 + 1] == -0.5f);
    }

    auto [net2, params2] = build_projector(cfg);
    CHECK(params2.at("proj.l0.w").data == build_projector(cfg).second.at("proj.l0.w").data);
}

TEST_CASE("pretrain: steps=0 returns the initialized parameters") {
    auto idx = build_corpus_index(grid_corpus(3, 20));
    EncoderConfig cfg = tiny_encoder_cfg(5);
    cfg.steps = 0;
    PairingConfig pcfg;
    pcfg.batch_pairs = 4;
    pcfg.seed = 5;
    auto result = pretrain(idx, cfg, pcfg, default_menu());
    auto fresh = nn::init_params<float>(build_encoder_net(cfg), cfg.seed);
    for (const auto& name : fresh.names()) {
        REQUIRE(result.model.params.contains(name));
        CHECK(result.model.params.at(name).data == fresh.at(name).data);
    }
    CHECK(result.model.frozen);
}

TEST_CASE("loss at initialization sits in the ln-2 band") {
    auto idx = build_corpus_index(grid_corpus(4, 30));
    EncoderConfig cfg = tiny_encoder_cfg(6);
    PairingConfig pcfg;
    pcfg.batch_pairs = 8;
    pcfg.seed = 6;

    nn::Network enc_net = build_encoder_net(cfg);
    nn::Network proj_net = build_projector_net(cfg);
    nn::ParamStore<float> params;
    Rng init_rng(cfg.seed);
    nn::init_params_into(params, enc_net, init_rng);
    nn::init_params_into(params, proj_net, init_rng);

    Rng rng(7);
    double total = 0.0;
    const int trials = 5;
    for (int i = 0; i < trials; ++i) {
        auto batch = build_pair_batch(idx, pcfg, default_menu(), rng);
        auto x = windows_to_input<float>(batch.windows, cfg.input_len);
        auto [emb, t1] = nn::forward(enc_net, params, x);
        auto pairs = detail::all_pair_concat(emb);
        auto [logits, t2] = nn::forward(proj_net, params, pairs);
        std::vector<int> labels(batch.labels.size());
        std::vector<float> weights(batch.weights.begin(), batch.weights.end());
        // double -> float narrowing is fine here; the loss runs in f32
        for (size_t k = 0; k < batch.labels.size(); ++k) labels[k] = batch.labels[k] > 0.5f ? 1 : 0;
        total += nn::weighted_binary_softmax_xent(logits, labels, weights).value;
    }
    const double mean = total / trials;
    CHECK(mean > 0.5);
    CHECK(mean < 0.9);
}

TEST_CASE("pretrain reduces the loss on a tiny run and is deterministic") {
    auto corpus = grid_corpus(3, 30, 300);
    auto idx = build_corpus_index(corpus);
    EncoderConfig cfg = tiny_encoder_cfg(8);
    cfg.steps = 60;
    PairingConfig pcfg;
    pcfg.batch_pairs = 4;
    pcfg.seed = 8;
    auto dir = temp_dir("pretrain");
    PretrainOptions opts;
    opts.checkpoint_dir = (dir / "ckpt").string();
    opts.log_csv_path = (dir / "log.csv").string();

    auto r1 = pretrain(idx, cfg, pcfg, default_menu(), opts);
    auto r2 = pretrain(idx, cfg, pcfg, default_menu());
    for (const auto& name : r1.model.params.names())
        REQUIRE(r1.model.params.at(name).data == r2.model.params.at(name).data);

    REQUIRE(!r1.log.empty());
    CHECK(std::filesystem::exists(dir / "ckpt" / "checkpoint_20.model"));
    CHECK(std::filesystem::exists(dir / "ckpt" / "checkpoint_40.model"));
    CHECK(std::filesystem::exists(dir / "log.csv"));
}

TEST_CASE("pretrain with materialized pairs matches the contract") {
    auto idx = build_corpus_index(grid_corpus(3, 20));
    EncoderConfig cfg = tiny_encoder_cfg(9);
    cfg.steps = 10;
    PairingConfig pcfg;
    pcfg.batch_pairs = 4;
    pcfg.seed = 9;
    PretrainOptions opts;
    opts.materialize_pairs = true;
    auto r = pretrain(idx, cfg, pcfg, default_menu(), opts);
    CHECK(r.model.frozen);
    CHECK(r.log.back().step == 10);
}

TEST_CASE("embed batching, ordering and validation") {
    EncoderConfig cfg = tiny_encoder_cfg(10);
    auto [net, params] = build_encoder(cfg);
    EncoderModel model{cfg, net, std::move(params), true};

    Rng rng(11);
    std::vector<Window> ws;
    for (int i = 0; i < 7; ++i) ws.push_back(random_window(rng, "s", 10.0 * i));
    auto all = embed(model, ws, 3); // forces multiple internal batches
    REQUIRE(all.size() == 7);

    std::vector<Window> permuted = {ws[3], ws[0], ws[6]};
    auto sub = embed(model, permuted, 3);
    CHECK(sub[0] == all[3]);
    CHECK(sub[1] == all[0]);
    CHECK(sub[2] == all[6]);

    Window bad = ws[0];
    bad.samples.resize(299 * 3);
    CHECK_THROWS_AS(embed(model, {bad}), DataError);

    EncoderModel thawed = model;
    thawed.frozen = false;
    CHECK_THROWS_AS(embed(thawed, ws), ConfigError);
}

TEST_CASE("frozen params are bit-identical after embed calls") {
    EncoderConfig cfg = tiny_encoder_cfg(14);
    auto [net, params] = build_encoder(cfg);
    EncoderModel model{cfg, net, std::move(params), true};
    std::ostringstream before;
    nn::save_params(before, model.params);
    Rng rng(15);
    std::vector<Window> ws;
    for (int i = 0; i < 5; ++i) ws.push_back(random_window(rng, "s", 10.0 * i));
    for (int round = 0; round < 3; ++round) embed(model, ws);
    std::ostringstream after;
    nn::save_params(after, model.params);
    CHECK(before.str() == after.str());
}

TEST_CASE("saved and reloaded encoder embeds bit-identically") {
    auto dir = temp_dir("encmodel");
    EncoderConfig cfg = tiny_encoder_cfg(12);
    auto [net, params] = build_encoder(cfg);
    EncoderModel model{cfg, net, std::move(params), true};
    Rng rng(13);
    std::vector<Window> ws;
    for (int i = 0; i < 4; ++i) ws.push_back(random_window(rng, "s", 10.0 * i));
    auto before = embed(model, ws);

    const auto path = (dir / "encoder.model").string();
    save_encoder(model, path);
    auto reloaded = load_encoder(path);
    CHECK(reloaded.frozen);
    auto after = embed(reloaded, ws);
    for (size_t i = 0; i < before.size(); ++i)
        CHECK(std::memcmp(before[i].data(), after[i].data(), before[i].size() * sizeof(float)) == 0);
}
