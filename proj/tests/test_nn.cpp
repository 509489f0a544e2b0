#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "har/nn/layers.hpp"
#include "har/nn/loss.hpp"
#include "har/nn/optimizer.hpp"
#include "har/nn/serialize.hpp"

using namespace har;
using namespace har::nn;

namespace {

// Reference conv1d: naive triple loop, no reuse tricks. Ships as the oracle
// for the fast path.
template <typename Real>
Tensor<Real> conv1d_reference(const LayerSpec& l, const Tensor<Real>& x, const Tensor<Real>& w,
                              const Tensor<Real>& b) {
    const int N = x.shape[0], IC = x.shape[1], L = x.shape[2];
    const int pad = (l.kernel - 1) / 2;
    const int LO = (L + 2 * pad - l.kernel) / l.stride + 1;
    auto y = Tensor<Real>::zeros({N, l.out_channels, LO});
    for (int n = 0; n < N; ++n)
        for (int oc = 0; oc < l.out_channels; ++oc)
            for (int p = 0; p < LO; ++p) {
                Real acc = b.data[oc];
                for (int ic = 0; ic < IC; ++ic)
                    for (int k = 0; k < l.kernel; ++k) {
                        const int q = p * l.stride + k - pad;
                        if (q >= 0 && q < L)
                            acc += w.data[(static_cast<size_t>(oc) * IC + ic) * l.kernel + k] *
                                   x.data[(static_cast<size_t>(n) * IC + ic) * L + q];
                    }
                y.data[(static_cast<size_t>(n) * l.out_channels + oc) * LO + p] = acc;
            }
    return y;
}

Tensor<float> random_tensor(std::vector<int> shape, Rng& rng, double scale = 1.0) {
    auto t = Tensor<float>::zeros(std::move(shape));
    for (auto& v : t.data) v = static_cast<float>(rng.uniform(-scale, scale));
    return t;
}

} // namespace

TEST_CASE("dense with identity weights passes input through") {
    Network net;
    net.prefix = "t.";
    net.layers.push_back(dense(4, 4));
    ParamStore<float> params;
    auto w = Tensor<float>::zeros({4, 4});
    for (int i = 0; i < 4; ++i) w.data[i * 4 + i] = 1.0f;
    params.add("t.l0.w", w);
    params.add("t.l0.b", Tensor<float>::zeros({4}));
    auto x = tensor_from<float>({2, 4}, {1, 2, 3, 4, -1, 0, 0.5f, 7});
    auto [y, tape] = forward(net, params, x);
    CHECK(y.data == x.data);
}

TEST_CASE("relu clamps negatives") {
    Network net;
    net.layers.push_back(relu());
    ParamStore<float> params;
    auto x = tensor_from<float>({1, 3}, {-1.0f, 0.0f, 2.0f});
    auto [y, tape] = forward(net, params, x);
    CHECK(y.data == std::vector<float>{0.0f, 0.0f, 2.0f});
}

TEST_CASE("conv1d with kernel [2] doubles the input") {
    Network net;
    net.prefix = "c.";
    net.layers.push_back(conv1d(1, 1, 1));
    ParamStore<float> params;
    params.add("c.l0.w", tensor_from<float>({1, 1, 1}, {2.0f}));
    params.add("c.l0.b", Tensor<float>::zeros({1}));
    auto x = tensor_from<float>({1, 1, 5}, {1, 2, 3, 4, 5});
    auto [y, tape] = forward(net, params, x);
    for (int i = 0; i < 5; ++i) CHECK(y.data[i] == 2.0f * x.data[i]);
}

TEST_CASE("conv1d matches the naive reference") {
    Rng rng(21);
    struct Case {
        int ic, oc, k, stride, len;
    };
    // the final case exercises the channel-major path (positions < channels)
    const Case cases[] = {{3, 5, 5, 1, 41}, {3, 5, 5, 2, 41}, {2, 3, 3, 1, 17}, {4, 24, 5, 1, 10}};
    for (const Case& c : cases) {
        for (int trial = 0; trial < 4; ++trial) {
            LayerSpec l = conv1d(c.ic, c.oc, c.k, c.stride);
            Network net;
            net.prefix = "c.";
            net.layers.push_back(l);
            ParamStore<float> params;
            params.add("c.l0.w", random_tensor({c.oc, c.ic, c.k}, rng));
            params.add("c.l0.b", random_tensor({c.oc}, rng));
            auto x = random_tensor({2, c.ic, c.len}, rng);
            auto [y, tape] = forward(net, params, x);
            auto ref = conv1d_reference(l, x, params.at("c.l0.w"), params.at("c.l0.b"));
            REQUIRE(y.shape == ref.shape);
            for (size_t i = 0; i < y.data.size(); ++i)
                REQUIRE(y.data[i] == Catch::Approx(ref.data[i]).margin(1e-6).epsilon(1e-6));
        }
    }
}

TEST_CASE("maxpool picks the max and routes gradient to the argmax") {
    Network net;
    net.layers.push_back(maxpool1d(2));
    ParamStore<float> params;
    auto x = tensor_from<float>({1, 1, 6}, {1, 5, 2, 2, 9, -3});
    auto [y, tape] = forward(net, params, x);
    CHECK(y.data == std::vector<float>{5, 2, 9});
    auto up = tensor_from<float>({1, 1, 3}, {1, 10, 100});
    backward(tape, up);
    CHECK(tape.input_grad.data == std::vector<float>{0, 1, 10, 0, 100, 0});
}

TEST_CASE("softmax rows sum to one, no overflow across [-100, 100]") {
    Network net;
    net.layers.push_back(softmax());
    ParamStore<float> params;
    auto x = tensor_from<float>({3, 3}, {100, -100, 0, 50, 50, 50, -100, -100, -100});
    auto [y, tape] = forward(net, params, x);
    for (int n = 0; n < 3; ++n) {
        double s = 0;
        for (int k = 0; k < 3; ++k) {
            REQUIRE(std::isfinite(y.data[n * 3 + k]));
            s += y.data[n * 3 + k];
        }
        CHECK(s == Catch::Approx(1.0).margin(1e-6));
    }
}

TEST_CASE("shape mismatches name the layer") {
    Network net;
    net.prefix = "enc.";
    net.layers.push_back(dense(4, 2));
    ParamStore<float> params = init_params<float>(net, 1);
    auto x = Tensor<float>::zeros({1, 5});
    CHECK_THROWS_WITH(forward(net, params, x), Catch::Matchers::ContainsSubstring("enc.layer 0"));
}

TEST_CASE("forward is pure: same input, same output") {
    Network net;
    net.prefix = "p.";
    net.layers.push_back(conv1d(3, 4, 5));
    net.layers.push_back(relu());
    net.layers.push_back(maxpool1d(2));
    net.layers.push_back(flatten());
    net.layers.push_back(dense(4 * 10, 7));
    ParamStore<float> params = init_params<float>(net, 3);
    Rng rng(4);
    auto x = random_tensor({2, 3, 20}, rng);
    auto [y1, t1] = forward(net, params, x);
    auto [y2, t2] = forward(net, params, x);
    CHECK(y1.data == y2.data);
}

// ---------------------------------------------------------------------------
// losses
// ---------------------------------------------------------------------------

TEST_CASE("binary xent oracles") {
    SECTION("uniform logits give ln 2") {
        auto logits = tensor_from<float>({1, 2}, {0.0f, 0.0f});
        auto res = weighted_binary_softmax_xent(logits, {1}, {1.0f});
        CHECK(res.value == Catch::Approx(0.6931471805599453).margin(1e-9));
    }
    SECTION("confident correct prediction is stable, not flushed to zero") {
        // high-precision scalar oracle: -log(sigmoid(20)) = log1p(exp(-20))
        auto logits = tensor_from<float>({1, 2}, {10.0f, -10.0f});
        auto res = weighted_binary_softmax_xent(logits, {0}, {1.0f});
        CHECK(res.value == Catch::Approx(2.061153620314381e-9).epsilon(1e-6));
    }
    SECTION("zero-weight rows contribute nothing") {
        auto logits = tensor_from<float>({3, 2}, {1, -2, 3, 0.5f, -1, 2});
        auto full = weighted_binary_softmax_xent(logits, {0, 1, 1}, {1.0f, 0.0f, 2.0f});
        auto trimmed = weighted_binary_softmax_xent(tensor_from<float>({2, 2}, {1, -2, -1, 2}),
                                                    {0, 1}, {1.0f, 2.0f});
        CHECK(full.value == Catch::Approx(trimmed.value).margin(1e-12));
    }
    SECTION("all-zero weights are a hard error") {
        auto logits = tensor_from<float>({2, 2}, {0, 0, 0, 0});
        CHECK_THROWS_AS(weighted_binary_softmax_xent(logits, {0, 1}, {0.0f, 0.0f}), NumericError);
    }
}

TEST_CASE("categorical xent oracles") {
    SECTION("uniform logits give ln K") {
        const int K = 7;
        auto logits = Tensor<float>::zeros({2, K});
        auto res = categorical_xent(logits, {3, 0}, std::vector<float>(K, 1.0f));
        CHECK(res.value == Catch::Approx(std::log(static_cast<double>(K))).margin(1e-7));
    }
    SECTION("one-hot perfect logits vanish") {
        const int K = 4;
        auto logits = Tensor<float>::zeros({2, K});
        for (int n = 0; n < 2; ++n)
            for (int k = 0; k < K; ++k) logits.data[n * K + k] = (k == n + 1) ? 30.0f : -30.0f;
        auto res = categorical_xent(logits, {1, 2}, std::vector<float>(K, 1.0f));
        CHECK(res.value < 1e-9);
    }
    SECTION("K=2 with class weights reduces to the binary loss") {
        Rng rng(5);
        auto logits = random_tensor({6, 2}, rng, 3.0);
        std::vector<int> labels = {0, 1, 1, 0, 1, 0};
        std::vector<float> cw = {0.5f, 2.0f};
        auto cat = categorical_xent(logits, labels, cw);
        std::vector<float> per_row(labels.size());
        for (size_t i = 0; i < labels.size(); ++i) per_row[i] = cw[labels[i]];
        auto bin = weighted_binary_softmax_xent(logits, labels, per_row);
        CHECK(cat.value == Catch::Approx(bin.value).margin(1e-12));
        for (size_t i = 0; i < cat.dlogits.data.size(); ++i)
            CHECK(cat.dlogits.data[i] == bin.dlogits.data[i]);
    }
}

// ---------------------------------------------------------------------------
// backward basics
// ---------------------------------------------------------------------------

TEST_CASE("bias gradient of sum-loss is all ones") {
    Network net;
    net.prefix = "d.";
    net.layers.push_back(dense(3, 4));
    ParamStore<float> params = init_params<float>(net, 9);
    Rng rng(6);
    auto x = random_tensor({2, 3}, rng);
    auto [y, tape] = forward(net, params, x);
    auto up = Tensor<float>::zeros(y.shape);
    std::fill(up.data.begin(), up.data.end(), 1.0f); // loss = sum(y)
    backward(tape, up);
    for (float g : params.at("d.l0.b").grad) CHECK(g == Catch::Approx(2.0f)); // two batch rows
}

TEST_CASE("zero upstream yields zero gradients") {
    Network net;
    net.prefix = "z.";
    net.layers.push_back(conv1d(2, 3, 3));
    net.layers.push_back(relu());
    net.layers.push_back(flatten());
    net.layers.push_back(dense(3 * 8, 2));
    ParamStore<float> params = init_params<float>(net, 10);
    Rng rng(7);
    auto x = random_tensor({1, 2, 8}, rng);
    auto [y, tape] = forward(net, params, x);
    backward(tape, Tensor<float>::zeros(y.shape));
    for (const auto& name : params.names())
        for (float g : params.at(name).grad) REQUIRE(g == 0.0f);
    for (float g : tape.input_grad.data) REQUIRE(g == 0.0f);
}

TEST_CASE("a tape cannot be consumed twice") {
    Network net;
    net.prefix = "x.";
    net.layers.push_back(dense(2, 2));
    ParamStore<float> params = init_params<float>(net, 11);
    auto x = Tensor<float>::zeros({1, 2});
    auto [y, tape] = forward(net, params, x);
    backward(tape, Tensor<float>::zeros(y.shape));
    CHECK_THROWS_AS(backward(tape, Tensor<float>::zeros(y.shape)), NumericError);
}

// ---------------------------------------------------------------------------
// optimizer
// ---------------------------------------------------------------------------

TEST_CASE("optimizer: zero grads leave parameters unchanged") {
    Network net;
    net.prefix = "o.";
    net.layers.push_back(dense(3, 3));
    ParamStore<float> params = init_params<float>(net, 12);
    auto before = params.at("o.l0.w").data;
    params.at("o.l0.w").ensure_grad();
    params.at("o.l0.b").ensure_grad();
    Adam<float> opt;
    opt.step(params);
    CHECK(params.at("o.l0.w").data == before);
    CHECK(params.step == 1);
}

TEST_CASE("optimizer: constant gradient moves the parameter monotonically") {
    ParamStore<float> params;
    params.add("w", tensor_from<float>({1}, {0.0f}));
    params.at("w").ensure_grad();
    Adam<float> opt;
    float prev = 0.0f;
    for (int i = 0; i < 50; ++i) {
        params.at("w").grad[0] = 2.5f; // positive grad -> parameter decreases
        opt.step(params);
        CHECK(params.at("w").data[0] < prev);
        prev = params.at("w").data[0];
    }
}

TEST_CASE("optimizer: NaN gradient is a hard error naming the parameter") {
    ParamStore<float> params;
    params.add("enc.l0.w", tensor_from<float>({1}, {0.0f}));
    params.at("enc.l0.w").ensure_grad();
    params.at("enc.l0.w").grad[0] = std::nanf("");
    Adam<float> opt;
    CHECK_THROWS_WITH(opt.step(params), Catch::Matchers::ContainsSubstring("enc.l0.w"));
}

TEST_CASE("training step is bit-deterministic") {
    auto run = [] {
        Network net;
        net.prefix = "t.";
        net.layers.push_back(dense(4, 3));
        ParamStore<float> params = init_params<float>(net, 13);
        Adam<float> opt;
        Rng rng(14);
        for (int i = 0; i < 20; ++i) {
            auto x = random_tensor({5, 4}, rng);
            auto [y, tape] = forward(net, params, x);
            auto loss = categorical_xent(y, {0, 1, 2, 0, 1}, {1.0f, 1.0f, 1.0f});
            backward(tape, loss.dlogits);
            opt.step(params);
        }
        return params;
    };
    auto p1 = run();
    auto p2 = run();
    for (size_t i = 0; i < p1.size(); ++i) REQUIRE(p1.tensor(i).data == p2.tensor(i).data);
}

// ---------------------------------------------------------------------------
// init
// ---------------------------------------------------------------------------

TEST_CASE("init_params is seeded and respects the fan bound") {
    Network net;
    net.prefix = "i.";
    net.layers.push_back(dense(4, 4));
    auto a = init_params<float>(net, 42);
    auto b = init_params<float>(net, 42);
    auto c = init_params<float>(net, 43);
    CHECK(a.at("i.l0.w").data == b.at("i.l0.w").data);
    CHECK(a.at("i.l0.w").data != c.at("i.l0.w").data);
    const double bound = std::sqrt(6.0 / 8.0);
    REQUIRE(a.at("i.l0.w").data.size() == 16);
    for (float v : a.at("i.l0.w").data) CHECK(std::fabs(v) <= bound);
    for (float v : a.at("i.l0.b").data) CHECK(v == 0.0f);
}

// ---------------------------------------------------------------------------
// serialization
// ---------------------------------------------------------------------------

TEST_CASE("param save -> load -> save is byte-identical") {
    Network net;
    net.prefix = "s.";
    net.layers.push_back(conv1d(3, 8, 5));
    net.layers.push_back(dense(7, 9));
    ParamStore<float> params = init_params<float>(net, 77);
    std::ostringstream first;
    save_params(first, params);
    std::istringstream in(first.str());
    auto loaded = load_params(in);
    std::ostringstream second;
    save_params(second, loaded);
    REQUIRE(first.str() == second.str());
    CHECK(loaded.names() == params.names());

    std::istringstream garbage("not a model");
    CHECK_THROWS_AS(load_params(garbage), DataError);
}
