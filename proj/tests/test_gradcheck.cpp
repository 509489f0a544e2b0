#include <catch2/catch_amalgamated.hpp>

#include "gradcheck_problems.hpp"

using namespace gradcheck;

// Fast per-layer sweep; the acceptance suite runs the full 20-seed version.
TEST_CASE("gradient check: every layer kind (f32, fd oracle)") {
    const double eps = 1e-3;
    for (uint64_t seed : {100ull, 200ull, 300ull}) {
        har::Rng rng(seed);
        for (auto& [name, problem] : layer_problem_catalog(seed)) {
            auto stats = check_layer_problem(problem, eps, 80, rng);
            INFO(name << " seed " << seed << " max_rel_err=" << stats.max_rel_err);
            CHECK(stats.max_rel_err < 1e-3);
            CHECK(stats.coords_checked > 4 * stats.coords_skipped_kink);
        }
    }
}

TEST_CASE("gradient check: encoder+projector composition (f32)") {
    for (uint64_t seed : {7ull, 8ull}) {
        har::Rng rng(seed);
        auto problem = make_pretrain_problem(seed);
        auto stats = check_pretrain_problem(problem, 1e-3, 60, rng);
        INFO("seed " << seed << " max_rel_err=" << stats.max_rel_err << " skipped="
                     << stats.coords_skipped_kink);
        CHECK(stats.max_rel_err < 1e-3);
        CHECK(stats.coords_checked > 4 * stats.coords_skipped_kink);
    }
}

TEST_CASE("gradient check: head composition (f32)") {
    for (uint64_t seed : {17ull, 18ull}) {
        har::Rng rng(seed);
        auto problem = make_head_problem(seed);
        auto stats = check_head_problem(problem, 1e-3, 80, rng);
        INFO("seed " << seed << " max_rel_err=" << stats.max_rel_err << " skipped="
                     << stats.coords_skipped_kink);
        CHECK(stats.max_rel_err < 1e-3);
        CHECK(stats.coords_checked > 4 * stats.coords_skipped_kink);
    }
}

// f64 check mode: the same network templates instantiated at double pass a
// much tighter bound.
TEST_CASE("gradient check: f64 mode is tight") {
    const double eps = 1e-5;
    har::Rng rng(1234);
    for (auto& [name, problem] : layer_problem_catalog(999)) {
        auto dstore = convert_store<double>(problem.store);
        const auto& net = problem.net;
        const auto& coef = problem.coef;
        std::function<double(har::nn::ParamStore<double>&, bool)> run_a =
            [&](har::nn::ParamStore<double>& s, bool bw) {
                return run_net_linear_loss(net, s, coef, bw);
            };
        std::function<double(har::nn::ParamStore<double>&)> run_fd =
            [&](har::nn::ParamStore<double>& s) { return run_net_linear_loss(net, s, coef, false); };
        auto stats = fd_max_rel_err<double>(dstore, run_a, run_fd, eps, 60, rng);
        INFO(name << " max_rel_err=" << stats.max_rel_err);
        CHECK(stats.max_rel_err < 1e-6);
    }
}
