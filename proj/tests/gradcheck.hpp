#pragma once

// Central-finite-difference gradient oracle. The function under test computes
// its loss and analytic gradients at working precision; the FD side runs at
// double precision so the oracle itself adds no f32 noise. Relative error is
// |fd - analytic| / max(1, |fd|, |analytic|).

#include <cmath>
#include <functional>
#include <vector>

#include "har/nn/tensor.hpp"
#include "har/rng.hpp"

namespace gradcheck {

template <typename To, typename From>
har::nn::ParamStore<To> convert_store(const har::nn::ParamStore<From>& src) {
    har::nn::ParamStore<To> out;
    out.seed = src.seed;
    out.step = src.step;
    for (size_t i = 0; i < src.size(); ++i) {
        const auto& t = src.tensor(i);
        har::nn::Tensor<To> copy;
        copy.shape = t.shape;
        copy.data.reserve(t.data.size());
        for (auto v : t.data) copy.data.push_back(static_cast<To>(v));
        out.add(src.names()[i], std::move(copy));
    }
    return out;
}

struct Stats {
    double max_rel_err = 0.0;
    int coords_checked = 0;
    int coords_skipped_kink = 0;
};

// run_a: loss at working precision; must populate grads when do_backward.
// run_fd: forward-only loss on a double store with identical layout.
//
// Central differences are only a valid derivative oracle where the loss is
// C^1 across [x-eps, x+eps]; relu and maxpool make it piecewise. A coordinate
// whose interval straddles a kink is detected by comparing the eps and eps/2
// estimates (they agree to O(eps^2) on smooth stretches and to O(1) across a
// kink) and excluded. The skip rate is reported so callers can bound it.
template <typename Real>
Stats fd_max_rel_err(har::nn::ParamStore<Real>& params,
                     const std::function<double(har::nn::ParamStore<Real>&, bool)>& run_a,
                     const std::function<double(har::nn::ParamStore<double>&)>& run_fd, double eps,
                     int n_coords, har::Rng& rng) {
    run_a(params, true);

    auto dstore = convert_store<double>(params);

    std::vector<std::pair<size_t, size_t>> coords;
    for (size_t t = 0; t < params.size(); ++t)
        for (size_t e = 0; e < params.tensor(t).data.size(); ++e) coords.emplace_back(t, e);
    if (static_cast<size_t>(n_coords) < coords.size()) {
        // Fisher-Yates prefix
        for (int i = 0; i < n_coords; ++i) {
            const size_t j = i + rng.index(coords.size() - i);
            std::swap(coords[i], coords[j]);
        }
        coords.resize(static_cast<size_t>(n_coords));
    }

    Stats stats;
    for (auto [t, e] : coords) {
        const double v = dstore.tensor(t).data[e];
        auto eval = [&](double x) {
            dstore.tensor(t).data[e] = x;
            const double l = run_fd(dstore);
            dstore.tensor(t).data[e] = v;
            return l;
        };
        const double fd = (eval(v + eps) - eval(v - eps)) / (2.0 * eps);
        const double fd_half = (eval(v + eps / 2) - eval(v - eps / 2)) / eps;
        if (std::fabs(fd - fd_half) > 1e-4 * std::max(1.0, std::fabs(fd))) {
            ++stats.coords_skipped_kink;
            continue;
        }
        const double analytic =
            params.tensor(t).grad.empty() ? 0.0 : static_cast<double>(params.tensor(t).grad[e]);
        const double rel =
            std::fabs(fd - analytic) / std::max({1.0, std::fabs(fd), std::fabs(analytic)});
        stats.max_rel_err = std::max(stats.max_rel_err, rel);
        ++stats.coords_checked;
    }
    return stats;
}

} // namespace gradcheck
