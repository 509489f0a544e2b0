#pragma once

#include <cmath>
#include <string>
#include <unordered_map>
#include <vector>

#include "har/errors.hpp"
#include "har/nn/tensor.hpp"

namespace har::nn {

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

// Adam with bias correction. Moments are keyed by parameter name and created
// lazily; updates run in a fixed order so repeated runs are bit-identical.
template <typename Real>
class Adam {
public:
    explicit Adam(AdamConfig cfg = {}) : cfg_(cfg) {}

    void step(ParamStore<Real>& params) {
        const long t = params.step + 1;
        const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t));
        const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t));
        for (size_t i = 0; i < params.size(); ++i) {
            Tensor<Real>& p = params.tensor(i);
            if (p.grad.empty()) continue; // never touched by backward
            auto& mom = moments_[params.names()[i]];
            if (mom.m.size() != p.data.size()) {
                mom.m.assign(p.data.size(), Real(0));
                mom.v.assign(p.data.size(), Real(0));
            }
            for (size_t j = 0; j < p.data.size(); ++j) {
                const double g = static_cast<double>(p.grad[j]);
                if (std::isnan(g))
                    throw NumericError("optimizer: NaN gradient in '" + params.names()[i] + "'");
                const double m = cfg_.beta1 * static_cast<double>(mom.m[j]) + (1.0 - cfg_.beta1) * g;
                const double v = cfg_.beta2 * static_cast<double>(mom.v[j]) + (1.0 - cfg_.beta2) * g * g;
                mom.m[j] = static_cast<Real>(m);
                mom.v[j] = static_cast<Real>(v);
                const double mhat = m / bc1;
                const double vhat = v / bc2;
                p.data[j] = static_cast<Real>(static_cast<double>(p.data[j]) -
                                              cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps));
            }
            p.zero_grad();
        }
        params.step = t;
    }

    const AdamConfig& config() const { return cfg_; }

private:
    struct Moments {
        std::vector<Real> m, v;
    };
    AdamConfig cfg_;
    std::unordered_map<std::string, Moments> moments_;
};

} // namespace har::nn
