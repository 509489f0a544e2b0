#pragma once

#include <cstdint>
#include <numeric>
#include <string>
#include <unordered_map>
#include <vector>

#include "har/errors.hpp"

namespace har::nn {

// Dense row-major tensor with an optional gradient buffer of the same shape.
// Real is float in the training path; tests also instantiate double for
// high-precision gradient checks.
template <typename Real>
struct Tensor {
    std::vector<int> shape;
    std::vector<Real> data;
    std::vector<Real> grad; // empty until ensure_grad()

    Tensor() = default;

    static Tensor zeros(std::vector<int> shape) {
        Tensor t;
        t.shape = std::move(shape);
        t.data.assign(t.count(), Real(0));
        return t;
    }

    size_t count() const {
        size_t n = 1;
        for (int d : shape) n *= static_cast<size_t>(d);
        return n;
    }

    int dim(size_t i) const { return shape[i]; }

    void ensure_grad() {
        if (grad.size() != data.size()) grad.assign(data.size(), Real(0));
    }

    void zero_grad() {
        std::fill(grad.begin(), grad.end(), Real(0));
    }

    bool same_shape(const std::vector<int>& other) const { return shape == other; }
};

template <typename Real>
Tensor<Real> tensor_from(std::vector<int> shape, std::vector<Real> data) {
    Tensor<Real> t;
    t.shape = std::move(shape);
    t.data = std::move(data);
    if (t.data.size() != t.count()) throw NumericError("tensor: data length does not match shape");
    return t;
}

inline std::string shape_str(const std::vector<int>& s) {
    std::string out = "[";
    for (size_t i = 0; i < s.size(); ++i) {
        if (i) out += "x";
        out += std::to_string(s[i]);
    }
    return out + "]";
}

// Flat named collection of trainable tensors. Iteration order is insertion
// order and therefore deterministic.
template <typename Real>
class ParamStore {
public:
    uint64_t seed = 0;
    long step = 0;

    Tensor<Real>& add(const std::string& name, Tensor<Real> t) {
        if (index_.count(name)) throw ConfigError("params: duplicate name '" + name + "'");
        index_[name] = names_.size();
        names_.push_back(name);
        tensors_.push_back(std::move(t));
        return tensors_.back();
    }

    bool contains(const std::string& name) const { return index_.count(name) != 0; }

    Tensor<Real>& at(const std::string& name) {
        auto it = index_.find(name);
        if (it == index_.end()) throw ConfigError("params: unknown name '" + name + "'");
        return tensors_[it->second];
    }

    const Tensor<Real>& at(const std::string& name) const {
        auto it = index_.find(name);
        if (it == index_.end()) throw ConfigError("params: unknown name '" + name + "'");
        return tensors_[it->second];
    }

    const std::vector<std::string>& names() const { return names_; }
    size_t size() const { return names_.size(); }

    Tensor<Real>& tensor(size_t i) { return tensors_[i]; }
    const Tensor<Real>& tensor(size_t i) const { return tensors_[i]; }

    void zero_grads() {
        for (auto& t : tensors_)
            if (!t.grad.empty()) t.zero_grad();
    }

    size_t total_count() const {
        size_t n = 0;
        for (const auto& t : tensors_) n += t.count();
        return n;
    }

private:
    std::vector<std::string> names_;
    std::unordered_map<std::string, size_t> index_;
    std::vector<Tensor<Real>> tensors_;
};

} // namespace har::nn
