#pragma once

#include <cmath>
#include <vector>

#include "har/errors.hpp"
#include "har/nn/tensor.hpp"

namespace har::nn {

// Scalar loss plus the gradient w.r.t. the logits. Per-row losses and the
// normalizing reduction are accumulated in double so stable quantities like
// -log(sigmoid(20)) survive; everything else stays in Real.
template <typename Real>
struct LossResult {
    double value = 0.0;
    Tensor<Real> dlogits;
};

// loss = sum_i w_i * (-log softmax(logits_i)[label_i]) / sum_i w_i
// Log-sum-exp stabilized by subtracting the row max.
template <typename Real>
LossResult<Real> weighted_softmax_xent(const Tensor<Real>& logits, const std::vector<int>& labels,
                                       const std::vector<Real>& weights) {
    if (logits.shape.size() != 2) throw NumericError("xent: logits must be [N,K]");
    const int N = logits.shape[0], K = logits.shape[1];
    if (static_cast<int>(labels.size()) != N || static_cast<int>(weights.size()) != N)
        throw NumericError("xent: labels/weights length mismatch");

    double wsum = 0.0;
    for (Real w : weights) {
        if (w < Real(0)) throw NumericError("xent: negative weight");
        wsum += static_cast<double>(w);
    }
    if (wsum <= 0.0) throw NumericError("xent: total weight is zero");

    LossResult<Real> res;
    res.dlogits = Tensor<Real>::zeros(logits.shape);
    double total = 0.0;
    for (int n = 0; n < N; ++n) {
        const int y = labels[n];
        if (y < 0 || y >= K) throw NumericError("xent: label out of range at row " + std::to_string(n));
        const Real* row = logits.data.data() + static_cast<size_t>(n) * K;
        Real m = row[0];
        for (int k = 1; k < K; ++k) m = std::max(m, row[k]);
        double sum = 0.0;
        for (int k = 0; k < K; ++k) sum += std::exp(static_cast<double>(row[k] - m));
        const double log_z = static_cast<double>(m) + std::log(sum);
        const double w = static_cast<double>(weights[n]);
        total += w * (log_z - static_cast<double>(row[y]));

        Real* drow = res.dlogits.data.data() + static_cast<size_t>(n) * K;
        const double scale = w / wsum;
        for (int k = 0; k < K; ++k) {
            const double p = std::exp(static_cast<double>(row[k] - m)) / sum;
            drow[k] = static_cast<Real>(scale * (p - (k == y ? 1.0 : 0.0)));
        }
    }
    res.value = total / wsum;
    return res;
}

// Binary (K = 2) specialization used by the coincidence objective; weights
// are per pair-cell.
template <typename Real>
LossResult<Real> weighted_binary_softmax_xent(const Tensor<Real>& logits, const std::vector<int>& labels,
                                              const std::vector<Real>& weights) {
    if (logits.shape.size() != 2 || logits.shape[1] != 2)
        throw NumericError("binary xent: logits must be [N,2]");
    return weighted_softmax_xent(logits, labels, weights);
}

// Per-class weights applied per example: w_i = class_weights[label_i].
template <typename Real>
LossResult<Real> categorical_xent(const Tensor<Real>& logits, const std::vector<int>& labels,
                                  const std::vector<Real>& class_weights) {
    if (logits.shape.size() != 2) throw NumericError("xent: logits must be [N,K]");
    const int K = logits.shape[1];
    if (static_cast<int>(class_weights.size()) != K)
        throw NumericError("xent: class_weights must have K entries");
    std::vector<Real> w(labels.size());
    for (size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] < 0 || labels[i] >= K)
            throw NumericError("xent: label out of range at row " + std::to_string(i));
        w[i] = class_weights[labels[i]];
    }
    return weighted_softmax_xent(logits, labels, w);
}

} // namespace har::nn
