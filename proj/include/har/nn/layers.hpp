#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "har/errors.hpp"
#include "har/nn/tensor.hpp"
#include "har/rng.hpp"

// Vectorized reductions in the conv backward dot products. The pragma only
// licenses SIMD reassociation for the marked loop; results stay deterministic
// run-to-run for a given binary.
#if defined(_OPENMP) || defined(__GNUC__)
#define HAR_PRAGMA_STR(x) _Pragma(#x)
#define HAR_SIMD HAR_PRAGMA_STR(omp simd)
#define HAR_SIMD_REDUCTION(var) HAR_PRAGMA_STR(omp simd reduction(+ : var))
#else
#define HAR_SIMD
#define HAR_SIMD_REDUCTION(var)
#endif

namespace har::nn {

enum class LayerKind { Conv1d, Dense, Relu, MaxPool1d, Flatten, Softmax };

struct LayerSpec {
    LayerKind kind;
    // conv1d
    int in_channels = 0;
    int out_channels = 0;
    int kernel = 0;
    int stride = 1;
    // dense
    int in_features = 0;
    int out_features = 0;
    // maxpool1d
    int pool = 0;
};

inline LayerSpec conv1d(int in_channels, int out_channels, int kernel, int stride = 1) {
    LayerSpec s{LayerKind::Conv1d};
    s.in_channels = in_channels;
    s.out_channels = out_channels;
    s.kernel = kernel;
    s.stride = stride;
    return s;
}

inline LayerSpec dense(int in_features, int out_features) {
    LayerSpec s{LayerKind::Dense};
    s.in_features = in_features;
    s.out_features = out_features;
    return s;
}

inline LayerSpec relu() { return LayerSpec{LayerKind::Relu}; }

inline LayerSpec maxpool1d(int pool) {
    LayerSpec s{LayerKind::MaxPool1d};
    s.pool = pool;
    return s;
}

inline LayerSpec flatten() { return LayerSpec{LayerKind::Flatten}; }
inline LayerSpec softmax() { return LayerSpec{LayerKind::Softmax}; }

inline const char* layer_kind_name(LayerKind k) {
    switch (k) {
        case LayerKind::Conv1d: return "conv1d";
        case LayerKind::Dense: return "dense";
        case LayerKind::Relu: return "relu";
        case LayerKind::MaxPool1d: return "maxpool1d";
        case LayerKind::Flatten: return "flatten";
        case LayerKind::Softmax: return "softmax";
    }
    return "?";
}

// A network is an ordered layer list plus a parameter-name prefix; parameters
// live in a ParamStore under "<prefix>l<idx>.w" / ".b".
struct Network {
    std::vector<LayerSpec> layers;
    std::string prefix;

    std::string param_name(size_t layer_idx, const char* which) const {
        return prefix + "l" + std::to_string(layer_idx) + "." + which;
    }
};

// Shape inference; throws naming the offending layer. Shapes are
// [N, C, L] for sequence tensors and [N, F] after flatten/dense.
inline std::vector<std::vector<int>> infer_shapes(const Network& net, const std::vector<int>& input) {
    std::vector<std::vector<int>> shapes;
    shapes.push_back(input);
    std::vector<int> cur = input;
    for (size_t li = 0; li < net.layers.size(); ++li) {
        const LayerSpec& l = net.layers[li];
        const std::string where = net.prefix + "layer " + std::to_string(li) + " (" +
                                  layer_kind_name(l.kind) + ")";
        switch (l.kind) {
            case LayerKind::Conv1d: {
                if (cur.size() != 3 || cur[1] != l.in_channels)
                    throw NumericError(where + ": expects [N," + std::to_string(l.in_channels) +
                                       ",L], got " + shape_str(cur));
                const int pad = (l.kernel - 1) / 2;
                const int lout = (cur[2] + 2 * pad - l.kernel) / l.stride + 1;
                if (lout < 1) throw NumericError(where + ": output length collapsed to 0");
                cur = {cur[0], l.out_channels, lout};
                break;
            }
            case LayerKind::Dense:
                if (cur.size() != 2 || cur[1] != l.in_features)
                    throw NumericError(where + ": expects [N," + std::to_string(l.in_features) +
                                       "], got " + shape_str(cur));
                cur = {cur[0], l.out_features};
                break;
            case LayerKind::Relu:
                break;
            case LayerKind::MaxPool1d: {
                if (cur.size() != 3) throw NumericError(where + ": expects [N,C,L], got " + shape_str(cur));
                const int lout = cur[2] / l.pool;
                if (lout < 1) throw NumericError(where + ": output length collapsed to 0");
                cur = {cur[0], cur[1], lout};
                break;
            }
            case LayerKind::Flatten: {
                if (cur.size() != 3) throw NumericError(where + ": expects [N,C,L], got " + shape_str(cur));
                cur = {cur[0], cur[1] * cur[2]};
                break;
            }
            case LayerKind::Softmax:
                if (cur.size() != 2) throw NumericError(where + ": expects [N,K], got " + shape_str(cur));
                break;
        }
        shapes.push_back(cur);
    }
    return shapes;
}

// Fan-in-scaled uniform init (bound = sqrt(6/(fan_in+fan_out))), zero biases.
template <typename Real>
void init_params_into(ParamStore<Real>& store, const Network& net, Rng& rng) {
    for (size_t li = 0; li < net.layers.size(); ++li) {
        const LayerSpec& l = net.layers[li];
        if (l.kind == LayerKind::Conv1d) {
            const int fan_in = l.in_channels * l.kernel;
            const int fan_out = l.out_channels * l.kernel;
            const double bound = std::sqrt(6.0 / (fan_in + fan_out));
            auto w = Tensor<Real>::zeros({l.out_channels, l.in_channels, l.kernel});
            for (auto& v : w.data) v = static_cast<Real>(rng.uniform(-bound, bound));
            store.add(net.param_name(li, "w"), std::move(w));
            store.add(net.param_name(li, "b"), Tensor<Real>::zeros({l.out_channels}));
        } else if (l.kind == LayerKind::Dense) {
            const double bound = std::sqrt(6.0 / (l.in_features + l.out_features));
            auto w = Tensor<Real>::zeros({l.in_features, l.out_features});
            for (auto& v : w.data) v = static_cast<Real>(rng.uniform(-bound, bound));
            store.add(net.param_name(li, "w"), std::move(w));
            store.add(net.param_name(li, "b"), Tensor<Real>::zeros({l.out_features}));
        }
    }
}

template <typename Real>
ParamStore<Real> init_params(const Network& net, uint64_t seed) {
    ParamStore<Real> store;
    store.seed = seed;
    Rng rng(seed);
    init_params_into(store, net, rng);
    return store;
}

// ============================================================================
// Forward / backward
// ============================================================================

// Everything backward needs: activations per layer boundary plus pooling
// argmax indices. One tape per forward call; consumed by backward.
template <typename Real>
struct Tape {
    const Network* net = nullptr;
    ParamStore<Real>* params = nullptr;
    std::vector<Tensor<Real>> acts;            // acts[0] = input, acts[k+1] = output of layer k
    std::vector<std::vector<int>> pool_argmax; // parallel to layers; empty unless maxpool
    Tensor<Real> input_grad;                   // filled by backward
    bool consumed = false;
};

namespace detail {

// For deep layers the sequence is short (positions < channels) and the
// per-position loops are overhead-bound; a transposed im2col layout makes the
// inner loop run across the wide channel dimension instead.
template <typename Real>
bool conv_prefers_channel_major(const LayerSpec& l, int L) {
    return l.stride == 1 && L < l.out_channels;
}

template <typename Real>
void im2col_transposed(const Real* x, int IC, int L, int K, int pad, std::vector<Real>& cols_t) {
    const int ICK = IC * K;
    cols_t.assign(static_cast<size_t>(L) * ICK, Real(0));
    for (int p = 0; p < L; ++p) {
        Real* row = cols_t.data() + static_cast<size_t>(p) * ICK;
        for (int ic = 0; ic < IC; ++ic)
            for (int k = 0; k < K; ++k) {
                const int q = p + k - pad;
                if (q >= 0 && q < L) row[ic * K + k] = x[static_cast<size_t>(ic) * L + q];
            }
    }
}

template <typename Real>
void conv1d_forward_channel_major(const LayerSpec& l, const Tensor<Real>& x, const Tensor<Real>& w,
                                  const Tensor<Real>& b, Tensor<Real>& y) {
    const int N = x.shape[0], IC = x.shape[1], L = x.shape[2];
    const int OC = l.out_channels, K = l.kernel;
    const int pad = (K - 1) / 2;
    const int ICK = IC * K;
    // W^T: [ICK][OC], shared across the batch
    std::vector<Real> wt(static_cast<size_t>(ICK) * OC);
    for (int oc = 0; oc < OC; ++oc)
        for (int f = 0; f < ICK; ++f)
            wt[static_cast<size_t>(f) * OC + oc] = w.data[static_cast<size_t>(oc) * ICK + f];

    std::vector<Real> cols_t, out_t(static_cast<size_t>(L) * OC);
    for (int n = 0; n < N; ++n) {
        const Real* xn = x.data.data() + static_cast<size_t>(n) * IC * L;
        im2col_transposed(xn, IC, L, K, pad, cols_t);
        std::fill(out_t.begin(), out_t.end(), Real(0));
        for (int p = 0; p < L; ++p) {
            const Real* crow = cols_t.data() + static_cast<size_t>(p) * ICK;
            Real* __restrict orow = out_t.data() + static_cast<size_t>(p) * OC;
            for (int f = 0; f < ICK; ++f) {
                const Real cv = crow[f];
                const Real* __restrict wrow = wt.data() + static_cast<size_t>(f) * OC;
HAR_SIMD
                for (int oc = 0; oc < OC; ++oc) orow[oc] += cv * wrow[oc];
            }
        }
        Real* yn = y.data.data() + static_cast<size_t>(n) * OC * L;
        for (int oc = 0; oc < OC; ++oc)
            for (int p = 0; p < L; ++p)
                yn[static_cast<size_t>(oc) * L + p] = out_t[static_cast<size_t>(p) * OC + oc] + b.data[oc];
    }
}

template <typename Real>
void conv1d_backward_channel_major(const LayerSpec& l, const Tensor<Real>& x, const Tensor<Real>& w,
                                   const Tensor<Real>& dy, Tensor<Real>& dx, Tensor<Real>& dw,
                                   Tensor<Real>& db) {
    const int N = x.shape[0], IC = x.shape[1], L = x.shape[2];
    const int OC = l.out_channels, K = l.kernel;
    const int pad = (K - 1) / 2;
    const int ICK = IC * K;
    std::vector<Real> cols_t, dy_t(static_cast<size_t>(L) * OC),
        dcols_t(static_cast<size_t>(L) * ICK);
    for (int n = 0; n < N; ++n) {
        const Real* xn = x.data.data() + static_cast<size_t>(n) * IC * L;
        const Real* dyn = dy.data.data() + static_cast<size_t>(n) * OC * L;
        im2col_transposed(xn, IC, L, K, pad, cols_t);
        for (int oc = 0; oc < OC; ++oc) {
            Real acc = 0;
            for (int p = 0; p < L; ++p) {
                const Real g = dyn[static_cast<size_t>(oc) * L + p];
                dy_t[static_cast<size_t>(p) * OC + oc] = g;
                acc += g;
            }
            db.grad[oc] += acc;
        }
        std::fill(dcols_t.begin(), dcols_t.end(), Real(0));
        for (int p = 0; p < L; ++p) {
            const Real* dyrow = dy_t.data() + static_cast<size_t>(p) * OC;
            Real* __restrict dcrow = dcols_t.data() + static_cast<size_t>(p) * ICK;
            const Real* crow = cols_t.data() + static_cast<size_t>(p) * ICK;
            for (int oc = 0; oc < OC; ++oc) {
                const Real g = dyrow[oc];
                const Real* __restrict wrow = w.data.data() + static_cast<size_t>(oc) * ICK;
                Real* __restrict dwrow = dw.grad.data() + static_cast<size_t>(oc) * ICK;
HAR_SIMD
                for (int f = 0; f < ICK; ++f) {
                    dcrow[f] += g * wrow[f];
                    dwrow[f] += g * crow[f];
                }
            }
        }
        Real* dxn = dx.data.data() + static_cast<size_t>(n) * IC * L;
        for (int p = 0; p < L; ++p) {
            const Real* dcrow = dcols_t.data() + static_cast<size_t>(p) * ICK;
            for (int ic = 0; ic < IC; ++ic)
                for (int k = 0; k < K; ++k) {
                    const int q = p + k - pad;
                    if (q >= 0 && q < L) dxn[static_cast<size_t>(ic) * L + q] += dcrow[ic * K + k];
                }
        }
    }
}

template <typename Real>
void conv1d_forward(const LayerSpec& l, const Tensor<Real>& x, const Tensor<Real>& w,
                    const Tensor<Real>& b, Tensor<Real>& y) {
    const int N = x.shape[0], IC = x.shape[1], L = x.shape[2];
    const int OC = l.out_channels, K = l.kernel, S = l.stride;
    const int pad = (K - 1) / 2;
    const int LO = y.shape[2];
    if (conv_prefers_channel_major<Real>(l, L)) {
        conv1d_forward_channel_major(l, x, w, b, y);
        return;
    }
    for (int n = 0; n < N; ++n) {
        for (int oc = 0; oc < OC; ++oc) {
            Real* yrow = y.data.data() + (static_cast<size_t>(n) * OC + oc) * LO;
            const Real bias = b.data[oc];
            for (int p = 0; p < LO; ++p) yrow[p] = bias;
            for (int ic = 0; ic < IC; ++ic) {
                const Real* xrow = x.data.data() + (static_cast<size_t>(n) * IC + ic) * L;
                const Real* wrow = w.data.data() + (static_cast<size_t>(oc) * IC + ic) * K;
                if (S == 1) {
                    for (int k = 0; k < K; ++k) {
                        const Real wv = wrow[k];
                        const int off = k - pad;
                        const int p0 = std::max(0, -off);
                        const int p1 = std::min(LO, L - off);
                        const Real* __restrict xs = xrow + off;
                        Real* __restrict ys = yrow;
HAR_SIMD
                        for (int p = p0; p < p1; ++p) ys[p] += wv * xs[p];
                    }
                } else {
                    for (int p = 0; p < LO; ++p) {
                        Real acc = 0;
                        const int q0 = p * S - pad;
                        for (int k = 0; k < K; ++k) {
                            const int q = q0 + k;
                            if (q >= 0 && q < L) acc += wrow[k] * xrow[q];
                        }
                        yrow[p] += acc;
                    }
                }
            }
        }
    }
}

template <typename Real>
void conv1d_backward(const LayerSpec& l, const Tensor<Real>& x, const Tensor<Real>& w,
                     const Tensor<Real>& dy, Tensor<Real>& dx, Tensor<Real>& dw, Tensor<Real>& db) {
    const int N = x.shape[0], IC = x.shape[1], L = x.shape[2];
    const int OC = l.out_channels, K = l.kernel, S = l.stride;
    const int pad = (K - 1) / 2;
    const int LO = dy.shape[2];
    if (conv_prefers_channel_major<Real>(l, L)) {
        conv1d_backward_channel_major(l, x, w, dy, dx, dw, db);
        return;
    }
    for (int n = 0; n < N; ++n) {
        for (int oc = 0; oc < OC; ++oc) {
            const Real* dyrow = dy.data.data() + (static_cast<size_t>(n) * OC + oc) * LO;
            Real acc_b = 0;
            for (int p = 0; p < LO; ++p) acc_b += dyrow[p];
            db.grad[oc] += acc_b;
            for (int ic = 0; ic < IC; ++ic) {
                const Real* xrow = x.data.data() + (static_cast<size_t>(n) * IC + ic) * L;
                Real* dxrow = dx.data.data() + (static_cast<size_t>(n) * IC + ic) * L;
                const Real* wrow = w.data.data() + (static_cast<size_t>(oc) * IC + ic) * K;
                Real* dwrow = dw.grad.data() + (static_cast<size_t>(oc) * IC + ic) * K;
                if (S == 1) {
                    for (int k = 0; k < K; ++k) {
                        const int off = k - pad;
                        const int p0 = std::max(0, -off);
                        const int p1 = std::min(LO, L - off);
                        const Real wv = wrow[k];
                        Real* __restrict dxs = dxrow + off;
                        const Real* __restrict xs = xrow + off;
                        const Real* __restrict dys = dyrow;
HAR_SIMD
                        for (int p = p0; p < p1; ++p) dxs[p] += wv * dys[p];
                        Real acc_w = 0;
HAR_SIMD_REDUCTION(acc_w)
                        for (int p = p0; p < p1; ++p) acc_w += xs[p] * dys[p];
                        dwrow[k] += acc_w;
                    }
                } else {
                    for (int p = 0; p < LO; ++p) {
                        const int q0 = p * S - pad;
                        const Real g = dyrow[p];
                        for (int k = 0; k < K; ++k) {
                            const int q = q0 + k;
                            if (q >= 0 && q < L) {
                                dxrow[q] += wrow[k] * g;
                                dwrow[k] += xrow[q] * g;
                            }
                        }
                    }
                }
            }
        }
    }
}

// Batch rows are processed in blocks so the weight matrix streams from cache
// once per block instead of once per row.
constexpr int kDenseBlock = 8;

template <typename Real>
void dense_forward(const Tensor<Real>& x, const Tensor<Real>& w, const Tensor<Real>& b,
                   Tensor<Real>& y) {
    const int N = x.shape[0], F = x.shape[1], U = y.shape[1];
    for (int n0 = 0; n0 < N; n0 += kDenseBlock) {
        const int n1 = std::min(N, n0 + kDenseBlock);
        for (int n = n0; n < n1; ++n) {
            Real* yrow = y.data.data() + static_cast<size_t>(n) * U;
            for (int u = 0; u < U; ++u) yrow[u] = b.data[u];
        }
        for (int f = 0; f < F; ++f) {
            const Real* __restrict wrow = w.data.data() + static_cast<size_t>(f) * U;
            for (int n = n0; n < n1; ++n) {
                const Real xv = x.data[static_cast<size_t>(n) * F + f];
                Real* __restrict yrow = y.data.data() + static_cast<size_t>(n) * U;
HAR_SIMD
                for (int u = 0; u < U; ++u) yrow[u] += xv * wrow[u];
            }
        }
    }
}

template <typename Real>
void dense_backward(const Tensor<Real>& x, const Tensor<Real>& w, const Tensor<Real>& dy,
                    Tensor<Real>& dx, Tensor<Real>& dw, Tensor<Real>& db) {
    const int N = x.shape[0], F = x.shape[1], U = dy.shape[1];
    for (int n = 0; n < N; ++n) {
        const Real* dyrow = dy.data.data() + static_cast<size_t>(n) * U;
        for (int u = 0; u < U; ++u) db.grad[u] += dyrow[u];
    }
    // dX = dY * W^T as contiguous axpy rows over a transposed copy
    std::vector<Real> wt(static_cast<size_t>(U) * F);
    for (int f = 0; f < F; ++f)
        for (int u = 0; u < U; ++u) wt[static_cast<size_t>(u) * F + f] = w.data[static_cast<size_t>(f) * U + u];
    for (int n0 = 0; n0 < N; n0 += kDenseBlock) {
        const int n1 = std::min(N, n0 + kDenseBlock);
        for (int u = 0; u < U; ++u) {
            const Real* __restrict wtrow = wt.data() + static_cast<size_t>(u) * F;
            for (int n = n0; n < n1; ++n) {
                const Real g = dy.data[static_cast<size_t>(n) * U + u];
                Real* __restrict dxrow = dx.data.data() + static_cast<size_t>(n) * F;
HAR_SIMD
                for (int f = 0; f < F; ++f) dxrow[f] += g * wtrow[f];
            }
        }
        for (int f = 0; f < F; ++f) {
            Real* __restrict dwrow = dw.grad.data() + static_cast<size_t>(f) * U;
            for (int n = n0; n < n1; ++n) {
                const Real xv = x.data[static_cast<size_t>(n) * F + f];
                const Real* __restrict dyrow = dy.data.data() + static_cast<size_t>(n) * U;
HAR_SIMD
                for (int u = 0; u < U; ++u) dwrow[u] += xv * dyrow[u];
            }
        }
    }
}

template <typename Real>
void softmax_rows(const Tensor<Real>& x, Tensor<Real>& y) {
    const int N = x.shape[0], K = x.shape[1];
    for (int n = 0; n < N; ++n) {
        const Real* xr = x.data.data() + static_cast<size_t>(n) * K;
        Real* yr = y.data.data() + static_cast<size_t>(n) * K;
        Real m = xr[0];
        for (int k = 1; k < K; ++k) m = std::max(m, xr[k]);
        double sum = 0.0;
        for (int k = 0; k < K; ++k) {
            const double e = std::exp(static_cast<double>(xr[k] - m));
            yr[k] = static_cast<Real>(e);
            sum += e;
        }
        const Real inv = static_cast<Real>(1.0 / sum);
        for (int k = 0; k < K; ++k) yr[k] *= inv;
    }
}

} // namespace detail

template <typename Real>
std::pair<Tensor<Real>, Tape<Real>> forward(const Network& net, ParamStore<Real>& params,
                                            const Tensor<Real>& x) {
    auto shapes = infer_shapes(net, x.shape);
    Tape<Real> tape;
    tape.net = &net;
    tape.params = &params;
    tape.acts.reserve(net.layers.size() + 1);
    tape.acts.push_back(x);
    tape.pool_argmax.resize(net.layers.size());

    for (size_t li = 0; li < net.layers.size(); ++li) {
        const LayerSpec& l = net.layers[li];
        const Tensor<Real>& in = tape.acts.back();
        Tensor<Real> out = Tensor<Real>::zeros(shapes[li + 1]);
        switch (l.kind) {
            case LayerKind::Conv1d:
                detail::conv1d_forward(l, in, params.at(net.param_name(li, "w")),
                                       params.at(net.param_name(li, "b")), out);
                break;
            case LayerKind::Dense:
                detail::dense_forward(in, params.at(net.param_name(li, "w")),
                                      params.at(net.param_name(li, "b")), out);
                break;
            case LayerKind::Relu:
                for (size_t i = 0; i < in.data.size(); ++i)
                    out.data[i] = in.data[i] > Real(0) ? in.data[i] : Real(0);
                break;
            case LayerKind::MaxPool1d: {
                const int N = in.shape[0], C = in.shape[1], L = in.shape[2];
                const int LO = out.shape[2], P = l.pool;
                auto& arg = tape.pool_argmax[li];
                arg.resize(static_cast<size_t>(N) * C * LO);
                for (int n = 0; n < N; ++n)
                    for (int c = 0; c < C; ++c) {
                        const Real* row = in.data.data() + (static_cast<size_t>(n) * C + c) * L;
                        Real* orow = out.data.data() + (static_cast<size_t>(n) * C + c) * LO;
                        int* arow = arg.data() + (static_cast<size_t>(n) * C + c) * LO;
                        for (int p = 0; p < LO; ++p) {
                            int best = p * P;
                            Real bv = row[best];
                            for (int q = 1; q < P; ++q)
                                if (row[p * P + q] > bv) {
                                    bv = row[p * P + q];
                                    best = p * P + q;
                                }
                            orow[p] = bv;
                            arow[p] = best;
                        }
                    }
                break;
            }
            case LayerKind::Flatten:
                out.data = in.data; // same row-major layout
                break;
            case LayerKind::Softmax:
                detail::softmax_rows(in, out);
                break;
        }
        tape.acts.push_back(std::move(out));
    }
    return {tape.acts.back(), std::move(tape)};
}

// Accumulates parameter gradients and the input gradient. A tape can be
// consumed once; reuse is a hard error.
template <typename Real>
void backward(Tape<Real>& tape, const Tensor<Real>& upstream) {
    if (!tape.net) throw NumericError("backward: missing tape");
    if (tape.consumed) throw NumericError("backward: tape already consumed; rerun forward first");
    tape.consumed = true;

    const Network& net = *tape.net;
    ParamStore<Real>& params = *tape.params;
    if (upstream.shape != tape.acts.back().shape)
        throw NumericError("backward: upstream shape " + shape_str(upstream.shape) +
                           " does not match output " + shape_str(tape.acts.back().shape));

    Tensor<Real> dy = upstream;
    for (size_t li = net.layers.size(); li-- > 0;) {
        const LayerSpec& l = net.layers[li];
        const Tensor<Real>& in = tape.acts[li];
        Tensor<Real> dx = Tensor<Real>::zeros(in.shape);
        switch (l.kind) {
            case LayerKind::Conv1d: {
                auto& w = params.at(net.param_name(li, "w"));
                auto& b = params.at(net.param_name(li, "b"));
                w.ensure_grad();
                b.ensure_grad();
                detail::conv1d_backward(l, in, w, dy, dx, w, b);
                break;
            }
            case LayerKind::Dense: {
                auto& w = params.at(net.param_name(li, "w"));
                auto& b = params.at(net.param_name(li, "b"));
                w.ensure_grad();
                b.ensure_grad();
                detail::dense_backward(in, w, dy, dx, w, b);
                break;
            }
            case LayerKind::Relu:
                for (size_t i = 0; i < in.data.size(); ++i)
                    dx.data[i] = in.data[i] > Real(0) ? dy.data[i] : Real(0);
                break;
            case LayerKind::MaxPool1d: {
                const int C = in.shape[1];
                const int N = in.shape[0];
                const int L = in.shape[2];
                const int LO = dy.shape[2];
                const auto& arg = tape.pool_argmax[li];
                for (int n = 0; n < N; ++n)
                    for (int c = 0; c < C; ++c) {
                        Real* dxrow = dx.data.data() + (static_cast<size_t>(n) * C + c) * L;
                        const Real* dyrow = dy.data.data() + (static_cast<size_t>(n) * C + c) * LO;
                        const int* arow = arg.data() + (static_cast<size_t>(n) * C + c) * LO;
                        for (int p = 0; p < LO; ++p) dxrow[arow[p]] += dyrow[p];
                    }
                break;
            }
            case LayerKind::Flatten:
                dx.data = dy.data;
                break;
            case LayerKind::Softmax: {
                // dx = y * (dy - sum(dy * y)) rowwise
                const Tensor<Real>& y = tape.acts[li + 1];
                const int N = y.shape[0], K = y.shape[1];
                for (int n = 0; n < N; ++n) {
                    const Real* yr = y.data.data() + static_cast<size_t>(n) * K;
                    const Real* dyr = dy.data.data() + static_cast<size_t>(n) * K;
                    Real dot = 0;
                    for (int k = 0; k < K; ++k) dot += dyr[k] * yr[k];
                    Real* dxr = dx.data.data() + static_cast<size_t>(n) * K;
                    for (int k = 0; k < K; ++k) dxr[k] = yr[k] * (dyr[k] - dot);
                }
                break;
            }
        }
        dy = std::move(dx);
    }
    tape.input_grad = std::move(dy);
}

} // namespace har::nn
