#pragma once

#include <algorithm>
#include <cmath>
#include <utility>

#include "camloc/tensor.hpp"

namespace camloc {

enum class Mode { Train, Infer };

inline std::pair<int, int> conv_output_size(int H, int W, int kh, int kw, int stride, int padding) {
    check(stride >= 1, "conv: stride must be positive");
    check(padding >= 0, "conv: padding must be non-negative");
    check(kh <= H + 2 * padding && kw <= W + 2 * padding,
          "conv: kernel larger than padded input");
    return {(H + 2 * padding - kh) / stride + 1, (W + 2 * padding - kw) / stride + 1};
}

// Cross-correlation over NCHW input with FCkhkw kernels. Each output scalar
// accumulates over (c, kh, kw) in that order, same as the naive loop nest.
template <class T>
TensorT<T> conv2d_forward(const TensorT<T>& input, const TensorT<T>& kernels,
                          const TensorT<T>& bias, int stride, int padding) {
    check(input.ndim() == 4 && kernels.ndim() == 4, "conv: expected 4-d input and kernels");
    const int N = input.dim(0), C = input.dim(1), H = input.dim(2), W = input.dim(3);
    const int F = kernels.dim(0), kh = kernels.dim(2), kw = kernels.dim(3);
    check(kernels.dim(1) == C, "conv: input has " + std::to_string(C) +
                                   " channels but kernels expect " + std::to_string(kernels.dim(1)));
    check(bias.ndim() == 1 && bias.dim(0) == F, "conv: bias length must equal kernel count");
    auto [OH, OW] = conv_output_size(H, W, kh, kw, stride, padding);

    TensorT<T> out({N, F, OH, OW});
    for (int n = 0; n < N; ++n)
        for (int f = 0; f < F; ++f)
            for (int oh = 0; oh < OH; ++oh) {
                T* orow = &out.at4(n, f, oh, 0);
                for (int ow = 0; ow < OW; ++ow) orow[ow] = bias[f];
                for (int c = 0; c < C; ++c)
                    for (int i = 0; i < kh; ++i) {
                        const int ih = oh * stride + i - padding;
                        if (ih < 0 || ih >= H) continue;
                        const T* irow = &input.at4(n, c, ih, 0);
                        for (int j = 0; j < kw; ++j) {
                            const T kv = kernels.at4(f, c, i, j);
                            const int base = j - padding;
                            // iw = ow*stride + base stays in [0, W)
                            const int lo = base < 0 ? (-base + stride - 1) / stride : 0;
                            const int hi = std::min(OW, (W - 1 - base) / stride + 1);
                            for (int ow = lo; ow < hi; ++ow) orow[ow] += kv * irow[ow * stride + base];
                        }
                    }
            }
    return out;
}

template <class T>
struct ConvGrads {
    TensorT<T> input, kernels, bias;
};

template <class T>
ConvGrads<T> conv2d_backward(const TensorT<T>& grad_out, const TensorT<T>& input,
                             const TensorT<T>& kernels, int stride, int padding) {
    const int N = input.dim(0), C = input.dim(1), H = input.dim(2), W = input.dim(3);
    const int F = kernels.dim(0), kh = kernels.dim(2), kw = kernels.dim(3);
    auto [OH, OW] = conv_output_size(H, W, kh, kw, stride, padding);
    check(grad_out.shape == std::vector<int>({N, F, OH, OW}),
          "conv backward: grad shape " + grad_out.shape_str() + " does not match forward output");

    ConvGrads<T> g{TensorT<T>(input.shape), TensorT<T>(kernels.shape), TensorT<T>({F})};
    for (int n = 0; n < N; ++n)
        for (int f = 0; f < F; ++f)
            for (int oh = 0; oh < OH; ++oh) {
                const T* grow = &grad_out.at4(n, f, oh, 0);
                for (int ow = 0; ow < OW; ++ow) g.bias[f] += grow[ow];
                for (int c = 0; c < C; ++c)
                    for (int i = 0; i < kh; ++i) {
                        const int ih = oh * stride + i - padding;
                        if (ih < 0 || ih >= H) continue;
                        const T* irow = &input.at4(n, c, ih, 0);
                        T* girow = &g.input.at4(n, c, ih, 0);
                        for (int j = 0; j < kw; ++j) {
                            const T kv = kernels.at4(f, c, i, j);
                            const int base = j - padding;
                            const int lo = base < 0 ? (-base + stride - 1) / stride : 0;
                            const int hi = std::min(OW, (W - 1 - base) / stride + 1);
                            T gk = 0;
                            for (int ow = lo; ow < hi; ++ow) {
                                gk += grow[ow] * irow[ow * stride + base];
                                girow[ow * stride + base] += grow[ow] * kv;
                            }
                            g.kernels.at4(f, c, i, j) += gk;
                        }
                    }
            }
    return g;
}

template <class T>
struct BnStats {
    TensorT<T> running_mean, running_var;
    T momentum = T(0.9);

    explicit BnStats(int channels = 0)
        : running_mean({std::max(channels, 1)}), running_var({std::max(channels, 1)}) {
        running_var.fill(T(1));
    }
};

template <class T>
struct BnCache {
    TensorT<T> xhat;
    std::vector<T> inv_std;
};

template <class T>
TensorT<T> batchnorm_forward(const TensorT<T>& input, const TensorT<T>& gamma,
                             const TensorT<T>& beta, BnStats<T>& stats, Mode mode,
                             T epsilon = T(1e-5), BnCache<T>* cache = nullptr) {
    check(input.ndim() == 4, "batchnorm: expected NCHW input");
    const int N = input.dim(0), C = input.dim(1), H = input.dim(2), W = input.dim(3);
    check(gamma.dim(0) == C && beta.dim(0) == C, "batchnorm: gamma/beta must have C entries");
    const int64_t M = int64_t(N) * H * W;
    if (mode == Mode::Train)
        check(M >= 2, "batchnorm: train mode needs at least 2 samples per channel");

    TensorT<T> out(input.shape);
    if (cache) {
        cache->xhat = TensorT<T>(input.shape);
        cache->inv_std.assign(static_cast<size_t>(C), T(0));
    }
    for (int c = 0; c < C; ++c) {
        T mean, var;
        if (mode == Mode::Train) {
            T sum = 0;
            for (int n = 0; n < N; ++n)
                for (int h = 0; h < H; ++h)
                    for (int w = 0; w < W; ++w) sum += input.at4(n, c, h, w);
            mean = sum / T(M);
            T ss = 0;
            for (int n = 0; n < N; ++n)
                for (int h = 0; h < H; ++h)
                    for (int w = 0; w < W; ++w) {
                        const T d = input.at4(n, c, h, w) - mean;
                        ss += d * d;
                    }
            var = ss / T(M);
            stats.running_mean[c] = stats.momentum * stats.running_mean[c] + (T(1) - stats.momentum) * mean;
            stats.running_var[c] = stats.momentum * stats.running_var[c] + (T(1) - stats.momentum) * var;
        } else {
            mean = stats.running_mean[c];
            var = stats.running_var[c];
        }
        const T inv_std = T(1) / std::sqrt(var + epsilon);
        if (cache) cache->inv_std[static_cast<size_t>(c)] = inv_std;
        for (int n = 0; n < N; ++n)
            for (int h = 0; h < H; ++h)
                for (int w = 0; w < W; ++w) {
                    const T xh = (input.at4(n, c, h, w) - mean) * inv_std;
                    if (cache) cache->xhat.at4(n, c, h, w) = xh;
                    out.at4(n, c, h, w) = gamma[c] * xh + beta[c];
                }
    }
    return out;
}

template <class T>
struct BnGrads {
    TensorT<T> input, gamma, beta;
};

template <class T>
BnGrads<T> batchnorm_backward(const TensorT<T>& grad_out, const TensorT<T>& gamma,
                              const BnCache<T>& cache) {
    const int N = grad_out.dim(0), C = grad_out.dim(1), H = grad_out.dim(2), W = grad_out.dim(3);
    const T M = T(int64_t(N) * H * W);
    BnGrads<T> g{TensorT<T>(grad_out.shape), TensorT<T>({C}), TensorT<T>({C})};
    for (int c = 0; c < C; ++c) {
        T sum_dy = 0, sum_dy_xhat = 0;
        for (int n = 0; n < N; ++n)
            for (int h = 0; h < H; ++h)
                for (int w = 0; w < W; ++w) {
                    const T dy = grad_out.at4(n, c, h, w);
                    sum_dy += dy;
                    sum_dy_xhat += dy * cache.xhat.at4(n, c, h, w);
                }
        g.beta[c] = sum_dy;
        g.gamma[c] = sum_dy_xhat;
        const T k = gamma[c] * cache.inv_std[static_cast<size_t>(c)];
        for (int n = 0; n < N; ++n)
            for (int h = 0; h < H; ++h)
                for (int w = 0; w < W; ++w) {
                    const T dy = grad_out.at4(n, c, h, w);
                    const T xh = cache.xhat.at4(n, c, h, w);
                    g.input.at4(n, c, h, w) = k * (dy - sum_dy / M - xh * sum_dy_xhat / M);
                }
    }
    return g;
}

template <class T>
TensorT<T> relu_forward(const TensorT<T>& input) {
    TensorT<T> out = input;
    for (T& v : out.data) v = std::max(v, T(0));
    return out;
}

template <class T>
TensorT<T> relu_backward(const TensorT<T>& grad_out, const TensorT<T>& input) {
    check(grad_out.same_shape(input), "relu backward: shape mismatch");
    TensorT<T> g(input.shape);
    for (int64_t i = 0; i < input.size(); ++i) g[i] = input[i] > T(0) ? grad_out[i] : T(0);
    return g;
}

// Spatial mean per feature map: [N,K,u,v] -> [N,K].
template <class T>
TensorT<T> gap_forward(const TensorT<T>& input) {
    check(input.ndim() == 4, "gap: expected NKuv input");
    const int N = input.dim(0), K = input.dim(1), u = input.dim(2), v = input.dim(3);
    TensorT<T> out({N, K});
    for (int n = 0; n < N; ++n)
        for (int k = 0; k < K; ++k) {
            T sum = 0;
            for (int x = 0; x < u; ++x)
                for (int y = 0; y < v; ++y) sum += input.at4(n, k, x, y);
            out.at2(n, k) = sum / T(u * v);
        }
    return out;
}

template <class T>
TensorT<T> gap_backward(const TensorT<T>& grad_out, const std::vector<int>& input_shape) {
    TensorT<T> g(input_shape);
    const int N = input_shape[0], K = input_shape[1], u = input_shape[2], v = input_shape[3];
    for (int n = 0; n < N; ++n)
        for (int k = 0; k < K; ++k) {
            const T d = grad_out.at2(n, k) / T(u * v);
            for (int x = 0; x < u; ++x)
                for (int y = 0; y < v; ++y) g.at4(n, k, x, y) = d;
        }
    return g;
}

// out = input * weights^T + bias, weights is [C,K].
template <class T>
TensorT<T> dense_forward(const TensorT<T>& input, const TensorT<T>& weights,
                         const TensorT<T>& bias) {
    check(input.ndim() == 2 && weights.ndim() == 2, "dense: expected 2-d input and weights");
    const int N = input.dim(0), K = input.dim(1), C = weights.dim(0);
    check(weights.dim(1) == K, "dense: input features " + std::to_string(K) +
                                   " but weights expect " + std::to_string(weights.dim(1)));
    check(bias.dim(0) == C, "dense: bias length must equal output count");
    TensorT<T> out({N, C});
    for (int n = 0; n < N; ++n)
        for (int c = 0; c < C; ++c) {
            T sum = bias[c];
            for (int k = 0; k < K; ++k) sum += input.at2(n, k) * weights.at2(c, k);
            out.at2(n, c) = sum;
        }
    return out;
}

template <class T>
struct DenseGrads {
    TensorT<T> input, weights, bias;
};

template <class T>
DenseGrads<T> dense_backward(const TensorT<T>& grad_out, const TensorT<T>& input,
                             const TensorT<T>& weights) {
    const int N = input.dim(0), K = input.dim(1), C = weights.dim(0);
    check(grad_out.shape == std::vector<int>({N, C}), "dense backward: grad shape mismatch");
    DenseGrads<T> g{TensorT<T>(input.shape), TensorT<T>(weights.shape), TensorT<T>({C})};
    for (int n = 0; n < N; ++n)
        for (int c = 0; c < C; ++c) {
            const T dy = grad_out.at2(n, c);
            g.bias[c] += dy;
            for (int k = 0; k < K; ++k) {
                g.weights.at2(c, k) += dy * input.at2(n, k);
                g.input.at2(n, k) += dy * weights.at2(c, k);
            }
        }
    return g;
}

// Mean cross-entropy over the batch with max-subtracted softmax.
template <class T>
std::pair<T, TensorT<T>> softmax_cross_entropy(const TensorT<T>& logits,
                                               const std::vector<int>& labels) {
    const int N = logits.dim(0), C = logits.dim(1);
    check(static_cast<int>(labels.size()) == N, "cross entropy: one label per sample");
    TensorT<T> grad(logits.shape);
    T loss = 0;
    for (int n = 0; n < N; ++n) {
        check(labels[static_cast<size_t>(n)] >= 0 && labels[static_cast<size_t>(n)] < C,
              "cross entropy: label out of range");
        T mx = logits.at2(n, 0);
        for (int c = 1; c < C; ++c) mx = std::max(mx, logits.at2(n, c));
        T denom = 0;
        for (int c = 0; c < C; ++c) denom += std::exp(logits.at2(n, c) - mx);
        const int y = labels[static_cast<size_t>(n)];
        loss += -(logits.at2(n, y) - mx - std::log(denom));
        for (int c = 0; c < C; ++c) {
            const T p = std::exp(logits.at2(n, c) - mx) / denom;
            grad.at2(n, c) = (p - (c == y ? T(1) : T(0))) / T(N);
        }
    }
    return {loss / T(N), std::move(grad)};
}

}  // namespace camloc
