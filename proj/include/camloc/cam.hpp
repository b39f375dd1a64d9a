#pragma once

#include <algorithm>
#include <cmath>

#include "camloc/tensor.hpp"

namespace camloc {

// Localization map for one class, at input resolution after upsampling.
struct Heatmap {
    int width = 0, height = 0;
    std::vector<float> values;  // row-major, height*width
    int class_index = 0;
    bool normalized = false;

    float& at(int y, int x) { return values[static_cast<size_t>(y) * width + x]; }
    float at(int y, int x) const { return values[static_cast<size_t>(y) * width + x]; }
};

// Weighted sum of feature maps: out[x,y] = sum_k w[c,k] * A[k,x,y].
template <class T>
TensorT<T> compute_cam(const TensorT<T>& feature_maps, const TensorT<T>& weights, int class_index) {
    check(feature_maps.ndim() == 3, "cam: expected [K,u,v] feature maps");
    check(weights.ndim() == 2, "cam: expected [C,K] weights");
    const int K = feature_maps.dim(0), u = feature_maps.dim(1), v = feature_maps.dim(2);
    check(weights.dim(1) == K, "cam: weight columns must match feature map count");
    check(class_index >= 0 && class_index < weights.dim(0),
          "cam: class index " + std::to_string(class_index) + " out of range [0," +
              std::to_string(weights.dim(0)) + ")");
    TensorT<T> out({u, v});
    for (int k = 0; k < K; ++k) {
        const T w = weights.at2(class_index, k);
        for (int x = 0; x < u; ++x)
            for (int y = 0; y < v; ++y) out[int64_t(x) * v + y] += w * feature_maps.at3(k, x, y);
    }
    return out;
}

// Corner-aligned bilinear upsampling; output corners equal input corners.
template <class T>
TensorT<T> upsample_bilinear(const TensorT<T>& map, int target_h, int target_w) {
    check(map.ndim() == 2, "upsample: expected 2-d map");
    const int u = map.dim(0), v = map.dim(1);
    check(u >= 1 && v >= 1, "upsample: empty source");
    check(target_h >= u && target_w >= v, "upsample: target smaller than source");
    TensorT<T> out({target_h, target_w});
    const double sy = target_h > 1 ? double(u - 1) / double(target_h - 1) : 0.0;
    const double sx = target_w > 1 ? double(v - 1) / double(target_w - 1) : 0.0;
    for (int oy = 0; oy < target_h; ++oy) {
        const double fy = oy * sy;
        const int y0 = std::min(int(fy), u - 1);
        const int y1 = std::min(y0 + 1, u - 1);
        const double wy = fy - y0;
        for (int ox = 0; ox < target_w; ++ox) {
            const double fx = ox * sx;
            const int x0 = std::min(int(fx), v - 1);
            const int x1 = std::min(x0 + 1, v - 1);
            const double wx = fx - x0;
            const double top = (1.0 - wx) * double(map[int64_t(y0) * v + x0]) +
                               wx * double(map[int64_t(y0) * v + x1]);
            const double bot = (1.0 - wx) * double(map[int64_t(y1) * v + x0]) +
                               wx * double(map[int64_t(y1) * v + x1]);
            out[int64_t(oy) * target_w + ox] = T((1.0 - wy) * top + wy * bot);
        }
    }
    return out;
}

// mean(raw map) + bias; equals the network logit for that class.
template <class T>
T class_score_from_cam(const TensorT<T>& raw_map, T bias) {
    check(raw_map.ndim() == 2, "cam score: expected 2-d raw map");
    T sum = 0;
    for (T v : raw_map.data) sum += v;
    return sum / T(raw_map.size()) + bias;
}

// Min-max to [0,1]; a constant map becomes all zeros.
inline void normalize_heatmap(Heatmap& hm) {
    if (hm.values.empty()) return;
    float lo = hm.values[0], hi = hm.values[0];
    for (float v : hm.values) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    if (hi > lo) {
        const float inv = 1.0f / (hi - lo);
        for (float& v : hm.values) v = (v - lo) * inv;
    } else {
        std::fill(hm.values.begin(), hm.values.end(), 0.0f);
    }
    hm.normalized = true;
}

template <class T>
Heatmap make_heatmap(const TensorT<T>& map, int class_index) {
    Heatmap hm;
    hm.height = map.dim(0);
    hm.width = map.dim(1);
    hm.class_index = class_index;
    hm.values.resize(map.data.size());
    for (size_t i = 0; i < map.data.size(); ++i) hm.values[i] = float(map.data[i]);
    return hm;
}

}  // namespace camloc
