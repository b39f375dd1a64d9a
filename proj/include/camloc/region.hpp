#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "camloc/cam.hpp"
#include "camloc/tensor.hpp"

namespace camloc {

// Pixels stored packed as y*width + x, sorted ascending (raster order).
using PixelSet = std::vector<uint32_t>;

inline uint32_t pack_pixel(int x, int y, int width) {
    return static_cast<uint32_t>(y) * static_cast<uint32_t>(width) + static_cast<uint32_t>(x);
}

struct BoundingBox {
    int min_x = 0, min_y = 0, max_x = 0, max_y = 0;
};

struct RegionProposal {
    PixelSet pixels;  // at input resolution
    float score = 0.0f;
    BoundingBox bbox;
    int area = 0;
};

inline BoundingBox bounding_box(const PixelSet& pixels, int width) {
    BoundingBox b{1 << 30, 1 << 30, -1, -1};
    for (uint32_t p : pixels) {
        const int x = static_cast<int>(p % static_cast<uint32_t>(width));
        const int y = static_cast<int>(p / static_cast<uint32_t>(width));
        b.min_x = std::min(b.min_x, x);
        b.min_y = std::min(b.min_y, y);
        b.max_x = std::max(b.max_x, x);
        b.max_y = std::max(b.max_y, y);
    }
    return b;
}

inline Heatmap normalize(const Heatmap& hm) {
    Heatmap out = hm;
    normalize_heatmap(out);
    return out;
}

// mask[p] = value[p] >= tau
inline std::vector<uint8_t> threshold(const Heatmap& normalized, float tau) {
    check(tau >= 0.0f && tau <= 1.0f, "threshold: tau must lie in [0,1]");
    std::vector<uint8_t> mask(normalized.values.size());
    for (size_t i = 0; i < mask.size(); ++i) mask[i] = normalized.values[i] >= tau ? 1 : 0;
    return mask;
}

// Maximal 8-connected components of the true pixels, emitted in raster order
// of each component's first pixel. Iterative scan-and-grow, no recursion.
inline std::vector<PixelSet> connected_components(const std::vector<uint8_t>& mask, int width,
                                                  int height) {
    check(static_cast<size_t>(width) * static_cast<size_t>(height) == mask.size(),
          "components: mask size does not match dimensions");
    std::vector<uint8_t> seen(mask.size(), 0);
    std::vector<PixelSet> components;
    std::vector<uint32_t> stack;
    for (size_t start = 0; start < mask.size(); ++start) {
        if (!mask[start] || seen[start]) continue;
        PixelSet comp;
        stack.clear();
        stack.push_back(static_cast<uint32_t>(start));
        seen[start] = 1;
        while (!stack.empty()) {
            const uint32_t p = stack.back();
            stack.pop_back();
            comp.push_back(p);
            const int x = static_cast<int>(p % static_cast<uint32_t>(width));
            const int y = static_cast<int>(p / static_cast<uint32_t>(width));
            for (int dy = -1; dy <= 1; ++dy)
                for (int dx = -1; dx <= 1; ++dx) {
                    if (dx == 0 && dy == 0) continue;
                    const int nx = x + dx, ny = y + dy;
                    if (nx < 0 || ny < 0 || nx >= width || ny >= height) continue;
                    const size_t q = static_cast<size_t>(ny) * width + nx;
                    if (mask[q] && !seen[q]) {
                        seen[q] = 1;
                        stack.push_back(static_cast<uint32_t>(q));
                    }
                }
        }
        std::sort(comp.begin(), comp.end());
        components.push_back(std::move(comp));
    }
    return components;
}

// normalize -> threshold -> components -> min-area filter -> max-pool score.
// Sorted by score descending, ties broken by raster order of the first pixel.
inline std::vector<RegionProposal> propose(const Heatmap& heatmap, float tau = 0.65f,
                                           int min_area = 4) {
    Heatmap norm = heatmap.normalized ? heatmap : normalize(heatmap);
    const std::vector<uint8_t> mask = threshold(norm, tau);
    std::vector<RegionProposal> proposals;
    for (auto& comp : connected_components(mask, norm.width, norm.height)) {
        if (static_cast<int>(comp.size()) < min_area) continue;
        RegionProposal rp;
        rp.area = static_cast<int>(comp.size());
        rp.score = 0.0f;
        for (uint32_t p : comp) rp.score = std::max(rp.score, norm.values[p]);
        rp.bbox = bounding_box(comp, norm.width);
        rp.pixels = std::move(comp);
        proposals.push_back(std::move(rp));
    }
    std::stable_sort(proposals.begin(), proposals.end(),
                     [](const RegionProposal& a, const RegionProposal& b) {
                         if (a.score != b.score) return a.score > b.score;
                         return a.pixels.front() < b.pixels.front();
                     });
    return proposals;
}

}  // namespace camloc
