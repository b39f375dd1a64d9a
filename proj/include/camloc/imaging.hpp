#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "camloc/image_io.hpp"
#include "camloc/metrics.hpp"
#include "camloc/rng.hpp"
#include "camloc/tensor.hpp"

namespace camloc {

struct CropBox {
    int x0 = 0, y0 = 0, width = 0, height = 0;
};

// Smallest box containing all pixels whose max-channel intensity exceeds the
// threshold; an all-black image is returned whole.
inline std::pair<RawImage, CropBox> crop_black_margins(const RawImage& img,
                                                       int intensity_threshold = 10) {
    check(img.width >= 1 && img.height >= 1, "crop: empty image");
    int minx = img.width, miny = img.height, maxx = -1, maxy = -1;
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
            int mx = 0;
            for (int c = 0; c < img.channels; ++c) mx = std::max(mx, int(img.at(y, x, c)));
            if (mx > intensity_threshold) {
                minx = std::min(minx, x);
                miny = std::min(miny, y);
                maxx = std::max(maxx, x);
                maxy = std::max(maxy, y);
            }
        }
    if (maxx < 0) return {img, {0, 0, img.width, img.height}};
    CropBox box{minx, miny, maxx - minx + 1, maxy - miny + 1};
    RawImage out;
    out.width = box.width;
    out.height = box.height;
    out.channels = img.channels;
    out.id = img.id;
    out.data.resize(static_cast<size_t>(box.width) * box.height * img.channels);
    for (int y = 0; y < box.height; ++y)
        for (int x = 0; x < box.width; ++x)
            for (int c = 0; c < img.channels; ++c)
                out.at(y, x, c) = img.at(y + box.y0, x + box.x0, c);
    return {out, box};
}

namespace detail {

// Per-output-index source taps: area averaging when shrinking an axis,
// corner-aligned bilinear when growing it.
inline std::vector<std::vector<std::pair<int, double>>> resample_taps(int src, int dst) {
    std::vector<std::vector<std::pair<int, double>>> taps(static_cast<size_t>(dst));
    if (dst <= src) {
        const double scale = double(src) / double(dst);
        for (int o = 0; o < dst; ++o) {
            const double lo = o * scale, hi = (o + 1) * scale;
            double total = 0;
            for (int s = int(std::floor(lo)); s < src && double(s) < hi; ++s) {
                const double w = std::min(hi, double(s + 1)) - std::max(lo, double(s));
                if (w <= 0) continue;
                taps[static_cast<size_t>(o)].emplace_back(s, w);
                total += w;
            }
            for (auto& [s, w] : taps[static_cast<size_t>(o)]) w /= total;
        }
    } else {
        const double scale = dst > 1 ? double(src - 1) / double(dst - 1) : 0.0;
        for (int o = 0; o < dst; ++o) {
            const double f = o * scale;
            const int s0 = std::min(int(f), src - 1), s1 = std::min(s0 + 1, src - 1);
            const double w1 = f - s0;
            if (s1 == s0 || w1 == 0.0) taps[static_cast<size_t>(o)].emplace_back(s0, 1.0);
            else {
                taps[static_cast<size_t>(o)].emplace_back(s0, 1.0 - w1);
                taps[static_cast<size_t>(o)].emplace_back(s1, w1);
            }
        }
    }
    return taps;
}

}  // namespace detail

// Separable resampling to S x S; aspect ratio is not preserved.
inline RawImage resize(const RawImage& img, int S = 512) {
    check(S >= 8, "resize: target side must be at least 8");
    const auto xtaps = detail::resample_taps(img.width, S);
    const auto ytaps = detail::resample_taps(img.height, S);
    RawImage out;
    out.width = out.height = S;
    out.channels = img.channels;
    out.id = img.id;
    out.data.resize(static_cast<size_t>(S) * S * img.channels);
    // rows first into a float buffer, then columns
    std::vector<double> tmp(static_cast<size_t>(img.height) * S * img.channels);
    for (int y = 0; y < img.height; ++y)
        for (int o = 0; o < S; ++o)
            for (int c = 0; c < img.channels; ++c) {
                double acc = 0;
                for (const auto& [s, w] : xtaps[static_cast<size_t>(o)]) acc += w * img.at(y, s, c);
                tmp[(static_cast<size_t>(y) * S + o) * img.channels + c] = acc;
            }
    for (int o = 0; o < S; ++o)
        for (int x = 0; x < S; ++x)
            for (int c = 0; c < img.channels; ++c) {
                double acc = 0;
                for (const auto& [s, w] : ytaps[static_cast<size_t>(o)])
                    acc += w * tmp[(static_cast<size_t>(s) * S + x) * img.channels + c];
                out.at(o, x, c) = static_cast<uint8_t>(std::lround(std::clamp(acc, 0.0, 255.0)));
            }
    return out;
}

struct PreprocessedImage {
    Tensor tensor;  // [channels, S, S]
    CropBox crop_box;
    float mean = 0.0f, std_dev = 1.0f;
    std::string id;
};

// Single mean/std over all pixels and channels jointly.
inline PreprocessedImage standardize(const RawImage& img) {
    double sum = 0;
    for (uint8_t v : img.data) sum += v;
    const double mean = sum / double(img.data.size());
    double ss = 0;
    for (uint8_t v : img.data) {
        const double d = double(v) - mean;
        ss += d * d;
    }
    const double sd = std::sqrt(ss / double(img.data.size()));
    check(sd > 0, "standardize: degenerate image (zero variance): " + img.id);

    PreprocessedImage out;
    out.mean = float(mean);
    out.std_dev = float(sd);
    out.id = img.id;
    out.crop_box = {0, 0, img.width, img.height};
    out.tensor = Tensor({img.channels, img.height, img.width});
    for (int c = 0; c < img.channels; ++c)
        for (int y = 0; y < img.height; ++y)
            for (int x = 0; x < img.width; ++x)
                out.tensor.at3(c, y, x) = float((double(img.at(y, x, c)) - mean) / sd);
    return out;
}

struct PreprocessConfig {
    int size = 512;
    int crop_threshold = 10;
};

inline PreprocessedImage preprocess(const RawImage& img, const PreprocessConfig& cfg) {
    auto [cropped, box] = crop_black_margins(img, cfg.crop_threshold);
    PreprocessedImage out = standardize(resize(cropped, cfg.size));
    out.crop_box = box;
    return out;
}

struct AugmentParams {
    double brightness_delta = 0.2;  // fraction of the 8-bit range, drawn in [-d, d]
    double contrast_lo = 0.8, contrast_hi = 1.25;
    double max_rotation_deg = 360.0;  // angle drawn in [0, max)
    double flip_prob_h = 0.5, flip_prob_v = 0.5;
};

namespace detail {

inline RawImage rotate_bilinear(const RawImage& img, double angle_deg) {
    const int quarter = int(std::lround(angle_deg / 90.0));
    const bool right_angle = std::abs(angle_deg - quarter * 90.0) < 1e-9;
    RawImage out;
    out.width = img.width;
    out.height = img.height;
    out.channels = img.channels;
    out.id = img.id;
    out.data.assign(img.data.size(), 0);
    const double cx = (img.width - 1) / 2.0, cy = (img.height - 1) / 2.0;
    // exact values at right angles, no interpolation
    const double rad = angle_deg * 3.14159265358979323846 / 180.0;
    const double ca = right_angle ? double((quarter % 4 == 0) - (quarter % 4 == 2)) : std::cos(rad);
    const double sa = right_angle ? double(((quarter % 4) == 1) - ((quarter % 4) == 3)) : std::sin(rad);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
            // inverse map into the source
            const double dx = x - cx, dy = y - cy;
            const double sx = ca * dx + sa * dy + cx;
            const double sy = -sa * dx + ca * dy + cy;
            if (right_angle) {
                const int ix = int(std::lround(sx)), iy = int(std::lround(sy));
                if (ix < 0 || iy < 0 || ix >= img.width || iy >= img.height) continue;
                for (int c = 0; c < img.channels; ++c) out.at(y, x, c) = img.at(iy, ix, c);
                continue;
            }
            const int x0 = int(std::floor(sx)), y0 = int(std::floor(sy));
            if (x0 < -1 || y0 < -1 || x0 > img.width - 1 || y0 > img.height - 1) continue;
            const double wx = sx - x0, wy = sy - y0;
            for (int c = 0; c < img.channels; ++c) {
                auto sample = [&](int yy, int xx) -> double {
                    if (xx < 0 || yy < 0 || xx >= img.width || yy >= img.height) return 0.0;
                    return img.at(yy, xx, c);
                };
                const double v = (1 - wy) * ((1 - wx) * sample(y0, x0) + wx * sample(y0, x0 + 1)) +
                                 wy * ((1 - wx) * sample(y0 + 1, x0) + wx * sample(y0 + 1, x0 + 1));
                out.at(y, x, c) = static_cast<uint8_t>(std::lround(std::clamp(v, 0.0, 255.0)));
            }
        }
    return out;
}

}  // namespace detail

inline RawImage flip_horizontal(const RawImage& img) {
    RawImage out = img;
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
            for (int c = 0; c < img.channels; ++c)
                out.at(y, x, c) = img.at(y, img.width - 1 - x, c);
    return out;
}

inline RawImage flip_vertical(const RawImage& img) {
    RawImage out = img;
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
            for (int c = 0; c < img.channels; ++c)
                out.at(y, x, c) = img.at(img.height - 1 - y, x, c);
    return out;
}

// Brightness (additive), contrast (multiplicative about the image mean),
// rotation (bilinear, zero fill), then flips. Deterministic per seed.
inline RawImage augment(const RawImage& img, uint64_t rng_seed, const AugmentParams& params) {
    Rng rng(rng_seed);
    const double delta = rng.uniform(-params.brightness_delta, params.brightness_delta) * 255.0;
    const double contrast = rng.uniform(params.contrast_lo, params.contrast_hi);
    const double angle = params.max_rotation_deg > 0 ? rng.uniform(0.0, params.max_rotation_deg) : 0.0;
    const bool fh = rng.uniform() < params.flip_prob_h;
    const bool fv = rng.uniform() < params.flip_prob_v;

    RawImage out = img;
    if (delta != 0.0 || contrast != 1.0) {
        double sum = 0;
        for (uint8_t v : img.data) sum += v;
        const double mean = sum / double(img.data.size());
        for (size_t i = 0; i < out.data.size(); ++i) {
            const double v = contrast * (double(img.data[i]) - mean) + mean + delta;
            out.data[i] = static_cast<uint8_t>(std::lround(std::clamp(v, 0.0, 255.0)));
        }
    }
    if (angle != 0.0) out = detail::rotate_bilinear(out, angle);
    if (fh) out = flip_horizontal(out);
    if (fv) out = flip_vertical(out);
    return out;
}

// Per-pixel confidence = fraction of experts marking the pixel. Pixels at
// >= 0.75 form the fused mask, split into 8-connected regions; confidences
// are retained for the one-pixel criterion.
inline std::vector<GroundTruthRegion> fuse_expert_masks(const std::vector<RawImage>& masks,
                                                        LesionType type) {
    check(!masks.empty(), "fusion: need at least one expert mask");
    const int W = masks[0].width, H = masks[0].height;
    for (const auto& m : masks)
        check(m.width == W && m.height == H && m.channels == 1,
              "fusion: expert masks must share dimensions and be single channel");
    std::vector<float> confidence(static_cast<size_t>(W) * H, 0.0f);
    for (const auto& m : masks)
        for (size_t i = 0; i < confidence.size(); ++i)
            if (m.data[i] > 127) confidence[i] += 1.0f;
    for (float& c : confidence) c /= float(masks.size());

    std::vector<uint8_t> fused(confidence.size());
    for (size_t i = 0; i < fused.size(); ++i) fused[i] = confidence[i] >= 0.75f ? 1 : 0;

    std::vector<GroundTruthRegion> out;
    for (auto& comp : connected_components(fused, W, H)) {
        GroundTruthRegion g;
        g.lesion_type = type;
        g.confidence.reserve(comp.size());
        for (uint32_t p : comp) g.confidence.push_back(confidence[p]);
        g.pixels = std::move(comp);
        out.push_back(std::move(g));
    }
    return out;
}

}  // namespace camloc
