#pragma once

#include <array>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <iomanip>
#include <string>
#include <vector>

#include "camloc/imaging.hpp"

namespace camloc {

inline const char* lesion_code(LesionType t) {
    switch (t) {
        case LesionType::Hemorrhage: return "H";
        case LesionType::HardExudate: return "HE";
        case LesionType::SoftExudate: return "SE";
        case LesionType::RedSmallDot: return "RSD";
    }
    return "?";
}

inline LesionType lesion_from_code(const std::string& code) {
    if (code == "H") return LesionType::Hemorrhage;
    if (code == "HE") return LesionType::HardExudate;
    if (code == "SE") return LesionType::SoftExudate;
    if (code == "RSD") return LesionType::RedSmallDot;
    throw std::invalid_argument("unknown lesion code: " + code);
}

struct DatasetItem {
    RawImage image;
    int label = 0;  // 0 NRDR, 1 RDR
    std::vector<GroundTruthRegion> regions;
};

struct LabeledDataset {
    std::vector<DatasetItem> items;
    std::string provenance = "synthetic";
};

struct SynthConfig {
    int num_images = 100;
    int size = 64;
    int channels = 1;
    double diseased_fraction = 0.5;
    std::array<bool, 4> types_enabled{true, true, true, true};
    int min_lesions = 1, max_lesions = 5;
    bool expert_noise = false;  // simulated per-expert mask erosion
    uint64_t seed = 1;
};

namespace detail {

// Smooth noise in [0,1]: bilinear interpolation over a coarse random grid.
class SmoothNoise {
public:
    SmoothNoise(Rng& rng, int cells) : cells_(cells), grid_((cells + 1) * (cells + 1)) {
        for (auto& v : grid_) v = rng.uniform();
    }
    double at(double u, double v) const {  // u,v in [0,1]
        const double gu = u * cells_, gv = v * cells_;
        const int i = std::min(int(gu), cells_ - 1), j = std::min(int(gv), cells_ - 1);
        const double fu = gu - i, fv = gv - j;
        auto g = [&](int a, int b) { return grid_[static_cast<size_t>(a) * (cells_ + 1) + b]; };
        return (1 - fu) * ((1 - fv) * g(i, j) + fv * g(i, j + 1)) +
               fu * ((1 - fv) * g(i + 1, j) + fv * g(i + 1, j + 1));
    }

private:
    int cells_;
    std::vector<double> grid_;
};

struct LesionShape {
    PixelSet pixels;
    LesionType type;
};

// Elliptical pixel set, fully inside the retina disc.
inline PixelSet ellipse_pixels(double cx, double cy, double a, double b, double theta, int S) {
    PixelSet out;
    const double ct = std::cos(theta), st = std::sin(theta);
    const int r = int(std::ceil(std::max(a, b))) + 1;
    for (int y = std::max(0, int(cy) - r); y <= std::min(S - 1, int(cy) + r); ++y)
        for (int x = std::max(0, int(cx) - r); x <= std::min(S - 1, int(cx) + r); ++x) {
            const double dx = x - cx, dy = y - cy;
            const double ex = (dx * ct + dy * st) / a, ey = (-dx * st + dy * ct) / b;
            if (ex * ex + ey * ey <= 1.0) out.push_back(pack_pixel(x, y, S));
        }
    std::sort(out.begin(), out.end());
    return out;
}

struct TypeSignature {
    double min_axis, max_axis;
    int delta;  // signed intensity shift
};

inline TypeSignature signature(LesionType t) {
    switch (t) {
        case LesionType::Hemorrhage: return {4.0, 8.0, -80};
        case LesionType::HardExudate: return {3.0, 6.0, +90};
        case LesionType::SoftExudate: return {5.0, 9.0, +70};
        case LesionType::RedSmallDot: return {1.0, 2.8, -90};
    }
    return {3.0, 6.0, 80};
}

}  // namespace detail

// Healthy images: vignetted retina disc with smooth texture noise. Diseased
// images additionally carry 1..max_lesions elliptical lesions of one type,
// with the exact rendered pixel sets recorded as ground truth.
inline LabeledDataset generate_synthetic(const SynthConfig& cfg) {
    check(cfg.num_images >= 1, "synth: need at least one image");
    check(cfg.size >= 16, "synth: image side must be at least 16");
    check(cfg.channels == 1 || cfg.channels == 3, "synth: 1 or 3 channels");
    std::vector<LesionType> enabled;
    for (int t = 0; t < kLesionTypeCount; ++t)
        if (cfg.types_enabled[static_cast<size_t>(t)]) enabled.push_back(static_cast<LesionType>(t));

    const int S = cfg.size;
    const double cx = (S - 1) / 2.0, cy = (S - 1) / 2.0;
    const double disc_r = S / 2.0;  // touches the frame so crop is the identity

    LabeledDataset ds;
    ds.provenance = "synthetic";
    const int num_diseased =
        enabled.empty() ? 0 : int(std::lround(cfg.num_images * cfg.diseased_fraction));

    for (int i = 0; i < cfg.num_images; ++i) {
        Rng rng(cfg.seed * 0x1000193ULL + static_cast<uint64_t>(i) * 0x01000001ULL + 7);
        detail::SmoothNoise noise(rng, 8);

        DatasetItem item;
        std::ostringstream id;
        id << "synth_" << std::setw(6) << std::setfill('0') << i;
        item.image.id = id.str();
        item.image.width = item.image.height = S;
        item.image.channels = cfg.channels;
        item.image.data.assign(static_cast<size_t>(S) * S * cfg.channels, 0);

        // background render
        std::vector<int> base(static_cast<size_t>(S) * S, 0);
        for (int y = 0; y < S; ++y)
            for (int x = 0; x < S; ++x) {
                const double dx = x - cx, dy = y - cy;
                const double r = std::sqrt(dx * dx + dy * dy);
                if (r > disc_r) continue;
                const double vignette = 1.0 - 0.3 * (r / disc_r) * (r / disc_r);
                const double v = (100.0 + 50.0 * noise.at(double(x) / (S - 1), double(y) / (S - 1))) *
                                 vignette;
                base[static_cast<size_t>(y) * S + x] = int(std::lround(v));
            }

        item.label = i < num_diseased ? 1 : 0;
        std::vector<detail::LesionShape> lesions;
        if (item.label == 1) {
            const LesionType type = enabled[static_cast<size_t>(i) % enabled.size()];
            const auto sig = detail::signature(type);
            const int count =
                cfg.min_lesions + int(rng.below(static_cast<uint64_t>(cfg.max_lesions - cfg.min_lesions + 1)));
            for (int l = 0; l < count; ++l) {
                for (int attempt = 0; attempt < 40; ++attempt) {
                    const double a = rng.uniform(sig.min_axis, sig.max_axis);
                    const double b = rng.uniform(sig.min_axis, sig.max_axis);
                    const double margin = std::max(a, b) + 2.0;
                    const double rad = rng.uniform(0.0, disc_r - margin);
                    const double ang = rng.uniform(0.0, 2 * 3.14159265358979323846);
                    const double lx = cx + rad * std::cos(ang), ly = cy + rad * std::sin(ang);
                    PixelSet px = detail::ellipse_pixels(lx, ly, a, b,
                                                         rng.uniform(0.0, 3.14159265358979323846), S);
                    if (px.empty()) continue;
                    bool clash = false;
                    for (const auto& other : lesions)
                        if (intersection_count(px, other.pixels) > 0) { clash = true; break; }
                    if (clash) continue;
                    lesions.push_back({std::move(px), type});
                    break;
                }
            }
            // lesion render, guaranteed to differ from the background
            for (const auto& les : lesions)
                for (uint32_t p : les.pixels) {
                    int v = std::clamp(base[p] + sig.delta, 0, 255);
                    if (v == base[p]) v += base[p] > 127 ? -1 : 1;
                    base[p] = v;
                }
        }

        for (int y = 0; y < S; ++y)
            for (int x = 0; x < S; ++x) {
                const int v = base[static_cast<size_t>(y) * S + x];
                if (cfg.channels == 1) {
                    item.image.at(y, x) = static_cast<uint8_t>(v);
                } else {
                    item.image.at(y, x, 0) = static_cast<uint8_t>(std::clamp(v * 14 / 10, 0, 255));
                    item.image.at(y, x, 1) = static_cast<uint8_t>(v);
                    item.image.at(y, x, 2) = static_cast<uint8_t>(v * 35 / 100);
                }
            }

        // ground truth, optionally through the simulated four-expert fusion
        for (auto& les : lesions) {
            if (!cfg.expert_noise) {
                GroundTruthRegion g;
                g.lesion_type = les.type;
                g.pixels = les.pixels;
                g.confidence.assign(g.pixels.size(), 1.0f);
                item.regions.push_back(std::move(g));
            }
        }
        if (cfg.expert_noise && !lesions.empty()) {
            std::vector<RawImage> experts(4);
            for (auto& e : experts) {
                e.width = e.height = S;
                e.channels = 1;
                e.data.assign(static_cast<size_t>(S) * S, 0);
            }
            for (const auto& les : lesions)
                for (uint32_t p : les.pixels)
                    for (auto& e : experts)
                        if (rng.uniform() < 0.92) e.data[p] = 255;
            auto fused = fuse_expert_masks(experts, lesions.front().type);
            for (auto& g : fused) item.regions.push_back(std::move(g));
        }

        ds.items.push_back(std::move(item));
    }
    return ds;
}

// ---- on-disk layout ----
// manifest.txt lines: <image path> <NRDR|RDR> [CODE=mask[,mask...]]...
// Paths are relative to the manifest's directory.

inline void write_dataset(const LabeledDataset& ds, const std::string& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(fs::path(dir) / "images");
    fs::create_directories(fs::path(dir) / "masks");
    std::ofstream manifest(fs::path(dir) / "manifest.txt");
    check(bool(manifest), "dataset write: cannot create manifest in " + dir);

    for (const auto& item : ds.items) {
        const std::string img_rel = "images/" + item.image.id + ".png";
        write_png(item.image, (fs::path(dir) / img_rel).string());
        manifest << img_rel << " " << (item.label ? "RDR" : "NRDR");

        // one fused-confidence mask per lesion type present
        for (int t = 0; t < kLesionTypeCount; ++t) {
            const auto type = static_cast<LesionType>(t);
            RawImage mask;
            mask.width = item.image.width;
            mask.height = item.image.height;
            mask.channels = 1;
            mask.data.assign(static_cast<size_t>(mask.width) * mask.height, 0);
            bool any = false;
            for (const auto& g : item.regions) {
                if (g.lesion_type != type) continue;
                any = true;
                for (size_t k = 0; k < g.pixels.size(); ++k)
                    mask.data[g.pixels[k]] =
                        static_cast<uint8_t>(std::lround(g.confidence[k] * 255.0f));
            }
            if (!any) continue;
            const std::string mask_rel =
                "masks/" + item.image.id + "_" + lesion_code(type) + ".png";
            write_png(mask, (fs::path(dir) / mask_rel).string());
            manifest << " " << lesion_code(type) << "=" << mask_rel;
        }
        manifest << "\n";
    }
}

inline LabeledDataset read_dataset(const std::string& manifest_path) {
    namespace fs = std::filesystem;
    std::ifstream is(manifest_path);
    check(bool(is), "dataset read: cannot open " + manifest_path);
    const fs::path base = fs::path(manifest_path).parent_path();

    LabeledDataset ds;
    ds.provenance = "manifest";
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::string img_rel, label;
        check(bool(ls >> img_rel >> label), "dataset read: malformed line: " + line);
        check(label == "NRDR" || label == "RDR", "dataset read: bad label " + label);

        DatasetItem item;
        item.image = read_image((base / img_rel).string());
        item.image.id = fs::path(img_rel).stem().string();
        item.label = label == "RDR" ? 1 : 0;

        std::string field;
        while (ls >> field) {
            const auto eq = field.find('=');
            check(eq != std::string::npos, "dataset read: expected CODE=paths, got " + field);
            const LesionType type = lesion_from_code(field.substr(0, eq));
            std::vector<RawImage> masks;
            std::istringstream paths(field.substr(eq + 1));
            std::string p;
            while (std::getline(paths, p, ',')) masks.push_back(read_image((base / p).string()));
            if (masks.size() == 1) {
                // single fused-confidence mask: gray level encodes confidence
                const RawImage& m = masks[0];
                check(m.channels == 1, "dataset read: confidence mask must be grayscale");
                std::vector<uint8_t> bin(m.data.size());
                for (size_t k = 0; k < bin.size(); ++k)
                    bin[k] = m.data[k] >= 191 ? 1 : 0;  // 0.75 * 255, rounded
                for (auto& comp : connected_components(bin, m.width, m.height)) {
                    GroundTruthRegion g;
                    g.lesion_type = type;
                    g.confidence.reserve(comp.size());
                    for (uint32_t px : comp) g.confidence.push_back(float(m.data[px]) / 255.0f);
                    g.pixels = std::move(comp);
                    item.regions.push_back(std::move(g));
                }
            } else {
                auto fused = fuse_expert_masks(masks, type);
                for (auto& g : fused) item.regions.push_back(std::move(g));
            }
        }
        ds.items.push_back(std::move(item));
    }
    return ds;
}

}  // namespace camloc
