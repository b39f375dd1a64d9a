#pragma once

#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "camloc/cam.hpp"
#include "camloc/image_io.hpp"
#include "camloc/region.hpp"

namespace camloc {

// Lossless float sidecar: magic, width, height, class index, then
// little-endian 32-bit floats in raster order.
inline void write_heatmap_binary(const Heatmap& hm, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    check(bool(os), "heatmap write: cannot open " + path);
    os.write("CAMHMP1\0", 8);
    const uint32_t meta[3] = {static_cast<uint32_t>(hm.width), static_cast<uint32_t>(hm.height),
                              static_cast<uint32_t>(hm.class_index)};
    os.write(reinterpret_cast<const char*>(meta), sizeof(meta));
    os.write(reinterpret_cast<const char*>(hm.values.data()),
             static_cast<std::streamsize>(hm.values.size() * 4));
}

inline Heatmap read_heatmap_binary(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    check(bool(is), "heatmap read: cannot open " + path);
    char magic[8];
    uint32_t meta[3];
    if (!is.read(magic, 8) || std::memcmp(magic, "CAMHMP1\0", 8) != 0)
        throw std::runtime_error("heatmap read: bad magic in " + path);
    if (!is.read(reinterpret_cast<char*>(meta), sizeof(meta)))
        throw std::runtime_error("heatmap read: truncated header in " + path);
    Heatmap hm;
    hm.width = static_cast<int>(meta[0]);
    hm.height = static_cast<int>(meta[1]);
    hm.class_index = static_cast<int>(meta[2]);
    hm.values.resize(static_cast<size_t>(hm.width) * hm.height);
    if (!is.read(reinterpret_cast<char*>(hm.values.data()),
                 static_cast<std::streamsize>(hm.values.size() * 4)))
        throw std::runtime_error("heatmap read: truncated payload in " + path);
    return hm;
}

// Normalized map as 8-bit grayscale, value*255 rounded half up.
inline void write_heatmap_png(const Heatmap& hm, const std::string& path) {
    Heatmap norm = hm;
    if (!norm.normalized) normalize_heatmap(norm);
    RawImage img;
    img.width = norm.width;
    img.height = norm.height;
    img.channels = 1;
    img.data.resize(norm.values.size());
    for (size_t i = 0; i < norm.values.size(); ++i)
        img.data[i] = static_cast<uint8_t>(std::floor(norm.values[i] * 255.0f + 0.5f));
    write_png(img, path);
}

// Blue->green->red colormap blended onto the source image.
inline void write_overlay_png(const Heatmap& hm, const RawImage& source, const std::string& path,
                              float alpha = 0.5f) {
    check(hm.width == source.width && hm.height == source.height,
          "overlay: heatmap and image dimensions differ");
    Heatmap norm = hm;
    if (!norm.normalized) normalize_heatmap(norm);
    RawImage out;
    out.width = source.width;
    out.height = source.height;
    out.channels = 3;
    out.data.resize(static_cast<size_t>(out.width) * out.height * 3);
    for (int y = 0; y < out.height; ++y)
        for (int x = 0; x < out.width; ++x) {
            const float v = norm.at(y, x);
            const float r = std::clamp(2.0f * v - 1.0f, 0.0f, 1.0f) * 255.0f +
                            std::clamp(2.0f * v, 0.0f, 1.0f) * 0.0f;
            const float g = (1.0f - std::abs(2.0f * v - 1.0f)) * 255.0f;
            const float b = std::clamp(1.0f - 2.0f * v, 0.0f, 1.0f) * 255.0f;
            const float heat[3] = {r, g, b};
            for (int c = 0; c < 3; ++c) {
                const uint8_t src = source.at(y, x, source.channels == 3 ? c : 0);
                out.at(y, x, c) = static_cast<uint8_t>(
                    std::lround((1.0f - alpha) * src + alpha * heat[c]));
            }
        }
    write_png(out, path);
}

// ---- proposal records ----
// One line per proposal:
//   <image id> <score> <min_x> <min_y> <max_x> <max_y> <area> <rle>
// where rle is comma-separated start:length runs over y*width+x indices,
// preceded by the mask width as "w<width>".

inline std::string encode_proposal(const std::string& image_id, const RegionProposal& p,
                                   int width) {
    std::ostringstream os;
    os << image_id << " " << p.score << " " << p.bbox.min_x << " " << p.bbox.min_y << " "
       << p.bbox.max_x << " " << p.bbox.max_y << " " << p.area << " w" << width;
    size_t i = 0;
    while (i < p.pixels.size()) {
        size_t j = i;
        while (j + 1 < p.pixels.size() && p.pixels[j + 1] == p.pixels[j] + 1) ++j;
        os << "," << p.pixels[i] << ":" << (j - i + 1);
        i = j + 1;
    }
    return os.str();
}

struct DecodedProposal {
    std::string image_id;
    RegionProposal proposal;
    int width = 0;
};

inline DecodedProposal decode_proposal(const std::string& line) {
    std::istringstream is(line);
    DecodedProposal out;
    std::string rle;
    check(bool(is >> out.image_id >> out.proposal.score >> out.proposal.bbox.min_x >>
               out.proposal.bbox.min_y >> out.proposal.bbox.max_x >> out.proposal.bbox.max_y >>
               out.proposal.area >> rle),
          "proposal decode: malformed line: " + line);
    check(rle.size() > 1 && rle[0] == 'w', "proposal decode: missing width field");
    std::istringstream rs(rle.substr(1));
    std::string tok;
    bool first = true;
    while (std::getline(rs, tok, ',')) {
        if (first) {
            out.width = std::stoi(tok);
            first = false;
            continue;
        }
        const auto colon = tok.find(':');
        check(colon != std::string::npos, "proposal decode: malformed run " + tok);
        const uint32_t start = static_cast<uint32_t>(std::stoul(tok.substr(0, colon)));
        const uint32_t len = static_cast<uint32_t>(std::stoul(tok.substr(colon + 1)));
        for (uint32_t k = 0; k < len; ++k) out.proposal.pixels.push_back(start + k);
    }
    check(static_cast<int>(out.proposal.pixels.size()) == out.proposal.area,
          "proposal decode: area does not match pixel count");
    return out;
}

}  // namespace camloc
