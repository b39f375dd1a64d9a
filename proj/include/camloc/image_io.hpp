#pragma once

#include <png.h>

#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "camloc/tensor.hpp"

namespace camloc {

// 8-bit interleaved image, 1 (gray) or 3 (rgb) channels.
struct RawImage {
    int width = 0, height = 0, channels = 1;
    std::vector<uint8_t> data;
    std::string id;

    uint8_t& at(int y, int x, int c = 0) {
        return data[(static_cast<size_t>(y) * width + x) * channels + c];
    }
    uint8_t at(int y, int x, int c = 0) const {
        return data[(static_cast<size_t>(y) * width + x) * channels + c];
    }
};

namespace detail {
struct FileCloser {
    void operator()(std::FILE* f) const { if (f) std::fclose(f); }
};
}  // namespace detail

inline void write_png(const RawImage& img, const std::string& path) {
    check(img.channels == 1 || img.channels == 3, "png write: 1 or 3 channels only");
    std::unique_ptr<std::FILE, detail::FileCloser> fp(std::fopen(path.c_str(), "wb"));
    if (!fp) throw std::runtime_error("png write: cannot open " + path);
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png_create_info_struct(png);
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw std::runtime_error("png write: libpng failure for " + path);
    }
    png_init_io(png, fp.get());
    png_set_IHDR(png, info, static_cast<png_uint_32>(img.width),
                 static_cast<png_uint_32>(img.height), 8,
                 img.channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    const size_t stride = static_cast<size_t>(img.width) * img.channels;
    for (int y = 0; y < img.height; ++y)
        png_write_row(png, const_cast<png_bytep>(img.data.data() + y * stride));
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

inline RawImage read_png(const std::string& path) {
    std::unique_ptr<std::FILE, detail::FileCloser> fp(std::fopen(path.c_str(), "rb"));
    if (!fp) throw std::runtime_error("png read: cannot open " + path);
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png_create_info_struct(png);
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw std::runtime_error("png read: libpng failure for " + path);
    }
    png_init_io(png, fp.get());
    png_read_info(png, info);

    png_set_strip_16(png);
    png_set_packing(png);
    png_set_strip_alpha(png);
    if (png_get_color_type(png, info) == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (png_get_color_type(png, info) == PNG_COLOR_TYPE_GRAY &&
        png_get_bit_depth(png, info) < 8)
        png_set_expand_gray_1_2_4_to_8(png);
    png_read_update_info(png, info);

    RawImage img;
    img.width = static_cast<int>(png_get_image_width(png, info));
    img.height = static_cast<int>(png_get_image_height(png, info));
    img.channels = static_cast<int>(png_get_channels(png, info));
    check(img.channels == 1 || img.channels == 3, "png read: unsupported channel count");
    img.data.resize(static_cast<size_t>(img.width) * img.height * img.channels);
    const size_t stride = static_cast<size_t>(img.width) * img.channels;
    for (int y = 0; y < img.height; ++y) png_read_row(png, img.data.data() + y * stride, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return img;
}

// Binary PPM/PGM (P5 grayscale, P6 rgb).
inline void write_ppm(const RawImage& img, const std::string& path) {
    check(img.channels == 1 || img.channels == 3, "ppm write: 1 or 3 channels only");
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("ppm write: cannot open " + path);
    os << (img.channels == 1 ? "P5" : "P6") << "\n" << img.width << " " << img.height << "\n255\n";
    os.write(reinterpret_cast<const char*>(img.data.data()),
             static_cast<std::streamsize>(img.data.size()));
}

inline RawImage read_ppm(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("ppm read: cannot open " + path);
    std::string magic;
    is >> magic;
    check(magic == "P5" || magic == "P6", "ppm read: unsupported magic " + magic);
    RawImage img;
    int maxval = 0;
    is >> img.width >> img.height >> maxval;
    check(maxval == 255, "ppm read: only 8-bit samples supported");
    is.get();  // single whitespace after header
    img.channels = magic == "P5" ? 1 : 3;
    img.data.resize(static_cast<size_t>(img.width) * img.height * img.channels);
    if (!is.read(reinterpret_cast<char*>(img.data.data()),
                 static_cast<std::streamsize>(img.data.size())))
        throw std::runtime_error("ppm read: truncated payload in " + path);
    return img;
}

inline RawImage read_image(const std::string& path) {
    const auto dot = path.find_last_of('.');
    const std::string ext = dot == std::string::npos ? "" : path.substr(dot);
    if (ext == ".ppm" || ext == ".pgm") return read_ppm(path);
    return read_png(path);
}

}  // namespace camloc
