// Copyright (c) 2026 The polykit authors
// SPDX-License-Identifier: Apache-2.0
#include "polykit/image_io.hpp"

#include <fstream>
#include <string>

namespace polykit {

namespace {

void write_pnm(const std::filesystem::path& path, const char* magic, int width, int height,
               const std::vector<std::uint8_t>& payload) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw DataError("cannot open for writing: " + path.string());
    }
    out << magic << "\n" << width << " " << height << "\n255\n";
    out.write(reinterpret_cast<const char*>(payload.data()),
              static_cast<std::streamsize>(payload.size()));
    if (!out) {
        throw DataError("write failed: " + path.string());
    }
}

int next_pnm_int(std::istream& in, const std::filesystem::path& path) {
    // Skips whitespace and '#' comment lines between header tokens.
    int c = in.peek();
    while (c == '#' || std::isspace(c)) {
        if (c == '#') {
            std::string line;
            std::getline(in, line);
        } else {
            in.get();
        }
        c = in.peek();
    }
    int value = 0;
    if (!(in >> value)) {
        throw DataError("malformed PNM header: " + path.string());
    }
    return value;
}

std::vector<std::uint8_t> read_pnm(const std::filesystem::path& path, const char* magic,
                                   int& width, int& height, std::size_t bytes_per_pixel) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError("cannot open: " + path.string());
    }
    std::string tag;
    in >> tag;
    if (tag != magic) {
        throw DataError("unexpected PNM magic '" + tag + "' in " + path.string());
    }
    width = next_pnm_int(in, path);
    height = next_pnm_int(in, path);
    const int maxval = next_pnm_int(in, path);
    if (width <= 0 || height <= 0 || maxval != 255) {
        throw DataError("unsupported PNM geometry in " + path.string());
    }
    in.get();  // single whitespace after maxval
    std::vector<std::uint8_t> payload(static_cast<std::size_t>(width) * height * bytes_per_pixel);
    in.read(reinterpret_cast<char*>(payload.data()), static_cast<std::streamsize>(payload.size()));
    if (in.gcount() != static_cast<std::streamsize>(payload.size())) {
        throw DataError("truncated PNM payload in " + path.string());
    }
    return payload;
}

}  // namespace

void write_pgm(const std::filesystem::path& path, const GrayImage& img) {
    write_pnm(path, "P5", img.width, img.height, img.pixels);
}

GrayImage read_pgm(const std::filesystem::path& path) {
    GrayImage img;
    img.pixels = read_pnm(path, "P5", img.width, img.height, 1);
    return img;
}

void write_ppm(const std::filesystem::path& path, const RgbImage& img) {
    write_pnm(path, "P6", img.width, img.height, img.pixels);
}

RgbImage read_ppm(const std::filesystem::path& path) {
    RgbImage img;
    img.pixels = read_pnm(path, "P6", img.width, img.height, 3);
    return img;
}

}  // namespace polykit
