#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

namespace nmp::plot {

struct Rgb {
    std::uint8_t r = 0, g = 0, b = 0;
    bool operator==(const Rgb&) const = default;
};

struct Image {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<std::uint8_t> rgb; // row-major, 3 bytes per pixel

    Image() = default;
    Image(std::size_t w, std::size_t h, Rgb fill = {});

    Rgb get(std::size_t x, std::size_t y) const;
    void set(std::size_t x, std::size_t y, Rgb c);
    Image scaled(std::size_t factor) const;
};

// 8-bit RGB PNG. Encoding is deterministic for a given image.
std::vector<std::uint8_t> encodePng(const Image& img);
void writePng(const std::filesystem::path& path, const Image& img);

} // namespace nmp::plot
