#include "plot/png.hpp"

#include <png.h>

#include <string>

#include "common/binary_io.hpp"
#include "common/errors.hpp"

namespace nmp::plot {

Image::Image(std::size_t w, std::size_t h, Rgb fill)
    : width(w)
    , height(h)
    , rgb(w * h * 3)
{
    for (std::size_t i = 0; i < w * h; ++i) {
        rgb[3 * i] = fill.r;
        rgb[3 * i + 1] = fill.g;
        rgb[3 * i + 2] = fill.b;
    }
}

Rgb Image::get(std::size_t x, std::size_t y) const
{
    const std::size_t i = 3 * (y * width + x);
    return {rgb[i], rgb[i + 1], rgb[i + 2]};
}

void Image::set(std::size_t x, std::size_t y, Rgb c)
{
    const std::size_t i = 3 * (y * width + x);
    rgb[i] = c.r;
    rgb[i + 1] = c.g;
    rgb[i + 2] = c.b;
}

Image Image::scaled(std::size_t factor) const
{
    if (factor <= 1)
        return *this;
    Image out(width * factor, height * factor);
    for (std::size_t y = 0; y < out.height; ++y)
        for (std::size_t x = 0; x < out.width; ++x)
            out.set(x, y, get(x / factor, y / factor));
    return out;
}

std::vector<std::uint8_t> encodePng(const Image& img)
{
    if (img.width == 0 || img.height == 0)
        throw ContractError("png: empty image");
    png_image desc{};
    desc.version = PNG_IMAGE_VERSION;
    desc.width = png_uint_32(img.width);
    desc.height = png_uint_32(img.height);
    desc.format = PNG_FORMAT_RGB;
    png_alloc_size_t size = 0;
    if (!png_image_write_to_memory(&desc, nullptr, &size, 0, img.rgb.data(), 0, nullptr))
        throw Error(std::string("png: ") + desc.message);
    std::vector<std::uint8_t> out(size);
    if (!png_image_write_to_memory(&desc, out.data(), &size, 0, img.rgb.data(), 0, nullptr))
        throw Error(std::string("png: ") + desc.message);
    out.resize(size);
    return out;
}

void writePng(const std::filesystem::path& path, const Image& img)
{
    writeFileAtomic(path, encodePng(img));
}

} // namespace nmp::plot
