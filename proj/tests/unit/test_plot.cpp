#include <doctest.h>

#include <png.h>

#include "plot/heatmap.hpp"
#include "plot/png.hpp"
#include "support/test_support.hpp"

using namespace nmp;
using namespace nmp::plot;

namespace {

Image decode(const std::vector<std::uint8_t>& bytes)
{
    png_image img{};
    img.version = PNG_IMAGE_VERSION;
    REQUIRE(png_image_begin_read_from_memory(&img, bytes.data(), bytes.size()));
    img.format = PNG_FORMAT_RGB;
    Image out(img.width, img.height);
    REQUIRE(png_image_finish_read(&img, nullptr, out.rgb.data(), 0, nullptr));
    return out;
}

} // namespace

TEST_CASE("png encoding decodes back to the same pixels")
{
    Image img(7, 5);
    for (std::size_t y = 0; y < 5; ++y)
        for (std::size_t x = 0; x < 7; ++x)
            img.set(x, y, {std::uint8_t(x * 30), std::uint8_t(y * 50), std::uint8_t((x * y) % 256)});
    const auto bytes = encodePng(img);
    const std::uint8_t sig[] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
    REQUIRE(bytes.size() > 8);
    CHECK(std::equal(sig, sig + 8, bytes.begin()));
    const Image back = decode(bytes);
    CHECK(back.width == 7);
    CHECK(back.height == 5);
    CHECK(back.rgb == img.rgb);
    CHECK(encodePng(img) == bytes);

    test::TempDir dir;
    writePng(dir / "a.png", img);
    CHECK(test::readBytes(dir / "a.png") == bytes);
}

TEST_CASE("nearest-neighbour scaling")
{
    Image img(2, 1);
    img.set(0, 0, {1, 2, 3});
    img.set(1, 0, {4, 5, 6});
    const Image s = img.scaled(3);
    CHECK(s.width == 6);
    CHECK(s.height == 3);
    for (std::size_t y = 0; y < 3; ++y)
        for (std::size_t x = 0; x < 6; ++x)
            CHECK(s.get(x, y) == (x < 3 ? Rgb{1, 2, 3} : Rgb{4, 5, 6}));
}

TEST_CASE("colormap is clamped and monotone in brightness")
{
    CHECK(colormap(-1.f) == colormap(0.f));
    CHECK(colormap(2.f) == colormap(1.f));
    CHECK(colormap(0.f) == Rgb{0, 0, 4});
    CHECK(colormap(1.f) == Rgb{252, 253, 191});
    int prev = -1;
    for (int i = 0; i <= 100; ++i) {
        const Rgb c = colormap(float(i) / 100);
        const int sum = c.r + c.g + c.b;
        CHECK(sum >= prev);
        prev = sum;
    }
}

TEST_CASE("heatmap puts the highest bin on top")
{
    std::vector<float> v(3 * 4, 0.f);
    v[1 * 4 + 3] = 1.f;
    const Image img = renderHeatmap(v, 3, 4);
    CHECK(img.width == 3);
    CHECK(img.height == 4);
    CHECK(img.get(1, 0) == colormap(1.f));
    CHECK(img.get(1, 3) == colormap(0.f));
}

TEST_CASE("posterior plot layout and note overlay")
{
    auto p = model::Posteriorgrams::zeros(10);
    p.contours[2 * 264 + 0] = 1.f;
    p.onsets[4 * 88 + 87] = 1.f;
    PlotLayout layout;
    const std::vector<tracking::TrackedNote> notes = {{3, 6, 10, 0.5, true}, {8, 20, 5, 0.5, false}};
    const Image img = renderPosteriorPlot(p, notes, &layout);
    CHECK(img.width == 10);
    CHECK(img.height == 264 + 2 + 88 + 2 + 88);
    CHECK(layout.note_top == 266);
    CHECK(layout.onset_top == 356);
    CHECK(img.get(2, 263) == colormap(1.f));
    CHECK(img.get(4, 356) == colormap(1.f));
    for (std::size_t x = 0; x < 10; ++x) {
        CHECK(img.get(x, 264) == kSeparatorColor);
        CHECK(img.get(x, 355) == kSeparatorColor);
        const Rgb want = (x >= 3 && x < 6) ? kNoteOutlineColor : colormap(0.f);
        CHECK(img.get(x, layout.note_top + 87 - 10) == want);
        CHECK(img.get(x, layout.note_top + 87 - 5) == colormap(0.f));
    }
}
