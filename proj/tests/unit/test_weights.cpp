#include <doctest.h>

#include <cstring>

#include "common/errors.hpp"
#include "nn/weights.hpp"
#include "support/test_support.hpp"

using namespace nmp;
using namespace nmp::nn;
using nmp::test::Bytes;

namespace {

std::uint32_t floatBits(float f)
{
    std::uint32_t u;
    std::memcpy(&u, &f, 4);
    return u;
}

WeightArchive sample()
{
    WeightArchive a;
    a.add("conv.w", {2, 1, 1, 3}, {1, 2, 3, 4, 5, 6});
    a.add("bias", {2}, {-0.5f, 0.25f});
    a.add("scalarish", {}, {7.0f});
    return a;
}

} // namespace

TEST_CASE("archive bytes follow the documented layout")
{
    WeightArchive a;
    a.add("ab", {2, 1}, {1.5f, -2.0f});
    Bytes want;
    want.tag("NMPW").u32(1).u32(1).u16(2).u8('a').u8('b').u8(0).u8(2).u32(2).u32(1);
    want.u32(floatBits(1.5f)).u32(floatBits(-2.0f));
    CHECK(a.serialize() == want.data);
}

TEST_CASE("serialize parse serialize is byte identical")
{
    const auto bytes = sample().serialize();
    const WeightArchive back = WeightArchive::parse(bytes);
    CHECK(back.serialize() == bytes);
    REQUIRE(back.size() == 3);
    CHECK(back.entries()[0].name == "conv.w");
    CHECK(back.at("bias").values == std::vector<float>{-0.5f, 0.25f});
    CHECK(back.at("scalarish").shape.empty());
    CHECK(back.find("missing") == nullptr);
    CHECK_THROWS_AS(back.at("missing"), FormatError);

    nmp::test::TempDir dir;
    saveWeights(sample(), dir / "w.nmpw");
    CHECK(nmp::test::readBytes(dir / "w.nmpw") == bytes);
    CHECK(loadWeights(dir / "w.nmpw").serialize() == bytes);
    CHECK_THROWS_AS(loadWeights(dir / "absent.nmpw"), IoError);
}

TEST_CASE("archive construction rejects bad entries")
{
    WeightArchive a;
    a.add("x", {2}, {1, 2});
    CHECK_THROWS_AS(a.add("x", {1}, {1}), FormatError);
    CHECK_THROWS_AS(a.add("y", {3}, {1, 2}), FormatError);
    CHECK_THROWS_AS(a.add("", {1}, {1}), FormatError);
}

TEST_CASE("malformed archives name the offending field")
{
    const auto good = sample().serialize();
    auto fieldOf = [](std::vector<std::uint8_t> bytes) {
        try {
            WeightArchive::parse(bytes);
        } catch (const FormatError& e) {
            return e.field();
        }
        return std::string("none");
    };
    auto bad = good;
    bad[0] = 'X';
    CHECK(fieldOf(bad) == "magic");
    bad = good;
    bad[4] = 2;
    CHECK(fieldOf(bad) == "version");
    bad = good;
    bad[12 + 2 + 6] = 1; // dtype of the first entry
    CHECK(fieldOf(bad) == "dtype");
    bad = good;
    bad.push_back(0);
    CHECK(fieldOf(bad) == "trailing data");
    bad = good;
    bad.resize(bad.size() - 1);
    CHECK(fieldOf(bad) != "none");
    CHECK(fieldOf(std::vector<std::uint8_t>(good.begin(), good.begin() + 6)) != "none");
}
