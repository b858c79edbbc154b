#include "nn/weights.hpp"

#include <algorithm>
#include <bit>
#include <cstring>

#include "common/binary_io.hpp"
#include "common/errors.hpp"

namespace nmp::nn {
namespace {

constexpr char kMagic[4] = {'N', 'M', 'P', 'W'};
constexpr std::uint8_t kDtypeF32 = 0;

} // namespace

std::size_t WeightEntry::elementCount() const
{
    std::size_t n = 1;
    for (auto d : shape)
        n *= d;
    return n;
}

void WeightArchive::add(WeightEntry entry)
{
    if (entry.name.empty() || entry.name.size() > 0xffff)
        throw FormatError("name", "entry names must be 1..65535 bytes");
    if (find(entry.name))
        throw FormatError("name", "duplicate entry '" + entry.name + "'");
    if (entry.shape.size() > 0xff)
        throw FormatError("ndim", "too many dimensions in '" + entry.name + "'");
    if (entry.values.size() != entry.elementCount())
        throw FormatError("payload length", "'" + entry.name + "' has " + std::to_string(entry.values.size())
                                                + " values for " + std::to_string(entry.elementCount()) + " elements");
    mEntries.push_back(std::move(entry));
}

void WeightArchive::add(std::string name, std::vector<std::uint32_t> shape, std::vector<float> values)
{
    add(WeightEntry{std::move(name), std::move(shape), std::move(values)});
}

const WeightEntry* WeightArchive::find(const std::string& name) const
{
    auto it = std::find_if(mEntries.begin(), mEntries.end(), [&](const WeightEntry& e) { return e.name == name; });
    return it == mEntries.end() ? nullptr : &*it;
}

const WeightEntry& WeightArchive::at(const std::string& name) const
{
    if (const auto* e = find(name))
        return *e;
    throw FormatError("entry", "missing '" + name + "'");
}

std::vector<std::uint8_t> WeightArchive::serialize() const
{
    ByteWriter w;
    w.text(std::string_view(kMagic, 4));
    w.u32(kVersion);
    w.u32(static_cast<std::uint32_t>(mEntries.size()));
    for (const auto& e : mEntries) {
        if (e.values.size() != e.elementCount())
            throw FormatError("payload length", "'" + e.name + "' does not fill its shape");
        w.u16(static_cast<std::uint16_t>(e.name.size()));
        w.text(e.name);
        w.u8(kDtypeF32);
        w.u8(static_cast<std::uint8_t>(e.shape.size()));
        for (auto d : e.shape)
            w.u32(d);
        for (float v : e.values)
            w.f32(v);
    }
    return std::move(w.buffer());
}

WeightArchive WeightArchive::parse(std::span<const std::uint8_t> bytes)
{
    ByteReader r(bytes);
    auto magic = r.bytes(4, "magic");
    if (std::memcmp(magic.data(), kMagic, 4) != 0)
        throw FormatError("magic", "not an NMPW file");
    const auto version = r.u32("version");
    if (version != kVersion)
        throw FormatError("version", "unsupported version " + std::to_string(version));
    const auto count = r.u32("entry count");

    WeightArchive archive;
    for (std::uint32_t i = 0; i < count; ++i) {
        WeightEntry e;
        const auto nameLen = r.u16("name length");
        auto name = r.bytes(nameLen, "name");
        e.name.assign(name.begin(), name.end());
        const auto dtype = r.u8("dtype");
        if (dtype != kDtypeF32)
            throw FormatError("dtype", "unsupported dtype code " + std::to_string(dtype) + " in '" + e.name + "'");
        const auto ndim = r.u8("ndim");
        for (std::uint8_t d = 0; d < ndim; ++d)
            e.shape.push_back(r.u32("dims"));
        const std::uint64_t count64 = [&] {
            std::uint64_t n = 1;
            for (auto d : e.shape)
                n *= d;
            return n;
        }();
        if (count64 * 4 > r.remaining())
            throw FormatError("payload length", "'" + e.name + "' needs " + std::to_string(count64 * 4)
                                                    + " bytes, " + std::to_string(r.remaining()) + " remain");
        auto payload = r.bytes(std::size_t(count64) * 4, "payload length");
        e.values.resize(std::size_t(count64));
        for (std::size_t k = 0; k < e.values.size(); ++k)
            e.values[k] = floatFromLE(payload.data() + 4 * k);
        archive.add(std::move(e));
    }
    if (r.remaining() != 0)
        throw FormatError("trailing data", std::to_string(r.remaining()) + " unexpected bytes after last entry");
    return archive;
}

void saveWeights(const WeightArchive& archive, const std::filesystem::path& path)
{
    writeFileAtomic(path, archive.serialize());
}

WeightArchive loadWeights(const std::filesystem::path& path)
{
    return WeightArchive::parse(readFile(path));
}

} // namespace nmp::nn
