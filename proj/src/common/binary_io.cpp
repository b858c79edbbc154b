#include "common/binary_io.hpp"

#include <bit>
#include <fstream>
#include <system_error>

#include "common/errors.hpp"

namespace nmp {

std::vector<std::uint8_t> readFile(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open " + path.string());
    in.seekg(0, std::ios::end);
    const auto size = in.tellg();
    if (size < 0)
        throw IoError("cannot read " + path.string());
    in.seekg(0, std::ios::beg);
    std::vector<std::uint8_t> bytes(static_cast<std::size_t>(size));
    if (!bytes.empty() && !in.read(reinterpret_cast<char*>(bytes.data()), size))
        throw IoError("short read on " + path.string());
    return bytes;
}

void writeFileAtomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes)
{
    auto tmp = path;
    tmp += ".partial";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw IoError("cannot write " + path.string());
        out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
        if (!out) {
            out.close();
            std::error_code ec;
            std::filesystem::remove(tmp, ec);
            throw IoError("write failed for " + path.string());
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw IoError("cannot move output into place: " + path.string());
    }
}

std::span<const std::uint8_t> ByteReader::bytes(std::size_t count, std::string_view what)
{
    if (count > remaining())
        throw FormatError(std::string(what), "truncated at offset " + std::to_string(mOffset));
    auto out = mBytes.subspan(mOffset, count);
    mOffset += count;
    return out;
}

std::uint8_t ByteReader::u8(std::string_view what)
{
    return bytes(1, what)[0];
}

std::uint16_t ByteReader::u16(std::string_view what)
{
    auto b = bytes(2, what);
    return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
}

std::uint32_t ByteReader::u32(std::string_view what)
{
    auto b = bytes(4, what);
    return std::uint32_t(b[0]) | (std::uint32_t(b[1]) << 8) | (std::uint32_t(b[2]) << 16) | (std::uint32_t(b[3]) << 24);
}

void ByteWriter::u16(std::uint16_t v)
{
    u8(v & 0xff);
    u8(v >> 8);
}

void ByteWriter::u32(std::uint32_t v)
{
    for (int i = 0; i < 4; ++i)
        u8((v >> (8 * i)) & 0xff);
}

void ByteWriter::u16be(std::uint16_t v)
{
    u8(v >> 8);
    u8(v & 0xff);
}

void ByteWriter::u32be(std::uint32_t v)
{
    for (int i = 3; i >= 0; --i)
        u8((v >> (8 * i)) & 0xff);
}

void ByteWriter::f32(float v)
{
    u32(std::bit_cast<std::uint32_t>(v));
}

} // namespace nmp
