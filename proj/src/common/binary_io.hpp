#pragma once

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace nmp {

std::vector<std::uint8_t> readFile(const std::filesystem::path& path);

// Writes to a sibling temporary and renames over `path`, so a failed write
// never leaves a partial file behind.
void writeFileAtomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

// Little-endian cursor over a byte buffer. Reads past the end raise a
// FormatError naming `what`.
class ByteReader {
public:
    explicit ByteReader(std::span<const std::uint8_t> bytes) : mBytes(bytes) {}

    std::uint8_t u8(std::string_view what);
    std::uint16_t u16(std::string_view what);
    std::uint32_t u32(std::string_view what);
    std::span<const std::uint8_t> bytes(std::size_t count, std::string_view what);
    void skip(std::size_t count, std::string_view what) { bytes(count, what); }

    std::size_t offset() const { return mOffset; }
    std::size_t remaining() const { return mBytes.size() - mOffset; }

private:
    std::span<const std::uint8_t> mBytes;
    std::size_t mOffset = 0;
};

class ByteWriter {
public:
    void u8(std::uint8_t v) { mBytes.push_back(v); }
    void u16(std::uint16_t v);
    void u32(std::uint32_t v);
    void u16be(std::uint16_t v);
    void u32be(std::uint32_t v);
    void f32(float v);
    void bytes(std::span<const std::uint8_t> b) { mBytes.insert(mBytes.end(), b.begin(), b.end()); }
    void text(std::string_view s) { mBytes.insert(mBytes.end(), s.begin(), s.end()); }

    std::vector<std::uint8_t>& buffer() { return mBytes; }
    const std::vector<std::uint8_t>& buffer() const { return mBytes; }

private:
    std::vector<std::uint8_t> mBytes;
};

inline float floatFromLE(const std::uint8_t* p)
{
    std::uint32_t bits = std::uint32_t(p[0]) | (std::uint32_t(p[1]) << 8) | (std::uint32_t(p[2]) << 16)
        | (std::uint32_t(p[3]) << 24);
    float v;
    std::memcpy(&v, &bits, sizeof v);
    return v;
}

} // namespace nmp
