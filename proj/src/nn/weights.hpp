#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace nmp::nn {

// "NMPW" container: magic, u32 version (1), u32 entry count, then per entry
// u16 name length, UTF-8 name, u8 dtype (0 = f32), u8 ndim, u32 dims[ndim]
// and the little-endian payload. Used for model weights and tensor fixtures.
struct WeightEntry {
    std::string name;
    std::vector<std::uint32_t> shape;
    std::vector<float> values;

    std::size_t elementCount() const;
};

class WeightArchive {
public:
    static constexpr std::uint32_t kVersion = 1;

    // Throws FormatError("name") on duplicates and FormatError("payload length")
    // when values do not fill the shape.
    void add(WeightEntry entry);
    void add(std::string name, std::vector<std::uint32_t> shape, std::vector<float> values);

    const WeightEntry* find(const std::string& name) const;
    const WeightEntry& at(const std::string& name) const;
    const std::vector<WeightEntry>& entries() const { return mEntries; }
    std::size_t size() const { return mEntries.size(); }

    std::vector<std::uint8_t> serialize() const;
    static WeightArchive parse(std::span<const std::uint8_t> bytes);

private:
    std::vector<WeightEntry> mEntries;
};

void saveWeights(const WeightArchive& archive, const std::filesystem::path& path);
WeightArchive loadWeights(const std::filesystem::path& path);

} // namespace nmp::nn
