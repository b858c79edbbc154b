#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "audio/audio_buffer.hpp"

namespace nmp::audio {

enum class WavEncoding { Pcm16, Pcm24, Float32 };

// Decodes a RIFF/WAVE container holding 16/24-bit PCM or 32-bit IEEE float
// with 1..8 channels. Channels are averaged to mono and integer samples are
// scaled by 2^-(bits-1). Unknown chunks are skipped.
AudioBuffer decodeWav(std::span<const std::uint8_t> bytes);
AudioBuffer loadWav(const std::filesystem::path& path);

// Mono writer, used for fixtures and the efficiency harness.
std::vector<std::uint8_t> encodeWav(const AudioBuffer& buf, WavEncoding encoding = WavEncoding::Float32);
void saveWav(const std::filesystem::path& path, const AudioBuffer& buf, WavEncoding encoding = WavEncoding::Float32);

} // namespace nmp::audio
