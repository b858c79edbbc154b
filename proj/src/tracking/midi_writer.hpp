#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "tracking/note_event.hpp"

namespace nmp::tracking {

constexpr int kMidiTicksPerQuarter = 480;
constexpr int kMidiTempoUs = 500000; // 120 bpm

// Standard MIDI file, format 0, one track on channel 0. Velocity is
// round(amplitude * 127) clamped to 1..127.
std::vector<std::uint8_t> encodeMidi(const std::vector<NoteEvent>& notes);
void writeMidi(const std::filesystem::path& path, const std::vector<NoteEvent>& notes);

} // namespace nmp::tracking
