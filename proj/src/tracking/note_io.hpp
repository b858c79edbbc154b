#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "tracking/note_event.hpp"

namespace nmp::tracking {

// Note CSV: one `onset_s,offset_s,pitch_midi,amplitude` line per event.
// The reader accepts an optional header line and blank lines; errors name
// `source` and the line number.
std::string formatNotesCsv(const std::vector<NoteEvent>& notes);
std::vector<NoteEvent> parseNotesCsv(std::string_view text, const std::string& source = "<memory>");
std::vector<NoteEvent> readNotesCsv(const std::filesystem::path& path);
void writeNotesCsv(const std::filesystem::path& path, const std::vector<NoteEvent>& notes);

// Multipitch CSV: one `time_s,frequency_hz,salience` line per estimate.
std::string formatPitchCsv(const PitchTrack& track);
void writePitchCsv(const std::filesystem::path& path, const PitchTrack& track);

} // namespace nmp::tracking
