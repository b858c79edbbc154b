#include "tracking/note_io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <span>

#include "common/binary_io.hpp"
#include "common/errors.hpp"

namespace nmp::tracking {

namespace {

std::string_view trim(std::string_view s)
{
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t'))
        s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> splitFields(std::string_view line)
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        out.push_back(trim(line.substr(start, comma - start)));
        if (comma == std::string_view::npos)
            break;
        start = comma + 1;
    }
    return out;
}

template <typename T>
bool parseNumber(std::string_view s, T& out)
{
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && ptr == s.data() + s.size();
}

void appendLine(std::string& out, const char* fmt, auto... args)
{
    char line[128];
    const int n = std::snprintf(line, sizeof line, fmt, args...);
    out.append(line, std::size_t(n));
}

void writeText(const std::filesystem::path& path, const std::string& text)
{
    writeFileAtomic(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

} // namespace

std::string formatNotesCsv(const std::vector<NoteEvent>& notes)
{
    std::string out;
    for (const NoteEvent& n : notes)
        appendLine(out, "%.6f,%.6f,%d,%.6f\n", n.onset_s, n.offset_s, n.pitch_midi, n.amplitude);
    return out;
}

std::vector<NoteEvent> parseNotesCsv(std::string_view text, const std::string& source)
{
    std::vector<NoteEvent> notes;
    std::size_t lineNo = 0;
    bool headerAllowed = true;
    while (!text.empty()) {
        const std::size_t nl = text.find('\n');
        const std::string_view raw = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view() : text.substr(nl + 1);
        ++lineNo;
        const std::string_view line = trim(raw);
        if (line.empty())
            continue;

        auto fail = [&](const std::string& why) {
            throw FormatError(source + ":" + std::to_string(lineNo), why);
        };
        const auto fields = splitFields(line);
        if (fields.size() < 3 || fields.size() > 4)
            fail("expected onset_s,offset_s,pitch_midi[,amplitude]");
        NoteEvent n;
        const bool mayBeHeader = headerAllowed;
        headerAllowed = false;
        if (!parseNumber(fields[0], n.onset_s)) {
            // A non-numeric first line is treated as a header.
            if (mayBeHeader)
                continue;
            fail("bad onset '" + std::string(fields[0]) + "'");
        }
        if (!parseNumber(fields[1], n.offset_s))
            fail("bad offset '" + std::string(fields[1]) + "'");
        double pitch = 0.0;
        if (!parseNumber(fields[2], pitch) || pitch != std::round(pitch))
            fail("bad pitch '" + std::string(fields[2]) + "'");
        n.pitch_midi = int(pitch);
        if (fields.size() == 4 && !parseNumber(fields[3], n.amplitude))
            fail("bad amplitude '" + std::string(fields[3]) + "'");
        if (!std::isfinite(n.onset_s) || !std::isfinite(n.offset_s) || n.onset_s < 0.0 || n.offset_s < n.onset_s)
            fail("onset/offset out of order");
        if (n.pitch_midi < 0 || n.pitch_midi > 127)
            fail("pitch outside 0-127");
        notes.push_back(n);
    }
    return notes;
}

std::vector<NoteEvent> readNotesCsv(const std::filesystem::path& path)
{
    const auto bytes = readFile(path);
    return parseNotesCsv(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()),
                         path.string());
}

void writeNotesCsv(const std::filesystem::path& path, const std::vector<NoteEvent>& notes)
{
    writeText(path, formatNotesCsv(notes));
}

std::string formatPitchCsv(const PitchTrack& track)
{
    std::string out;
    for (const auto& frame : track)
        for (const PitchEstimate& e : frame)
            appendLine(out, "%.6f,%.4f,%.6f\n", e.time_s, e.frequency_hz, e.salience);
    return out;
}

void writePitchCsv(const std::filesystem::path& path, const PitchTrack& track)
{
    writeText(path, formatPitchCsv(track));
}

} // namespace nmp::tracking
