#include "tracking/midi_writer.hpp"

#include <algorithm>
#include <cmath>

#include "common/binary_io.hpp"

namespace nmp::tracking {

namespace {

struct MidiEvent {
    std::uint32_t tick;
    bool on;
    std::uint8_t pitch;
    std::uint8_t velocity;
};

void writeVarLen(ByteWriter& w, std::uint32_t v)
{
    std::uint8_t buf[5];
    int n = 0;
    buf[n++] = v & 0x7f;
    while (v >>= 7)
        buf[n++] = std::uint8_t(0x80 | (v & 0x7f));
    while (n > 0)
        w.u8(buf[--n]);
}

std::uint32_t toTicks(double seconds)
{
    const double ticksPerSecond = kMidiTicksPerQuarter * 1e6 / kMidiTempoUs;
    return std::uint32_t(std::max(0.0, std::round(seconds * ticksPerSecond)));
}

} // namespace

std::vector<std::uint8_t> encodeMidi(const std::vector<NoteEvent>& notes)
{
    std::vector<MidiEvent> events;
    for (const NoteEvent& n : notes) {
        const auto pitch = std::uint8_t(std::clamp(n.pitch_midi, 0, 127));
        const auto velocity = std::uint8_t(std::clamp(int(std::lround(n.amplitude * 127.0)), 1, 127));
        const std::uint32_t on = toTicks(n.onset_s);
        const std::uint32_t off = std::max(toTicks(n.offset_s), on + 1);
        events.push_back({on, true, pitch, velocity});
        events.push_back({off, false, pitch, 0});
    }
    // Note-offs sort before note-ons on the same tick so repeated pitches retrigger.
    std::stable_sort(events.begin(), events.end(), [](const MidiEvent& a, const MidiEvent& b) {
        if (a.tick != b.tick)
            return a.tick < b.tick;
        return !a.on && b.on;
    });

    ByteWriter track;
    writeVarLen(track, 0);
    track.bytes(std::vector<std::uint8_t>{0xff, 0x51, 0x03});
    track.u8(std::uint8_t(kMidiTempoUs >> 16));
    track.u8(std::uint8_t(kMidiTempoUs >> 8));
    track.u8(std::uint8_t(kMidiTempoUs));
    std::uint32_t now = 0;
    for (const MidiEvent& e : events) {
        writeVarLen(track, e.tick - now);
        now = e.tick;
        track.u8(e.on ? 0x90 : 0x80);
        track.u8(e.pitch);
        track.u8(e.on ? e.velocity : 0x40);
    }
    writeVarLen(track, 0);
    track.bytes(std::vector<std::uint8_t>{0xff, 0x2f, 0x00});

    ByteWriter file;
    file.text("MThd");
    file.u32be(6);
    file.u16be(0);
    file.u16be(1);
    file.u16be(kMidiTicksPerQuarter);
    file.text("MTrk");
    file.u32be(std::uint32_t(track.buffer().size()));
    file.bytes(track.buffer());
    return std::move(file.buffer());
}

void writeMidi(const std::filesystem::path& path, const std::vector<NoteEvent>& notes)
{
    writeFileAtomic(path, encodeMidi(notes));
}

} // namespace nmp::tracking
