#include "audio/wav.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

#include "common/binary_io.hpp"
#include "common/errors.hpp"

namespace nmp::audio {
namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

struct FmtChunk {
    std::uint16_t format = 0;
    std::uint16_t channels = 0;
    std::uint32_t sample_rate = 0;
    std::uint16_t block_align = 0;
    std::uint16_t bits = 0;
};

FmtChunk parseFmt(std::span<const std::uint8_t> body)
{
    ByteReader r(body);
    FmtChunk fmt;
    fmt.format = r.u16("fmt format");
    fmt.channels = r.u16("fmt channels");
    fmt.sample_rate = r.u32("fmt sample rate");
    r.u32("fmt byte rate");
    fmt.block_align = r.u16("fmt block align");
    fmt.bits = r.u16("fmt bits per sample");
    if (fmt.format == kFormatExtensible) {
        r.u16("fmt extension size");
        r.u16("fmt valid bits");
        r.u32("fmt channel mask");
        // First two bytes of the subformat GUID carry the plain format code.
        fmt.format = r.u16("fmt subformat");
    }
    return fmt;
}

double decodeSample(const std::uint8_t* p, const FmtChunk& fmt)
{
    switch (fmt.bits) {
    case 16: {
        auto v = static_cast<std::int16_t>(p[0] | (p[1] << 8));
        return v / 32768.0;
    }
    case 24: {
        std::int32_t v = p[0] | (p[1] << 8) | (p[2] << 16);
        if (v & 0x800000)
            v -= 0x1000000;
        return v / 8388608.0;
    }
    default:
        return floatFromLE(p);
    }
}

} // namespace

AudioBuffer decodeWav(std::span<const std::uint8_t> bytes)
{
    ByteReader r(bytes);
    auto riff = r.bytes(4, "RIFF header");
    if (!std::equal(riff.begin(), riff.end(), "RIFF"))
        throw FormatError("RIFF header", "missing RIFF magic");
    r.u32("RIFF size");
    auto wave = r.bytes(4, "WAVE header");
    if (!std::equal(wave.begin(), wave.end(), "WAVE"))
        throw FormatError("WAVE header", "missing WAVE tag");

    std::optional<FmtChunk> fmt;
    std::span<const std::uint8_t> data;
    bool haveData = false;
    while (r.remaining() >= 8 && !haveData) {
        auto id = r.bytes(4, "chunk id");
        const std::uint32_t size = r.u32("chunk size");
        const std::string tag(id.begin(), id.end());
        if (tag == "fmt ") {
            fmt = parseFmt(r.bytes(size, "fmt chunk"));
        } else if (tag == "data") {
            // Streamed writers sometimes leave the size unpatched; take what is there.
            data = r.bytes(std::min<std::size_t>(size, r.remaining()), "data chunk");
            haveData = true;
        } else {
            r.skip(std::min<std::size_t>(size, r.remaining()), "chunk body");
        }
        if (size % 2 == 1 && r.remaining() > 0 && !haveData)
            r.skip(1, "chunk padding");
    }
    if (!fmt)
        throw FormatError("fmt chunk", "missing");
    if (!haveData)
        throw FormatError("data chunk", "missing");

    const bool pcm = fmt->format == kFormatPcm && (fmt->bits == 16 || fmt->bits == 24);
    const bool flt = fmt->format == kFormatFloat && fmt->bits == 32;
    if (!pcm && !flt)
        throw UnsupportedFormatError("unsupported WAV encoding: format code " + std::to_string(fmt->format) + ", "
                                     + std::to_string(fmt->bits) + " bits");
    if (fmt->channels < 1 || fmt->channels > 8)
        throw UnsupportedFormatError("unsupported channel count " + std::to_string(fmt->channels));
    if (fmt->sample_rate == 0)
        throw FormatError("fmt sample rate", "zero");
    const std::size_t sampleBytes = fmt->bits / 8;
    const std::size_t frameBytes = sampleBytes * fmt->channels;
    if (fmt->block_align != frameBytes)
        throw FormatError("fmt block align", "expected " + std::to_string(frameBytes));

    const std::size_t frames = data.size() / frameBytes;
    AudioBuffer out;
    out.sample_rate = static_cast<int>(fmt->sample_rate);
    out.samples.resize(frames);
    const double inv = 1.0 / fmt->channels;
    for (std::size_t i = 0; i < frames; ++i) {
        const std::uint8_t* frame = data.data() + i * frameBytes;
        double acc = decodeSample(frame, *fmt);
        for (std::size_t c = 1; c < fmt->channels; ++c)
            acc += decodeSample(frame + c * sampleBytes, *fmt);
        const double v = fmt->channels == 1 ? acc : acc * inv;
        if (!std::isfinite(v))
            throw FormatError("data chunk", "non-finite sample at frame " + std::to_string(i));
        out.samples[i] = v;
    }
    return out;
}

AudioBuffer loadWav(const std::filesystem::path& path)
{
    return decodeWav(readFile(path));
}

std::vector<std::uint8_t> encodeWav(const AudioBuffer& buf, WavEncoding encoding)
{
    const std::uint16_t bits = encoding == WavEncoding::Pcm16 ? 16 : encoding == WavEncoding::Pcm24 ? 24 : 32;
    const std::uint16_t format = encoding == WavEncoding::Float32 ? kFormatFloat : kFormatPcm;
    const std::uint32_t bytesPerSample = bits / 8;
    const auto dataBytes = static_cast<std::uint32_t>(buf.samples.size() * bytesPerSample);

    ByteWriter w;
    w.text("RIFF");
    w.u32(36 + dataBytes);
    w.text("WAVE");
    w.text("fmt ");
    w.u32(16);
    w.u16(format);
    w.u16(1);
    w.u32(static_cast<std::uint32_t>(buf.sample_rate));
    w.u32(static_cast<std::uint32_t>(buf.sample_rate) * bytesPerSample);
    w.u16(static_cast<std::uint16_t>(bytesPerSample));
    w.u16(bits);
    w.text("data");
    w.u32(dataBytes);
    w.buffer().reserve(w.buffer().size() + dataBytes);
    for (double s : buf.samples) {
        const double c = std::clamp(s, -1.0, 1.0);
        switch (encoding) {
        case WavEncoding::Pcm16:
            w.u16(static_cast<std::uint16_t>(static_cast<std::int16_t>(std::lround(std::clamp(c * 32768.0, -32768.0, 32767.0)))));
            break;
        case WavEncoding::Pcm24: {
            auto v = static_cast<std::int32_t>(std::lround(std::clamp(c * 8388608.0, -8388608.0, 8388607.0)));
            auto u = static_cast<std::uint32_t>(v);
            w.u8(u & 0xff);
            w.u8((u >> 8) & 0xff);
            w.u8((u >> 16) & 0xff);
            break;
        }
        case WavEncoding::Float32:
            w.f32(static_cast<float>(s));
            break;
        }
    }
    return std::move(w.buffer());
}

void saveWav(const std::filesystem::path& path, const AudioBuffer& buf, WavEncoding encoding)
{
    writeFileAtomic(path, encodeWav(buf, encoding));
}

} // namespace nmp::audio
