#include "roomsense/wav.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "roomsense/errors.hpp"

namespace roomsense {
namespace {

uint32_t read_u32(const unsigned char* p) {
    return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
           (static_cast<uint32_t>(p[2]) << 16) | (static_cast<uint32_t>(p[3]) << 24);
}

uint16_t read_u16(const unsigned char* p) {
    return static_cast<uint16_t>(p[0] | (p[1] << 8));
}

void put_u32(std::string& out, uint32_t v) {
    out.push_back(static_cast<char>(v & 0xff));
    out.push_back(static_cast<char>((v >> 8) & 0xff));
    out.push_back(static_cast<char>((v >> 16) & 0xff));
    out.push_back(static_cast<char>((v >> 24) & 0xff));
}

void put_u16(std::string& out, uint16_t v) {
    out.push_back(static_cast<char>(v & 0xff));
    out.push_back(static_cast<char>((v >> 8) & 0xff));
}

} // namespace

AudioClip read_wav(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open WAV file: " + path);
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
    size_t size = bytes.size();

    if (size < 12 || std::memcmp(p, "RIFF", 4) != 0 || std::memcmp(p + 8, "WAVE", 4) != 0)
        throw DataError("not a RIFF/WAVE file: " + path);

    uint16_t channels = 0, bits = 0, format = 0;
    uint32_t sample_rate = 0;
    const unsigned char* data = nullptr;
    uint32_t data_size = 0;

    size_t pos = 12;
    while (pos + 8 <= size) {
        const unsigned char* chunk = p + pos;
        uint32_t chunk_size = read_u32(chunk + 4);
        if (pos + 8 + chunk_size > size)
            throw DataError("truncated WAV chunk in " + path);
        if (std::memcmp(chunk, "fmt ", 4) == 0) {
            if (chunk_size < 16) throw DataError("malformed fmt chunk in " + path);
            format = read_u16(chunk + 8);
            channels = read_u16(chunk + 10);
            sample_rate = read_u32(chunk + 12);
            bits = read_u16(chunk + 22);
        } else if (std::memcmp(chunk, "data", 4) == 0) {
            data = chunk + 8;
            data_size = chunk_size;
        }
        pos += 8 + chunk_size + (chunk_size & 1);
    }

    if (format == 0 || data == nullptr) throw DataError("missing fmt/data chunk in " + path);
    if (format != 1 || bits != 16)
        throw DataError("unsupported WAV encoding (want 16-bit PCM): " + path);
    if (channels != 1 && channels != 2)
        throw DataError("unsupported channel count in " + path);
    if (sample_rate == 0) throw DataError("zero sample rate in " + path);

    size_t frame_bytes = 2u * channels;
    size_t n_frames = data_size / frame_bytes;
    AudioClip clip;
    clip.sample_rate = static_cast<int>(sample_rate);
    clip.samples.resize(n_frames);
    for (size_t i = 0; i < n_frames; ++i) {
        double acc = 0.0;
        for (unsigned c = 0; c < channels; ++c) {
            const unsigned char* s = data + i * frame_bytes + 2 * c;
            int16_t v = static_cast<int16_t>(s[0] | (s[1] << 8));
            acc += static_cast<double>(v) / 32768.0;
        }
        clip.samples[i] = acc / channels;
    }
    return clip;
}

void write_wav(const std::string& path, const AudioClip& clip) {
    if (clip.sample_rate <= 0) throw UsageError("write_wav: sample rate must be positive");
    uint32_t n = static_cast<uint32_t>(clip.samples.size());
    uint32_t data_size = n * 2;

    std::string out;
    out.reserve(44 + data_size);
    out.append("RIFF");
    put_u32(out, 36 + data_size);
    out.append("WAVE");
    out.append("fmt ");
    put_u32(out, 16);
    put_u16(out, 1); // PCM
    put_u16(out, 1); // mono
    put_u32(out, static_cast<uint32_t>(clip.sample_rate));
    put_u32(out, static_cast<uint32_t>(clip.sample_rate) * 2);
    put_u16(out, 2);
    put_u16(out, 16);
    out.append("data");
    put_u32(out, data_size);
    for (double s : clip.samples) {
        double clamped = std::clamp(s, -1.0, 1.0);
        auto q = static_cast<int16_t>(std::lround(clamped * 32767.0));
        put_u16(out, static_cast<uint16_t>(q));
    }

    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw DataError("cannot open for writing: " + path);
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!f) throw DataError("write failed: " + path);
}

} // namespace roomsense
