#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "acap/error.hpp"

namespace acap {

struct AudioClip {
    std::vector<double> samples;  // mono, in [-1, 1]
    std::uint32_t sample_rate = 0;

    double duration_seconds() const {
        return sample_rate ? static_cast<double>(samples.size()) / sample_rate : 0.0;
    }
};

namespace detail {

inline std::uint16_t read_u16le(const unsigned char* p) {
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

inline std::uint32_t read_u32le(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

}  // namespace detail

// Linear-PCM 16-bit WAV reader. Samples are scaled by 1/32768 (so -32768
// maps to exactly -1.0) and multi-channel data is averaged to mono.
inline AudioClip read_wav(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FileNotFoundError("cannot open WAV file: " + path);
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                     std::istreambuf_iterator<char>());
    if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
        std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
        throw FormatError("not a RIFF/WAVE file: " + path);
    }

    std::uint16_t format = 0, channels = 0, bits = 0;
    std::uint32_t sample_rate = 0;
    const unsigned char* data = nullptr;
    std::uint32_t data_len = 0;
    bool have_fmt = false;

    std::size_t pos = 12;
    while (pos + 8 <= bytes.size()) {
        const char* id = reinterpret_cast<const char*>(bytes.data() + pos);
        const std::uint32_t len = detail::read_u32le(bytes.data() + pos + 4);
        const std::size_t body = pos + 8;
        if (body + len > bytes.size()) break;
        if (std::memcmp(id, "fmt ", 4) == 0 && len >= 16) {
            format = detail::read_u16le(bytes.data() + body);
            channels = detail::read_u16le(bytes.data() + body + 2);
            sample_rate = detail::read_u32le(bytes.data() + body + 4);
            bits = detail::read_u16le(bytes.data() + body + 14);
            have_fmt = true;
        } else if (std::memcmp(id, "data", 4) == 0) {
            data = bytes.data() + body;
            data_len = len;
        }
        pos = body + len + (len & 1);  // chunks are word-aligned
    }

    if (!have_fmt) throw FormatError("WAV file has no fmt chunk: " + path);
    if (format != 1 || bits != 16) {
        throw FormatError("unsupported WAV encoding (want 16-bit linear PCM): " + path);
    }
    if (channels == 0) throw FormatError("WAV file declares zero channels: " + path);
    if (data == nullptr || data_len < 2 * channels) {
        throw EmptyDataError("WAV file has no sample data: " + path);
    }

    const std::size_t frames = data_len / (2 * channels);
    AudioClip clip;
    clip.sample_rate = sample_rate;
    clip.samples.resize(frames);
    for (std::size_t f = 0; f < frames; ++f) {
        double acc = 0.0;
        for (std::size_t c = 0; c < channels; ++c) {
            const unsigned char* p = data + 2 * (f * channels + c);
            const std::int16_t s = static_cast<std::int16_t>(p[0] | (p[1] << 8));
            acc += static_cast<double>(s) / 32768.0;
        }
        clip.samples[f] = acc / channels;
    }
    return clip;
}

}  // namespace acap
