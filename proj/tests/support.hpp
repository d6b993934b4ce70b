#pragma once

// Shared test scaffolding: temp directories, WAV byte synthesis, toy data.

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "acap/rng.hpp"
#include "acap/tensor.hpp"

namespace testsup {

class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        auto base = std::filesystem::temp_directory_path();
        std::random_device rd;
        for (int attempt = 0; attempt < 64; ++attempt) {
            auto candidate = base / (tag + "-" + std::to_string(rd()));
            std::error_code ec;
            if (std::filesystem::create_directory(candidate, ec)) {
                path_ = candidate;
                return;
            }
        }
        throw std::runtime_error("could not create temp dir for " + tag);
    }

    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }

    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::string file(const std::string& name) const { return (path_ / name).string(); }

private:
    std::filesystem::path path_;
};

inline void put_u16(std::string& out, std::uint16_t x) {
    out.push_back(static_cast<char>(x & 0xFF));
    out.push_back(static_cast<char>((x >> 8) & 0xFF));
}

inline void put_u32(std::string& out, std::uint32_t x) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((x >> (8 * i)) & 0xFF));
}

// Linear-PCM WAV bytes. `samples` is interleaved when channels > 1.
inline std::string wav_bytes(const std::vector<std::int16_t>& samples, std::uint16_t channels,
                             std::uint32_t sample_rate, std::uint16_t format_tag = 1,
                             std::uint16_t bits = 16) {
    std::string data;
    data.reserve(samples.size() * 2);
    for (std::int16_t s : samples) put_u16(data, static_cast<std::uint16_t>(s));

    std::string out = "RIFF";
    put_u32(out, static_cast<std::uint32_t>(4 + 24 + 8 + data.size()));
    out += "WAVEfmt ";
    put_u32(out, 16);
    put_u16(out, format_tag);
    put_u16(out, channels);
    put_u32(out, sample_rate);
    put_u32(out, sample_rate * channels * (bits / 8));
    put_u16(out, static_cast<std::uint16_t>(channels * (bits / 8)));
    put_u16(out, bits);
    out += "data";
    put_u32(out, static_cast<std::uint32_t>(data.size()));
    out += data;
    return out;
}

inline void write_file(const std::string& path, const std::string& bytes) {
    std::ofstream os(path, std::ios::binary);
    os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

inline std::string read_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

inline void write_wav(const std::string& path, const std::vector<std::int16_t>& samples,
                      std::uint16_t channels, std::uint32_t sample_rate) {
    write_file(path, wav_bytes(samples, channels, sample_rate));
}

inline acap::Tensor random_tensor(const std::vector<std::size_t>& shape, acap::SplitMix64& rng,
                                  double lo = -1.0, double hi = 1.0) {
    acap::Tensor t(shape);
    for (double& x : t.v) x = rng.uniform(lo, hi);
    return t;
}

inline std::vector<std::string> words(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream ss(text);
    std::string w;
    while (ss >> w) out.push_back(w);
    return out;
}

}  // namespace testsup
