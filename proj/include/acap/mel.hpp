#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "acap/fft.hpp"
#include "acap/tensor.hpp"
#include "acap/wav.hpp"

namespace acap {

// Conventions, stated because they are choices rather than givens:
//  * centered frames with reflection padding, so T = floor(n / hop) + 1
//  * periodic Hamming window
//  * mel scale 2595 log10(1 + f/700), triangles area-normalized by
//    2 / (band width in Hz)
//  * natural log with additive floor
struct FeatureExtractionConfig {
    std::size_t window_length = 1024;
    std::size_t hop_length = 512;
    std::size_t num_mels = 64;
    bool centered = true;
    double log_floor = 1e-10;
    double mel_fmin = 0.0;
    double mel_fmax = 0.0;  // 0 means sample_rate / 2

    void validate(std::uint32_t sample_rate) const {
        if (hop_length == 0 || hop_length > window_length) {
            throw ConfigError("hop length must be in [1, window length]");
        }
        if (num_mels == 0) throw ConfigError("need at least one mel band");
        if (!(log_floor > 0.0)) throw ConfigError("log floor must be positive");
        if (!is_power_of_two(window_length)) {
            throw ConfigError("window length must be a power of two for the FFT");
        }
        const double fmax = mel_fmax > 0.0 ? mel_fmax : sample_rate / 2.0;
        if (sample_rate < 2.0 * fmax) {
            throw ConfigError("sample rate " + std::to_string(sample_rate) +
                              " cannot represent mel range up to " + std::to_string(fmax) + " Hz");
        }
    }
};

// T x F matrix of log mel-band energies for one clip.
struct FeatureSequence {
    Tensor data;  // [T x F]
    std::string source_id;

    std::size_t frames() const { return data.rows(); }
    std::size_t bands() const { return data.cols(); }
};

inline double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
inline double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

// Triangular filters with peaks equally spaced on the mel scale; each row is
// scaled by 2 / (band width in Hz).
inline Tensor mel_filterbank(const FeatureExtractionConfig& cfg, std::size_t fft_bins,
                             std::uint32_t sample_rate) {
    if (fft_bins != cfg.window_length / 2 + 1) {
        throw ConfigError("filterbank expects window/2 + 1 FFT bins");
    }
    const double fmax = cfg.mel_fmax > 0.0 ? cfg.mel_fmax : sample_rate / 2.0;
    const double mel_lo = hz_to_mel(cfg.mel_fmin);
    const double mel_hi = hz_to_mel(fmax);

    std::vector<double> edges(cfg.num_mels + 2);
    for (std::size_t i = 0; i < edges.size(); ++i) {
        edges[i] = mel_to_hz(mel_lo + (mel_hi - mel_lo) * i / (cfg.num_mels + 1));
    }

    Tensor fb({cfg.num_mels, fft_bins});
    const double bin_hz = static_cast<double>(sample_rate) / cfg.window_length;
    for (std::size_t m = 0; m < cfg.num_mels; ++m) {
        const double lo = edges[m], center = edges[m + 1], hi = edges[m + 2];
        const double area_norm = 2.0 / (hi - lo);
        bool any_positive = false;
        for (std::size_t k = 0; k < fft_bins; ++k) {
            const double f = k * bin_hz;
            double w = 0.0;
            if (f > lo && f < center) {
                w = (f - lo) / (center - lo);
            } else if (f >= center && f < hi) {
                w = (hi - f) / (hi - center);
            }
            w *= area_norm;
            fb.at(m, k) = w;
            any_positive = any_positive || w > 0.0;
        }
        if (!any_positive) {
            throw ConfigError("mel filter " + std::to_string(m) +
                              " is degenerate: too many bands for " + std::to_string(fft_bins) +
                              " FFT bins");
        }
    }
    return fb;
}

namespace detail {

// Mirror index without repeating the edge sample (numpy 'reflect').
inline std::size_t reflect_index(long long j, std::size_t n) {
    if (n == 1) return 0;
    const long long period = 2 * static_cast<long long>(n) - 2;
    j = ((j % period) + period) % period;
    if (j >= static_cast<long long>(n)) j = period - j;
    return static_cast<std::size_t>(j);
}

inline std::vector<double> hamming_window(std::size_t n) {
    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i) {
        w[i] = 0.54 - 0.46 * std::cos(2.0 * M_PI * i / static_cast<double>(n));
    }
    return w;
}

}  // namespace detail

inline std::size_t frame_count(std::size_t num_samples, std::size_t hop_length) {
    return num_samples / hop_length + 1;
}

inline FeatureSequence log_mel(const AudioClip& clip, const FeatureExtractionConfig& cfg,
                               const std::string& source_id = "") {
    if (clip.samples.empty()) throw EmptyDataError("empty audio clip");
    cfg.validate(clip.sample_rate);
    if (!cfg.centered) {
        throw ConfigError("only centered framing is supported");
    }

    const std::size_t win = cfg.window_length;
    const std::size_t hop = cfg.hop_length;
    const std::size_t n = clip.samples.size();
    const std::size_t T = frame_count(n, hop);
    const std::size_t fft_bins = win / 2 + 1;
    const long long pad = static_cast<long long>(win / 2);

    const Tensor fb = mel_filterbank(cfg, fft_bins, clip.sample_rate);
    const std::vector<double> window = detail::hamming_window(win);

    FeatureSequence out;
    out.source_id = source_id;
    out.data = Tensor({T, cfg.num_mels});

    std::vector<double> frame(win);
    for (std::size_t t = 0; t < T; ++t) {
        const long long start = static_cast<long long>(t) * static_cast<long long>(hop) - pad;
        for (std::size_t i = 0; i < win; ++i) {
            const long long j = start + static_cast<long long>(i);
            const double s = (j >= 0 && j < static_cast<long long>(n))
                                 ? clip.samples[static_cast<std::size_t>(j)]
                                 : clip.samples[detail::reflect_index(j, n)];
            frame[i] = s * window[i];
        }
        const std::vector<double> power = power_spectrum(frame);
        for (std::size_t m = 0; m < cfg.num_mels; ++m) {
            double energy = 0.0;
            const double* row = fb.v.data() + m * fft_bins;
            for (std::size_t k = 0; k < fft_bins; ++k) energy += row[k] * power[k];
            out.data.at(t, m) = std::log(energy + cfg.log_floor);
        }
    }
    require_finite(out.data, "log_mel");
    return out;
}

// ---------------------------------------------------------------------------
// .lmel feature files: "LMEL", version u16, T u32, F u32, then T*F f32
// row-major. All little-endian. Values are stored in 32-bit; math stays
// 64-bit in memory.
// ---------------------------------------------------------------------------

inline constexpr std::uint16_t kLmelVersion = 1;

namespace detail {

inline void write_u16le(std::ostream& os, std::uint16_t x) {
    const unsigned char b[2] = {static_cast<unsigned char>(x & 0xFF),
                                static_cast<unsigned char>(x >> 8)};
    os.write(reinterpret_cast<const char*>(b), 2);
}

inline void write_u32le(std::ostream& os, std::uint32_t x) {
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>((x >> (8 * i)) & 0xFF);
    os.write(reinterpret_cast<const char*>(b), 4);
}

inline std::uint16_t read_u16le_stream(std::istream& is) {
    unsigned char b[2];
    is.read(reinterpret_cast<char*>(b), 2);
    return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
}

inline std::uint32_t read_u32le_stream(std::istream& is) {
    unsigned char b[4];
    is.read(reinterpret_cast<char*>(b), 4);
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

inline void write_f32le(std::ostream& os, float x) {
    std::uint32_t bits;
    std::memcpy(&bits, &x, 4);
    write_u32le(os, bits);
}

inline float read_f32le_stream(std::istream& is) {
    const std::uint32_t bits = read_u32le_stream(is);
    float x;
    std::memcpy(&x, &bits, 4);
    return x;
}

}  // namespace detail

inline void write_lmel(const std::string& path, const FeatureSequence& fs) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw FileNotFoundError("cannot write feature file: " + path);
    os.write("LMEL", 4);
    detail::write_u16le(os, kLmelVersion);
    detail::write_u32le(os, static_cast<std::uint32_t>(fs.frames()));
    detail::write_u32le(os, static_cast<std::uint32_t>(fs.bands()));
    for (double x : fs.data.v) detail::write_f32le(os, static_cast<float>(x));
    if (!os) throw FormatError("short write on feature file: " + path);
}

inline FeatureSequence read_lmel(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw FileNotFoundError("cannot open feature file: " + path);
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, "LMEL", 4) != 0) {
        throw FormatError("bad feature file magic: " + path);
    }
    const std::uint16_t version = detail::read_u16le_stream(is);
    if (version != kLmelVersion) {
        throw FormatError("unsupported feature file version " + std::to_string(version) + ": " +
                          path);
    }
    const std::uint32_t T = detail::read_u32le_stream(is);
    const std::uint32_t F = detail::read_u32le_stream(is);
    if (!is || T == 0 || F == 0) throw FormatError("empty feature file: " + path);
    FeatureSequence fs;
    fs.source_id = path;
    fs.data = Tensor({T, F});
    for (std::size_t i = 0; i < fs.data.numel(); ++i) {
        fs.data[i] = static_cast<double>(detail::read_f32le_stream(is));
    }
    if (!is) throw FormatError("truncated feature file: " + path);
    return fs;
}

}  // namespace acap
