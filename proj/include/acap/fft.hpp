#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

#include "acap/error.hpp"

namespace acap {

inline bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

// In-place iterative radix-2 Cooley-Tukey. Hand-rolled so spectra are
// bit-identical across machines regardless of any planner state.
inline void fft_radix2(std::vector<std::complex<double>>& a) {
    const std::size_t n = a.size();
    if (!is_power_of_two(n)) {
        throw ConfigError("FFT size must be a power of two, got " + std::to_string(n));
    }
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = -2.0 * M_PI / static_cast<double>(len);
        const std::complex<double> wlen(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                const std::complex<double> u = a[i + k];
                const std::complex<double> v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wlen;
            }
        }
    }
}

// Magnitude-squared spectrum of a real frame: n/2 + 1 bins.
inline std::vector<double> power_spectrum(const std::vector<double>& frame) {
    std::vector<std::complex<double>> buf(frame.size());
    for (std::size_t i = 0; i < frame.size(); ++i) buf[i] = {frame[i], 0.0};
    fft_radix2(buf);
    std::vector<double> out(frame.size() / 2 + 1);
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = std::norm(buf[k]);
    return out;
}

}  // namespace acap
