#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "acap/error.hpp"

namespace acap {

// Dense row-major tensor of doubles. Rank is the length of `shape`;
// a rank-1 tensor is a vector, rank-2 a matrix. All math in the toolkit
// runs in 64-bit; narrower storage happens only inside file formats.
struct Tensor {
    std::vector<std::size_t> shape;
    std::vector<double> v;

    Tensor() = default;

    explicit Tensor(std::vector<std::size_t> s) : shape(std::move(s)) {
        v.assign(count(shape), 0.0);
    }

    Tensor(std::vector<std::size_t> s, std::vector<double> data)
        : shape(std::move(s)), v(std::move(data)) {
        if (v.size() != count(shape)) {
            throw DimensionError("tensor data size " + std::to_string(v.size()) +
                                 " does not match shape " + shape_str());
        }
    }

    static std::size_t count(const std::vector<std::size_t>& s) {
        std::size_t n = 1;
        for (std::size_t e : s) n *= e;
        return n;
    }

    static Tensor zeros(std::vector<std::size_t> s) { return Tensor(std::move(s)); }

    static Tensor full(std::vector<std::size_t> s, double value) {
        Tensor t(std::move(s));
        t.fill(value);
        return t;
    }

    static Tensor vector(std::vector<double> data) {
        std::size_t n = data.size();
        return Tensor({n}, std::move(data));
    }

    static Tensor matrix(std::size_t rows, std::size_t cols, std::vector<double> data) {
        return Tensor({rows, cols}, std::move(data));
    }

    std::size_t numel() const { return v.size(); }
    std::size_t rank() const { return shape.size(); }

    std::size_t rows() const { return shape.empty() ? 0 : shape[0]; }
    std::size_t cols() const { return shape.size() < 2 ? 1 : shape[1]; }

    double& operator[](std::size_t i) { return v[i]; }
    double operator[](std::size_t i) const { return v[i]; }

    double& at(std::size_t r, std::size_t c) { return v[r * shape[1] + c]; }
    double at(std::size_t r, std::size_t c) const { return v[r * shape[1] + c]; }

    void fill(double value) { std::fill(v.begin(), v.end(), value); }

    bool same_shape(const Tensor& o) const { return shape == o.shape; }

    bool all_finite() const {
        for (double x : v) {
            if (!std::isfinite(x)) return false;
        }
        return true;
    }

    std::string shape_str() const {
        std::ostringstream os;
        os << '[';
        for (std::size_t i = 0; i < shape.size(); ++i) {
            if (i) os << 'x';
            os << shape[i];
        }
        os << ']';
        return os.str();
    }
};

inline void require_same_shape(const Tensor& a, const Tensor& b, const char* what) {
    if (!a.same_shape(b)) {
        throw DimensionError(std::string(what) + ": shape " + a.shape_str() +
                             " vs " + b.shape_str());
    }
}

inline void require_finite(const Tensor& t, const char* what) {
    if (!t.all_finite()) {
        throw DivergenceError(std::string(what) + ": non-finite value in tensor " +
                              t.shape_str());
    }
}

}  // namespace acap
