#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace speca {

/// Dense row-major tensor of 64-bit floats. Shapes are kept around mostly
/// for contract checking; almost everything here treats the data as flat.
struct Tensor {
    std::vector<std::size_t> shape;
    std::vector<double> data;

    Tensor() = default;

    Tensor(std::vector<std::size_t> shape_, std::vector<double> data_)
        : shape(std::move(shape_)), data(std::move(data_)) {
        if (element_count(shape) != data.size())
            throw std::invalid_argument("tensor shape/data size mismatch");
    }

    static Tensor zeros(std::vector<std::size_t> shape_) {
        std::size_t n = element_count(shape_);
        return Tensor(std::move(shape_), std::vector<double>(n, 0.0));
    }

    static Tensor vec(std::vector<double> v) {
        std::vector<std::size_t> s{v.size()};
        return Tensor(std::move(s), std::move(v));
    }

    std::size_t size() const { return data.size(); }
    bool empty() const { return data.empty(); }

    double& operator[](std::size_t i) { return data[i]; }
    double operator[](std::size_t i) const { return data[i]; }

    bool same_shape(const Tensor& o) const { return shape == o.shape; }

    bool all_finite() const {
        for (double v : data)
            if (!std::isfinite(v)) return false;
        return true;
    }

    void require_finite(const char* who) const {
        if (!all_finite())
            throw std::runtime_error(std::string(who) + ": non-finite value");
    }

    static std::size_t element_count(const std::vector<std::size_t>& s) {
        return std::accumulate(s.begin(), s.end(), std::size_t{1},
                               [](std::size_t a, std::size_t b) { return a * b; });
    }
};

inline Tensor operator+(const Tensor& a, const Tensor& b) {
    if (!a.same_shape(b)) throw std::invalid_argument("tensor shape mismatch");
    Tensor out = a;
    for (std::size_t i = 0; i < out.size(); ++i) out.data[i] += b.data[i];
    return out;
}

inline Tensor operator-(const Tensor& a, const Tensor& b) {
    if (!a.same_shape(b)) throw std::invalid_argument("tensor shape mismatch");
    Tensor out = a;
    for (std::size_t i = 0; i < out.size(); ++i) out.data[i] -= b.data[i];
    return out;
}

inline Tensor operator*(double c, const Tensor& a) {
    Tensor out = a;
    for (double& v : out.data) v *= c;
    return out;
}

inline void axpy(double c, const Tensor& x, Tensor& y) {
    if (!x.same_shape(y)) throw std::invalid_argument("tensor shape mismatch");
    for (std::size_t i = 0; i < y.size(); ++i) y.data[i] += c * x.data[i];
}

}  // namespace speca
