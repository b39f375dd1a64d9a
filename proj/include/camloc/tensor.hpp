#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace camloc {

// Dense row-major N-d array. Carries activations, kernels and gradients.
// T is float for training, double for gradient checks.
template <class T>
struct TensorT {
    std::vector<int> shape;
    std::vector<T> data;

    TensorT() = default;

    explicit TensorT(std::vector<int> s) : shape(std::move(s)) {
        data.assign(count(shape), T(0));
    }

    TensorT(std::vector<int> s, std::vector<T> d) : shape(std::move(s)), data(std::move(d)) {
        if (data.size() != static_cast<size_t>(count(shape)))
            throw std::invalid_argument("tensor: data length " + std::to_string(data.size()) +
                                        " does not match shape " + shape_str());
    }

    static int64_t count(const std::vector<int>& s) {
        int64_t n = 1;
        for (int e : s) {
            if (e <= 0) throw std::invalid_argument("tensor: non-positive extent");
            n *= e;
        }
        return n;
    }

    int64_t size() const { return static_cast<int64_t>(data.size()); }
    int dim(int i) const { return shape[static_cast<size_t>(i)]; }
    int ndim() const { return static_cast<int>(shape.size()); }

    T& operator[](int64_t i) { return data[static_cast<size_t>(i)]; }
    const T& operator[](int64_t i) const { return data[static_cast<size_t>(i)]; }

    // NCHW addressing
    T& at4(int n, int c, int h, int w) {
        return data[static_cast<size_t>(((int64_t(n) * shape[1] + c) * shape[2] + h) * shape[3] + w)];
    }
    const T& at4(int n, int c, int h, int w) const {
        return data[static_cast<size_t>(((int64_t(n) * shape[1] + c) * shape[2] + h) * shape[3] + w)];
    }
    T& at2(int n, int c) { return data[static_cast<size_t>(int64_t(n) * shape[1] + c)]; }
    const T& at2(int n, int c) const { return data[static_cast<size_t>(int64_t(n) * shape[1] + c)]; }
    T& at3(int c, int h, int w) {
        return data[static_cast<size_t>((int64_t(c) * shape[1] + h) * shape[2] + w)];
    }
    const T& at3(int c, int h, int w) const {
        return data[static_cast<size_t>((int64_t(c) * shape[1] + h) * shape[2] + w)];
    }

    bool same_shape(const TensorT& o) const { return shape == o.shape; }

    std::string shape_str() const {
        std::ostringstream os;
        os << "[";
        for (size_t i = 0; i < shape.size(); ++i) os << (i ? "," : "") << shape[i];
        os << "]";
        return os.str();
    }

    bool all_finite() const {
        for (T v : data)
            if (!std::isfinite(static_cast<double>(v))) return false;
        return true;
    }

    void fill(T v) { std::fill(data.begin(), data.end(), v); }

    template <class U>
    TensorT<U> cast() const {
        TensorT<U> out;
        out.shape = shape;
        out.data.resize(data.size());
        for (size_t i = 0; i < data.size(); ++i) out.data[i] = static_cast<U>(data[i]);
        return out;
    }
};

using Tensor = TensorT<float>;
using DTensor = TensorT<double>;

inline void check(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

}  // namespace camloc
