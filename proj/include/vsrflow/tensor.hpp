#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "vsrflow/common.hpp"

namespace vsrflow {

// Dense row-major tensor. One flat buffer, no views or stride tricks.
template <class T>
struct Tensor {
    std::vector<int64_t> dims;
    std::vector<T> data;
    bool requires_grad = false;

    Tensor() = default;
    Tensor(std::vector<int64_t> d, std::vector<T> v) : dims(std::move(d)), data(std::move(v)) {
        check_shape(numel_of(dims) == int64_t(data.size()), "tensor: dims/data size mismatch");
    }

    static int64_t numel_of(const std::vector<int64_t>& d) {
        int64_t n = 1;
        for (int64_t e : d) {
            check_shape(e > 0, "tensor: non-positive extent");
            n *= e;
        }
        return n;
    }

    static Tensor zeros(std::vector<int64_t> d) {
        int64_t n = numel_of(d);
        return Tensor(std::move(d), std::vector<T>(size_t(n), T(0)));
    }

    static Tensor full(std::vector<int64_t> d, T v) {
        int64_t n = numel_of(d);
        return Tensor(std::move(d), std::vector<T>(size_t(n), v));
    }

    static Tensor randn(std::vector<int64_t> d, Rng& rng, T stddev = T(1)) {
        Tensor t = zeros(std::move(d));
        for (T& v : t.data) v = T(rng.normal()) * stddev;
        return t;
    }

    int64_t numel() const { return int64_t(data.size()); }
    int rank() const { return int(dims.size()); }

    int64_t dim(int i) const { return dims[size_t(i)]; }

    // 2D accessors; matrices are the workhorse layout
    int64_t rows() const { return dims.size() == 2 ? dims[0] : -1; }
    int64_t cols() const { return dims.size() == 2 ? dims[1] : -1; }
    T& at2(int64_t r, int64_t c) { return data[size_t(r * dims[1] + c)]; }
    const T& at2(int64_t r, int64_t c) const { return data[size_t(r * dims[1] + c)]; }

    // [d0, d1, d2, d3] row-major
    T& at4(int64_t a, int64_t b, int64_t c, int64_t d) {
        return data[size_t(((a * dims[1] + b) * dims[2] + c) * dims[3] + d)];
    }
    const T& at4(int64_t a, int64_t b, int64_t c, int64_t d) const {
        return data[size_t(((a * dims[1] + b) * dims[2] + c) * dims[3] + d)];
    }

    bool same_shape(const Tensor& o) const { return dims == o.dims; }

    std::string shape_str() const {
        std::ostringstream os;
        os << "[";
        for (size_t i = 0; i < dims.size(); ++i) os << (i ? "," : "") << dims[i];
        os << "]";
        return os.str();
    }

    template <class U>
    Tensor<U> cast() const {
        Tensor<U> out;
        out.dims = dims;
        out.data.resize(data.size());
        for (size_t i = 0; i < data.size(); ++i) out.data[i] = U(data[i]);
        out.requires_grad = requires_grad;
        return out;
    }
};

template <class T>
inline void ensure_finite(const Tensor<T>& t, const char* ctx) {
    for (const T& v : t.data) {
        if (!std::isfinite(double(v)))
            throw NumericError(std::string("non-finite value after kernel: ") + ctx);
    }
}

// c = a @ b, a:[m,k] b:[k,n]
template <class T>
inline Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b) {
    check_shape(a.rank() == 2 && b.rank() == 2, "matmul: rank-2 operands required");
    check_shape(a.dims[1] == b.dims[0], "matmul: inner dims disagree " + a.shape_str() + " x " + b.shape_str());
    int64_t m = a.dims[0], k = a.dims[1], n = b.dims[1];
    Tensor<T> c = Tensor<T>::zeros({m, n});
    const T* pa = a.data.data();
    const T* pb = b.data.data();
    T* pc = c.data.data();
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (m * k * n > 1 << 16)
#endif
    for (int64_t i = 0; i < m; ++i) {
        T* ci = pc + i * n;
        const T* ai = pa + i * k;
        for (int64_t l = 0; l < k; ++l) {
            T av = ai[l];
            const T* bl = pb + l * n;
            for (int64_t j = 0; j < n; ++j) ci[j] += av * bl[j];
        }
    }
    ensure_finite(c, "matmul");
    return c;
}

// c = a @ b^T, a:[m,k] b:[n,k]
template <class T>
inline Tensor<T> matmul_nt(const Tensor<T>& a, const Tensor<T>& b) {
    check_shape(a.rank() == 2 && b.rank() == 2, "matmul_nt: rank-2 operands required");
    check_shape(a.dims[1] == b.dims[1], "matmul_nt: inner dims disagree");
    int64_t m = a.dims[0], k = a.dims[1], n = b.dims[0];
    Tensor<T> c = Tensor<T>::zeros({m, n});
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (m * k * n > 1 << 16)
#endif
    for (int64_t i = 0; i < m; ++i) {
        const T* ai = a.data.data() + i * k;
        T* ci = c.data.data() + i * n;
        for (int64_t j = 0; j < n; ++j) {
            const T* bj = b.data.data() + j * k;
            T acc = T(0);
            for (int64_t l = 0; l < k; ++l) acc += ai[l] * bj[l];
            ci[j] = acc;
        }
    }
    ensure_finite(c, "matmul_nt");
    return c;
}

// c = a^T @ b, a:[k,m] b:[k,n]
template <class T>
inline Tensor<T> matmul_tn(const Tensor<T>& a, const Tensor<T>& b) {
    check_shape(a.rank() == 2 && b.rank() == 2, "matmul_tn: rank-2 operands required");
    check_shape(a.dims[0] == b.dims[0], "matmul_tn: inner dims disagree");
    int64_t k = a.dims[0], m = a.dims[1], n = b.dims[1];
    Tensor<T> c = Tensor<T>::zeros({m, n});
    for (int64_t l = 0; l < k; ++l) {
        const T* al = a.data.data() + l * m;
        const T* bl = b.data.data() + l * n;
        for (int64_t i = 0; i < m; ++i) {
            T av = al[i];
            T* ci = c.data.data() + i * n;
            for (int64_t j = 0; j < n; ++j) ci[j] += av * bl[j];
        }
    }
    ensure_finite(c, "matmul_tn");
    return c;
}

// max-subtraction stabilized softmax along `axis`
template <class T>
inline Tensor<T> softmax(const Tensor<T>& x, int axis) {
    check_shape(axis >= 0 && axis < x.rank(), "softmax: axis out of range");
    int64_t extent = x.dims[size_t(axis)];
    int64_t inner = 1;
    for (int i = axis + 1; i < x.rank(); ++i) inner *= x.dims[size_t(i)];
    int64_t outer = x.numel() / (extent * inner);
    Tensor<T> y = x;
    for (int64_t o = 0; o < outer; ++o) {
        for (int64_t in = 0; in < inner; ++in) {
            T* base = y.data.data() + o * extent * inner + in;
            T mx = base[0];
            for (int64_t e = 1; e < extent; ++e) mx = std::max(mx, base[e * inner]);
            T sum = T(0);
            for (int64_t e = 0; e < extent; ++e) {
                T v = std::exp(base[e * inner] - mx);
                base[e * inner] = v;
                sum += v;
            }
            for (int64_t e = 0; e < extent; ++e) base[e * inner] /= sum;
        }
    }
    ensure_finite(y, "softmax");
    return y;
}

template <class T>
inline T max_abs_diff(const Tensor<T>& a, const Tensor<T>& b) {
    check_shape(a.same_shape(b), "max_abs_diff: shape mismatch");
    T m = T(0);
    for (size_t i = 0; i < a.data.size(); ++i) m = std::max(m, std::abs(a.data[i] - b.data[i]));
    return m;
}

template <class T>
inline double mean_sq_diff(const Tensor<T>& a, const Tensor<T>& b) {
    check_shape(a.same_shape(b), "mean_sq_diff: shape mismatch");
    double acc = 0.0;
    for (size_t i = 0; i < a.data.size(); ++i) {
        double d = double(a.data[i]) - double(b.data[i]);
        acc += d * d;
    }
    return acc / double(a.data.size());
}

}  // namespace vsrflow
