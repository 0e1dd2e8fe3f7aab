#pragma once

#include <cmath>
#include <vector>

#include "vsrflow/common.hpp"
#include "vsrflow/tensor.hpp"
#include "vsrflow/video.hpp"

namespace vsrflow {

struct CodecConfig {
    int64_t patch = 4;
    uint64_t mixing_seed = 7;
};

// Per-frame bilinear resize of a [f, c, h, w] tensor, half-pixel centers
// (align-corners=false), edge clamped. Identity when sizes match.
template <class T>
inline Tensor<T> resize_bilinear_4d(const Tensor<T>& x, int64_t th, int64_t tw) {
    check_shape(x.rank() == 4, "resize: rank-4 tensor required");
    check_contract(th >= 1 && tw >= 1, "resize: target dims must be >= 1");
    int64_t f = x.dims[0], c = x.dims[1], h = x.dims[2], w = x.dims[3];
    if (th == h && tw == w) return x;
    Tensor<T> out = Tensor<T>::zeros({f, c, th, tw});
    double sy = double(h) / double(th);
    double sx = double(w) / double(tw);
    for (int64_t oy = 0; oy < th; ++oy) {
        double fy = (double(oy) + 0.5) * sy - 0.5;
        int64_t y0 = int64_t(std::floor(fy));
        double wy = fy - double(y0);
        int64_t ya = std::clamp<int64_t>(y0, 0, h - 1);
        int64_t yb = std::clamp<int64_t>(y0 + 1, 0, h - 1);
        for (int64_t ox = 0; ox < tw; ++ox) {
            double fx = (double(ox) + 0.5) * sx - 0.5;
            int64_t x0 = int64_t(std::floor(fx));
            double wx = fx - double(x0);
            int64_t xa = std::clamp<int64_t>(x0, 0, w - 1);
            int64_t xb = std::clamp<int64_t>(x0 + 1, 0, w - 1);
            for (int64_t fi = 0; fi < f; ++fi)
                for (int64_t ci = 0; ci < c; ++ci) {
                    double v00 = double(x.at4(fi, ci, ya, xa));
                    double v01 = double(x.at4(fi, ci, ya, xb));
                    double v10 = double(x.at4(fi, ci, yb, xa));
                    double v11 = double(x.at4(fi, ci, yb, xb));
                    double top = v00 + (v01 - v00) * wx;
                    double bot = v10 + (v11 - v10) * wx;
                    out.at4(fi, ci, oy, ox) = T(top + (bot - top) * wy);
                }
        }
    }
    ensure_finite(out, "resize_bilinear");
    return out;
}

template <class T>
inline VideoTensor<T> bilinear_resize(const VideoTensor<T>& v, int64_t th, int64_t tw) {
    return VideoTensor<T>(resize_bilinear_4d(v.data, th, tw));
}

template <class T>
inline VideoTensor<T> clamp01(VideoTensor<T> v) {
    for (T& x : v.data.data) x = std::clamp(x, T(0), T(1));
    return v;
}

// Exactly invertible pixel<->latent map: per-frame space-to-depth with patch
// size p, then a fixed orthonormal channel mix. decode is the transpose and
// does not clamp; pixel clamping happens only at final emission.
template <class T>
class Codec {
public:
    explicit Codec(CodecConfig cfg = {}) : cfg_(cfg) {
        check_config(cfg_.patch >= 1, "codec: patch must be >= 1");
        build_mix();
    }

    const CodecConfig& config() const { return cfg_; }
    int64_t patch() const { return cfg_.patch; }
    int64_t latent_channels() const { return 3 * cfg_.patch * cfg_.patch; }

    LatentVideo<T> encode(const VideoTensor<T>& x) const {
        int64_t p = cfg_.patch;
        check_shape(x.channels() == 3, "encode: pixel video must have 3 channels");
        check_shape(x.height() % p == 0 && x.width() % p == 0,
                    "encode: spatial dims must be divisible by patch size");
        int64_t f = x.frames(), hl = x.height() / p, wl = x.width() / p, cl = latent_channels();
        LatentVideo<T> z = LatentVideo<T>::zeros(f, cl, hl, wl);
        std::vector<double> patch_vec(static_cast<size_t>(cl));
        for (int64_t fi = 0; fi < f; ++fi)
            for (int64_t yl = 0; yl < hl; ++yl)
                for (int64_t xl = 0; xl < wl; ++xl) {
                    for (int64_t c = 0; c < 3; ++c)
                        for (int64_t py = 0; py < p; ++py)
                            for (int64_t px = 0; px < p; ++px)
                                patch_vec[size_t((c * p + py) * p + px)] =
                                    double(x.data.at4(fi, c, yl * p + py, xl * p + px));
                    for (int64_t k = 0; k < cl; ++k) {
                        double acc = 0.0;
                        const double* row = mix_.data() + k * cl;
                        for (int64_t j = 0; j < cl; ++j) acc += row[j] * patch_vec[size_t(j)];
                        z.data.at4(fi, k, yl, xl) = T(acc);
                    }
                }
        ensure_finite(z.data, "encode");
        return z;
    }

    VideoTensor<T> decode(const LatentVideo<T>& z) const {
        int64_t p = cfg_.patch, cl = latent_channels();
        check_shape(z.channels() == cl, "decode: latent channel count must equal 3*p^2");
        int64_t f = z.frames(), hl = z.height(), wl = z.width();
        VideoTensor<T> x = VideoTensor<T>::zeros(f, 3, hl * p, wl * p);
        std::vector<double> site(static_cast<size_t>(cl));
        for (int64_t fi = 0; fi < f; ++fi)
            for (int64_t yl = 0; yl < hl; ++yl)
                for (int64_t xl = 0; xl < wl; ++xl) {
                    for (int64_t k = 0; k < cl; ++k) site[size_t(k)] = double(z.data.at4(fi, k, yl, xl));
                    for (int64_t j = 0; j < cl; ++j) {
                        double acc = 0.0;
                        for (int64_t k = 0; k < cl; ++k) acc += mix_[size_t(k * cl + j)] * site[size_t(k)];
                        int64_t c = j / (p * p);
                        int64_t py = (j / p) % p;
                        int64_t px = j % p;
                        x.data.at4(fi, c, yl * p + py, xl * p + px) = T(acc);
                    }
                }
        ensure_finite(x.data, "decode");
        return x;
    }

    // Fig-style upsampler: decode -> bilinear upscale -> encode.
    LatentVideo<T> upsample_latent(const LatentVideo<T>& z, int64_t scale) const {
        check_contract(scale >= 1, "upsample_latent: scale must be >= 1");
        VideoTensor<T> x = decode(z);
        VideoTensor<T> up = bilinear_resize(x, x.height() * scale, x.width() * scale);
        return encode(up);
    }

    // mixing matrix row i dotted with row j; exposed for the orthonormality check
    double mix_gram(int64_t i, int64_t j) const {
        int64_t cl = latent_channels();
        double acc = 0.0;
        for (int64_t k = 0; k < cl; ++k) acc += mix_[size_t(i * cl + k)] * mix_[size_t(j * cl + k)];
        return acc;
    }

private:
    void build_mix() {
        int64_t cl = latent_channels();
        Rng rng(splitmix64(cfg_.mixing_seed ^ 0xC0DEC0DECULL));
        mix_.assign(size_t(cl * cl), 0.0);
        for (double& v : mix_) v = rng.normal();
        // modified Gram-Schmidt over rows
        for (int64_t i = 0; i < cl; ++i) {
            double* ri = mix_.data() + i * cl;
            for (int64_t j = 0; j < i; ++j) {
                const double* rj = mix_.data() + j * cl;
                double dot = 0.0;
                for (int64_t k = 0; k < cl; ++k) dot += ri[k] * rj[k];
                for (int64_t k = 0; k < cl; ++k) ri[k] -= dot * rj[k];
            }
            double nrm = 0.0;
            for (int64_t k = 0; k < cl; ++k) nrm += ri[k] * ri[k];
            nrm = std::sqrt(nrm);
            check_config(nrm > 1e-8, "codec: degenerate mixing matrix draw");
            for (int64_t k = 0; k < cl; ++k) ri[k] /= nrm;
        }
    }

    CodecConfig cfg_;
    std::vector<double> mix_;  // [cl, cl], orthonormal rows
};

}  // namespace vsrflow
