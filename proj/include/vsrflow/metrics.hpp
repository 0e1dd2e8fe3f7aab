#pragma once

#include <cmath>
#include <optional>

#include "vsrflow/common.hpp"
#include "vsrflow/video.hpp"

namespace vsrflow {

struct MetricsRecord {
    double psnr_db = 0.0;
    double ssim = 0.0;
    std::optional<double> masked_psnr_db;
};

inline constexpr double kPsnrCapDb = 99.0;

// PSNR at peak 1.0 over unmasked elements. The optional mask is a [f,1,h,w]
// video whose nonzero pixels are EXCLUDED (the edit region); it broadcasts
// over channels. Identical inputs cap at 99 dB.
template <class T>
inline double psnr(const VideoTensor<T>& a, const VideoTensor<T>& b,
                   const VideoTensor<T>* mask = nullptr) {
    check_shape(a.data.same_shape(b.data), "psnr: shape mismatch");
    if (mask) {
        check_shape(mask->frames() == a.frames() && mask->channels() == 1 &&
                        mask->height() == a.height() && mask->width() == a.width(),
                    "psnr: mask must be [f,1,h,w] matching the videos");
    }
    double acc = 0.0;
    int64_t count = 0;
    for (int64_t f = 0; f < a.frames(); ++f)
        for (int64_t y = 0; y < a.height(); ++y)
            for (int64_t x = 0; x < a.width(); ++x) {
                if (mask && mask->data.at4(f, 0, y, x) > T(0.5)) continue;
                for (int64_t c = 0; c < a.channels(); ++c) {
                    double d = double(a.data.at4(f, c, y, x)) - double(b.data.at4(f, c, y, x));
                    acc += d * d;
                    ++count;
                }
            }
    check_contract(count > 0, "psnr: mask excludes every element");
    double mse = acc / double(count);
    if (mse <= 0.0) return kPsnrCapDb;
    return std::min(kPsnrCapDb, 10.0 * std::log10(1.0 / mse));
}

// Per-frame windowed SSIM: grayscale by channel mean, sliding 8x8 uniform
// windows, standard stabilizers for dynamic range 1.0, averaged over windows
// and frames.
template <class T>
inline double ssim(const VideoTensor<T>& a, const VideoTensor<T>& b) {
    check_shape(a.data.same_shape(b.data), "ssim: shape mismatch");
    const int64_t win = 8;
    check_shape(a.height() >= win && a.width() >= win, "ssim: frame smaller than the 8x8 window");
    const double c1 = 0.01 * 0.01;
    const double c2 = 0.03 * 0.03;
    int64_t h = a.height(), w = a.width(), ch = a.channels();
    double total = 0.0;
    int64_t windows = 0;
    std::vector<double> ga(size_t(h * w)), gb(size_t(h * w));
    for (int64_t f = 0; f < a.frames(); ++f) {
        for (int64_t y = 0; y < h; ++y)
            for (int64_t x = 0; x < w; ++x) {
                double sa = 0.0, sb = 0.0;
                for (int64_t c = 0; c < ch; ++c) {
                    sa += double(a.data.at4(f, c, y, x));
                    sb += double(b.data.at4(f, c, y, x));
                }
                ga[size_t(y * w + x)] = sa / double(ch);
                gb[size_t(y * w + x)] = sb / double(ch);
            }
        for (int64_t y = 0; y + win <= h; ++y)
            for (int64_t x = 0; x + win <= w; ++x) {
                double ma = 0.0, mb = 0.0;
                for (int64_t dy = 0; dy < win; ++dy)
                    for (int64_t dx = 0; dx < win; ++dx) {
                        ma += ga[size_t((y + dy) * w + x + dx)];
                        mb += gb[size_t((y + dy) * w + x + dx)];
                    }
                double n = double(win * win);
                ma /= n;
                mb /= n;
                double va = 0.0, vb = 0.0, cov = 0.0;
                for (int64_t dy = 0; dy < win; ++dy)
                    for (int64_t dx = 0; dx < win; ++dx) {
                        double da = ga[size_t((y + dy) * w + x + dx)] - ma;
                        double db = gb[size_t((y + dy) * w + x + dx)] - mb;
                        va += da * da;
                        vb += db * db;
                        cov += da * db;
                    }
                va /= n;
                vb /= n;
                cov /= n;
                total += (2.0 * ma * mb + c1) * (2.0 * cov + c2) /
                         ((ma * ma + mb * mb + c1) * (va + vb + c2));
                ++windows;
            }
    }
    return total / double(windows);
}

}  // namespace vsrflow
