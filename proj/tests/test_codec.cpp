#include <catch2/catch_amalgamated.hpp>

#include "vsrflow/codec.hpp"

using namespace vsrflow;

namespace {

VideoTensor<double> random_video(int64_t f, int64_t h, int64_t w, uint64_t seed) {
    Rng rng(seed);
    VideoTensor<double> v = VideoTensor<double>::zeros(f, 3, h, w);
    for (double& x : v.data.data) x = rng.uniform();
    return v;
}

// independent brute-force bilinear evaluation, half-pixel centers, edge clamp
double bilinear_oracle(const std::vector<double>& row, int64_t in, int64_t out, int64_t i) {
    double src = (double(i) + 0.5) * double(in) / double(out) - 0.5;
    int64_t x0 = int64_t(std::floor(src));
    double t = src - double(x0);
    int64_t xa = std::clamp<int64_t>(x0, 0, in - 1);
    int64_t xb = std::clamp<int64_t>(x0 + 1, 0, in - 1);
    return row[size_t(xa)] * (1.0 - t) + row[size_t(xb)] * t;
}

}  // namespace

TEST_CASE("codec mixing matrix is orthonormal") {
    Codec<double> codec(CodecConfig{4, 123});
    int64_t cl = codec.latent_channels();
    for (int64_t i = 0; i < cl; ++i)
        for (int64_t j = 0; j < cl; ++j) {
            double want = (i == j) ? 1.0 : 0.0;
            CHECK(codec.mix_gram(i, j) == Catch::Approx(want).margin(1e-6));
        }
}

TEST_CASE("encode shape arithmetic and linearity") {
    Codec<double> codec(CodecConfig{4, 7});
    VideoTensor<double> v = random_video(2, 8, 8, 1);
    LatentVideo<double> z = codec.encode(v);
    CHECK(z.frames() == 2);
    CHECK(z.channels() == 48);
    CHECK(z.height() == 2);
    CHECK(z.width() == 2);

    VideoTensor<double> zero = VideoTensor<double>::zeros(2, 3, 8, 8);
    LatentVideo<double> zz = codec.encode(zero);
    for (double x : zz.data.data) CHECK(x == 0.0);

    // encode(a*x + b*y) == a*encode(x) + b*encode(y)
    VideoTensor<double> v2 = random_video(2, 8, 8, 2);
    VideoTensor<double> mix = v;
    for (size_t i = 0; i < mix.data.data.size(); ++i)
        mix.data.data[i] = 0.3 * v.data.data[i] + 0.7 * v2.data.data[i];
    LatentVideo<double> zm = codec.encode(mix);
    LatentVideo<double> z2 = codec.encode(v2);
    for (size_t i = 0; i < zm.data.data.size(); ++i)
        CHECK(zm.data.data[i] ==
              Catch::Approx(0.3 * z.data.data[i] + 0.7 * z2.data.data[i]).margin(1e-5));

    CHECK_THROWS_AS(codec.encode(random_video(1, 6, 8, 3)), ShapeError);
}

TEST_CASE("decode is the exact inverse of encode") {
    Codec<double> codec(CodecConfig{4, 99});
    VideoTensor<double> v = random_video(3, 8, 12, 5);
    VideoTensor<double> round = codec.decode(codec.encode(v));
    CHECK(max_abs_diff(round.data, v.data) <= 1e-5);

    LatentVideo<double> zeros = LatentVideo<double>::zeros(2, 48, 2, 2);
    VideoTensor<double> black = codec.decode(zeros);
    for (double x : black.data.data) CHECK(x == 0.0);
    CHECK(black.height() == 8);
    CHECK(black.width() == 8);
    CHECK(black.channels() == 3);

    CHECK_THROWS_AS(codec.decode(LatentVideo<double>::zeros(2, 12, 2, 2)), ShapeError);
}

TEST_CASE("bilinear resize: constants, oracle values, smooth round trip") {
    VideoTensor<double> c = VideoTensor<double>::zeros(1, 3, 4, 4);
    for (double& x : c.data.data) x = 0.7;
    VideoTensor<double> up = bilinear_resize(c, 9, 7);
    for (double x : up.data.data) CHECK(x == Catch::Approx(0.7).margin(1e-12));

    // 1x2 row [0,1] -> 1x4 under half-pixel align-corners=false
    VideoTensor<double> row = VideoTensor<double>::zeros(1, 3, 1, 2);
    for (int64_t ch = 0; ch < 3; ++ch) row.data.at4(0, ch, 0, 1) = 1.0;
    VideoTensor<double> wide = bilinear_resize(row, 1, 4);
    std::vector<double> src{0.0, 1.0};
    for (int64_t i = 0; i < 4; ++i) {
        double want = bilinear_oracle(src, 2, 4, i);
        CHECK(wide.data.at4(0, 0, 0, i) == Catch::Approx(want).margin(1e-12));
    }
    CHECK(wide.data.at4(0, 0, 0, 0) == Catch::Approx(0.0).margin(1e-12));
    CHECK(wide.data.at4(0, 0, 0, 1) == Catch::Approx(0.25).margin(1e-12));
    CHECK(wide.data.at4(0, 0, 0, 2) == Catch::Approx(0.75).margin(1e-12));
    CHECK(wide.data.at4(0, 0, 0, 3) == Catch::Approx(1.0).margin(1e-12));

    // up 2x then down 2x of a smooth gradient stays close
    VideoTensor<double> grad = VideoTensor<double>::zeros(1, 3, 8, 8);
    for (int64_t y = 0; y < 8; ++y)
        for (int64_t x = 0; x < 8; ++x)
            for (int64_t ch = 0; ch < 3; ++ch)
                grad.data.at4(0, ch, y, x) = (double(x) + double(y)) / 14.0;
    VideoTensor<double> rt = bilinear_resize(bilinear_resize(grad, 16, 16), 8, 8);
    CHECK(max_abs_diff(rt.data, grad.data) <= 0.05);
}

TEST_CASE("bilinear resize at the same size is the identity") {
    VideoTensor<double> v = random_video(2, 4, 6, 77);
    VideoTensor<double> same = bilinear_resize(v, 4, 6);
    CHECK(max_abs_diff(same.data, v.data) == 0.0);
}

TEST_CASE("upsample_latent shapes and identity at scale 1") {
    Codec<double> codec(CodecConfig{4, 3});
    VideoTensor<double> v = random_video(2, 8, 8, 9);
    LatentVideo<double> z = codec.encode(v);

    LatentVideo<double> same = codec.upsample_latent(z, 1);
    CHECK(max_abs_diff(same.data, z.data) <= 1e-5);

    LatentVideo<double> up = codec.upsample_latent(z, 2);
    CHECK(up.frames() == 2);
    CHECK(up.channels() == 48);
    CHECK(up.height() == 4);
    CHECK(up.width() == 4);

    // constant-color latent stays constant-color at the larger size
    VideoTensor<double> c = VideoTensor<double>::zeros(1, 3, 8, 8);
    for (int64_t ch = 0; ch < 3; ++ch)
        for (int64_t y = 0; y < 8; ++y)
            for (int64_t x = 0; x < 8; ++x) c.data.at4(0, ch, y, x) = 0.2 + 0.25 * double(ch);
    LatentVideo<double> zc = codec.upsample_latent(codec.encode(c), 2);
    VideoTensor<double> back = codec.decode(zc);
    for (int64_t ch = 0; ch < 3; ++ch)
        for (int64_t y = 0; y < 16; ++y)
            for (int64_t x = 0; x < 16; ++x)
                CHECK(back.data.at4(0, ch, y, x) ==
                      Catch::Approx(0.2 + 0.25 * double(ch)).margin(1e-6));

    CHECK_THROWS_AS(codec.upsample_latent(z, 0), ContractError);
}

TEST_CASE("round-trip identity over random videos") {
    Codec<double> codec;
    Rng rng(31);
    for (int rep = 0; rep < 5; ++rep) {
        int64_t f = rng.uniform_int(1, 3);
        int64_t h = 4 * rng.uniform_int(1, 3);
        int64_t w = 4 * rng.uniform_int(1, 3);
        VideoTensor<double> v = random_video(f, h, w, 100 + uint64_t(rep));
        CHECK(max_abs_diff(codec.decode(codec.encode(v)).data, v.data) <= 1e-5);
    }
}
