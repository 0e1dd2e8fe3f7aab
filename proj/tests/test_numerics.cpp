#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "vsrflow/autodiff.hpp"
#include "vsrflow/tensor.hpp"

using namespace vsrflow;

TEST_CASE("tensor invariant: dims must cover data") {
    CHECK_THROWS_AS(Tensor<double>({2, 3}, {1.0, 2.0}), ShapeError);
    CHECK_THROWS_AS(Tensor<double>({0, 3}, {}), ShapeError);
}

TEST_CASE("matmul identity and hand cases") {
    Tensor<double> eye({3, 3}, {1, 0, 0, 0, 1, 0, 0, 0, 1});
    Rng rng(11);
    Tensor<double> a = Tensor<double>::randn({3, 4}, rng);
    Tensor<double> ia = matmul(eye, a);
    CHECK(max_abs_diff(ia, a) == 0.0);

    Tensor<double> m({2, 2}, {1, 2, 3, 4});
    Tensor<double> v({2, 1}, {0, 1});
    Tensor<double> r = matmul(m, v);
    CHECK(r.data[0] == 2.0);
    CHECK(r.data[1] == 4.0);

    Tensor<double> bad = Tensor<double>::zeros({4, 5});
    Tensor<double> lhs = Tensor<double>::zeros({2, 3});
    CHECK_THROWS_AS(matmul(lhs, bad), ShapeError);
}

TEST_CASE("matmul associativity on random triples") {
    Rng rng(5);
    for (int rep = 0; rep < 10; ++rep) {
        Tensor<double> a = Tensor<double>::randn({3, 4}, rng);
        Tensor<double> b = Tensor<double>::randn({4, 5}, rng);
        Tensor<double> c = Tensor<double>::randn({5, 2}, rng);
        Tensor<double> l = matmul(matmul(a, b), c);
        Tensor<double> r = matmul(a, matmul(b, c));
        double denom = 0.0;
        for (double v : l.data) denom = std::max(denom, std::abs(v));
        CHECK(max_abs_diff(l, r) <= 1e-5 * std::max(denom, 1.0));
    }
}

TEST_CASE("softmax hand cases and stabilization") {
    Tensor<double> z({2}, {0.0, 0.0});
    Tensor<double> s = softmax(z, 0);
    CHECK(s.data[0] == Catch::Approx(0.5));
    CHECK(s.data[1] == Catch::Approx(0.5));

    Tensor<double> big({2}, {1000.0, 1000.0});
    Tensor<double> sb = softmax(big, 0);
    CHECK(sb.data[0] == Catch::Approx(0.5));

    Tensor<double> ln3({2}, {0.0, std::log(3.0)});
    Tensor<double> s3 = softmax(ln3, 0);
    CHECK(s3.data[0] == Catch::Approx(0.25).epsilon(1e-9));
    CHECK(s3.data[1] == Catch::Approx(0.75).epsilon(1e-9));

    CHECK_THROWS_AS(softmax(z, 3), ShapeError);
}

TEST_CASE("softmax output is a probability vector") {
    Rng rng(17);
    for (int rep = 0; rep < 20; ++rep) {
        Tensor<double> x = Tensor<double>::randn({4, 6}, rng, 3.0);
        Tensor<double> y = softmax(x, 1);
        for (int64_t r = 0; r < 4; ++r) {
            double sum = 0.0;
            for (int64_t c = 0; c < 6; ++c) {
                CHECK(y.at2(r, c) >= 0.0);
                sum += y.at2(r, c);
            }
            CHECK(sum == Catch::Approx(1.0).margin(1e-6));
        }
    }
}

TEST_CASE("non-finite kernel output is surfaced as an error") {
    Tensor<double> huge = Tensor<double>::full({2, 2}, 1e308);
    CHECK_THROWS_AS(matmul(huge, huge), NumericError);
}

TEST_CASE("grad_check: sum of squares") {
    Tensor<double> x({2}, {1.0, 2.0});
    auto f = [](Tape<double>& t, Tape<double>::Ref in) {
        return t.scale(t.mean_all(t.mul(in, in)), 2.0);  // sum(x^2) for n=2
    };
    // analytic gradient is [2, 4]
    Tape<double> tape;
    auto leaf = tape.leaf(x, true);
    tape.backward(f(tape, leaf));
    CHECK(tape.grad(leaf).data[0] == Catch::Approx(2.0));
    CHECK(tape.grad(leaf).data[1] == Catch::Approx(4.0));

    GradReport rep = grad_check(f, x, 1e-4);
    CHECK(rep.max_abs_rel_error < 1e-6);
}

TEST_CASE("grad_check: constant map has zero gradient") {
    Tensor<double> x({3}, {1.0, -1.0, 0.5});
    auto f = [](Tape<double>& t, Tape<double>::Ref in) {
        (void)in;
        return t.leaf(Tensor<double>({1}, {3.25}), true);
    };
    Tape<double> tape;
    auto leaf = tape.leaf(x, true);
    auto out = f(tape, leaf);
    tape.backward(out);
    CHECK_THROWS_AS(tape.grad(leaf), ContractError);  // never touched == all zeros

    GradReport rep = grad_check(f, x, 1e-4);
    CHECK(rep.max_abs_rel_error == 0.0);
}

TEST_CASE("grad_check rejects non-scalar maps") {
    Tensor<double> x({2}, {1.0, 2.0});
    auto f = [](Tape<double>& t, Tape<double>::Ref in) { return t.mul(in, in); };
    CHECK_THROWS_AS(grad_check(f, x, 1e-4), ContractError);
    CHECK_THROWS_AS(grad_check([](Tape<double>& t, Tape<double>::Ref in) { return t.mean_all(in); },
                               x, -1.0),
                    ContractError);
}

namespace {

// one scalar graph touching every differentiable kernel
Tape<double>::Ref kernel_tour(Tape<double>& t, Tape<double>::Ref x /*[4,6]*/) {
    Rng rng(99);
    auto w = t.leaf(Tensor<double>::randn({6, 6}, rng, 0.3), false);
    auto b = t.leaf(Tensor<double>::randn({6}, rng, 0.3), false);
    auto s = t.leaf(Tensor<double>::randn({6}, rng, 0.2), false);
    auto g = t.leaf(Tensor<double>::randn({6}, rng, 0.2), false);

    auto pos = std::make_shared<std::vector<Pos3>>();
    for (int64_t i = 0; i < 4; ++i) pos->push_back({i, i % 2, i % 3});

    auto h = t.linear(x, w, b);
    h = t.layer_norm_rows(h);
    h = t.row_affine(h, s, b);
    h = t.rope(h, pos, 100.0);
    auto attn = t.softmax_rows(t.scale(t.matmul_nt(h, h), 0.4));
    h = t.matmul(attn, h);
    h = t.row_gate(h, g);
    auto top = t.block(h, 0, 2, 0, 3);
    auto bottom = t.block(h, 2, 4, 0, 3);
    auto merged = t.concat_cols({t.concat_rows({top, bottom}), t.block(h, 0, 4, 3, 6)});
    auto act = t.add(t.silu(merged), t.gelu(t.scale(merged, 0.7)));
    auto target = t.leaf(Tensor<double>::zeros({4, 6}), false);
    auto diff = t.sub(t.mul(act, act), target);
    return t.mse(diff, target);
}

}  // namespace

TEST_CASE("grad_check across all kernels, wide precision") {
    Rng rng(3);
    for (int rep = 0; rep < 3; ++rep) {
        Tensor<double> x = Tensor<double>::randn({4, 6}, rng, 0.5);
        GradReport rep_out = grad_check(kernel_tour, x, 1e-4);
        INFO("worst index " << rep_out.worst_index << " analytic " << rep_out.analytic
                            << " numeric " << rep_out.numeric);
        CHECK(rep_out.max_abs_rel_error < 1e-3);
    }
}

TEST_CASE("grad_check across kernels, single precision stays under 1e-2") {
    Rng rng(4);
    Tensor<float> x = Tensor<float>::randn({4, 6}, rng, 0.5f);
    auto f = [](Tape<float>& t, Tape<float>::Ref in) {
        Rng r2(21);
        auto w = t.leaf(Tensor<float>::randn({6, 4}, r2, 0.3f), false);
        auto b = t.leaf(Tensor<float>::randn({4}, r2, 0.3f), false);
        auto h = t.silu(t.linear(in, w, b));
        return t.mean_all(t.mul(h, h));
    };
    // float roundoff in the central difference dominates below ~1e-3
    GradReport rep = grad_check(f, x, 1e-2f, 1e-3);
    CHECK(rep.max_abs_rel_error < 1e-2);
}

TEST_CASE("rope: zero positions are the identity") {
    Rng rng(8);
    Tensor<double> v = Tensor<double>::randn({3, 12}, rng);
    std::vector<Pos3> zero(3, Pos3{0, 0, 0});
    Tensor<double> out = rope_rotate(v, zero, 10000.0, +1);
    CHECK(max_abs_diff(out, v) == 0.0);
}

TEST_CASE("rope preserves norms") {
    Rng rng(9);
    Tensor<double> v = Tensor<double>::randn({5, 24}, rng);
    std::vector<Pos3> pos;
    for (int64_t i = 0; i < 5; ++i) pos.push_back({7 * i + 3, 2 * i, 11 - i});
    Tensor<double> out = rope_rotate(v, pos, 10000.0, +1);
    for (int64_t r = 0; r < 5; ++r) {
        double n0 = 0.0, n1 = 0.0;
        for (int64_t c = 0; c < 24; ++c) {
            n0 += v.at2(r, c) * v.at2(r, c);
            n1 += out.at2(r, c) * out.at2(r, c);
        }
        CHECK(std::sqrt(n1) == Catch::Approx(std::sqrt(n0)).margin(1e-6));
    }
}

TEST_CASE("rope relative-position property") {
    // dot(rope(q,p1), rope(k,p2)) depends only on p1 - p2
    Rng rng(10);
    for (int rep = 0; rep < 8; ++rep) {
        Tensor<double> q = Tensor<double>::randn({1, 18}, rng);
        Tensor<double> k = Tensor<double>::randn({1, 18}, rng);
        Pos3 p1{int64_t(rng.uniform_int(0, 30)), int64_t(rng.uniform_int(0, 7)),
                int64_t(rng.uniform_int(0, 7))};
        Pos3 p2{int64_t(rng.uniform_int(0, 30)), int64_t(rng.uniform_int(0, 7)),
                int64_t(rng.uniform_int(0, 7))};
        Pos3 delta{int64_t(rng.uniform_int(0, 50)), int64_t(rng.uniform_int(0, 9)),
                   int64_t(rng.uniform_int(0, 9))};
        auto dot_at = [&](Pos3 a, Pos3 b) {
            Tensor<double> qa = rope_rotate(q, {a}, 10000.0, +1);
            Tensor<double> kb = rope_rotate(k, {b}, 10000.0, +1);
            double d = 0.0;
            for (int64_t c = 0; c < 18; ++c) d += qa.at2(0, c) * kb.at2(0, c);
            return d;
        };
        Pos3 p1s{p1.frame + delta.frame, p1.row + delta.row, p1.col + delta.col};
        Pos3 p2s{p2.frame + delta.frame, p2.row + delta.row, p2.col + delta.col};
        CHECK(dot_at(p1, p2) == Catch::Approx(dot_at(p1s, p2s)).margin(1e-5));
    }
}

TEST_CASE("rope rejects head dims not divisible by 6") {
    Tensor<double> v = Tensor<double>::zeros({2, 16});
    std::vector<Pos3> pos(2);
    CHECK_THROWS_AS(rope_rotate(v, pos, 100.0, +1), ConfigError);
}
