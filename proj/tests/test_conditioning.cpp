#include <catch2/catch_amalgamated.hpp>

#include "vsrflow/conditioning.hpp"

using namespace vsrflow;

TEST_CASE("rope plan: contiguous allocation after the noisy range") {
    RopePlan p = build_rope_plan(21, {1, 1});
    CHECK(p.noisy_frames == 21);
    REQUIRE(p.ref_ranges.size() == 2);
    CHECK(p.ref_ranges[0] == std::pair<int64_t, int64_t>{21, 22});
    CHECK(p.ref_ranges[1] == std::pair<int64_t, int64_t>{22, 23});

    RopePlan none = build_rope_plan(21, {});
    CHECK(none.ref_ranges.empty());

    RopePlan edit = build_rope_plan(21, {21});
    CHECK(edit.ref_ranges[0] == std::pair<int64_t, int64_t>{21, 42});

    CHECK_THROWS_AS(build_rope_plan(21, {0}), ContractError);
    CHECK_THROWS_AS(build_rope_plan(0, {}), ContractError);
}

TEST_CASE("rope plan ranges are disjoint and clear of the noisy range") {
    Rng rng(42);
    for (int rep = 0; rep < 200; ++rep) {
        int64_t f = rng.uniform_int(1, 40);
        std::vector<int64_t> lens;
        int64_t n_refs = rng.uniform_int(0, 4);
        for (int64_t i = 0; i < n_refs; ++i) lens.push_back(rng.uniform_int(1, 25));
        RopePlan p = build_rope_plan(f, lens);
        for (size_t i = 0; i < p.ref_ranges.size(); ++i) {
            auto [a0, a1] = p.ref_ranges[i];
            CHECK(a0 >= f);
            CHECK(a1 - a0 == lens[i]);
            for (size_t j = i + 1; j < p.ref_ranges.size(); ++j) {
                auto [b0, b1] = p.ref_ranges[j];
                CHECK((a1 <= b0 || b1 <= a0));
            }
        }
    }
}

TEST_CASE("channel_concat stacks noisy channels first") {
    Rng rng(7);
    LatentVideo<double> noisy(Tensor<double>::randn({21, 48, 4, 4}, rng));
    LatentVideo<double> lr(Tensor<double>::randn({21, 48, 4, 4}, rng));
    LatentVideo<double> cat = channel_concat(noisy, lr);
    CHECK(cat.frames() == 21);
    CHECK(cat.channels() == 96);
    CHECK(cat.height() == 4);
    CHECK(cat.width() == 4);

    LatentVideo<double> recovered = slice_channels(cat, 0, 48);
    CHECK(max_abs_diff(recovered.data, noisy.data) == 0.0);
    LatentVideo<double> lr_part = slice_channels(cat, 48, 96);
    CHECK(max_abs_diff(lr_part.data, lr.data) == 0.0);

    LatentVideo<double> narrow(Tensor<double>::zeros({21, 48, 4, 3}));
    CHECK_THROWS_AS(channel_concat(noisy, narrow), ShapeError);
}

TEST_CASE("assemble_sequence token accounting and truncation round trip") {
    Rng rng(13);
    // noisy f=4 on a 2x2 grid, two single-frame ID references
    int64_t c = 12;
    Tensor<double> noisy_tokens = Tensor<double>::randn({4 * 2 * 2, c}, rng);
    ConditionBundle<double> bundle;
    bundle.id_images.push_back(LatentVideo<double>(Tensor<double>::randn({1, c, 2, 2}, rng)));
    bundle.id_images.push_back(LatentVideo<double>(Tensor<double>::randn({1, c, 2, 2}, rng)));
    RopePlan plan = build_rope_plan(4, {1, 1});
    TokenSequence<double> seq = assemble_sequence(noisy_tokens, 4, 2, 2, bundle, plan);
    CHECK(seq.tokens.dims[0] == 4 * 4 + 2 * 4);
    CHECK(seq.layout.segments.size() == 3);
    CHECK(seq.layout.segments[1].frame_index_base == 4);
    CHECK(seq.layout.segments[2].frame_index_base == 5);

    Tensor<double> trunc = truncate_sequence(seq);
    CHECK(max_abs_diff(trunc, noisy_tokens) == 0.0);

    // no references: the sequence is the noisy tokens, one segment
    ConditionBundle<double> empty;
    TokenSequence<double> only = assemble_sequence(noisy_tokens, 4, 2, 2, empty,
                                                   build_rope_plan(4, {}));
    CHECK(only.layout.segments.size() == 1);
    CHECK(max_abs_diff(only.tokens, noisy_tokens) == 0.0);

    // plan mismatch is a contract violation
    CHECK_THROWS_AS(assemble_sequence(noisy_tokens, 4, 2, 2, bundle, build_rope_plan(4, {1})),
                    ContractError);
}

TEST_CASE("assemble/truncate identity over random bundles") {
    Rng rng(29);
    for (int rep = 0; rep < 20; ++rep) {
        int64_t f = rng.uniform_int(1, 5);
        int64_t g = rng.uniform_int(1, 3);
        int64_t c = 6;
        Tensor<double> noisy = Tensor<double>::randn({f * g * g, c}, rng);
        ConditionBundle<double> bundle;
        int64_t ids = rng.uniform_int(0, 3);
        for (int64_t i = 0; i < ids; ++i)
            bundle.id_images.push_back(LatentVideo<double>(Tensor<double>::randn({1, c, g, g}, rng)));
        if (rng.bernoulli(0.5))
            bundle.ref_video = LatentVideo<double>(Tensor<double>::randn({f, c, g, g}, rng));
        TokenSequence<double> seq =
            assemble_sequence(noisy, f, g, g, bundle, build_rope_plan(f, bundle.ref_frame_lengths()));
        CHECK(max_abs_diff(truncate_sequence(seq), noisy) == 0.0);
        CHECK(seq.tokens.dims[0] == seq.layout.total_tokens);
    }
}

TEST_CASE("encode_text determinism and null prompt") {
    TextEncoderConfig cfg;
    Tensor<double> a = encode_text<double>("a red square over a blue gradient", cfg);
    Tensor<double> b = encode_text<double>("a red square over a blue gradient", cfg);
    CHECK(max_abs_diff(a, b) == 0.0);

    Tensor<double> null1 = encode_text<double>("", cfg);
    Tensor<double> null2 = null_text_tokens<double>(cfg);
    CHECK(max_abs_diff(null1, null2) == 0.0);
    CHECK(null1.dims[0] == cfg.tokens);
    CHECK(null1.dims[1] == cfg.dim);

    // different prompts differ
    Tensor<double> c = encode_text<double>("a green disc", cfg);
    CHECK(max_abs_diff(a, c) > 0.0);
}

TEST_CASE("encode_text dropout rate sits near 10%") {
    TextEncoderConfig cfg;
    Rng rng(2026);
    Tensor<double> null_ref = null_text_tokens<double>(cfg);
    int fired = 0;
    for (int i = 0; i < 10000; ++i) {
        Tensor<double> t = encode_text<double>("some fixed prompt", cfg, true, &rng);
        if (max_abs_diff(t, null_ref) == 0.0) ++fired;
    }
    double rate = double(fired) / 10000.0;
    CHECK(rate >= 0.08);
    CHECK(rate <= 0.12);
}

TEST_CASE("layout rejects overlapping or noisy-range reference bases") {
    CHECK_THROWS_AS(make_layout(4, 2, 2,
                                {{Segment::Kind::id_image, 1, 2, 2, 2}}),
                    ContractError);
    CHECK_THROWS_AS(make_layout(4, 2, 2,
                                {{Segment::Kind::id_image, 2, 2, 2, 4},
                                 {Segment::Kind::id_image, 1, 2, 2, 5}}),
                    ContractError);
}

TEST_CASE("patchify/unpatchify round trip") {
    Rng rng(5);
    LatentVideo<double> z(Tensor<double>::randn({3, 7, 2, 4}, rng));
    Tensor<double> tok = patchify(z);
    CHECK(tok.dims[0] == 3 * 2 * 4);
    CHECK(tok.dims[1] == 7);
    LatentVideo<double> back = unpatchify(tok, 3, 2, 4);
    CHECK(max_abs_diff(back.data, z.data) == 0.0);
}
