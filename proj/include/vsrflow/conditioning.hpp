#pragma once

#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "vsrflow/autodiff.hpp"
#include "vsrflow/common.hpp"
#include "vsrflow/tensor.hpp"
#include "vsrflow/video.hpp"

namespace vsrflow {

enum class TaskKind { t2v, multi_id, edit };

inline const char* task_name(TaskKind t) {
    switch (t) {
        case TaskKind::t2v: return "t2v";
        case TaskKind::multi_id: return "multi-id";
        case TaskKind::edit: return "edit";
    }
    return "?";
}

inline TaskKind parse_task(const std::string& s) {
    if (s == "t2v") return TaskKind::t2v;
    if (s == "multi-id" || s == "multi_id") return TaskKind::multi_id;
    if (s == "edit") return TaskKind::edit;
    throw ConfigError("unknown task kind: " + s);
}

// Frame-index allocation: noisy tokens get [0, f); reference i gets the
// contiguous half-open range starting at f + sum of earlier lengths, so all
// ranges stay pairwise disjoint.
struct RopePlan {
    int64_t noisy_frames = 0;
    std::vector<std::pair<int64_t, int64_t>> ref_ranges;  // half-open
};

inline RopePlan build_rope_plan(int64_t frames, const std::vector<int64_t>& ref_lengths) {
    check_contract(frames >= 1, "rope plan: need at least one noisy frame");
    RopePlan plan;
    plan.noisy_frames = frames;
    int64_t next = frames;
    for (int64_t k : ref_lengths) {
        check_contract(k >= 1, "rope plan: zero-length reference");
        plan.ref_ranges.emplace_back(next, next + k);
        next += k;
    }
    return plan;
}

// The full condition set: text tokens, zero or more single-frame ID image
// latents, an optional reference-video latent, the (upsampled) LR latent and
// the noise-augmentation micro condition.
template <class T>
struct ConditionBundle {
    Tensor<T> text_tokens;  // [n_text, text_dim]
    std::vector<LatentVideo<T>> id_images;
    std::optional<LatentVideo<T>> ref_video;
    LatentVideo<T> lr_latent;
    int64_t noise_aug_step = 0;
    double fps = 8.0;
    double aspect = 1.0;
    // optional explicit rope frame base per id image (see SegmentShape)
    std::vector<int64_t> id_frame_base;

    bool has_refs() const { return !id_images.empty() || ref_video.has_value(); }

    std::vector<int64_t> ref_frame_lengths() const {
        std::vector<int64_t> lens;
        for (const auto& id : id_images) lens.push_back(id.frames());
        if (ref_video) lens.push_back(ref_video->frames());
        return lens;
    }

    // same bundle with every visual reference dropped (the phi_ref condition)
    ConditionBundle without_refs() const {
        ConditionBundle b = *this;
        b.id_images.clear();
        b.ref_video.reset();
        return b;
    }
};

// --- toy text encoder -------------------------------------------------------

struct TextEncoderConfig {
    int64_t tokens = 32;
    int64_t dim = 64;
    int64_t vocab = 4096;
    uint64_t seed = 101;
    double dropout_prob = 0.1;
};

namespace detail {
template <class T>
inline void fill_embedding_row(T* out, int64_t dim, uint64_t table_seed, int64_t index) {
    Rng rng = Rng::derive(table_seed, uint64_t(index) + 0x7e37ULL);
    for (int64_t i = 0; i < dim; ++i) out[i] = T(rng.normal());
}
}  // namespace detail

// Deterministic hash-into-table embedding. Row 0 is the designated null-prompt
// row; an empty prompt, a fired dropout draw, and padding all map to it.
template <class T>
inline Tensor<T> encode_text(const std::string& prompt, const TextEncoderConfig& cfg,
                             bool dropout = false, Rng* rng = nullptr) {
    Tensor<T> out = Tensor<T>::zeros({cfg.tokens, cfg.dim});
    bool null_prompt = prompt.empty();
    if (dropout && rng != nullptr && rng->bernoulli(cfg.dropout_prob)) null_prompt = true;

    std::vector<int64_t> ids;
    if (!null_prompt) {
        std::istringstream is(prompt);
        std::string word;
        while (is >> word && int64_t(ids.size()) < cfg.tokens)
            ids.push_back(1 + int64_t(hash_str(word) % uint64_t(cfg.vocab - 1)));
    }
    while (int64_t(ids.size()) < cfg.tokens) ids.push_back(0);
    for (int64_t r = 0; r < cfg.tokens; ++r)
        detail::fill_embedding_row(out.data.data() + r * cfg.dim, cfg.dim, cfg.seed,
                                   ids[size_t(r)]);
    return out;
}

template <class T>
inline Tensor<T> null_text_tokens(const TextEncoderConfig& cfg) {
    return encode_text<T>("", cfg);
}

// --- pixel-aligned LR injection ---------------------------------------------

template <class T>
inline LatentVideo<T> channel_concat(const LatentVideo<T>& noisy, const LatentVideo<T>& lr) {
    check_shape(noisy.frames() == lr.frames() && noisy.height() == lr.height() &&
                    noisy.width() == lr.width(),
                "channel_concat: dims mismatch (did the LR latent skip the upsampler?)");
    int64_t f = noisy.frames(), cn = noisy.channels(), cl = lr.channels();
    int64_t h = noisy.height(), w = noisy.width();
    LatentVideo<T> out = LatentVideo<T>::zeros(f, cn + cl, h, w);
    for (int64_t fi = 0; fi < f; ++fi)
        for (int64_t y = 0; y < h; ++y)
            for (int64_t x = 0; x < w; ++x) {
                for (int64_t c = 0; c < cn; ++c) out.data.at4(fi, c, y, x) = noisy.data.at4(fi, c, y, x);
                for (int64_t c = 0; c < cl; ++c)
                    out.data.at4(fi, cn + c, y, x) = lr.data.at4(fi, c, y, x);
            }
    return out;
}

template <class T>
inline LatentVideo<T> slice_channels(const LatentVideo<T>& z, int64_t c0, int64_t c1) {
    check_shape(0 <= c0 && c0 < c1 && c1 <= z.channels(), "slice_channels: range out of bounds");
    LatentVideo<T> out = LatentVideo<T>::zeros(z.frames(), c1 - c0, z.height(), z.width());
    for (int64_t fi = 0; fi < z.frames(); ++fi)
        for (int64_t c = c0; c < c1; ++c)
            for (int64_t y = 0; y < z.height(); ++y)
                for (int64_t x = 0; x < z.width(); ++x)
                    out.data.at4(fi, c - c0, y, x) = z.data.at4(fi, c, y, x);
    return out;
}

// --- tokenization and the unified sequence -----------------------------------

// [f, c, h, w] -> [f*h*w, c], frame-major then row-major sites
template <class T>
inline Tensor<T> patchify(const LatentVideo<T>& z) {
    int64_t f = z.frames(), c = z.channels(), h = z.height(), w = z.width();
    Tensor<T> out = Tensor<T>::zeros({f * h * w, c});
    int64_t r = 0;
    for (int64_t fi = 0; fi < f; ++fi)
        for (int64_t y = 0; y < h; ++y)
            for (int64_t x = 0; x < w; ++x, ++r)
                for (int64_t ci = 0; ci < c; ++ci) out.at2(r, ci) = z.data.at4(fi, ci, y, x);
    return out;
}

template <class T>
inline LatentVideo<T> unpatchify(const Tensor<T>& tokens, int64_t f, int64_t h, int64_t w) {
    check_shape(tokens.rank() == 2 && tokens.dims[0] == f * h * w,
                "unpatchify: token count does not match grid");
    int64_t c = tokens.dims[1];
    LatentVideo<T> out = LatentVideo<T>::zeros(f, c, h, w);
    int64_t r = 0;
    for (int64_t fi = 0; fi < f; ++fi)
        for (int64_t y = 0; y < h; ++y)
            for (int64_t x = 0; x < w; ++x, ++r)
                for (int64_t ci = 0; ci < c; ++ci) out.data.at4(fi, ci, y, x) = tokens.at2(r, ci);
    return out;
}

struct Segment {
    enum class Kind { noisy, id_image, ref_video, lr_tokens };
    Kind kind = Kind::noisy;
    int64_t frames = 0;
    int64_t grid_h = 0, grid_w = 0;
    int64_t token_offset = 0;
    int64_t frame_index_base = 0;  // rope frame index of the segment's first frame

    int64_t tokens_per_frame() const { return grid_h * grid_w; }
    int64_t token_count() const { return frames * tokens_per_frame(); }
};

struct SequenceLayout {
    std::vector<Segment> segments;
    RopePlan plan;
    int64_t total_tokens = 0;

    int64_t noisy_tokens() const { return segments.empty() ? 0 : segments[0].token_count(); }

    // one (start, length) span per (segment, frame) for per-frame attention
    std::vector<std::pair<int64_t, int64_t>> frame_spans() const {
        std::vector<std::pair<int64_t, int64_t>> spans;
        for (const Segment& s : segments)
            for (int64_t fi = 0; fi < s.frames; ++fi)
                spans.emplace_back(s.token_offset + fi * s.tokens_per_frame(),
                                   s.tokens_per_frame());
        return spans;
    }

    // rope (frame, row, col) triple per token
    std::vector<Pos3> positions() const {
        std::vector<Pos3> pos(size_t(total_tokens));
        for (const Segment& s : segments) {
            int64_t r = s.token_offset;
            for (int64_t fi = 0; fi < s.frames; ++fi)
                for (int64_t y = 0; y < s.grid_h; ++y)
                    for (int64_t x = 0; x < s.grid_w; ++x, ++r)
                        pos[size_t(r)] = Pos3{s.frame_index_base + fi, y, x};
        }
        return pos;
    }
};

struct SegmentShape {
    Segment::Kind kind;
    int64_t frames, grid_h, grid_w;
    // explicit rope frame base; -1 allocates contiguously after [0, f). An
    // explicit base lets a reference keep its indices when the list order
    // changes, which is what makes output permutation-equivariance testable.
    int64_t frame_base = -1;
};

// Segment order is fixed: noisy first, then the references in plan order,
// then (in full token-concat mode) the LR tokens.
inline SequenceLayout make_layout(int64_t noisy_frames, int64_t grid_h, int64_t grid_w,
                                  const std::vector<SegmentShape>& refs) {
    check_contract(noisy_frames >= 1, "layout: need at least one noisy frame");
    SequenceLayout layout;
    layout.plan.noisy_frames = noisy_frames;
    int64_t next = noisy_frames;
    for (const SegmentShape& r : refs) {
        check_contract(r.frames >= 1, "layout: zero-length reference");
        int64_t base = r.frame_base >= 0 ? r.frame_base : next;
        check_contract(base >= noisy_frames, "layout: reference range intersects the noisy range");
        layout.plan.ref_ranges.emplace_back(base, base + r.frames);
        next = std::max(next, base + r.frames);
    }
    for (size_t i = 0; i < layout.plan.ref_ranges.size(); ++i)
        for (size_t j = i + 1; j < layout.plan.ref_ranges.size(); ++j) {
            auto [a0, a1] = layout.plan.ref_ranges[i];
            auto [b0, b1] = layout.plan.ref_ranges[j];
            check_contract(a1 <= b0 || b1 <= a0, "layout: overlapping reference ranges");
        }
    Segment noisy;
    noisy.kind = Segment::Kind::noisy;
    noisy.frames = noisy_frames;
    noisy.grid_h = grid_h;
    noisy.grid_w = grid_w;
    noisy.token_offset = 0;
    noisy.frame_index_base = 0;
    layout.segments.push_back(noisy);
    int64_t offset = noisy.token_count();
    for (size_t i = 0; i < refs.size(); ++i) {
        Segment s;
        s.kind = refs[i].kind;
        s.frames = refs[i].frames;
        s.grid_h = refs[i].grid_h;
        s.grid_w = refs[i].grid_w;
        s.token_offset = offset;
        s.frame_index_base = layout.plan.ref_ranges[i].first;
        layout.segments.push_back(s);
        offset += s.token_count();
    }
    layout.total_tokens = offset;
    return layout;
}

template <class T>
struct TokenSequence {
    Tensor<T> tokens;  // [total_tokens, d]
    SequenceLayout layout;
};

// Pure token-level assembly: noisy tokens, then ID images in list order, then
// the reference video. All parts must share the channel width.
template <class T>
inline TokenSequence<T> assemble_sequence(const Tensor<T>& noisy_tokens, int64_t noisy_frames,
                                          int64_t grid_h, int64_t grid_w,
                                          const ConditionBundle<T>& bundle, const RopePlan& plan) {
    check_shape(noisy_tokens.rank() == 2 &&
                    noisy_tokens.dims[0] == noisy_frames * grid_h * grid_w,
                "assemble: noisy token grid mismatch");
    std::vector<SegmentShape> refs;
    std::vector<Tensor<T>> parts{noisy_tokens};
    for (const auto& id : bundle.id_images) {
        check_contract(id.frames() == 1, "assemble: id image must be single-frame");
        refs.push_back({Segment::Kind::id_image, 1, id.height(), id.width()});
        parts.push_back(patchify(id));
    }
    if (bundle.ref_video) {
        refs.push_back({Segment::Kind::ref_video, bundle.ref_video->frames(),
                        bundle.ref_video->height(), bundle.ref_video->width()});
        parts.push_back(patchify(*bundle.ref_video));
    }
    SequenceLayout layout = make_layout(noisy_frames, grid_h, grid_w, refs);
    check_contract(layout.plan.noisy_frames == plan.noisy_frames &&
                       layout.plan.ref_ranges == plan.ref_ranges,
                   "assemble: plan does not match tokenized references");
    TokenSequence<T> seq;
    seq.layout = layout;
    int64_t d = noisy_tokens.dims[1], total = 0;
    for (const Tensor<T>& p : parts) {
        check_shape(p.dims[1] == d, "assemble: channel width mismatch across parts");
        total += p.dims[0];
    }
    seq.tokens = Tensor<T>::zeros({total, d});
    int64_t r = 0;
    for (const Tensor<T>& p : parts) {
        std::copy(p.data.begin(), p.data.end(), seq.tokens.data.begin() + r * d);
        r += p.dims[0];
    }
    return seq;
}

// Reference truncation: keep only the noisy span.
template <class T>
inline Tensor<T> truncate_sequence(const TokenSequence<T>& seq) {
    int64_t n = seq.layout.noisy_tokens(), d = seq.tokens.dims[1];
    Tensor<T> out = Tensor<T>::zeros({n, d});
    std::copy(seq.tokens.data.begin(), seq.tokens.data.begin() + n * d, out.data.begin());
    return out;
}

}  // namespace vsrflow
