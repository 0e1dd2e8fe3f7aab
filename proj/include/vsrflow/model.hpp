#pragma once

#include <cmath>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "vsrflow/autodiff.hpp"
#include "vsrflow/codec.hpp"
#include "vsrflow/common.hpp"
#include "vsrflow/conditioning.hpp"
#include "vsrflow/tensor.hpp"
#include "vsrflow/video.hpp"

namespace vsrflow {

enum class InjectionMode { unified, full_channel_concat, full_token_concat };

inline const char* injection_mode_name(InjectionMode m) {
    switch (m) {
        case InjectionMode::unified: return "unified";
        case InjectionMode::full_channel_concat: return "full_channel_concat";
        case InjectionMode::full_token_concat: return "full_token_concat";
    }
    return "?";
}

inline InjectionMode parse_injection_mode(const std::string& s) {
    if (s == "unified") return InjectionMode::unified;
    if (s == "full_channel_concat") return InjectionMode::full_channel_concat;
    if (s == "full_token_concat") return InjectionMode::full_token_concat;
    throw ConfigError("unknown injection mode: " + s);
}

struct ModelConfig {
    int64_t model_dim = 96;
    int64_t heads = 4;
    int64_t blocks = 4;
    double rope_base = 10000.0;
    InjectionMode injection = InjectionMode::unified;
    bool base_mode = false;  // text->video generator: no LR input, no references
    int64_t latent_channels = 48;
    int64_t text_dim = 64;
    int64_t max_channel_refs = 3;  // reference slots in full_channel_concat mode

    int64_t head_dim() const { return model_dim / heads; }
    int64_t ffn_dim() const { return 4 * model_dim; }

    void validate() const {
        check_config(model_dim > 0 && heads > 0 && blocks > 0, "model: positive dims required");
        check_config(model_dim % heads == 0, "model: model_dim must divide by heads");
        check_config(head_dim() % 6 == 0, "model: head_dim must divide by 6 (3 rope axes, paired)");
    }

    int64_t input_channels() const {
        if (base_mode) return latent_channels;
        switch (injection) {
            case InjectionMode::unified: return 2 * latent_channels;
            case InjectionMode::full_channel_concat:
                return (2 + max_channel_refs) * latent_channels;
            case InjectionMode::full_token_concat: return latent_channels;
        }
        return 0;
    }
};

struct ModulationInput {
    double diffusion_t = 0.0;
    int64_t noise_aug_step = 0;
    double fps = 8.0;
    double aspect = 1.0;

    void validate() const {
        check_contract(diffusion_t >= 0.0 && diffusion_t <= 1.0, "modulation: t out of [0,1]");
        check_contract(noise_aug_step >= 0 && noise_aug_step <= 1000,
                       "modulation: noise_aug_step out of [0,1000]");
    }
};

template <class T>
using ParamStore = std::map<std::string, Tensor<T>>;

namespace detail {

inline std::map<std::string, std::vector<int64_t>> param_shapes(const ModelConfig& cfg) {
    cfg.validate();
    int64_t d = cfg.model_dim, c = cfg.latent_channels;
    std::map<std::string, std::vector<int64_t>> s;
    s["patch_embed.w"] = {cfg.input_channels(), d};
    s["patch_embed.b"] = {d};
    if (!cfg.base_mode && cfg.injection != InjectionMode::full_channel_concat) {
        s["ref_embed.w"] = {c, d};
        s["ref_embed.b"] = {d};
    }
    if (!cfg.base_mode && cfg.injection == InjectionMode::full_token_concat) {
        s["lr_embed.w"] = {c, d};
        s["lr_embed.b"] = {d};
    }
    s["text_proj.w"] = {cfg.text_dim, d};
    s["text_proj.b"] = {d};
    s["mod.fc1.w"] = {d, d};
    s["mod.fc1.b"] = {d};
    s["mod.fc2.w"] = {d, d};
    s["mod.fc2.b"] = {d};
    for (int64_t b = 0; b < cfg.blocks; ++b) {
        std::string p = "blk" + std::to_string(b) + ".";
        s[p + "ssa.qkv.w"] = {d, 3 * d};
        s[p + "ssa.qkv.b"] = {3 * d};
        s[p + "ssa.out.w"] = {d, d};
        s[p + "ssa.out.b"] = {d};
        s[p + "sca.q.w"] = {d, d};
        s[p + "sca.q.b"] = {d};
        s[p + "sca.kv.w"] = {d, 2 * d};
        s[p + "sca.kv.b"] = {2 * d};
        s[p + "sca.out.w"] = {d, d};
        s[p + "sca.out.b"] = {d};
        s[p + "tsa.qkv.w"] = {d, 3 * d};
        s[p + "tsa.qkv.b"] = {3 * d};
        s[p + "tsa.out.w"] = {d, d};
        s[p + "tsa.out.b"] = {d};
        s[p + "ffn.fc1.w"] = {d, cfg.ffn_dim()};
        s[p + "ffn.fc1.b"] = {cfg.ffn_dim()};
        s[p + "ffn.fc2.w"] = {cfg.ffn_dim(), d};
        s[p + "ffn.fc2.b"] = {d};
        s[p + "adaln.w"] = {d, 12 * d};
        s[p + "adaln.b"] = {12 * d};
    }
    s["final.adaln.w"] = {d, 2 * d};
    s["final.adaln.b"] = {2 * d};
    s["final.head.w"] = {d, c};
    s["final.head.b"] = {c};
    return s;
}

inline bool zero_init_name(const std::string& name) {
    return name.find("adaln") != std::string::npos || name.rfind("final.head", 0) == 0;
}

}  // namespace detail

// Gates, adaLN projections and the velocity head start at zero so a freshly
// initialized block is the identity map and depth extension stays stable.
template <class T>
inline ParamStore<T> training_init(const ModelConfig& cfg, uint64_t seed) {
    ParamStore<T> store;
    for (const auto& [name, dims] : detail::param_shapes(cfg)) {
        Rng rng = Rng::derive(seed, hash_str(name));
        bool bias = dims.size() == 1;
        if (bias || detail::zero_init_name(name)) {
            store[name] = Tensor<T>::zeros(dims);
        } else {
            store[name] = Tensor<T>::randn(dims, rng, T(0.02));
        }
    }
    return store;
}

// Every parameter nonzero: used by gradient tests so no path is gated off.
template <class T>
inline ParamStore<T> random_init(const ModelConfig& cfg, uint64_t seed, T scale = T(0.05)) {
    ParamStore<T> store;
    for (const auto& [name, dims] : detail::param_shapes(cfg)) {
        Rng rng = Rng::derive(seed, hash_str(name));
        store[name] = Tensor<T>::randn(dims, rng, scale);
    }
    return store;
}

// Binds a parameter store onto a tape; each parameter becomes a leaf on first
// use so the trainer can read gradients back by name.
template <class T>
class ParamSession {
public:
    using Ref = typename Tape<T>::Ref;

    ParamSession(Tape<T>& tape, const ParamStore<T>& store, bool trainable)
        : tape_(tape), store_(store), trainable_(trainable) {}

    Ref operator[](const std::string& name) {
        auto it = refs_.find(name);
        if (it != refs_.end()) return it->second;
        auto sit = store_.find(name);
        check_config(sit != store_.end(), "missing parameter: " + name);
        Ref r = tape_.leaf(sit->second, trainable_);
        refs_.emplace(name, r);
        return r;
    }

    const std::map<std::string, Ref>& refs() const { return refs_; }

private:
    Tape<T>& tape_;
    const ParamStore<T>& store_;
    bool trainable_;
    std::map<std::string, Ref> refs_;
};

namespace detail {

template <class T>
inline Tensor<T> sinusoid_row(double v, int64_t dim) {
    Tensor<T> out = Tensor<T>::zeros({1, dim});
    int64_t half = dim / 2;
    for (int64_t j = 0; j < half; ++j) {
        double freq = std::exp(-std::log(10000.0) * double(j) / double(half));
        out.data[size_t(j)] = T(std::cos(v * freq));
        out.data[size_t(half + j)] = T(std::sin(v * freq));
    }
    return out;
}

template <class T>
typename Tape<T>::Ref self_attention(Tape<T>& t, typename Tape<T>::Ref x, ParamSession<T>& ps,
                                     const std::string& prefix, const ModelConfig& cfg,
                                     const std::vector<std::pair<int64_t, int64_t>>& spans,
                                     const std::vector<Positions>& span_positions) {
    using Ref = typename Tape<T>::Ref;
    int64_t d = cfg.model_dim, dh = cfg.head_dim();
    T inv_sqrt = T(1.0 / std::sqrt(double(dh)));
    Ref qkv = t.linear(x, ps[prefix + ".qkv.w"], ps[prefix + ".qkv.b"]);
    std::vector<Ref> span_outs;
    for (size_t si = 0; si < spans.size(); ++si) {
        auto [start, len] = spans[si];
        std::vector<Ref> head_outs;
        for (int64_t h = 0; h < cfg.heads; ++h) {
            Ref q = t.block(qkv, start, start + len, h * dh, (h + 1) * dh);
            Ref k = t.block(qkv, start, start + len, d + h * dh, d + (h + 1) * dh);
            Ref v = t.block(qkv, start, start + len, 2 * d + h * dh, 2 * d + (h + 1) * dh);
            q = t.rope(q, span_positions[si], T(cfg.rope_base));
            k = t.rope(k, span_positions[si], T(cfg.rope_base));
            Ref probs = t.softmax_rows(t.scale(t.matmul_nt(q, k), inv_sqrt));
            head_outs.push_back(t.matmul(probs, v));
        }
        span_outs.push_back(t.concat_cols(head_outs));
    }
    Ref merged = span_outs.size() == 1 ? span_outs[0] : t.concat_rows(span_outs);
    return t.linear(merged, ps[prefix + ".out.w"], ps[prefix + ".out.b"]);
}

// Query rows attend text tokens independently, so per-frame cross-attention
// equals one pass over the whole sequence.
template <class T>
typename Tape<T>::Ref cross_attention(Tape<T>& t, typename Tape<T>::Ref x,
                                      typename Tape<T>::Ref text, ParamSession<T>& ps,
                                      const std::string& prefix, const ModelConfig& cfg) {
    using Ref = typename Tape<T>::Ref;
    int64_t d = cfg.model_dim, dh = cfg.head_dim();
    T inv_sqrt = T(1.0 / std::sqrt(double(dh)));
    int64_t n = t.val(x).dims[0], m = t.val(text).dims[0];
    Ref q = t.linear(x, ps[prefix + ".q.w"], ps[prefix + ".q.b"]);
    Ref kv = t.linear(text, ps[prefix + ".kv.w"], ps[prefix + ".kv.b"]);
    std::vector<Ref> head_outs;
    for (int64_t h = 0; h < cfg.heads; ++h) {
        Ref qh = t.block(q, 0, n, h * dh, (h + 1) * dh);
        Ref kh = t.block(kv, 0, m, h * dh, (h + 1) * dh);
        Ref vh = t.block(kv, 0, m, d + h * dh, d + (h + 1) * dh);
        Ref probs = t.softmax_rows(t.scale(t.matmul_nt(qh, kh), inv_sqrt));
        head_outs.push_back(t.matmul(probs, vh));
    }
    return t.linear(t.concat_cols(head_outs), ps[prefix + ".out.w"], ps[prefix + ".out.b"]);
}

}  // namespace detail

template <class T>
struct ModelForward {
    typename Tape<T>::Ref velocity_tokens;  // [noisy_tokens, latent_channels]
    SequenceLayout layout;
    int64_t frames = 0, grid_h = 0, grid_w = 0;
};

struct ForwardStats {
    int64_t sequence_tokens = 0;
};

// Full backbone on an existing tape. `noisy_tokens` is the patchified noisy
// latent [f*h*w, c]; conditioning enters per the configured injection mode and
// all reference tokens are truncated before the velocity head.
template <class T>
ModelForward<T> forward_tokens(Tape<T>& tape, const ModelConfig& cfg, ParamSession<T>& ps,
                               typename Tape<T>::Ref noisy_tokens, int64_t frames, int64_t grid_h,
                               int64_t grid_w, const ConditionBundle<T>& cond,
                               const ModulationInput& mod, ForwardStats* stats = nullptr) {
    using Ref = typename Tape<T>::Ref;
    cfg.validate();
    mod.validate();
    int64_t c = cfg.latent_channels, d = cfg.model_dim;
    int64_t n0 = frames * grid_h * grid_w;
    check_shape(tape.val(noisy_tokens).dims[0] == n0 && tape.val(noisy_tokens).dims[1] == c,
                "forward: noisy token matrix does not match grid/channels");
    check_shape(cond.text_tokens.rank() == 2 && cond.text_tokens.dims[1] == cfg.text_dim,
                "forward: text token width must equal text_dim");
    if (cfg.base_mode)
        check_contract(!cond.has_refs(), "forward: base model takes no visual references");
    for (const auto& id : cond.id_images)
        check_contract(id.frames() == 1, "forward: id image latents must be single-frame");
    if (cond.ref_video)
        check_contract(cond.ref_video->frames() <= frames,
                       "forward: reference video exceeds the noisy frame budget");

    auto lr_tokens_leaf = [&]() -> Ref {
        check_shape(cond.lr_latent.frames() == frames && cond.lr_latent.channels() == c &&
                        cond.lr_latent.height() == grid_h && cond.lr_latent.width() == grid_w,
                    "forward: LR latent must match the noisy latent (run the upsampler first)");
        return tape.leaf(patchify(cond.lr_latent), false);
    };

    // assemble the unified sequence
    std::vector<SegmentShape> ref_shapes;
    std::vector<Ref> parts;
    if (cfg.base_mode) {
        parts.push_back(tape.linear(noisy_tokens, ps["patch_embed.w"], ps["patch_embed.b"]));
    } else if (cfg.injection == InjectionMode::unified) {
        Ref x0 = tape.concat_cols({noisy_tokens, lr_tokens_leaf()});
        parts.push_back(tape.linear(x0, ps["patch_embed.w"], ps["patch_embed.b"]));
        for (size_t i = 0; i < cond.id_images.size(); ++i) {
            const auto& id = cond.id_images[i];
            int64_t base = i < cond.id_frame_base.size() ? cond.id_frame_base[i] : -1;
            ref_shapes.push_back({Segment::Kind::id_image, 1, id.height(), id.width(), base});
            parts.push_back(tape.linear(tape.leaf(patchify(id), false), ps["ref_embed.w"],
                                        ps["ref_embed.b"]));
        }
        if (cond.ref_video) {
            ref_shapes.push_back({Segment::Kind::ref_video, cond.ref_video->frames(),
                                  cond.ref_video->height(), cond.ref_video->width()});
            parts.push_back(tape.linear(tape.leaf(patchify(*cond.ref_video), false),
                                        ps["ref_embed.w"], ps["ref_embed.b"]));
        }
    } else if (cfg.injection == InjectionMode::full_channel_concat) {
        check_config(int64_t(cond.id_images.size()) + (cond.ref_video ? 1 : 0) <=
                         cfg.max_channel_refs,
                     "forward: more references than channel-concat slots");
        std::vector<Ref> cols{noisy_tokens, lr_tokens_leaf()};
        auto push_resized = [&](const LatentVideo<T>& z) {
            Tensor<T> spatial = resize_bilinear_4d(z.data, grid_h, grid_w);
            LatentVideo<T> tiled = LatentVideo<T>::zeros(frames, c, grid_h, grid_w);
            for (int64_t fi = 0; fi < frames; ++fi) {
                int64_t src = fi % spatial.dims[0];
                for (int64_t ci = 0; ci < c; ++ci)
                    for (int64_t y = 0; y < grid_h; ++y)
                        for (int64_t x = 0; x < grid_w; ++x)
                            tiled.data.at4(fi, ci, y, x) = spatial.at4(src, ci, y, x);
            }
            cols.push_back(tape.leaf(patchify(tiled), false));
        };
        for (const auto& id : cond.id_images) push_resized(id);
        if (cond.ref_video) push_resized(*cond.ref_video);
        while (int64_t(cols.size()) < 2 + cfg.max_channel_refs)
            cols.push_back(tape.leaf(Tensor<T>::zeros({n0, c}), false));
        parts.push_back(
            tape.linear(tape.concat_cols(cols), ps["patch_embed.w"], ps["patch_embed.b"]));
    } else {  // full_token_concat: the LR video enters as tokens too
        parts.push_back(tape.linear(noisy_tokens, ps["patch_embed.w"], ps["patch_embed.b"]));
        for (size_t i = 0; i < cond.id_images.size(); ++i) {
            const auto& id = cond.id_images[i];
            int64_t base = i < cond.id_frame_base.size() ? cond.id_frame_base[i] : -1;
            ref_shapes.push_back({Segment::Kind::id_image, 1, id.height(), id.width(), base});
            parts.push_back(tape.linear(tape.leaf(patchify(id), false), ps["ref_embed.w"],
                                        ps["ref_embed.b"]));
        }
        if (cond.ref_video) {
            ref_shapes.push_back({Segment::Kind::ref_video, cond.ref_video->frames(),
                                  cond.ref_video->height(), cond.ref_video->width()});
            parts.push_back(tape.linear(tape.leaf(patchify(*cond.ref_video), false),
                                        ps["ref_embed.w"], ps["ref_embed.b"]));
        }
        ref_shapes.push_back({Segment::Kind::lr_tokens, frames, grid_h, grid_w});
        parts.push_back(tape.linear(lr_tokens_leaf(), ps["lr_embed.w"], ps["lr_embed.b"]));
    }

    SequenceLayout layout = make_layout(frames, grid_h, grid_w, ref_shapes);
    Ref x = parts.size() == 1 ? parts[0] : tape.concat_rows(parts);
    check_shape(tape.val(x).dims[0] == layout.total_tokens, "forward: layout/sequence mismatch");
    if (stats) stats->sequence_tokens = layout.total_tokens;

    // text pathway
    Ref text = tape.linear(tape.leaf(cond.text_tokens, false), ps["text_proj.w"], ps["text_proj.b"]);

    // modulation vector from diffusion t plus the micro conditions
    Ref m = tape.leaf(detail::sinusoid_row<T>(mod.diffusion_t * 1000.0, d), false);
    m = tape.add(m, tape.leaf(detail::sinusoid_row<T>(double(mod.noise_aug_step), d), false));
    m = tape.add(m, tape.leaf(detail::sinusoid_row<T>(mod.fps, d), false));
    m = tape.add(m, tape.leaf(detail::sinusoid_row<T>(mod.aspect, d), false));
    m = tape.linear(tape.silu(tape.linear(m, ps["mod.fc1.w"], ps["mod.fc1.b"])), ps["mod.fc2.w"],
                    ps["mod.fc2.b"]);

    auto mod_slot = [&](Ref adaln, int64_t slot) {
        return tape.reshape(tape.block(adaln, 0, 1, slot * d, (slot + 1) * d), {d});
    };

    auto full_pos = std::make_shared<std::vector<Pos3>>(layout.positions());
    auto spans = layout.frame_spans();
    std::vector<Positions> span_pos;
    for (auto [start, len] : spans)
        span_pos.push_back(std::make_shared<std::vector<Pos3>>(full_pos->begin() + start,
                                                               full_pos->begin() + start + len));
    std::vector<std::pair<int64_t, int64_t>> whole{{0, layout.total_tokens}};
    std::vector<Positions> whole_pos{full_pos};

    for (int64_t b = 0; b < cfg.blocks; ++b) {
        std::string p = "blk" + std::to_string(b) + ".";
        Ref adaln = tape.linear(m, ps[p + "adaln.w"], ps[p + "adaln.b"]);
        auto sublayer = [&](int64_t slot_base, auto&& fn) {
            Ref h = tape.layer_norm_rows(x);
            h = tape.row_affine(h, mod_slot(adaln, slot_base + 1), mod_slot(adaln, slot_base + 0));
            Ref out = fn(h);
            x = tape.add(x, tape.row_gate(out, mod_slot(adaln, slot_base + 2)));
        };
        sublayer(0, [&](Ref h) {
            return detail::self_attention(tape, h, ps, p + "ssa", cfg, spans, span_pos);
        });
        sublayer(3, [&](Ref h) { return detail::cross_attention(tape, h, text, ps, p + "sca", cfg); });
        sublayer(6, [&](Ref h) {
            return detail::self_attention(tape, h, ps, p + "tsa", cfg, whole, whole_pos);
        });
        sublayer(9, [&](Ref h) {
            Ref ff = tape.gelu(tape.linear(h, ps[p + "ffn.fc1.w"], ps[p + "ffn.fc1.b"]));
            return tape.linear(ff, ps[p + "ffn.fc2.w"], ps[p + "ffn.fc2.b"]);
        });
    }

    // reference truncation, then the velocity head
    Ref noisy_out = layout.total_tokens == n0 ? x : tape.slice_rows(x, 0, n0);
    Ref adaln_f = tape.linear(m, ps["final.adaln.w"], ps["final.adaln.b"]);
    Ref h = tape.layer_norm_rows(noisy_out);
    h = tape.row_affine(h, mod_slot(adaln_f, 1), mod_slot(adaln_f, 0));
    Ref vel = tape.linear(h, ps["final.head.w"], ps["final.head.b"]);

    ModelForward<T> out;
    out.velocity_tokens = vel;
    out.layout = layout;
    out.frames = frames;
    out.grid_h = grid_h;
    out.grid_w = grid_w;
    return out;
}

template <class T>
ModelForward<T> forward_on_tape(Tape<T>& tape, const ModelConfig& cfg, ParamSession<T>& ps,
                                const LatentVideo<T>& noisy, const ConditionBundle<T>& cond,
                                const ModulationInput& mod, ForwardStats* stats = nullptr) {
    auto leaf = tape.leaf(patchify(noisy), false);
    return forward_tokens(tape, cfg, ps, leaf, noisy.frames(), noisy.height(), noisy.width(), cond,
                          mod, stats);
}

// Inference convenience: one forward pass, no gradients kept.
template <class T>
LatentVideo<T> predict_velocity(const ModelConfig& cfg, const ParamStore<T>& store,
                                const LatentVideo<T>& noisy, const ConditionBundle<T>& cond,
                                const ModulationInput& mod, ForwardStats* stats = nullptr) {
    Tape<T> tape;
    ParamSession<T> ps(tape, store, false);
    ModelForward<T> out = forward_on_tape(tape, cfg, ps, noisy, cond, mod, stats);
    return unpatchify(tape.val(out.velocity_tokens), out.frames, out.grid_h, out.grid_w);
}

}  // namespace vsrflow
