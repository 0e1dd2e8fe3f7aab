#pragma once

#include <cstdint>
#include <vector>

#include "vsrflow/common.hpp"
#include "vsrflow/tensor.hpp"
#include "vsrflow/video.hpp"

namespace vsrflow {

struct SamplerConfig {
    int64_t steps = 50;
    double shift = 1.0;
    double s_txt = 3.0;
    double s_ref = 1.0;
    int64_t n_ref = 15;
    uint64_t seed = 0;

    void validate() const {
        check_config(steps >= 1, "sampler: steps must be >= 1");
        check_config(shift > 0.0, "sampler: shift must be positive");
        check_config(n_ref >= 0 && n_ref <= steps, "sampler: n_ref out of [0, steps]");
    }
};

// N+1 strictly decreasing values from 1 to 0: the uniform grid u_j = 1 - j/N
// remapped by t = shift*u / (1 + (shift-1)*u). shift=1 is the identity.
inline std::vector<double> shift_timesteps(int64_t n, double shift) {
    check_config(n >= 1, "shift_timesteps: n must be >= 1");
    check_config(shift > 0.0, "shift_timesteps: shift must be positive");
    std::vector<double> grid(size_t(n) + 1);
    for (int64_t j = 0; j <= n; ++j) {
        double u = 1.0 - double(j) / double(n);
        grid[size_t(j)] = shift * u / (1.0 + (shift - 1.0) * u);
    }
    grid.front() = 1.0;
    grid.back() = 0.0;
    return grid;
}

// independent classifier-free guidance over the text and reference conditions
template <class T>
inline LatentVideo<T> cfg_combine(const LatentVideo<T>& full, const LatentVideo<T>& no_txt,
                                  const LatentVideo<T>& no_ref, double s_txt, double s_ref) {
    check_shape(full.data.same_shape(no_txt.data) && full.data.same_shape(no_ref.data),
                "cfg_combine: shape mismatch");
    LatentVideo<T> out = full;
    for (size_t i = 0; i < out.data.data.size(); ++i) {
        double f = double(full.data.data[i]);
        out.data.data[i] = T(f + s_txt * (f - double(no_txt.data.data[i])) +
                             s_ref * (f - double(no_ref.data.data[i])));
    }
    return out;
}

// reference guidance threshold: the reference scale applies to the first
// n_ref steps only
inline double rgt_scale(int64_t step_index, int64_t n_ref, double s_ref) {
    check_contract(step_index >= 0, "rgt_scale: negative step index");
    return step_index < n_ref ? s_ref : 0.0;
}

enum class Branch { full, no_text, no_ref };

template <class T>
class VelocityModel {
public:
    virtual ~VelocityModel() = default;
    virtual LatentVideo<T> velocity(const LatentVideo<T>& z, double t, Branch branch) = 0;
};

struct SampleTrace {
    int64_t model_calls = 0;
    int64_t no_ref_calls = 0;
};

// Pseudo-linear-multistep integration of dz/dt = -v over a descending grid:
// Euler for the first 3 steps, then vbar = (55 v_n - 59 v_{n-1} + 37 v_{n-2}
// - 9 v_{n-3}) / 24 with z advanced by (t_j - t_{j+1}) * vbar. Guidance
// branches whose effective scale is exactly zero are never evaluated.
template <class T>
inline LatentVideo<T> pndm_integrate(VelocityModel<T>& model, LatentVideo<T> z,
                                     const std::vector<double>& grid, double s_txt, double s_ref,
                                     int64_t n_ref, SampleTrace* trace = nullptr) {
    check_contract(grid.size() >= 2, "pndm: need at least one step");
    std::vector<Tensor<T>> history;
    for (size_t j = 0; j + 1 < grid.size(); ++j) {
        double t = grid[j];
        double dt = grid[j] - grid[j + 1];
        LatentVideo<T> v = model.velocity(z, t, Branch::full);
        if (trace) trace->model_calls++;
        if (s_txt != 0.0) {
            LatentVideo<T> v_nt = model.velocity(z, t, Branch::no_text);
            if (trace) trace->model_calls++;
            for (size_t i = 0; i < v.data.data.size(); ++i)
                v.data.data[i] += T(s_txt) * (v.data.data[i] - v_nt.data.data[i]);
        }
        double sr = rgt_scale(int64_t(j), n_ref, s_ref);
        if (sr != 0.0) {
            LatentVideo<T> v_nr = model.velocity(z, t, Branch::no_ref);
            if (trace) {
                trace->model_calls++;
                trace->no_ref_calls++;
            }
            for (size_t i = 0; i < v.data.data.size(); ++i)
                v.data.data[i] += T(sr) * (v.data.data[i] - v_nr.data.data[i]);
        }
        history.push_back(v.data);
        Tensor<T> vbar;
        if (history.size() < 4) {
            vbar = history.back();
        } else {
            size_t n = history.size();
            vbar = Tensor<T>::zeros(v.data.dims);
            for (size_t i = 0; i < vbar.data.size(); ++i)
                vbar.data[i] = (T(55) * history[n - 1].data[i] - T(59) * history[n - 2].data[i] +
                                T(37) * history[n - 3].data[i] - T(9) * history[n - 4].data[i]) /
                               T(24);
        }
        for (size_t i = 0; i < z.data.data.size(); ++i) z.data.data[i] += T(dt) * vbar.data[i];
        if (history.size() > 4) history.erase(history.begin());
        ensure_finite(z.data, "pndm step");
    }
    return z;
}

// Full run from seeded standard normal noise at t=1 down to t=0.
template <class T>
inline LatentVideo<T> pndm_sample(VelocityModel<T>& model, int64_t frames, int64_t channels,
                                  int64_t height, int64_t width, const SamplerConfig& cfg,
                                  SampleTrace* trace = nullptr) {
    cfg.validate();
    Rng rng = Rng::derive(cfg.seed, 0x5a4317eULL);
    LatentVideo<T> z(Tensor<T>::randn({frames, channels, height, width}, rng));
    std::vector<double> grid = shift_timesteps(cfg.steps, cfg.shift);
    return pndm_integrate(model, std::move(z), grid, cfg.s_txt, cfg.s_ref, cfg.n_ref, trace);
}

}  // namespace vsrflow
