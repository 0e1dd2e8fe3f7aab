#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <utility>
#include <vector>

#include "vsrflow/common.hpp"
#include "vsrflow/tensor.hpp"

namespace vsrflow {

// (frame, row, col) index triple for rotary embedding
struct Pos3 {
    int64_t frame = 0;
    int64_t row = 0;
    int64_t col = 0;
};

using Positions = std::shared_ptr<const std::vector<Pos3>>;

// Rotates each row of x:[n, head_dim] by its position. head_dim is split into
// three equal axis groups (frame, row, col); pair j of an axis group turns by
// angle pos_axis * base^(-2j/axis_dim). sign=-1 undoes the rotation.
template <class T>
inline Tensor<T> rope_rotate(const Tensor<T>& x, const std::vector<Pos3>& pos, T base, int sign) {
    check_shape(x.rank() == 2, "rope: rank-2 input required");
    int64_t n = x.dims[0], dh = x.dims[1];
    check_config(dh % 6 == 0, "rope: head_dim must be divisible by 6");
    check_shape(int64_t(pos.size()) == n, "rope: positions/rows mismatch");
    int64_t adh = dh / 3;     // per-axis dims
    int64_t pairs = adh / 2;  // rotated pairs per axis
    Tensor<T> y = x;
    for (int64_t r = 0; r < n; ++r) {
        const int64_t axis_pos[3] = {pos[size_t(r)].frame, pos[size_t(r)].row, pos[size_t(r)].col};
        T* row = y.data.data() + r * dh;
        for (int axis = 0; axis < 3; ++axis) {
            T* seg = row + axis * adh;
            for (int64_t j = 0; j < pairs; ++j) {
                double freq = std::pow(double(base), -2.0 * double(j) / double(adh));
                double theta = double(sign) * double(axis_pos[axis]) * freq;
                T c = T(std::cos(theta)), s = T(std::sin(theta));
                T a = seg[2 * j], b = seg[2 * j + 1];
                seg[2 * j] = a * c - b * s;
                seg[2 * j + 1] = a * s + b * c;
            }
        }
    }
    ensure_finite(y, "rope");
    return y;
}

// Reverse-mode tape. One forward/backward pass owns a tape; it is discarded
// afterwards. Nodes are appended in topological order, so backward is a single
// reverse sweep.
template <class T>
class Tape {
public:
    using Ref = int32_t;

    Ref leaf(Tensor<T> v, bool requires_grad) {
        return push(std::move(v), requires_grad, {});
    }
    Ref leaf(const Tensor<T>& v) { return leaf(v, v.requires_grad); }

    const Tensor<T>& val(Ref id) const { return nodes_[size_t(id)].val; }

    const Tensor<T>& grad(Ref id) const {
        const Node& n = nodes_[size_t(id)];
        check_contract(!n.grad.data.empty(), "grad: no gradient accumulated for node");
        return n.grad;
    }

    bool has_grad(Ref id) const { return !nodes_[size_t(id)].grad.data.empty(); }

    // zero tensor when the node was never reached by backward
    Tensor<T> grad_or_zero(Ref id) const {
        const Node& n = nodes_[size_t(id)];
        return n.grad.data.empty() ? Tensor<T>::zeros(n.val.dims) : n.grad;
    }

    T scalar(Ref id) const {
        check_contract(val(id).numel() == 1, "scalar: node is not scalar");
        return val(id).data[0];
    }

    Ref add(Ref a, Ref b) {
        const Tensor<T>&va = val(a), &vb = val(b);
        check_shape(va.same_shape(vb), "add: shape mismatch");
        Tensor<T> out = va;
        for (size_t i = 0; i < out.data.size(); ++i) out.data[i] += vb.data[i];
        return push(std::move(out), needs(a) || needs(b), [a, b](Tape& t, const Tensor<T>& g) {
            t.accum(a, g);
            t.accum(b, g);
        });
    }

    Ref sub(Ref a, Ref b) {
        const Tensor<T>&va = val(a), &vb = val(b);
        check_shape(va.same_shape(vb), "sub: shape mismatch");
        Tensor<T> out = va;
        for (size_t i = 0; i < out.data.size(); ++i) out.data[i] -= vb.data[i];
        return push(std::move(out), needs(a) || needs(b), [a, b](Tape& t, const Tensor<T>& g) {
            t.accum(a, g);
            Tensor<T> ng = g;
            for (T& v : ng.data) v = -v;
            t.accum(b, ng);
        });
    }

    Ref mul(Ref a, Ref b) {
        const Tensor<T>&va = val(a), &vb = val(b);
        check_shape(va.same_shape(vb), "mul: shape mismatch");
        Tensor<T> out = va;
        for (size_t i = 0; i < out.data.size(); ++i) out.data[i] *= vb.data[i];
        return push(std::move(out), needs(a) || needs(b), [a, b](Tape& t, const Tensor<T>& g) {
            Tensor<T> ga = g, gb = g;
            const Tensor<T>&xa = t.val(a), &xb = t.val(b);
            for (size_t i = 0; i < g.data.size(); ++i) {
                ga.data[i] *= xb.data[i];
                gb.data[i] *= xa.data[i];
            }
            t.accum(a, ga);
            t.accum(b, gb);
        });
    }

    Ref scale(Ref a, T s) {
        Tensor<T> out = val(a);
        for (T& v : out.data) v *= s;
        return push(std::move(out), needs(a), [a, s](Tape& t, const Tensor<T>& g) {
            Tensor<T> ga = g;
            for (T& v : ga.data) v *= s;
            t.accum(a, ga);
        });
    }

    Ref matmul(Ref a, Ref b) {
        Tensor<T> out = vsrflow::matmul(val(a), val(b));
        return push(std::move(out), needs(a) || needs(b), [a, b](Tape& t, const Tensor<T>& g) {
            t.accum(a, vsrflow::matmul_nt(g, t.val(b)));
            t.accum(b, vsrflow::matmul_tn(t.val(a), g));
        });
    }

    // a @ b^T
    Ref matmul_nt(Ref a, Ref b) {
        Tensor<T> out = vsrflow::matmul_nt(val(a), val(b));
        return push(std::move(out), needs(a) || needs(b), [a, b](Tape& t, const Tensor<T>& g) {
            t.accum(a, vsrflow::matmul(g, t.val(b)));
            t.accum(b, vsrflow::matmul_tn(g, t.val(a)));
        });
    }

    // x:[n,d] + bias[d] per row
    Ref bias_add(Ref x, Ref b) {
        const Tensor<T>&vx = val(x), &vb = val(b);
        check_shape(vx.rank() == 2 && vb.rank() == 1 && vx.dims[1] == vb.dims[0],
                    "bias_add: want [n,d] + [d]");
        Tensor<T> out = vx;
        int64_t n = vx.dims[0], d = vx.dims[1];
        for (int64_t r = 0; r < n; ++r)
            for (int64_t c = 0; c < d; ++c) out.data[size_t(r * d + c)] += vb.data[size_t(c)];
        return push(std::move(out), needs(x) || needs(b), [x, b, n, d](Tape& t, const Tensor<T>& g) {
            t.accum(x, g);
            Tensor<T> gb = Tensor<T>::zeros({d});
            for (int64_t r = 0; r < n; ++r)
                for (int64_t c = 0; c < d; ++c) gb.data[size_t(c)] += g.data[size_t(r * d + c)];
            t.accum(b, gb);
        });
    }

    Ref linear(Ref x, Ref w, Ref b) { return bias_add(matmul(x, w), b); }

    // softmax over the last dim of a matrix
    Ref softmax_rows(Ref x) {
        check_shape(val(x).rank() == 2, "softmax_rows: rank-2 input required");
        Tensor<T> out = vsrflow::softmax(val(x), val(x).rank() - 1);
        return push(std::move(out), needs(x), [x, self = next_id()](Tape& t, const Tensor<T>& g) {
            const Tensor<T>& y = t.val(self);
            int64_t n = y.dims[0], d = y.dims[1];
            Tensor<T> gx = Tensor<T>::zeros(y.dims);
            for (int64_t r = 0; r < n; ++r) {
                const T* yr = y.data.data() + r * d;
                const T* gr = g.data.data() + r * d;
                T dot = T(0);
                for (int64_t c = 0; c < d; ++c) dot += yr[c] * gr[c];
                T* o = gx.data.data() + r * d;
                for (int64_t c = 0; c < d; ++c) o[c] = (gr[c] - dot) * yr[c];
            }
            t.accum(x, gx);
        });
    }

    // non-affine layer norm over the last dim
    Ref layer_norm_rows(Ref x, T eps = T(1e-5)) {
        const Tensor<T>& vx = val(x);
        check_shape(vx.rank() == 2, "layer_norm: rank-2 input required");
        int64_t n = vx.dims[0], d = vx.dims[1];
        Tensor<T> out = vx;
        for (int64_t r = 0; r < n; ++r) {
            T* row = out.data.data() + r * d;
            T mu = T(0);
            for (int64_t c = 0; c < d; ++c) mu += row[c];
            mu /= T(d);
            T var = T(0);
            for (int64_t c = 0; c < d; ++c) var += (row[c] - mu) * (row[c] - mu);
            var /= T(d);
            T inv = T(1) / std::sqrt(var + eps);
            for (int64_t c = 0; c < d; ++c) row[c] = (row[c] - mu) * inv;
        }
        ensure_finite(out, "layer_norm");
        return push(std::move(out), needs(x), [x, n, d, eps, self = next_id()](Tape& t, const Tensor<T>& g) {
            // dx = inv/d * (d*g - sum(g) - y * sum(g*y)) with y the normalized output
            const Tensor<T>& y = t.val(self);
            const Tensor<T>& vx = t.val(x);
            Tensor<T> gx = Tensor<T>::zeros(y.dims);
            for (int64_t r = 0; r < n; ++r) {
                const T* xr = vx.data.data() + r * d;
                const T* yr = y.data.data() + r * d;
                const T* gr = g.data.data() + r * d;
                T mu = T(0);
                for (int64_t c = 0; c < d; ++c) mu += xr[c];
                mu /= T(d);
                T var = T(0);
                for (int64_t c = 0; c < d; ++c) var += (xr[c] - mu) * (xr[c] - mu);
                var /= T(d);
                T inv = T(1) / std::sqrt(var + eps);
                T gsum = T(0), gydot = T(0);
                for (int64_t c = 0; c < d; ++c) {
                    gsum += gr[c];
                    gydot += gr[c] * yr[c];
                }
                T* o = gx.data.data() + r * d;
                for (int64_t c = 0; c < d; ++c)
                    o[c] = inv / T(d) * (T(d) * gr[c] - gsum - yr[c] * gydot);
            }
            t.accum(x, gx);
        });
    }

    Ref silu(Ref x) {
        Tensor<T> out = val(x);
        for (T& v : out.data) {
            T s = T(1) / (T(1) + std::exp(-v));
            v = v * s;
        }
        ensure_finite(out, "silu");
        return push(std::move(out), needs(x), [x](Tape& t, const Tensor<T>& g) {
            const Tensor<T>& vx = t.val(x);
            Tensor<T> gx = g;
            for (size_t i = 0; i < gx.data.size(); ++i) {
                T v = vx.data[i];
                T s = T(1) / (T(1) + std::exp(-v));
                gx.data[i] *= s * (T(1) + v * (T(1) - s));
            }
            t.accum(x, gx);
        });
    }

    Ref gelu(Ref x) {
        Tensor<T> out = val(x);
        for (T& v : out.data) v = T(0.5) * v * (T(1) + std::erf(v / T(M_SQRT2)));
        ensure_finite(out, "gelu");
        return push(std::move(out), needs(x), [x](Tape& t, const Tensor<T>& g) {
            const Tensor<T>& vx = t.val(x);
            Tensor<T> gx = g;
            for (size_t i = 0; i < gx.data.size(); ++i) {
                T v = vx.data[i];
                T cdf = T(0.5) * (T(1) + std::erf(v / T(M_SQRT2)));
                T pdf = std::exp(T(-0.5) * v * v) / T(std::sqrt(2.0 * M_PI));
                gx.data[i] *= cdf + v * pdf;
            }
            t.accum(x, gx);
        });
    }

    Ref rope(Ref x, Positions pos, T base) {
        Tensor<T> out = rope_rotate(val(x), *pos, base, +1);
        return push(std::move(out), needs(x), [x, pos, base](Tape& t, const Tensor<T>& g) {
            t.accum(x, rope_rotate(g, *pos, base, -1));
        });
    }

    // submatrix [r0,r1) x [c0,c1)
    Ref block(Ref x, int64_t r0, int64_t r1, int64_t c0, int64_t c1) {
        const Tensor<T>& vx = val(x);
        check_shape(vx.rank() == 2, "block: rank-2 input required");
        int64_t n = vx.dims[0], d = vx.dims[1];
        check_shape(0 <= r0 && r0 < r1 && r1 <= n && 0 <= c0 && c0 < c1 && c1 <= d,
                    "block: range out of bounds");
        Tensor<T> out = Tensor<T>::zeros({r1 - r0, c1 - c0});
        for (int64_t r = r0; r < r1; ++r)
            for (int64_t c = c0; c < c1; ++c) out.at2(r - r0, c - c0) = vx.at2(r, c);
        return push(std::move(out), needs(x), [x, r0, r1, c0, c1, n, d](Tape& t, const Tensor<T>& g) {
            Tensor<T> gx = Tensor<T>::zeros({n, d});
            for (int64_t r = r0; r < r1; ++r)
                for (int64_t c = c0; c < c1; ++c) gx.at2(r, c) = g.at2(r - r0, c - c0);
            t.accum(x, gx);
        });
    }

    Ref slice_rows(Ref x, int64_t r0, int64_t r1) { return block(x, r0, r1, 0, val(x).dims[1]); }
    Ref slice_cols(Ref x, int64_t c0, int64_t c1) { return block(x, 0, val(x).dims[0], c0, c1); }

    Ref concat_rows(const std::vector<Ref>& parts) {
        check_contract(!parts.empty(), "concat_rows: empty list");
        int64_t d = val(parts[0]).dims[1], n = 0;
        bool ng = false;
        for (Ref p : parts) {
            check_shape(val(p).rank() == 2 && val(p).dims[1] == d, "concat_rows: column mismatch");
            n += val(p).dims[0];
            ng = ng || needs(p);
        }
        Tensor<T> out = Tensor<T>::zeros({n, d});
        int64_t r = 0;
        for (Ref p : parts) {
            const Tensor<T>& v = val(p);
            std::copy(v.data.begin(), v.data.end(), out.data.begin() + r * d);
            r += v.dims[0];
        }
        return push(std::move(out), ng, [parts, d](Tape& t, const Tensor<T>& g) {
            int64_t r = 0;
            for (Ref p : parts) {
                int64_t pn = t.val(p).dims[0];
                Tensor<T> gp = Tensor<T>::zeros({pn, d});
                std::copy(g.data.begin() + r * d, g.data.begin() + (r + pn) * d, gp.data.begin());
                t.accum(p, gp);
                r += pn;
            }
        });
    }

    Ref concat_cols(const std::vector<Ref>& parts) {
        check_contract(!parts.empty(), "concat_cols: empty list");
        int64_t n = val(parts[0]).dims[0], d = 0;
        bool ng = false;
        for (Ref p : parts) {
            check_shape(val(p).rank() == 2 && val(p).dims[0] == n, "concat_cols: row mismatch");
            d += val(p).dims[1];
            ng = ng || needs(p);
        }
        Tensor<T> out = Tensor<T>::zeros({n, d});
        int64_t c = 0;
        for (Ref p : parts) {
            const Tensor<T>& v = val(p);
            int64_t pd = v.dims[1];
            for (int64_t r = 0; r < n; ++r)
                std::copy(v.data.begin() + r * pd, v.data.begin() + (r + 1) * pd,
                          out.data.begin() + r * d + c);
            c += pd;
        }
        return push(std::move(out), ng, [parts, n, d](Tape& t, const Tensor<T>& g) {
            int64_t c = 0;
            for (Ref p : parts) {
                int64_t pd = t.val(p).dims[1];
                Tensor<T> gp = Tensor<T>::zeros({n, pd});
                for (int64_t r = 0; r < n; ++r)
                    std::copy(g.data.begin() + r * d + c, g.data.begin() + r * d + c + pd,
                              gp.data.begin() + r * pd);
                t.accum(p, gp);
                c += pd;
            }
        });
    }

    // x:[n,d] * (1 + s[d]) + sh[d], the adaLN modulation
    Ref row_affine(Ref x, Ref s, Ref sh) {
        const Tensor<T>&vx = val(x), &vs = val(s), &vsh = val(sh);
        check_shape(vx.rank() == 2 && vs.rank() == 1 && vsh.rank() == 1 &&
                        vx.dims[1] == vs.dims[0] && vx.dims[1] == vsh.dims[0],
                    "row_affine: want [n,d], [d], [d]");
        int64_t n = vx.dims[0], d = vx.dims[1];
        Tensor<T> out = vx;
        for (int64_t r = 0; r < n; ++r)
            for (int64_t c = 0; c < d; ++c)
                out.at2(r, c) = vx.at2(r, c) * (T(1) + vs.data[size_t(c)]) + vsh.data[size_t(c)];
        return push(std::move(out), needs(x) || needs(s) || needs(sh),
                    [x, s, sh, n, d](Tape& t, const Tensor<T>& g) {
                        const Tensor<T>&vx = t.val(x), &vs = t.val(s);
                        Tensor<T> gx = Tensor<T>::zeros({n, d});
                        Tensor<T> gs = Tensor<T>::zeros({d});
                        Tensor<T> gsh = Tensor<T>::zeros({d});
                        for (int64_t r = 0; r < n; ++r)
                            for (int64_t c = 0; c < d; ++c) {
                                T gv = g.at2(r, c);
                                gx.at2(r, c) = gv * (T(1) + vs.data[size_t(c)]);
                                gs.data[size_t(c)] += gv * vx.at2(r, c);
                                gsh.data[size_t(c)] += gv;
                            }
                        t.accum(x, gx);
                        t.accum(s, gs);
                        t.accum(sh, gsh);
                    });
    }

    // x:[n,d] * gatevec[d]
    Ref row_gate(Ref x, Ref gate) {
        const Tensor<T>&vx = val(x), &vg = val(gate);
        check_shape(vx.rank() == 2 && vg.rank() == 1 && vx.dims[1] == vg.dims[0],
                    "row_gate: want [n,d], [d]");
        int64_t n = vx.dims[0], d = vx.dims[1];
        Tensor<T> out = vx;
        for (int64_t r = 0; r < n; ++r)
            for (int64_t c = 0; c < d; ++c) out.at2(r, c) *= vg.data[size_t(c)];
        return push(std::move(out), needs(x) || needs(gate),
                    [x, gate, n, d](Tape& t, const Tensor<T>& g) {
                        const Tensor<T>&vx = t.val(x), &vg = t.val(gate);
                        Tensor<T> gx = Tensor<T>::zeros({n, d});
                        Tensor<T> gg = Tensor<T>::zeros({d});
                        for (int64_t r = 0; r < n; ++r)
                            for (int64_t c = 0; c < d; ++c) {
                                gx.at2(r, c) = g.at2(r, c) * vg.data[size_t(c)];
                                gg.data[size_t(c)] += g.at2(r, c) * vx.at2(r, c);
                            }
                        t.accum(x, gx);
                        t.accum(gate, gg);
                    });
    }

    Ref reshape(Ref x, std::vector<int64_t> dims) {
        const Tensor<T>& vx = val(x);
        check_shape(Tensor<T>::numel_of(dims) == vx.numel(), "reshape: element count mismatch");
        Tensor<T> out = vx;
        out.dims = dims;
        return push(std::move(out), needs(x), [x](Tape& t, const Tensor<T>& g) {
            Tensor<T> gx = g;
            gx.dims = t.val(x).dims;
            t.accum(x, gx);
        });
    }

    Ref mean_all(Ref x) {
        const Tensor<T>& vx = val(x);
        T m = T(0);
        for (const T& v : vx.data) m += v;
        int64_t n = vx.numel();
        m /= T(n);
        return push(Tensor<T>({1}, {m}), needs(x), [x, n](Tape& t, const Tensor<T>& g) {
            Tensor<T> gx = Tensor<T>::full(t.val(x).dims, g.data[0] / T(n));
            t.accum(x, gx);
        });
    }

    // mean((a-b)^2) over all elements
    Ref mse(Ref a, Ref b) {
        const Tensor<T>&va = val(a), &vb = val(b);
        check_shape(va.same_shape(vb), "mse: shape mismatch");
        int64_t n = va.numel();
        T acc = T(0);
        for (int64_t i = 0; i < n; ++i) {
            T d = va.data[size_t(i)] - vb.data[size_t(i)];
            acc += d * d;
        }
        acc /= T(n);
        if (!std::isfinite(double(acc))) throw NumericError("non-finite value after kernel: mse");
        return push(Tensor<T>({1}, {acc}), needs(a) || needs(b),
                    [a, b, n](Tape& t, const Tensor<T>& g) {
                        const Tensor<T>&va = t.val(a), &vb = t.val(b);
                        Tensor<T> ga = Tensor<T>::zeros(va.dims);
                        T k = T(2) * g.data[0] / T(n);
                        for (int64_t i = 0; i < n; ++i)
                            ga.data[size_t(i)] = k * (va.data[size_t(i)] - vb.data[size_t(i)]);
                        Tensor<T> gb = ga;
                        for (T& v : gb.data) v = -v;
                        t.accum(a, ga);
                        t.accum(b, gb);
                    });
    }

    void backward(Ref out) {
        check_contract(val(out).numel() == 1, "backward: output must be scalar");
        check_contract(nodes_[size_t(out)].needs, "backward: output does not require grad");
        nodes_[size_t(out)].grad = Tensor<T>({1}, {T(1)});
        for (int64_t id = out; id >= 0; --id) {
            Node& n = nodes_[size_t(id)];
            if (!n.needs || n.grad.data.empty() || !n.back) continue;
            n.back(*this, n.grad);
        }
        for (const Node& n : nodes_)
            if (!n.grad.data.empty()) ensure_finite(n.grad, "backward");
    }

    size_t size() const { return nodes_.size(); }

private:
    struct Node {
        Tensor<T> val;
        Tensor<T> grad;  // empty until touched
        bool needs = false;
        std::function<void(Tape&, const Tensor<T>&)> back;
    };

    bool needs(Ref id) const { return nodes_[size_t(id)].needs; }
    Ref next_id() const { return Ref(nodes_.size()); }

    Ref push(Tensor<T> v, bool needs_grad, std::function<void(Tape&, const Tensor<T>&)> back) {
        Node n;
        n.val = std::move(v);
        n.needs = needs_grad;
        if (needs_grad) n.back = std::move(back);
        nodes_.push_back(std::move(n));
        return Ref(nodes_.size() - 1);
    }

    void accum(Ref id, const Tensor<T>& g) {
        Node& n = nodes_[size_t(id)];
        if (!n.needs) return;
        if (n.grad.data.empty()) {
            n.grad = g;
        } else {
            check_shape(n.grad.same_shape(g), "accum: gradient shape mismatch");
            for (size_t i = 0; i < g.data.size(); ++i) n.grad.data[i] += g.data[i];
        }
    }

    std::vector<Node> nodes_;
};

struct GradReport {
    double max_abs_rel_error = 0.0;
    int64_t worst_index = -1;
    double analytic = 0.0;
    double numeric = 0.0;
};

// Compares the reverse-mode gradient of a scalar map against central
// differences (f(x+h) - f(x-h)) / 2h, elementwise. F: (Tape&, Ref) -> Ref.
template <class T, class F>
GradReport grad_check(F f, const Tensor<T>& x, T h, double denom_floor = 1e-6) {
    check_contract(h > T(0), "grad_check: h must be positive");
    Tensor<T> analytic;
    {
        Tape<T> tape;
        auto leaf = tape.leaf(x, true);
        auto out = f(tape, leaf);
        check_contract(tape.val(out).numel() == 1, "grad_check: map must be scalar-valued");
        tape.backward(out);
        analytic = tape.grad_or_zero(leaf);
    }
    GradReport rep;
    Tensor<T> probe = x;
    for (int64_t i = 0; i < x.numel(); ++i) {
        T orig = probe.data[size_t(i)];
        probe.data[size_t(i)] = orig + h;
        T fp;
        {
            Tape<T> tape;
            fp = tape.scalar(f(tape, tape.leaf(probe, false)));
        }
        probe.data[size_t(i)] = orig - h;
        T fm;
        {
            Tape<T> tape;
            fm = tape.scalar(f(tape, tape.leaf(probe, false)));
        }
        probe.data[size_t(i)] = orig;
        double numeric = (double(fp) - double(fm)) / (2.0 * double(h));
        double a = double(analytic.data[size_t(i)]);
        double rel = std::abs(a - numeric) / std::max({denom_floor, std::abs(a), std::abs(numeric)});
        if (rel > rep.max_abs_rel_error) {
            rep.max_abs_rel_error = rel;
            rep.worst_index = i;
            rep.analytic = a;
            rep.numeric = numeric;
        }
    }
    return rep;
}

}  // namespace vsrflow
