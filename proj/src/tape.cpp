#include "wnn/tape.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <string>

#include "wnn/transforms.hpp"

namespace wnn {

namespace {

const BoundaryMode kMode = BoundaryMode::Periodic;

void add_into(Tensor& dst, const Tensor& src) {
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

void check_feature_map(const Tensor& t, const char* op) {
    if (t.rank() != 4)
        throw ShapeMismatch(std::string(op) + " expects [batch, channels, "
                            "height, width], got " + t.shape_str());
}

void check_even_spatial(const Tensor& t, const char* op) {
    if (t.dim(2) % 2 != 0 || t.dim(3) % 2 != 0 || t.dim(2) < 2 || t.dim(3) < 2)
        throw InvalidExtent(std::string(op) + " needs even spatial extents, got " +
                            t.shape_str());
}

// Output range [lo, hi) for which in = out*stride + d - 1 stays inside
// [0, in_extent), given the fixed padding of 1 and tap position d in 0..2.
void conv_range(std::size_t d, std::size_t stride, std::size_t in_extent,
                std::size_t out_extent, std::size_t& lo, std::size_t& hi) {
    lo = d == 0 ? 1 : 0;
    hi = std::min(out_extent, (in_extent - d) / stride + 1);
}

// Splits a [B, 4C, m, n] channel stack into its four band blocks.
Bands2d unstack_bands(const Tensor& s) {
    const std::size_t B = s.dim(0), C4 = s.dim(1), m = s.dim(2), n = s.dim(3);
    const std::size_t C = C4 / 4, block = C * m * n;
    Bands2d b;
    Tensor* dst[4] = {&b.ll, &b.lh, &b.hl, &b.hh};
    for (Tensor* t : dst) *t = Tensor({B, C, m, n});
    for (std::size_t bi = 0; bi < B; ++bi)
        for (std::size_t g = 0; g < 4; ++g)
            std::memcpy(dst[g]->data() + bi * block,
                        s.data() + (bi * 4 + g) * block, block * sizeof(double));
    return b;
}

// Inverse of unstack_bands.
Tensor stack_bands(const Bands2d& b) {
    const std::size_t B = b.ll.dim(0), C = b.ll.dim(1), m = b.ll.dim(2),
                      n = b.ll.dim(3);
    const std::size_t block = C * m * n;
    Tensor s({B, 4 * C, m, n});
    const Tensor* src[4] = {&b.ll, &b.lh, &b.hl, &b.hh};
    for (std::size_t bi = 0; bi < B; ++bi)
        for (std::size_t g = 0; g < 4; ++g)
            std::memcpy(s.data() + (bi * 4 + g) * block,
                        src[g]->data() + bi * block, block * sizeof(double));
    return s;
}

}  // namespace

NodeId Tape::leaf(Tensor value) {
    Node n;
    n.grad = zeros_like(value);
    n.value = std::move(value);
    nodes_.push_back(std::move(n));
    return nodes_.size() - 1;
}

NodeId Tape::append(Tensor value,
                    std::function<void(Tape&, const Tensor&)> backward) {
    Node n;
    n.grad = zeros_like(value);
    n.value = std::move(value);
    n.backward = std::move(backward);
    nodes_.push_back(std::move(n));
    return nodes_.size() - 1;
}

void Tape::backward(NodeId root) {
    if (nodes_[root].value.size() != 1)
        throw ShapeMismatch("backward root must be a scalar node, got " +
                            nodes_[root].value.shape_str());
    nodes_[root].grad[0] = 1.0;
    for (std::size_t i = root + 1; i-- > 0;) {
        // Move the closure out so a reallocation of nodes_ during the call
        // (there is none, but cheap to be safe) cannot invalidate it.
        if (!nodes_[i].backward) continue;
        auto fn = std::move(nodes_[i].backward);
        fn(*this, nodes_[i].grad);
    }
}

void Tape::note_kink_margin(double m) { kink_margin_ = std::min(kink_margin_, m); }

NodeId conv2d(Tape& tape, NodeId x, NodeId weight, NodeId bias, int stride) {
    const Tensor& xv = tape.value(x);
    const Tensor& wv = tape.value(weight);
    const Tensor& bv = tape.value(bias);
    check_feature_map(xv, "conv2d");
    if (stride != 1 && stride != 2)
        throw InvalidConfig("conv2d stride must be 1 or 2, got " +
                            std::to_string(stride));
    if (wv.rank() != 4 || wv.dim(2) != 3 || wv.dim(3) != 3)
        throw ShapeMismatch("conv2d weight must be [out, in, 3, 3], got " +
                            wv.shape_str());
    if (wv.dim(1) != xv.dim(1))
        throw ShapeMismatch("conv2d weight expects " + std::to_string(wv.dim(1)) +
                            " input channels, input has " +
                            std::to_string(xv.dim(1)));
    if (bv.rank() != 1 || bv.dim(0) != wv.dim(0))
        throw ShapeMismatch("conv2d bias shape " + bv.shape_str() +
                            " does not match " + std::to_string(wv.dim(0)) +
                            " output channels");

    const std::size_t B = xv.dim(0), Ci = xv.dim(1), H = xv.dim(2), W = xv.dim(3);
    const std::size_t Co = wv.dim(0);
    const std::size_t s = static_cast<std::size_t>(stride);
    const std::size_t Ho = (H - 1) / s + 1, Wo = (W - 1) / s + 1;

    Tensor y({B, Co, Ho, Wo});
    for (std::size_t b = 0; b < B; ++b)
        for (std::size_t co = 0; co < Co; ++co) {
            double* yc = y.data() + (b * Co + co) * Ho * Wo;
            const double bval = bv[co];
            for (std::size_t i = 0; i < Ho * Wo; ++i) yc[i] = bval;
            for (std::size_t ci = 0; ci < Ci; ++ci) {
                const double* xc = xv.data() + (b * Ci + ci) * H * W;
                const double* wc = wv.data() + (co * Ci + ci) * 9;
                for (std::size_t di = 0; di < 3; ++di) {
                    std::size_t ilo, ihi;
                    conv_range(di, s, H, Ho, ilo, ihi);
                    for (std::size_t dj = 0; dj < 3; ++dj) {
                        std::size_t jlo, jhi;
                        conv_range(dj, s, W, Wo, jlo, jhi);
                        const double wt = wc[di * 3 + dj];
                        for (std::size_t i = ilo; i < ihi; ++i) {
                            const double* xr = xc + (i * s + di - 1) * W;
                            double* yr = yc + i * Wo;
                            // j*s + dj >= 1 on this range, so the index
                            // below never goes negative.
                            for (std::size_t j = jlo; j < jhi; ++j)
                                yr[j] += wt * xr[j * s + dj - 1];
                        }
                    }
                }
            }
        }

    return tape.append(std::move(y), [x, weight, bias, B, Ci, Co, H, W, Ho, Wo,
                                      s](Tape& t, const Tensor& g) {
        const Tensor& xv = t.value(x);
        const Tensor& wv = t.value(weight);
        Tensor& gx = t.grad(x);
        Tensor& gw = t.grad(weight);
        Tensor& gb = t.grad(bias);
        for (std::size_t b = 0; b < B; ++b)
            for (std::size_t co = 0; co < Co; ++co) {
                const double* gc = g.data() + (b * Co + co) * Ho * Wo;
                double acc = 0.0;
                for (std::size_t i = 0; i < Ho * Wo; ++i) acc += gc[i];
                gb[co] += acc;
                for (std::size_t ci = 0; ci < Ci; ++ci) {
                    const double* xc = xv.data() + (b * Ci + ci) * H * W;
                    double* gxc = gx.data() + (b * Ci + ci) * H * W;
                    const double* wc = wv.data() + (co * Ci + ci) * 9;
                    double* gwc = gw.data() + (co * Ci + ci) * 9;
                    for (std::size_t di = 0; di < 3; ++di) {
                        std::size_t ilo, ihi;
                        conv_range(di, s, H, Ho, ilo, ihi);
                        for (std::size_t dj = 0; dj < 3; ++dj) {
                            std::size_t jlo, jhi;
                            conv_range(dj, s, W, Wo, jlo, jhi);
                            const double wt = wc[di * 3 + dj];
                            double wacc = 0.0;
                            for (std::size_t i = ilo; i < ihi; ++i) {
                                const double* xr = xc + (i * s + di - 1) * W;
                                double* gxr = gxc + (i * s + di - 1) * W;
                                const double* gr = gc + i * Wo;
                                for (std::size_t j = jlo; j < jhi; ++j) {
                                    const std::size_t col = j * s + dj - 1;
                                    wacc += xr[col] * gr[j];
                                    gxr[col] += wt * gr[j];
                                }
                            }
                            gwc[di * 3 + dj] += wacc;
                        }
                    }
                }
            }
    });
}

NodeId relu(Tape& tape, NodeId x) {
    const Tensor& xv = tape.value(x);
    Tensor y = zeros_like(xv);
    double margin = 1e300;
    for (std::size_t i = 0; i < xv.size(); ++i) {
        y[i] = xv[i] > 0.0 ? xv[i] : 0.0;
        margin = std::min(margin, std::abs(xv[i]));
    }
    tape.note_kink_margin(margin);
    return tape.append(std::move(y), [x](Tape& t, const Tensor& g) {
        const Tensor& xv = t.value(x);
        Tensor& gx = t.grad(x);
        for (std::size_t i = 0; i < xv.size(); ++i)
            if (xv[i] > 0.0) gx[i] += g[i];
    });
}

NodeId maxpool2(Tape& tape, NodeId x) {
    const Tensor& xv = tape.value(x);
    check_feature_map(xv, "maxpool2");
    check_even_spatial(xv, "maxpool2");
    const std::size_t B = xv.dim(0), C = xv.dim(1), H = xv.dim(2), W = xv.dim(3);
    const std::size_t m = H / 2, n = W / 2;
    Tensor y({B, C, m, n});
    std::vector<std::size_t> argmax(y.size());
    double margin = 1e300;
    for (std::size_t bc = 0; bc < B * C; ++bc) {
        const double* xc = xv.data() + bc * H * W;
        double* yc = y.data() + bc * m * n;
        std::size_t* ac = argmax.data() + bc * m * n;
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                const std::size_t base = 2 * i * W + 2 * j;
                const std::size_t idx[4] = {base, base + 1, base + W,
                                            base + W + 1};
                std::size_t best = 0;
                for (std::size_t k = 1; k < 4; ++k)
                    if (xc[idx[k]] > xc[idx[best]]) best = k;
                double second = -1e300;
                for (std::size_t k = 0; k < 4; ++k)
                    if (k != best) second = std::max(second, xc[idx[k]]);
                // An exact tie at zero is a clamped plateau: every entry is a
                // hard zero whose producer tracks its own kink margin, so the
                // argmax cannot flip under a differential probe. Any other
                // near-tie is a live hazard and shrinks the margin.
                if (!(xc[idx[best]] == 0.0 && second == 0.0))
                    margin = std::min(margin, xc[idx[best]] - second);
                yc[i * n + j] = xc[idx[best]];
                ac[i * n + j] = bc * H * W + idx[best];
            }
    }
    tape.note_kink_margin(margin);
    return tape.append(std::move(y),
                       [x, argmax = std::move(argmax)](Tape& t, const Tensor& g) {
                           Tensor& gx = t.grad(x);
                           for (std::size_t i = 0; i < g.size(); ++i)
                               gx[argmax[i]] += g[i];
                       });
}

NodeId avgpool2(Tape& tape, NodeId x) {
    const Tensor& xv = tape.value(x);
    check_feature_map(xv, "avgpool2");
    check_even_spatial(xv, "avgpool2");
    const std::size_t B = xv.dim(0), C = xv.dim(1), H = xv.dim(2), W = xv.dim(3);
    const std::size_t m = H / 2, n = W / 2;
    Tensor y({B, C, m, n});
    for (std::size_t bc = 0; bc < B * C; ++bc) {
        const double* xc = xv.data() + bc * H * W;
        double* yc = y.data() + bc * m * n;
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                const std::size_t base = 2 * i * W + 2 * j;
                yc[i * n + j] = 0.25 * (xc[base] + xc[base + 1] + xc[base + W] +
                                        xc[base + W + 1]);
            }
    }
    return tape.append(std::move(y), [x, H, W, m, n](Tape& t, const Tensor& g) {
        Tensor& gx = t.grad(x);
        const std::size_t cells = g.size() / (m * n);
        for (std::size_t bc = 0; bc < cells; ++bc) {
            double* gxc = gx.data() + bc * H * W;
            const double* gc = g.data() + bc * m * n;
            for (std::size_t i = 0; i < m; ++i)
                for (std::size_t j = 0; j < n; ++j) {
                    const double q = 0.25 * gc[i * n + j];
                    const std::size_t base = 2 * i * W + 2 * j;
                    gxc[base] += q;
                    gxc[base + 1] += q;
                    gxc[base + W] += q;
                    gxc[base + W + 1] += q;
                }
        }
    });
}

NodeId dwt_ll(Tape& tape, NodeId x, const WaveletSpec& spec) {
    const Tensor& xv = tape.value(x);
    check_feature_map(xv, "dwt_ll");
    const std::size_t H = xv.dim(2), W = xv.dim(3);
    Tensor y = dwt_ll(xv, spec, kMode);
    return tape.append(std::move(y), [x, &spec, H, W](Tape& t, const Tensor& g) {
        add_into(t.grad(x), dwt_ll_backward(g, spec, kMode, H, W));
    });
}

NodeId dwt2d_stack(Tape& tape, NodeId x, const WaveletSpec& spec) {
    const Tensor& xv = tape.value(x);
    check_feature_map(xv, "dwt2d_stack");
    const std::size_t H = xv.dim(2), W = xv.dim(3);
    Tensor y = stack_bands(dwt2d(xv, spec, kMode));
    return tape.append(std::move(y), [x, &spec, H, W](Tape& t, const Tensor& g) {
        add_into(t.grad(x), dwt2d_backward(unstack_bands(g), spec, kMode, H, W));
    });
}

NodeId idwt2d_stack(Tape& tape, NodeId x, const WaveletSpec& spec) {
    const Tensor& xv = tape.value(x);
    check_feature_map(xv, "idwt2d_stack");
    if (xv.dim(1) % 4 != 0)
        throw ShapeMismatch("idwt2d_stack needs a channel count divisible by 4, "
                            "got " + xv.shape_str());
    Tensor y = idwt2d(unstack_bands(xv), spec, kMode);
    return tape.append(std::move(y), [x, &spec](Tape& t, const Tensor& g) {
        add_into(t.grad(x), stack_bands(idwt2d_backward(g, spec, kMode)));
    });
}

NodeId dwt_avg(Tape& tape, NodeId x, const WaveletSpec& spec) {
    const Tensor& xv = tape.value(x);
    check_feature_map(xv, "dwt_avg");
    const std::size_t H = xv.dim(2), W = xv.dim(3);
    const Bands2d b = dwt2d(xv, spec, kMode);
    Tensor y = zeros_like(b.ll);
    for (std::size_t i = 0; i < y.size(); ++i)
        y[i] = 0.25 * (b.ll[i] + b.lh[i] + b.hl[i] + b.hh[i]);
    return tape.append(std::move(y), [x, &spec, H, W](Tape& t, const Tensor& g) {
        Bands2d gb;
        Tensor q = zeros_like(g);
        for (std::size_t i = 0; i < g.size(); ++i) q[i] = 0.25 * g[i];
        gb.ll = q;
        gb.lh = q;
        gb.hl = q;
        gb.hh = std::move(q);
        add_into(t.grad(x), dwt2d_backward(gb, spec, kMode, H, W));
    });
}

NodeId channel_slice(Tape& tape, NodeId x, std::size_t c0, std::size_t c1) {
    const Tensor& xv = tape.value(x);
    check_feature_map(xv, "channel_slice");
    const std::size_t B = xv.dim(0), C = xv.dim(1), hw = xv.dim(2) * xv.dim(3);
    if (c0 >= c1 || c1 > C)
        throw ShapeMismatch("channel_slice range [" + std::to_string(c0) + ", " +
                            std::to_string(c1) + ") invalid for " +
                            std::to_string(C) + " channels");
    const std::size_t Cs = c1 - c0;
    Tensor y({B, Cs, xv.dim(2), xv.dim(3)});
    for (std::size_t b = 0; b < B; ++b)
        std::memcpy(y.data() + b * Cs * hw, xv.data() + (b * C + c0) * hw,
                    Cs * hw * sizeof(double));
    return tape.append(std::move(y),
                       [x, c0, Cs, C, hw, B](Tape& t, const Tensor& g) {
                           Tensor& gx = t.grad(x);
                           for (std::size_t b = 0; b < B; ++b) {
                               double* dst = gx.data() + (b * C + c0) * hw;
                               const double* src = g.data() + b * Cs * hw;
                               for (std::size_t i = 0; i < Cs * hw; ++i)
                                   dst[i] += src[i];
                           }
                       });
}

NodeId channel_concat(Tape& tape, const std::vector<NodeId>& parts) {
    if (parts.empty()) throw ShapeMismatch("channel_concat of nothing");
    const Tensor& first = tape.value(parts[0]);
    check_feature_map(first, "channel_concat");
    const std::size_t B = first.dim(0), h = first.dim(2), w = first.dim(3);
    std::size_t C = 0;
    for (NodeId p : parts) {
        const Tensor& pv = tape.value(p);
        check_feature_map(pv, "channel_concat");
        if (pv.dim(0) != B || pv.dim(2) != h || pv.dim(3) != w)
            throw ShapeMismatch("channel_concat parts disagree: " +
                                first.shape_str() + " vs " + pv.shape_str());
        C += pv.dim(1);
    }
    const std::size_t hw = h * w;
    Tensor y({B, C, h, w});
    for (std::size_t b = 0; b < B; ++b) {
        std::size_t c = 0;
        for (NodeId p : parts) {
            const Tensor& pv = tape.value(p);
            const std::size_t pc = pv.dim(1);
            std::memcpy(y.data() + (b * C + c) * hw, pv.data() + b * pc * hw,
                        pc * hw * sizeof(double));
            c += pc;
        }
    }
    return tape.append(std::move(y),
                       [parts, B, C, hw](Tape& t, const Tensor& g) {
                           std::size_t c = 0;
                           for (NodeId p : parts) {
                               Tensor& gp = t.grad(p);
                               const std::size_t pc = gp.size() / (B * hw);
                               for (std::size_t b = 0; b < B; ++b) {
                                   const double* src = g.data() + (b * C + c) * hw;
                                   double* dst = gp.data() + b * pc * hw;
                                   for (std::size_t i = 0; i < pc * hw; ++i)
                                       dst[i] += src[i];
                               }
                               c += pc;
                           }
                       });
}

Tensor soft_shrink(const Tensor& x, double lambda) {
    if (lambda < 0.0)
        throw NegativeLambda("soft_shrink threshold " + std::to_string(lambda));
    Tensor y = zeros_like(x);
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] > lambda)
            y[i] = x[i] - lambda;
        else if (x[i] < -lambda)
            y[i] = x[i] + lambda;
    }
    return y;
}

NodeId soft_shrink(Tape& tape, NodeId x, double lambda) {
    const Tensor& xv = tape.value(x);
    Tensor y = soft_shrink(xv, lambda);
    double margin = 1e300;
    for (std::size_t i = 0; i < xv.size(); ++i)
        margin = std::min(margin, std::abs(std::abs(xv[i]) - lambda));
    tape.note_kink_margin(margin);
    return tape.append(std::move(y), [x, lambda](Tape& t, const Tensor& g) {
        const Tensor& xv = t.value(x);
        Tensor& gx = t.grad(x);
        for (std::size_t i = 0; i < xv.size(); ++i)
            if (std::abs(xv[i]) > lambda) gx[i] += g[i];
    });
}

NodeId global_avg_pool(Tape& tape, NodeId x) {
    const Tensor& xv = tape.value(x);
    check_feature_map(xv, "global_avg_pool");
    const std::size_t B = xv.dim(0), C = xv.dim(1), hw = xv.dim(2) * xv.dim(3);
    Tensor y({B, C});
    for (std::size_t bc = 0; bc < B * C; ++bc) {
        const double* xc = xv.data() + bc * hw;
        double s = 0.0;
        for (std::size_t i = 0; i < hw; ++i) s += xc[i];
        y[bc] = s / static_cast<double>(hw);
    }
    return tape.append(std::move(y), [x, hw](Tape& t, const Tensor& g) {
        Tensor& gx = t.grad(x);
        const double inv = 1.0 / static_cast<double>(hw);
        for (std::size_t bc = 0; bc < g.size(); ++bc) {
            const double q = g[bc] * inv;
            double* gxc = gx.data() + bc * hw;
            for (std::size_t i = 0; i < hw; ++i) gxc[i] += q;
        }
    });
}

NodeId dense(Tape& tape, NodeId x, NodeId weight, NodeId bias) {
    const Tensor& xv = tape.value(x);
    const Tensor& wv = tape.value(weight);
    const Tensor& bv = tape.value(bias);
    if (xv.rank() != 2 || wv.rank() != 2 || xv.dim(1) != wv.dim(1))
        throw ShapeMismatch("dense expects x [B, F] and weight [K, F], got " +
                            xv.shape_str() + " and " + wv.shape_str());
    if (bv.rank() != 1 || bv.dim(0) != wv.dim(0))
        throw ShapeMismatch("dense bias shape " + bv.shape_str() +
                            " does not match weight " + wv.shape_str());
    const std::size_t B = xv.dim(0), F = xv.dim(1), K = wv.dim(0);
    Tensor y({B, K});
    for (std::size_t b = 0; b < B; ++b)
        for (std::size_t k = 0; k < K; ++k) {
            double s = bv[k];
            const double* xr = xv.data() + b * F;
            const double* wr = wv.data() + k * F;
            for (std::size_t f = 0; f < F; ++f) s += wr[f] * xr[f];
            y.at(b, k) = s;
        }
    return tape.append(std::move(y),
                       [x, weight, bias, B, F, K](Tape& t, const Tensor& g) {
                           const Tensor& xv = t.value(x);
                           const Tensor& wv = t.value(weight);
                           Tensor& gx = t.grad(x);
                           Tensor& gw = t.grad(weight);
                           Tensor& gb = t.grad(bias);
                           for (std::size_t b = 0; b < B; ++b)
                               for (std::size_t k = 0; k < K; ++k) {
                                   const double gv = g[b * K + k];
                                   gb[k] += gv;
                                   const double* xr = xv.data() + b * F;
                                   const double* wr = wv.data() + k * F;
                                   double* gxr = gx.data() + b * F;
                                   double* gwr = gw.data() + k * F;
                                   for (std::size_t f = 0; f < F; ++f) {
                                       gxr[f] += gv * wr[f];
                                       gwr[f] += gv * xr[f];
                                   }
                               }
                       });
}

Tensor softmax(const Tensor& logits) {
    if (logits.rank() != 2)
        throw ShapeMismatch("softmax expects [B, K] logits, got " +
                            logits.shape_str());
    const std::size_t B = logits.dim(0), K = logits.dim(1);
    Tensor p({B, K});
    for (std::size_t b = 0; b < B; ++b) {
        const double* z = logits.data() + b * K;
        double* pr = p.data() + b * K;
        double mx = z[0];
        for (std::size_t k = 1; k < K; ++k) mx = std::max(mx, z[k]);
        double sum = 0.0;
        for (std::size_t k = 0; k < K; ++k) {
            pr[k] = std::exp(z[k] - mx);
            sum += pr[k];
        }
        for (std::size_t k = 0; k < K; ++k) pr[k] /= sum;
    }
    return p;
}

NodeId softmax_ce(Tape& tape, NodeId logits, const std::vector<int>& labels) {
    const Tensor& zv = tape.value(logits);
    if (zv.rank() != 2 || zv.dim(0) != labels.size())
        throw ShapeMismatch("softmax_ce got logits " + zv.shape_str() + " and " +
                            std::to_string(labels.size()) + " labels");
    const std::size_t B = zv.dim(0), K = zv.dim(1);
    for (int l : labels)
        if (l < 0 || static_cast<std::size_t>(l) >= K)
            throw ShapeMismatch("label " + std::to_string(l) +
                                " outside [0, " + std::to_string(K) + ")");
    Tensor probs = softmax(zv);
    double loss = 0.0;
    for (std::size_t b = 0; b < B; ++b) {
        // log p = z - max - log sum recomputed from probs is fine here: the
        // shifted exp sum is >= 1 so the log is well conditioned.
        loss -= std::log(probs.at(b, static_cast<std::size_t>(labels[b])));
    }
    loss /= static_cast<double>(B);
    return tape.append(
        Tensor({1}, loss),
        [logits, probs = std::move(probs), labels](Tape& t, const Tensor& g) {
            Tensor& gz = t.grad(logits);
            const std::size_t B = probs.dim(0), K = probs.dim(1);
            const double scale = g[0] / static_cast<double>(B);
            for (std::size_t b = 0; b < B; ++b)
                for (std::size_t k = 0; k < K; ++k) {
                    const double ind =
                        k == static_cast<std::size_t>(labels[b]) ? 1.0 : 0.0;
                    gz.at(b, k) += scale * (probs.at(b, k) - ind);
                }
        });
}

}  // namespace wnn
