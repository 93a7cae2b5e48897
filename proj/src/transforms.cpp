#include "wnn/transforms.hpp"

#include <algorithm>
#include <cstring>
#include <string>

namespace wnn {

namespace {

struct AxisView {
    std::size_t outer = 1;
    std::size_t n = 0;
    std::size_t inner = 1;
};

AxisView axis_view(const Tensor& t, std::size_t axis) {
    AxisView v;
    v.n = t.dim(axis);
    for (std::size_t i = 0; i < axis; ++i) v.outer *= t.dim(i);
    for (std::size_t i = axis + 1; i < t.rank(); ++i) v.inner *= t.dim(i);
    return v;
}

void check_extent(std::size_t n, BoundaryMode mode) {
    if (n < 2)
        throw InvalidExtent("transform extent " + std::to_string(n) +
                            " is below the minimum of 2");
    if (mode == BoundaryMode::Periodic && n % 2 != 0)
        throw InvalidExtent("periodic boundary requires an even extent, got " +
                            std::to_string(n));
}

void check_rank_at_least(const Tensor& t, std::size_t r, const char* op) {
    if (t.rank() < r)
        throw InvalidExtent(std::string(op) + " needs at least " +
                            std::to_string(r) + " axes, got tensor of shape " +
                            t.shape_str());
}

std::vector<std::size_t> with_axis(std::vector<std::size_t> shape,
                                   std::size_t axis, std::size_t extent) {
    shape[axis] = extent;
    return shape;
}

// Tap placement table: for output index k and tap t, the source (or target)
// sample is 2k + off + t. Periodic wraps; Truncate drops the tap by zeroing
// its weight, which keeps the inner loops branch-free.
struct TapTable {
    std::size_t half = 0;
    std::size_t taps = 0;
    std::vector<std::size_t> idx;
    std::vector<double> w;
};

TapTable make_taps(std::size_t n, const std::vector<double>& f, int off,
                   BoundaryMode mode) {
    TapTable tt;
    tt.half = n / 2;
    tt.taps = f.size();
    tt.idx.assign(tt.half * tt.taps, 0);
    tt.w.assign(tt.half * tt.taps, 0.0);
    const long ln = static_cast<long>(n);
    for (std::size_t k = 0; k < tt.half; ++k) {
        for (std::size_t t = 0; t < tt.taps; ++t) {
            long j = static_cast<long>(2 * k) + off + static_cast<long>(t);
            if (mode == BoundaryMode::Periodic) {
                j %= ln;
                if (j < 0) j += ln;
            } else if (j < 0 || j >= ln) {
                continue;  // weight stays zero
            }
            tt.idx[k * tt.taps + t] = static_cast<std::size_t>(j);
            tt.w[k * tt.taps + t] = f[t];
        }
    }
    return tt;
}

// out[..., k, ...] = Σ_t w[k,t] · x[..., idx[k,t], ...] along `axis`.
Tensor filter_down_axis(const Tensor& x, std::size_t axis,
                        const std::vector<double>& f, int off,
                        BoundaryMode mode) {
    const AxisView v = axis_view(x, axis);
    const TapTable tt = make_taps(v.n, f, off, mode);
    Tensor out(with_axis(x.shape(), axis, tt.half));
    const double* xp = x.data();
    double* yp = out.data();
    for (std::size_t o = 0; o < v.outer; ++o) {
        const double* xs = xp + o * v.n * v.inner;
        double* ys = yp + o * tt.half * v.inner;
        if (v.inner == 1) {
            for (std::size_t k = 0; k < tt.half; ++k) {
                const std::size_t* ik = tt.idx.data() + k * tt.taps;
                const double* wk = tt.w.data() + k * tt.taps;
                double s = 0.0;
                for (std::size_t t = 0; t < tt.taps; ++t) s += wk[t] * xs[ik[t]];
                ys[k] = s;
            }
        } else {
            for (std::size_t k = 0; k < tt.half; ++k) {
                double* yrow = ys + k * v.inner;
                std::memset(yrow, 0, v.inner * sizeof(double));
                const std::size_t* ik = tt.idx.data() + k * tt.taps;
                const double* wk = tt.w.data() + k * tt.taps;
                for (std::size_t t = 0; t < tt.taps; ++t) {
                    const double wt = wk[t];
                    const double* xrow = xs + ik[t] * v.inner;
                    for (std::size_t j = 0; j < v.inner; ++j)
                        yrow[j] += wt * xrow[j];
                }
            }
        }
    }
    return out;
}

// acc[..., 2k+off+t, ...] += w[t] · band[..., k, ...] along `axis`.
// acc must already have the target extent along `axis`.
void filter_up_axis(const Tensor& band, std::size_t axis,
                    const std::vector<double>& f, int off, BoundaryMode mode,
                    Tensor& acc) {
    const AxisView vb = axis_view(band, axis);
    const std::size_t n_out = acc.dim(axis);
    // Reuse the same placement table; here idx maps band index k to output
    // sample positions, so it is built over the output extent.
    TapTable tt;
    {
        tt.half = vb.n;
        tt.taps = f.size();
        tt.idx.assign(tt.half * tt.taps, 0);
        tt.w.assign(tt.half * tt.taps, 0.0);
        const long ln = static_cast<long>(n_out);
        for (std::size_t k = 0; k < tt.half; ++k) {
            for (std::size_t t = 0; t < tt.taps; ++t) {
                long j = static_cast<long>(2 * k) + off + static_cast<long>(t);
                if (mode == BoundaryMode::Periodic) {
                    j %= ln;
                    if (j < 0) j += ln;
                } else if (j < 0 || j >= ln) {
                    continue;
                }
                tt.idx[k * tt.taps + t] = static_cast<std::size_t>(j);
                tt.w[k * tt.taps + t] = f[t];
            }
        }
    }
    const double* bp = band.data();
    double* ap = acc.data();
    const std::size_t inner = vb.inner;
    for (std::size_t o = 0; o < vb.outer; ++o) {
        const double* bs = bp + o * vb.n * inner;
        double* as = ap + o * n_out * inner;
        if (inner == 1) {
            for (std::size_t k = 0; k < vb.n; ++k) {
                const double bv = bs[k];
                const std::size_t* ik = tt.idx.data() + k * tt.taps;
                const double* wk = tt.w.data() + k * tt.taps;
                for (std::size_t t = 0; t < tt.taps; ++t)
                    as[ik[t]] += wk[t] * bv;
            }
        } else {
            for (std::size_t k = 0; k < vb.n; ++k) {
                const double* brow = bs + k * inner;
                const std::size_t* ik = tt.idx.data() + k * tt.taps;
                const double* wk = tt.w.data() + k * tt.taps;
                for (std::size_t t = 0; t < tt.taps; ++t) {
                    const double wt = wk[t];
                    double* arow = as + ik[t] * inner;
                    for (std::size_t j = 0; j < inner; ++j)
                        arow[j] += wt * brow[j];
                }
            }
        }
    }
}

void check_band_pair(const Tensor& a, const Tensor& b, const char* op) {
    if (!a.same_shape(b))
        throw BandShapeMismatch(std::string(op) + " band shapes differ: " +
                                a.shape_str() + " vs " + b.shape_str());
}

// Resolves and validates the output extent of a reconstruction: 0 means
// twice the band extent; anything else must floor-halve back to it.
std::size_t resolve_out(std::size_t requested, std::size_t half,
                        BoundaryMode mode, const char* op) {
    std::size_t n = requested == 0 ? 2 * half : requested;
    check_extent(n, mode);
    if (n / 2 != half)
        throw BandShapeMismatch(std::string(op) + " output extent " +
                                std::to_string(n) + " inconsistent with band extent " +
                                std::to_string(half));
    return n;
}

}  // namespace

const Tensor& Bands3d::band(const char* name) const {
    return const_cast<Bands3d*>(this)->band(name);
}

Tensor& Bands3d::band(const char* name) {
    const std::string s(name);
    if (s.size() != 3 || s.find_first_not_of("lh") != std::string::npos)
        throw Error("unknown 3d band name: " + s);
    return comp[index(s[0] == 'h', s[1] == 'h', s[2] == 'h')];
}

BandMatrices build_matrices(std::size_t N, const WaveletSpec& spec,
                            FilterRole role, BoundaryMode mode) {
    check_extent(N, mode);
    const bool rec = role == FilterRole::Rec;
    const std::vector<double>& lo = rec ? spec.lo_rec : spec.lo_dec;
    const std::vector<double>& hi = rec ? spec.hi_rec : spec.hi_dec;
    const int off_lo = rec ? spec.rec_lo_offset : 0;
    const int off_hi = rec ? spec.rec_hi_offset : 0;

    BandMatrices bm;
    bm.N = N;
    bm.mode = mode;
    const std::size_t half = N / 2;
    bm.L = Tensor({half, N});
    bm.H = Tensor({half, N});
    const long ln = static_cast<long>(N);
    auto place = [&](Tensor& m, const std::vector<double>& f, int off) {
        for (std::size_t r = 0; r < half; ++r) {
            for (std::size_t t = 0; t < f.size(); ++t) {
                long j = static_cast<long>(2 * r) + off + static_cast<long>(t);
                if (mode == BoundaryMode::Periodic) {
                    j %= ln;
                    if (j < 0) j += ln;
                } else if (j < 0 || j >= ln) {
                    continue;
                }
                // += rather than =: short signals can wrap a long filter onto
                // the same column twice.
                m.at(r, static_cast<std::size_t>(j)) += f[t];
            }
        }
    };
    place(bm.L, lo, off_lo);
    place(bm.H, hi, off_hi);
    return bm;
}

Bands1d dwt1d(const Tensor& x, const WaveletSpec& spec, BoundaryMode mode) {
    check_rank_at_least(x, 1, "dwt1d");
    require_finite(x, "dwt1d");
    const std::size_t axis = x.rank() - 1;
    check_extent(x.dim(axis), mode);
    Bands1d b;
    b.low = filter_down_axis(x, axis, spec.lo_dec, 0, mode);
    b.high = filter_down_axis(x, axis, spec.hi_dec, 0, mode);
    return b;
}

Tensor idwt1d(const Bands1d& bands, const WaveletSpec& spec, BoundaryMode mode,
              std::size_t n_out) {
    check_band_pair(bands.low, bands.high, "idwt1d");
    require_finite(bands.low, "idwt1d");
    require_finite(bands.high, "idwt1d");
    check_rank_at_least(bands.low, 1, "idwt1d");
    const std::size_t axis = bands.low.rank() - 1;
    const std::size_t n = resolve_out(n_out, bands.low.dim(axis), mode, "idwt1d");
    Tensor x(with_axis(bands.low.shape(), axis, n));
    filter_up_axis(bands.low, axis, spec.lo_rec, spec.rec_lo_offset, mode, x);
    filter_up_axis(bands.high, axis, spec.hi_rec, spec.rec_hi_offset, mode, x);
    return x;
}

Tensor dwt1d_backward(const Tensor& g_low, const Tensor& g_high,
                      const WaveletSpec& spec, BoundaryMode mode,
                      std::size_t n) {
    check_band_pair(g_low, g_high, "dwt1d_backward");
    check_rank_at_least(g_low, 1, "dwt1d_backward");
    const std::size_t axis = g_low.rank() - 1;
    const std::size_t n_res = resolve_out(n, g_low.dim(axis), mode, "dwt1d_backward");
    Tensor g(with_axis(g_low.shape(), axis, n_res));
    // Transposed analysis matrices: scatter with the decomposition filters.
    filter_up_axis(g_low, axis, spec.lo_dec, 0, mode, g);
    filter_up_axis(g_high, axis, spec.hi_dec, 0, mode, g);
    return g;
}

Bands1d idwt1d_backward(const Tensor& g_x, const WaveletSpec& spec,
                        BoundaryMode mode) {
    check_rank_at_least(g_x, 1, "idwt1d_backward");
    const std::size_t axis = g_x.rank() - 1;
    check_extent(g_x.dim(axis), mode);
    Bands1d g;
    // Transposed synthesis: gather with the reconstruction filters, keeping
    // the same placement offsets the forward used.
    g.low = filter_down_axis(g_x, axis, spec.lo_rec, spec.rec_lo_offset, mode);
    g.high = filter_down_axis(g_x, axis, spec.hi_rec, spec.rec_hi_offset, mode);
    return g;
}

Bands2d dwt2d(const Tensor& x, const WaveletSpec& spec, BoundaryMode mode) {
    check_rank_at_least(x, 2, "dwt2d");
    require_finite(x, "dwt2d");
    const std::size_t an = x.rank() - 1;
    const std::size_t am = x.rank() - 2;
    check_extent(x.dim(an), mode);
    check_extent(x.dim(am), mode);
    Tensor tl = filter_down_axis(x, an, spec.lo_dec, 0, mode);
    Tensor th = filter_down_axis(x, an, spec.hi_dec, 0, mode);
    Bands2d b;
    b.ll = filter_down_axis(tl, am, spec.lo_dec, 0, mode);
    b.lh = filter_down_axis(tl, am, spec.hi_dec, 0, mode);
    b.hl = filter_down_axis(th, am, spec.lo_dec, 0, mode);
    b.hh = filter_down_axis(th, am, spec.hi_dec, 0, mode);
    return b;
}

Tensor idwt2d(const Bands2d& bands, const WaveletSpec& spec, BoundaryMode mode,
              std::size_t m_out, std::size_t n_out) {
    check_band_pair(bands.ll, bands.lh, "idwt2d");
    check_band_pair(bands.ll, bands.hl, "idwt2d");
    check_band_pair(bands.ll, bands.hh, "idwt2d");
    require_finite(bands.ll, "idwt2d");
    require_finite(bands.lh, "idwt2d");
    require_finite(bands.hl, "idwt2d");
    require_finite(bands.hh, "idwt2d");
    check_rank_at_least(bands.ll, 2, "idwt2d");
    const std::size_t an = bands.ll.rank() - 1;
    const std::size_t am = bands.ll.rank() - 2;
    const std::size_t m = resolve_out(m_out, bands.ll.dim(am), mode, "idwt2d");
    const std::size_t n = resolve_out(n_out, bands.ll.dim(an), mode, "idwt2d");

    Tensor a(with_axis(bands.ll.shape(), am, m));
    filter_up_axis(bands.ll, am, spec.lo_rec, spec.rec_lo_offset, mode, a);
    filter_up_axis(bands.lh, am, spec.hi_rec, spec.rec_hi_offset, mode, a);
    Tensor bmat(a.shape());
    filter_up_axis(bands.hl, am, spec.lo_rec, spec.rec_lo_offset, mode, bmat);
    filter_up_axis(bands.hh, am, spec.hi_rec, spec.rec_hi_offset, mode, bmat);

    Tensor x(with_axis(a.shape(), an, n));
    filter_up_axis(a, an, spec.lo_rec, spec.rec_lo_offset, mode, x);
    filter_up_axis(bmat, an, spec.hi_rec, spec.rec_hi_offset, mode, x);
    return x;
}

Tensor dwt2d_backward(const Bands2d& g_bands, const WaveletSpec& spec,
                      BoundaryMode mode, std::size_t m, std::size_t n) {
    check_band_pair(g_bands.ll, g_bands.lh, "dwt2d_backward");
    check_band_pair(g_bands.ll, g_bands.hl, "dwt2d_backward");
    check_band_pair(g_bands.ll, g_bands.hh, "dwt2d_backward");
    check_rank_at_least(g_bands.ll, 2, "dwt2d_backward");
    const std::size_t an = g_bands.ll.rank() - 1;
    const std::size_t am = g_bands.ll.rank() - 2;
    const std::size_t mr = resolve_out(m, g_bands.ll.dim(am), mode, "dwt2d_backward");
    const std::size_t nr = resolve_out(n, g_bands.ll.dim(an), mode, "dwt2d_backward");

    Tensor a(with_axis(g_bands.ll.shape(), am, mr));
    filter_up_axis(g_bands.ll, am, spec.lo_dec, 0, mode, a);
    filter_up_axis(g_bands.lh, am, spec.hi_dec, 0, mode, a);
    Tensor b(a.shape());
    filter_up_axis(g_bands.hl, am, spec.lo_dec, 0, mode, b);
    filter_up_axis(g_bands.hh, am, spec.hi_dec, 0, mode, b);

    Tensor g(with_axis(a.shape(), an, nr));
    filter_up_axis(a, an, spec.lo_dec, 0, mode, g);
    filter_up_axis(b, an, spec.hi_dec, 0, mode, g);
    return g;
}

Bands2d idwt2d_backward(const Tensor& g_x, const WaveletSpec& spec,
                        BoundaryMode mode) {
    check_rank_at_least(g_x, 2, "idwt2d_backward");
    const std::size_t an = g_x.rank() - 1;
    const std::size_t am = g_x.rank() - 2;
    check_extent(g_x.dim(an), mode);
    check_extent(g_x.dim(am), mode);
    Tensor tl = filter_down_axis(g_x, an, spec.lo_rec, spec.rec_lo_offset, mode);
    Tensor th = filter_down_axis(g_x, an, spec.hi_rec, spec.rec_hi_offset, mode);
    Bands2d g;
    g.ll = filter_down_axis(tl, am, spec.lo_rec, spec.rec_lo_offset, mode);
    g.lh = filter_down_axis(tl, am, spec.hi_rec, spec.rec_hi_offset, mode);
    g.hl = filter_down_axis(th, am, spec.lo_rec, spec.rec_lo_offset, mode);
    g.hh = filter_down_axis(th, am, spec.hi_rec, spec.rec_hi_offset, mode);
    return g;
}

Bands3d dwt3d(const Tensor& x, const WaveletSpec& spec, BoundaryMode mode) {
    check_rank_at_least(x, 3, "dwt3d");
    require_finite(x, "dwt3d");
    const std::size_t an = x.rank() - 1;
    const std::size_t am = x.rank() - 2;
    const std::size_t ad = x.rank() - 3;
    check_extent(x.dim(an), mode);
    check_extent(x.dim(am), mode);
    check_extent(x.dim(ad), mode);
    Bands3d out;
    for (int nh = 0; nh < 2; ++nh) {
        Tensor tn = filter_down_axis(x, an, nh ? spec.hi_dec : spec.lo_dec, 0, mode);
        for (int mh = 0; mh < 2; ++mh) {
            Tensor tm = filter_down_axis(tn, am, mh ? spec.hi_dec : spec.lo_dec, 0, mode);
            for (int dh = 0; dh < 2; ++dh) {
                out.comp[Bands3d::index(nh, mh, dh)] =
                    filter_down_axis(tm, ad, dh ? spec.hi_dec : spec.lo_dec, 0, mode);
            }
        }
    }
    return out;
}

namespace {

// Shared three-axis reconstruction: used by idwt3d (synthesis filters with
// their offsets) and by dwt3d_backward (transposed analysis filters).
Tensor up3(const Bands3d& bands, const std::vector<double>& lo,
           const std::vector<double>& hi, int off_lo, int off_hi,
           BoundaryMode mode, std::size_t d, std::size_t m, std::size_t n,
           const char* op) {
    for (std::size_t i = 1; i < 8; ++i)
        check_band_pair(bands.comp[0], bands.comp[i], op);
    check_rank_at_least(bands.comp[0], 3, op);
    const std::size_t an = bands.comp[0].rank() - 1;
    const std::size_t am = bands.comp[0].rank() - 2;
    const std::size_t ad = bands.comp[0].rank() - 3;
    const std::size_t dr = resolve_out(d, bands.comp[0].dim(ad), mode, op);
    const std::size_t mr = resolve_out(m, bands.comp[0].dim(am), mode, op);
    const std::size_t nr = resolve_out(n, bands.comp[0].dim(an), mode, op);

    std::array<Tensor, 4> td;  // indexed by (nh<<1)|mh after the D-axis merge
    for (int nh = 0; nh < 2; ++nh) {
        for (int mh = 0; mh < 2; ++mh) {
            Tensor acc(with_axis(bands.comp[0].shape(), ad, dr));
            filter_up_axis(bands.comp[Bands3d::index(nh, mh, 0)], ad, lo, off_lo,
                           mode, acc);
            filter_up_axis(bands.comp[Bands3d::index(nh, mh, 1)], ad, hi, off_hi,
                           mode, acc);
            td[(nh << 1) | mh] = std::move(acc);
        }
    }
    std::array<Tensor, 2> tn;
    for (int nh = 0; nh < 2; ++nh) {
        Tensor acc(with_axis(td[0].shape(), am, mr));
        filter_up_axis(td[(nh << 1) | 0], am, lo, off_lo, mode, acc);
        filter_up_axis(td[(nh << 1) | 1], am, hi, off_hi, mode, acc);
        tn[nh] = std::move(acc);
    }
    Tensor x(with_axis(tn[0].shape(), an, nr));
    filter_up_axis(tn[0], an, lo, off_lo, mode, x);
    filter_up_axis(tn[1], an, hi, off_hi, mode, x);
    return x;
}

// Shared three-axis decomposition with explicit filters/offsets: used by
// idwt3d_backward (transposed synthesis).
Bands3d down3(const Tensor& x, const std::vector<double>& lo,
              const std::vector<double>& hi, int off_lo, int off_hi,
              BoundaryMode mode, const char* op) {
    check_rank_at_least(x, 3, op);
    const std::size_t an = x.rank() - 1;
    const std::size_t am = x.rank() - 2;
    const std::size_t ad = x.rank() - 3;
    check_extent(x.dim(an), mode);
    check_extent(x.dim(am), mode);
    check_extent(x.dim(ad), mode);
    Bands3d out;
    for (int nh = 0; nh < 2; ++nh) {
        Tensor tn = filter_down_axis(x, an, nh ? hi : lo, nh ? off_hi : off_lo, mode);
        for (int mh = 0; mh < 2; ++mh) {
            Tensor tm = filter_down_axis(tn, am, mh ? hi : lo, mh ? off_hi : off_lo, mode);
            for (int dh = 0; dh < 2; ++dh) {
                out.comp[Bands3d::index(nh, mh, dh)] = filter_down_axis(
                    tm, ad, dh ? hi : lo, dh ? off_hi : off_lo, mode);
            }
        }
    }
    return out;
}

}  // namespace

Tensor idwt3d(const Bands3d& bands, const WaveletSpec& spec, BoundaryMode mode,
              std::size_t d_out, std::size_t m_out, std::size_t n_out) {
    for (std::size_t i = 0; i < 8; ++i)
        require_finite(bands.comp[i], "idwt3d");
    return up3(bands, spec.lo_rec, spec.hi_rec, spec.rec_lo_offset,
               spec.rec_hi_offset, mode, d_out, m_out, n_out, "idwt3d");
}

Tensor dwt3d_backward(const Bands3d& g_bands, const WaveletSpec& spec,
                      BoundaryMode mode, std::size_t d, std::size_t m,
                      std::size_t n) {
    return up3(g_bands, spec.lo_dec, spec.hi_dec, 0, 0, mode, d, m, n,
               "dwt3d_backward");
}

Bands3d idwt3d_backward(const Tensor& g_x, const WaveletSpec& spec,
                        BoundaryMode mode) {
    return down3(g_x, spec.lo_rec, spec.hi_rec, spec.rec_lo_offset,
                 spec.rec_hi_offset, mode, "idwt3d_backward");
}

Tensor dwt_ll(const Tensor& x, const WaveletSpec& spec, BoundaryMode mode) {
    if (x.rank() != 4)
        throw InvalidExtent("dwt_ll expects a batch,channel,height,width tensor, got " +
                            x.shape_str());
    require_finite(x, "dwt_ll");
    const std::size_t an = 3, am = 2;
    check_extent(x.dim(an), mode);
    check_extent(x.dim(am), mode);
    // Same two filtering passes dwt2d uses for its ll component, and nothing
    // else; the detail components are never formed.
    Tensor tl = filter_down_axis(x, an, spec.lo_dec, 0, mode);
    return filter_down_axis(tl, am, spec.lo_dec, 0, mode);
}

Tensor dwt_ll_backward(const Tensor& g, const WaveletSpec& spec,
                       BoundaryMode mode, std::size_t m, std::size_t n) {
    if (g.rank() != 4)
        throw InvalidExtent("dwt_ll_backward expects a rank-4 gradient, got " +
                            g.shape_str());
    const std::size_t an = 3, am = 2;
    const std::size_t mr = resolve_out(m, g.dim(am), mode, "dwt_ll_backward");
    const std::size_t nr = resolve_out(n, g.dim(an), mode, "dwt_ll_backward");
    Tensor a(with_axis(g.shape(), am, mr));
    filter_up_axis(g, am, spec.lo_dec, 0, mode, a);
    Tensor out(with_axis(a.shape(), an, nr));
    filter_up_axis(a, an, spec.lo_dec, 0, mode, out);
    return out;
}

std::uint64_t madd_dwt2d(std::uint64_t m, std::uint64_t n, std::uint64_t c) {
    if (m < 1 || n < 1 || c < 1)
        throw InvalidExtent("madd_dwt2d requires positive M, N, C");
    if ((3 * m * n) % 4 != 0)
        throw NonIntegralResult("madd_dwt2d: 3MN = " + std::to_string(3 * m * n) +
                                " is not divisible by 4");
    // 4C(M^2 N + M N^2 / 2 - 3 M N / 4), expanded so every term is integral
    // once the divisibility check has passed.
    return 4 * c * m * m * n + 2 * c * m * n * n - 3 * c * m * n;
}

std::uint64_t madd_idwt2d(std::uint64_t m, std::uint64_t n, std::uint64_t c) {
    if (m < 1 || n < 1 || c < 1)
        throw InvalidExtent("madd_idwt2d requires positive M, N, C");
    if ((3 * m * n) % 4 != 0)
        throw NonIntegralResult("madd_idwt2d: 3MN = " + std::to_string(3 * m * n) +
                                " is not divisible by 4");
    return 4 * c * m * n * n + 2 * c * m * m * n - 3 * c * m * n + 3;
}

}  // namespace wnn
