#pragma once

#include <array>
#include <cstdint>
#include <utility>

#include "wnn/filterbank.hpp"
#include "wnn/tensor.hpp"

namespace wnn {

// Boundary handling for the filtering+downsampling pass.
// Truncate: signal is zero outside [0, N); analysis matrices are cut to
// ⌊N/2⌋×N rows. Reconstruction is not exact near the edges in this mode.
// Periodic: indices wrap; exact reconstruction holds for even extents.
enum class BoundaryMode { Truncate, Periodic };

enum class FilterRole { Dec, Rec };

struct Bands1d {
    Tensor low;
    Tensor high;
};

// Subband names follow the matrix form ll = L X Lt, lh = H X Lt,
// hl = L X Ht, hh = H X Ht: the first letter is the filter applied along the
// last (horizontal) axis, the second letter the filter along the first
// (vertical) axis of the trailing 2D block.
struct Bands2d {
    Tensor ll;
    Tensor lh;
    Tensor hl;
    Tensor hh;
};

// Eight octant components of a 3D transform. Same letter convention extended
// to three axes: name[0] is the filter along the last axis, name[2] along the
// first. Component order counts the name as binary with l=0, h=1:
// lll, llh, lhl, lhh, hll, hlh, hhl, hhh.
struct Bands3d {
    std::array<Tensor, 8> comp;

    static std::size_t index(bool last_high, bool mid_high, bool first_high) {
        return (static_cast<std::size_t>(last_high) << 2) |
               (static_cast<std::size_t>(mid_high) << 1) |
               static_cast<std::size_t>(first_high);
    }

    // Lookup by name, e.g. band("lhh"). Unknown names throw.
    const Tensor& band(const char* name) const;
    Tensor& band(const char* name);
};

// Dense ⌊N/2⌋×N analysis or synthesis matrices. Reference path only: the
// separable filtering below must agree with products against these.
struct BandMatrices {
    Tensor L;
    Tensor H;
    std::size_t N = 0;
    BoundaryMode mode = BoundaryMode::Periodic;
};

BandMatrices build_matrices(std::size_t N, const WaveletSpec& spec,
                            FilterRole role, BoundaryMode mode);

// 1D transform along the last axis; leading axes are batch.
Bands1d dwt1d(const Tensor& x, const WaveletSpec& spec, BoundaryMode mode);
Tensor idwt1d(const Bands1d& bands, const WaveletSpec& spec, BoundaryMode mode,
              std::size_t n_out = 0);  // 0 means twice the band extent

// Gradient of dwt1d: applies the transposed analysis matrices to the band
// gradients. For biorthogonal banks this is deliberately not the synthesis
// pair; the forward map is linear in x, so its adjoint uses its own filters.
Tensor dwt1d_backward(const Tensor& g_low, const Tensor& g_high,
                      const WaveletSpec& spec, BoundaryMode mode,
                      std::size_t n);

// Gradient of idwt1d: transposed synthesis matrices applied to the gradient
// of the reconstruction.
Bands1d idwt1d_backward(const Tensor& g_x, const WaveletSpec& spec,
                        BoundaryMode mode);

// 2D transform over the trailing two axes.
Bands2d dwt2d(const Tensor& x, const WaveletSpec& spec, BoundaryMode mode);
Tensor idwt2d(const Bands2d& bands, const WaveletSpec& spec, BoundaryMode mode,
              std::size_t m_out = 0, std::size_t n_out = 0);
Tensor dwt2d_backward(const Bands2d& g_bands, const WaveletSpec& spec,
                      BoundaryMode mode, std::size_t m, std::size_t n);
Bands2d idwt2d_backward(const Tensor& g_x, const WaveletSpec& spec,
                        BoundaryMode mode);

// 3D transform over the trailing three axes.
Bands3d dwt3d(const Tensor& x, const WaveletSpec& spec, BoundaryMode mode);
Tensor idwt3d(const Bands3d& bands, const WaveletSpec& spec, BoundaryMode mode,
              std::size_t d_out = 0, std::size_t m_out = 0,
              std::size_t n_out = 0);
Tensor dwt3d_backward(const Bands3d& g_bands, const WaveletSpec& spec,
                      BoundaryMode mode, std::size_t d, std::size_t m,
                      std::size_t n);
Bands3d idwt3d_backward(const Tensor& g_x, const WaveletSpec& spec,
                        BoundaryMode mode);

// Low-low component only, for use as a downsampling layer on [B, C, M, N]
// feature maps. Skips the three detail components entirely; what it does
// compute is bit-identical to dwt2d(x).ll.
Tensor dwt_ll(const Tensor& x, const WaveletSpec& spec, BoundaryMode mode);
Tensor dwt_ll_backward(const Tensor& g, const WaveletSpec& spec,
                       BoundaryMode mode, std::size_t m, std::size_t n);

// Multiply-add counts of a 2D transform on a C-channel M×N input, evaluated
// in exact integer arithmetic. The closed forms contain quarter terms that
// are integral only when 4 divides 3MN; anything else is rejected.
std::uint64_t madd_dwt2d(std::uint64_t m, std::uint64_t n, std::uint64_t c);
std::uint64_t madd_idwt2d(std::uint64_t m, std::uint64_t n, std::uint64_t c);

}  // namespace wnn
