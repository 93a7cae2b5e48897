#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "wnn/filterbank.hpp"
#include "wnn/tensor.hpp"

namespace wnn {

using NodeId = std::size_t;

// Reverse-mode autodiff over eagerly evaluated tensors. Nodes are appended in
// evaluation order, which is already a topological order, so the backward
// sweep is a single reverse walk. Closures receive the output gradient and
// accumulate into input gradients through the tape; they capture node ids,
// never Node references, because the node vector reallocates as it grows.
class Tape {
public:
    // A leaf holds an input or parameter value; nothing flows backward out
    // of it except into its own gradient buffer.
    NodeId leaf(Tensor value);

    // Appends a computed node. The closure may be empty for ops with no
    // differentiable inputs.
    NodeId append(Tensor value,
                  std::function<void(Tape&, const Tensor& g_out)> backward);

    const Tensor& value(NodeId id) const { return nodes_[id].value; }
    Tensor& grad(NodeId id) { return nodes_[id].grad; }
    const Tensor& grad(NodeId id) const { return nodes_[id].grad; }
    std::size_t size() const { return nodes_.size(); }

    // Seeds the scalar root with gradient 1 and sweeps back to the leaves.
    // The root must hold exactly one element.
    void backward(NodeId root);

    // Smallest distance to a decision boundary seen by any kinked op (ReLU
    // zero crossing, pooling argmax margin, shrinkage threshold) during
    // forward evaluation. Finite-difference checks are meaningless when a
    // perturbation can cross one of these, so they consult this first.
    double min_kink_margin() const { return kink_margin_; }
    void note_kink_margin(double m);

private:
    struct Node {
        Tensor value;
        Tensor grad;
        std::function<void(Tape&, const Tensor&)> backward;
    };
    std::vector<Node> nodes_;
    double kink_margin_ = 1e300;
};

// Layer ops. All take node ids on a tape and return the output node id.
// Feature maps are [batch, channels, height, width]; the wavelet ops use the
// Periodic boundary throughout.

// Cross-correlation with a [out_ch, in_ch, 3, 3] kernel, padding 1.
// Stride 1 preserves the spatial extent, stride 2 halves it.
NodeId conv2d(Tape& tape, NodeId x, NodeId weight, NodeId bias, int stride);

NodeId relu(Tape& tape, NodeId x);

// 2x2 window, stride 2. Ties resolve to the first index in row-major window
// order, so gradients are deterministic.
NodeId maxpool2(Tape& tape, NodeId x);
NodeId avgpool2(Tape& tape, NodeId x);

// Wavelet downsampling heads. dwt_ll keeps the approximation band only;
// dwt2d_stack lays out all four bands as channel groups [ll, lh, hl, hh],
// quadrupling the channel count; dwt_avg averages the four bands; idwt2d_stack
// inverts dwt2d_stack. The spec is held by reference in the backward closure
// and must outlive the tape; registry entries from get_wavelet qualify.
NodeId dwt_ll(Tape& tape, NodeId x, const WaveletSpec& spec);
NodeId dwt2d_stack(Tape& tape, NodeId x, const WaveletSpec& spec);
NodeId idwt2d_stack(Tape& tape, NodeId x, const WaveletSpec& spec);
NodeId dwt_avg(Tape& tape, NodeId x, const WaveletSpec& spec);

// Channel range [c0, c1) of a feature map / concatenation along channels.
NodeId channel_slice(Tape& tape, NodeId x, std::size_t c0, std::size_t c1);
NodeId channel_concat(Tape& tape, const std::vector<NodeId>& parts);

// Elementwise soft threshold: x-λ above λ, x+λ below -λ, zero between.
// The gradient is the indicator of |x| > λ.
NodeId soft_shrink(Tape& tape, NodeId x, double lambda);
Tensor soft_shrink(const Tensor& x, double lambda);

// [B, C, H, W] -> [B, C] spatial mean.
NodeId global_avg_pool(Tape& tape, NodeId x);

// y = x W^T + b with x [B, F], weight [K, F], bias [K].
NodeId dense(Tape& tape, NodeId x, NodeId weight, NodeId bias);

// Mean cross-entropy of softmax(logits) against integer labels, as a
// one-element node. Log-sum-exp is max-shifted for stability.
NodeId softmax_ce(Tape& tape, NodeId logits, const std::vector<int>& labels);

// Row-wise softmax of a [B, K] tensor, outside the tape.
Tensor softmax(const Tensor& logits);

}  // namespace wnn
