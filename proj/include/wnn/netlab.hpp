#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "wnn/tape.hpp"

namespace wnn {

enum class Architecture { ToyBaseline, ToyWave };

enum class DownsampleKind { MaxPool2, AvgPool2, StridedConv2, DwtLL, DwtAvg, DwtConcat };

const char* to_string(Architecture a);
const char* to_string(DownsampleKind k);
Architecture architecture_from_string(const std::string& s);
DownsampleKind downsample_from_string(const std::string& s);

// Three stages of [conv3x3 -> ReLU -> downsample], then global average pool
// and a dense head. The downsample kinds must match the architecture family:
// baseline kinds are MaxPool2/AvgPool2/StridedConv2, wave kinds are
// DwtLL/DwtAvg/DwtConcat.
struct ModelConfig {
    Architecture architecture = Architecture::ToyBaseline;
    std::string wavelet = "haar";
    std::array<DownsampleKind, 3> downsample = {DownsampleKind::MaxPool2,
                                                DownsampleKind::MaxPool2,
                                                DownsampleKind::MaxPool2};
    std::array<std::size_t, 3> widths = {16, 32, 64};
    std::size_t in_channels = 1;
    std::size_t input_extent = 32;
    std::size_t classes = 4;
    std::uint64_t seed = 0;
};

struct TrainConfig {
    std::size_t epochs = 20;
    std::size_t batch = 32;
    double lr = 0.05;
    double momentum = 0.9;
    // Learning rate is multiplied by decay_factor when entering each listed
    // 1-indexed epoch.
    std::vector<std::size_t> decay_epochs = {12, 17};
    double decay_factor = 0.1;
    std::uint64_t seed = 0;
    enum class Precision { Single, Double };
    Precision precision = Precision::Double;
};

struct DenoiseConfig {
    std::string wavelet = "haar";
    double lambda = 0.1;
    std::size_t levels = 1;
};

struct ParamBlock {
    std::string name;
    Tensor value;
    Tensor grad;      // filled by the most recent backward pass
    Tensor momentum;  // SGD velocity
};

// Node ids of one forward graph construction. params is parallel to
// Model::params.
struct ForwardPass {
    std::vector<NodeId> params;
    NodeId input = 0;
    NodeId logits = 0;
};

struct Model {
    ModelConfig config;
    std::vector<ParamBlock> params;

    // Builds the graph for a [B, C, H, W] batch on the tape and returns the
    // [B, classes] logits node. Parameters enter the tape as leaves.
    ForwardPass forward(Tape& tape, Tensor batch) const;

    // Copies tape gradients of the pass back into the parameter blocks.
    void collect_grads(const Tape& tape, const ForwardPass& fp);

    std::size_t param_count() const;
};

// Seeded He-normal initialization in declaration order; biases zero.
Model build_toy_model(const ModelConfig& cfg);

struct Dataset {
    Tensor images;            // [N, 1, 32, 32], values in [0, 1]
    std::vector<int> labels;  // 0 circle, 1 square, 2 cross, 3 triangle

    std::size_t size() const { return labels.size(); }
};

extern const std::array<const char*, 4> kClassNames;

// Filled shapes with jittered center and size on a black background, plus
// faint Gaussian pixel noise, clamped to [0, 1]. One RNG stream per call:
// identical (n, seed) gives a bitwise-identical dataset. Disjoint train and
// test sets must use different seeds.
Dataset synth_shapes(std::size_t n, std::uint64_t seed);

struct EpochStats {
    double loss = 0.0;       // mean cross-entropy over the epoch's samples
    double accuracy = 0.0;   // percent, training batches
    double lr = 0.0;
};

struct TrainReport {
    std::vector<EpochStats> epochs;
    double seconds = 0.0;
};

// SGD with momentum: v = mu v + g, w -= lr v, single-threaded, deterministic
// shuffles from cfg.seed. Single precision rounds weights and velocity
// through 32-bit floats after every step. A NaN or Inf batch loss aborts.
TrainReport train(Model& model, const Dataset& data, const TrainConfig& cfg);

struct EvalReport {
    double accuracy = 0.0;                  // percent
    std::vector<double> per_class_error;    // percent, indexed by label
    std::size_t count = 0;
};

EvalReport evaluate(const Model& model, const Dataset& data);

struct GradReport {
    struct Block {
        std::string name;
        double max_rel_err = 0.0;
        std::size_t checked = 0;
    };
    std::vector<Block> blocks;
    double max_rel_err = 0.0;
    double kink_margin = 0.0;
};

// Central finite differences against the tape gradients of the mean
// cross-entropy on one batch. Samples entries per block: the largest
// gradients plus an even stride through the rest. Throws KinkProximity when
// any ReLU, pooling, or shrinkage unit sits within 10*step of its kink,
// because the comparison is meaningless there.
GradReport grad_check(const Model& model, const Tensor& batch,
                      const std::vector<int>& labels, double step = 1e-5);

// One level per recursion: soft-shrink the three detail bands, keep the
// approximation (recursing into it when levels remain), reconstruct.
NodeId wavelet_denoise(Tape& tape, NodeId x, const DenoiseConfig& cfg);
Tensor wavelet_denoise(const Tensor& x, const DenoiseConfig& cfg);

// Plain stride-2 spatial subsampling x[..., ::2, ::2] on [B, C, H, W]; the
// downsampling everything else is measured against. Not a tape op.
Tensor subsample2(const Tensor& x);

// Weights go to the tensor container at path, one record per parameter
// block; the config goes to path + ".json".
void save_model(const Model& model, const std::string& path);
Model load_model(const std::string& path);

}  // namespace wnn
