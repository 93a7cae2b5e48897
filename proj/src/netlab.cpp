#include "wnn/netlab.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <set>

#include "json.hpp"
#include "wnn/rng.hpp"
#include "wnn/tensor_io.hpp"

namespace wnn {

const std::array<const char*, 4> kClassNames = {"circle", "square", "cross",
                                                "triangle"};

const char* to_string(Architecture a) {
    return a == Architecture::ToyBaseline ? "baseline" : "wave";
}

const char* to_string(DownsampleKind k) {
    switch (k) {
        case DownsampleKind::MaxPool2: return "maxpool";
        case DownsampleKind::AvgPool2: return "avgpool";
        case DownsampleKind::StridedConv2: return "stride";
        case DownsampleKind::DwtLL: return "dwt_ll";
        case DownsampleKind::DwtAvg: return "dwt_avg";
        case DownsampleKind::DwtConcat: return "dwt_concat";
    }
    return "?";
}

Architecture architecture_from_string(const std::string& s) {
    if (s == "baseline") return Architecture::ToyBaseline;
    if (s == "wave") return Architecture::ToyWave;
    throw InvalidConfig("unknown architecture '" + s + "'");
}

DownsampleKind downsample_from_string(const std::string& s) {
    for (DownsampleKind k :
         {DownsampleKind::MaxPool2, DownsampleKind::AvgPool2,
          DownsampleKind::StridedConv2, DownsampleKind::DwtLL,
          DownsampleKind::DwtAvg, DownsampleKind::DwtConcat})
        if (s == to_string(k)) return k;
    throw InvalidConfig("unknown downsample kind '" + s + "'");
}

namespace {

bool is_wavelet_kind(DownsampleKind k) {
    return k == DownsampleKind::DwtLL || k == DownsampleKind::DwtAvg ||
           k == DownsampleKind::DwtConcat;
}

void validate_config(const ModelConfig& cfg) {
    for (std::size_t w : cfg.widths)
        if (w == 0) throw InvalidConfig("channel widths must be positive");
    if (cfg.in_channels == 0) throw InvalidConfig("in_channels must be positive");
    if (cfg.classes < 2) throw InvalidConfig("need at least 2 classes");
    if (cfg.input_extent < 8 || cfg.input_extent % 8 != 0)
        throw InvalidConfig("input extent must be a positive multiple of 8 to "
                            "survive three halvings, got " +
                            std::to_string(cfg.input_extent));
    bool any_wavelet = false;
    for (DownsampleKind k : cfg.downsample) {
        const bool wave_kind = is_wavelet_kind(k);
        any_wavelet = any_wavelet || wave_kind;
        if (cfg.architecture == Architecture::ToyWave && !wave_kind)
            throw InvalidConfig(std::string("wave architecture cannot use ") +
                                to_string(k));
        if (cfg.architecture == Architecture::ToyBaseline && wave_kind)
            throw InvalidConfig(std::string("baseline architecture cannot use ") +
                                to_string(k));
    }
    if (any_wavelet) get_wavelet(cfg.wavelet);  // UnknownWavelet if bad
}

// Channels leaving a stage that entered its downsample with c channels.
std::size_t after_downsample(DownsampleKind k, std::size_t c) {
    return k == DownsampleKind::DwtConcat ? 4 * c : c;
}

Tensor he_conv(Rng& rng, std::size_t co, std::size_t ci) {
    Tensor w({co, ci, 3, 3});
    const double std = std::sqrt(2.0 / static_cast<double>(ci * 9));
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = rng.normal(0.0, std);
    return w;
}

}  // namespace

Model build_toy_model(const ModelConfig& cfg) {
    validate_config(cfg);
    Model m;
    m.config = cfg;
    Rng rng(cfg.seed);
    auto block = [&](const std::string& name, Tensor value) {
        ParamBlock b;
        b.name = name;
        b.grad = zeros_like(value);
        b.momentum = zeros_like(value);
        b.value = std::move(value);
        m.params.push_back(std::move(b));
    };

    std::size_t c = cfg.in_channels;
    for (std::size_t s = 0; s < 3; ++s) {
        const std::string tag = std::to_string(s + 1);
        block("conv" + tag + ".weight", he_conv(rng, cfg.widths[s], c));
        block("conv" + tag + ".bias", Tensor({cfg.widths[s]}));
        c = cfg.widths[s];
        if (cfg.downsample[s] == DownsampleKind::StridedConv2) {
            block("down" + tag + ".weight", he_conv(rng, c, c));
            block("down" + tag + ".bias", Tensor({c}));
        }
        c = after_downsample(cfg.downsample[s], c);
    }
    Tensor hw({cfg.classes, c});
    const double std = std::sqrt(2.0 / static_cast<double>(c));
    for (std::size_t i = 0; i < hw.size(); ++i) hw[i] = rng.normal(0.0, std);
    block("head.weight", std::move(hw));
    block("head.bias", Tensor({cfg.classes}));
    return m;
}

ForwardPass Model::forward(Tape& tape, Tensor batch) const {
    if (batch.rank() != 4 || batch.dim(1) != config.in_channels ||
        batch.dim(2) != config.input_extent ||
        batch.dim(3) != config.input_extent)
        throw ShapeMismatch("model expects [B, " +
                            std::to_string(config.in_channels) + ", " +
                            std::to_string(config.input_extent) + ", " +
                            std::to_string(config.input_extent) + "], got " +
                            batch.shape_str());
    ForwardPass fp;
    fp.params.reserve(params.size());
    for (const ParamBlock& b : params) fp.params.push_back(tape.leaf(b.value));
    fp.input = tape.leaf(std::move(batch));

    // Parameter cursor follows the creation order of build_toy_model.
    std::size_t cursor = 0;
    auto next = [&](const char* suffix) {
        if (cursor >= params.size() ||
            params[cursor].name.find(suffix) == std::string::npos)
            throw InvalidConfig("parameter list does not match architecture at '" +
                                std::string(suffix) + "'");
        return fp.params[cursor++];
    };

    const WaveletSpec* spec = nullptr;
    for (DownsampleKind k : config.downsample)
        if (is_wavelet_kind(k)) spec = &get_wavelet(config.wavelet);

    NodeId x = fp.input;
    for (std::size_t s = 0; s < 3; ++s) {
        const NodeId w = next(".weight");
        const NodeId b = next(".bias");
        x = relu(tape, conv2d(tape, x, w, b, 1));
        switch (config.downsample[s]) {
            case DownsampleKind::MaxPool2:
                x = maxpool2(tape, x);
                break;
            case DownsampleKind::AvgPool2:
                x = avgpool2(tape, x);
                break;
            case DownsampleKind::StridedConv2: {
                const NodeId dw = next(".weight");
                const NodeId db = next(".bias");
                x = conv2d(tape, x, dw, db, 2);
                break;
            }
            case DownsampleKind::DwtLL:
                x = dwt_ll(tape, x, *spec);
                break;
            case DownsampleKind::DwtAvg:
                x = dwt_avg(tape, x, *spec);
                break;
            case DownsampleKind::DwtConcat:
                x = dwt2d_stack(tape, x, *spec);
                break;
        }
    }
    x = global_avg_pool(tape, x);
    // Two statements: argument evaluation order must not reorder the cursor.
    const NodeId head_w = next(".weight");
    const NodeId head_b = next(".bias");
    fp.logits = dense(tape, x, head_w, head_b);
    return fp;
}

void Model::collect_grads(const Tape& tape, const ForwardPass& fp) {
    for (std::size_t i = 0; i < params.size(); ++i)
        params[i].grad = tape.grad(fp.params[i]);
}

std::size_t Model::param_count() const {
    std::size_t n = 0;
    for (const ParamBlock& b : params) n += b.value.size();
    return n;
}

Dataset synth_shapes(std::size_t n, std::uint64_t seed) {
    if (n == 0) throw EmptyDataset("synth_shapes of size 0");
    const std::size_t E = 32;
    Dataset d;
    d.images = Tensor({n, 1, E, E});
    d.labels.resize(n);
    Rng rng(seed);
    for (std::size_t s = 0; s < n; ++s) {
        const int cls = static_cast<int>(rng.index(4));
        const long cx = 10 + static_cast<long>(rng.index(13));  // 16 +- 6
        const long cy = 10 + static_cast<long>(rng.index(13));
        const long r = 1 + static_cast<long>(rng.index(6));     // 1..6
        d.labels[s] = cls;
        double* img = d.images.data() + s * E * E;
        auto put = [&](long i, long j) {
            if (i >= 0 && i < static_cast<long>(E) && j >= 0 &&
                j < static_cast<long>(E))
                img[i * E + j] = 1.0;
        };
        // Small, partly hollow glyphs; classifiers have to read structure,
        // not just mass, which keeps the trained models off the accuracy
        // ceiling and leaves the robustness metrics a working range. At
        // r = 1 the disk and the cross render to the same five pixels, so
        // a sliver of the distribution is irreducibly ambiguous and the
        // decision boundary stays within reach of small perturbations.
        for (long di = -r; di <= r; ++di)
            for (long dj = -r; dj <= r; ++dj) {
                bool on = false;
                switch (cls) {
                    case 0: on = di * di + dj * dj <= r * r; break;  // disk
                    case 1:  // square outline
                        on = std::max(std::abs(di), std::abs(dj)) == r;
                        break;
                    case 2: on = di == 0 || dj == 0; break;  // thin cross
                    case 3: on = std::abs(dj) <= (di + r) / 2; break;  // apex up
                }
                if (on) put(cy + di, cx + dj);
            }
        for (std::size_t p = 0; p < E * E; ++p)
            img[p] = std::clamp(img[p] + rng.normal(0.0, 0.02), 0.0, 1.0);
    }
    return d;
}

namespace {

void check_dataset(const Dataset& d, const char* op) {
    if (d.size() == 0) throw EmptyDataset(op);
    if (d.images.rank() != 4 || d.images.dim(0) != d.size())
        throw ShapeMismatch(std::string(op) + ": images " +
                            d.images.shape_str() + " do not match " +
                            std::to_string(d.size()) + " labels");
}

// Gathers dataset rows into a batch tensor plus its label vector.
void gather(const Dataset& d, const std::vector<std::size_t>& order,
            std::size_t lo, std::size_t hi, Tensor& batch,
            std::vector<int>& labels) {
    const std::size_t row = d.images.size() / d.images.dim(0);
    auto shape = d.images.shape();
    shape[0] = hi - lo;
    batch = Tensor(shape);
    labels.resize(hi - lo);
    for (std::size_t i = lo; i < hi; ++i) {
        std::copy_n(d.images.data() + order[i] * row, row,
                    batch.data() + (i - lo) * row);
        labels[i - lo] = d.labels[order[i]];
    }
}

std::size_t correct_count(const Tensor& logits, const std::vector<int>& labels) {
    const std::size_t B = logits.dim(0), K = logits.dim(1);
    std::size_t hits = 0;
    for (std::size_t b = 0; b < B; ++b) {
        const double* z = logits.data() + b * K;
        std::size_t best = 0;
        for (std::size_t k = 1; k < K; ++k)
            if (z[k] > z[best]) best = k;
        if (static_cast<int>(best) == labels[b]) ++hits;
    }
    return hits;
}

double round_f32(double v) { return static_cast<double>(static_cast<float>(v)); }

}  // namespace

TrainReport train(Model& model, const Dataset& data, const TrainConfig& cfg) {
    if (cfg.epochs == 0 || cfg.batch == 0)
        throw InvalidConfig("epochs and batch size must be positive");
    if (cfg.lr < 0.0 || cfg.momentum < 0.0 || cfg.momentum >= 1.0)
        throw InvalidConfig("need lr >= 0 and momentum in [0, 1)");
    check_dataset(data, "train");

    const auto t0 = std::chrono::steady_clock::now();
    const std::size_t N = data.size();
    Rng shuffle_rng(cfg.seed);
    std::vector<std::size_t> order(N);
    for (std::size_t i = 0; i < N; ++i) order[i] = i;

    TrainReport report;
    double lr = cfg.lr;
    for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
        if (std::find(cfg.decay_epochs.begin(), cfg.decay_epochs.end(), epoch) !=
            cfg.decay_epochs.end())
            lr *= cfg.decay_factor;
        shuffle_rng.shuffle(order);

        double loss_sum = 0.0;
        std::size_t hits = 0;
        for (std::size_t lo = 0; lo < N; lo += cfg.batch) {
            const std::size_t hi = std::min(N, lo + cfg.batch);
            Tensor batch;
            std::vector<int> labels;
            gather(data, order, lo, hi, batch, labels);

            Tape tape;
            ForwardPass fp = model.forward(tape, std::move(batch));
            const NodeId loss = softmax_ce(tape, fp.logits, labels);
            const double loss_val = tape.value(loss)[0];
            if (!std::isfinite(loss_val))
                throw DivergedLoss("epoch " + std::to_string(epoch) +
                                   ", batch at sample " + std::to_string(lo) +
                                   ": loss " + std::to_string(loss_val));
            tape.backward(loss);
            model.collect_grads(tape, fp);
            hits += correct_count(tape.value(fp.logits), labels);
            loss_sum += loss_val * static_cast<double>(hi - lo);

            for (ParamBlock& b : model.params) {
                for (std::size_t i = 0; i < b.value.size(); ++i) {
                    b.momentum[i] = cfg.momentum * b.momentum[i] + b.grad[i];
                    b.value[i] -= lr * b.momentum[i];
                }
                if (cfg.precision == TrainConfig::Precision::Single) {
                    for (std::size_t i = 0; i < b.value.size(); ++i) {
                        b.value[i] = round_f32(b.value[i]);
                        b.momentum[i] = round_f32(b.momentum[i]);
                    }
                }
            }
        }

        EpochStats st;
        st.loss = loss_sum / static_cast<double>(N);
        st.accuracy = 100.0 * static_cast<double>(hits) / static_cast<double>(N);
        st.lr = lr;
        report.epochs.push_back(st);
    }
    report.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    return report;
}

EvalReport evaluate(const Model& model, const Dataset& data) {
    check_dataset(data, "evaluate");
    const std::size_t N = data.size();
    std::vector<std::size_t> order(N);
    for (std::size_t i = 0; i < N; ++i) order[i] = i;

    std::vector<std::size_t> class_total(model.config.classes, 0);
    std::vector<std::size_t> class_wrong(model.config.classes, 0);
    std::size_t hits = 0;
    for (std::size_t lo = 0; lo < N; lo += 64) {
        const std::size_t hi = std::min(N, lo + 64);
        Tensor batch;
        std::vector<int> labels;
        gather(data, order, lo, hi, batch, labels);
        Tape tape;
        ForwardPass fp = model.forward(tape, std::move(batch));
        const Tensor& logits = tape.value(fp.logits);
        const std::size_t K = logits.dim(1);
        for (std::size_t b = 0; b < hi - lo; ++b) {
            const double* z = logits.data() + b * K;
            std::size_t best = 0;
            for (std::size_t k = 1; k < K; ++k)
                if (z[k] > z[best]) best = k;
            const auto lab = static_cast<std::size_t>(labels[b]);
            if (lab >= model.config.classes)
                throw ShapeMismatch("label " + std::to_string(labels[b]) +
                                    " outside the model's class range");
            ++class_total[lab];
            if (best == lab)
                ++hits;
            else
                ++class_wrong[lab];
        }
    }

    EvalReport rep;
    rep.count = N;
    rep.accuracy = 100.0 * static_cast<double>(hits) / static_cast<double>(N);
    rep.per_class_error.resize(model.config.classes, 0.0);
    for (std::size_t c = 0; c < model.config.classes; ++c)
        if (class_total[c] > 0)
            rep.per_class_error[c] = 100.0 * static_cast<double>(class_wrong[c]) /
                                     static_cast<double>(class_total[c]);
    return rep;
}

GradReport grad_check(const Model& model, const Tensor& batch,
                      const std::vector<int>& labels, double step) {
    require_finite(batch, "grad_check");

    Tape tape;
    ForwardPass fp = model.forward(tape, batch);
    const NodeId loss = softmax_ce(tape, fp.logits, labels);
    tape.backward(loss);
    const double margin = tape.min_kink_margin();
    if (margin <= 10.0 * step)
        throw KinkProximity("a unit sits " + std::to_string(margin) +
                            " from its kink, too close for step " +
                            std::to_string(step));

    Model probe = model;
    auto loss_at = [&]() {
        Tape t;
        ForwardPass p = probe.forward(t, batch);
        return t.value(softmax_ce(t, p.logits, labels))[0];
    };

    // Sampled central differences. The floor absorbs the ~1e-9 absolute
    // cancellation noise of differencing an O(1) loss at this step size;
    // entries below it are compared absolutely, scaled by the floor.
    const double floor_val = 1e-3;
    GradReport rep;
    rep.kink_margin = margin;
    for (std::size_t bi = 0; bi < model.params.size(); ++bi) {
        const Tensor& g = tape.grad(fp.params[bi]);
        const std::size_t sz = g.size();
        std::set<std::size_t> pick;
        std::vector<std::size_t> by_mag(sz);
        for (std::size_t i = 0; i < sz; ++i) by_mag[i] = i;
        std::partial_sort(by_mag.begin(),
                          by_mag.begin() + std::min<std::size_t>(8, sz),
                          by_mag.end(), [&](std::size_t a, std::size_t b) {
                              return std::abs(g[a]) > std::abs(g[b]);
                          });
        for (std::size_t i = 0; i < std::min<std::size_t>(8, sz); ++i)
            pick.insert(by_mag[i]);
        const std::size_t stride = std::max<std::size_t>(1, sz / 8);
        for (std::size_t i = 0; i < sz; i += stride) pick.insert(i);

        GradReport::Block blk;
        blk.name = model.params[bi].name;
        for (std::size_t i : pick) {
            double& slot = probe.params[bi].value[i];
            const double keep = slot;
            slot = keep + step;
            const double up = loss_at();
            slot = keep - step;
            const double down = loss_at();
            slot = keep;
            const double fd = (up - down) / (2.0 * step);
            const double denom =
                std::max({std::abs(g[i]), std::abs(fd), floor_val});
            blk.max_rel_err = std::max(blk.max_rel_err,
                                       std::abs(g[i] - fd) / denom);
        }
        blk.checked = pick.size();
        rep.max_rel_err = std::max(rep.max_rel_err, blk.max_rel_err);
        rep.blocks.push_back(std::move(blk));
    }
    return rep;
}

namespace {

void check_denoise_cfg(const DenoiseConfig& cfg) {
    if (cfg.lambda < 0.0)
        throw NegativeLambda("denoise threshold " + std::to_string(cfg.lambda));
    if (cfg.levels == 0) throw InvalidConfig("denoise needs at least 1 level");
}

NodeId denoise_level(Tape& tape, NodeId x, const WaveletSpec& spec,
                     double lambda, std::size_t levels) {
    const std::size_t C = tape.value(x).dim(1);
    const NodeId stack = dwt2d_stack(tape, x, spec);
    NodeId ll = channel_slice(tape, stack, 0, C);
    const NodeId lh = soft_shrink(tape, channel_slice(tape, stack, C, 2 * C), lambda);
    const NodeId hl = soft_shrink(tape, channel_slice(tape, stack, 2 * C, 3 * C), lambda);
    const NodeId hh = soft_shrink(tape, channel_slice(tape, stack, 3 * C, 4 * C), lambda);
    if (levels > 1) ll = denoise_level(tape, ll, spec, lambda, levels - 1);
    return idwt2d_stack(tape, channel_concat(tape, {ll, lh, hl, hh}), spec);
}

}  // namespace

NodeId wavelet_denoise(Tape& tape, NodeId x, const DenoiseConfig& cfg) {
    check_denoise_cfg(cfg);
    const Tensor& xv = tape.value(x);
    if (xv.rank() != 4)
        throw ShapeMismatch("wavelet_denoise expects [B, C, H, W], got " +
                            xv.shape_str());
    const std::size_t div = std::size_t(1) << cfg.levels;
    if (xv.dim(2) % div != 0 || xv.dim(3) % div != 0)
        throw InvalidExtent("spatial extents of " + xv.shape_str() +
                            " not divisible by 2^" + std::to_string(cfg.levels));
    return denoise_level(tape, x, get_wavelet(cfg.wavelet), cfg.lambda,
                         cfg.levels);
}

Tensor wavelet_denoise(const Tensor& x, const DenoiseConfig& cfg) {
    const bool chw = x.rank() == 3;
    Tensor in = x;
    if (chw) {
        auto s = x.shape();
        in = Tensor::from({1, s[0], s[1], s[2]}, x.vec());
    }
    Tape tape;
    const NodeId out = wavelet_denoise(tape, tape.leaf(std::move(in)), cfg);
    Tensor result = tape.value(out);
    if (chw) {
        auto s = result.shape();
        result = Tensor::from({s[1], s[2], s[3]}, result.vec());
    }
    return result;
}

Tensor subsample2(const Tensor& x) {
    if (x.rank() != 4)
        throw ShapeMismatch("subsample2 expects [B, C, H, W], got " +
                            x.shape_str());
    const std::size_t B = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
    if (H % 2 != 0 || W % 2 != 0 || H < 2 || W < 2)
        throw InvalidExtent("subsample2 needs even spatial extents, got " +
                            x.shape_str());
    Tensor y({B, C, H / 2, W / 2});
    for (std::size_t bc = 0; bc < B * C; ++bc)
        for (std::size_t i = 0; i < H / 2; ++i)
            for (std::size_t j = 0; j < W / 2; ++j)
                y[(bc * (H / 2) + i) * (W / 2) + j] =
                    x[(bc * H + 2 * i) * W + 2 * j];
    return y;
}

void save_model(const Model& model, const std::string& path) {
    TensorMap weights;
    for (const ParamBlock& b : model.params) weights.emplace_back(b.name, b.value);
    write_tensors(path, weights, TensorDType::F64);

    nlohmann::ordered_json j;
    j["schema"] = "wnn-model-v1";
    j["architecture"] = to_string(model.config.architecture);
    j["wavelet"] = model.config.wavelet;
    j["downsample"] = {to_string(model.config.downsample[0]),
                       to_string(model.config.downsample[1]),
                       to_string(model.config.downsample[2])};
    j["widths"] = model.config.widths;
    j["in_channels"] = model.config.in_channels;
    j["input_extent"] = model.config.input_extent;
    j["classes"] = model.config.classes;
    j["seed"] = model.config.seed;
    std::ofstream f(path + ".json", std::ios::trunc);
    if (!f) throw IoFailure("cannot open '" + path + ".json' for writing");
    f << j.dump(2) << "\n";
}

Model load_model(const std::string& path) {
    std::ifstream f(path + ".json");
    if (!f) throw IoFailure("cannot open '" + path + ".json' for reading");
    nlohmann::json j;
    try {
        f >> j;
    } catch (const nlohmann::json::exception& e) {
        throw MalformedHeader("model sidecar: " + std::string(e.what()));
    }
    if (j.value("schema", "") != "wnn-model-v1")
        throw UnsupportedVersion("model sidecar schema '" +
                                 j.value("schema", "") + "'");
    ModelConfig cfg;
    cfg.architecture = architecture_from_string(j.at("architecture"));
    cfg.wavelet = j.at("wavelet");
    for (std::size_t s = 0; s < 3; ++s)
        cfg.downsample[s] = downsample_from_string(j.at("downsample").at(s));
    for (std::size_t s = 0; s < 3; ++s) cfg.widths[s] = j.at("widths").at(s);
    cfg.in_channels = j.at("in_channels");
    cfg.input_extent = j.at("input_extent");
    cfg.classes = j.at("classes");
    cfg.seed = j.at("seed");

    Model m = build_toy_model(cfg);
    const TensorMap weights = read_tensors(path);
    if (weights.size() != m.params.size())
        throw MalformedHeader("expected " + std::to_string(m.params.size()) +
                              " parameter records, file has " +
                              std::to_string(weights.size()));
    for (ParamBlock& b : m.params) {
        const Tensor& w = find_tensor(weights, b.name);
        if (!w.same_shape(b.value))
            throw ShapeMismatch("record '" + b.name + "' has shape " +
                                w.shape_str() + ", model expects " +
                                b.value.shape_str());
        b.value = w;
        b.momentum = zeros_like(w);
        b.grad = zeros_like(w);
    }
    return m;
}

}  // namespace wnn
